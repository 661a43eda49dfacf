//! Brute-force subformula enumerator working on serialized markup only.
//!
//! It re-reads the compact serialization with its own scanner, takes each
//! element's byte range as its exact token, and builds unified variants by
//! rewriting leaf text in that substring.

use std::collections::BTreeMap;

const WRAPPERS: &[&str] = &["math", "mrow"];
const SKIPPED: &[&str] = &[
    "mo", "mtext", "mspace", "plus", "minus", "times", "divide", "power", "eq", "lt", "gt", "leq", "geq", "neq", "root",
];

struct Element {
    name: String,
    /// Byte range of the whole element in the source.
    range: (usize, usize),
    /// Byte range of the text content, for leaves.
    text: Option<(usize, usize)>,
    children: Vec<Element>,
}

fn scan(src: &str, at: usize) -> (Element, usize) {
    assert_eq!(&src[at..at + 1], "<", "element expected at {at}");
    let tag_end = at + src[at..].find('>').unwrap();
    let self_closing = src[..tag_end].ends_with('/');
    let head = src[at + 1..if self_closing { tag_end - 1 } else { tag_end }].trim();
    let name = head.split_whitespace().next().unwrap().to_string();
    if self_closing {
        let element = Element {
            name,
            range: (at, tag_end + 1),
            text: None,
            children: vec![],
        };
        return (element, tag_end + 1);
    }
    let mut pos = tag_end + 1;
    let close = format!("</{name}>");
    if !src[pos..].starts_with('<') || src[pos..].starts_with(&close) {
        // leaf text, possibly empty
        let end = pos + src[pos..].find(&close).unwrap();
        let element = Element {
            name,
            range: (at, end + close.len()),
            text: Some((pos, end)),
            children: vec![],
        };
        return (element, end + close.len());
    }
    let mut children = Vec::new();
    while !src[pos..].starts_with(&close) {
        let (child, next) = scan(src, pos);
        children.push(child);
        pos = next;
    }
    let end = pos + close.len();
    (
        Element {
            name,
            range: (at, end),
            text: None,
            children,
        },
        end,
    )
}

fn rewrite(src: &str, e: &Element, variables: bool, constants: bool, out: &mut String) {
    match (e.text, e.children.is_empty()) {
        (Some((ts, te)), _) => {
            out.push_str(&src[e.range.0..ts]);
            let replaced = match e.name.as_str() {
                "mi" | "ci" if variables => "§id",
                "mn" | "cn" if constants => "§const",
                _ => &src[ts..te],
            };
            out.push_str(replaced);
            out.push_str(&src[te..e.range.1]);
        }
        (None, true) => out.push_str(&src[e.range.0..e.range.1]),
        (None, false) => {
            let first = e.children[0].range.0;
            let last = e.children.last().unwrap().range.1;
            out.push_str(&src[e.range.0..first]);
            for child in &e.children {
                rewrite(src, child, variables, constants, out);
            }
            out.push_str(&src[last..e.range.1]);
        }
    }
}

fn visit(
    src: &str,
    e: &Element,
    depth: usize,
    weights: (f64, f64, f64),
    prefix: &str,
    count: &mut usize,
    terms: &mut BTreeMap<String, f64>,
) {
    let wrapper = WRAPPERS.contains(&e.name.as_str()) && e.children.len() == 1;
    if wrapper {
        visit(src, &e.children[0], depth, weights, prefix, count, terms);
        return;
    }
    if SKIPPED.contains(&e.name.as_str()) {
        return;
    }
    *count += 1;
    let (l, uv, uc) = weights;
    let base = l.powi(depth as i32);
    let variant = |v: bool, c: bool| {
        let mut s = String::new();
        rewrite(src, e, v, c, &mut s);
        s
    };
    let candidates = [
        (variant(false, false), base),
        (variant(true, false), base * uv),
        (variant(false, true), base * uc),
        (variant(true, true), base * uv * uc),
    ];
    let mut seen: Vec<&str> = Vec::new();
    for (token, weight) in &candidates {
        if seen.contains(&token.as_str()) {
            continue;
        }
        seen.push(token);
        *terms.entry(format!("{prefix}{token}")).or_insert(0.0) += weight;
    }
    for child in &e.children {
        visit(src, child, depth + 1, weights, prefix, count, terms);
    }
}

/// Subformula count and token weights for one serialized single-encoding
/// formula.
pub fn enumerate(markup: &str, content: bool, weights: (f64, f64, f64)) -> (usize, BTreeMap<String, f64>) {
    let (root, end) = scan(markup, 0);
    assert_eq!(end, markup.len());
    let mut count = 0;
    let mut terms = BTreeMap::new();
    let prefix = if content { "C:" } else { "P:" };
    visit(markup, &root, 0, weights, prefix, &mut count, &mut terms);
    (count, terms)
}
