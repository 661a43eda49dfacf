//! Canonicalization of formula trees.
//!
//! MathML from different producers encodes the same formula in different
//! ways: redundant grouping, `mfenced` vs explicit fences, presentational
//! attributes, operator glyph variants, invisible operators, `semantics`
//! wrappers and combined scripts. Each of those dimensions is collapsed by one
//! toggleable [`Rule`]; [`canonicalize`] applies the enabled rules bottom-up
//! until the tree stops changing.

mod report;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::mathml::{Element, Formula, MathNode};

pub use report::{generate_report, ReportEntry, ReportError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    /// Single-child mrow collapse and nested mrow splicing.
    R1MrowFlatten,
    /// Drop attributes outside the whitelist.
    R2AttributeStrip,
    /// `mfenced` to an mrow with explicit fence operators.
    R3MfencedExpand,
    /// Fold operator glyph variants; delete invisible and star multiplication.
    R4OperatorNormalize,
    /// Remove `mspace` and empty `mtext`; trim leaf text.
    R5WhitespaceScrub,
    /// Collapse `semantics` wrappers left with one child.
    R6SemanticsSplit,
    /// `msubsup(b, sub, sup)` to `msup(msub(b, sub), sup)`.
    R7ScriptNormalize,
}

impl Rule {
    pub const ALL: [Rule; 7] = [
        Rule::R1MrowFlatten,
        Rule::R2AttributeStrip,
        Rule::R3MfencedExpand,
        Rule::R4OperatorNormalize,
        Rule::R5WhitespaceScrub,
        Rule::R6SemanticsSplit,
        Rule::R7ScriptNormalize,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Rule::R1MrowFlatten => "R1",
            Rule::R2AttributeStrip => "R2",
            Rule::R3MfencedExpand => "R3",
            Rule::R4OperatorNormalize => "R4",
            Rule::R5WhitespaceScrub => "R5",
            Rule::R6SemanticsSplit => "R6",
            Rule::R7ScriptNormalize => "R7",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Rule::ALL
            .into_iter()
            .find(|rule| rule.code().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown canonicalization rule {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalizationConfig {
    pub rules_enabled: BTreeSet<Rule>,
    /// Attribute names that survive R2 on every element.
    pub attribute_whitelist: BTreeSet<String>,
}

impl Default for CanonicalizationConfig {
    fn default() -> Self {
        CanonicalizationConfig {
            rules_enabled: Rule::ALL.into_iter().collect(),
            attribute_whitelist: BTreeSet::new(),
        }
    }
}

impl CanonicalizationConfig {
    pub fn only(rules: impl IntoIterator<Item = Rule>) -> Self {
        CanonicalizationConfig {
            rules_enabled: rules.into_iter().collect(),
            ..Default::default()
        }
    }

    fn on(&self, rule: Rule) -> bool {
        self.rules_enabled.contains(&rule)
    }
}

/// Canonical form of a formula under `cfg`.
pub fn canonicalize(formula: &Formula, cfg: &CanonicalizationConfig) -> Formula {
    canonicalize_counting(formula, cfg).0
}

/// Like [`canonicalize`], also reporting how many bottom-up passes ran
/// (including the final pass that observed no change).
pub fn canonicalize_counting(formula: &Formula, cfg: &CanonicalizationConfig) -> (Formula, usize) {
    let mut root = formula.root.clone();
    let limit = root.depth() + 8;
    let mut passes = 0;
    loop {
        passes += 1;
        let next = rewrite(&root, cfg);
        if next == root || passes >= limit {
            root = next;
            break;
        }
        root = next;
    }
    let canonical = Formula::new(root, formula.source).expect("canonicalization preserves formula invariants");
    (canonical, passes)
}

fn rewrite(node: &MathNode, cfg: &CanonicalizationConfig) -> MathNode {
    let children = node.children.iter().map(|c| rewrite(c, cfg)).collect();
    let node = MathNode {
        element: node.element,
        attributes: node.attributes.clone(),
        text: node.text.clone(),
        children,
    };
    apply_rules(node, cfg)
}

/// Elements whose children form a free-length row.
fn is_row_container(element: Element) -> bool {
    matches!(element, Element::Mrow | Element::Math | Element::Msqrt)
}

fn apply_rules(mut node: MathNode, cfg: &CanonicalizationConfig) -> MathNode {
    if cfg.on(Rule::R3MfencedExpand) && node.is(Element::Mfenced) {
        node = expand_mfenced(node);
    }
    if cfg.on(Rule::R2AttributeStrip) {
        let element = node.element;
        let keep_fences = element == Element::Mfenced;
        node.attributes.retain(|name, _| {
            cfg.attribute_whitelist.contains(name)
                || (element == Element::AnnotationXml && name == "encoding")
                || (keep_fences && matches!(name.as_str(), "open" | "close" | "separators"))
        });
    }
    if cfg.on(Rule::R5WhitespaceScrub) {
        if let Some(text) = node.text.as_mut() {
            let trimmed = text.trim();
            if trimmed.len() != text.len() {
                *text = trimmed.to_string();
            }
        }
        if is_row_container(node.element) {
            node.children.retain(|child| {
                !(child.is(Element::Mspace) || (child.is(Element::Mtext) && child.text().trim().is_empty()))
            });
        }
    }
    if cfg.on(Rule::R1MrowFlatten) && node.is(Element::Mrow) {
        node.children = splice_rows(std::mem::take(&mut node.children));
    }
    if cfg.on(Rule::R4OperatorNormalize) {
        if node.is(Element::Mo) {
            if let Some(folded) = fold_operator(node.text()) {
                node.text = Some(folded.to_string());
            }
        }
        if is_row_container(node.element) {
            node.children = drop_invisible_operators(std::mem::take(&mut node.children));
        }
    }
    if cfg.on(Rule::R6SemanticsSplit) && node.is(Element::Semantics) && node.children.len() == 1 {
        let child = node.children.pop().unwrap();
        node = if child.is(Element::AnnotationXml) && child.children.len() == 1 {
            child.children.into_iter().next().unwrap()
        } else {
            child
        };
    }
    if cfg.on(Rule::R7ScriptNormalize) && node.is(Element::Msubsup) && node.children.len() == 3 {
        let sup = node.children.pop().unwrap();
        let sub = node.children.pop().unwrap();
        let base = node.children.pop().unwrap();
        let mut msup = MathNode::node(Element::Msup, vec![MathNode::node(Element::Msub, vec![base, sub]), sup]);
        msup.attributes = node.attributes;
        node = msup;
    }
    if cfg.on(Rule::R1MrowFlatten) {
        if node.is(Element::Mrow) && node.children.len() == 1 {
            return node.children.pop().unwrap();
        }
        if matches!(node.element, Element::Math | Element::Msqrt) && node.children.len() > 1 {
            let children = splice_rows(std::mem::take(&mut node.children));
            node.children = vec![MathNode::mrow(children)];
        }
    }
    node
}

fn splice_rows(children: Vec<MathNode>) -> Vec<MathNode> {
    let mut out = Vec::with_capacity(children.len());
    for child in children {
        if child.is(Element::Mrow) && child.attributes.is_empty() {
            out.extend(child.children);
        } else {
            out.push(child);
        }
    }
    out
}

fn expand_mfenced(node: MathNode) -> MathNode {
    let open = node.attributes.get("open").map_or("(", String::as_str);
    let close = node.attributes.get("close").map_or(")", String::as_str);
    let separators: Vec<char> = node
        .attributes
        .get("separators")
        .map_or(",", String::as_str)
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect();
    let mut items = Vec::with_capacity(node.children.len() * 2 + 2);
    if !open.is_empty() {
        items.push(MathNode::mo(open));
    }
    let count = node.children.len();
    for (i, child) in node.children.into_iter().enumerate() {
        items.push(child);
        if i + 1 < count && !separators.is_empty() {
            let sep = separators.get(i).unwrap_or(separators.last().unwrap());
            items.push(MathNode::mo(sep.to_string()));
        }
    }
    if !close.is_empty() {
        items.push(MathNode::mo(close));
    }
    MathNode::mrow(items)
}

/// Operator glyph folding table; `None` leaves the text as is.
fn fold_operator(text: &str) -> Option<&'static str> {
    Some(match text {
        "-" | "\u{2010}" | "\u{2013}" | "\u{FE63}" | "\u{FF0D}" => "\u{2212}",
        "\u{2217}" => "*",
        "\u{2219}" => "\u{22C5}",
        "<=" | "\u{2266}" => "\u{2264}",
        ">=" | "\u{2267}" => "\u{2265}",
        "!=" => "\u{2260}",
        _ => return None,
    })
}

/// Multiplication-like operators with no visual weight in canonical form.
fn is_invisible_operator(text: &str) -> bool {
    matches!(
        text,
        "*" | "\u{2217}" | "\u{00B7}" | "\u{2061}" | "\u{2062}" | "\u{2063}" | "\u{2064}"
    )
}

fn ends_operand(node: &MathNode) -> bool {
    !node.is(Element::Mo) || matches!(node.text(), ")" | "]")
}

fn starts_operand(node: &MathNode) -> bool {
    !node.is(Element::Mo) || matches!(node.text(), "(" | "[")
}

fn drop_invisible_operators(children: Vec<MathNode>) -> Vec<MathNode> {
    let mut out: Vec<MathNode> = Vec::with_capacity(children.len());
    let mut iter = children.into_iter().peekable();
    while let Some(child) = iter.next() {
        let removable = child.is(Element::Mo)
            && is_invisible_operator(child.text())
            && out.last().is_some_and(ends_operand)
            && iter.peek().is_some_and(starts_operand);
        if !removable {
            out.push(child);
        }
    }
    out
}
