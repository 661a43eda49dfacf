//! Random formula trees for property tests.

#![allow(dead_code)]

use formulary_core::mathml::{Element, Formula, MathNode, Source};
use proptest::prelude::*;

pub const MAX_DEPTH: u32 = 5;

fn leaf_text(pool: &'static [&'static str]) -> impl Strategy<Value = String> {
    prop::sample::select(pool).prop_map(str::to_string)
}

const IDENTIFIERS: &[&str] = &["a", "b", "c", "x", "y", "E", "m", "α", "π", "sin", " x", "z "];
const NUMBERS: &[&str] = &["0", "1", "2", "10", "3.5", " 7"];
const OPERATORS: &[&str] = &[
    "+", "-", "−", "=", "<", "≤", "<=", "*", "\u{2062}", "·", "⋅", "×", "(", ")", "[", "]", ",", "/",
];
const ATTRIBUTES: &[(&str, &str)] = &[
    ("mathvariant", "italic"),
    ("stretchy", "false"),
    ("class", "ltx_Math"),
    ("id", "p1.m1"),
    ("fence", "true"),
];

fn attributes() -> impl Strategy<Value = Vec<(String, String)>> {
    prop::collection::vec(prop::sample::select(ATTRIBUTES), 0..2)
        .prop_map(|attrs| attrs.into_iter().map(|(k, v)| (k.to_string(), v.to_string())).collect())
}

fn with_attributes(mut node: MathNode, attrs: Vec<(String, String)>) -> MathNode {
    for (k, v) in attrs {
        node.attributes.insert(k, v);
    }
    node
}

fn presentation_leaf() -> impl Strategy<Value = MathNode> {
    prop_oneof![
        4 => leaf_text(IDENTIFIERS).prop_map(MathNode::mi),
        2 => leaf_text(NUMBERS).prop_map(MathNode::mn),
        3 => leaf_text(OPERATORS).prop_map(MathNode::mo),
        1 => leaf_text(&["", " ", "if"]).prop_map(|t| MathNode::leaf(Element::Mtext, t)),
        1 => Just(MathNode::node(Element::Mspace, vec![])),
    ]
}

/// Valid presentation trees up to [`MAX_DEPTH`] levels, with attribute
/// noise, fences, nested rows, scripts and invisible operators.
pub fn presentation_tree() -> impl Strategy<Value = MathNode> {
    let leaf = (presentation_leaf(), attributes()).prop_map(|(n, a)| with_attributes(n, a));
    leaf.prop_recursive(MAX_DEPTH - 1, 48, 4, |inner| {
        let node = prop_oneof![
            3 => prop::collection::vec(inner.clone(), 0..5).prop_map(MathNode::mrow),
            1 => prop::collection::vec(inner.clone(), 2..=2).prop_map(|c| MathNode::node(Element::Msup, c)),
            1 => prop::collection::vec(inner.clone(), 2..=2).prop_map(|c| MathNode::node(Element::Msub, c)),
            1 => prop::collection::vec(inner.clone(), 3..=3).prop_map(|c| MathNode::node(Element::Msubsup, c)),
            1 => prop::collection::vec(inner.clone(), 2..=2).prop_map(|c| MathNode::node(Element::Mfrac, c)),
            1 => prop::collection::vec(inner.clone(), 1..3).prop_map(|c| MathNode::node(Element::Msqrt, c)),
            1 => prop::collection::vec(inner.clone(), 2..=2).prop_map(|c| MathNode::node(Element::Mroot, c)),
            1 => prop::collection::vec(inner.clone(), 2..=2).prop_map(|c| MathNode::node(Element::Mover, c)),
            1 => prop::collection::vec(inner.clone(), 3..=3).prop_map(|c| MathNode::node(Element::Munderover, c)),
            2 => (
                prop::collection::vec(inner.clone(), 0..4),
                prop::option::of(prop::sample::select(&["[", "{", "|"][..])),
                prop::option::of(prop::sample::select(&[";", ",;", ""][..])),
            )
                .prop_map(|(c, open, sep)| {
                    let mut node = MathNode::node(Element::Mfenced, c);
                    if let Some(open) = open {
                        node = node.with_attr("open", open).with_attr("close", open);
                    }
                    if let Some(sep) = sep {
                        node = node.with_attr("separators", sep);
                    }
                    node
                }),
        ];
        (node, attributes()).prop_map(|(n, a)| with_attributes(n, a))
    })
}

const CONTENT_HEADS: &[Element] = &[
    Element::Plus,
    Element::Minus,
    Element::Times,
    Element::Divide,
    Element::Power,
    Element::Eq,
    Element::Leq,
    Element::Root,
];

pub fn content_tree() -> impl Strategy<Value = MathNode> {
    let leaf = prop_oneof![
        3 => leaf_text(&["a", "b", "x", "E", "m", "c"]).prop_map(MathNode::ci),
        2 => leaf_text(&["0", "1", "2"]).prop_map(MathNode::cn),
        1 => leaf_text(&["pi"]).prop_map(|t| MathNode::leaf(Element::Csymbol, t)),
    ];
    leaf.prop_recursive(MAX_DEPTH - 1, 48, 3, |inner| {
        (prop::sample::select(CONTENT_HEADS), prop::collection::vec(inner, 1..4))
            .prop_map(|(head, args)| MathNode::apply(head, args))
    })
}

/// A presentation formula, optionally in a `math` root or a semantics pair.
pub fn formula() -> impl Strategy<Value = Formula> {
    prop_oneof![
        3 => presentation_tree(),
        2 => presentation_tree().prop_map(|t| MathNode::node(Element::Math, vec![t])),
        1 => (presentation_tree(), content_tree()).prop_map(|(p, c)| {
            let annotation = MathNode::node(Element::AnnotationXml, vec![c])
                .with_attr("encoding", "MathML-Content");
            MathNode::node(
                Element::Math,
                vec![MathNode::node(Element::Semantics, vec![p, annotation])],
            )
        }),
        1 => presentation_tree().prop_map(|t| {
            MathNode::node(Element::Math, vec![MathNode::node(Element::Semantics, vec![t])])
        }),
    ]
    .prop_map(|root| Formula::new(root, Source::MathmlDocument).expect("generated tree is valid"))
}

/// Any valid formula in a single encoding, used where both families matter.
pub fn single_encoding_formula() -> impl Strategy<Value = Formula> {
    prop_oneof![
        presentation_tree(),
        content_tree(),
        presentation_tree().prop_map(|t| MathNode::node(Element::Math, vec![t])),
        content_tree().prop_map(|t| MathNode::node(Element::Math, vec![t])),
    ]
    .prop_map(|root| Formula::new(root, Source::MathmlDocument).expect("generated tree is valid"))
}

/// Identifier and number texts in document order, trimmed.
pub fn operand_texts(node: &MathNode) -> Vec<String> {
    let mut out = Vec::new();
    node.walk(&mut |n| {
        if matches!(n.element, Element::Mi | Element::Mn | Element::Ci | Element::Cn) {
            out.push(n.text().trim().to_string());
        }
    });
    out
}
