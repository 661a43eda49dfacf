//! Formula AST for a closed MathML subset, with an XML reader and a
//! deterministic writer.
//!
//! Every producer (LaTeX queries, copy-pasted MathML, document markup)
//! converges on [`MathNode`] trees. The vocabulary is closed: elements outside
//! [`Element`] are rejected at parse time so that the canonicalizer and the
//! tokenizer can be total over their input.

mod entities;
mod parse;
mod serialize;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use entities::resolve_entity;
pub use parse::{parse_mathml, parse_mathml_with, ParseError, ParseOptions};
pub use serialize::{serialize_mathml, serialize_node, serialize_pretty};

macro_rules! vocabulary {
    ($($variant:ident => $name:literal),* $(,)?) => {
        /// Element names accepted by the parser.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum Element {
            $($variant,)*
        }

        impl Element {
            pub const ALL: &'static [Element] = &[$(Element::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(Element::$variant => $name,)*
                }
            }

            pub fn from_name(name: &str) -> Option<Element> {
                match name {
                    $($name => Some(Element::$variant),)*
                    _ => None,
                }
            }
        }
    };
}

vocabulary! {
    Math => "math",
    Semantics => "semantics",
    AnnotationXml => "annotation-xml",
    Mrow => "mrow",
    Mi => "mi",
    Mn => "mn",
    Mo => "mo",
    Msup => "msup",
    Msub => "msub",
    Msubsup => "msubsup",
    Mfrac => "mfrac",
    Msqrt => "msqrt",
    Mroot => "mroot",
    Mfenced => "mfenced",
    Mtext => "mtext",
    Mspace => "mspace",
    Mover => "mover",
    Munder => "munder",
    Munderover => "munderover",
    Apply => "apply",
    Ci => "ci",
    Cn => "cn",
    Csymbol => "csymbol",
    Plus => "plus",
    Minus => "minus",
    Times => "times",
    Divide => "divide",
    Power => "power",
    Eq => "eq",
    Lt => "lt",
    Gt => "gt",
    Leq => "leq",
    Geq => "geq",
    Neq => "neq",
    Root => "root",
}

/// Which half of the vocabulary an element belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Presentation,
    Content,
    /// `math`, `semantics` and `annotation-xml` wrap either family.
    Structural,
}

impl Element {
    /// Leaves carry text and never element children.
    pub fn is_leaf(self) -> bool {
        matches!(
            self,
            Element::Mi | Element::Mn | Element::Mo | Element::Mtext | Element::Ci | Element::Cn | Element::Csymbol
        )
    }

    pub fn family(self) -> Family {
        use Element::*;
        match self {
            Math | Semantics | AnnotationXml => Family::Structural,
            Apply | Ci | Cn | Csymbol | Plus | Minus | Times | Divide | Power | Eq | Lt | Gt | Leq | Geq | Neq
            | Root => Family::Content,
            _ => Family::Presentation,
        }
    }

    /// Content operator heads (`<plus/>`, `<eq/>`, ...) that only mean
    /// something as the first child of an `apply`.
    pub fn is_content_operator(self) -> bool {
        use Element::*;
        matches!(
            self,
            Plus | Minus | Times | Divide | Power | Eq | Lt | Gt | Leq | Geq | Neq | Root
        )
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One node of a formula tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MathNode {
    pub element: Element,
    pub attributes: BTreeMap<String, String>,
    /// `Some` exactly for leaf elements (possibly empty).
    pub text: Option<String>,
    pub children: Vec<MathNode>,
}

impl MathNode {
    pub fn leaf(element: Element, text: impl Into<String>) -> MathNode {
        debug_assert!(element.is_leaf());
        MathNode {
            element,
            attributes: BTreeMap::new(),
            text: Some(text.into()),
            children: Vec::new(),
        }
    }

    pub fn node(element: Element, children: Vec<MathNode>) -> MathNode {
        debug_assert!(!element.is_leaf());
        MathNode {
            element,
            attributes: BTreeMap::new(),
            text: None,
            children,
        }
    }

    pub fn with_attr(mut self, name: impl Into<String>, value: impl Into<String>) -> MathNode {
        self.attributes.insert(name.into(), value.into());
        self
    }

    pub fn mi(text: impl Into<String>) -> MathNode {
        MathNode::leaf(Element::Mi, text)
    }

    pub fn mn(text: impl Into<String>) -> MathNode {
        MathNode::leaf(Element::Mn, text)
    }

    pub fn mo(text: impl Into<String>) -> MathNode {
        MathNode::leaf(Element::Mo, text)
    }

    pub fn mrow(children: Vec<MathNode>) -> MathNode {
        MathNode::node(Element::Mrow, children)
    }

    pub fn ci(text: impl Into<String>) -> MathNode {
        MathNode::leaf(Element::Ci, text)
    }

    pub fn cn(text: impl Into<String>) -> MathNode {
        MathNode::leaf(Element::Cn, text)
    }

    /// `apply[head, args...]` with an empty operator head element.
    pub fn apply(head: Element, args: Vec<MathNode>) -> MathNode {
        let mut children = Vec::with_capacity(args.len() + 1);
        children.push(MathNode::node(head, Vec::new()));
        children.extend(args);
        MathNode::node(Element::Apply, children)
    }

    pub fn is(&self, element: Element) -> bool {
        self.element == element
    }

    pub fn text(&self) -> &str {
        self.text.as_deref().unwrap_or("")
    }

    /// `mo` with the given text.
    pub fn is_operator(&self, op: &str) -> bool {
        self.element == Element::Mo && self.text() == op
    }

    /// Number of nodes in the subtree.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(MathNode::size).sum::<usize>()
    }

    /// Depth of the subtree; a lone node has depth 1.
    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(MathNode::depth).max().unwrap_or(0)
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a MathNode)) {
        visit(self);
        for child in &self.children {
            child.walk(visit);
        }
    }

    /// Checks leaf/non-leaf text invariants over the whole subtree.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.element.is_leaf() {
            if self.text.is_none() {
                return Err(format!("<{}> without text content", self.element));
            }
            if !self.children.is_empty() {
                return Err(format!("<{}> with element children", self.element));
            }
        } else if self.text.is_some() {
            return Err(format!("text content inside <{}>", self.element));
        }
        self.children.iter().try_for_each(MathNode::check_invariants)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    Presentation,
    Content,
    Mixed,
}

impl Encoding {
    pub fn as_str(self) -> &'static str {
        match self {
            Encoding::Presentation => "presentation",
            Encoding::Content => "content",
            Encoding::Mixed => "mixed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    Latex,
    MathmlDocument,
    MathmlQuery,
}

/// A formula tree tagged with its encoding and where it came from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Formula {
    pub root: MathNode,
    pub encoding: Encoding,
    pub source: Source,
}

impl Formula {
    /// Builds a formula, inferring its encoding from the vocabulary in use.
    pub fn new(root: MathNode, source: Source) -> Result<Formula, String> {
        root.check_invariants()?;
        let encoding = infer_encoding(&root)?;
        Ok(Formula { root, encoding, source })
    }

    /// Splits a formula into its presentation and content halves.
    ///
    /// A `semantics` pair yields both; a single-encoding formula yields one.
    /// The `math` wrapper is not carried over.
    pub fn split_encodings(&self) -> (Option<Formula>, Option<Formula>) {
        let mut root = &self.root;
        while root.is(Element::Math) && root.children.len() == 1 {
            root = &root.children[0];
        }
        let make = |node: &MathNode| Formula::new(node.clone(), self.source).ok();
        if !root.is(Element::Semantics) {
            return match self.encoding {
                Encoding::Content => (None, Some(self.clone())),
                _ => (Some(self.clone()), None),
            };
        }
        let mut presentation = None;
        let mut content = None;
        for child in &root.children {
            if child.is(Element::AnnotationXml) {
                if content.is_none() {
                    let inner = match child.children.as_slice() {
                        [single] => Some(single.clone()),
                        [] => None,
                        many => Some(MathNode::node(Element::Math, many.to_vec())),
                    };
                    content = inner.and_then(|n| make(&n)).filter(|f| f.encoding == Encoding::Content);
                }
            } else if presentation.is_none() {
                presentation = make(child).filter(|f| f.encoding == Encoding::Presentation);
            }
        }
        (presentation, content)
    }
}

fn infer_encoding(root: &MathNode) -> Result<Encoding, String> {
    let mut presentation = false;
    let mut content = false;
    let mut semantics = false;
    root.walk(&mut |node| match node.element.family() {
        Family::Presentation => presentation = true,
        Family::Content => content = true,
        Family::Structural => semantics |= node.is(Element::Semantics),
    });
    match (presentation, content) {
        (true, true) if semantics => Ok(Encoding::Mixed),
        (true, true) => Err("presentation and content markup mixed without a semantics pairing".to_string()),
        (false, true) => Ok(Encoding::Content),
        _ => Ok(Encoding::Presentation),
    }
}
