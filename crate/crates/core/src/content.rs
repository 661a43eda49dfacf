//! Presentation to Content MathML for the arithmetic/relational fragment.

use thiserror::Error;

use crate::latex::FUNCTION_NAMES;
use crate::mathml::{Element, Encoding, Formula, MathNode};

/// The formula uses constructs with no content translation; callers index
/// its presentation form only.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no content translation: {reason}")]
pub struct Unsupported {
    pub reason: String,
}

fn unsupported<T>(reason: impl Into<String>) -> Result<T, Unsupported> {
    Err(Unsupported { reason: reason.into() })
}

/// Translates a presentation formula into Content MathML.
///
/// Infix chains become `apply` nodes (`+`, `×`, `⋅` and juxtaposition flat;
/// `−` and `/` left-associative), `msup` becomes `power`, `mfrac` `divide`
/// and `msqrt` `root`. Relation chains must use a single relation.
pub fn derive_content(formula: &Formula) -> Result<Formula, Unsupported> {
    if formula.encoding != Encoding::Presentation {
        return unsupported(format!(
            "expected presentation markup, got {}",
            formula.encoding.as_str()
        ));
    }
    let root = translate(&formula.root)?;
    Formula::new(root, formula.source).map_err(|reason| Unsupported { reason })
}

fn translate(node: &MathNode) -> Result<MathNode, Unsupported> {
    match node.element {
        Element::Math => Ok(MathNode::node(Element::Math, vec![sequence(&node.children)?])),
        Element::Mrow => sequence(&node.children),
        Element::Mi => {
            let text = node.text().trim();
            if FUNCTION_NAMES.contains(&text) {
                unsupported(format!("function {text}"))
            } else {
                Ok(MathNode::ci(text))
            }
        }
        Element::Mn => Ok(MathNode::cn(node.text().trim())),
        Element::Msup => binary(node, Element::Power),
        Element::Mfrac => binary(node, Element::Divide),
        Element::Msqrt => Ok(MathNode::apply(Element::Root, vec![sequence(&node.children)?])),
        Element::Mo => unsupported(format!("lone operator {}", node.text())),
        other => unsupported(format!("<{other}>")),
    }
}

fn binary(node: &MathNode, head: Element) -> Result<MathNode, Unsupported> {
    match node.children.as_slice() {
        [left, right] => Ok(MathNode::apply(head, vec![translate(left)?, translate(right)?])),
        _ => unsupported(format!("<{}> with {} children", node.element, node.children.len())),
    }
}

fn relation_head(op: &str) -> Option<Element> {
    Some(match op {
        "=" => Element::Eq,
        "<" => Element::Lt,
        ">" => Element::Gt,
        "≤" => Element::Leq,
        "≥" => Element::Geq,
        "≠" => Element::Neq,
        _ => return None,
    })
}

fn is_minus(op: &str) -> bool {
    matches!(op, "-" | "−")
}

fn is_times(op: &str) -> bool {
    matches!(op, "×" | "⋅" | "·" | "*" | "∗" | "\u{2062}")
}

fn sequence(items: &[MathNode]) -> Result<MathNode, Unsupported> {
    let mut chain = Chain { items, cursor: 0 };
    let result = chain.relation()?;
    match chain.peek() {
        None => Ok(result),
        Some(extra) => unsupported(format!("unexpected <{}> {}", extra.element, extra.text())),
    }
}

struct Chain<'a> {
    items: &'a [MathNode],
    cursor: usize,
}

impl<'a> Chain<'a> {
    fn peek(&self) -> Option<&'a MathNode> {
        self.items.get(self.cursor)
    }

    fn peek_operator(&self) -> Option<&'a str> {
        self.peek().filter(|n| n.is(Element::Mo)).map(|n| n.text().trim())
    }

    fn relation(&mut self) -> Result<MathNode, Unsupported> {
        let first = self.additive()?;
        let mut head = None;
        let mut operands = vec![first];
        while let Some(op) = self.peek_operator() {
            let Some(found) = relation_head(op) else { break };
            if head.is_some_and(|h| h != found) {
                return unsupported("mixed relation chain");
            }
            head = Some(found);
            self.cursor += 1;
            operands.push(self.additive()?);
        }
        Ok(match head {
            Some(head) => MathNode::apply(head, operands),
            None => operands.pop().unwrap(),
        })
    }

    fn additive(&mut self) -> Result<MathNode, Unsupported> {
        let mut acc = match self.peek_operator() {
            Some(op) if is_minus(op) => {
                self.cursor += 1;
                MathNode::apply(Element::Minus, vec![self.multiplicative()?])
            }
            Some("+") => {
                self.cursor += 1;
                self.multiplicative()?
            }
            _ => self.multiplicative()?,
        };
        let mut flat_plus = false;
        while let Some(op) = self.peek_operator() {
            if op == "+" {
                self.cursor += 1;
                let term = self.multiplicative()?;
                acc = extend(acc, Element::Plus, term, &mut flat_plus);
            } else if is_minus(op) {
                self.cursor += 1;
                let term = self.multiplicative()?;
                acc = MathNode::apply(Element::Minus, vec![acc, term]);
                flat_plus = false;
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn multiplicative(&mut self) -> Result<MathNode, Unsupported> {
        let mut acc = self.factor()?;
        let mut flat_times = false;
        loop {
            match self.peek() {
                None => break,
                Some(node) if node.is(Element::Mo) => {
                    let op = node.text().trim();
                    if is_times(op) {
                        self.cursor += 1;
                        let factor = self.factor()?;
                        acc = extend(acc, Element::Times, factor, &mut flat_times);
                    } else if op == "/" {
                        self.cursor += 1;
                        let factor = self.factor()?;
                        acc = MathNode::apply(Element::Divide, vec![acc, factor]);
                        flat_times = false;
                    } else if op == "(" || op == "[" {
                        let factor = self.factor()?;
                        acc = extend(acc, Element::Times, factor, &mut flat_times);
                    } else {
                        break;
                    }
                }
                // juxtaposition
                Some(_) => {
                    let factor = self.factor()?;
                    acc = extend(acc, Element::Times, factor, &mut flat_times);
                }
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<MathNode, Unsupported> {
        let Some(node) = self.peek() else {
            return unsupported("missing operand");
        };
        if !node.is(Element::Mo) {
            self.cursor += 1;
            return translate(node);
        }
        let op = node.text().trim().to_string();
        self.cursor += 1;
        match op.as_str() {
            "(" | "[" => {
                let inner = self.relation()?;
                let close = if op == "(" { ")" } else { "]" };
                match self.peek_operator() {
                    Some(c) if c == close => {
                        self.cursor += 1;
                        Ok(inner)
                    }
                    _ => unsupported(format!("unbalanced {op}")),
                }
            }
            op if is_minus(op) => Ok(MathNode::apply(Element::Minus, vec![self.factor()?])),
            op => unsupported(format!("operator {op}")),
        }
    }
}

/// Appends to a flat n-ary apply built by this chain, or starts a new one.
fn extend(acc: MathNode, head: Element, operand: MathNode, flat: &mut bool) -> MathNode {
    if *flat {
        let mut acc = acc;
        acc.children.push(operand);
        acc
    } else {
        *flat = true;
        MathNode::apply(head, vec![acc, operand])
    }
}
