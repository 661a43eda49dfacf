use std::fmt::Write;

use super::{Formula, MathNode};

/// Compact, deterministic XML for a formula.
///
/// Attributes come out in name order, no whitespace is inserted between
/// elements and childless non-leaf elements are self-closing.
pub fn serialize_mathml(formula: &Formula) -> String {
    serialize_node(&formula.root)
}

pub fn serialize_node(node: &MathNode) -> String {
    let mut out = String::new();
    write_node(&mut out, node);
    out
}

fn write_node(out: &mut String, node: &MathNode) {
    write_open(out, node);
    if node.element.is_leaf() {
        escape_text(out, node.text());
    } else if node.children.is_empty() {
        out.push_str("/>");
        return;
    } else {
        for child in &node.children {
            write_node(out, child);
        }
    }
    let _ = write!(out, "</{}>", node.element);
}

fn write_open(out: &mut String, node: &MathNode) {
    out.push('<');
    out.push_str(node.element.as_str());
    for (name, value) in &node.attributes {
        let _ = write!(out, " {name}=\"");
        escape_attribute(out, value);
        out.push('"');
    }
    if node.element.is_leaf() || !node.children.is_empty() {
        out.push('>');
    }
}

/// Indented rendering for human-facing reports. Leaves stay on one line.
pub fn serialize_pretty(node: &MathNode) -> String {
    let mut out = String::new();
    write_pretty(&mut out, node, 0);
    out
}

fn write_pretty(out: &mut String, node: &MathNode, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
    if node.element.is_leaf() || node.children.is_empty() {
        write_node(out, node);
        out.push('\n');
        return;
    }
    write_open(out, node);
    out.push('\n');
    for child in &node.children {
        write_pretty(out, child, level + 1);
    }
    for _ in 0..level {
        out.push_str("  ");
    }
    let _ = writeln!(out, "</{}>", node.element);
}

fn escape_text(out: &mut String, text: &str) {
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '\r' => out.push_str("&#13;"),
            _ => out.push(c),
        }
    }
}

fn escape_attribute(out: &mut String, text: &str) {
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\t' => out.push_str("&#9;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            _ => out.push(c),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathml::{parse_mathml, Element, Source};

    #[test]
    fn identifier_in_math() {
        let f = Formula::new(MathNode::node(Element::Math, vec![MathNode::mi("x")]), Source::Latex).unwrap();
        assert_eq!(serialize_mathml(&f), "<math><mi>x</mi></math>");
    }

    #[test]
    fn attributes_sorted_and_escaped() {
        let node = MathNode::node(Element::Mfenced, vec![MathNode::mi("a<b")])
            .with_attr("open", "[")
            .with_attr("close", "\"");
        assert_eq!(
            serialize_node(&node),
            "<mfenced close=\"&quot;\" open=\"[\"><mi>a&lt;b</mi></mfenced>"
        );
    }

    #[test]
    fn self_closing_heads() {
        let xml = "<apply><eq/><ci>a</ci><ci>b</ci></apply>";
        assert_eq!(serialize_mathml(&parse_mathml(xml).unwrap()), xml);
    }

    #[test]
    fn pretty_print_indents() {
        let node = MathNode::mrow(vec![MathNode::mi("x"), MathNode::mo("+")]);
        assert_eq!(serialize_pretty(&node), "<mrow>\n  <mi>x</mi>\n  <mo>+</mo>\n</mrow>\n");
    }
}
