use quick_xml::events::{BytesStart, Event};
use quick_xml::reader::Reader;
use quick_xml::XmlVersion;
use thiserror::Error;

use super::entities::resolve_entity;
use super::{Element, Formula, MathNode, Source};

/// Placeholder marker reserved for unified index terms; rejected in
/// user-supplied leaf text.
pub(crate) const PLACEHOLDER_MARK: char = '§';

/// A MathML reading failure; `position` is a byte offset into the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("MathML parse error at byte {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy)]
pub struct ParseOptions {
    pub source: Source,
    /// Accept the `§` marker in leaf text (used when reading index terms back).
    pub allow_placeholders: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            source: Source::MathmlQuery,
            allow_placeholders: false,
        }
    }
}

/// Reads a MathML fragment into a [`Formula`].
pub fn parse_mathml(xml: &str) -> Result<Formula, ParseError> {
    parse_mathml_with(xml, ParseOptions::default())
}

pub fn parse_mathml_with(xml: &str, options: ParseOptions) -> Result<Formula, ParseError> {
    let mut parser = Parser {
        input: xml,
        options,
        stack: Vec::new(),
        root: None,
    };
    parser.run()?;
    let root = parser.root.ok_or_else(|| ParseError {
        position: 0,
        message: "no MathML element found".to_string(),
    })?;
    Formula::new(root, options.source).map_err(|message| ParseError { position: 0, message })
}

struct Parser<'a> {
    input: &'a str,
    options: ParseOptions,
    stack: Vec<(MathNode, usize)>,
    root: Option<MathNode>,
}

impl Parser<'_> {
    fn error(&self, position: usize, message: impl Into<String>) -> ParseError {
        let position = position.min(self.input.len().saturating_sub(1));
        ParseError {
            position,
            message: message.into(),
        }
    }

    fn run(&mut self) -> Result<(), ParseError> {
        let mut reader = Reader::from_str(self.input);
        loop {
            let start = reader.buffer_position() as usize;
            let event = reader.read_event().map_err(|e| {
                let position = reader.error_position() as usize;
                self.error(position, e.to_string())
            })?;
            match event {
                Event::Start(tag) => {
                    let node = self.open(&tag, start)?;
                    self.stack.push((node, start));
                }
                Event::Empty(tag) => {
                    let node = self.open(&tag, start)?;
                    self.close(node, start)?;
                }
                Event::End(_) => {
                    let (node, opened) = self
                        .stack
                        .pop()
                        .ok_or_else(|| self.error(start, "closing tag without matching opening tag"))?;
                    self.close(node, opened)?;
                }
                Event::Text(text) => {
                    let content = text.xml10_content();
                    self.text(&content, start)?;
                }
                Event::CData(data) => {
                    let content = data.xml10_content();
                    self.text(&content, start)?;
                }
                Event::GeneralRef(reference) => {
                    let resolved = if reference.is_char_ref() {
                        reference.resolve_char_ref().ok().flatten().map(String::from)
                    } else {
                        resolve_entity(&reference).map(String::from)
                    };
                    let resolved =
                        resolved.ok_or_else(|| self.error(start, format!("unknown entity &{};", &*reference)))?;
                    self.text(&resolved, start)?;
                }
                Event::Comment(_) | Event::PI(_) | Event::Decl(_) | Event::DocType(_) => {}
                Event::Eof => break,
            }
        }
        if let Some((node, opened)) = self.stack.last() {
            return Err(self.error(*opened, format!("unclosed <{}>", node.element)));
        }
        Ok(())
    }

    fn open(&self, tag: &BytesStart<'_>, position: usize) -> Result<MathNode, ParseError> {
        let local = tag.local_name();
        let name: &str = local.as_ref();
        let element =
            Element::from_name(name).ok_or_else(|| self.error(position, format!("unknown element <{name}>")))?;
        if let Some((parent, _)) = self.stack.last() {
            if parent.element.is_leaf() {
                return Err(self.error(position, format!("element <{name}> inside leaf <{}>", parent.element)));
            }
        } else if self.root.is_some() {
            return Err(self.error(position, "more than one root element"));
        }
        let mut node = if element.is_leaf() {
            MathNode::leaf(element, "")
        } else {
            MathNode::node(element, Vec::new())
        };
        for attribute in tag.attributes() {
            let attribute = attribute.map_err(|e| self.error(position, format!("bad attribute: {e}")))?;
            let key: &str = attribute.key.as_ref();
            if key == "xmlns" || key.starts_with("xmlns:") {
                continue;
            }
            let value = attribute
                .normalized_value_with(XmlVersion::Implicit1_0, 128, resolve_entity)
                .map_err(|e| self.error(position, format!("bad attribute value: {e}")))?;
            node.attributes.insert(key.to_string(), value.into_owned());
        }
        Ok(node)
    }

    fn close(&mut self, node: MathNode, position: usize) -> Result<(), ParseError> {
        if !self.options.allow_placeholders && node.text().contains(PLACEHOLDER_MARK) {
            return Err(self.error(
                position,
                format!("reserved character {PLACEHOLDER_MARK} in <{}>", node.element),
            ));
        }
        match self.stack.last_mut() {
            Some((parent, _)) => parent.children.push(node),
            None => self.root = Some(node),
        }
        Ok(())
    }

    fn text(&mut self, content: &str, position: usize) -> Result<(), ParseError> {
        let whitespace = content.chars().all(char::is_whitespace);
        match self.stack.last_mut() {
            Some((node, _)) if node.element.is_leaf() => {
                node.text.get_or_insert_with(String::new).push_str(content);
                Ok(())
            }
            Some((node, _)) if !whitespace => {
                let element = node.element;
                Err(self.error(position, format!("text content inside <{element}>")))
            }
            None if !whitespace => Err(self.error(position, "text outside the root element")),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathml::Encoding;

    #[test]
    fn single_identifier() {
        let f = parse_mathml("<math><mi>x</mi></math>").unwrap();
        assert_eq!(f.root, MathNode::node(Element::Math, vec![MathNode::mi("x")]));
        assert_eq!(f.encoding, Encoding::Presentation);
    }

    #[test]
    fn content_mass_energy() {
        let xml = "<math><apply><eq/><ci>E</ci><apply><times/><ci>m</ci>\
                   <apply><power/><ci>c</ci><cn>2</cn></apply></apply></apply></math>";
        let f = parse_mathml(xml).unwrap();
        assert_eq!(f.encoding, Encoding::Content);
        let expected = MathNode::node(
            Element::Math,
            vec![MathNode::apply(
                Element::Eq,
                vec![
                    MathNode::ci("E"),
                    MathNode::apply(
                        Element::Times,
                        vec![
                            MathNode::ci("m"),
                            MathNode::apply(Element::Power, vec![MathNode::ci("c"), MathNode::cn("2")]),
                        ],
                    ),
                ],
            )],
        );
        assert_eq!(f.root, expected);
    }

    #[test]
    fn mismatched_tags() {
        let xml = "<math><mrow><mi>x</mrow></math>";
        let err = parse_mathml(xml).unwrap_err();
        assert!(err.position < xml.len());
        assert!(err.position >= "<math><mrow><mi>x".len(), "{err}");
    }

    #[test]
    fn namespaces_comments_whitespace() {
        let xml = r#"<?xml version="1.0"?>
            <m:math xmlns:m="http://www.w3.org/1998/Math/MathML" display="block">
              <!-- note -->
              <m:mrow> <m:mi>x</m:mi> <m:mo>&InvisibleTimes;</m:mo> <m:mi>y</m:mi> </m:mrow>
            </m:math>"#;
        let f = parse_mathml(xml).unwrap();
        let row = &f.root.children[0];
        assert_eq!(row.children.len(), 3);
        assert_eq!(row.children[1].text(), "\u{2062}");
        assert_eq!(f.root.attributes.get("display").map(String::as_str), Some("block"));
        assert!(!f.root.attributes.contains_key("xmlns:m"));
    }

    #[test]
    fn entities_decode() {
        let f = parse_mathml("<mo>&#x2212;&times;&#8805;</mo>").unwrap();
        assert_eq!(f.root.text(), "−×≥");
        assert!(parse_mathml("<mo>&bogus;</mo>").is_err());
    }

    #[test]
    fn rejections() {
        assert!(parse_mathml("<math><mtable/></math>").is_err());
        assert!(parse_mathml("<mrow>x</mrow>").is_err());
        assert!(parse_mathml("<mi><mn>1</mn></mi>").is_err());
        assert!(parse_mathml("").is_err());
        assert!(parse_mathml("<mi>x</mi><mi>y</mi>").is_err());
        assert!(parse_mathml("<math><mi>x</mi>").is_err());
        assert!(parse_mathml("<mi>§id</mi>").is_err());
        let options = ParseOptions {
            allow_placeholders: true,
            ..ParseOptions::default()
        };
        assert!(parse_mathml_with("<mi>§id</mi>", options).is_ok());
    }

    #[test]
    fn empty_leaf_has_empty_text() {
        let f = parse_mathml("<mrow><mtext/><mspace/></mrow>").unwrap();
        assert_eq!(f.root.children[0].text, Some(String::new()));
        assert_eq!(f.root.children[1].text, None);
    }
}
