use std::fmt;

use quick_xml::events::Event;
use quick_xml::Reader;

use crate::canon::{canonicalize, CanonicalizationConfig};
use crate::index::{CharSpan, IndexedFormula};
use crate::mathml::{parse_mathml_with, resolve_entity, ParseOptions, Source};

const BLOCK_ELEMENTS: &[&str] = &[
    "address",
    "article",
    "aside",
    "blockquote",
    "br",
    "dd",
    "div",
    "dl",
    "dt",
    "figcaption",
    "figure",
    "footer",
    "h1",
    "h2",
    "h3",
    "h4",
    "h5",
    "h6",
    "header",
    "hr",
    "li",
    "ol",
    "p",
    "pre",
    "section",
    "table",
    "td",
    "th",
    "tr",
    "ul",
];

/// An extraction problem located by element path, e.g. `p/span/math[2]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ExtractError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "at {}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ExtractError {}

#[derive(Debug, Clone, PartialEq)]
pub struct Extracted {
    pub text: String,
    pub formulae: Vec<IndexedFormula>,
    /// Formulae skipped as unparseable.
    pub warnings: Vec<ExtractError>,
}

pub fn placeholder(n: usize) -> String {
    format!("⟦f#{n}⟧")
}

struct TextSink {
    text: String,
    chars: usize,
    pending_space: bool,
}

impl TextSink {
    fn push_text(&mut self, s: &str) {
        for c in s.chars() {
            if c.is_whitespace() {
                self.pending_space = true;
            } else {
                self.push_char(c);
            }
        }
    }

    fn push_char(&mut self, c: char) {
        if self.pending_space && self.chars > 0 {
            self.text.push(' ');
            self.chars += 1;
        }
        self.pending_space = false;
        self.text.push(c);
        self.chars += 1;
    }

    fn push_atom(&mut self, s: &str) -> CharSpan {
        let mut chars = s.chars();
        let first = chars.next().expect("non-empty placeholder");
        self.push_char(first);
        let start = self.chars - 1;
        for c in chars {
            self.text.push(c);
            self.chars += 1;
        }
        CharSpan::new(start, self.chars)
    }
}

/// Flattens an XHTML fragment to text, replacing each `math` element by a
/// numbered placeholder and collecting its canonical formulae. Whitespace
/// runs collapse to one space; block elements separate words.
pub fn extract(body: &str) -> Result<Extracted, ExtractError> {
    let canon = CanonicalizationConfig::default();
    let options = ParseOptions {
        source: Source::MathmlDocument,
        allow_placeholders: false,
    };
    let mut reader = Reader::from_str(body);
    let mut sink = TextSink {
        text: String::new(),
        chars: 0,
        pending_space: false,
    };
    let mut formulae = Vec::new();
    let mut warnings = Vec::new();
    let mut path: Vec<String> = Vec::new();
    let mut math_seen = 0usize;
    let located = |path: &[String], message: String| ExtractError {
        path: path.join("/"),
        message,
    };

    loop {
        let start = reader.buffer_position() as usize;
        let event = reader.read_event().map_err(|e| {
            located(
                &path,
                format!("malformed body at byte {}: {e}", reader.error_position()),
            )
        })?;
        let (markup, math_path) = match event {
            Event::Start(ref tag) if tag.local_name().as_ref() == "math" => {
                let name = tag.name().as_ref().to_string();
                reader.read_to_end(quick_xml::name::QName(&name)).map_err(|e| {
                    located(
                        &path,
                        format!("malformed body at byte {}: {e}", reader.error_position()),
                    )
                })?;
                (&body[start..reader.buffer_position() as usize], name)
            }
            Event::Empty(ref tag) if tag.local_name().as_ref() == "math" => {
                let name = tag.name().as_ref().to_string();
                (&body[start..reader.buffer_position() as usize], name)
            }
            Event::Start(tag) => {
                let name = tag.local_name().as_ref().to_string();
                if BLOCK_ELEMENTS.contains(&name.as_str()) {
                    sink.pending_space = true;
                }
                path.push(name);
                continue;
            }
            Event::Empty(tag) => {
                if BLOCK_ELEMENTS.contains(&tag.local_name().as_ref()) {
                    sink.pending_space = true;
                }
                continue;
            }
            Event::End(tag) => {
                if BLOCK_ELEMENTS.contains(&tag.local_name().as_ref()) {
                    sink.pending_space = true;
                }
                path.pop();
                continue;
            }
            Event::Text(text) => {
                sink.push_text(&text.xml10_content());
                continue;
            }
            Event::CData(data) => {
                sink.push_text(&data.xml10_content());
                continue;
            }
            Event::GeneralRef(reference) => {
                let resolved = if reference.is_char_ref() {
                    reference.resolve_char_ref().ok().flatten().map(String::from)
                } else {
                    resolve_entity(&reference).map(String::from)
                };
                match resolved {
                    Some(s) => sink.push_text(&s),
                    None => {
                        return Err(located(&path, format!("unknown entity &{};", &*reference)));
                    }
                }
                continue;
            }
            Event::Eof => break,
            _ => continue,
        };
        math_seen += 1;
        let mut here = path.clone();
        here.push(format!("{math_path}[{math_seen}]"));
        match parse_mathml_with(markup, options) {
            Ok(formula) => {
                let span = sink.push_atom(&placeholder(formulae_count(&formulae)));
                let canonical = canonicalize(&formula, &canon);
                match canonical.split_encodings() {
                    (None, None) => formulae.push(IndexedFormula {
                        formula: canonical,
                        span,
                    }),
                    (presentation, content) => {
                        for formula in presentation.into_iter().chain(content) {
                            formulae.push(IndexedFormula { formula, span });
                        }
                    }
                }
            }
            Err(e) => warnings.push(located(&here, format!("skipped formula: {}", e.message))),
        }
    }
    if !path.is_empty() {
        return Err(located(&path, "unclosed element".to_string()));
    }
    Ok(Extracted {
        text: sink.text,
        formulae,
        warnings,
    })
}

/// Distinct placeholders emitted so far.
fn formulae_count(formulae: &[IndexedFormula]) -> usize {
    let mut spans: Vec<CharSpan> = formulae.iter().map(|f| f.span).collect();
    spans.dedup();
    spans.len()
}
