//! Mixed text and math queries over an [`IndexSnapshot`].

mod execute;
mod snippet;
mod suggest;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::AnalyzerConfig;
use crate::canon::{canonicalize, CanonicalizationConfig};
use crate::index::{FacetField, IndexSnapshot};
use crate::latex::parse_latex;
use crate::mathml::{parse_mathml, Formula};

pub use execute::{
    execute, explain, ClauseExplanation, ExecuteOptions, ExplainError, ExplanationLeaf, ScoreExplanation, SearchHit,
    SearchResults,
};
pub use snippet::{snippet, HighlightKind, HighlightSpan, MatchedTerms, Snippet, SnippetFormula, DEFAULT_WINDOW};
pub use suggest::suggest;

/// Which math terms take part in matching.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MathMode {
    /// Presentation terms only.
    Pmml,
    /// Content terms only.
    Cmml,
    #[default]
    Both,
}

impl MathMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MathMode::Pmml => "pmml",
            MathMode::Cmml => "cmml",
            MathMode::Both => "both",
        }
    }

    pub fn admits(self, token: &str) -> bool {
        match self {
            MathMode::Pmml => token.starts_with(crate::tokenizer::PRESENTATION_PREFIX),
            MathMode::Cmml => token.starts_with(crate::tokenizer::CONTENT_PREFIX),
            MathMode::Both => true,
        }
    }
}

impl fmt::Display for MathMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MathMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pmml" => Ok(MathMode::Pmml),
            "cmml" => Ok(MathMode::Cmml),
            "both" => Ok(MathMode::Both),
            other => Err(format!("unknown math mode {other:?} (expected pmml, cmml or both)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MathSource {
    Latex,
    Mathml,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Clause {
    Text {
        term: String,
    },
    Math {
        /// Canonical form of the parsed segment.
        formula: Formula,
        source: MathSource,
        raw: String,
    },
}

impl Clause {
    pub fn label(&self) -> String {
        match self {
            Clause::Text { term } => format!("text \"{term}\""),
            Clause::Math {
                source: MathSource::Latex,
                raw,
                ..
            } => format!("math ${raw}$"),
            Clause::Math { raw, .. } => format!("math {raw}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Query {
    pub clauses: Vec<Clause>,
    /// OR within a field, AND across fields.
    pub facet_filters: BTreeMap<FacetField, BTreeSet<String>>,
    pub math_mode: MathMode,
    pub warnings: Vec<String>,
}

impl Query {
    pub fn with_math_mode(mut self, mode: MathMode) -> Self {
        self.math_mode = mode;
        self
    }

    pub fn with_filter(mut self, field: FacetField, value: impl Into<String>) -> Self {
        self.facet_filters.entry(field).or_default().insert(value.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("query has no usable clauses")]
    Empty { warnings: Vec<String> },
}

impl QueryError {
    pub fn warnings(&self) -> &[String] {
        match self {
            QueryError::Empty { warnings } => warnings,
        }
    }
}

/// Parses a raw query with the analyzer of `index`.
pub fn parse_query_for(raw: &str, index: &IndexSnapshot) -> Result<Query, QueryError> {
    parse_query(raw, &index.config().analyzer)
}

/// Splits `raw` into `$…$` TeX segments, `<math>…</math>` MathML segments
/// and free text. Invalid math segments are dropped with a warning.
pub fn parse_query(raw: &str, analyzer: &AnalyzerConfig) -> Result<Query, QueryError> {
    let canon = CanonicalizationConfig::default();
    let mut query = Query::default();
    let mut text = String::new();
    let mut rest = raw;
    while !rest.is_empty() {
        let dollar = rest.find('$');
        let math = find_math_open(rest);
        let next = match (dollar, math) {
            (Some(d), Some(m)) => Some(d.min(m)),
            (d, m) => d.or(m),
        };
        let Some(at) = next else {
            text.push_str(rest);
            break;
        };
        text.push_str(&rest[..at]);
        flush_text(&mut text, analyzer, &mut query);
        rest = &rest[at..];
        if rest.starts_with('$') {
            let delimiter = if rest.starts_with("$$") { "$$" } else { "$" };
            let body = &rest[delimiter.len()..];
            match body.find(delimiter) {
                Some(end) => {
                    let tex = &body[..end];
                    match parse_latex(tex) {
                        Ok(formula) => query.clauses.push(Clause::Math {
                            formula: canonicalize(&formula, &canon),
                            source: MathSource::Latex,
                            raw: tex.to_string(),
                        }),
                        Err(e) => query.warnings.push(format!("invalid TeX ${tex}$: {}", e.message)),
                    }
                    rest = &body[end + delimiter.len()..];
                }
                None => {
                    query
                        .warnings
                        .push(format!("unterminated {delimiter} segment dropped: {rest}"));
                    rest = "";
                }
            }
        } else {
            match find_math_close(rest) {
                Some(end) => {
                    let xml = &rest[..end];
                    match parse_mathml(xml) {
                        Ok(formula) => query.clauses.push(Clause::Math {
                            formula: canonicalize(&formula, &canon),
                            source: MathSource::Mathml,
                            raw: xml.to_string(),
                        }),
                        Err(e) => query.warnings.push(format!("invalid MathML: {}", e.message)),
                    }
                    rest = &rest[end..];
                }
                None => {
                    query.warnings.push("unterminated <math> segment dropped".to_string());
                    rest = "";
                }
            }
        }
    }
    flush_text(&mut text, analyzer, &mut query);
    if query.clauses.is_empty() {
        return Err(QueryError::Empty {
            warnings: query.warnings,
        });
    }
    Ok(query)
}

fn flush_text(text: &mut String, analyzer: &AnalyzerConfig, query: &mut Query) {
    for term in analyzer.terms(text) {
        query.clauses.push(Clause::Text { term });
    }
    text.clear();
}

fn is_math_tag_at(s: &str, at: usize, open: bool) -> bool {
    let tag = if open { "<math" } else { "</math" };
    s[at..].starts_with(tag)
        && matches!(
            s[at + tag.len()..].chars().next(),
            Some('>' | '/' | ' ' | '\t' | '\n' | '\r')
        )
}

fn find_math_open(s: &str) -> Option<usize> {
    s.match_indices("<math")
        .map(|(i, _)| i)
        .find(|&i| is_math_tag_at(s, i, true))
}

/// Byte offset just past the `</math>` matching the opening tag at 0.
fn find_math_close(s: &str) -> Option<usize> {
    let mut depth = 0usize;
    for (i, _) in s.match_indices('<') {
        if is_math_tag_at(s, i, true) {
            let end = s[i..].find('>')? + i;
            if !s[..end].ends_with('/') {
                depth += 1;
            } else if depth == 0 {
                return Some(end + 1);
            }
        } else if is_math_tag_at(s, i, false) {
            depth = depth.checked_sub(1)?;
            if depth == 0 {
                return Some(s[i..].find('>')? + i + 1);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathml::serialize_node;

    fn parse(raw: &str) -> Result<Query, QueryError> {
        parse_query(raw, &AnalyzerConfig::default())
    }

    #[test]
    fn text_and_tex() {
        let q = parse("mass energy $E=mc^2$").unwrap();
        assert_eq!(q.clauses.len(), 3);
        assert_eq!(q.clauses[0], Clause::Text { term: "mass".into() });
        assert_eq!(q.clauses[1], Clause::Text { term: "energy".into() });
        match &q.clauses[2] {
            Clause::Math { source, raw, .. } => {
                assert_eq!(*source, MathSource::Latex);
                assert_eq!(raw, "E=mc^2");
            }
            other => panic!("{other:?}"),
        }
        assert!(q.warnings.is_empty());
    }

    #[test]
    fn mathml_detection() {
        let q = parse("<math><mi>x</mi></math>").unwrap();
        assert_eq!(q.clauses.len(), 1);
        match &q.clauses[0] {
            Clause::Math { source, formula, .. } => {
                assert_eq!(*source, MathSource::Mathml);
                assert_eq!(serialize_node(&formula.root), "<math><mi>x</mi></math>");
            }
            other => panic!("{other:?}"),
        }
        let q = parse("groups <math xmlns=\"http://www.w3.org/1998/Math/MathML\"><mrow><mi>a</mi></mrow></math> rings")
            .unwrap();
        assert_eq!(q.clauses.len(), 3);
        assert!(matches!(q.clauses[2], Clause::Text { ref term } if term == "rings"));
    }

    #[test]
    fn empty_and_invalid() {
        assert!(parse("").is_err());
        assert!(parse("   ").is_err());
        let err = parse("$\\foo$").unwrap_err();
        assert_eq!(err.warnings().len(), 1);
        let q = parse("$\\foo$ groups").unwrap();
        assert_eq!(q.clauses, vec![Clause::Text { term: "groups".into() }]);
        assert_eq!(q.warnings.len(), 1);
        assert!(q.warnings[0].contains("\\foo"), "{}", q.warnings[0]);
    }

    #[test]
    fn unterminated_segments() {
        let q = parse("groups $x+").unwrap();
        assert_eq!(q.clauses.len(), 1);
        assert_eq!(q.warnings.len(), 1);
        let q = parse("rings <math><mi>x</mi>").unwrap();
        assert_eq!(q.clauses.len(), 1);
        assert_eq!(q.warnings.len(), 1);
    }

    #[test]
    fn display_dollars_and_canonical_form() {
        let q = parse("$$ a \\cdot b $$").unwrap();
        let Clause::Math { formula, .. } = &q.clauses[0] else {
            panic!()
        };
        assert_eq!(
            serialize_node(&formula.root),
            "<mrow><mi>a</mi><mo>⋅</mo><mi>b</mi></mrow>"
        );
    }

    #[test]
    fn math_mode_parsing() {
        assert_eq!("PMML".parse::<MathMode>().unwrap(), MathMode::Pmml);
        assert!("tex".parse::<MathMode>().is_err());
        assert!(MathMode::Cmml.admits("C:<ci>x</ci>"));
        assert!(!MathMode::Cmml.admits("P:<mi>x</mi>"));
    }
}
