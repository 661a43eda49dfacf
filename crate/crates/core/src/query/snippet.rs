use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::analysis::AnalyzerConfig;
use crate::index::{CharSpan, DocumentRecord};
use crate::mathml::{serialize_node, Encoding};

pub const DEFAULT_WINDOW: usize = 240;
const ELLIPSIS: char = '…';

/// What matched in one document: body terms and formula spans.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MatchedTerms {
    pub text: BTreeSet<String>,
    pub math: BTreeSet<CharSpan>,
}

impl MatchedTerms {
    pub fn is_empty(&self) -> bool {
        self.text.is_empty() && self.math.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HighlightKind {
    TextMatch,
    MathMatch,
}

/// Character offsets into [`Snippet::text`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HighlightSpan {
    pub start: usize,
    pub end: usize,
    pub kind: HighlightKind,
}

/// A formula placeholder inside the snippet and its markup.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SnippetFormula {
    pub start: usize,
    pub end: usize,
    pub mathml: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Snippet {
    pub text: String,
    pub spans: Vec<HighlightSpan>,
    pub formulae: Vec<SnippetFormula>,
}

struct Occurrence {
    start: usize,
    end: usize,
    kind: HighlightKind,
    key: String,
}

/// Picks the `window`-character stretch of the extracted text holding the
/// most distinct matched terms (earliest on ties) and marks the matches.
pub fn snippet(doc: &DocumentRecord, matched: &MatchedTerms, analyzer: &AnalyzerConfig, window: usize) -> Snippet {
    let chars: Vec<char> = doc.extracted_text.chars().collect();
    let len = chars.len();
    let window = window.max(1);

    // one markup string per span, presentation preferred
    let mut formula_at: BTreeMap<CharSpan, String> = BTreeMap::new();
    for f in &doc.formulae {
        let markup = serialize_node(&f.formula.root);
        match formula_at.get(&f.span) {
            Some(_) if f.formula.encoding != Encoding::Presentation => {}
            _ => {
                formula_at.insert(f.span, markup);
            }
        }
    }

    let excluded: Vec<(usize, usize)> = formula_at.keys().map(|s| (s.start, s.end)).collect();
    let mut occurrences: Vec<Occurrence> = analyzer
        .analyze_excluding(&doc.extracted_text, &excluded)
        .into_iter()
        .filter(|t| matched.text.contains(&t.term))
        .map(|t| Occurrence {
            start: t.start,
            end: t.end,
            kind: HighlightKind::TextMatch,
            key: format!("text:{}", t.term),
        })
        .collect();
    for span in &matched.math {
        if let Some(markup) = formula_at.get(span) {
            occurrences.push(Occurrence {
                start: span.start,
                end: span.end,
                kind: HighlightKind::MathMatch,
                key: format!("math:{markup}"),
            });
        }
    }
    occurrences.sort_by_key(|o| (o.start, o.end));

    let (mut start, mut end) = if len <= window {
        (0, len)
    } else if occurrences.is_empty() {
        (0, window)
    } else {
        let mut best = (0usize, 0usize, 0usize);
        for anchor in &occurrences {
            let ws = anchor.start;
            let we = ws + window;
            let inside: Vec<&Occurrence> = occurrences.iter().filter(|o| o.start >= ws && o.end <= we).collect();
            let distinct: BTreeSet<&str> = inside.iter().map(|o| o.key.as_str()).collect();
            if distinct.len() > best.0 {
                let last = inside.iter().map(|o| o.end).max().unwrap_or(ws);
                best = (distinct.len(), ws, last);
            }
        }
        let (_, ws, last) = best;
        // spend half of the unused room on leading context
        let slack = (ws + window).saturating_sub(last);
        let start = ws.saturating_sub(slack / 2).min(len - window);
        (start, start + window)
    };

    // never cut a formula placeholder
    for span in formula_at.keys() {
        if span.start < start && start < span.end {
            start = span.end;
        }
        if span.start < end && end < span.end {
            end = span.start;
        }
    }
    if end < start {
        end = start;
    }

    let lead = usize::from(start > 0);
    let mut text = String::new();
    if start > 0 {
        text.push(ELLIPSIS);
    }
    text.extend(&chars[start..end]);
    if end < len {
        text.push(ELLIPSIS);
    }
    let shift = |i: usize| i - start + lead;
    let highlights = occurrences
        .iter()
        .filter(|o| o.start >= start && o.end <= end)
        .map(|o| HighlightSpan {
            start: shift(o.start),
            end: shift(o.end),
            kind: o.kind,
        })
        .collect();
    let formulae = formula_at
        .iter()
        .filter(|(s, _)| s.start >= start && s.end <= end)
        .map(|(s, markup)| SnippetFormula {
            start: shift(s.start),
            end: shift(s.end),
            mathml: markup.clone(),
        })
        .collect();
    Snippet {
        text,
        spans: highlights,
        formulae,
    }
}
