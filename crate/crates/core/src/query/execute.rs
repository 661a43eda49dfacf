use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::canon::CanonicalizationConfig;
use crate::index::{expand_encodings, DocId, FacetField, Field, IndexSnapshot, Positions, TermKey};
use crate::tokenizer::tokenize_formula;

use super::snippet::{snippet, MatchedTerms, Snippet, DEFAULT_WINDOW};
use super::{Clause, Query};

const TEXT_FIELDS: [Field; 3] = [Field::Title, Field::Author, Field::Body];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExecuteOptions {
    /// 1-based.
    pub page: usize,
    pub page_size: usize,
    /// Word/math balance; the index default when `None`.
    pub math_weight: Option<f64>,
    pub snippet_window: usize,
}

impl Default for ExecuteOptions {
    fn default() -> Self {
        ExecuteOptions {
            page: 1,
            page_size: 10,
            math_weight: None,
            snippet_window: DEFAULT_WINDOW,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchHit {
    pub id: String,
    pub title: String,
    pub authors: Vec<String>,
    pub language: String,
    pub year: i32,
    pub score: f64,
    pub snippet: Snippet,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResults {
    pub hits: Vec<SearchHit>,
    /// Number of matching documents before pagination.
    pub total: usize,
    pub facet_counts: BTreeMap<FacetField, Vec<(String, usize)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplanationLeaf {
    pub term: String,
    pub field: Field,
    pub tf: f64,
    pub idf: f64,
    /// Query-side factor: 1 for text, `β·qw` for math.
    pub weight: f64,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClauseExplanation {
    pub label: String,
    pub contribution: f64,
    pub leaves: Vec<ExplanationLeaf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreExplanation {
    pub id: String,
    pub total: f64,
    pub math_weight: f64,
    pub clauses: Vec<ClauseExplanation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExplainError {
    #[error("document {0:?} does not match the query")]
    NotAMatch(String),
    #[error("unknown document {0:?}")]
    UnknownDocument(String),
}

enum Compiled {
    Text { label: String, term: String },
    Math { label: String, terms: Vec<(String, f64)> },
}

impl Compiled {
    fn keys(&self) -> Vec<TermKey> {
        match self {
            Compiled::Text { term, .. } => TEXT_FIELDS.iter().map(|&f| TermKey::new(f, term.clone())).collect(),
            Compiled::Math { terms, .. } => terms
                .iter()
                .map(|(t, _)| TermKey::new(Field::Math, t.clone()))
                .collect(),
        }
    }
}

/// Query-side math terms of a clause: presentation plus content tokens,
/// weights summed per token.
fn compile(query: &Query, index: &IndexSnapshot) -> Vec<Compiled> {
    let canon = CanonicalizationConfig::default();
    let weights = &index.config().weights;
    query
        .clauses
        .iter()
        .map(|clause| match clause {
            Clause::Text { term } => Compiled::Text {
                label: clause.label(),
                term: term.clone(),
            },
            Clause::Math { formula, .. } => {
                let (presentation, content) = formula.split_encodings();
                let group: Vec<_> = presentation.into_iter().chain(content).collect();
                let mut terms: Vec<(String, f64)> = Vec::new();
                let mut seen: BTreeMap<String, usize> = BTreeMap::new();
                for f in expand_encodings(&group, true, &canon) {
                    for t in tokenize_formula(&f, weights) {
                        if !query.math_mode.admits(&t.token) {
                            continue;
                        }
                        match seen.get(&t.token) {
                            Some(&i) => terms[i].1 += t.weight,
                            None => {
                                seen.insert(t.token.clone(), terms.len());
                                terms.push((t.token, t.weight));
                            }
                        }
                    }
                }
                Compiled::Math {
                    label: clause.label(),
                    terms,
                }
            }
        })
        .collect()
}

fn idf(index: &IndexSnapshot, df: usize) -> f64 {
    (1.0 + index.doc_count() as f64 / df as f64).ln()
}

fn explain_doc(compiled: &[Compiled], index: &IndexSnapshot, doc: DocId, beta: f64) -> Vec<ClauseExplanation> {
    let mut out = Vec::new();
    for clause in compiled {
        let (label, leaves) = match clause {
            Compiled::Text { label, term } => {
                let mut leaves = Vec::new();
                for field in TEXT_FIELDS {
                    let key = TermKey::new(field, term.clone());
                    let Some(list) = index.postings(&key) else { continue };
                    let Some(posting) = list.get(doc) else { continue };
                    let tf = 1.0 + posting.frequency.ln();
                    let idf = idf(index, list.df());
                    leaves.push(ExplanationLeaf {
                        term: term.clone(),
                        field,
                        tf,
                        idf,
                        weight: 1.0,
                        contribution: tf * idf,
                    });
                }
                (label, leaves)
            }
            Compiled::Math { label, terms } => {
                let mut leaves = Vec::new();
                for (token, qw) in terms {
                    let key = TermKey::new(Field::Math, token.clone());
                    let Some(list) = index.postings(&key) else { continue };
                    let Some(posting) = list.get(doc) else { continue };
                    let tf = posting.frequency;
                    let idf = idf(index, list.df());
                    let weight = beta * qw;
                    leaves.push(ExplanationLeaf {
                        term: token.clone(),
                        field: Field::Math,
                        tf,
                        idf,
                        weight,
                        contribution: weight * tf * idf,
                    });
                }
                (label, leaves)
            }
        };
        let contribution = leaves.iter().map(|l| l.contribution).sum();
        out.push(ClauseExplanation {
            label: label.clone(),
            contribution,
            leaves,
        });
    }
    out
}

fn total(clauses: &[ClauseExplanation]) -> f64 {
    clauses.iter().map(|c| c.contribution).sum()
}

fn candidates(compiled: &[Compiled], query: &Query, index: &IndexSnapshot) -> BTreeSet<DocId> {
    let mut docs = BTreeSet::new();
    for clause in compiled {
        for key in clause.keys() {
            if let Some(list) = index.postings(&key) {
                docs.extend(list.postings.iter().map(|p| p.doc));
            }
        }
    }
    for (&field, values) in &query.facet_filters {
        let allowed: BTreeSet<DocId> = values
            .iter()
            .filter_map(|v| index.facet_docs(field, v))
            .flatten()
            .copied()
            .collect();
        docs.retain(|d| allowed.contains(d));
    }
    docs
}

fn beta(opts: &ExecuteOptions, index: &IndexSnapshot) -> f64 {
    opts.math_weight.unwrap_or(index.config().math_weight)
}

/// Ranked retrieval: OR across clauses, facet filters applied, score
/// descending with ties by id.
pub fn execute(query: &Query, index: &IndexSnapshot, opts: &ExecuteOptions) -> SearchResults {
    let compiled = compile(query, index);
    let beta = beta(opts, index);
    let docs = candidates(&compiled, query, index);
    let mut scored: Vec<(DocId, f64)> = docs
        .iter()
        .map(|&d| (d, total(&explain_doc(&compiled, index, d, beta))))
        .collect();
    let id = |d: DocId| index.doc(d).map(|r| r.id.as_str()).unwrap_or("");
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| id(a.0).cmp(id(b.0))));

    let facet_counts = FacetField::ALL
        .iter()
        .map(|&f| (f, index.facet_counts(f, &docs)))
        .collect();
    let page_size = opts.page_size.max(1);
    let skip = (opts.page.max(1) - 1).saturating_mul(page_size);
    let hits = scored
        .iter()
        .skip(skip)
        .take(page_size)
        .map(|&(doc, score)| {
            let record = index.doc(doc).expect("candidate from postings");
            let matched = matched_terms(&compiled, index, doc);
            SearchHit {
                id: record.id.clone(),
                title: record.title.clone(),
                authors: record.authors.clone(),
                language: record.language.clone(),
                year: record.year,
                score,
                snippet: snippet(record, &matched, &index.config().analyzer, opts.snippet_window),
            }
        })
        .collect();
    SearchResults {
        hits,
        total: docs.len(),
        facet_counts,
    }
}

fn matched_terms(compiled: &[Compiled], index: &IndexSnapshot, doc: DocId) -> MatchedTerms {
    let mut matched = MatchedTerms::default();
    for clause in compiled {
        match clause {
            Compiled::Text { term, .. } => {
                let key = TermKey::new(Field::Body, term.clone());
                if index.postings(&key).and_then(|l| l.get(doc)).is_some() {
                    matched.text.insert(term.clone());
                }
            }
            Compiled::Math { .. } => {
                for key in clause.keys() {
                    if let Some(posting) = index.postings(&key).and_then(|l| l.get(doc)) {
                        if let Positions::Spans(spans) = &posting.positions {
                            matched.math.extend(spans.iter().copied());
                        }
                    }
                }
            }
        }
    }
    matched
}

/// Additive score decomposition of `id` for `query`; totals match
/// [`execute`] exactly.
pub fn explain(
    query: &Query,
    index: &IndexSnapshot,
    id: &str,
    opts: &ExecuteOptions,
) -> Result<ScoreExplanation, ExplainError> {
    let doc = index
        .lookup(id)
        .ok_or_else(|| ExplainError::UnknownDocument(id.to_string()))?;
    let compiled = compile(query, index);
    if !candidates(&compiled, query, index).contains(&doc) {
        return Err(ExplainError::NotAMatch(id.to_string()));
    }
    let beta = beta(opts, index);
    let clauses = explain_doc(&compiled, index, doc, beta);
    Ok(ScoreExplanation {
        id: id.to_string(),
        total: total(&clauses),
        math_weight: beta,
        clauses,
    })
}
