//! Faceted inverted index over text and math terms.
//!
//! [`IndexBuilder`] is the single writer; [`IndexBuilder::commit`] freezes it
//! into an immutable [`IndexSnapshot`] that readers share. Math postings
//! store the summed [`MathTerm`](crate::tokenizer::MathTerm) weights of a
//! document as their frequency.

mod persist;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::AnalyzerConfig;
use crate::canon::{canonicalize, CanonicalizationConfig};
use crate::content::derive_content;
use crate::mathml::{Encoding, Formula};
use crate::tokenizer::{tokenize_formula, WeightConfig, WeightConfigError};

pub use persist::{FORMAT_VERSION, MAGIC};

pub type DocId = u32;

/// `[start, end)` character offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CharSpan {
    pub start: usize,
    pub end: usize,
}

impl CharSpan {
    pub fn new(start: usize, end: usize) -> Self {
        CharSpan { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    pub fn overlaps(&self, other: &CharSpan) -> bool {
        self.start < other.end && other.start < self.end
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexedFormula {
    pub formula: Formula,
    pub span: CharSpan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub id: String,
    pub title: String,
    pub authors: Vec<String>,
    pub language: String,
    pub year: i32,
    pub body: String,
    pub extracted_text: String,
    /// Canonical formulae; a presentation/content pair shares one span.
    pub formulae: Vec<IndexedFormula>,
}

impl DocumentRecord {
    fn validate(&self) -> Result<(), String> {
        if self.id.trim().is_empty() {
            return Err("empty id".to_string());
        }
        let len = self.extracted_text.chars().count();
        let mut spans: Vec<CharSpan> = self.formulae.iter().map(|f| f.span).collect();
        spans.sort();
        spans.dedup();
        for span in &spans {
            if span.start > span.end || span.end > len {
                return Err(format!(
                    "formula span [{}, {}) outside text of length {len}",
                    span.start, span.end
                ));
            }
        }
        if let Some(w) = spans.windows(2).find(|w| w[0].overlaps(&w[1])) {
            return Err(format!(
                "overlapping formula spans [{}, {}) and [{}, {})",
                w[0].start, w[0].end, w[1].start, w[1].end
            ));
        }
        Ok(())
    }

    /// Facet value list for `field`.
    pub fn facet_values(&self, field: FacetField) -> Vec<String> {
        match field {
            FacetField::Language => vec![self.language.clone()],
            FacetField::Author => self.authors.clone(),
            FacetField::Year => vec![self.year.to_string()],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Title,
    Author,
    Body,
    Math,
}

impl Field {
    pub fn as_str(self) -> &'static str {
        match self {
            Field::Title => "title",
            Field::Author => "author",
            Field::Body => "body",
            Field::Math => "math",
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FacetField {
    Language,
    Author,
    Year,
}

impl FacetField {
    pub const ALL: [FacetField; 3] = [FacetField::Language, FacetField::Author, FacetField::Year];

    pub fn as_str(self) -> &'static str {
        match self {
            FacetField::Language => "language",
            FacetField::Author => "author",
            FacetField::Year => "year",
        }
    }
}

impl FromStr for FacetField {
    type Err = IndexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "language" => Ok(FacetField::Language),
            "author" => Ok(FacetField::Author),
            "year" => Ok(FacetField::Year),
            other => Err(IndexError::UnknownFacetField(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TermKey {
    pub field: Field,
    pub term: String,
}

impl TermKey {
    pub fn new(field: Field, term: impl Into<String>) -> Self {
        TermKey {
            field,
            term: term.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Positions {
    /// Token ordinals within a text field.
    Tokens(Vec<u32>),
    /// Formula spans in the extracted text.
    Spans(Vec<CharSpan>),
}

impl Positions {
    pub fn len(&self) -> usize {
        match self {
            Positions::Tokens(t) => t.len(),
            Positions::Spans(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Posting {
    pub doc: DocId,
    /// Occurrence count for text terms, summed term weight for math terms.
    pub frequency: f64,
    pub positions: Positions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexConfig {
    pub weights: WeightConfig,
    pub analyzer: AnalyzerConfig,
    /// Index `C:` terms from document content markup or derived content.
    pub content_terms: bool,
    /// Default word/math balance used at query time.
    pub math_weight: f64,
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig {
            weights: WeightConfig::default(),
            analyzer: AnalyzerConfig::default(),
            content_terms: true,
            math_weight: 1.0,
        }
    }
}

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("duplicate document id {0:?}")]
    DuplicateId(String),
    #[error("invalid record {id:?}: {reason}")]
    InvalidRecord { id: String, reason: String },
    #[error("unknown facet field {0:?}")]
    UnknownFacetField(String),
    #[error(transparent)]
    InvalidConfig(#[from] WeightConfigError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("index format version mismatch: found {found}, expected {expected}")]
    FormatVersionMismatch { found: String, expected: String },
    #[error("corrupt index file: {0}")]
    Corrupt(String),
}

type FacetMap = BTreeMap<FacetField, BTreeMap<String, BTreeSet<DocId>>>;

/// Single-writer index under construction.
#[derive(Debug)]
pub struct IndexBuilder {
    config: IndexConfig,
    canonicalization: CanonicalizationConfig,
    docs: Vec<DocumentRecord>,
    ids: HashMap<String, DocId>,
    postings: BTreeMap<TermKey, Vec<Posting>>,
    suggestions: BTreeMap<String, u64>,
}

impl IndexBuilder {
    pub fn new(config: IndexConfig) -> Result<Self, IndexError> {
        config.weights.validate()?;
        Ok(IndexBuilder {
            config,
            canonicalization: CanonicalizationConfig::default(),
            docs: Vec::new(),
            ids: HashMap::new(),
            postings: BTreeMap::new(),
            suggestions: BTreeMap::new(),
        })
    }

    pub fn config(&self) -> &IndexConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn add_document(&mut self, record: DocumentRecord) -> Result<DocId, IndexError> {
        if self.ids.contains_key(&record.id) {
            return Err(IndexError::DuplicateId(record.id));
        }
        record.validate().map_err(|reason| IndexError::InvalidRecord {
            id: record.id.clone(),
            reason,
        })?;
        let doc = DocId::try_from(self.docs.len()).map_err(|_| IndexError::InvalidRecord {
            id: record.id.clone(),
            reason: "index is full".to_string(),
        })?;

        let analyzer = &self.config.analyzer;
        let mut text_terms: BTreeMap<TermKey, Vec<u32>> = BTreeMap::new();
        for token in analyzer.analyze(&record.title) {
            text_terms
                .entry(TermKey::new(Field::Title, token.term))
                .or_default()
                .push(token.position);
        }
        // authors share one position space with a gap between names
        let mut offset = 0;
        for author in &record.authors {
            let tokens = analyzer.analyze(author);
            let count = tokens.len() as u32;
            for token in tokens {
                text_terms
                    .entry(TermKey::new(Field::Author, token.term))
                    .or_default()
                    .push(offset + token.position);
            }
            offset += count + 1;
        }
        let spans: Vec<(usize, usize)> = record.formulae.iter().map(|f| (f.span.start, f.span.end)).collect();
        let body = analyzer.analyze_excluding(&record.extracted_text, &spans);
        for token in &body {
            text_terms
                .entry(TermKey::new(Field::Body, token.term.clone()))
                .or_default()
                .push(token.position);
            *self.suggestions.entry(token.term.clone()).or_default() += 1;
        }
        for pair in body.windows(2) {
            let separated = spans
                .iter()
                .any(|&(start, end)| start >= pair[0].end && end <= pair[1].start);
            if !separated {
                let bigram = format!("{} {}", pair[0].term, pair[1].term);
                *self.suggestions.entry(bigram).or_default() += 1;
            }
        }
        for (key, positions) in text_terms {
            self.postings.entry(key).or_default().push(Posting {
                doc,
                frequency: positions.len() as f64,
                positions: Positions::Tokens(positions),
            });
        }

        for (token, (frequency, spans)) in self.math_terms(&record) {
            self.postings
                .entry(TermKey::new(Field::Math, token))
                .or_default()
                .push(Posting {
                    doc,
                    frequency,
                    positions: Positions::Spans(spans),
                });
        }

        self.ids.insert(record.id.clone(), doc);
        self.docs.push(record);
        Ok(doc)
    }

    /// Math token -> (weight sum, spans) for one document.
    fn math_terms(&self, record: &DocumentRecord) -> BTreeMap<String, (f64, Vec<CharSpan>)> {
        let mut by_span: BTreeMap<CharSpan, Vec<Formula>> = BTreeMap::new();
        for indexed in &record.formulae {
            let canonical = canonicalize(&indexed.formula, &self.canonicalization);
            let (presentation, content) = canonical.split_encodings();
            let group = by_span.entry(indexed.span).or_default();
            group.extend(presentation);
            group.extend(content);
        }
        let mut out: BTreeMap<String, (f64, Vec<CharSpan>)> = BTreeMap::new();
        for (span, group) in by_span {
            for formula in expand_encodings(&group, self.config.content_terms, &self.canonicalization) {
                for term in tokenize_formula(&formula, &self.config.weights) {
                    let entry = out.entry(term.token).or_insert((0.0, Vec::new()));
                    entry.0 += term.weight;
                    if entry.1.last() != Some(&span) {
                        entry.1.push(span);
                    }
                }
            }
        }
        out
    }

    pub fn commit(self) -> IndexSnapshot {
        IndexSnapshot::from_parts(self.config, self.docs, self.postings, self.suggestions)
    }
}

/// The formulae to tokenize for one formula occurrence: its presentation
/// form and, when enabled, its content form (derived when not supplied).
pub(crate) fn expand_encodings(
    group: &[Formula],
    content_terms: bool,
    canonicalization: &CanonicalizationConfig,
) -> Vec<Formula> {
    let mut out: Vec<Formula> = Vec::new();
    let has_content = group.iter().any(|f| f.encoding == Encoding::Content);
    for formula in group {
        match formula.encoding {
            Encoding::Content if content_terms => out.push(formula.clone()),
            Encoding::Content => {}
            _ => {
                out.push(formula.clone());
                if content_terms && !has_content {
                    if let Ok(derived) = derive_content(formula) {
                        out.push(canonicalize(&derived, canonicalization));
                    }
                }
            }
        }
    }
    out
}

/// A list of postings for one term, sorted by document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostingList {
    pub postings: Vec<Posting>,
}

impl PostingList {
    pub fn df(&self) -> usize {
        self.postings.len()
    }

    pub fn get(&self, doc: DocId) -> Option<&Posting> {
        self.postings
            .binary_search_by_key(&doc, |p| p.doc)
            .ok()
            .map(|i| &self.postings[i])
    }
}

/// Immutable, committed index.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSnapshot {
    config: IndexConfig,
    docs: Vec<DocumentRecord>,
    ids: HashMap<String, DocId>,
    postings: BTreeMap<TermKey, PostingList>,
    facets: FacetMap,
    suggestions: BTreeMap<String, u64>,
}

impl IndexSnapshot {
    fn from_parts(
        config: IndexConfig,
        docs: Vec<DocumentRecord>,
        postings: BTreeMap<TermKey, Vec<Posting>>,
        suggestions: BTreeMap<String, u64>,
    ) -> Self {
        let ids = docs
            .iter()
            .enumerate()
            .map(|(i, d)| (d.id.clone(), i as DocId))
            .collect();
        let mut facets: FacetMap = BTreeMap::new();
        for (i, doc) in docs.iter().enumerate() {
            for field in FacetField::ALL {
                for value in doc.facet_values(field) {
                    facets
                        .entry(field)
                        .or_default()
                        .entry(value)
                        .or_default()
                        .insert(i as DocId);
                }
            }
        }
        let postings = postings
            .into_iter()
            .map(|(key, postings)| (key, PostingList { postings }))
            .collect();
        IndexSnapshot {
            config,
            docs,
            ids,
            postings,
            facets,
            suggestions,
        }
    }

    pub fn empty(config: IndexConfig) -> Self {
        IndexSnapshot::from_parts(config, Vec::new(), BTreeMap::new(), BTreeMap::new())
    }

    pub fn config(&self) -> &IndexConfig {
        &self.config
    }

    /// Number of committed documents.
    pub fn doc_count(&self) -> usize {
        self.docs.len()
    }

    pub fn doc(&self, doc: DocId) -> Option<&DocumentRecord> {
        self.docs.get(doc as usize)
    }

    pub fn docs(&self) -> &[DocumentRecord] {
        &self.docs
    }

    pub fn lookup(&self, id: &str) -> Option<DocId> {
        self.ids.get(id).copied()
    }

    pub fn postings(&self, key: &TermKey) -> Option<&PostingList> {
        self.postings.get(key)
    }

    pub fn df(&self, key: &TermKey) -> usize {
        self.postings.get(key).map_or(0, PostingList::df)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TermKey, &PostingList)> {
        self.postings.iter()
    }

    pub fn term_count(&self) -> usize {
        self.postings.len()
    }

    pub fn math_term_count(&self) -> usize {
        self.postings.keys().filter(|k| k.field == Field::Math).count()
    }

    pub fn all_docs(&self) -> BTreeSet<DocId> {
        (0..self.docs.len() as DocId).collect()
    }

    /// Documents having `value` for `field`.
    pub fn facet_docs(&self, field: FacetField, value: &str) -> Option<&BTreeSet<DocId>> {
        self.facets.get(&field).and_then(|values| values.get(value))
    }

    /// Per-value document counts within `docs`, count descending then
    /// value ascending; zero counts omitted.
    pub fn facet_counts(&self, field: FacetField, docs: &BTreeSet<DocId>) -> Vec<(String, usize)> {
        let mut counts: Vec<(String, usize)> = self
            .facets
            .get(&field)
            .into_iter()
            .flatten()
            .map(|(value, members)| {
                let count = if docs.len() < members.len() {
                    docs.iter().filter(|d| members.contains(d)).count()
                } else {
                    members.iter().filter(|d| docs.contains(d)).count()
                };
                (value.clone(), count)
            })
            .filter(|(_, count)| *count > 0)
            .collect();
        counts.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        counts
    }

    /// [`facet_counts`](Self::facet_counts) with the field given by name.
    pub fn facet_counts_by_name(
        &self,
        field: &str,
        docs: &BTreeSet<DocId>,
    ) -> Result<Vec<(String, usize)>, IndexError> {
        Ok(self.facet_counts(field.parse()?, docs))
    }

    pub fn suggestions(&self) -> &BTreeMap<String, u64> {
        &self.suggestions
    }

    /// Checks that every posting list is sorted, duplicate-free and
    /// non-empty, and that frequencies and positions are positive.
    pub fn check_consistency(&self) -> Result<(), String> {
        for (key, list) in &self.postings {
            if list.postings.is_empty() {
                return Err(format!("{key:?} has no postings"));
            }
            let distinct: BTreeSet<DocId> = list.postings.iter().map(|p| p.doc).collect();
            if distinct.len() != list.df() {
                return Err(format!("{key:?}: df {} != {} distinct docs", list.df(), distinct.len()));
            }
            if !list.postings.windows(2).all(|w| w[0].doc < w[1].doc) {
                return Err(format!("{key:?}: postings not sorted"));
            }
            for posting in &list.postings {
                if posting.doc as usize >= self.docs.len() {
                    return Err(format!("{key:?}: dangling doc {}", posting.doc));
                }
                if posting.frequency.is_nan() || posting.frequency <= 0.0 || posting.positions.is_empty() {
                    return Err(format!("{key:?}: empty posting for doc {}", posting.doc));
                }
            }
        }
        Ok(())
    }
}
