//! Corpus loading and index building.

mod config;
mod corpus;
mod extract;

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::index::{DocumentRecord, IndexBuilder, IndexConfig, IndexError, IndexSnapshot};

pub use config::{parse_config, ConfigError};
pub use corpus::{read_corpus, CorpusEntry, LineError, ReadCorpus};
pub use extract::{extract, placeholder, ExtractError, Extracted};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BuildSummary {
    pub docs: usize,
    pub terms: usize,
    pub math_terms: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Config {
        path: PathBuf,
        #[source]
        source: ConfigError,
    },
    #[error("no documents indexed ({} warnings)", warnings.len())]
    NoDocuments { warnings: Vec<String> },
    #[error(transparent)]
    Index(#[from] IndexError),
}

/// Extracts text and formulae from a corpus entry.
pub fn document_from_entry(entry: CorpusEntry) -> Result<(DocumentRecord, Vec<ExtractError>), ExtractError> {
    let extracted = extract(&entry.body)?;
    Ok((
        DocumentRecord {
            id: entry.id,
            title: entry.title,
            authors: entry.authors,
            language: entry.language,
            year: entry.year,
            body: entry.body,
            extracted_text: extracted.text,
            formulae: extracted.formulae,
        },
        extracted.warnings,
    ))
}

/// Indexes a JSONL corpus in input order. Broken lines, unextractable
/// bodies and rejected records are skipped with a warning prefixed by
/// `source:line`.
pub fn index_corpus(
    input: impl BufRead,
    source: &str,
    config: IndexConfig,
) -> Result<(IndexSnapshot, BuildSummary), BuildError> {
    let (entries, line_errors) = read_corpus(input).map_err(|e| BuildError::Io {
        path: PathBuf::from(source),
        source: e,
    })?;
    let mut warnings: Vec<(usize, String)> = line_errors
        .into_iter()
        .map(|e| (e.line, format!("{source}:{}: {}", e.line, e.message)))
        .collect();
    let mut builder = IndexBuilder::new(config)?;
    for (line, entry) in entries {
        let id = entry.id.clone();
        match document_from_entry(entry) {
            Ok((record, formula_warnings)) => {
                for w in formula_warnings {
                    warnings.push((line, format!("{source}:{line}: document {id:?}: {w}")));
                }
                if let Err(e) = builder.add_document(record) {
                    warnings.push((line, format!("{source}:{line}: {e}")));
                }
            }
            Err(e) => warnings.push((line, format!("{source}:{line}: document {id:?} skipped: {e}"))),
        }
    }
    warnings.sort_by_key(|(line, _)| *line);
    let warnings: Vec<String> = warnings.into_iter().map(|(_, w)| w).collect();
    for w in &warnings {
        log::warn!("{w}");
    }
    if builder.is_empty() {
        return Err(BuildError::NoDocuments { warnings });
    }
    let snapshot = builder.commit();
    let summary = BuildSummary {
        docs: snapshot.doc_count(),
        terms: snapshot.term_count(),
        math_terms: snapshot.math_term_count(),
        warnings,
    };
    Ok((snapshot, summary))
}

pub fn load_config(path: &Path) -> Result<IndexConfig, BuildError> {
    let text = std::fs::read_to_string(path).map_err(|source| BuildError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text).map_err(|source| BuildError::Config {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads `corpus`, builds the index and writes it to `out`.
pub fn build(corpus: &Path, out: &Path, config: IndexConfig) -> Result<BuildSummary, BuildError> {
    let file = File::open(corpus).map_err(|source| BuildError::Io {
        path: corpus.to_path_buf(),
        source,
    })?;
    let (snapshot, summary) = index_corpus(BufReader::new(file), &corpus.display().to_string(), config)?;
    snapshot.save(out).map_err(|e| match e {
        IndexError::Io(source) => BuildError::Io {
            path: out.to_path_buf(),
            source,
        },
        other => BuildError::Index(other),
    })?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = concat!(
        r#"{"id":"docA","title":"Mass","authors":["A. One"],"language":"en","year":1905,"body":"<p>the equation <math><mi>E</mi><mo>=</mo><mi>m</mi><msup><mi>c</mi><mn>2</mn></msup></math> holds</p>"}"#,
        "\n",
        r#"{"id":"docB","title":"Other","authors":["B. Two"],"language":"cs","year":1999,"body":"<p><math><mi>E</mi><mo>=</mo><mi>a</mi><msup><mi>b</mi><mn>2</mn></msup></math></p>"}"#,
        "\n",
        r#"{"id":"docC","title":"Words","authors":["C. Three"],"language":"en","year":2010,"body":"<p>kinetic energy only</p>"}"#,
        "\n"
    );

    #[test]
    fn toy_corpus() {
        let (snapshot, summary) = index_corpus(TOY.as_bytes(), "toy", IndexConfig::default()).unwrap();
        assert_eq!(summary.docs, 3);
        assert!(summary.warnings.is_empty());
        assert!(summary.math_terms > 0);
        snapshot.check_consistency().unwrap();
    }

    #[test]
    fn broken_record_skipped() {
        let input = TOY.replacen(r#"{"id":"docB""#, r#"{"id":"docB" oops"#, 1);
        let (_, summary) = index_corpus(input.as_bytes(), "toy", IndexConfig::default()).unwrap();
        assert_eq!(summary.docs, 2);
        assert_eq!(summary.warnings.len(), 1);
        assert!(summary.warnings[0].starts_with("toy:2:"), "{}", summary.warnings[0]);
    }

    #[test]
    fn empty_corpus_fails() {
        assert!(matches!(
            index_corpus("".as_bytes(), "empty", IndexConfig::default()),
            Err(BuildError::NoDocuments { .. })
        ));
    }

    #[test]
    fn duplicate_id_warns() {
        let line = TOY.lines().next().unwrap();
        let input = format!("{line}\n{line}\n");
        let (_, summary) = index_corpus(input.as_bytes(), "dup", IndexConfig::default()).unwrap();
        assert_eq!(summary.docs, 1);
        assert_eq!(summary.warnings.len(), 1);
    }
}
