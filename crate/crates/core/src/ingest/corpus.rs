use std::io::BufRead;

use serde::{Deserialize, Serialize};

/// One JSON object per line of a corpus file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub id: String,
    pub title: String,
    #[serde(default)]
    pub authors: Vec<String>,
    pub language: String,
    pub year: i32,
    /// XHTML fragment with embedded MathML.
    pub body: String,
}

/// A corpus line that could not be read, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

/// `(line number, entry)` pairs plus the lines that failed to parse.
pub type ReadCorpus = (Vec<(usize, CorpusEntry)>, Vec<LineError>);

/// Reads entries, skipping blank lines; broken lines are reported, not fatal.
pub fn read_corpus(input: impl BufRead) -> std::io::Result<ReadCorpus> {
    let mut entries = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<CorpusEntry>(&line) {
            Ok(entry) => entries.push((i + 1, entry)),
            Err(e) => errors.push(LineError {
                line: i + 1,
                message: e.to_string(),
            }),
        }
    }
    Ok((entries, errors))
}
