//! Plain-text analysis shared by indexing and query parsing.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalyzerConfig {
    /// Tokens shorter than this (in characters) are not indexed.
    pub min_token_len: usize,
    pub stopwords: BTreeSet<String>,
}

impl Default for AnalyzerConfig {
    fn default() -> Self {
        AnalyzerConfig {
            min_token_len: 2,
            stopwords: BTreeSet::new(),
        }
    }
}

/// A token with its ordinal among kept tokens and its `[start, end)`
/// character span in the analyzed text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextToken {
    pub term: String,
    pub position: u32,
    pub start: usize,
    pub end: usize,
}

impl AnalyzerConfig {
    pub fn analyze(&self, text: &str) -> Vec<TextToken> {
        self.analyze_excluding(text, &[])
    }

    /// Analyzes `text`, treating the given `[start, end)` character spans as
    /// separators (used to skip formula placeholders).
    pub fn analyze_excluding(&self, text: &str, excluded: &[(usize, usize)]) -> Vec<TextToken> {
        let mut tokens = Vec::new();
        let mut current = String::new();
        let mut start = 0;
        let mut position = 0u32;
        let mut flush = |current: &mut String, start: usize, end: usize, tokens: &mut Vec<TextToken>| {
            if current.is_empty() {
                return;
            }
            let term = std::mem::take(current);
            if term.chars().count() >= self.min_token_len && !self.stopwords.contains(&term) {
                tokens.push(TextToken {
                    term,
                    position,
                    start,
                    end,
                });
                position += 1;
            }
        };
        let mut count = 0;
        for (i, c) in text.chars().enumerate() {
            count = i + 1;
            let blocked = excluded.iter().any(|&(s, e)| i >= s && i < e);
            if c.is_alphanumeric() && !blocked {
                if current.is_empty() {
                    start = i;
                }
                current.extend(c.to_lowercase());
            } else {
                flush(&mut current, start, i, &mut tokens);
            }
        }
        flush(&mut current, start, count, &mut tokens);
        tokens
    }

    /// Normalized terms only.
    pub fn terms(&self, text: &str) -> Vec<String> {
        self.analyze(text).into_iter().map(|t| t.term).collect()
    }
}
