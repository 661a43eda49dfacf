//! Math-aware indexing and retrieval.

pub mod analysis;
pub mod canon;
pub mod content;
pub mod index;
pub mod ingest;
pub mod latex;
pub mod mathml;
pub mod query;
pub mod tokenizer;
