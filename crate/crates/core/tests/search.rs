mod support;

use std::collections::BTreeSet;
use std::fs::File;
use std::io::BufReader;

use formulary_core::index::{FacetField, IndexConfig, IndexSnapshot, Positions};
use formulary_core::ingest::{index_corpus, placeholder, BuildError};
use formulary_core::query::{
    execute, explain, parse_query_for, suggest, ExecuteOptions, ExplainError, MathMode, Query,
};
use formulary_core::tokenizer::WeightConfig;
use support::{fixtures, queries::REGRESSION};

fn build(name: &str, config: IndexConfig) -> IndexSnapshot {
    let file = File::open(fixtures::path(name)).unwrap();
    index_corpus(BufReader::new(file), name, config).unwrap().0
}

fn query(index: &IndexSnapshot, raw: &str) -> Query {
    parse_query_for(raw, index).unwrap()
}

fn ranking(index: &IndexSnapshot, q: &Query, opts: &ExecuteOptions) -> Vec<(String, f64)> {
    let all = ExecuteOptions {
        page_size: usize::MAX,
        ..*opts
    };
    execute(q, index, &all)
        .hits
        .into_iter()
        .map(|h| (h.id, h.score))
        .collect()
}

#[test]
fn exact_formula_outranks_renamed() {
    for beta in [0.5, 1.0, 2.0] {
        for l in [0.5, 0.7, 0.9] {
            let config = IndexConfig {
                weights: WeightConfig {
                    level_factor: l,
                    ..WeightConfig::default()
                },
                math_weight: beta,
                ..IndexConfig::default()
            };
            let index = build("toy.jsonl", config);
            let hits = ranking(&index, &query(&index, "$E=mc^2$"), &ExecuteOptions::default());
            let ids: Vec<&str> = hits.iter().map(|(id, _)| id.as_str()).collect();
            assert_eq!(ids, vec!["docA", "docB"], "beta={beta} l={l}");
            assert!(hits[0].1 > hits[1].1);
        }
    }
}

#[test]
fn text_query_matches_text_doc() {
    let index = build("toy.jsonl", IndexConfig::default());
    let hits = ranking(&index, &query(&index, "energy"), &ExecuteOptions::default());
    assert_eq!(hits.len(), 1);
    assert_eq!(hits[0].0, "docC");
}

#[test]
fn content_mode_without_content_terms() {
    let config = IndexConfig {
        content_terms: false,
        ..IndexConfig::default()
    };
    let index = build("toy.jsonl", config);
    let q = query(&index, "$E=mc^2$").with_math_mode(MathMode::Cmml);
    assert_eq!(execute(&q, &index, &ExecuteOptions::default()).total, 0);
    let with_content = build("toy.jsonl", IndexConfig::default());
    assert!(execute(&q, &with_content, &ExecuteOptions::default()).total > 0);
}

#[test]
fn explanations_add_up() {
    let index = build("toy.jsonl", IndexConfig::default());
    let q = query(&index, "$E=mc^2$");
    let results = execute(&q, &index, &ExecuteOptions::default());
    for hit in &results.hits {
        let e = explain(&q, &index, &hit.id, &ExecuteOptions::default()).unwrap();
        assert!((e.total - hit.score).abs() < 1e-9);
        for clause in &e.clauses {
            let sum: f64 = clause.leaves.iter().map(|l| l.contribution).sum();
            assert!((sum - clause.contribution).abs() < 1e-9);
            for leaf in &clause.leaves {
                assert!((leaf.tf * leaf.idf * leaf.weight - leaf.contribution).abs() < 1e-12);
            }
        }
    }
    assert_eq!(
        explain(&q, &index, "docC", &ExecuteOptions::default()),
        Err(ExplainError::NotAMatch("docC".into()))
    );
    assert!(matches!(
        explain(&q, &index, "nope", &ExecuteOptions::default()),
        Err(ExplainError::UnknownDocument(_))
    ));
}

#[test]
fn single_term_single_leaf() {
    let index = build("toy.jsonl", IndexConfig::default());
    let q = query(&index, "kinetic");
    let e = explain(&q, &index, "docC", &ExecuteOptions::default()).unwrap();
    let leaves: Vec<_> = e.clauses.iter().flat_map(|c| &c.leaves).collect();
    assert_eq!(leaves.len(), 2, "title and body both contain the word");
    let q = query(&index, "particle");
    let e = explain(&q, &index, "docC", &ExecuteOptions::default()).unwrap();
    assert_eq!(e.clauses[0].leaves.len(), 1);
    assert_eq!(e.total, e.clauses[0].leaves[0].contribution);
}

#[test]
fn facet_filters() {
    let index = build("toy.jsonl", IndexConfig::default());
    let q = query(&index, "energy").with_filter(FacetField::Language, "cs");
    assert_eq!(execute(&q, &index, &ExecuteOptions::default()).total, 0);

    let index = build("corpus.jsonl", IndexConfig::default());
    for raw in REGRESSION {
        let Ok(base) = parse_query_for(raw, &index) else {
            continue;
        };
        let results = execute(&base, &index, &ExecuteOptions::default());
        for (value, count) in &results.facet_counts[&FacetField::Language] {
            let filtered = base.clone().with_filter(FacetField::Language, value.clone());
            let hits = ranking(&index, &filtered, &ExecuteOptions::default());
            assert_eq!(hits.len(), *count, "{raw} language={value}");
            for (id, _) in hits {
                let doc = index.doc(index.lookup(&id).unwrap()).unwrap();
                assert_eq!(&doc.language, value);
            }
        }
    }
}

#[test]
fn facet_partition() {
    let index = build("corpus.jsonl", IndexConfig::default());
    let all = index.all_docs();
    let sum = |f| index.facet_counts(f, &all).iter().map(|(_, c)| c).sum::<usize>();
    assert_eq!(sum(FacetField::Language), index.doc_count());
    assert_eq!(sum(FacetField::Year), index.doc_count());
    let authors: usize = index.docs().iter().map(|d| d.authors.len()).sum();
    assert_eq!(sum(FacetField::Author), authors);
}

#[test]
fn pagination_concatenates() {
    let index = build("corpus.jsonl", IndexConfig::default());
    for raw in REGRESSION {
        let Ok(q) = parse_query_for(raw, &index) else { continue };
        let full = ranking(&index, &q, &ExecuteOptions::default());
        let mut paged = Vec::new();
        for page in 1.. {
            let opts = ExecuteOptions {
                page,
                page_size: 3,
                ..ExecuteOptions::default()
            };
            let hits = execute(&q, &index, &opts).hits;
            if hits.is_empty() {
                break;
            }
            paged.extend(hits.into_iter().map(|h| (h.id, h.score)));
        }
        assert_eq!(paged, full, "{raw}");
    }
}

#[test]
fn math_modes_nest() {
    let index = build("corpus.jsonl", IndexConfig::default());
    for raw in REGRESSION {
        let Ok(q) = parse_query_for(raw, &index) else { continue };
        let ids = |mode| -> BTreeSet<String> {
            ranking(&index, &q.clone().with_math_mode(mode), &ExecuteOptions::default())
                .into_iter()
                .map(|(id, _)| id)
                .collect()
        };
        let both = ids(MathMode::Both);
        assert!(ids(MathMode::Pmml).is_subset(&both), "{raw}");
        assert!(ids(MathMode::Cmml).is_subset(&both), "{raw}");
    }
}

#[test]
fn ranking_is_sorted_with_id_ties() {
    let index = build("corpus.jsonl", IndexConfig::default());
    for raw in REGRESSION {
        let Ok(q) = parse_query_for(raw, &index) else { continue };
        let hits = ranking(&index, &q, &ExecuteOptions::default());
        for w in hits.windows(2) {
            assert!(w[0].1 > w[1].1 || (w[0].1 == w[1].1 && w[0].0 < w[1].0), "{raw}: {w:?}");
        }
    }
}

#[test]
fn persistence_preserves_results() {
    let index = build("corpus.jsonl", IndexConfig::default());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corpus.fmly");
    index.save(&path).unwrap();
    let loaded = IndexSnapshot::load(&path).unwrap();
    for raw in REGRESSION {
        let Ok(q) = parse_query_for(raw, &index) else { continue };
        let before = ranking(&index, &q, &ExecuteOptions::default());
        let after = ranking(&loaded, &q, &ExecuteOptions::default());
        assert_eq!(before.len(), after.len());
        for (b, a) in before.iter().zip(&after) {
            assert_eq!(b.0, a.0);
            assert!((b.1 - a.1).abs() < 1e-9);
        }
    }
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() - 9]).unwrap();
    assert!(IndexSnapshot::load(&path).is_err());
}

#[test]
fn builds_are_byte_identical() {
    let a = build("corpus.jsonl", IndexConfig::default()).to_bytes();
    let b = build("corpus.jsonl", IndexConfig::default()).to_bytes();
    assert_eq!(a, b);
}

#[test]
fn corpus_build_summary() {
    let file = File::open(fixtures::path("corpus.jsonl")).unwrap();
    let (index, summary) = index_corpus(BufReader::new(file), "corpus.jsonl", IndexConfig::default()).unwrap();
    assert_eq!(summary.docs, 40);
    assert_eq!(summary.warnings.len(), 1, "{:?}", summary.warnings);
    assert!(summary.warnings[0].contains("math[3]"), "{}", summary.warnings[0]);
    index.check_consistency().unwrap();

    let file = File::open(fixtures::path("broken.jsonl")).unwrap();
    let (_, summary) = index_corpus(BufReader::new(file), "broken.jsonl", IndexConfig::default()).unwrap();
    assert_eq!((summary.docs, summary.warnings.len()), (2, 1));

    let file = File::open(fixtures::path("empty.jsonl")).unwrap();
    assert!(matches!(
        index_corpus(BufReader::new(file), "empty.jsonl", IndexConfig::default()),
        Err(BuildError::NoDocuments { .. })
    ));
}

#[test]
fn placeholder_spans_point_at_placeholders() {
    let index = build("corpus.jsonl", IndexConfig::default());
    for doc in index.docs() {
        let chars: Vec<char> = doc.extracted_text.chars().collect();
        let mut spans: Vec<_> = doc.formulae.iter().map(|f| f.span).collect();
        spans.dedup();
        for (n, span) in spans.iter().enumerate() {
            let covered: String = chars[span.start..span.end].iter().collect();
            assert_eq!(covered, placeholder(n), "{}", doc.id);
        }
    }
    for (key, list) in index.terms() {
        for posting in &list.postings {
            if let Positions::Spans(spans) = &posting.positions {
                let doc = index.doc(posting.doc).unwrap();
                for span in spans {
                    assert!(doc.formulae.iter().any(|f| f.span == *span), "{key:?}");
                }
            }
        }
    }
}

#[test]
fn snippet_spans_are_matches() {
    let index = build("corpus.jsonl", IndexConfig::default());
    for raw in REGRESSION {
        let Ok(q) = parse_query_for(raw, &index) else { continue };
        for hit in execute(&q, &index, &ExecuteOptions::default()).hits {
            let chars: Vec<char> = hit.snippet.text.chars().collect();
            for span in &hit.snippet.spans {
                assert!(span.start < span.end && span.end <= chars.len(), "{raw}");
                let covered: String = chars[span.start..span.end].iter().collect();
                match span.kind {
                    formulary_core::query::HighlightKind::MathMatch => assert!(covered.starts_with("⟦f#")),
                    formulary_core::query::HighlightKind::TextMatch => {
                        assert!(q.clauses.iter().any(|c| matches!(c,
                            formulary_core::query::Clause::Text { term } if *term == covered.to_lowercase())))
                    }
                }
            }
        }
    }
}

#[test]
fn warnings_do_not_block_search() {
    let index = build("corpus.jsonl", IndexConfig::default());
    let q = query(&index, "$\\foo$ cubic polynomial");
    assert_eq!(q.warnings.len(), 1);
    assert!(execute(&q, &index, &ExecuteOptions::default()).total > 0);
}

#[test]
fn suggestions_from_corpus() {
    let index = build("corpus.jsonl", IndexConfig::default());
    let s = suggest(&index, "diff", 3);
    assert_eq!(s[0], "differential");
    assert!(s.contains(&"differential equations".to_string()));
    assert!(suggest(&index, "zzz", 3).is_empty());
    assert_eq!(suggest(&index, "diff", 1).len(), 1);
}
