use std::collections::BTreeMap;
use std::fmt::Write;

use formulary_core::index::FacetField;
use formulary_core::query::{execute, explain, parse_query_for, ExecuteOptions, ScoreExplanation, SearchResults};
use serde_json::{json, Value};

use crate::{load_index, Failure, SearchArgs};

fn facet_filter(spec: &str) -> Result<(FacetField, String), Failure> {
    let (field, value) = spec
        .split_once('=')
        .ok_or_else(|| Failure::usage(format!("--facet expects FIELD=VALUE, got {spec:?}")))?;
    let field = field
        .trim()
        .parse::<FacetField>()
        .map_err(|e| Failure::usage(e.to_string()))?;
    Ok((field, value.to_string()))
}

pub fn run(args: SearchArgs) -> Result<(), Failure> {
    let filters = args
        .facets
        .iter()
        .map(|f| facet_filter(f))
        .collect::<Result<Vec<_>, _>>()?;
    let index = load_index(&args.index)?;
    let mut query = match parse_query_for(&args.query, &index) {
        Ok(q) => q,
        Err(e) => {
            for w in e.warnings() {
                eprintln!("warning: {w}");
            }
            return Err(Failure::data("query has no usable text or math clauses"));
        }
    };
    query.math_mode = args.math_mode;
    for (field, value) in filters {
        query = query.with_filter(field, value);
    }
    let opts = ExecuteOptions {
        page: args.page as usize,
        page_size: args.size as usize,
        math_weight: args.math_weight,
        ..ExecuteOptions::default()
    };
    let results = execute(&query, &index, &opts);
    let explanations: Vec<ScoreExplanation> = if args.explain {
        results
            .hits
            .iter()
            .map(|hit| explain(&query, &index, &hit.id, &opts).map_err(|e| Failure::data(e.to_string())))
            .collect::<Result<_, _>>()?
    } else {
        Vec::new()
    };

    if args.json {
        let mut out = json!({
            "total": results.total,
            "page": args.page,
            "size": args.size,
            "mathmode": query.math_mode,
            "hits": results.hits,
            "facets": facets_json(&results),
            "warnings": query.warnings,
        });
        if args.explain {
            out["explanations"] = json!(explanations);
        }
        println!("{}", serde_json::to_string_pretty(&out).expect("results serialize"));
    } else {
        for w in &query.warnings {
            eprintln!("warning: {w}");
        }
        print!(
            "{}",
            render_text(&results, &explanations, args.page as usize, args.size as usize)
        );
    }
    Ok(())
}

fn facets_json(results: &SearchResults) -> Value {
    let map: BTreeMap<&str, Vec<Value>> = results
        .facet_counts
        .iter()
        .map(|(field, counts)| {
            let counts = counts.iter().map(|(v, c)| json!({"value": v, "count": c})).collect();
            (field.as_str(), counts)
        })
        .collect();
    json!(map)
}

fn render_text(results: &SearchResults, explanations: &[ScoreExplanation], page: usize, size: usize) -> String {
    let mut out = String::new();
    let first = (page - 1).saturating_mul(size);
    let _ = writeln!(
        out,
        "{} hits; showing {}-{}",
        results.total,
        (first + 1).min(results.total),
        first + results.hits.len()
    );
    for (i, hit) in results.hits.iter().enumerate() {
        let _ = writeln!(out, "\n{:>3}. {}  score={:.6}", first + i + 1, hit.id, hit.score);
        let _ = writeln!(
            out,
            "     {} ({}; {}; {})",
            hit.title,
            hit.authors.join(", "),
            hit.language,
            hit.year
        );
        if !hit.snippet.text.is_empty() {
            let _ = writeln!(out, "     {}", hit.snippet.text);
        }
        if let Some(e) = explanations.get(i) {
            let _ = writeln!(out, "     total {:.6} (math weight {})", e.total, e.math_weight);
            for clause in &e.clauses {
                let _ = writeln!(out, "       {:.6}  {}", clause.contribution, clause.label);
                for leaf in &clause.leaves {
                    let _ = writeln!(
                        out,
                        "         {:.6}  {}:{}  tf={:.4} idf={:.4} weight={:.4}",
                        leaf.contribution,
                        leaf.field.as_str(),
                        leaf.term,
                        leaf.tf,
                        leaf.idf,
                        leaf.weight
                    );
                }
            }
        }
    }
    let mut facets = String::new();
    for (field, counts) in &results.facet_counts {
        if counts.is_empty() {
            continue;
        }
        let shown: Vec<String> = counts.iter().take(8).map(|(v, c)| format!("{v} ({c})")).collect();
        let _ = writeln!(facets, "  {}: {}", field.as_str(), shown.join(", "));
    }
    if !facets.is_empty() {
        let _ = write!(out, "\nfacets:\n{facets}");
    }
    out
}
