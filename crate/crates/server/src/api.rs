use std::collections::BTreeMap;
use std::fmt::Write;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, RawQuery, State};
use axum::response::Html;
use axum::Json;
use formulary_core::canon::{canonicalize, CanonicalizationConfig};
use formulary_core::content::derive_content;
use formulary_core::index::{FacetField, IndexSnapshot};
use formulary_core::latex::parse_latex;
use formulary_core::mathml::{parse_mathml, serialize_node, Element, Encoding, Formula};
use formulary_core::query::{
    self, parse_query_for, ExecuteOptions, ExplainError, MathMode, Query, ScoreExplanation, SearchHit,
};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::AppState;

pub const MAX_PAGE_SIZE: usize = 100;
const DEFAULT_PAGE_SIZE: usize = 10;
const DEFAULT_SUGGESTIONS: usize = 8;

struct Params(Vec<(String, String)>);

impl Params {
    fn parse(raw: Option<String>) -> Self {
        let raw = raw.unwrap_or_default();
        Params(url::form_urlencoded::parse(raw.as_bytes()).into_owned().collect())
    }

    fn get(&self, name: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }

    fn required(&self, name: &str) -> Result<&str, ApiError> {
        self.get(name).ok_or_else(|| ApiError::missing(name))
    }

    fn number(&self, name: &str, default: usize, max: usize) -> Result<usize, ApiError> {
        match self.get(name) {
            None => Ok(default),
            Some(v) => v
                .trim()
                .parse::<usize>()
                .ok()
                .filter(|n| (1..=max).contains(n))
                .ok_or_else(|| ApiError::invalid(format!("{name} must be an integer in 1..={max}, got {v:?}"))),
        }
    }

    fn math_mode(&self) -> Result<MathMode, ApiError> {
        self.get("mathmode")
            .map_or(Ok(MathMode::Both), |v| v.parse().map_err(ApiError::invalid))
    }

    fn facet_filters(&self) -> Result<Vec<(FacetField, String)>, ApiError> {
        self.0
            .iter()
            .filter_map(|(k, v)| k.strip_prefix("facet.").map(|field| (field, v)))
            .map(|(field, v)| {
                let field = field
                    .parse::<FacetField>()
                    .map_err(|e| ApiError::invalid(e.to_string()))?;
                Ok((field, v.clone()))
            })
            .collect()
    }

    fn query(&self, index: &IndexSnapshot) -> Result<Query, ApiError> {
        let raw = self.required("q")?;
        let mut q = parse_query_for(raw, index).map_err(|e| ApiError::no_clauses(e.warnings().to_vec()))?;
        q.math_mode = self.math_mode()?;
        for (field, value) in self.facet_filters()? {
            q = q.with_filter(field, value);
        }
        Ok(q)
    }
}

#[derive(Debug, Serialize)]
pub struct FacetCount {
    pub value: String,
    pub count: usize,
}

#[derive(Debug, Serialize)]
pub struct SearchResponse {
    pub total: usize,
    pub page: usize,
    pub size: usize,
    pub mathmode: MathMode,
    pub hits: Vec<SearchHit>,
    pub facets: BTreeMap<FacetField, Vec<FacetCount>>,
    pub warnings: Vec<String>,
}

fn run_search(state: &AppState, params: &Params) -> Result<SearchResponse, ApiError> {
    let index = state.snapshot();
    let page = params.number("page", 1, usize::MAX)?;
    let size = params.number("size", DEFAULT_PAGE_SIZE, MAX_PAGE_SIZE)?;
    let q = params.query(&index)?;
    let opts = ExecuteOptions {
        page,
        page_size: size,
        ..ExecuteOptions::default()
    };
    let results = query::execute(&q, &index, &opts);
    Ok(SearchResponse {
        total: results.total,
        page,
        size,
        mathmode: q.math_mode,
        hits: results.hits,
        facets: results
            .facet_counts
            .into_iter()
            .map(|(field, counts)| {
                let counts = counts
                    .into_iter()
                    .map(|(value, count)| FacetCount { value, count })
                    .collect();
                (field, counts)
            })
            .collect(),
        warnings: q.warnings,
    })
}

pub async fn search(
    State(state): State<Arc<AppState>>,
    RawQuery(raw): RawQuery,
) -> Result<Json<SearchResponse>, ApiError> {
    run_search(&state, &Params::parse(raw)).map(Json)
}

#[derive(Debug, Serialize)]
pub struct SuggestResponse {
    pub prefix: String,
    pub suggestions: Vec<String>,
}

pub async fn suggest(
    State(state): State<Arc<AppState>>,
    RawQuery(raw): RawQuery,
) -> Result<Json<SuggestResponse>, ApiError> {
    let params = Params::parse(raw);
    let prefix = params.required("prefix")?;
    if prefix.trim().is_empty() {
        return Err(ApiError::invalid("prefix must not be empty"));
    }
    let k = params.number("k", DEFAULT_SUGGESTIONS, MAX_PAGE_SIZE)?;
    Ok(Json(SuggestResponse {
        prefix: prefix.to_string(),
        suggestions: query::suggest(&state.snapshot(), prefix, k),
    }))
}

#[derive(Debug, Deserialize)]
struct PreviewRequest {
    latex: Option<String>,
    mathml: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct PreviewResponse {
    pub mathml: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub content_mathml: Option<String>,
    pub warnings: Vec<String>,
}

fn as_math(node: &formulary_core::mathml::MathNode) -> String {
    if node.is(Element::Math) {
        serialize_node(node)
    } else {
        format!("<math>{}</math>", serialize_node(node))
    }
}

fn preview_formula(formula: Formula) -> PreviewResponse {
    let canon = CanonicalizationConfig::default();
    let canonical = canonicalize(&formula, &canon);
    let (presentation, content) = match canonical.encoding {
        Encoding::Mixed => canonical.split_encodings(),
        Encoding::Content => (None, Some(canonical)),
        Encoding::Presentation => (Some(canonical), None),
    };
    let content = content.or_else(|| {
        presentation
            .as_ref()
            .and_then(|p| derive_content(p).ok())
            .map(|c| canonicalize(&c, &canon))
    });
    PreviewResponse {
        mathml: presentation.map(|p| as_math(&p.root)).unwrap_or_default(),
        content_mathml: content.map(|c| as_math(&c.root)),
        warnings: Vec::new(),
    }
}

fn failed_preview(warning: String) -> PreviewResponse {
    PreviewResponse {
        mathml: String::new(),
        content_mathml: None,
        warnings: vec![warning],
    }
}

pub async fn preview(body: Bytes) -> Result<Json<PreviewResponse>, ApiError> {
    let request: PreviewRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::invalid_body(format!("expected a JSON object: {e}")))?;
    let response = match (request.latex, request.mathml) {
        (Some(tex), None) => match parse_latex(&tex) {
            Ok(f) => preview_formula(f),
            Err(e) => failed_preview(format!("invalid TeX at {}: {}", e.position, e.message)),
        },
        (None, Some(xml)) => match parse_mathml(&xml) {
            Ok(f) => preview_formula(f),
            Err(e) => failed_preview(format!("invalid MathML at byte {}: {}", e.position, e.message)),
        },
        _ => {
            return Err(ApiError::invalid_body(
                "exactly one of \"latex\" or \"mathml\" is required",
            ))
        }
    };
    Ok(Json(response))
}

#[derive(Debug, Serialize)]
pub struct ExplainResponse {
    #[serde(flatten)]
    pub explanation: ScoreExplanation,
    pub warnings: Vec<String>,
}

pub async fn explain(
    State(state): State<Arc<AppState>>,
    RawQuery(raw): RawQuery,
) -> Result<Json<ExplainResponse>, ApiError> {
    let params = Params::parse(raw);
    let index = state.snapshot();
    let id = params.required("doc")?;
    if index.lookup(id).is_none() {
        return Err(ApiError::not_found(format!("unknown document {id:?}")));
    }
    let q = params.query(&index)?;
    match query::explain(&q, &index, id, &ExecuteOptions::default()) {
        Ok(explanation) => Ok(Json(ExplainResponse {
            explanation,
            warnings: q.warnings,
        })),
        Err(ExplainError::NotAMatch(id)) => Err(ApiError::not_a_match(&id)),
        Err(ExplainError::UnknownDocument(id)) => Err(ApiError::not_found(format!("unknown document {id:?}"))),
    }
}

#[derive(Debug, Serialize)]
pub struct DocFormula {
    pub start: usize,
    pub end: usize,
    pub encoding: Encoding,
    pub mathml: String,
}

#[derive(Debug, Serialize)]
pub struct DocResponse {
    pub id: String,
    pub title: String,
    pub authors: Vec<String>,
    pub language: String,
    pub year: i32,
    pub body: String,
    pub extracted_text: String,
    pub formulae: Vec<DocFormula>,
}

pub async fn document(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<DocResponse>, ApiError> {
    let index = state.snapshot();
    let doc = index
        .lookup(&id)
        .and_then(|d| index.doc(d))
        .ok_or_else(|| ApiError::not_found(format!("unknown document {id:?}")))?;
    Ok(Json(DocResponse {
        id: doc.id.clone(),
        title: doc.title.clone(),
        authors: doc.authors.clone(),
        language: doc.language.clone(),
        year: doc.year,
        body: doc.body.clone(),
        extracted_text: doc.extracted_text.clone(),
        formulae: doc
            .formulae
            .iter()
            .map(|f| DocFormula {
                start: f.span.start,
                end: f.span.end,
                encoding: f.formula.encoding,
                mathml: as_math(&f.formula.root),
            })
            .collect(),
    }))
}

fn escape_html(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Plain HTML result list for the OpenSearch `text/html` template when no
/// UI is installed.
pub async fn search_page(State(state): State<Arc<AppState>>, RawQuery(raw): RawQuery) -> Html<String> {
    let params = Params::parse(raw);
    let q = params.get("q").unwrap_or("");
    let mut html = String::from(
        "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>Formulary search</title></head><body>\n",
    );
    let _ = writeln!(
        html,
        "<form action=\"/search\"><input name=\"q\" value=\"{}\" size=\"60\"><button>Search</button></form>",
        escape_html(q)
    );
    if !q.is_empty() {
        match run_search(&state, &params) {
            Ok(response) => {
                for w in &response.warnings {
                    let _ = writeln!(html, "<p class=\"warning\">{}</p>", escape_html(w));
                }
                let _ = writeln!(html, "<p>{} results</p>\n<ol>", response.total);
                for hit in &response.hits {
                    let _ = writeln!(
                        html,
                        "<li><a href=\"/api/doc/{}\">{}</a> <small>{:.4}</small><br>{}</li>",
                        url::form_urlencoded::byte_serialize(hit.id.as_bytes()).collect::<String>(),
                        escape_html(&hit.title),
                        hit.score,
                        escape_html(&hit.snippet.text)
                    );
                }
                html.push_str("</ol>\n");
            }
            Err(e) => {
                let _ = writeln!(html, "<p class=\"error\">{}</p>", escape_html(&e.message));
            }
        }
    }
    html.push_str("</body></html>\n");
    Html(html)
}
