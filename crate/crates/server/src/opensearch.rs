use std::sync::Arc;

use axum::extract::State;
use axum::http::header;
use axum::response::IntoResponse;

use crate::AppState;

pub const CONTENT_TYPE: &str = "application/opensearchdescription+xml";

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn document(base_url: &str) -> String {
    let base = escape(base_url.trim_end_matches('/'));
    format!(
        r#"<?xml version="1.0" encoding="UTF-8"?>
<OpenSearchDescription xmlns="http://a9.com/-/spec/opensearch/1.1/">
  <ShortName>Formulary</ShortName>
  <Description>Search mathematical documents by words and formulae (TeX or MathML).</Description>
  <InputEncoding>UTF-8</InputEncoding>
  <OutputEncoding>UTF-8</OutputEncoding>
  <Url type="text/html" template="{base}/search?q={{searchTerms}}&amp;page={{startPage?}}"/>
  <Url type="application/json" template="{base}/api/search?q={{searchTerms}}&amp;page={{startPage?}}"/>
</OpenSearchDescription>
"#
    )
}

pub async fn description(State(state): State<Arc<AppState>>) -> impl IntoResponse {
    (
        [(header::CONTENT_TYPE, CONTENT_TYPE)],
        document(&state.config().base_url),
    )
}
