use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use formulary_core::index::{FacetField, IndexConfig, IndexSnapshot};
use formulary_core::ingest::{self, index_corpus, BuildError, BuildSummary};
use formulary_core::mathml::serialize_mathml;
use formulary_core::query::{self, parse_query_for, ExecuteOptions, MathMode, Query};
use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyString};
use serde_json::json;

use crate::{serialize_to_py, IndexError, QueryError};

/// An immutable searchable index.
#[pyclass(name = "Index", module = "formulary", frozen)]
pub struct PyIndex {
    inner: IndexSnapshot,
    summary: Option<BuildSummary>,
}

fn build_error(e: BuildError) -> PyErr {
    match e {
        BuildError::NoDocuments { warnings } => IndexError::new_err(format!(
            "no documents indexed ({} warnings): {}",
            warnings.len(),
            warnings.join("; ")
        )),
        other => IndexError::new_err(other.to_string()),
    }
}

fn config_from(text: Option<&str>) -> PyResult<IndexConfig> {
    match text {
        None => Ok(IndexConfig::default()),
        Some(text) => ingest::parse_config(text).map_err(|e| PyValueError::new_err(e.to_string())),
    }
}

impl PyIndex {
    fn query(&self, raw: &str, math_mode: &str, facets: Option<&Bound<'_, PyDict>>) -> PyResult<Query> {
        let mode: MathMode = math_mode.parse().map_err(PyValueError::new_err)?;
        let mut q = parse_query_for(raw, &self.inner)
            .map_err(|e| QueryError::new_err(("query has no usable text or math clauses", e.warnings().to_vec())))?;
        q.math_mode = mode;
        if let Some(facets) = facets {
            for (field, values) in facets.iter() {
                let field: String = field.extract()?;
                let field: FacetField = field
                    .parse()
                    .map_err(|e: formulary_core::index::IndexError| PyValueError::new_err(e.to_string()))?;
                let values: Vec<String> = if values.is_instance_of::<PyString>() {
                    vec![values.extract()?]
                } else {
                    values.extract()?
                };
                for value in values {
                    q = q.with_filter(field, value);
                }
            }
        }
        Ok(q)
    }
}

#[pymethods]
impl PyIndex {
    /// Indexes a JSON-lines corpus file; `config` is a key=value file.
    #[staticmethod]
    #[pyo3(signature = (corpus, config=None))]
    fn build(corpus: PathBuf, config: Option<PathBuf>) -> PyResult<PyIndex> {
        let config = match config {
            Some(path) => ingest::load_config(&path).map_err(build_error)?,
            None => IndexConfig::default(),
        };
        let file = File::open(&corpus).map_err(|e| IndexError::new_err(format!("{}: {e}", corpus.display())))?;
        let (inner, summary) =
            index_corpus(BufReader::new(file), &corpus.display().to_string(), config).map_err(build_error)?;
        Ok(PyIndex {
            inner,
            summary: Some(summary),
        })
    }

    /// Indexes JSON-lines text; `config` is key=value text.
    #[staticmethod]
    #[pyo3(signature = (text, config=None))]
    fn from_jsonl(text: &str, config: Option<&str>) -> PyResult<PyIndex> {
        let (inner, summary) = index_corpus(text.as_bytes(), "<string>", config_from(config)?).map_err(build_error)?;
        Ok(PyIndex {
            inner,
            summary: Some(summary),
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<PyIndex> {
        let inner = IndexSnapshot::load(&path).map_err(|e| IndexError::new_err(format!("{}: {e}", path.display())))?;
        Ok(PyIndex { inner, summary: None })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner
            .save(&path)
            .map_err(|e| IndexError::new_err(format!("{}: {e}", path.display())))
    }

    /// Build warnings; empty for a loaded index.
    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.summary.as_ref().map(|s| s.warnings.clone()).unwrap_or_default()
    }

    #[getter]
    fn term_count(&self) -> usize {
        self.inner.term_count()
    }

    #[getter]
    fn math_term_count(&self) -> usize {
        self.inner.math_term_count()
    }

    fn ids(&self) -> Vec<String> {
        self.inner.docs().iter().map(|d| d.id.clone()).collect()
    }

    /// Same shape as the HTTP search response.
    #[allow(clippy::too_many_arguments)]
    #[pyo3(signature = (query, page=1, size=10, math_mode="both", facets=None, math_weight=None))]
    fn search<'py>(
        &self,
        py: Python<'py>,
        query: &str,
        page: usize,
        size: usize,
        math_mode: &str,
        facets: Option<&Bound<'py, PyDict>>,
        math_weight: Option<f64>,
    ) -> PyResult<Bound<'py, PyAny>> {
        if page == 0 || size == 0 {
            return Err(PyValueError::new_err("page and size must be at least 1"));
        }
        let q = self.query(query, math_mode, facets)?;
        let opts = ExecuteOptions {
            page,
            page_size: size,
            math_weight,
            ..ExecuteOptions::default()
        };
        let results = query::execute(&q, &self.inner, &opts);
        let facet_counts: serde_json::Map<String, serde_json::Value> = results
            .facet_counts
            .iter()
            .map(|(field, counts)| {
                let counts = counts.iter().map(|(v, c)| json!({"value": v, "count": c})).collect();
                (field.as_str().to_string(), serde_json::Value::Array(counts))
            })
            .collect();
        serialize_to_py(
            py,
            &json!({
                "total": results.total,
                "page": page,
                "size": size,
                "mathmode": q.math_mode,
                "hits": results.hits,
                "facets": facet_counts,
                "warnings": q.warnings,
            }),
        )
    }

    /// Score breakdown of one document; its `total` equals the search score.
    #[pyo3(signature = (query, doc, math_mode="both", facets=None, math_weight=None))]
    fn explain<'py>(
        &self,
        py: Python<'py>,
        query: &str,
        doc: &str,
        math_mode: &str,
        facets: Option<&Bound<'py, PyDict>>,
        math_weight: Option<f64>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let q = self.query(query, math_mode, facets)?;
        let opts = ExecuteOptions {
            math_weight,
            ..ExecuteOptions::default()
        };
        match query::explain(&q, &self.inner, doc, &opts) {
            Ok(e) => serialize_to_py(py, &e),
            Err(query::ExplainError::UnknownDocument(id)) => Err(PyKeyError::new_err(id)),
            Err(e) => Err(QueryError::new_err((e.to_string(), q.warnings.clone()))),
        }
    }

    #[pyo3(signature = (prefix, k=8))]
    fn suggest(&self, prefix: &str, k: usize) -> Vec<String> {
        query::suggest(&self.inner, prefix, k)
    }

    /// Stored metadata, extracted text and formulae; None for unknown ids.
    fn document<'py>(&self, py: Python<'py>, id: &str) -> PyResult<Option<Bound<'py, PyAny>>> {
        let Some(doc) = self.inner.lookup(id).and_then(|d| self.inner.doc(d)) else {
            return Ok(None);
        };
        let formulae: Vec<serde_json::Value> = doc
            .formulae
            .iter()
            .map(|f| {
                json!({
                    "start": f.span.start,
                    "end": f.span.end,
                    "encoding": f.formula.encoding.as_str(),
                    "mathml": serialize_mathml(&f.formula),
                })
            })
            .collect();
        let value = json!({
            "id": doc.id,
            "title": doc.title,
            "authors": doc.authors,
            "language": doc.language,
            "year": doc.year,
            "extracted_text": doc.extracted_text,
            "formulae": formulae,
        });
        serialize_to_py(py, &value).map(Some)
    }

    fn __len__(&self) -> usize {
        self.inner.doc_count()
    }

    fn __contains__(&self, id: &str) -> bool {
        self.inner.lookup(id).is_some()
    }

    fn __repr__(&self) -> String {
        format!(
            "Index(docs={}, terms={}, math_terms={})",
            self.inner.doc_count(),
            self.inner.term_count(),
            self.inner.math_term_count()
        )
    }
}
