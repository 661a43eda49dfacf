use formulary_core::canon::{canonicalize, generate_report, CanonicalizationConfig, ReportEntry, Rule};
use formulary_core::content::derive_content;
use formulary_core::ingest;
use formulary_core::latex;
use formulary_core::mathml::{self, serialize_mathml, serialize_pretty, Formula};
use formulary_core::tokenizer::{tokenize_formula, WeightConfig};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use crate::{serialize_to_py, ParseError};

#[pyclass(name = "Formula", module = "formulary", frozen, eq, hash, from_py_object)]
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PyFormula {
    pub(crate) inner: Formula,
}

impl From<Formula> for PyFormula {
    fn from(inner: Formula) -> Self {
        PyFormula { inner }
    }
}

fn canon_config(rules: Option<Vec<String>>) -> PyResult<CanonicalizationConfig> {
    match rules {
        None => Ok(CanonicalizationConfig::default()),
        Some(codes) => {
            let rules = codes
                .iter()
                .map(|c| c.parse::<Rule>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(PyValueError::new_err)?;
            Ok(CanonicalizationConfig::only(rules))
        }
    }
}

fn weight_config(
    level_factor: f64,
    var_unification_factor: f64,
    const_unification_factor: f64,
) -> PyResult<WeightConfig> {
    let cfg = WeightConfig {
        level_factor,
        var_unification_factor,
        const_unification_factor,
    };
    cfg.validate().map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(cfg)
}

#[pymethods]
impl PyFormula {
    /// Compact MathML serialization.
    #[getter]
    fn mathml(&self) -> String {
        serialize_mathml(&self.inner)
    }

    /// "presentation", "content" or "mixed".
    #[getter]
    fn encoding(&self) -> &'static str {
        self.inner.encoding.as_str()
    }

    fn pretty(&self) -> String {
        serialize_pretty(&self.inner.root)
    }

    /// Canonical form; `rules` restricts to codes such as ["R1", "R3"].
    #[pyo3(signature = (rules=None))]
    fn canonicalize(&self, rules: Option<Vec<String>>) -> PyResult<PyFormula> {
        Ok(canonicalize(&self.inner, &canon_config(rules)?).into())
    }

    /// Weighted subformula terms as (token, weight, depth, variant).
    #[pyo3(signature = (level_factor=0.7, var_unification_factor=0.8, const_unification_factor=0.8))]
    fn tokens(
        &self,
        level_factor: f64,
        var_unification_factor: f64,
        const_unification_factor: f64,
    ) -> PyResult<Vec<(String, f64, usize, String)>> {
        let cfg = weight_config(level_factor, var_unification_factor, const_unification_factor)?;
        Ok(tokenize_formula(&self.inner, &cfg)
            .into_iter()
            .map(|t| {
                let variant = serde_json::to_value(t.variant)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default();
                (t.token, t.weight, t.depth, variant)
            })
            .collect())
    }

    /// Content MathML derived from presentation markup, or None when the
    /// notation is not covered.
    fn content(&self) -> Option<PyFormula> {
        derive_content(&self.inner).ok().map(Into::into)
    }

    /// (presentation, content) halves of a semantics pair.
    fn split(&self) -> (Option<PyFormula>, Option<PyFormula>) {
        let (p, c) = self.inner.split_encodings();
        (p.map(Into::into), c.map(Into::into))
    }

    fn __str__(&self) -> String {
        self.mathml()
    }

    fn __repr__(&self) -> String {
        format!("Formula({:?})", self.mathml())
    }
}

#[pyfunction]
fn parse_mathml(xml: &str) -> PyResult<PyFormula> {
    mathml::parse_mathml(xml)
        .map(Into::into)
        .map_err(|e| ParseError::new_err(format!("invalid MathML at byte {}: {}", e.position, e.message)))
}

#[pyfunction]
fn parse_latex(tex: &str) -> PyResult<PyFormula> {
    latex::parse_latex(tex)
        .map(Into::into)
        .map_err(|e| ParseError::new_err(format!("invalid TeX at {}: {}", e.position, e.message)))
}

#[pyfunction(name = "canonicalize")]
#[pyo3(signature = (formula, rules=None))]
fn canonicalize_fn(formula: &PyFormula, rules: Option<Vec<String>>) -> PyResult<PyFormula> {
    formula.canonicalize(rules)
}

#[pyfunction]
#[pyo3(signature = (formula, level_factor=0.7, var_unification_factor=0.8, const_unification_factor=0.8))]
fn tokenize(
    formula: &PyFormula,
    level_factor: f64,
    var_unification_factor: f64,
    const_unification_factor: f64,
) -> PyResult<Vec<(String, f64, usize, String)>> {
    formula.tokens(level_factor, var_unification_factor, const_unification_factor)
}

/// HTML page from (label, before, after) triples.
#[pyfunction]
fn normalization_report(entries: Vec<(String, PyFormula, PyFormula)>) -> PyResult<String> {
    let entries: Vec<ReportEntry> = entries
        .into_iter()
        .map(|(label, before, after)| ReportEntry {
            label,
            before: before.inner,
            after: after.inner,
        })
        .collect();
    generate_report(&entries).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Text with placeholders, formulae with spans, and skipped-formula warnings.
#[pyfunction]
fn extract<'py>(py: Python<'py>, body: &str) -> PyResult<Bound<'py, PyAny>> {
    let extracted = ingest::extract(body).map_err(|e| ParseError::new_err(e.to_string()))?;
    let formulae: Vec<serde_json::Value> = extracted
        .formulae
        .iter()
        .map(|f| {
            serde_json::json!({
                "start": f.span.start,
                "end": f.span.end,
                "encoding": f.formula.encoding.as_str(),
                "mathml": serialize_mathml(&f.formula),
            })
        })
        .collect();
    let warnings: Vec<String> = extracted.warnings.iter().map(ToString::to_string).collect();
    serialize_to_py(
        py,
        &serde_json::json!({ "text": extracted.text, "formulae": formulae, "warnings": warnings }),
    )
}

pub(crate) fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(parse_mathml, m)?)?;
    m.add_function(wrap_pyfunction!(parse_latex, m)?)?;
    m.add_function(wrap_pyfunction!(canonicalize_fn, m)?)?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(normalization_report, m)?)?;
    m.add_function(wrap_pyfunction!(extract, m)?)?;
    Ok(())
}
