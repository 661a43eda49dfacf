//! Python module `formulary`: formula parsing, canonicalization,
//! tokenization and index build/search.

mod formula;
mod index;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyList, PyString};
use serde::Serialize;
use serde_json::Value;

pub use formula::PyFormula;
pub use index::PyIndex;

create_exception!(
    formulary,
    FormularyError,
    PyException,
    "Base class for formulary errors."
);
create_exception!(formulary, ParseError, FormularyError, "Unparseable MathML or TeX.");
create_exception!(
    formulary,
    QueryError,
    FormularyError,
    "A query with no usable clauses; args are (message, warnings)."
);
create_exception!(
    formulary,
    IndexError,
    FormularyError,
    "Index build, load or save failure."
);

pub(crate) fn to_py<'py>(py: Python<'py>, value: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match value {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => PyBool::new(py, *b).to_owned().into_any(),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.into_any()
            } else if let Some(u) = n.as_u64() {
                u.into_pyobject(py)?.into_any()
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any()
            }
        }
        Value::String(s) => PyString::new(py, s).into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, v) in map {
                dict.set_item(k, to_py(py, v)?)?;
            }
            dict.into_any()
        }
    })
}

/// Converts any serializable value to plain Python dicts and lists.
pub(crate) fn serialize_to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let value = serde_json::to_value(value).map_err(|e| FormularyError::new_err(e.to_string()))?;
    to_py(py, &value)
}

#[pymodule]
fn formulary(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("FormularyError", py.get_type::<FormularyError>())?;
    m.add("ParseError", py.get_type::<ParseError>())?;
    m.add("QueryError", py.get_type::<QueryError>())?;
    m.add("IndexError", py.get_type::<IndexError>())?;
    m.add_class::<PyFormula>()?;
    m.add_class::<PyIndex>()?;
    formula::register(m)?;
    Ok(())
}
