use std::fmt;

use crate::index::IndexConfig;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Parses a `key = value` file (`#` comments) over the defaults.
///
/// Keys: `level_factor`, `var_unification_factor`,
/// `const_unification_factor`, `math_weight`, `content_terms`,
/// `min_token_length`, `stopwords` (comma separated).
pub fn parse_config(text: &str) -> Result<IndexConfig, ConfigError> {
    let mut config = IndexConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| ConfigError { line: i + 1, message };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        let real = || -> Result<f64, ConfigError> {
            value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("{key}: expected a number, got {value:?}")))
        };
        match key {
            "level_factor" => config.weights.level_factor = real()?,
            "var_unification_factor" => config.weights.var_unification_factor = real()?,
            "const_unification_factor" => config.weights.const_unification_factor = real()?,
            "math_weight" => {
                config.math_weight = real()?;
                if config.math_weight < 0.0 {
                    return Err(err("math_weight must be non-negative".to_string()));
                }
            }
            "content_terms" => {
                config.content_terms = value
                    .parse()
                    .map_err(|_| err(format!("content_terms: expected true or false, got {value:?}")))?
            }
            "min_token_length" => {
                config.analyzer.min_token_len = value
                    .parse()
                    .map_err(|_| err(format!("min_token_length: expected an integer, got {value:?}")))?
            }
            "stopwords" => {
                config.analyzer.stopwords = value
                    .split(',')
                    .map(|w| w.trim().to_lowercase())
                    .filter(|w| !w.is_empty())
                    .collect()
            }
            other => return Err(err(format!("unknown key {other:?}"))),
        }
    }
    config.weights.validate().map_err(|e| ConfigError {
        line: 0,
        message: e.to_string(),
    })?;
    Ok(config)
}
