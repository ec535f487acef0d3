//! Scenario file ingestion.
//!
//! A scenario is a JSON object carrying the eleven model parameters by
//! their exact lowercase names, an optional `prices` block (`p1`, `p2`,
//! `p3`), and optional `label` / `notes` metadata. Parsing walks the JSON
//! explicitly so errors name the offending field and unknown fields are
//! caught: rejected under `--strict`, reported as warnings otherwise.

use std::path::Path;

use sha2::{Digest, Sha256};
use trimarket::{MarketParams, PriceVector};

// ============================================================================
// Errors
// ============================================================================

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("scenario {path} is not valid JSON: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("scenario root must be a JSON object")]
    NotAnObject,
    #[error("scenario field {0:?} is missing")]
    MissingField(String),
    #[error("scenario field {0:?} must be {1}")]
    TypeError(String, &'static str),
    #[error("unknown scenario field {0:?} (strict mode)")]
    UnknownField(String),
}

// ============================================================================
// Scenario type
// ============================================================================

#[derive(Debug, Clone)]
pub struct ScenarioFile {
    pub params: MarketParams,
    /// Prices stored with the scenario, used by commands that evaluate at
    /// explicit prices when no price flags are given.
    pub prices: Option<PriceVector>,
    pub label: Option<String>,
    pub notes: Option<String>,
    /// SHA-256 of the raw file bytes, carried into output metadata.
    pub sha256: String,
    /// Non-fatal observations: unknown fields (without `--strict`) and
    /// parameter values outside the model's domain.
    pub warnings: Vec<String>,
}

const PARAM_FIELDS: [&str; 11] = [
    "alpha", "theta", "beta", "m", "t", "x", "mu1", "mu2", "c1", "c2", "c3",
];
const PRICE_FIELDS: [&str; 3] = ["p1", "p2", "p3"];

/// Reads and validates a scenario file.
pub fn parse_scenario(path: &Path, strict: bool) -> Result<ScenarioFile, ScenarioError> {
    let bytes = std::fs::read(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let sha256 = hex(&Sha256::digest(&bytes));
    let value: serde_json::Value =
        serde_json::from_slice(&bytes).map_err(|source| ScenarioError::Json {
            path: path.display().to_string(),
            source,
        })?;
    let root = value.as_object().ok_or(ScenarioError::NotAnObject)?;

    let mut warnings = Vec::new();

    let number = |obj: &serde_json::Map<String, serde_json::Value>,
                  field: &str,
                  qualified: &str|
     -> Result<f64, ScenarioError> {
        match obj.get(field) {
            None => Err(ScenarioError::MissingField(qualified.to_string())),
            Some(v) => v
                .as_f64()
                .ok_or_else(|| ScenarioError::TypeError(qualified.to_string(), "a number")),
        }
    };

    let mut fields = [0.0f64; 11];
    for (slot, name) in fields.iter_mut().zip(PARAM_FIELDS) {
        *slot = number(root, name, name)?;
    }
    let [alpha, theta, beta, m, t, x, mu1, mu2, c1, c2, c3] = fields;
    let params = MarketParams {
        alpha,
        theta,
        beta,
        m,
        t,
        x,
        mu1,
        mu2,
        c1,
        c2,
        c3,
    };

    let prices = match root.get("prices") {
        None => None,
        Some(serde_json::Value::Object(block)) => {
            let p1 = number(block, "p1", "prices.p1")?;
            let p2 = number(block, "p2", "prices.p2")?;
            let p3 = number(block, "p3", "prices.p3")?;
            for key in block.keys() {
                if !PRICE_FIELDS.contains(&key.as_str()) {
                    let name = format!("prices.{key}");
                    if strict {
                        return Err(ScenarioError::UnknownField(name));
                    }
                    warnings.push(format!("ignoring unknown field {name:?}"));
                }
            }
            Some(PriceVector::new(p1, p2, p3))
        }
        Some(_) => {
            return Err(ScenarioError::TypeError(
                "prices".into(),
                "an object with p1, p2, p3",
            ))
        }
    };

    let text = |field: &str| -> Result<Option<String>, ScenarioError> {
        match root.get(field) {
            None => Ok(None),
            Some(serde_json::Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(ScenarioError::TypeError(field.to_string(), "a string")),
        }
    };
    let label = text("label")?;
    let notes = text("notes")?;

    for key in root.keys() {
        let known = PARAM_FIELDS.contains(&key.as_str())
            || key == "prices"
            || key == "label"
            || key == "notes";
        if !known {
            if strict {
                return Err(ScenarioError::UnknownField(key.clone()));
            }
            warnings.push(format!("ignoring unknown field {key:?}"));
        }
    }

    // Model-domain violations are reported, never fatal: evaluation fails
    // later with a precise numerical error if a denominator degenerates.
    for violation in params.range_violations() {
        warnings.push(format!("parameter outside the model domain: {violation}"));
    }
    if let Some(p) = &prices {
        for violation in p.range_violations() {
            warnings.push(format!("stored price outside the domain: {violation}"));
        }
    }

    Ok(ScenarioFile {
        params,
        prices,
        label,
        notes,
        sha256,
        warnings,
    })
}

/// Serializes a scenario in the same layout `parse_scenario` reads, with
/// full-precision numbers (write-then-parse returns identical values).
#[cfg(test)]
pub fn scenario_to_json(
    params: &MarketParams,
    prices: Option<&PriceVector>,
    label: Option<&str>,
    notes: Option<&str>,
) -> String {
    let mut root = serde_json::Map::new();
    if let Some(label) = label {
        root.insert("label".into(), label.into());
    }
    if let Some(notes) = notes {
        root.insert("notes".into(), notes.into());
    }
    let p = [
        params.alpha,
        params.theta,
        params.beta,
        params.m,
        params.t,
        params.x,
        params.mu1,
        params.mu2,
        params.c1,
        params.c2,
        params.c3,
    ];
    for (name, value) in PARAM_FIELDS.into_iter().zip(p) {
        root.insert(name.into(), value.into());
    }
    if let Some(pv) = prices {
        let mut block = serde_json::Map::new();
        for (name, value) in PRICE_FIELDS.into_iter().zip([pv.p1, pv.p2, pv.p3]) {
            block.insert(name.into(), value.into());
        }
        root.insert("prices".into(), block.into());
    }
    let mut text = serde_json::to_string_pretty(&serde_json::Value::Object(root)).unwrap();
    text.push('\n');
    text
}

fn hex(digest: &[u8]) -> String {
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

// ============================================================================
// Tests
// ============================================================================
