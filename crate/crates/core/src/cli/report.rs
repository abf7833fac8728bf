//! Report documents written by `run` and read back by `verify`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rng::{PRNG_NAME, PRNG_VERSION, STREAM_SPLIT};

use super::config::{ExperimentConfig, Kind, Precision};

pub const REPORT_SCHEMA: &str = "torwalk-report/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrngInfo {
    pub name: String,
    pub version: String,
    pub stream_split: String,
}

impl PrngInfo {
    pub fn current() -> Self {
        PrngInfo {
            name: PRNG_NAME.into(),
            version: PRNG_VERSION.into(),
            stream_split: STREAM_SPLIT.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionInfo {
    pub policy: Precision,
    /// Starting precision of the fixed-point engine, when it ran.
    pub bits: Option<u32>,
}

/// One experiment's results. `exact` holds rationals and verdicts as
/// strings and booleans; `numeric` holds `{value, error}` pairs of decimal
/// strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema: String,
    pub kind: Kind,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub seed: u64,
    pub prng: PrngInfo,
    pub precision: PrecisionInfo,
    pub exact: BTreeMap<String, Value>,
    pub numeric: BTreeMap<String, Value>,
    /// Suffixes of the CSV files written next to the report.
    pub sidecars: Vec<String>,
    pub timestamp: String,
}

impl Report {
    pub fn new(config: &ExperimentConfig) -> Self {
        Report {
            schema: REPORT_SCHEMA.into(),
            kind: config.kind,
            config: config.clone(),
            config_hash: config.hash(),
            seed: config.seed,
            prng: PrngInfo::current(),
            precision: PrecisionInfo {
                policy: config.precision,
                bits: None,
            },
            exact: BTreeMap::new(),
            numeric: BTreeMap::new(),
            sidecars: Vec::new(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The JSON document with the timestamp removed.
    pub fn body(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().expect("object").remove("timestamp");
        serde_json::to_string_pretty(&v).expect("value serializes")
    }

    /// Parses and checks the schema tag and the config hash.
    pub fn from_json(text: &str) -> Result<Self> {
        let report: Report = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        if report.schema != REPORT_SCHEMA {
            return Err(Error::Schema(format!("unknown schema {:?}", report.schema)));
        }
        if report.config_hash != report.config.hash() {
            return Err(Error::Schema("config hash does not match the embedded config".into()));
        }
        if report.kind != report.config.kind || report.seed != report.config.seed {
            return Err(Error::Schema("kind or seed disagrees with the embedded config".into()));
        }
        Ok(report)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Report::from_json(&std::fs::read_to_string(path)?)
    }
}

/// A numeric field: decimal value with its error bound.
pub fn num(value: f64, error: f64) -> Value {
    json!({ "value": format!("{value:e}"), "error": format!("{error:e}") })
}

/// Reads the value of a field written by [`num`].
pub fn num_value(v: &Value) -> Option<f64> {
    v.get("value")?.as_str()?.parse().ok()
}

/// A description of the config and report formats.
pub fn schema() -> Value {
    let kinds: Vec<&str> = Kind::ALL.iter().map(|k| k.name()).collect();
    json!({
        "config": {
            "format": "TOML",
            "fields": {
                "kind": { "type": "string", "enum": kinds },
                "seed": { "type": "u64", "default": 0 },
                "n": { "type": "usize", "default": 10000, "meaning": "steps, digits, or index range" },
                "k": { "type": "i64", "default": 8, "meaning": "characters 0 < |k| <= K" },
                "precision": { "type": "\"auto\" | u32", "default": "auto" },
                "irrationals": { "type": "[string]", "meaning": "square roots sqrtN, N square-free" },
                "system": {
                    "expansion": "[[i64]]: D of an IFS",
                    "exponents": "[u32]: r_i, default all 1",
                    "translations": "[[scalar]]: t_i",
                    "matrices": "[[[i64]]]: linear parts of walk maps",
                    "offsets": "[[scalar]]: offsets of walk maps",
                    "probabilities": "[rational]: default uniform",
                    "starts": "[[scalar]]: walk starting points, default 0",
                    "points": "[[scalar]]: finite set for condition-check",
                    "measure": "\"quarter-pair\" | \"self-similar\" (fourier)",
                    "levels": "u32: largest k in 4^k index checks (fourier, default 5)",
                    "m_range": "i64: |m| bound in index checks (fourier, default 20)",
                    "block_len": "usize: longest digit block (normality, default 2)",
                    "expect_dense": "bool: expected verdict (condition-check)"
                },
                "scalar grammar": "sums of terms q or q*sqrtN with q an integer or a/b, e.g. \"1/3 - 2/3*sqrt2\""
            }
        },
        "report": {
            "format": "JSON",
            "schema": REPORT_SCHEMA,
            "fields": ["schema", "kind", "config", "config_hash", "seed", "prng", "precision", "exact", "numeric", "sidecars", "timestamp"],
            "config_hash": "sha256 of the config's canonical JSON",
            "numeric values": { "value": "decimal string", "error": "decimal string" },
            "sidecars": "CSV files named <report stem>.<suffix>, with header rows"
        }
    })
}
