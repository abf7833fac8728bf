//! Experiment configuration files.
//!
//! ```toml
//! kind = "normality"
//! seed = 7
//! n = 10000
//! k = 8
//! precision = "auto"
//! irrationals = ["sqrt2"]
//!
//! [system]
//! expansion = [[3]]
//! translations = [["0"], ["2/3*sqrt2"]]
//! probabilities = ["1/2", "1/2"]
//! ```

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exact::{parse_rational, IntMatrix, IrrationalBasis, TorusPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    WalkSim,
    Normality,
    ConditionCheck,
    RationalCase,
    Fourier,
    StationarySupport,
    RotationCase,
}

impl Kind {
    pub const ALL: [Kind; 7] = [
        Kind::WalkSim,
        Kind::Normality,
        Kind::ConditionCheck,
        Kind::RationalCase,
        Kind::Fourier,
        Kind::StationarySupport,
        Kind::RotationCase,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::WalkSim => "walk-sim",
            Kind::Normality => "normality",
            Kind::ConditionCheck => "condition-check",
            Kind::RationalCase => "rational-case",
            Kind::Fourier => "fourier",
            Kind::StationarySupport => "stationary-support",
            Kind::RotationCase => "rotation-case",
        }
    }

    pub fn from_name(name: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `"auto"` or a fixed number of bits for the starting precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "PrecisionRepr", into = "PrecisionRepr")]
pub enum Precision {
    #[default]
    Auto,
    Bits(u32),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PrecisionRepr {
    Bits(u32),
    Text(String),
}

impl TryFrom<PrecisionRepr> for Precision {
    type Error = String;

    fn try_from(r: PrecisionRepr) -> std::result::Result<Self, String> {
        match r {
            PrecisionRepr::Bits(b) => Ok(Precision::Bits(b)),
            PrecisionRepr::Text(s) if s == "auto" => Ok(Precision::Auto),
            PrecisionRepr::Text(s) => Err(format!("precision must be \"auto\" or a bit count, got {s:?}")),
        }
    }
}

impl From<Precision> for PrecisionRepr {
    fn from(p: Precision) -> Self {
        match p {
            Precision::Auto => PrecisionRepr::Text("auto".into()),
            Precision::Bits(b) => PrecisionRepr::Bits(b),
        }
    }
}

/// System parameters; which fields are required depends on the kind.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// `D` of an iterated function system.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expansion: Option<Vec<Vec<i64>>>,
    /// `r_i`; all 1 when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translations: Option<Vec<Vec<String>>>,
    /// Linear parts of walk maps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<Vec<Vec<Vec<i64>>>>,
    /// Offsets of walk maps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offsets: Option<Vec<Vec<String>>>,
    /// Uniform when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probabilities: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub starts: Option<Vec<Vec<String>>>,
    /// A raw finite subset of the torus for condition checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<String>>>,
    /// `"quarter-pair"` (default) or `"self-similar"` for fourier runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_range: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_dense: Option<bool>,
}

fn default_n() -> usize {
    10_000
}

fn default_k() -> i64 {
    8
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(default)]
    pub seed: u64,
    /// Steps, digits or index range, depending on the kind.
    #[serde(default = "default_n")]
    pub n: usize,
    /// Character range `0 < |k| ≤ K`.
    #[serde(default = "default_k")]
    pub k: i64,
    #[serde(default)]
    pub precision: Precision,
    #[serde(default)]
    pub irrationals: Vec<String>,
    #[serde(default)]
    pub system: SystemConfig,
}

fn config_err(field: impl Into<String>, reason: impl fmt::Display) -> Error {
    Error::Config {
        field: field.into(),
        reason: reason.to_string(),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let field = e
                .span()
                .map(|s| {
                    let line = text[..s.start.min(text.len())].matches('\n').count() + 1;
                    format!("line {line}")
                })
                .unwrap_or_else(|| "<document>".into());
            config_err(field, e.message())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(path.display().to_string(), e))?;
        ExperimentConfig::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn basis(&self) -> Result<Arc<IrrationalBasis>> {
        IrrationalBasis::from_names(&self.irrationals).map_err(|e| config_err("irrationals", e))
    }

    /// Checks the fields each kind needs and resolves every scalar.
    pub fn validate(&self) -> Result<()> {
        let basis = self.basis()?;
        let s = &self.system;
        if self.n == 0 {
            return Err(config_err("n", "must be positive"));
        }
        if self.k <= 0 {
            return Err(config_err("k", "must be positive"));
        }
        if let Some(t) = &s.translations {
            points(&basis, t, "system.translations")?;
        }
        if let Some(o) = &s.offsets {
            points(&basis, o, "system.offsets")?;
        }
        if let Some(o) = &s.starts {
            points(&basis, o, "system.starts")?;
        }
        if let Some(o) = &s.points {
            points(&basis, o, "system.points")?;
        }
        if let Some(m) = &s.matrices {
            matrices(m, "system.matrices")?;
        }
        if let Some(e) = &s.expansion {
            matrix(e, "system.expansion")?;
        }
        let require = |present: bool, field: &str| {
            if present {
                Ok(())
            } else {
                Err(config_err(format!("system.{field}"), format!("required for {}", self.kind)))
            }
        };
        match self.kind {
            Kind::WalkSim | Kind::StationarySupport => {
                require(s.matrices.is_some(), "matrices")?;
                require(s.offsets.is_some(), "offsets")?;
            }
            Kind::Normality | Kind::RationalCase => {
                require(s.expansion.is_some(), "expansion")?;
                require(s.translations.is_some(), "translations")?;
            }
            Kind::RotationCase => require(s.offsets.is_some(), "offsets")?,
            Kind::ConditionCheck => {
                let ifs = s.expansion.is_some() && s.translations.is_some();
                let walk = s.matrices.is_some() && s.offsets.is_some();
                if !(s.points.is_some() || ifs || walk) {
                    return Err(config_err(
                        "system",
                        "condition-check needs points, expansion+translations, or matrices+offsets",
                    ));
                }
            }
            Kind::Fourier => match s.measure.as_deref() {
                None | Some("quarter-pair") => {}
                Some("self-similar") => {
                    require(s.expansion.is_some(), "expansion")?;
                    require(s.translations.is_some(), "translations")?;
                }
                Some(other) => return Err(config_err("system.measure", format!("unknown measure {other:?}"))),
            },
        }
        let count = s
            .translations
            .as_ref()
            .or(s.offsets.as_ref())
            .map(Vec::len);
        if let (Some(p), Some(k)) = (&s.probabilities, count) {
            if p.len() != k {
                return Err(config_err("system.probabilities", format!("expected {k} entries, found {}", p.len())));
            }
        }
        if let Some(p) = &s.probabilities {
            probabilities(Some(p), p.len())?;
        }
        Ok(())
    }
}

pub(crate) fn points(basis: &Arc<IrrationalBasis>, rows: &[Vec<String>], field: &str) -> Result<Vec<TorusPoint>> {
    if rows.is_empty() {
        return Err(config_err(field, "must not be empty"));
    }
    let dim = rows[0].len();
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            if row.len() != dim {
                return Err(config_err(format!("{field}[{i}]"), format!("expected {dim} coordinates")));
            }
            TorusPoint::parse(basis, row).map_err(|e| config_err(format!("{field}[{i}]"), e))
        })
        .collect()
}

pub(crate) fn matrix(rows: &[Vec<i64>], field: &str) -> Result<IntMatrix> {
    IntMatrix::new(rows.to_vec()).map_err(|e| config_err(field, e))
}

pub(crate) fn matrices(list: &[Vec<Vec<i64>>], field: &str) -> Result<Vec<IntMatrix>> {
    if list.is_empty() {
        return Err(config_err(field, "must not be empty"));
    }
    list.iter()
        .enumerate()
        .map(|(i, m)| matrix(m, &format!("{field}[{i}]")))
        .collect()
}

/// Parsed weights, uniform over `k` when absent.
pub(crate) fn probabilities(list: Option<&Vec<String>>, k: usize) -> Result<Vec<BigRational>> {
    match list {
        None => Ok(vec![BigRational::new(1.into(), (k as i64).into()); k]),
        Some(list) => {
            let p = list
                .iter()
                .enumerate()
                .map(|(i, s)| parse_rational(s).map_err(|e| config_err(format!("system.probabilities[{i}]"), e)))
                .collect::<Result<Vec<_>>>()?;
            let total: BigRational = p.iter().sum();
            if total != BigRational::new(1.into(), 1.into()) || p.iter().any(|x| *x <= BigRational::new(0.into(), 1.into())) {
                return Err(config_err("system.probabilities", "must be positive and sum to 1"));
            }
            Ok(p)
        }
    }
}
