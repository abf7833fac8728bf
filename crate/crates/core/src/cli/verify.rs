//! Pass/fail checks against a written report.

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

use super::config::Kind;
use super::report::{num_value, Report};

pub const WALK_WEYL_MAX: f64 = 0.05;
pub const WALK_DISCREPANCY_MAX: f64 = 0.02;
pub const BLOCK_DEVIATION_MAX: f64 = 0.02;
pub const NORMALITY_DISCREPANCY_MAX: f64 = 0.03;
pub const STATE_DEVIATION_MAX: f64 = 0.01;
pub const CHARACTER_DEVIATION_MAX: f64 = 0.03;
pub const ROTATION_CONTROL_MIN: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub criterion: String,
    pub passed: bool,
    pub detail: String,
}

impl CriterionResult {
    fn new(criterion: &str, passed: bool, detail: impl Into<String>) -> Self {
        CriterionResult {
            criterion: criterion.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Runs the checks of `suite`, which is `acceptance` (the checks for the
/// report's own kind) or a kind name that must match the report.
pub fn verify(report: &Report, suite: &str) -> Result<Vec<CriterionResult>> {
    if suite != "acceptance" {
        let kind = Kind::from_name(suite).ok_or_else(|| Error::Schema(format!("unknown suite {suite:?}")))?;
        if kind != report.kind {
            return Err(Error::Schema(format!("suite {suite} does not apply to a {} report", report.kind)));
        }
    }
    let checks = match report.kind {
        Kind::WalkSim => walk(report),
        Kind::RotationCase => rotation(report),
        Kind::Normality => normality(report),
        Kind::RationalCase => rational(report),
        Kind::Fourier => fourier(report),
        Kind::StationarySupport => flags(report, &["invariant", "stationary_measure", "residual_zero"]),
        Kind::ConditionCheck => condition(report),
    };
    Ok(checks)
}

fn number(v: Option<&Value>) -> Option<f64> {
    v.and_then(num_value)
}

fn flag(report: &Report, key: &str) -> Option<bool> {
    report.exact.get(key).and_then(Value::as_bool)
}

fn missing(criterion: &str, what: &str) -> CriterionResult {
    CriterionResult::new(criterion, false, format!("report has no {what}"))
}

/// Characters whose `|S_N(k)|` exceeds `bound`.
fn weyl_offenders(run: &Value, bound: f64) -> Option<Vec<String>> {
    let entries = run.get("weyl")?.as_array()?;
    let mut bad = Vec::new();
    for e in entries {
        let abs = number(e.get("abs"))?;
        if abs > bound {
            bad.push(format!("k={} ({abs:.4})", e.get("k")?));
        }
    }
    Some(bad)
}

fn weyl_check(criterion: &str, runs: &[&Value], bound: f64) -> CriterionResult {
    let mut bad = Vec::new();
    for (i, run) in runs.iter().enumerate() {
        match weyl_offenders(run, bound) {
            Some(v) => bad.extend(v.into_iter().map(|s| format!("run {i}: {s}"))),
            None => return missing(criterion, "Weyl sums"),
        }
    }
    if bad.is_empty() {
        CriterionResult::new(criterion, true, format!("all |S_N(k)| <= {bound}"))
    } else {
        CriterionResult::new(criterion, false, format!("exceeds {bound}: {}", bad.join(", ")))
    }
}

fn discrepancy_check(criterion: &str, runs: &[&Value], bound: f64) -> Option<CriterionResult> {
    let values: Vec<f64> = runs.iter().filter_map(|r| number(r.get("star_discrepancy"))).collect();
    if values.is_empty() {
        return None;
    }
    let worst = values.iter().copied().fold(0.0, f64::max);
    Some(CriterionResult::new(
        criterion,
        worst <= bound,
        format!("max D* = {worst:.5}, bound {bound}"),
    ))
}

fn runs(report: &Report) -> Vec<&Value> {
    report
        .numeric
        .get("runs")
        .and_then(Value::as_array)
        .map(|a| a.iter().collect())
        .unwrap_or_default()
}

fn walk(report: &Report) -> Vec<CriterionResult> {
    let runs = runs(report);
    if runs.is_empty() {
        return vec![missing("weyl", "runs")];
    }
    let mut out = vec![weyl_check("weyl", &runs, WALK_WEYL_MAX)];
    out.extend(discrepancy_check("discrepancy", &runs, WALK_DISCREPANCY_MAX));
    out
}

fn rotation(report: &Report) -> Vec<CriterionResult> {
    let runs = runs(report);
    if runs.is_empty() {
        return vec![missing("weyl", "runs")];
    }
    if flag(report, "offsets_rational") == Some(true) {
        let values: Option<Vec<f64>> = runs
            .iter()
            .map(|r| number(r.get("control").and_then(|c| c.get("abs"))))
            .collect();
        return match values {
            Some(v) => {
                let worst = v.iter().copied().fold(f64::INFINITY, f64::min);
                vec![CriterionResult::new(
                    "rational-control",
                    worst >= ROTATION_CONTROL_MIN,
                    format!("min |S_N(q e1)| = {worst:.4}, bound {ROTATION_CONTROL_MIN}"),
                )]
            }
            None => vec![missing("rational-control", "control sums")],
        };
    }
    vec![weyl_check("weyl", &runs, WALK_WEYL_MAX)]
}

fn normality(report: &Report) -> Vec<CriterionResult> {
    let Some(orbit) = report.numeric.get("orbit") else {
        return vec![missing("blocks", "orbit statistics")];
    };
    let mut out = Vec::new();
    match number(orbit.get("max_block_deviation")) {
        Some(dev) => out.push(CriterionResult::new(
            "blocks",
            dev <= BLOCK_DEVIATION_MAX,
            format!("max block deviation {dev:.5}, bound {BLOCK_DEVIATION_MAX}"),
        )),
        None => out.push(weyl_check("weyl", &[orbit], WALK_WEYL_MAX)),
    }
    out.extend(discrepancy_check("discrepancy", &[orbit], NORMALITY_DISCREPANCY_MAX));
    out
}

fn rational(report: &Report) -> Vec<CriterionResult> {
    let mut out = Vec::new();
    match number(report.numeric.get("max_state_deviation")) {
        Some(dev) => out.push(CriterionResult::new(
            "states",
            dev <= STATE_DEVIATION_MAX,
            format!("max state deviation {dev:.5}, bound {STATE_DEVIATION_MAX}"),
        )),
        None => out.push(missing("states", "state frequencies")),
    }
    if flag(report, "limit_law_available") == Some(true) {
        let chars = report.numeric.get("characters").and_then(Value::as_array);
        let bad: Option<Vec<String>> = chars.map(|c| {
            c.iter()
                .filter(|e| number(e.get("deviation")).is_none_or(|d| d > CHARACTER_DEVIATION_MAX))
                .map(|e| format!("k={}", e.get("k").cloned().unwrap_or(Value::Null)))
                .collect()
        });
        out.push(match bad {
            Some(b) if b.is_empty() => CriterionResult::new(
                "characters",
                true,
                format!("all deviations <= {CHARACTER_DEVIATION_MAX}"),
            ),
            Some(b) => CriterionResult::new(
                "characters",
                false,
                format!("exceeds {CHARACTER_DEVIATION_MAX}: {}", b.join(", ")),
            ),
            None => missing("characters", "character comparison"),
        });
    }
    out
}

fn fourier(report: &Report) -> Vec<CriterionResult> {
    let mut out = Vec::new();
    if let Some(z) = report.exact.get("zero_checks") {
        let failures = z.get("failures").and_then(Value::as_array).map_or(1, Vec::len);
        out.push(CriterionResult::new(
            "exact-zeros",
            failures == 0,
            format!("{} checked, {failures} failures", z.get("checked").cloned().unwrap_or(Value::Null)),
        ));
    }
    if let Some(r) = report.exact.get("routing_failures").and_then(Value::as_array) {
        out.push(CriterionResult::new(
            "routing",
            r.is_empty(),
            format!("{} indices without a vanishing factor", r.len()),
        ));
    }
    out.push(match flag(report, "is_haar") {
        Some(h) => CriterionResult::new("haar", h, format!("Haar up to {}: {h}", report.exact["haar_range"])),
        None => missing("haar", "Haar verdict"),
    });
    out
}

fn flags(report: &Report, keys: &[&str]) -> Vec<CriterionResult> {
    keys.iter()
        .map(|k| match flag(report, k) {
            Some(v) => CriterionResult::new(k, v, format!("{k} = {v}")),
            None => missing(k, k),
        })
        .collect()
}

fn condition(report: &Report) -> Vec<CriterionResult> {
    let mut out = Vec::new();
    let dense = flag(report, "dense");
    match report.exact.get("witness_verified") {
        Some(Value::Bool(v)) => out.push(CriterionResult::new("witness", *v, format!("witness annihilates the set: {v}"))),
        _ => out.push(CriterionResult::new(
            "witness",
            dense == Some(true),
            "no witness, set reported dense",
        )),
    }
    if let Some(expected) = report.exact.get("expected_dense").and_then(Value::as_bool) {
        out.push(CriterionResult::new(
            "verdict",
            dense == Some(expected),
            format!("dense = {dense:?}, expected {expected}"),
        ));
    }
    out
}
