//! Executes one experiment config.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::chains::{build_eta_chain, build_finite_stationary, rational_case, sample_decomposition, state_frequencies, stationarity_residual};
use crate::error::{Error, Result};
use crate::exact::{common_denominator, format_rational, IntMatrix, TorusPoint};
use crate::fractal::{
    ifs_point_fixed, precision_schedule, run_orbit, sample_letters, sample_word, tail_length_for, AffineEndo, AffineIFS,
    OrbitStart, Word,
};
use crate::groupcond::{annihilates, condition_ifs, condition_walk, ifs_difference_set, is_dense, walk_difference_set, DensityReport};
use crate::rng::stream;
use crate::spectral::{
    haar_route, is_haar_up_to, quarter_cantor, quarter_shift, reconstruct_index, write_coefficients_csv, CoefficientFn,
    Convolution, HaarFactor, IndexType, SelfSimilar,
};
use crate::stats::{
    block_frequencies, compare_to_fourier, guard_bits, max_weyl, star_discrepancy_1d, times_d_orbit, weyl_sum, weyl_sums,
    running_discrepancy, write_blocks_csv, write_discrepancy_csv, write_weyl_csv, OrbitSample, WeylEntry,
};

use super::config::{matrices, matrix, points, probabilities, ExperimentConfig, Kind, Precision};
use super::report::{num, Report};

/// Fewest guard bits a fixed precision may leave.
pub const MIN_GUARD_BITS: u32 = 40;

/// Tolerance for truncated Fourier products.
const FOURIER_TOL: f64 = 1e-12;

/// A report plus CSV sidecars `(suffix, bytes)`.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub sidecars: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    fn sidecar(&mut self, suffix: String, data: Vec<u8>) {
        self.report.sidecars.push(suffix.clone());
        self.sidecars.push((suffix, data));
    }
}

pub fn run(config: &ExperimentConfig) -> Result<Outcome> {
    config.validate()?;
    let mut out = Outcome {
        report: Report::new(config),
        sidecars: Vec::new(),
    };
    match config.kind {
        Kind::WalkSim => walk(config, &mut out, false)?,
        Kind::RotationCase => walk(config, &mut out, true)?,
        Kind::Normality => normality(config, &mut out)?,
        Kind::ConditionCheck => condition(config, &mut out)?,
        Kind::RationalCase => rational(config, &mut out)?,
        Kind::Fourier => fourier(config, &mut out)?,
        Kind::StationarySupport => stationary(config, &mut out)?,
    }
    Ok(out)
}

/// Guard bits and starting precision for an orbit whose steps consume
/// `consumed` bits in total.
pub fn resolve_precision(policy: Precision, consumed: u32, n: usize) -> Result<(u32, u32)> {
    match policy {
        Precision::Auto => {
            let guard = guard_bits(n);
            Ok((guard, consumed + guard))
        }
        Precision::Bits(bits) => {
            let needed = consumed + MIN_GUARD_BITS;
            if bits < needed {
                return Err(Error::PrecisionExceeded(format!(
                    "configured {bits} bits, the orbit needs at least {needed}"
                )));
            }
            Ok((bits - consumed, bits))
        }
    }
}

fn weyl_json(entries: &[WeylEntry], error: f64) -> Value {
    Value::Array(
        entries
            .iter()
            .map(|e| json!({ "k": e.k, "abs": num(e.abs, error) }))
            .collect(),
    )
}

/// `|S_N(k)|` moves by at most `2π‖k‖_1·ε` when each point moves by `ε`.
fn weyl_error(sample: &OrbitSample, k: i64) -> f64 {
    2.0 * std::f64::consts::PI * (k * sample.dim() as i64) as f64 * sample.max_error() + 1e-12
}

fn sample_stats(sample: &OrbitSample, k: i64) -> Result<Value> {
    let weyl = weyl_sums(sample, k)?;
    let err = weyl_error(sample, k);
    let discrepancy = if sample.dim() == 1 {
        num(star_discrepancy_1d(sample)?, sample.max_error())
    } else {
        Value::Null
    };
    Ok(json!({
        "points": sample.len(),
        "max_point_error": num(sample.max_error(), 0.0),
        "weyl": weyl_json(&weyl, err),
        "max_weyl": num(max_weyl(&weyl), err),
        "star_discrepancy": discrepancy,
    }))
}

fn orbit_sample(maps: &[AffineEndo], start: &TorusPoint, word: &Word, guard: u32) -> Result<(OrbitSample, u32)> {
    let d = start.dim();
    let mut coords = Vec::with_capacity(word.len() * d);
    let mut errors = Vec::with_capacity(word.len());
    let summary = run_orbit(maps, OrbitStart::Exact(start), word, guard, |step| {
        coords.extend(step.point.to_f64().into_iter().map(|v| if v >= 1.0 { 0.0 } else { v }));
        errors.push(step.point.error() + f64::EPSILON);
        Ok(())
    })?;
    Ok((
        OrbitSample::new(d, coords, errors, summary.initial_precision)?,
        summary.initial_precision,
    ))
}

/// Running star discrepancy at `n = 10, 20, 50, 100, ...` for 1-d samples.
fn discrepancy_sidecar(sample: &OrbitSample) -> Result<Option<Vec<u8>>> {
    if sample.dim() != 1 {
        return Ok(None);
    }
    let mut checkpoints = Vec::new();
    let mut scale = 10;
    while scale <= sample.len() {
        checkpoints.extend([scale, 2 * scale, 5 * scale].into_iter().filter(|&c| c <= sample.len()));
        scale *= 10;
    }
    checkpoints.push(sample.len());
    checkpoints.dedup();
    let rows = running_discrepancy(sample, &checkpoints)?;
    csv_bytes(|b| write_discrepancy_csv(&rows, b)).map(Some)
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn point_strings(points: &[TorusPoint]) -> Value {
    json!(points.iter().map(TorusPoint::to_strings).collect::<Vec<_>>())
}

fn density_json(report: &DensityReport, verified: Option<bool>) -> Value {
    let mut v = serde_json::to_value(report).expect("serializable");
    v["witness_verified"] = json!(verified);
    v
}

fn walk(config: &ExperimentConfig, out: &mut Outcome, rotation: bool) -> Result<()> {
    let basis = config.basis()?;
    let s = &config.system;
    let offsets = points(&basis, s.offsets.as_ref().expect("validated"), "system.offsets")?;
    let dim = offsets[0].dim();
    let linear = match &s.matrices {
        Some(m) => matrices(m, "system.matrices")?,
        None => vec![IntMatrix::identity(dim); offsets.len()],
    };
    if linear.len() != offsets.len() {
        return Err(Error::Config {
            field: "system.matrices".into(),
            reason: format!("{} matrices for {} offsets", linear.len(), offsets.len()),
        });
    }
    let maps = linear
        .iter()
        .zip(&offsets)
        .map(|(m, o)| AffineEndo::new(m.clone(), o.clone()))
        .collect::<Result<Vec<_>>>()?;
    let probs = probabilities(s.probabilities.as_ref(), maps.len())?;
    let starts = match &s.starts {
        Some(p) => points(&basis, p, "system.starts")?,
        None => vec![TorusPoint::zero(&basis, dim)],
    };

    if rotation {
        let verdict = is_dense(&offsets)?;
        let verified = verdict.witness.as_ref().map(|w| annihilates(w, &offsets)).transpose()?;
        out.report.exact.insert("condition".into(), density_json(&DensityReport::new(&verdict, &offsets), verified));
    } else if let Ok(verdict) = condition_walk(&linear, &offsets) {
        let set = walk_difference_set(&linear, &offsets)?;
        let verified = verdict.witness.as_ref().map(|w| annihilates(w, &set)).transpose()?;
        out.report.exact.insert("condition".into(), density_json(&DensityReport::new(&verdict, &set), verified));
    }
    out.report.exact.insert("starts".into(), point_strings(&starts));

    let mut runs = Vec::new();
    let mut top_bits = 0;
    for (i, start) in starts.iter().enumerate() {
        let mut rng = stream(config.seed, i as u64);
        let word = sample_letters(&probs, &mut rng, config.n);
        let consumed = precision_schedule(&maps, &word, 0)[0];
        let (guard, bits) = resolve_precision(config.precision, consumed, config.n)?;
        let (sample, initial) = orbit_sample(&maps, start, &word, guard)?;
        debug_assert_eq!(initial, bits);
        top_bits = top_bits.max(initial);
        let mut stats = sample_stats(&sample, config.k)?;
        stats["initial_precision"] = json!(initial);
        if rotation {
            if let Some(q) = rational_denominator(&offsets) {
                let mut k = vec![0i64; dim];
                k[0] = q;
                let control = weyl_sum(&sample, &k)?.norm();
                stats["control"] = json!({ "q": q, "abs": num(control, weyl_error(&sample, q)) });
            }
        }
        let weyl = weyl_sums(&sample, config.k)?;
        out.sidecar(format!("weyl-{i}.csv"), csv_bytes(|b| write_weyl_csv(&weyl, b))?);
        if let Some(data) = discrepancy_sidecar(&sample)? {
            out.sidecar(format!("discrepancy-{i}.csv"), data);
        }
        runs.push(stats);
    }
    out.report.precision.bits = Some(top_bits);
    if rotation {
        out.report.exact.insert("offsets_rational".into(), json!(rational_denominator(&offsets).is_some()));
    }
    out.report.numeric.insert("runs".into(), Value::Array(runs));
    Ok(())
}

fn rational_denominator(points: &[TorusPoint]) -> Option<i64> {
    let mut values = Vec::new();
    for p in points {
        for c in p.lift() {
            values.push(c.as_rational()?.clone());
        }
    }
    common_denominator(&values).to_i64()
}

fn ifs_from(config: &ExperimentConfig) -> Result<(AffineIFS, IntMatrix, Vec<u32>, Vec<TorusPoint>)> {
    let basis = config.basis()?;
    let s = &config.system;
    let d = matrix(s.expansion.as_ref().expect("validated"), "system.expansion")?;
    let t = points(&basis, s.translations.as_ref().expect("validated"), "system.translations")?;
    let r = s.exponents.clone().unwrap_or_else(|| vec![1; t.len()]);
    let p = probabilities(s.probabilities.as_ref(), t.len())?;
    let ifs = AffineIFS::new(d.clone(), r.clone(), t.clone(), p)?;
    Ok((ifs, d, r, t))
}

/// A `μ_K`-random point and its orbit under `D`.
fn ifs_orbit(config: &ExperimentConfig, ifs: &AffineIFS, d: &IntMatrix, out: &mut Outcome) -> Result<crate::stats::OrbitRun> {
    let consumed = (config.n as f64 * d.inf_norm().max(1.0).log2()).ceil() as u32;
    let (guard, bits) = resolve_precision(config.precision, consumed, config.n)?;
    // a few spare bits absorb rounding in the engine's own schedule
    let prec = bits + 8;
    let mut rng = stream(config.seed, 0);
    let word = sample_word(ifs, &mut rng, tail_length_for(ifs, prec));
    let x = ifs_point_fixed(ifs, &word, prec)?;
    let run = times_d_orbit(OrbitStart::Fixed(x), d, config.n, guard)?;
    out.report.precision.bits = Some(run.initial_precision);
    out.report.exact.insert("word_length".into(), json!(word.len()));
    Ok(run)
}

fn normality(config: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let (ifs, d, r, t) = ifs_from(config)?;
    let verdict = condition_ifs(&d, &r, &t)?;
    let set = ifs_difference_set(&d, &r, &t)?;
    let verified = verdict.witness.as_ref().map(|w| annihilates(w, &set)).transpose()?;
    out.report.exact.insert("condition".into(), density_json(&DensityReport::new(&verdict, &set), verified));
    let run = ifs_orbit(config, &ifs, &d, out)?;
    let mut stats = sample_stats(&run.sample, config.k)?;
    let weyl = weyl_sums(&run.sample, config.k)?;
    out.sidecar("weyl.csv".into(), csv_bytes(|b| write_weyl_csv(&weyl, b))?);
    if let Some(data) = discrepancy_sidecar(&run.sample)? {
        out.sidecar("discrepancy.csv".into(), data);
    }
    let base = d.get(0, 0).to_u32().filter(|&b| d.dim() == 1 && b >= 2);
    if let Some(base) = base {
        let len = config.system.block_len.unwrap_or(2);
        let blocks = block_frequencies(&run.digits, base, len)?;
        let entries: Vec<Value> = blocks
            .blocks
            .iter()
            .flat_map(|(l, v)| {
                v.iter().map(move |b| {
                    json!({ "len": l, "block": b.block, "count": b.count, "freq": num(b.freq, 0.0), "deviation": num(b.deviation, 0.0) })
                })
            })
            .collect();
        stats["blocks"] = Value::Array(entries);
        stats["max_block_deviation"] = num(blocks.max_deviation(), 0.0);
        out.sidecar("blocks.csv".into(), csv_bytes(|b| write_blocks_csv(&blocks, b))?);
    }
    out.report.numeric.insert("orbit".into(), stats);
    Ok(())
}

fn condition(config: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let basis = config.basis()?;
    let s = &config.system;
    let (verdict, set) = if let Some(p) = &s.points {
        let set = points(&basis, p, "system.points")?;
        (is_dense(&set)?, set)
    } else if let (Some(e), Some(t)) = (&s.expansion, &s.translations) {
        let d = matrix(e, "system.expansion")?;
        let t = points(&basis, t, "system.translations")?;
        let r = s.exponents.clone().unwrap_or_else(|| vec![1; t.len()]);
        (condition_ifs(&d, &r, &t)?, ifs_difference_set(&d, &r, &t)?)
    } else {
        let m = matrices(s.matrices.as_ref().expect("validated"), "system.matrices")?;
        let o = points(&basis, s.offsets.as_ref().expect("validated"), "system.offsets")?;
        (condition_walk(&m, &o)?, walk_difference_set(&m, &o)?)
    };
    let verified = verdict.witness.as_ref().map(|w| annihilates(w, &set)).transpose()?;
    let report = DensityReport::new(&verdict, &set);
    out.report.exact.insert("dense".into(), json!(report.dense));
    out.report.exact.insert("witness".into(), json!(report.witness));
    out.report.exact.insert("witness_verified".into(), json!(verified));
    out.report.exact.insert("difference_set".into(), json!(report.difference_set));
    out.report.exact.insert("expected_dense".into(), json!(s.expect_dense));
    Ok(())
}

fn rational(config: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let (ifs, d, r, t) = ifs_from(config)?;
    if d.dim() != 1 || r.iter().any(|&x| x != 1) {
        return Err(Error::Config {
            field: "system".into(),
            reason: "rational-case needs a 1x1 expansion and unit exponents".into(),
        });
    }
    let dd = d.get(0, 0).to_i64().ok_or_else(|| Error::InvalidArgument("D too large".into()))?;
    let ts: Vec<_> = t.iter().map(|p| p.lift()[0].clone()).collect();
    let chain = build_eta_chain(dd, &ts, ifs.probabilities())?;
    out.report.exact.insert("chain".into(), serde_json::to_value(chain.report()).expect("serializable"));
    out.report.exact.insert("aperiodicity_witness".into(), json!(format_rational(&chain.aperiodicity_witness())));

    let mut rng = stream(config.seed, 0);
    let path = chain.simulate(&mut rng, config.n);
    let freqs = state_frequencies(&path, chain.states().len());
    let deviations: Vec<f64> = freqs
        .iter()
        .zip(chain.stationary())
        .map(|(f, p)| (f - crate::exact::rational_to_f64(p)).abs())
        .collect();
    let max_dev = deviations.iter().copied().fold(0.0, f64::max);
    out.report.numeric.insert(
        "state_frequencies".into(),
        Value::Array(freqs.iter().map(|f| num(*f, 0.0)).collect()),
    );
    out.report.numeric.insert("max_state_deviation".into(), num(max_dev, 0.0));

    if ts[0].is_rational() {
        let case = rational_case(&ifs, FOURIER_TOL)?;
        out.report.exact.insert("limit_law_available".into(), json!(true));
        out.report.exact.insert(
            "alpha_cycle".into(),
            json!(case.alpha_cycle.iter().map(format_rational).collect::<Vec<_>>()),
        );
        let mut rng = stream(config.seed, 1);
        let points = sample_decomposition(&ifs, &case.chain, &mut rng, config.n, 64)?;
        let n = points.len();
        let sample = OrbitSample::new(1, points, vec![1e-12; n], 53)?;
        let cmp = compare_to_fourier(&sample, &case.law, config.k)?;
        let chars: Vec<Value> = cmp
            .per_k
            .iter()
            .map(|(k, dev)| {
                let c = case.law.coefficient(*k);
                json!({
                    "k": k,
                    "predicted_re": num(c.value.re, c.error),
                    "predicted_im": num(c.value.im, c.error),
                    "exact_zero": c.exact_zero,
                    "deviation": num(*dev, c.error + 1e-12),
                })
            })
            .collect();
        out.report.numeric.insert("characters".into(), Value::Array(chars));
        out.report.numeric.insert("max_character_deviation".into(), num(cmp.max_deviation, 1e-12));
        out.sidecar(
            "limit-law.csv".into(),
            csv_bytes(|b| write_coefficients_csv(&case.law, -config.k..=config.k, b))?,
        );
    } else {
        out.report.exact.insert("limit_law_available".into(), json!(false));
        let run = ifs_orbit(config, &ifs, &d, out)?;
        out.report.numeric.insert("orbit".into(), sample_stats(&run.sample, config.k)?);
    }
    Ok(())
}

fn fourier(config: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let s = &config.system;
    let range = config.n as i64;
    if s.measure.as_deref() == Some("self-similar") {
        let d = matrix(s.expansion.as_ref().expect("validated"), "system.expansion")?;
        let basis = config.basis()?;
        let t = points(&basis, s.translations.as_ref().expect("validated"), "system.translations")?;
        let atoms = t
            .iter()
            .map(|p| match (p.dim(), p.lift()[0].as_rational()) {
                (1, Some(q)) => Ok(q.clone()),
                _ => Err(Error::Config {
                    field: "system.translations".into(),
                    reason: "self-similar spectra need rational 1-d atoms".into(),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        let dd = d.get(0, 0).to_i64().filter(|_| d.dim() == 1).ok_or_else(|| Error::Config {
            field: "system.expansion".into(),
            reason: "must be a 1x1 matrix".into(),
        })?;
        let p = probabilities(s.probabilities.as_ref(), atoms.len())?;
        let mu = SelfSimilar::new(dd, atoms, p, FOURIER_TOL)?;
        out.report.exact.insert("is_haar".into(), json!(is_haar_up_to(&mu, range)));
        out.report.exact.insert("haar_range".into(), json!(range));
        out.report.numeric.insert("coefficients".into(), coefficient_table(&mu, config.k));
        out.sidecar("coefficients.csv".into(), csv_bytes(|b| write_coefficients_csv(&mu, -config.k..=config.k, b))?);
        return Ok(());
    }
    let levels = s.levels.unwrap_or(5);
    let m_range = s.m_range.unwrap_or(20);
    let mu0 = quarter_cantor(FOURIER_TOL)?;
    let nu = quarter_shift(FOURIER_TOL)?;
    let mut checked = 0u64;
    let mut failures = Vec::new();
    for k in 0..=levels {
        for m in -m_range..=m_range {
            let odd = reconstruct_index(k, IndexType::Odd, m);
            let twice = reconstruct_index(k, IndexType::TwiceOdd, m);
            checked += 2;
            if !mu0.coefficient(odd).exact_zero {
                failures.push(json!({ "measure": "quarter_cantor", "n": odd }));
            }
            if !nu.coefficient(twice).exact_zero {
                failures.push(json!({ "measure": "quarter_shift", "n": twice }));
            }
        }
    }
    let mut routing_failures = Vec::new();
    for w in (1..=range).flat_map(|w| [w, -w]) {
        let (which, s) = haar_route(w)?;
        let factor = match which {
            HaarFactor::QuarterCantor => mu0.factor(w, s),
            HaarFactor::QuarterShift => nu.factor(w, s),
        };
        if !factor.exact_zero {
            routing_failures.push(w);
        }
    }
    let conv = Convolution::new(vec![std::sync::Arc::new(nu), std::sync::Arc::new(mu0)]);
    out.report.exact.insert("zero_checks".into(), json!({ "checked": checked, "failures": failures }));
    out.report.exact.insert("haar_range".into(), json!(range));
    out.report.exact.insert("is_haar".into(), json!(is_haar_up_to(&conv, range)));
    out.report.exact.insert("routing_failures".into(), json!(routing_failures));
    out.report.numeric.insert("coefficients".into(), coefficient_table(&conv, config.k));
    out.sidecar("coefficients.csv".into(), csv_bytes(|b| write_coefficients_csv(&conv, -config.k..=config.k, b))?);
    Ok(())
}

fn coefficient_table(f: &dyn CoefficientFn, k: i64) -> Value {
    Value::Array(
        (-k..=k)
            .map(|n| {
                let c = f.coefficient(n);
                json!({ "n": n, "re": num(c.value.re, c.error), "im": num(c.value.im, c.error), "exact_zero": c.exact_zero })
            })
            .collect(),
    )
}

fn stationary(config: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let basis = config.basis()?;
    let s = &config.system;
    let linear = matrices(s.matrices.as_ref().expect("validated"), "system.matrices")?;
    let offsets = points(&basis, s.offsets.as_ref().expect("validated"), "system.offsets")?;
    if linear.len() != offsets.len() || linear.iter().any(|m| m.dim() != 1) || offsets[0].dim() != 1 {
        return Err(Error::Config {
            field: "system".into(),
            reason: "stationary-support needs matching 1x1 matrices and 1-d offsets".into(),
        });
    }
    let d = linear
        .iter()
        .map(|m| m.get(0, 0).to_i64().ok_or_else(|| Error::InvalidArgument("entry too large".into())))
        .collect::<Result<Vec<_>>>()?;
    let alpha: Vec<_> = offsets.iter().map(|p| p.lift()[0].clone()).collect();
    let probs = probabilities(s.probabilities.as_ref(), d.len())?;
    let fs = build_finite_stationary(&d, &alpha, &probs)?;
    let residual_zero = stationarity_residual(fs.stationary(), fs.transition()).iter().all(BigRational::is_zero);
    out.report.exact.insert("support".into(), serde_json::to_value(fs.report()).expect("serializable"));
    out.report.exact.insert("invariant".into(), json!(fs.check_invariance()?));
    out.report.exact.insert("stationary_measure".into(), json!(fs.is_stationary_measure()?));
    out.report.exact.insert("residual_zero".into(), json!(residual_zero));
    out.report.exact.insert("q".into(), json!(BigInt::from(fs.q()).to_string()));
    Ok(())
}
