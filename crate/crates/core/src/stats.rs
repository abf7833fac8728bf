//! Equidistribution diagnostics for numeric orbit samples.
//!
//! Sums over samples use pairwise summation in index order, so results are
//! reproducible independently of how partial sums are scheduled.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{frac_rational, IntMatrix, Scalar, TorusPoint};
use crate::fractal::{linear_map, run_orbit, FixedPoint, OrbitStart, Word};
use crate::spectral::CoefficientFn;

/// Largest per-point error a sample may carry.
pub const MAX_POINT_ERROR: f64 = 1.0 / 4_294_967_296.0;

/// `C` in `|S_N(k)| ≤ C·|k|·D*_N`: the real and imaginary parts of
/// `e^{2πikx}` each have variation `4|k|` on `[0, 1]`.
pub const KOKSMA_CONSTANT: f64 = 8.0;

/// Numeric torus points with a recorded error bound per point.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSample {
    dim: usize,
    coords: Vec<f64>,
    errors: Vec<f64>,
    precision_bits: u32,
}

impl OrbitSample {
    /// `coords` holds `dim` coordinates per point.
    pub fn new(dim: usize, coords: Vec<f64>, errors: Vec<f64>, precision_bits: u32) -> Result<Self> {
        if dim == 0 || coords.len() % dim != 0 || coords.len() / dim != errors.len() {
            return Err(Error::InvalidArgument("sample shape does not match its dimension".into()));
        }
        if let Some(x) = coords.iter().find(|x| !(0.0..1.0).contains(*x)) {
            return Err(Error::InvalidArgument(format!("coordinate {x} outside [0, 1)")));
        }
        if let Some(e) = errors.iter().find(|e| !(**e < MAX_POINT_ERROR)) {
            return Err(Error::PrecisionExceeded(format!("point error {e:e} is not below 2^-32")));
        }
        Ok(OrbitSample {
            dim,
            coords,
            errors,
            precision_bits,
        })
    }

    /// One-dimensional points that are exact as `f64` values.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        let n = points.len();
        OrbitSample::new(1, points, vec![0.0; n], 53)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.errors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn errors(&self) -> &[f64] {
        &self.errors
    }

    pub fn max_error(&self) -> f64 {
        self.errors.iter().copied().fold(0.0, f64::max)
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    /// Points `i, i + step, i + 2·step, …`.
    pub fn subsample(&self, start: usize, step: usize) -> OrbitSample {
        let idx: Vec<usize> = (start..self.len()).step_by(step.max(1)).collect();
        OrbitSample {
            dim: self.dim,
            coords: idx.iter().flat_map(|&i| self.point(i).to_vec()).collect(),
            errors: idx.iter().map(|&i| self.errors[i]).collect(),
            precision_bits: self.precision_bits,
        }
    }

    pub fn prefix(&self, n: usize) -> OrbitSample {
        let n = n.min(self.len());
        OrbitSample {
            dim: self.dim,
            coords: self.coords[..n * self.dim].to_vec(),
            errors: self.errors[..n].to_vec(),
            precision_bits: self.precision_bits,
        }
    }
}

/// Pairwise sum in index order.
pub fn pairwise_sum(values: &[Complex64]) -> Complex64 {
    if values.len() <= 32 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// `(1/N) Σ_n e^{2πi k·x_n}`.
pub fn weyl_sum(o: &OrbitSample, k: &[i64]) -> Result<Complex64> {
    if k.len() != o.dim {
        return Err(Error::DimensionMismatch {
            expected: o.dim,
            found: k.len(),
        });
    }
    if o.is_empty() {
        return Err(Error::Empty("orbit sample"));
    }
    let terms: Vec<Complex64> = (0..o.len())
        .map(|i| {
            let phase: f64 = o.point(i).iter().zip(k).map(|(x, &kj)| (kj as f64 * x).fract()).sum();
            Complex64::from_polar(1.0, 2.0 * PI * phase)
        })
        .collect();
    Ok(pairwise_sum(&terms) / o.len() as f64)
}

/// All `k ∈ ℤ^d` with `0 < ‖k‖_∞ ≤ K`, lexicographically.
pub fn frequencies(dim: usize, k_max: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<i64>| {
                (-k_max..=k_max).map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out.retain(|k| k.iter().any(|&v| v != 0));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeylEntry {
    pub k: Vec<i64>,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
}

/// `|S_N(k)|` for every `0 < ‖k‖_∞ ≤ K`.
pub fn weyl_sums(o: &OrbitSample, k_max: i64) -> Result<Vec<WeylEntry>> {
    frequencies(o.dim, k_max)
        .into_iter()
        .map(|k| {
            let s = weyl_sum(o, &k)?;
            Ok(WeylEntry {
                k,
                re: s.re,
                im: s.im,
                abs: s.norm(),
            })
        })
        .collect()
}

pub fn max_weyl(entries: &[WeylEntry]) -> f64 {
    entries.iter().map(|e| e.abs).fold(0.0, f64::max)
}

/// `max_i max(i/N − x_(i), x_(i) − (i−1)/N)` over the sorted sample.
pub fn star_discrepancy_1d(o: &OrbitSample) -> Result<f64> {
    if o.dim != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: o.dim,
        });
    }
    if o.is_empty() {
        return Err(Error::Empty("orbit sample"));
    }
    let mut xs = o.coords.clone();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    Ok(xs
        .iter()
        .enumerate()
        .map(|(i, &x)| ((i as f64 + 1.0) / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max))
}

/// Star discrepancy of each prefix of the given lengths.
pub fn running_discrepancy(o: &OrbitSample, checkpoints: &[usize]) -> Result<Vec<(usize, f64)>> {
    checkpoints
        .iter()
        .filter(|&&n| n >= 1 && n <= o.len())
        .map(|&n| Ok((n, star_discrepancy_1d(&o.prefix(n))?)))
        .collect()
}

/// `C·|k|·D*` for each `k`, the bound `|S_N(k)|` must respect.
pub fn koksma_bound(k: i64, discrepancy: f64) -> f64 {
    KOKSMA_CONSTANT * k.unsigned_abs() as f64 * discrepancy
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockFrequency {
    pub block: String,
    pub count: u64,
    pub freq: f64,
    pub expected: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DigitStats {
    pub base: u32,
    pub digits: usize,
    /// Number of leading digits after which the expansion is all zeros, if
    /// that happens within the digits examined.
    pub terminates_at: Option<usize>,
    /// Block length to frequencies over all `base^len` blocks; the
    /// denominator is the window count `N − len + 1`.
    pub blocks: BTreeMap<usize, Vec<BlockFrequency>>,
}

impl DigitStats {
    pub fn max_deviation(&self) -> f64 {
        self.blocks
            .values()
            .flatten()
            .map(|b| b.deviation)
            .fold(0.0, f64::max)
    }
}

fn block_name(block: &[u32]) -> String {
    block.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(if block.iter().any(|&d| d > 9) { "." } else { "" })
}

/// Sliding-window frequencies of all blocks of length `1..=max_len`.
pub fn block_frequencies(digits: &[u32], base: u32, max_len: usize) -> Result<DigitStats> {
    if base < 2 {
        return Err(Error::InvalidArgument("base must be at least 2".into()));
    }
    let mut blocks = BTreeMap::new();
    for len in 1..=max_len {
        let total = (base as u64).checked_pow(len as u32).filter(|&t| t <= 1 << 20).ok_or_else(|| {
            Error::InvalidArgument(format!("{base}^{len} blocks is too many"))
        })? as usize;
        if digits.len() < len {
            return Err(Error::InsufficientTruncation {
                len: digits.len(),
                needed: len,
            });
        }
        let mut counts = vec![0u64; total];
        for w in digits.windows(len) {
            let idx = w.iter().fold(0usize, |acc, &d| acc * base as usize + d as usize);
            counts[idx] += 1;
        }
        let windows = (digits.len() - len + 1) as f64;
        let expected = 1.0 / total as f64;
        let entries = counts
            .iter()
            .enumerate()
            .map(|(idx, &count)| {
                let mut block = vec![0u32; len];
                let mut r = idx;
                for slot in block.iter_mut().rev() {
                    *slot = (r % base as usize) as u32;
                    r /= base as usize;
                }
                let freq = count as f64 / windows;
                BlockFrequency {
                    block: block_name(&block),
                    count,
                    freq,
                    expected,
                    deviation: (freq - expected).abs(),
                }
            })
            .collect();
        blocks.insert(len, entries);
    }
    Ok(DigitStats {
        base,
        digits: digits.len(),
        terminates_at: None,
        blocks,
    })
}

/// Greedy digits of a rational by long division.
pub fn rational_digits(x: &BigRational, base: u32, n: usize) -> (Vec<u32>, Option<usize>) {
    let b = BigInt::from(base);
    let mut r = frac_rational(x);
    let mut out = Vec::with_capacity(n);
    let mut terminates = r.is_zero().then_some(0);
    for m in 0..n {
        r *= BigRational::from_integer(b.clone());
        let d = r.to_integer();
        r -= BigRational::from_integer(d.clone());
        out.push(d.to_u32().expect("digit below base"));
        if terminates.is_none() && r.is_zero() {
            terminates = Some(m + 1);
        }
    }
    (out, terminates)
}

/// Result of running a `×D` orbit in fixed point.
#[derive(Debug, Clone)]
pub struct OrbitRun {
    pub sample: OrbitSample,
    /// `⌊D·x_{m−1}⌋` for each step (one-dimensional runs only).
    pub digits: Vec<u32>,
    pub initial_precision: u32,
}

/// Guard bits for an orbit of `n` steps.
pub fn guard_bits(n: usize) -> u32 {
    64 + (n.max(2) as f64).log2().ceil() as u32
}

/// `x_m = D^m x mod ℤ^d` for `m = 1, …, n`, with certified digits in
/// dimension one. Ambiguous digits are an error.
pub fn times_d_orbit(start: OrbitStart<'_>, d: &IntMatrix, n: usize, guard: u32) -> Result<OrbitRun> {
    let basis = match &start {
        OrbitStart::Exact(x) => x.basis().clone(),
        OrbitStart::Fixed(_) => crate::exact::IrrationalBasis::rational(),
    };
    let map = linear_map(d, &basis)?;
    let one_dim = d.dim() == 1;
    let mut coords = Vec::with_capacity(n * d.dim());
    let mut errors = Vec::with_capacity(n);
    let mut digits = Vec::new();
    let summary = run_orbit(&[map], start, &Word::new(vec![0; n]), guard, |step| {
        if one_dim {
            if step.straddles {
                return Err(Error::NearInteger {
                    precision: step.point.prec(),
                    bound: format!("digit {} is not certified", step.index),
                });
            }
            let digit = step.integer_parts[0].to_u32().ok_or_else(|| {
                Error::InvalidArgument("digits need a nonnegative base".into())
            })?;
            digits.push(digit);
        }
        coords.extend(step.point.to_f64().into_iter().map(|v| if v >= 1.0 { 0.0 } else { v }));
        errors.push(step.point.error() + f64::EPSILON);
        Ok(())
    })?;
    Ok(OrbitRun {
        sample: OrbitSample::new(d.dim(), coords, errors, summary.initial_precision)?,
        digits,
        initial_precision: summary.initial_precision,
    })
}

/// Digit-block statistics of `x` to base `D`. Rationals are expanded by
/// long division; anything else through the fixed-point orbit engine.
pub fn digit_block_freqs(x: &Scalar, base: u32, n: usize, max_len: usize) -> Result<DigitStats> {
    if base < 2 {
        return Err(Error::InvalidArgument("base must be at least 2".into()));
    }
    let (digits, terminates) = match x.as_rational() {
        Some(q) => rational_digits(q, base, n),
        None => {
            let point = TorusPoint::new(vec![x.clone()])?;
            let d = IntMatrix::new(vec![vec![base as i64]])?;
            (times_d_orbit(OrbitStart::Exact(&point), &d, n, guard_bits(n))?.digits, None)
        }
    };
    let mut stats = block_frequencies(&digits, base, max_len)?;
    stats.terminates_at = terminates;
    Ok(stats)
}

/// Digits of a fixed-point start under `×base`.
pub fn fixed_point_digits(x: FixedPoint, base: u32, n: usize) -> Result<OrbitRun> {
    times_d_orbit(OrbitStart::Fixed(x), &IntMatrix::new(vec![vec![base as i64]])?, n, guard_bits(n))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsequenceReport {
    pub p: usize,
    pub full: Vec<WeylEntry>,
    /// Weyl sums of the residue classes `n ≡ r mod p`.
    pub classes: Vec<Vec<WeylEntry>>,
    /// `max_{r,k} |S_r(k) − S(k)|`.
    pub max_deviation: f64,
}

pub fn subsequence_compare(o: &OrbitSample, p: usize, k_max: i64) -> Result<SubsequenceReport> {
    if p == 0 || o.len() < p {
        return Err(Error::InvalidArgument("need 1 ≤ p ≤ N".into()));
    }
    let full = weyl_sums(o, k_max)?;
    let classes = (0..p)
        .map(|r| weyl_sums(&o.subsample(r, p), k_max))
        .collect::<Result<Vec<_>>>()?;
    let max_deviation = classes
        .iter()
        .flat_map(|c| {
            c.iter()
                .zip(&full)
                .map(|(a, b)| Complex64::new(a.re - b.re, a.im - b.im).norm())
        })
        .fold(0.0, f64::max);
    Ok(SubsequenceReport {
        p,
        full,
        classes,
        max_deviation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourierComparison {
    /// `(k, |S_N(k) − f(k)|)`.
    pub per_k: Vec<(i64, f64)>,
    pub max_deviation: f64,
}

/// Empirical characters against predicted coefficients, `0 < |k| ≤ K`.
pub fn compare_to_fourier(o: &OrbitSample, f: &dyn CoefficientFn, k_max: i64) -> Result<FourierComparison> {
    if o.dim != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: o.dim,
        });
    }
    let per_k = (-k_max..=k_max)
        .filter(|&k| k != 0)
        .map(|k| Ok((k, (weyl_sum(o, &[k])? - f.coefficient(k).value).norm())))
        .collect::<Result<Vec<_>>>()?;
    let max_deviation = per_k.iter().map(|x| x.1).fold(0.0, f64::max);
    Ok(FourierComparison { per_k, max_deviation })
}

pub fn write_weyl_csv<W: Write>(entries: &[WeylEntry], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "abs"])?;
    for e in entries {
        let k: Vec<String> = e.k.iter().map(i64::to_string).collect();
        w.write_record([k.join(" "), format!("{:e}", e.abs)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_blocks_csv<W: Write>(stats: &DigitStats, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["block", "freq", "expected", "deviation"])?;
    for b in stats.blocks.values().flatten() {
        w.write_record([
            b.block.clone(),
            format!("{:e}", b.freq),
            format!("{:e}", b.expected),
            format!("{:e}", b.deviation),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_discrepancy_csv<W: Write>(rows: &[(usize, f64)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "star_discrepancy"])?;
    for (n, d) in rows {
        w.write_record([n.to_string(), format!("{d:e}")])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::IrrationalBasis;
    use rand::Rng;

    #[test]
    fn thirds() {
        let o = OrbitSample::from_points(vec![0.0, 1.0 / 3.0, 2.0 / 3.0]).unwrap();
        assert!(weyl_sum(&o, &[1]).unwrap().norm() < 1e-15);
        assert!((weyl_sum(&o, &[3]).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn discrepancy_examples() {
        let d = |v: Vec<f64>| star_discrepancy_1d(&OrbitSample::from_points(v).unwrap()).unwrap();
        assert_eq!(d(vec![0.5]), 0.5);
        assert_eq!(d(vec![0.25, 0.75]), 0.25);
        let vdc: Vec<f64> = (0..10_000u32)
            .map(|i| {
                let (mut x, mut f, mut n) = (0.0, 0.5, i);
                while n > 0 {
                    x += f * (n & 1) as f64;
                    n >>= 1;
                    f /= 2.0;
                }
                x
            })
            .collect();
        assert!(d(vdc) < 0.002);
    }

    #[test]
    fn rejects_bad_samples() {
        assert!(OrbitSample::from_points(vec![1.0]).is_err());
        assert!(OrbitSample::new(1, vec![0.5], vec![1e-6], 20).is_err());
        let o = OrbitSample::new(2, vec![0.1, 0.2], vec![0.0], 53).unwrap();
        assert!(star_discrepancy_1d(&o).is_err());
    }

    #[test]
    fn rational_digit_examples() {
        let (d, _) = rational_digits(&BigRational::new(1.into(), 7.into()), 10, 6);
        assert_eq!(d, vec![1, 4, 2, 8, 5, 7]);
        let s = digit_block_freqs(&Scalar::from_ratio(&IrrationalBasis::rational(), 1, 3), 3, 10, 1).unwrap();
        let zero = s.blocks[&1].iter().find(|b| b.block == "0").unwrap();
        assert_eq!(zero.count, 9);
        assert_eq!(s.terminates_at, Some(1));
    }

    #[test]
    fn window_counts_sum_to_one() {
        let mut rng = crate::rng::stream(3, 0);
        let digits: Vec<u32> = (0..500).map(|_| rng.gen_range(0..3)).collect();
        let s = block_frequencies(&digits, 3, 3).unwrap();
        for (len, blocks) in &s.blocks {
            let total: u64 = blocks.iter().map(|b| b.count).sum();
            assert_eq!(total as usize, 500 - len + 1);
        }
    }

    #[test]
    fn sqrt2_digits_match_integer_part() {
        let b = IrrationalBasis::from_names(&["sqrt2"]).unwrap();
        let x = Scalar::parse(&b, "sqrt2").unwrap();
        let s = digit_block_freqs(&x, 10, 30, 1).unwrap();
        // √2 = 1.41421356237309504880168872420...
        let expected = "414213562373095048801688724209";
        let mut counts = [0u64; 10];
        for c in expected.chars() {
            counts[c.to_digit(10).unwrap() as usize] += 1;
        }
        for b in &s.blocks[&1] {
            assert_eq!(b.count, counts[b.block.parse::<usize>().unwrap()]);
        }
    }

    #[test]
    fn subsequences() {
        let mut rng = crate::rng::stream(11, 0);
        let o = OrbitSample::from_points((0..3000).map(|_| rng.gen::<f64>()).collect()).unwrap();
        assert_eq!(subsequence_compare(&o, 1, 4).unwrap().max_deviation, 0.0);
        let r = subsequence_compare(&o, 3, 4).unwrap();
        assert_eq!(r.classes.len(), 3);
    }

    #[test]
    fn koksma_holds_on_random_sample() {
        let mut rng = crate::rng::stream(5, 0);
        let o = OrbitSample::from_points((0..2000).map(|_| rng.gen::<f64>()).collect()).unwrap();
        let d = star_discrepancy_1d(&o).unwrap();
        for e in weyl_sums(&o, 8).unwrap() {
            assert!(e.abs <= koksma_bound(e.k[0], d));
        }
    }

    #[test]
    fn frequency_grid() {
        assert_eq!(frequencies(1, 2), vec![vec![-2], vec![-1], vec![1], vec![2]]);
        assert_eq!(frequencies(2, 1).len(), 8);
    }
}
