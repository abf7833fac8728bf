//! Fourier coefficients of measures on the circle.
//!
//! A measure is represented lazily by its coefficient function
//! `n ↦ μ̂(n) = ∫ e^{2πinx} dμ(x)`. Every coefficient carries a certified
//! error radius and an `exact_zero` flag that is only set when vanishing
//! has been proved in exact arithmetic.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{frac_rational, rational_to_f64};

/// Relative error charged to one evaluated character `w·e^{2πix}`.
const TERM_ERROR: f64 = 4.0 * f64::EPSILON;

/// Largest root-of-unity order handled by the exact vanishing test.
const MAX_CYCLOTOMIC_ORDER: u64 = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficient {
    pub value: Complex64,
    /// `|value − true value| ≤ error`.
    pub error: f64,
    pub exact_zero: bool,
}

impl Coefficient {
    pub fn one() -> Self {
        Coefficient {
            value: Complex64::new(1.0, 0.0),
            error: 0.0,
            exact_zero: false,
        }
    }

    pub fn zero() -> Self {
        Coefficient {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            exact_zero: true,
        }
    }

    pub fn norm(&self) -> f64 {
        self.value.norm()
    }

    /// True when the coefficient is zero or indistinguishable from zero.
    pub fn vanishes(&self) -> bool {
        self.exact_zero || self.value.norm() < self.error
    }

    fn times(&self, other: &Coefficient) -> Coefficient {
        if self.exact_zero || other.exact_zero {
            return Coefficient::zero();
        }
        let a = self.value.norm();
        let b = other.value.norm();
        Coefficient {
            value: self.value * other.value,
            error: (a + self.error) * other.error + b * self.error + 2.0 * f64::EPSILON,
            exact_zero: false,
        }
    }
}

/// `n ↦ μ̂(n)` for a probability measure on `𝕋`.
pub trait CoefficientFn: Send + Sync + fmt::Debug {
    fn coefficient(&self, n: i64) -> Coefficient;
}

/// Finitely supported measure with rational atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<BigRational>,
    weights: Vec<BigRational>,
}

impl DiscreteMeasure {
    /// Reduces atoms mod 1 and merges repeated atoms.
    pub fn new(atoms: Vec<BigRational>, weights: Vec<BigRational>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Empty("discrete measure"));
        }
        if atoms.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: atoms.len(),
                found: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_positive()) {
            return Err(Error::InvalidArgument("weights must be positive".into()));
        }
        if weights.iter().sum::<BigRational>() != BigRational::one() {
            return Err(Error::InvalidArgument("weights must sum to 1".into()));
        }
        let mut merged: Vec<(BigRational, BigRational)> = Vec::new();
        for (a, w) in atoms.iter().zip(weights) {
            let a = frac_rational(a);
            match merged.iter_mut().find(|(b, _)| *b == a) {
                Some((_, v)) => *v += w,
                None => merged.push((a, w)),
            }
        }
        merged.sort_by(|x, y| x.0.cmp(&y.0));
        let (atoms, weights) = merged.into_iter().unzip();
        Ok(DiscreteMeasure { atoms, weights })
    }

    pub fn dirac(atom: BigRational) -> Self {
        DiscreteMeasure {
            atoms: vec![frac_rational(&atom)],
            weights: vec![BigRational::one()],
        }
    }

    pub fn uniform(atoms: Vec<BigRational>) -> Result<Self> {
        let w = BigRational::new(BigInt::one(), BigInt::from(atoms.len().max(1)));
        let k = atoms.len();
        DiscreteMeasure::new(atoms, vec![w; k])
    }

    pub fn atoms(&self) -> &[BigRational] {
        &self.atoms
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }
}

impl CoefficientFn for DiscreteMeasure {
    fn coefficient(&self, n: i64) -> Coefficient {
        let n = BigInt::from(n);
        let phases: Vec<BigRational> = self.atoms.iter().map(|a| frac_rational(&(a * &n))).collect();
        character_sum(&phases, &self.weights)
    }
}

/// `Σ w_j e^{2πi x_j}` for rational `x_j ∈ [0, 1)`.
fn character_sum(phases: &[BigRational], weights: &[BigRational]) -> Coefficient {
    if vanishes_exactly(phases, weights) {
        return Coefficient::zero();
    }
    let mut value = Complex64::new(0.0, 0.0);
    for (x, w) in phases.iter().zip(weights) {
        value += Complex64::from_polar(rational_to_f64(w), 2.0 * PI * rational_to_f64(x));
    }
    Coefficient {
        value,
        error: TERM_ERROR * phases.len() as f64,
        exact_zero: false,
    }
}

/// Decides `Σ w_j ζ^{N x_j} = 0` for `ζ = e^{2πi/N}`, `N` the common
/// denominator of the phases: the sum vanishes iff the cyclotomic
/// polynomial `Φ_N` divides `Σ w_j X^{N x_j}`. Orders above
/// `MAX_CYCLOTOMIC_ORDER` are not decided and report `false`.
fn vanishes_exactly(phases: &[BigRational], weights: &[BigRational]) -> bool {
    let order = phases.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let Some(order) = order.to_u64().filter(|&q| q <= MAX_CYCLOTOMIC_ORDER) else {
        return false;
    };
    if order == 1 {
        // all phases are 0 and the weights are positive
        return false;
    }
    let scale = weights.iter().fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
    let mut poly = vec![BigInt::zero(); order as usize];
    for (x, w) in phases.iter().zip(weights) {
        let e = (x * BigInt::from(order)).to_integer().to_usize().expect("phase below order");
        poly[e] += (w * &scale).to_integer();
    }
    let phi = cyclotomic(order);
    remainder_is_zero(poly, &phi)
}

/// Coefficients of `Φ_n`, lowest degree first, via
/// `Φ_n = Π_{d | n} (1 − X^d)^{μ(n/d)}` (sign fixed for `n > 1`).
fn cyclotomic(n: u64) -> Vec<BigInt> {
    let n = n as usize;
    let mut poly = vec![BigInt::zero(); n + 1];
    poly[0] = BigInt::one();
    let divisors: Vec<usize> = (1..=n).filter(|d| n % d == 0).collect();
    for &d in &divisors {
        if mobius(n / d) == 1 {
            for i in (d..=n).rev() {
                let t = poly[i - d].clone();
                poly[i] -= t;
            }
        }
    }
    for &d in &divisors {
        if mobius(n / d) == -1 {
            for i in d..=n {
                let t = poly[i - d].clone();
                poly[i] += t;
            }
        }
    }
    let deg = poly.iter().rposition(|c| !c.is_zero()).unwrap_or(0);
    poly.truncate(deg + 1);
    if poly[deg].is_negative() {
        for c in &mut poly {
            *c = -&*c;
        }
    }
    poly
}

fn mobius(mut n: usize) -> i32 {
    let mut sign = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

fn remainder_is_zero(mut poly: Vec<BigInt>, monic: &[BigInt]) -> bool {
    let deg = monic.len() - 1;
    for i in (deg..poly.len()).rev() {
        if poly[i].is_zero() {
            continue;
        }
        let c = poly[i].clone();
        for (j, m) in monic.iter().enumerate() {
            poly[i - deg + j] -= &c * m;
        }
    }
    poly.iter().all(Zero::is_zero)
}

/// Law of `Σ_{s≥0} D^{-s} Δ_{ξ_s}` with `ξ_s` i.i.d. of law `p`, i.e. the
/// self-similar measure of `f_i(x) = x/D + Δ_i`:
/// `μ̂(n) = Π_{s≥0} Σ_i p_i e^{2πi n D^{-s} Δ_i}`.
pub struct SelfSimilar {
    d: i64,
    atoms: Vec<BigRational>,
    weights: Vec<BigRational>,
    tol: f64,
    memo: Mutex<HashMap<i64, Coefficient>>,
}

impl fmt::Debug for SelfSimilar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SelfSimilar")
            .field("d", &self.d)
            .field("atoms", &self.atoms)
            .field("weights", &self.weights)
            .field("tol", &self.tol)
            .finish()
    }
}

impl SelfSimilar {
    pub fn new(d: i64, atoms: Vec<BigRational>, weights: Vec<BigRational>, tol: f64) -> Result<Self> {
        if d.abs() < 2 {
            return Err(Error::NotExpanding);
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(Error::InvalidArgument("atoms and weights must be nonempty and match".into()));
        }
        if weights.iter().any(|w| !w.is_positive()) || weights.iter().sum::<BigRational>() != BigRational::one() {
            return Err(Error::InvalidArgument("weights must be positive and sum to 1".into()));
        }
        Ok(SelfSimilar {
            d,
            atoms,
            weights,
            tol,
            memo: Mutex::new(HashMap::new()),
        })
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn expansion(&self) -> i64 {
        self.d
    }

    pub fn atoms(&self) -> &[BigRational] {
        &self.atoms
    }

    /// The factor `Σ_i p_i e^{2πi n D^{-s} Δ_i}`.
    pub fn factor(&self, n: i64, s: u32) -> Coefficient {
        let scale = BigRational::new(BigInt::from(n), BigInt::from(self.d).pow(s));
        let phases: Vec<BigRational> = self.atoms.iter().map(|a| frac_rational(&(a * &scale))).collect();
        character_sum(&phases, &self.weights)
    }

    /// `2π|n|·max|Δ|·|D|^{-s}`, a bound on `|factor(n, s) − 1|`.
    pub fn factor_deviation(&self, n: i64, s: u32) -> f64 {
        let max_atom = self.atoms.iter().map(|a| rational_to_f64(a).abs()).fold(0.0, f64::max);
        2.0 * PI * (n as f64).abs() * max_atom * (self.d.abs() as f64).powi(-(s as i32))
    }

    /// The first factor index that vanishes exactly, if any. Only factors
    /// whose deviation bound reaches 1 can vanish, so the search is finite.
    pub fn vanishing_factor(&self, n: i64) -> Option<u32> {
        if n == 0 {
            return None;
        }
        (0..)
            .take_while(|&s| self.factor_deviation(n, s) >= 1.0)
            .find(|&s| self.factor(n, s).exact_zero)
    }

    fn compute(&self, n: i64) -> Coefficient {
        if n == 0 {
            return Coefficient::one();
        }
        if self.vanishing_factor(n).is_some() {
            return Coefficient::zero();
        }
        let ratio = 1.0 / self.d.abs() as f64;
        let tail_sum = |last: u32| self.factor_deviation(n, last + 1) / (1.0 - ratio);
        let mut last = 0u32;
        while tail_sum(last).exp_m1() >= self.tol / 2.0 {
            last += 1;
        }
        let mut value = Complex64::new(1.0, 0.0);
        for s in 0..=last {
            value *= self.factor(n, s).value;
        }
        let rounding = 2.0 * (last as f64 + 9.0) * TERM_ERROR * self.atoms.len() as f64;
        Coefficient {
            value,
            error: tail_sum(last).exp_m1() + rounding,
            exact_zero: false,
        }
    }
}

impl CoefficientFn for SelfSimilar {
    fn coefficient(&self, n: i64) -> Coefficient {
        if let Some(c) = self.memo.lock().expect("memo lock").get(&n) {
            return *c;
        }
        let c = self.compute(n);
        self.memo.lock().expect("memo lock").insert(n, c);
        c
    }
}

/// Pointwise product of coefficient functions: the law of a sum of
/// independent variables.
#[derive(Debug, Clone)]
pub struct Convolution {
    factors: Vec<Arc<dyn CoefficientFn>>,
}

impl Convolution {
    pub fn new(factors: Vec<Arc<dyn CoefficientFn>>) -> Self {
        Convolution { factors }
    }
}

impl CoefficientFn for Convolution {
    fn coefficient(&self, n: i64) -> Coefficient {
        self.factors
            .iter()
            .fold(Coefficient::one(), |acc, f| acc.times(&f.coefficient(n)))
    }
}

pub fn convolve(a: Arc<dyn CoefficientFn>, b: Arc<dyn CoefficientFn>) -> Convolution {
    Convolution::new(vec![a, b])
}

/// Image of a measure under `x ↦ x + c`: a phase `e^{2πinc}` that never
/// changes `exact_zero`.
#[derive(Debug, Clone)]
pub struct Translated {
    inner: Arc<dyn CoefficientFn>,
    shift: BigRational,
}

impl Translated {
    pub fn new(inner: Arc<dyn CoefficientFn>, shift: BigRational) -> Self {
        Translated { inner, shift }
    }
}

impl CoefficientFn for Translated {
    fn coefficient(&self, n: i64) -> Coefficient {
        let c = self.inner.coefficient(n);
        if c.exact_zero {
            return c;
        }
        let phase = frac_rational(&(&self.shift * BigInt::from(n)));
        Coefficient {
            value: c.value * Complex64::from_polar(1.0, 2.0 * PI * rational_to_f64(&phase)),
            error: c.error + TERM_ERROR,
            exact_zero: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Haar;

impl CoefficientFn for Haar {
    fn coefficient(&self, n: i64) -> Coefficient {
        if n == 0 {
            Coefficient::one()
        } else {
            Coefficient::zero()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexType {
    /// `w = 4^k (2m + 1)`.
    Odd,
    /// `w = 4^k (4m + 2)`.
    TwiceOdd,
}

/// Writes `w = 4^k(2m+1)` or `w = 4^k(4m+2)`.
pub fn classify_index(w: i64) -> Result<(u32, IndexType, i64)> {
    if w == 0 {
        return Err(Error::InvalidArgument("index must be nonzero".into()));
    }
    let mut k = 0;
    let mut u = w;
    while u % 4 == 0 {
        u /= 4;
        k += 1;
    }
    if u.rem_euclid(2) == 1 {
        Ok((k, IndexType::Odd, (u - 1).div_euclid(2)))
    } else {
        Ok((k, IndexType::TwiceOdd, (u - 2) / 4))
    }
}

/// Inverse of [`classify_index`].
pub fn reconstruct_index(k: u32, kind: IndexType, m: i64) -> i64 {
    let base = match kind {
        IndexType::Odd => 2 * m + 1,
        IndexType::TwiceOdd => 4 * m + 2,
    };
    4i64.pow(k) * base
}

/// `μ₀`: the law of `Σ_{j≥0} 4^{-j} ξ_j`, `ξ_j` uniform on `{0, ½}`.
pub fn quarter_cantor(tol: f64) -> Result<SelfSimilar> {
    let half = BigRational::new(1.into(), 2.into());
    SelfSimilar::new(4, vec![BigRational::zero(), half.clone()], vec![half.clone(), half], tol)
}

/// `ν`: the law of `Σ_{j≥0} 4^{-j} χ_j`, `χ_j` uniform on `{0, ¼}`.
pub fn quarter_shift(tol: f64) -> Result<SelfSimilar> {
    let half = BigRational::new(1.into(), 2.into());
    let quarter = BigRational::new(1.into(), 4.into());
    SelfSimilar::new(4, vec![BigRational::zero(), quarter], vec![half.clone(), half], tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HaarFactor {
    QuarterCantor,
    QuarterShift,
}

/// The measure and factor index whose factor vanishes at `w`: odd indices
/// kill factor `k` of `μ₀`, twice-odd ones factor `k` of `ν`.
pub fn haar_route(w: i64) -> Result<(HaarFactor, u32)> {
    let (k, kind, _) = classify_index(w)?;
    Ok(match kind {
        IndexType::Odd => (HaarFactor::QuarterCantor, k),
        IndexType::TwiceOdd => (HaarFactor::QuarterShift, k),
    })
}

/// `f(0) = 1` and `f(n)` vanishes for all `1 ≤ |n| ≤ n_max`.
pub fn is_haar_up_to(f: &dyn CoefficientFn, n_max: i64) -> bool {
    let c0 = f.coefficient(0);
    if (c0.value - Complex64::new(1.0, 0.0)).norm() > c0.error + f64::EPSILON {
        return false;
    }
    (1..=n_max).all(|n| f.coefficient(n).vanishes() && f.coefficient(-n).vanishes())
}

/// CSV rows `n,re,im,certified_error,exact_zero`.
pub fn write_coefficients_csv<W: Write>(f: &dyn CoefficientFn, range: std::ops::RangeInclusive<i64>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "re", "im", "certified_error", "exact_zero"])?;
    for n in range {
        let c = f.coefficient(n);
        w.write_record([
            n.to_string(),
            format!("{:e}", c.value.re),
            format!("{:e}", c.value.im),
            format!("{:e}", c.error),
            c.exact_zero.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
