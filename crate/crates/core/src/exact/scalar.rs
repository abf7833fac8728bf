//! Exact scalars over the rationals extended by declared irrationals, and
//! torus points built from them.

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::basis::{bit_len, pow2, IrrationalBasis};
use super::fixed::Approx;
use crate::error::{Error, Result};

/// `c_0 + c_1·σ_1 + … + c_k·σ_k` with rational `c_i` and the symbols `σ_i`
/// of an [`IrrationalBasis`].
#[derive(Clone)]
pub struct Scalar {
    basis: Arc<IrrationalBasis>,
    coeffs: Vec<BigRational>,
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({self})")
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.basis.same_as(&other.basis) && self.coeffs == other.coeffs
    }
}

impl Eq for Scalar {}

impl Scalar {
    pub fn zero(basis: &Arc<IrrationalBasis>) -> Self {
        Scalar {
            basis: basis.clone(),
            coeffs: vec![BigRational::zero(); basis.len() + 1],
        }
    }

    pub fn from_rational(basis: &Arc<IrrationalBasis>, q: BigRational) -> Self {
        let mut s = Self::zero(basis);
        s.coeffs[0] = q;
        s
    }

    pub fn from_ratio(basis: &Arc<IrrationalBasis>, numer: i64, denom: i64) -> Self {
        Self::from_rational(basis, BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_integer(basis: &Arc<IrrationalBasis>, n: i64) -> Self {
        Self::from_ratio(basis, n, 1)
    }

    /// The symbol at `index` with coefficient one.
    pub fn symbol(basis: &Arc<IrrationalBasis>, index: usize) -> Self {
        let mut s = Self::zero(basis);
        s.coeffs[index + 1] = BigRational::one();
        s
    }

    /// Builds a scalar from its rational part and one coefficient per
    /// symbol.
    pub fn from_coeffs(basis: &Arc<IrrationalBasis>, coeffs: Vec<BigRational>) -> Result<Self> {
        if coeffs.len() != basis.len() + 1 {
            return Err(Error::DimensionMismatch {
                expected: basis.len() + 1,
                found: coeffs.len(),
            });
        }
        Ok(Scalar {
            basis: basis.clone(),
            coeffs,
        })
    }

    pub fn basis(&self) -> &Arc<IrrationalBasis> {
        &self.basis
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.coeffs[0]
    }

    pub fn irrational_coeffs(&self) -> &[BigRational] {
        &self.coeffs[1..]
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs[1..].iter().all(Zero::is_zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        self.is_rational().then(|| &self.coeffs[0])
    }

    fn check_basis(&self, other: &Scalar) -> Result<()> {
        if self.basis.same_as(&other.basis) {
            Ok(())
        } else {
            Err(Error::BasisMismatch)
        }
    }

    pub fn checked_add(&self, other: &Scalar) -> Result<Scalar> {
        self.check_basis(other)?;
        Ok(Scalar {
            basis: self.basis.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn checked_sub(&self, other: &Scalar) -> Result<Scalar> {
        self.check_basis(other)?;
        Ok(Scalar {
            basis: self.basis.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn scale(&self, q: &BigRational) -> Scalar {
        Scalar {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().map(|c| c * q).collect(),
        }
    }

    pub fn mul_int(&self, n: &BigInt) -> Scalar {
        Scalar {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().map(|c| c * n).collect(),
        }
    }

    pub fn neg(&self) -> Scalar {
        Scalar {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    /// Shifts the rational part into `[0, 1)`.
    pub fn reduce_mod_one(&self) -> Scalar {
        let mut out = self.clone();
        out.coeffs[0] = frac_rational(&self.coeffs[0]);
        out
    }

    /// Exact test for `self - other ∈ ℤ`.
    pub fn eq_mod_one(&self, other: &Scalar) -> Result<bool> {
        let diff = self.checked_sub(other)?;
        Ok(diff.is_rational() && diff.coeffs[0].is_integer())
    }

    /// Dyadic approximation with an error of at most `2^-p`.
    ///
    /// The returned precision exceeds `p` by a few guard bits that absorb
    /// the size of the coefficients.
    pub fn evaluate(&self, p: u32) -> Approx {
        let p = p.max(8);
        if self.is_rational() {
            return Approx::from_rational(&self.coeffs[0], p);
        }
        let nonzero: Vec<(usize, &BigRational)> = self.coeffs[1..]
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .collect();
        let sum_abs: BigRational = nonzero.iter().map(|(_, c)| c.abs()).sum();
        let sum_ceil = sum_abs.ceil().to_integer().to_biguint().unwrap_or_default();
        let nterms = BigUint::from(nonzero.len() + 1);
        let guard = 4 + bit_len(&nterms) + bit_len(&sum_ceil);
        let w = p + guard as u32;

        let base = Approx::from_rational(&self.coeffs[0], w);
        let mut mantissa = base.mantissa().clone();
        let mut err = base.err_ulps().clone();
        for (i, c) in nonzero {
            // symbol error <= 2 ulps, scaled by |c|, plus one ulp for the floor
            let s = self.basis.symbols()[i].approx(w);
            mantissa += (c.numer() * s).div_floor(c.denom());
            let two_c = (c.abs() * BigRational::from_integer(2.into())).ceil();
            err += two_c.to_integer().to_biguint().unwrap_or_default() + 1u32;
        }
        Approx::new(mantissa, w, err)
    }

    /// `value - floor(value)`, refusing values that sit within `2^(4-p)` of
    /// an integer unless the scalar is rational.
    pub fn fractional_part(&self, p: u32) -> Result<FracPart> {
        if let Some(q) = self.as_rational() {
            let f = frac_rational(q);
            let approx = Approx::from_rational(&f, p.max(8) + 4);
            return Ok(FracPart {
                approx,
                exact: Some(f),
            });
        }
        let a = self.evaluate(p);
        let w = a.prec();
        let one = pow2(w);
        let f = a.mantissa().mod_floor(&one);
        let err = BigInt::from(a.err_ulps().clone());
        let p = p.max(8);
        let margin = pow2(w - p + 4);
        if &f - &err <= margin || &f + &err >= &one - &margin {
            return Err(Error::NearInteger {
                precision: p,
                bound: format!("2^{}", 4 - p as i64),
            });
        }
        Ok(FracPart {
            approx: Approx::new(f, w, a.err_ulps().clone()),
            exact: None,
        })
    }

    /// Nearest `f64` of the value; for diagnostics only.
    pub fn to_f64(&self) -> f64 {
        self.evaluate(64).to_f64()
    }

    /// Parses the config syntax: `a/b`, `c/d*NAME`, `NAME/4`, … joined by
    /// `+` and `-`.
    pub fn parse(basis: &Arc<IrrationalBasis>, input: &str) -> Result<Scalar> {
        parse_scalar(basis, input)
    }
}

/// Fractional part of a scalar: a dyadic approximation in `[0, 1)`, plus the
/// exact value when the scalar is rational.
#[derive(Debug, Clone, PartialEq)]
pub struct FracPart {
    pub approx: Approx,
    pub exact: Option<BigRational>,
}

impl FracPart {
    pub fn to_f64(&self) -> f64 {
        match &self.exact {
            Some(q) => rational_to_f64(q),
            None => self.approx.to_f64(),
        }
    }

    pub fn error_f64(&self) -> f64 {
        match self.exact {
            Some(_) => 0.0,
            None => self.approx.error_f64(),
        }
    }
}

pub(crate) fn frac_rational(q: &BigRational) -> BigRational {
    q - q.floor()
}

pub(crate) fn rational_to_f64(q: &BigRational) -> f64 {
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() && d != 0.0 => n / d,
        _ => Approx::from_rational(q, 80).to_f64(),
    }
}

pub(crate) fn format_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `a`, `-a`, or `a/b` into a rational.
pub fn parse_rational(input: &str) -> Result<BigRational> {
    let bad = |reason: &str| Error::Parse {
        input: input.to_string(),
        reason: reason.to_string(),
    };
    let s = input.trim().replace('−', "-");
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.as_str(), "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad("bad numerator"))?;
    let d: BigInt = d.parse().map_err(|_| bad("bad denominator"))?;
    if d.is_zero() {
        return Err(bad("zero denominator"));
    }
    Ok(BigRational::new(n, d))
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut write_term = |f: &mut fmt::Formatter<'_>, c: &BigRational, name: Option<&str>| {
            if c.is_zero() {
                return Ok(());
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            match name {
                None => write!(f, "{}", format_rational(&mag)),
                Some(n) if mag.is_one() => write!(f, "{n}"),
                Some(n) => write!(f, "{}*{n}", format_rational(&mag)),
            }
        };
        write_term(f, &self.coeffs[0], None)?;
        for (c, s) in self.coeffs[1..].iter().zip(self.basis.symbols()) {
            write_term(f, c, Some(s.name()))?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn parse_scalar(basis: &Arc<IrrationalBasis>, input: &str) -> Result<Scalar> {
    let bad = |reason: String| Error::Parse {
        input: input.to_string(),
        reason,
    };
    let normalized = input.replace('−', "-");
    let chars: Vec<char> = normalized.chars().filter(|c| !c.is_whitespace()).collect();
    if chars.is_empty() {
        return Err(bad("empty expression".into()));
    }
    let mut out = Scalar::zero(basis);
    let mut pos = 0;
    while pos < chars.len() {
        let mut sign = BigRational::one();
        if pos == 0 || matches!(chars[pos], '+' | '-') {
            match chars[pos] {
                '+' => pos += 1,
                '-' => {
                    sign = -sign;
                    pos += 1
                }
                _ if pos == 0 => {}
                _ => unreachable!(),
            }
        }
        let start = pos;
        while pos < chars.len() && !matches!(chars[pos], '+' | '-') {
            pos += 1;
        }
        let term: String = chars[start..pos].iter().collect();
        if term.is_empty() {
            return Err(bad("dangling sign".into()));
        }
        let (coef, sym) = parse_term(basis, &term).map_err(bad)?;
        let coef = coef * sign;
        match sym {
            None => out.coeffs[0] += coef,
            Some(i) => out.coeffs[i + 1] += coef,
        }
    }
    Ok(out)
}

/// A term is a product of factors separated by `*` and `/`; every divisor is
/// an integer and at most one factor is a symbol.
fn parse_term(
    basis: &IrrationalBasis,
    term: &str,
) -> std::result::Result<(BigRational, Option<usize>), String> {
    let mut coef = BigRational::one();
    let mut sym = None;
    let mut op = '*';
    let mut rest = term;
    loop {
        let end = rest.find(['*', '/']).unwrap_or(rest.len());
        let factor = &rest[..end];
        if factor.is_empty() {
            return Err(format!("empty factor in `{term}`"));
        }
        if factor.chars().all(|c| c.is_ascii_digit()) {
            let n: BigInt = factor.parse().map_err(|_| format!("bad integer `{factor}`"))?;
            if op == '*' {
                coef *= BigRational::from_integer(n);
            } else {
                if n.is_zero() {
                    return Err("division by zero".into());
                }
                coef /= BigRational::from_integer(n);
            }
        } else {
            if op == '/' {
                return Err(format!("cannot divide by symbol `{factor}`"));
            }
            if sym.is_some() {
                return Err(format!("product of two symbols in `{term}`"));
            }
            sym = Some(
                basis
                    .index_of(factor)
                    .ok_or_else(|| format!("unknown symbol `{factor}`"))?,
            );
        }
        if end == rest.len() {
            break;
        }
        op = rest.as_bytes()[end] as char;
        rest = &rest[end + 1..];
    }
    Ok((coef, sym))
}

/// A point of the torus `ℝ^d / ℤ^d`, stored as a lift in `ℝ^d`.
#[derive(Clone, Debug)]
pub struct TorusPoint {
    lift: Vec<Scalar>,
}

impl TorusPoint {
    pub fn new(lift: Vec<Scalar>) -> Result<Self> {
        let first = lift.first().ok_or(Error::Empty("torus point"))?;
        if lift.iter().any(|s| !s.basis.same_as(&first.basis)) {
            return Err(Error::BasisMismatch);
        }
        Ok(TorusPoint { lift })
    }

    pub fn zero(basis: &Arc<IrrationalBasis>, dim: usize) -> Self {
        TorusPoint {
            lift: vec![Scalar::zero(basis); dim],
        }
    }

    pub fn parse(basis: &Arc<IrrationalBasis>, coords: &[impl AsRef<str>]) -> Result<Self> {
        let lift = coords
            .iter()
            .map(|c| Scalar::parse(basis, c.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(lift)
    }

    pub fn dim(&self) -> usize {
        self.lift.len()
    }

    pub fn lift(&self) -> &[Scalar] {
        &self.lift
    }

    pub fn into_lift(self) -> Vec<Scalar> {
        self.lift
    }

    pub fn basis(&self) -> &Arc<IrrationalBasis> {
        &self.lift[0].basis
    }

    /// Canonical representative: rational parts in `[0, 1)`.
    pub fn reduced(&self) -> TorusPoint {
        TorusPoint {
            lift: self.lift.iter().map(Scalar::reduce_mod_one).collect(),
        }
    }

    fn check_dim(&self, other: &TorusPoint) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &TorusPoint) -> Result<TorusPoint> {
        self.check_dim(other)?;
        let lift = self
            .lift
            .iter()
            .zip(&other.lift)
            .map(|(a, b)| a.checked_add(b))
            .collect::<Result<_>>()?;
        Ok(TorusPoint { lift })
    }

    pub fn checked_sub(&self, other: &TorusPoint) -> Result<TorusPoint> {
        self.check_dim(other)?;
        let lift = self
            .lift
            .iter()
            .zip(&other.lift)
            .map(|(a, b)| a.checked_sub(b))
            .collect::<Result<_>>()?;
        Ok(TorusPoint { lift })
    }

    /// Exactly decides equality modulo `ℤ^d`.
    pub fn eq_mod_z(&self, other: &TorusPoint) -> Result<bool> {
        self.check_dim(other)?;
        for (a, b) in self.lift.iter().zip(&other.lift) {
            if !a.eq_mod_one(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.lift.iter().map(ToString::to_string).collect()
    }
}

impl PartialEq for TorusPoint {
    fn eq(&self, other: &Self) -> bool {
        self.eq_mod_z(other).unwrap_or(false)
    }
}

impl fmt::Display for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.to_strings().join(", "))
    }
}

/// `q` with `q·b ∈ ℤ` for every rational `b` listed: the least common
/// denominator.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a BigRational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}
