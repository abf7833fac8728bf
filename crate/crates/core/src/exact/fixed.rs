use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::basis::pow2;

/// A dyadic approximation `mantissa / 2^prec` with an error radius of
/// `err_ulps / 2^prec`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Approx {
    mantissa: BigInt,
    prec: u32,
    err_ulps: BigUint,
}

impl Approx {
    pub fn new(mantissa: BigInt, prec: u32, err_ulps: BigUint) -> Self {
        Approx {
            mantissa,
            prec,
            err_ulps,
        }
    }

    /// Rounds `q` down onto the grid `2^-prec`; the error is zero when `q`
    /// lies on the grid.
    pub fn from_rational(q: &BigRational, prec: u32) -> Self {
        let scaled = q.numer() * pow2(prec);
        let (m, r) = scaled.div_mod_floor(q.denom());
        let err = if r.is_zero() { 0u32 } else { 1 };
        Approx::new(m, prec, BigUint::from(err))
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn err_ulps(&self) -> &BigUint {
        &self.err_ulps
    }

    pub fn is_exact(&self) -> bool {
        self.err_ulps.is_zero()
    }

    pub fn midpoint(&self) -> BigRational {
        BigRational::new(self.mantissa.clone(), pow2(self.prec))
    }

    pub fn error_bound(&self) -> BigRational {
        BigRational::new(BigInt::from(self.err_ulps.clone()), pow2(self.prec))
    }

    /// True if `q` lies within the error radius.
    pub fn contains(&self, q: &BigRational) -> bool {
        (q - self.midpoint()).abs() <= self.error_bound()
    }

    pub fn to_f64(&self) -> f64 {
        scaled_to_f64(&self.mantissa, self.prec)
    }

    /// Error radius rounded up to an `f64`.
    pub fn error_f64(&self) -> f64 {
        if self.err_ulps.is_zero() {
            return 0.0;
        }
        let e = scaled_to_f64(&BigInt::from(self.err_ulps.clone()), self.prec);
        e * (1.0 + 1e-15) + f64::MIN_POSITIVE
    }

    /// Decimal expansion truncated towards minus infinity to `digits`
    /// places after the point.
    pub fn to_decimal(&self, digits: usize) -> String {
        let ten = BigInt::from(10u32).pow(digits as u32);
        let scaled = (&self.mantissa * &ten).div_floor(&pow2(self.prec));
        let negative = scaled.sign() == Sign::Minus;
        let (int_part, frac_part) = scaled.abs().div_rem(&ten);
        let mut s = String::new();
        if negative {
            s.push('-');
        }
        s.push_str(&int_part.to_string());
        if digits > 0 {
            s.push('.');
            s.push_str(&format!("{:0>width$}", frac_part.to_string(), width = digits));
        }
        s
    }
}

impl fmt::Display for Approx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ± {:e}", self.to_decimal(20), self.error_f64())
    }
}

/// `m / 2^prec` as an `f64`, keeping only the leading 64 bits of `m`.
pub(crate) fn scaled_to_f64(m: &BigInt, prec: u32) -> f64 {
    let bits = m.bits();
    let (m, prec) = if bits > 64 {
        let shift = bits - 64;
        ((m >> shift as usize), prec as i64 - shift as i64)
    } else {
        (m.clone(), prec as i64)
    };
    let v = m.to_f64().unwrap_or(0.0);
    v * 2f64.powi(-(prec.clamp(-1000, 1000) as i32)) * extra_scale(prec)
}

fn extra_scale(prec: i64) -> f64 {
    if prec > 1000 {
        2f64.powi(-((prec - 1000).min(1100) as i32))
    } else if prec < -1000 {
        2f64.powi((-prec - 1000).min(1100) as i32)
    } else {
        1.0
    }
}
