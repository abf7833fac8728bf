//! Independent reference computations for the integration tests. Nothing
//! here calls into the library except to convert its outputs.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use std::sync::Arc;

use torwalk::exact::{IrrationalBasis, Scalar, TorusPoint};

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// `a + b√2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Q2 {
    pub a: BigRational,
    pub b: BigRational,
}

impl Q2 {
    pub fn zero() -> Self {
        Q2 { a: BigRational::zero(), b: BigRational::zero() }
    }

    pub fn new(a: BigRational, b: BigRational) -> Self {
        Q2 { a, b }
    }

    pub fn add(&self, o: &Q2) -> Q2 {
        Q2 { a: &self.a + &o.a, b: &self.b + &o.b }
    }

    pub fn sub(&self, o: &Q2) -> Q2 {
        Q2 { a: &self.a - &o.a, b: &self.b - &o.b }
    }

    pub fn scale(&self, q: &BigRational) -> Q2 {
        Q2 { a: &self.a * q, b: &self.b * q }
    }

    pub fn is_integer(&self) -> bool {
        self.b.is_zero() && self.a.is_integer()
    }

    /// As a library scalar over the basis `[sqrt2]`.
    pub fn to_scalar(&self, basis: &Arc<IrrationalBasis>) -> Scalar {
        Scalar::from_coeffs(basis, vec![self.a.clone(), self.b.clone()]).unwrap()
    }

    /// Reads a library scalar over the basis `[sqrt2]` or the empty basis.
    pub fn from_scalar(s: &Scalar) -> Q2 {
        let b = s.irrational_coeffs().first().cloned().unwrap_or_else(BigRational::zero);
        Q2 { a: s.rational_part().clone(), b }
    }
}

pub type Vec2 = Vec<Q2>;
pub type IntMat = Vec<Vec<BigInt>>;
pub type RatMat = Vec<Vec<BigRational>>;

pub fn int_mat(rows: &[Vec<i64>]) -> IntMat {
    rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect()
}

pub fn identity(d: usize) -> IntMat {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

pub fn mat_mul(a: &IntMat, b: &IntMat) -> IntMat {
    let d = a.len();
    (0..d)
        .map(|i| (0..d).map(|j| (0..d).map(|k| &a[i][k] * &b[k][j]).sum()).collect())
        .collect()
}

pub fn mat_pow(a: &IntMat, e: u64) -> IntMat {
    (0..e).fold(identity(a.len()), |acc, _| mat_mul(&acc, a))
}

pub fn mat_sub(a: &IntMat, b: &IntMat) -> IntMat {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect())
        .collect()
}

/// Inverse of a 1×1 or 2×2 integer matrix by the closed formula.
pub fn inverse(a: &IntMat) -> RatMat {
    match a.len() {
        1 => vec![vec![BigRational::new(BigInt::one(), a[0][0].clone())]],
        2 => {
            let det = &a[0][0] * &a[1][1] - &a[0][1] * &a[1][0];
            let q = |v: BigInt| BigRational::new(v, det.clone());
            vec![
                vec![q(a[1][1].clone()), q(-a[0][1].clone())],
                vec![q(-a[1][0].clone()), q(a[0][0].clone())],
            ]
        }
        _ => panic!("oracle handles d ≤ 2"),
    }
}

pub fn apply_int(m: &IntMat, v: &[Q2]) -> Vec2 {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(Q2::zero(), |acc, (c, x)| acc.add(&x.scale(&BigRational::from_integer(c.clone()))))
        })
        .collect()
}

pub fn apply_rat(m: &RatMat, v: &[Q2]) -> Vec2 {
    m.iter()
        .map(|row| row.iter().zip(v).fold(Q2::zero(), |acc, (c, x)| acc.add(&x.scale(c))))
        .collect()
}

pub fn vadd(a: &[Q2], b: &[Q2]) -> Vec2 {
    a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
}

pub fn vsub(a: &[Q2], b: &[Q2]) -> Vec2 {
    a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
}

pub fn eq_mod_z(a: &[Q2], b: &[Q2]) -> bool {
    vsub(a, b).iter().all(Q2::is_integer)
}

pub fn to_point(v: &[Q2], basis: &Arc<IrrationalBasis>) -> TorusPoint {
    TorusPoint::new(v.iter().map(|x| x.to_scalar(basis)).collect()).unwrap()
}

pub fn from_point(p: &TorusPoint) -> Vec2 {
    p.lift().iter().map(Q2::from_scalar).collect()
}

/// Roots of `λ² − tλ + δ` both outside the closed unit disk, with margin.
pub fn expanding_2x2(m: &[Vec<i64>]) -> bool {
    let t = (m[0][0] + m[1][1]) as f64;
    let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) as f64;
    let disc = t * t - 4.0 * det;
    if disc < 0.0 {
        det.sqrt() > 1.0 + 1e-9
    } else {
        let r = disc.sqrt();
        ((t - r) / 2.0).abs() > 1.0 + 1e-9 && ((t + r) / 2.0).abs() > 1.0 + 1e-9
    }
}

/// Nonzero `k` with `‖k‖∞ ≤ bound` and `k·s ∈ ℤ` for every rational point,
/// by exhaustive search.
pub fn brute_force_witness(points: &[Vec<BigRational>], bound: i64) -> Option<Vec<i64>> {
    let d = points.first()?.len();
    let side = (2 * bound + 1) as usize;
    let total = side.pow(d as u32);
    (0..total)
        .map(|mut idx| {
            (0..d)
                .map(|_| {
                    let v = (idx % side) as i64 - bound;
                    idx /= side;
                    v
                })
                .collect::<Vec<i64>>()
        })
        .filter(|k| k.iter().any(|&v| v != 0))
        .find(|k| annihilates(k, points))
}

pub fn annihilates(k: &[i64], points: &[Vec<BigRational>]) -> bool {
    points.iter().all(|p| {
        p.iter()
            .zip(k)
            .map(|(x, &c)| x * BigRational::from_integer(c.into()))
            .sum::<BigRational>()
            .is_integer()
    })
}

/// `⌊√n · 2^p⌋` by bisection on integers.
pub fn sqrt_scaled(n: u64, p: u32) -> BigInt {
    let target = BigInt::from(n) << (2 * p as usize);
    let mut lo = BigInt::zero();
    let mut hi = BigInt::from(n + 1) << (p as usize);
    while &hi - &lo > BigInt::one() {
        let mid: BigInt = (&lo + &hi) >> 1usize;
        if &mid * &mid <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `a + b√n` to within `2^{-p+2}` as a float, from the bisection oracle.
pub fn eval_sqrt_expr(a: &BigRational, b: &BigRational, n: u64, p: u32) -> f64 {
    let s = BigRational::new(sqrt_scaled(n, p), BigInt::one() << (p as usize));
    let v = a + b * s;
    let scaled = (v * BigRational::from_integer(BigInt::one() << 60usize)).floor().to_integer();
    let f: f64 = scaled.to_string().parse().unwrap();
    f / 2f64.powi(60)
}

pub fn frac(q: &BigRational) -> BigRational {
    q - q.floor()
}

pub fn gcd_list(v: &[u32]) -> u32 {
    v.iter().fold(0, |g, &x| g.gcd(&x))
}

pub fn abs_max(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// `(1/N) Σ e^{2πi k x_n}` by direct summation.
pub fn naive_weyl(xs: &[f64], k: i64) -> (f64, f64) {
    let n = xs.len() as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for &x in xs {
        let t = 2.0 * std::f64::consts::PI * (k as f64) * x;
        re += t.cos();
        im += t.sin();
    }
    (re / n, im / n)
}

/// Star discrepancy by the sorted-sample formula.
pub fn naive_star_discrepancy(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| ((i as f64 + 1.0) / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max)
}

pub fn is_positive(q: &BigRational) -> bool {
    q.is_positive()
}
