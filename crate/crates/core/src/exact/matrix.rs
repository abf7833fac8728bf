use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::scalar::Scalar;
use crate::error::{Error, Result};

/// Tolerance on eigenvalue moduli around 1 for the expansion test.
pub const EXPANSION_MARGIN: f64 = 1e-9;

/// Square integer matrix with exact (arbitrary size) entries, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    dim: usize,
    entries: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix{:?}", self.rows_i128())
    }
}

impl IntMatrix {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::Empty("matrix"));
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            entries.extend(row.into_iter().map(BigInt::from));
        }
        Ok(IntMatrix { dim, entries })
    }

    /// `c·I` in dimension `dim`.
    pub fn scalar(dim: usize, c: i64) -> Self {
        let mut entries = vec![BigInt::zero(); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = BigInt::from(c);
        }
        IntMatrix { dim, entries }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, 1)
    }

    pub fn diag(values: &[i64]) -> Self {
        let dim = values.len();
        let mut m = Self::scalar(dim, 0);
        for (i, v) in values.iter().enumerate() {
            m.entries[i * dim + i] = BigInt::from(*v);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.dim + j]
    }

    pub fn rows_i128(&self) -> Vec<Vec<i128>> {
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| self.get(i, j).to_i128().unwrap_or(i128::MAX))
                    .collect()
            })
            .collect()
    }

    /// Row-major entries when they all fit in `i64`.
    pub fn rows_i64(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j).to_i64()).collect())
            .collect()
    }

    fn check_dim(&self, other: &IntMatrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        self.check_dim(other)?;
        let d = self.dim;
        let mut entries = vec![BigInt::zero(); d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    entries[i * d + j] += a * other.get(k, j);
                }
            }
        }
        Ok(IntMatrix { dim: d, entries })
    }

    pub fn sub(&self, other: &IntMatrix) -> Result<IntMatrix> {
        self.check_dim(other)?;
        Ok(IntMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn pow(&self, mut e: u64) -> IntMatrix {
        let mut result = IntMatrix::identity(self.dim);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base).expect("same dimension");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).expect("same dimension");
            }
        }
        result
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        let d = self.dim;
        let mut a = self.entries.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..d {
            if a[k * d + k].is_zero() {
                let Some(p) = (k + 1..d).find(|&r| !a[r * d + k].is_zero()) else {
                    return BigInt::zero();
                };
                for j in 0..d {
                    a.swap(k * d + j, p * d + j);
                }
                sign = -sign;
            }
            for i in k + 1..d {
                for j in k + 1..d {
                    let v = (&a[i * d + j] * &a[k * d + k] - &a[i * d + k] * &a[k * d + j]) / &prev;
                    a[i * d + j] = v;
                }
            }
            prev = a[k * d + k].clone();
        }
        sign * &a[d * d - 1]
    }

    pub fn commutes(&self, other: &IntMatrix) -> Result<bool> {
        Ok(self.mul(other)? == other.mul(self)?)
    }

    pub fn to_rational(&self) -> RatMatrix {
        RatMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|e| BigRational::from_integer(e.clone()))
                .collect(),
        }
    }

    pub fn inverse(&self) -> Result<RatMatrix> {
        self.to_rational().inverse()
    }

    /// `det(M)·M^{-1}`, an integer matrix.
    pub fn adjugate(&self) -> Result<IntMatrix> {
        let det = BigRational::from_integer(self.det());
        let inv = self.inverse()?;
        let entries = inv
            .entries
            .iter()
            .map(|e| (e * &det).to_integer())
            .collect();
        Ok(IntMatrix {
            dim: self.dim,
            entries,
        })
    }

    pub fn apply_int(&self, v: &[BigInt]) -> Vec<BigInt> {
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| self.get(i, j) * &v[j])
                    .sum::<BigInt>()
            })
            .collect()
    }

    pub fn apply(&self, v: &[Scalar]) -> Result<Vec<Scalar>> {
        mat_apply(&self.to_rational(), v)
    }

    /// Maximum absolute row sum, the operator norm for the sup norm.
    pub fn inf_norm(&self) -> f64 {
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| self.get(i, j).abs().to_f64().unwrap_or(f64::INFINITY))
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| {
            self.get(i, j).to_f64().unwrap_or(f64::NAN)
        })
    }

    /// Three-valued expansion test: `Ok(true)` when every complex eigenvalue
    /// has modulus above `1 + margin`, `Ok(false)` when some modulus is
    /// provably at most 1, and [`Error::Indeterminate`] otherwise.
    pub fn is_expanding(&self) -> Result<bool> {
        let d = self.dim;
        // the product of the moduli is |det|, a nonnegative integer
        if self.det().abs() < BigInt::from(2) {
            return Ok(false);
        }
        let id = IntMatrix::identity(d);
        let minus_id = IntMatrix::scalar(d, -1);
        if self.sub(&id)?.det().is_zero() || self.sub(&minus_id)?.det().is_zero() {
            return Ok(false);
        }
        let min_modulus = self
            .to_f64()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(f64::INFINITY, f64::min);
        if min_modulus > 1.0 + EXPANSION_MARGIN {
            Ok(true)
        } else if min_modulus < 1.0 - EXPANSION_MARGIN {
            Ok(false)
        } else {
            Err(Error::Indeterminate {
                modulus: min_modulus,
            })
        }
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.dim)
            .map(|i| {
                let row: Vec<String> = (0..self.dim).map(|j| self.get(i, j).to_string()).collect();
                format!("[{}]", row.join(", "))
            })
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

/// Square matrix with rational entries, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    dim: usize,
    entries: Vec<BigRational>,
}

impl RatMatrix {
    pub fn from_entries(dim: usize, entries: Vec<BigRational>) -> Result<Self> {
        if entries.len() != dim * dim || dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(RatMatrix { dim, entries })
    }

    pub fn identity(dim: usize) -> Self {
        IntMatrix::identity(dim).to_rational()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.entries[i * self.dim + j]
    }

    pub fn mul(&self, other: &RatMatrix) -> Result<RatMatrix> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let d = self.dim;
        let mut entries = vec![BigRational::zero(); d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    entries[i * d + j] += a * other.get(k, j);
                }
            }
        }
        Ok(RatMatrix { dim: d, entries })
    }

    pub fn scale(&self, q: &BigRational) -> RatMatrix {
        RatMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|e| e * q).collect(),
        }
    }

    /// Gauss–Jordan inverse over the rationals.
    pub fn inverse(&self) -> Result<RatMatrix> {
        let d = self.dim;
        let mut a = self.entries.clone();
        let mut inv = RatMatrix::identity(d).entries;
        for col in 0..d {
            let pivot = (col..d)
                .find(|&r| !a[r * d + col].is_zero())
                .ok_or(Error::Singular)?;
            if pivot != col {
                for j in 0..d {
                    a.swap(col * d + j, pivot * d + j);
                    inv.swap(col * d + j, pivot * d + j);
                }
            }
            let p = a[col * d + col].clone();
            for j in 0..d {
                a[col * d + j] /= &p;
                inv[col * d + j] /= &p;
            }
            for r in 0..d {
                if r == col || a[r * d + col].is_zero() {
                    continue;
                }
                let f = a[r * d + col].clone();
                for j in 0..d {
                    let (x, y) = (a[col * d + j].clone(), inv[col * d + j].clone());
                    a[r * d + j] -= &f * x;
                    inv[r * d + j] -= &f * y;
                }
            }
        }
        Ok(RatMatrix {
            dim: d,
            entries: inv,
        })
    }
}

/// Exact action of a rational matrix on a vector of scalars.
pub fn mat_apply(m: &RatMatrix, v: &[Scalar]) -> Result<Vec<Scalar>> {
    if v.len() != m.dim {
        return Err(Error::DimensionMismatch {
            expected: m.dim,
            found: v.len(),
        });
    }
    let basis = v[0].basis().clone();
    (0..m.dim)
        .map(|i| {
            v.iter()
                .enumerate()
                .try_fold(Scalar::zero(&basis), |acc, (j, s)| {
                    let e = m.get(i, j);
                    if e.is_zero() {
                        Ok(acc)
                    } else {
                        acc.checked_add(&s.scale(e))
                    }
                })
        })
        .collect()
}

pub fn commute(a: &IntMatrix, b: &IntMatrix) -> Result<bool> {
    a.commutes(b)
}

pub fn is_expanding(d: &IntMatrix) -> Result<bool> {
    d.is_expanding()
}
