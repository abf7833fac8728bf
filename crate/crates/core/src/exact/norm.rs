//! A norm in which every matrix of a commuting expanding family expands by
//! a uniform factor.
//!
//! The family is put in simultaneous upper-triangular form by a unitary
//! change of basis `Q` (Schur form of a generic linear combination). In the
//! triangular coordinates `y = Q^H x` the norm is
//! `max_i m^(i-1) |y_i|` with `m` the smallest integer exceeding
//! `d·a/(λ-1)`, where `λ` is the smallest eigenvalue modulus and `a` the
//! largest entry modulus over the triangularized family.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use super::matrix::IntMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_SPHERE_SAMPLES: usize = 4096;

const TRIANGULAR_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct AdaptedNorm {
    dim: usize,
    change_of_basis: DMatrix<Complex64>,
    triangular: Vec<DMatrix<Complex64>>,
    m: u64,
    weights: Vec<f64>,
    lambda: f64,
    max_entry: f64,
    residual: f64,
    rho: f64,
    rho_lower: f64,
    sample_size: usize,
}

impl AdaptedNorm {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Unitary `Q`; triangular coordinates are `Q^H x`.
    pub fn change_of_basis(&self) -> &DMatrix<Complex64> {
        &self.change_of_basis
    }

    pub fn triangular_forms(&self) -> &[DMatrix<Complex64>] {
        &self.triangular
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn min_eigenvalue_modulus(&self) -> f64 {
        self.lambda
    }

    pub fn max_entry_modulus(&self) -> f64 {
        self.max_entry
    }

    /// Size of the strictly lower part left by the numeric triangularization.
    pub fn triangularization_residual(&self) -> f64 {
        self.residual
    }

    /// Minimum of `‖Ax‖/‖x‖` over the sphere sample; advisory.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Lower bound `λ - a(d-1)/m - (residual terms)` valid for every
    /// vector; strictly greater than one.
    pub fn rho_lower(&self) -> f64 {
        self.rho_lower
    }

    pub fn sample_size(&self) -> usize {
        self.sample_size
    }

    pub fn norm(&self, x: &[Complex64]) -> f64 {
        let v = DMatrix::from_column_slice(self.dim, 1, x);
        let y = self.change_of_basis.adjoint() * v;
        self.triangular_norm(y.as_slice())
    }

    pub fn norm_real(&self, x: &[f64]) -> f64 {
        let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.norm(&z)
    }

    fn triangular_norm(&self, y: &[Complex64]) -> f64 {
        y.iter()
            .zip(&self.weights)
            .map(|(c, w)| c.norm() * w)
            .fold(0.0, f64::max)
    }

    /// `C` with `‖x‖_∞ ≤ C‖x‖` for every `x`.
    pub fn sup_norm_constant(&self) -> f64 {
        let q = &self.change_of_basis;
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| q[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `‖Ax‖ / ‖x‖` for the `index`-th matrix of the family.
    pub fn ratio(&self, index: usize, x: &[Complex64]) -> f64 {
        let q = &self.change_of_basis;
        let y = q.adjoint() * DMatrix::from_column_slice(self.dim, 1, x);
        let ay = &self.triangular[index] * &y;
        self.triangular_norm(ay.as_slice()) / self.triangular_norm(y.as_slice())
    }

    /// Deterministic unit vectors (in this norm) from a Halton sequence
    /// pushed through Box–Muller.
    pub fn sphere_sample(&self, n: usize) -> Vec<Vec<Complex64>> {
        sphere_points(self.dim, n)
            .into_iter()
            .map(|x| {
                let r = self.norm(&x);
                x.into_iter().map(|c| c / r).collect()
            })
            .collect()
    }

    /// Checks `‖Ax‖ ≥ rho·‖x‖` for every matrix and every sample point.
    pub fn check_samples(&self, samples: &[Vec<Complex64>], rho: f64) -> bool {
        samples.iter().all(|x| {
            (0..self.triangular.len()).all(|k| self.ratio(k, x) >= rho * (1.0 - 1e-12))
        })
    }
}

/// Builds the norm for a commuting family of expanding integer matrices.
pub fn adapted_norm(matrices: &[IntMatrix]) -> Result<AdaptedNorm> {
    adapted_norm_with_samples(matrices, DEFAULT_SPHERE_SAMPLES)
}

pub fn adapted_norm_with_samples(matrices: &[IntMatrix], samples: usize) -> Result<AdaptedNorm> {
    let first = matrices.first().ok_or(Error::Empty("matrix family"))?;
    let d = first.dim();
    for (i, a) in matrices.iter().enumerate() {
        if a.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: a.dim(),
            });
        }
        if !a.is_expanding()? {
            return Err(Error::NotExpanding);
        }
        for b in &matrices[..i] {
            if !a.commutes(b)? {
                return Err(Error::NotCommuting);
            }
        }
    }
    let complex: Vec<DMatrix<Complex64>> = matrices
        .iter()
        .map(|a| a.to_f64().map(|v| Complex64::new(v, 0.0)))
        .collect();
    let scale = complex
        .iter()
        .flat_map(|a| a.iter().map(|c| c.norm()))
        .fold(1.0, f64::max);

    let (q, triangular, residual) = simultaneous_schur(&complex, scale)?;

    let lambda = triangular
        .iter()
        .flat_map(|t| (0..d).map(move |i| t[(i, i)].norm()))
        .fold(f64::INFINITY, f64::min);
    let max_entry = triangular
        .iter()
        .flat_map(|t| t.iter().map(|c| c.norm()))
        .fold(0.0, f64::max);
    let bound = d as f64 * max_entry / (lambda - 1.0);
    let m = (bound + 1e-9).floor() as u64 + 1;
    let weights: Vec<f64> = (0..d).map(|i| (m as f64).powi(i as i32)).collect();
    let rho_lower = lambda
        - max_entry * (d as f64 - 1.0) / m as f64
        - residual * d as f64 * (m as f64).powi(d as i32 - 1);
    if rho_lower <= 1.0 {
        return Err(Error::Triangularization(residual));
    }

    let mut norm = AdaptedNorm {
        dim: d,
        change_of_basis: q,
        triangular,
        m,
        weights,
        lambda,
        max_entry,
        residual,
        rho: f64::INFINITY,
        rho_lower,
        sample_size: samples,
    };
    let pts = sphere_points(d, samples);
    norm.rho = pts
        .iter()
        .flat_map(|x| (0..matrices.len()).map(|k| norm.ratio(k, x)).collect::<Vec<_>>())
        .fold(f64::INFINITY, f64::min);
    Ok(norm)
}

type SchurResult = (DMatrix<Complex64>, Vec<DMatrix<Complex64>>, f64);

/// Schur basis of a generic combination triangularizes every member of a
/// commuting family when the combination has simple spectrum; a few
/// deterministic combinations are tried.
fn simultaneous_schur(family: &[DMatrix<Complex64>], scale: f64) -> Result<SchurResult> {
    let d = family[0].nrows();
    let mut best = f64::INFINITY;
    for attempt in 0..8u32 {
        let mut c = DMatrix::<Complex64>::zeros(d, d);
        for (k, a) in family.iter().enumerate() {
            let t = (attempt as f64 + 1.0) * (k as f64 + 1.0);
            let coef = Complex64::new(
                1.0 + (t * 0.618_033_988_749_895).fract(),
                (t * 0.414_213_562_373_095).fract(),
            );
            c += a * coef;
        }
        let (q, _) = Schur::new(c).unpack();
        let triangular: Vec<DMatrix<Complex64>> =
            family.iter().map(|a| q.adjoint() * a * &q).collect();
        let residual = triangular
            .iter()
            .flat_map(|t| {
                (0..d).flat_map(move |i| (0..i).map(move |j| t[(i, j)].norm()))
            })
            .fold(0.0, f64::max);
        if residual <= TRIANGULAR_TOLERANCE * scale {
            return Ok((q, triangular, residual));
        }
        best = best.min(residual);
    }
    Err(Error::Triangularization(best))
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Deterministic nonzero vectors of `ℂ^d` spread over all directions.
pub(crate) fn sphere_points(d: usize, n: usize) -> Vec<Vec<Complex64>> {
    assert!(2 * d <= PRIMES.len(), "sphere sample supports d <= 8");
    (1..=n as u64)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let u1 = radical_inverse(i, PRIMES[2 * j]).max(1e-300);
                    let u2 = radical_inverse(i, PRIMES[2 * j + 1]);
                    let r = (-2.0 * u1.ln()).sqrt();
                    let th = 2.0 * std::f64::consts::PI * u2;
                    Complex64::new(r * th.cos(), r * th.sin())
                })
                .collect()
        })
        .collect()
}
