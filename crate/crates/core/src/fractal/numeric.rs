//! High-precision fixed-point orbits.
//!
//! Exact scalar orbits grow by `log2‖D‖` bits per step, and so do the
//! numbers needed to evaluate them. The engine here instead holds each
//! coordinate as an integer multiple of `2^-p` and lowers `p` as the orbit
//! proceeds: after step `n` only `Σ_{j>n} log2‖D_{w_j}‖_∞ + guard` bits can
//! still influence later points. Errors are tracked in units of the current
//! last place, in the sup norm.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::{pow2, scaled_to_f64, Approx, IntMatrix, Scalar, TorusPoint};

use super::ifs::{AffineEndo, AffineIFS, Word};

/// A torus point known to `prec` bits: coordinate `i` is
/// `coords[i] / 2^prec ∈ [0, 1)`, and the true point lies within
/// `err_ulps / 2^prec` in every coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    coords: Vec<BigInt>,
    prec: u32,
    err_ulps: f64,
}

impl FixedPoint {
    pub fn from_torus_point(x: &TorusPoint, prec: u32) -> Self {
        let (coords, err) = lift_to_prec(x.lift(), prec);
        let one = pow2(prec);
        FixedPoint {
            coords: coords.into_iter().map(|c| c.mod_floor(&one)).collect(),
            prec,
            err_ulps: err,
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn err_ulps(&self) -> f64 {
        self.err_ulps
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    /// Error radius in absolute terms.
    pub fn error(&self) -> f64 {
        self.err_ulps * 2f64.powi(-(self.prec.min(1070) as i32))
    }

    /// Coordinates rounded to `f64`; the rounding adds at most `2^-53`.
    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(|c| scaled_to_f64(c, self.prec)).collect()
    }

    /// Drops to `prec` bits, adding one ulp of truncation error.
    pub fn truncate(&mut self, prec: u32) {
        if prec >= self.prec {
            return;
        }
        let shift = self.prec - prec;
        for c in &mut self.coords {
            *c = &*c >> shift as usize;
        }
        self.err_ulps = self.err_ulps * 2f64.powi(-(shift.min(1000) as i32)) + 1.0;
        self.prec = prec;
    }
}

fn approx_to_prec(a: &Approx, prec: u32) -> (BigInt, f64) {
    let err = a.err_ulps().to_f64().unwrap_or(f64::INFINITY);
    if a.prec() >= prec {
        let shift = a.prec() - prec;
        let m = a.mantissa() >> shift as usize;
        let e = if shift == 0 {
            err
        } else {
            err * 2f64.powi(-(shift.min(1000) as i32)) + 1.0
        };
        (m, e)
    } else {
        let shift = prec - a.prec();
        (a.mantissa() << shift as usize, err * 2f64.powi(shift as i32))
    }
}

/// Mantissas of a lift at precision `prec` (not reduced), with the largest
/// coordinate error in ulps.
fn lift_to_prec(x: &[Scalar], prec: u32) -> (Vec<BigInt>, f64) {
    let mut err: f64 = 0.0;
    let coords = x
        .iter()
        .map(|s| {
            let (m, e) = approx_to_prec(&s.evaluate(prec), prec);
            err = err.max(e);
            m
        })
        .collect();
    (coords, err)
}

/// What the visitor sees after each step.
#[derive(Debug)]
pub struct OrbitStep<'a> {
    /// 1-based step index.
    pub index: usize,
    pub letter: usize,
    pub point: &'a FixedPoint,
    /// `⌊D x + α⌋` coordinatewise, before reduction.
    pub integer_parts: &'a [BigInt],
    /// True when the error interval of some coordinate contains an integer,
    /// so `integer_parts` is not certified.
    pub straddles: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSummary {
    pub steps: usize,
    pub initial_precision: u32,
    /// Largest absolute error of any visited point (excluding `f64`
    /// rounding).
    pub max_error: f64,
}

struct EngineMap {
    rows: Vec<Vec<i64>>,
    growth: f64,
    offset: Option<(Vec<BigInt>, f64)>,
}

/// Starting data for [`run_orbit`].
pub enum OrbitStart<'a> {
    Exact(&'a TorusPoint),
    Fixed(FixedPoint),
}

/// Bits of precision needed after each step of `word`, plus the starting
/// precision in slot 0.
pub fn precision_schedule(maps: &[AffineEndo], word: &Word, guard: u32) -> Vec<u32> {
    let bits: Vec<f64> = maps.iter().map(|m| m.linear.inf_norm().max(1.0).log2()).collect();
    let mut remaining: f64 = 0.0;
    let mut out = vec![0u32; word.len() + 1];
    for n in (0..=word.len()).rev() {
        out[n] = remaining.ceil() as u32 + guard;
        if n > 0 {
            remaining += bits[word.letters()[n - 1]];
        }
    }
    out
}

/// Runs `x_n = h_{w_n}(x_{n-1})` in fixed point, calling `visit` after each
/// step.
pub fn run_orbit<F>(maps: &[AffineEndo], start: OrbitStart<'_>, word: &Word, guard: u32, mut visit: F) -> Result<OrbitSummary>
where
    F: FnMut(OrbitStep<'_>) -> Result<()>,
{
    word.check_alphabet(maps.len())?;
    let schedule = precision_schedule(maps, word, guard);
    let p0 = schedule[0];
    let mut state = match start {
        OrbitStart::Exact(x) => FixedPoint::from_torus_point(x, p0),
        OrbitStart::Fixed(mut f) => {
            if f.prec < p0 {
                return Err(Error::PrecisionExceeded(format!(
                    "start point has {} bits, orbit needs {p0}",
                    f.prec
                )));
            }
            f.truncate(p0);
            f
        }
    };
    let d = state.dim();
    let one0 = pow2(p0);
    let engine: Vec<EngineMap> = maps
        .iter()
        .map(|m| {
            if m.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: m.dim(),
                });
            }
            let rows = m.linear.rows_i64().ok_or_else(|| {
                Error::InvalidArgument("matrix entries exceed 64 bits".into())
            })?;
            let offset = if m.offset.iter().all(Scalar::is_zero) {
                None
            } else {
                let (c, e) = lift_to_prec(&m.offset, p0);
                Some((c.into_iter().map(|v| v.mod_floor(&one0)).collect(), e))
            };
            Ok(EngineMap {
                rows,
                growth: m.linear.inf_norm(),
                offset,
            })
        })
        .collect::<Result<_>>()?;

    let mut max_error: f64 = 0.0;
    let mut integer_parts = vec![BigInt::zero(); d];
    for (n, &letter) in word.letters().iter().enumerate() {
        let map = &engine[letter];
        let p = state.prec;
        let mut next: Vec<BigInt> = map
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&state.coords)
                    .filter(|(a, _)| **a != 0)
                    .map(|(a, c)| c * *a)
                    .sum()
            })
            .collect();
        let mut err = map.growth * state.err_ulps;
        if let Some((offset, off_err)) = &map.offset {
            let shift = p0 - p;
            for (v, o) in next.iter_mut().zip(offset) {
                *v += o >> shift as usize;
            }
            err += if shift == 0 {
                *off_err
            } else {
                off_err * 2f64.powi(-(shift.min(1000) as i32)) + 1.0
            };
        }
        let one = pow2(p);
        let err_int = BigInt::from(err.ceil() as u64 + 1);
        let mut straddles = false;
        for (v, ip) in next.iter_mut().zip(integer_parts.iter_mut()) {
            *ip = &*v >> p as usize;
            *v -= &*ip << p as usize;
            if *v < err_int || (&one - &*v) <= err_int {
                straddles = true;
            }
        }
        state.coords = next;
        state.err_ulps = err;
        state.truncate(schedule[n + 1]);
        max_error = max_error.max(state.error());
        visit(OrbitStep {
            index: n + 1,
            letter,
            point: &state,
            integer_parts: &integer_parts,
            straddles,
        })?;
    }
    Ok(OrbitSummary {
        steps: word.len(),
        initial_precision: p0,
        max_error,
    })
}

/// `log2` of [`coding_tail_bound`](super::coding_tail_bound), usable where
/// the bound itself underflows.
pub fn coding_tail_log2(ifs: &AffineIFS, n: usize) -> f64 {
    ifs.attractor_radius().log2() + n as f64 * ifs.contraction_factor().log2()
}

/// Shortest prefix whose coding tail is below `2^-(prec+1)` in the sup norm.
pub fn tail_length_for(ifs: &AffineIFS, prec: u32) -> usize {
    let c = ifs.adapted_norm().sup_norm_constant().max(1.0).log2();
    let r = ifs.attractor_radius().max(1e-300).log2();
    let per = -ifs.contraction_factor().log2();
    (((prec as f64 + 1.0 + r + c) / per).ceil()).max(0.0) as usize
}

/// `π(w·…)` mod `ℤ^d` to `prec` bits, for any infinite continuation of `w`.
///
/// The prefix is coded by fixed-point Horner steps
/// `y ← ⌊adj(D^{r})·y / det(D^{r})⌋ + t`; the unknown tail contributes at
/// most the coding tail bound, which must be below `2^-(prec+1)`.
pub fn ifs_point_fixed(ifs: &AffineIFS, w: &Word, prec: u32) -> Result<FixedPoint> {
    w.check_alphabet(ifs.len())?;
    let needed = tail_length_for(ifs, prec);
    if w.len() < needed {
        return Err(Error::InsufficientTruncation {
            len: w.len(),
            needed,
        });
    }
    let k = ifs.len();
    let mut inverse_growth: f64 = 0.0;
    let mut steps = Vec::with_capacity(k);
    for i in 0..k {
        let power = ifs.power(i);
        let det = power.det();
        let adj = power.adjugate()?;
        let g = adj.inf_norm() / det.abs().to_f64().unwrap_or(f64::INFINITY);
        inverse_growth = inverse_growth.max(g);
        steps.push((adj, det));
    }
    let extra = (w.len() as f64 * inverse_growth.max(1.0).log2()).ceil() as u32 + 16;
    let wp = prec + extra;
    let translations: Vec<(Vec<BigInt>, f64)> = (0..k)
        .map(|i| lift_to_prec(ifs.translation(i), wp))
        .collect();
    let d = ifs.dim();
    let mut y = vec![BigInt::zero(); d];
    let mut err = 0.0;
    for &letter in w.letters().iter().rev() {
        let (adj, det) = &steps[letter];
        let scaled = adj.apply_int(&y);
        let (t, t_err) = &translations[letter];
        y = scaled
            .iter()
            .zip(t)
            .map(|(v, ti)| v.div_floor(det) + ti)
            .collect();
        err = inverse_growth * err + 1.0 + t_err;
    }
    let one = pow2(wp);
    let mut out = FixedPoint {
        coords: y.into_iter().map(|c| c.mod_floor(&one)).collect(),
        prec: wp,
        err_ulps: err,
    };
    out.truncate(prec);
    // the tail adds less than half an ulp at `prec`
    out.err_ulps += 0.5;
    Ok(out)
}

/// `h(x) = D x` as a single-map walk, for orbits of attractor points.
pub fn linear_map(d: &IntMatrix, basis: &std::sync::Arc<crate::exact::IrrationalBasis>) -> Result<AffineEndo> {
    AffineEndo::new(d.clone(), TorusPoint::zero(basis, d.dim()))
}
