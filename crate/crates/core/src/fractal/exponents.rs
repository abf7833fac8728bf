//! Bookkeeping for systems with unequal exponents `r_i`.
//!
//! With `r = max r_i` and `D̄ = D^r`, a prefix `i_1 … i_n` determines
//! `ℓ = ⌈(r_{i_1} + ⋯ + r_{i_n}) / r⌉` and `s = rℓ − Σ r_{i_j} ∈ {0, …, r−1}`
//! so that `D̄^ℓ = D^{r_{i_1}} ⋯ D^{r_{i_n}} D^s`. Modulo `r`, `s` is a
//! morphism of the free monoid to the cyclic group `C_r`.

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::exact::IntMatrix;

use super::ifs::Word;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EllS {
    pub ell: u64,
    pub s: u64,
}

fn max_exponent(r: &[u32]) -> Result<u64> {
    r.iter()
        .copied()
        .max()
        .filter(|&m| m > 0)
        .map(u64::from)
        .ok_or_else(|| Error::InvalidArgument("exponent list must be nonempty and positive".into()))
}

fn exponent_sum(r: &[u32], w: &Word) -> Result<u64> {
    w.check_alphabet(r.len())?;
    Ok(w.letters().iter().map(|&l| u64::from(r[l])).sum())
}

pub fn kappa_ell_s(r: &[u32], w: &Word) -> Result<EllS> {
    let top = max_exponent(r)?;
    let sum = exponent_sum(r, w)?;
    let ell = sum.div_ceil(top);
    Ok(EllS {
        ell,
        s: top * ell - sum,
    })
}

/// `κ(w) ∈ C_r`: the class of `−Σ r_{w_j}` modulo `r`.
pub fn kappa(r: &[u32], w: &Word) -> Result<u64> {
    let top = max_exponent(r)?;
    let sum = exponent_sum(r, w)?;
    Ok((top - sum % top) % top)
}

/// Both sides of `D̄^ℓ = D^{r_{i_1}} ⋯ D^{r_{i_n}} · D^s`, computed
/// independently as integer matrices.
pub fn power_identity(d: &IntMatrix, r: &[u32], w: &Word) -> Result<(IntMatrix, IntMatrix)> {
    let EllS { ell, s } = kappa_ell_s(r, w)?;
    let top = max_exponent(r)?;
    let lhs = d.pow(top).pow(ell);
    let rhs = w
        .letters()
        .iter()
        .try_fold(IntMatrix::identity(d.dim()), |acc, &l| acc.mul(&d.pow(u64::from(r[l]))))?
        .mul(&d.pow(s))?;
    Ok((lhs, rhs))
}

/// `ℓ_m` for every prefix length `m = 0, …, len(w)`.
pub fn ell_sequence(r: &[u32], w: &Word) -> Result<Vec<u64>> {
    let top = max_exponent(r)?;
    w.check_alphabet(r.len())?;
    let mut sum = 0u64;
    let mut out = vec![0];
    for &l in w.letters() {
        sum += u64::from(r[l]);
        out.push(sum.div_ceil(top));
    }
    Ok(out)
}

/// `t(n) = 1 / |{m ≥ 1 : ℓ_m = ℓ_n}|`.
///
/// A value of `ℓ` repeats over at most `r` consecutive indices, so only
/// letters within distance `r` of `n` matter; the word must extend that far.
pub fn repetition_weight(r: &[u32], w: &Word, n: usize) -> Result<BigRational> {
    if n == 0 {
        return Err(Error::InvalidArgument("index must be at least 1".into()));
    }
    let top = max_exponent(r)? as usize;
    let needed = n + top;
    if w.len() < needed {
        return Err(Error::InsufficientTruncation {
            len: w.len(),
            needed,
        });
    }
    let ells = ell_sequence(r, &w.prefix(needed))?;
    let target = ells[n];
    let lo = n.saturating_sub(top).max(1);
    let count = (lo..=needed).filter(|&m| ells[m] == target).count();
    Ok(BigRational::new(1.into(), (count as i64).into()))
}

/// Guard-inclusive bit budget for `n` steps of an orbit under `D`:
/// `⌈n·log2‖D‖_∞·d⌉ + 64`.
pub fn precision_budget(d: &IntMatrix, n: usize) -> u32 {
    let growth = d.inf_norm().max(1.0).log2() * d.dim() as f64;
    (n as f64 * growth).ceil() as u32 + 64
}
