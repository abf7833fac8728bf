//! Density of finite subsets of the torus.
//!
//! Closed subgroups of `𝕋^d` are annihilators of subgroups of `ℤ^d`, so a
//! finite set `S` lies in a proper closed subgroup iff some nonzero
//! `k ∈ ℤ^d` has `k·s ∈ ℤ` for every `s ∈ S`. Writing
//! `s = r_s + Σ_σ c_{s,σ}·σ`, declared independence of the symbols turns
//! this into `k ⟂ c_{s,σ}` for all `s, σ` plus `k·r_s ∈ ℤ`; the second part
//! can always be met by scaling. Hence `S` is dense iff the vectors
//! `c_{s,σ}` span `ℚ^d`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{IntMatrix, Scalar, TorusPoint};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityVerdict {
    pub dense: bool,
    /// Nonzero annihilating vector when the set is not dense.
    pub witness: Option<Vec<BigInt>>,
}

/// JSON shape of a condition check.
#[derive(Debug, Clone, Serialize)]
pub struct DensityReport {
    pub dense: bool,
    pub witness: Option<Vec<String>>,
    pub difference_set: Vec<Vec<String>>,
}

impl DensityReport {
    pub fn new(verdict: &DensityVerdict, set: &[TorusPoint]) -> Self {
        DensityReport {
            dense: verdict.dense,
            witness: verdict
                .witness
                .as_ref()
                .map(|k| k.iter().map(ToString::to_string).collect()),
            difference_set: set.iter().map(TorusPoint::to_strings).collect(),
        }
    }
}

/// `k·s` for an integer vector and a lift.
pub fn pair(k: &[BigInt], s: &TorusPoint) -> Result<Scalar> {
    let basis = s.basis().clone();
    k.iter()
        .zip(s.lift())
        .try_fold(Scalar::zero(&basis), |acc, (ki, si)| acc.checked_add(&si.mul_int(ki)))
}

/// True when `k·s ∈ ℤ` holds exactly for every `s`.
pub fn annihilates(k: &[BigInt], set: &[TorusPoint]) -> Result<bool> {
    for s in set {
        let v = pair(k, s)?;
        if !(v.is_rational() && v.rational_part().is_integer()) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn is_dense(set: &[TorusPoint]) -> Result<DensityVerdict> {
    let first = set.first().ok_or(Error::Empty("point set"))?;
    let d = first.dim();
    for s in set {
        if s.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: s.dim(),
            });
        }
        if !s.basis().same_as(first.basis()) {
            return Err(Error::BasisMismatch);
        }
    }
    let nsym = first.basis().len();
    // one row per (point, symbol): the irrational coefficient vector
    let mut rows: Vec<Vec<BigRational>> = Vec::new();
    for s in set {
        for sym in 0..nsym {
            let row: Vec<BigRational> = s
                .lift()
                .iter()
                .map(|c| c.irrational_coeffs()[sym].clone())
                .collect();
            if row.iter().any(|c| !c.is_zero()) {
                rows.push(row);
            }
        }
    }
    let Some(k) = integer_kernel_vector(&rows, d) else {
        return Ok(DensityVerdict {
            dense: true,
            witness: None,
        });
    };
    let scale = set.iter().try_fold(BigInt::one(), |acc, s| {
        let v = pair(&k, s)?;
        Ok::<_, Error>(acc.lcm(v.rational_part().denom()))
    })?;
    let witness: Vec<BigInt> = k.iter().map(|x| x * &scale).collect();
    debug_assert!(annihilates(&witness, set).unwrap_or(false));
    Ok(DensityVerdict {
        dense: false,
        witness: Some(witness),
    })
}

/// A primitive nonzero integer vector orthogonal to every row, or `None`
/// when the rows have full rank `d`.
///
/// Rows are cleared to integers and reduced fraction-free; each reduced row
/// is divided by the gcd of its entries to keep sizes down.
fn integer_kernel_vector(rows: &[Vec<BigRational>], d: usize) -> Option<Vec<BigInt>> {
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| {
            let den = r.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
            r.iter().map(|c| (c * &den).to_integer()).collect()
        })
        .collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0;
    for col in 0..d {
        let Some(p) = (row..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        for i in 0..m.len() {
            if i == row || m[i][col].is_zero() {
                continue;
            }
            let (a, b) = (m[row][col].clone(), m[i][col].clone());
            for j in 0..d {
                let v = &m[i][j] * &a - &m[row][j] * &b;
                m[i][j] = v;
            }
            primitive_in_place(&mut m[i]);
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    if pivots.len() == d {
        return None;
    }
    let free = (0..d).find(|c| !pivots.contains(c)).expect("rank < d");
    // reduced form: pivot rows only touch their pivot and the free columns
    let mut k = vec![BigRational::zero(); d];
    k[free] = BigRational::one();
    for (r, &pc) in pivots.iter().enumerate() {
        k[pc] = -BigRational::new(m[r][free].clone(), m[r][pc].clone());
    }
    let den = k.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let mut out: Vec<BigInt> = k.iter().map(|c| (c * &den).to_integer()).collect();
    primitive_in_place(&mut out);
    if out.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
        out.iter_mut().for_each(|x| *x = -x.clone());
    }
    Some(out)
}

fn primitive_in_place(v: &mut [BigInt]) {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && !g.is_one() {
        v.iter_mut().for_each(|x| *x = &*x / &g);
    }
}

/// `{(I - D_i)α_j - (I - D_j)α_i : i, j}`.
pub fn walk_difference_set(linear: &[IntMatrix], offsets: &[TorusPoint]) -> Result<Vec<TorusPoint>> {
    if linear.len() != offsets.len() {
        return Err(Error::InvalidArgument(format!(
            "{} matrices but {} offsets",
            linear.len(),
            offsets.len()
        )));
    }
    if linear.len() < 2 {
        return Err(Error::InvalidArgument("need at least two maps".into()));
    }
    let d = linear[0].dim();
    let id = IntMatrix::identity(d);
    let lifted: Vec<IntMatrix> = linear
        .iter()
        .map(|m| id.sub(m))
        .collect::<Result<_>>()?;
    let mut set = Vec::with_capacity(linear.len() * linear.len());
    for i in 0..linear.len() {
        for j in 0..linear.len() {
            let a = TorusPoint::new(lifted[i].apply(offsets[j].lift())?)?;
            let b = TorusPoint::new(lifted[j].apply(offsets[i].lift())?)?;
            set.push(a.checked_sub(&b)?);
        }
    }
    Ok(set)
}

/// Density of the walk condition for `h_i(x) = D_i x + α_i`.
pub fn condition_walk(linear: &[IntMatrix], offsets: &[TorusPoint]) -> Result<DensityVerdict> {
    for (i, a) in linear.iter().enumerate() {
        if !a.is_expanding()? {
            return Err(Error::NotExpanding);
        }
        for b in &linear[..i] {
            if !a.commutes(b)? {
                return Err(Error::NotCommuting);
            }
        }
    }
    is_dense(&walk_difference_set(linear, offsets)?)
}

/// `{D^{r_j} t_i - D^{r_i} t_j : i, j}`.
pub fn ifs_difference_set(d: &IntMatrix, r: &[u32], t: &[TorusPoint]) -> Result<Vec<TorusPoint>> {
    if r.len() != t.len() {
        return Err(Error::InvalidArgument(format!(
            "{} exponents but {} translations",
            r.len(),
            t.len()
        )));
    }
    if r.len() < 2 {
        return Err(Error::InvalidArgument("need at least two maps".into()));
    }
    let powers: Vec<IntMatrix> = r.iter().map(|&e| d.pow(e as u64)).collect();
    let mut set = Vec::with_capacity(r.len() * r.len());
    for i in 0..r.len() {
        for j in 0..r.len() {
            let a = TorusPoint::new(powers[j].apply(t[i].lift())?)?;
            let b = TorusPoint::new(powers[i].apply(t[j].lift())?)?;
            set.push(a.checked_sub(&b)?);
        }
    }
    Ok(set)
}

/// Density of the IFS condition for `f_i(x) = D^{-r_i}x + t_i`.
pub fn condition_ifs(d: &IntMatrix, r: &[u32], t: &[TorusPoint]) -> Result<DensityVerdict> {
    if !d.is_expanding()? {
        return Err(Error::NotExpanding);
    }
    is_dense(&ifs_difference_set(d, r, t)?)
}
