//! Exact walk trajectories and the identities tying the walk maps to the
//! coding map.

use crate::error::{Error, Result};
use crate::exact::{IntMatrix, Scalar, TorusPoint};

use super::ifs::{code_prefix, AffineEndo, AffineIFS, Word};

/// `h_{w_n} ∘ ⋯ ∘ h_{w_1}(x_0)` for `n = 1, …, len(w)`, reduced mod `ℤ^d`.
///
/// No expansion hypothesis is needed here; rotations are allowed.
pub fn walk_trajectory(endos: &[AffineEndo], x0: &TorusPoint, w: &Word) -> Result<Vec<TorusPoint>> {
    w.check_alphabet(endos.len())?;
    for e in endos {
        if e.dim() != x0.dim() {
            return Err(Error::DimensionMismatch {
                expected: x0.dim(),
                found: e.dim(),
            });
        }
    }
    let mut x = x0.reduced();
    let mut out = Vec::with_capacity(w.len());
    for &letter in w.letters() {
        x = endos[letter].apply(&x)?;
        out.push(x.clone());
    }
    Ok(out)
}

/// `h_{w_n} ∘ ⋯ ∘ h_{w_1}(0)` with `h_s(x) = D^{r_s}(x + t_s)`.
pub fn h_word_at_zero(ifs: &AffineIFS, w: &Word) -> Result<TorusPoint> {
    w.check_alphabet(ifs.len())?;
    let mut x = vec![Scalar::zero(ifs.basis()); ifs.dim()];
    for &s in w.letters() {
        let shifted: Vec<Scalar> = x
            .iter()
            .zip(ifs.translation(s))
            .map(|(a, b)| a.checked_add(b))
            .collect::<Result<_>>()?;
        x = ifs.power(s).apply(&shifted)?;
    }
    Ok(TorusPoint::new(x)?.reduced())
}

/// Both sides of `D_{w_1}⋯D_{w_n} π(w) = h_{w_n}∘⋯∘h_{w_1}(0) + π(T^n w)`
/// on the finite prefix `w`: the left side scales the coded prefix of the
/// whole word, the right side composes the walk maps and codes the tail.
/// The two are equal exactly modulo `ℤ^d`.
pub fn orbit_identity_check(ifs: &AffineIFS, w: &Word, n: usize) -> Result<(TorusPoint, TorusPoint)> {
    if n > w.len() {
        return Err(Error::InsufficientTruncation {
            len: w.len(),
            needed: n,
        });
    }
    let x = code_prefix(ifs, w)?;
    let product = w.letters()[..n]
        .iter()
        .try_fold(IntMatrix::identity(ifs.dim()), |acc, &s| acc.mul(ifs.power(s)))?;
    let lhs = TorusPoint::new(product.apply(&x)?)?.reduced();
    let head = h_word_at_zero(ifs, &w.prefix(n))?;
    let tail = TorusPoint::new(code_prefix(ifs, &w.shift(n))?)?;
    let rhs = head.checked_add(&tail)?.reduced();
    Ok((lhs, rhs))
}

/// The discrepancy between composing `h_ℓ, h_s` in the two orders after a
/// common prefix `j`:
/// `h_{j_1}∘⋯∘h_{j_m}∘h_ℓ∘h_s(x) − h_{j_1}∘⋯∘h_{j_m}∘h_s∘h_ℓ(x)`.
pub fn commutation_defect(
    endos: &[AffineEndo],
    prefix: &Word,
    l: usize,
    s: usize,
    x: &TorusPoint,
) -> Result<TorusPoint> {
    let compose = |first: usize, second: usize| -> Result<TorusPoint> {
        let mut y = endos[first].apply(x)?;
        y = endos[second].apply(&y)?;
        for &j in prefix.letters().iter().rev() {
            y = endos[j].apply(&y)?;
        }
        Ok(y)
    };
    prefix.check_alphabet(endos.len())?;
    // h_ℓ∘h_s applies h_s first
    let a = compose(s, l)?;
    let b = compose(l, s)?;
    Ok(a.checked_sub(&b)?.reduced())
}

/// `D_{j_1}⋯D_{j_m}((I − D_a)α_b − (I − D_b)α_a)`.
pub fn commutation_vector(endos: &[AffineEndo], prefix: &Word, a: usize, b: usize) -> Result<TorusPoint> {
    let d = endos[a].dim();
    let id = IntMatrix::identity(d);
    let left = id.sub(&endos[a].linear)?.apply(&endos[b].offset)?;
    let right = id.sub(&endos[b].linear)?.apply(&endos[a].offset)?;
    let mut v = TorusPoint::new(left)?.checked_sub(&TorusPoint::new(right)?)?;
    for &j in prefix.letters().iter().rev() {
        v = TorusPoint::new(endos[j].linear.apply(v.lift())?)?;
    }
    Ok(v.reduced())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::IrrationalBasis;
    use num_rational::BigRational;

    fn endo(b: &std::sync::Arc<IrrationalBasis>, m: i64, off: &str) -> AffineEndo {
        AffineEndo::new(
            IntMatrix::new(vec![vec![m]]).unwrap(),
            TorusPoint::parse(b, &[off]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn doubling_third() {
        let b = IrrationalBasis::rational();
        let h = vec![endo(&b, 2, "0")];
        let x0 = TorusPoint::parse(&b, &["1/3"]).unwrap();
        let tr = walk_trajectory(&h, &x0, &Word::new(vec![0, 0])).unwrap();
        assert_eq!(tr[0].to_strings(), vec!["2/3"]);
        assert_eq!(tr[1].to_strings(), vec!["1/3"]);
    }

    #[test]
    fn irrational_offsets() {
        let b = IrrationalBasis::from_names(&["sqrt2"]).unwrap();
        let h = vec![endo(&b, 2, "0"), endo(&b, 2, "sqrt2")];
        let x0 = TorusPoint::zero(&b, 1);
        let tr = walk_trajectory(&h, &x0, &Word::from_one_based(&[2, 1])).unwrap();
        assert_eq!(tr[0], TorusPoint::parse(&b, &["sqrt2"]).unwrap());
        assert_eq!(tr[1], TorusPoint::parse(&b, &["2*sqrt2"]).unwrap());
    }

    #[test]
    fn trajectories_concatenate() {
        let b = IrrationalBasis::from_names(&["sqrt2"]).unwrap();
        let h = vec![endo(&b, 2, "1/3"), endo(&b, 3, "sqrt2")];
        let x0 = TorusPoint::parse(&b, &["1/7"]).unwrap();
        let u = Word::new(vec![0, 1, 1]);
        let v = Word::new(vec![1, 0]);
        let whole = walk_trajectory(&h, &x0, &u.concat(&v)).unwrap();
        let first = walk_trajectory(&h, &x0, &u).unwrap();
        let second = walk_trajectory(&h, first.last().unwrap(), &v).unwrap();
        let joined: Vec<_> = first.into_iter().chain(second).collect();
        assert_eq!(whole, joined);
    }

    fn dilated_cantor() -> AffineIFS {
        let b = IrrationalBasis::from_names(&["sqrt2"]).unwrap();
        AffineIFS::new(
            IntMatrix::new(vec![vec![3]]).unwrap(),
            vec![1, 1],
            vec![
                TorusPoint::parse(&b, &["0"]).unwrap(),
                TorusPoint::parse(&b, &["2/3*sqrt2"]).unwrap(),
            ],
            vec![BigRational::new(1.into(), 2.into()); 2],
        )
        .unwrap()
    }

    #[test]
    fn single_step_at_zero() {
        let ifs = dilated_cantor();
        let b = ifs.basis().clone();
        assert_eq!(h_word_at_zero(&ifs, &Word::default()).unwrap(), TorusPoint::zero(&b, 1));
        let v = h_word_at_zero(&ifs, &Word::from_one_based(&[2])).unwrap();
        assert_eq!(v, TorusPoint::parse(&b, &["2*sqrt2"]).unwrap());
    }

    #[test]
    fn orbit_identity_small_cases() {
        let ifs = dilated_cantor();
        let w = Word::from_one_based(&[2, 1, 2, 2, 1]);
        for n in 0..=w.len() {
            let (l, r) = orbit_identity_check(&ifs, &w, n).unwrap();
            assert_eq!(l, r, "n = {n}");
        }
        let (l, _) = orbit_identity_check(&ifs, &w, 0).unwrap();
        assert_eq!(l, TorusPoint::new(code_prefix(&ifs, &w).unwrap()).unwrap());
        assert!(matches!(
            orbit_identity_check(&ifs, &w, 6),
            Err(Error::InsufficientTruncation { .. })
        ));
    }

    #[test]
    fn swapped_order_sign() {
        let b = IrrationalBasis::from_names(&["sqrt2"]).unwrap();
        let h = vec![endo(&b, 2, "0"), endo(&b, 3, "sqrt2")];
        let x = TorusPoint::parse(&b, &["1/5"]).unwrap();
        // h_1∘h_2(x) − h_2∘h_1(x) = 2(3x + √2) − 6x − √2 = √2
        let defect = commutation_defect(&h, &Word::default(), 0, 1, &x).unwrap();
        assert_eq!(defect, TorusPoint::parse(&b, &["sqrt2"]).unwrap());
        assert_eq!(defect, commutation_vector(&h, &Word::default(), 1, 0).unwrap());
        assert_ne!(defect, commutation_vector(&h, &Word::default(), 0, 1).unwrap());
    }
}
