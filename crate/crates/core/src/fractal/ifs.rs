use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rand::Rng;

use crate::error::{Error, Result};
use crate::exact::{adapted_norm, AdaptedNorm, IntMatrix, IrrationalBasis, RatMatrix, Scalar, TorusPoint};

/// A finite word over the alphabet `{0, …, k-1}` (letter `i` stands for the
/// map numbered `i + 1`).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn new(letters: Vec<usize>) -> Self {
        Word(letters)
    }

    /// Converts 1-based map numbers.
    pub fn from_one_based(letters: &[usize]) -> Self {
        Word(letters.iter().map(|&l| l - 1).collect())
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.0.len())].to_vec())
    }

    /// The shifted word `T^n w`.
    pub fn shift(&self, n: usize) -> Word {
        Word(self.0[n.min(self.0.len())..].to_vec())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|l| l + 1).collect()
    }

    pub(crate) fn check_alphabet(&self, k: usize) -> Result<()> {
        match self.0.iter().find(|&&l| l >= k) {
            Some(l) => Err(Error::InvalidArgument(format!(
                "letter {} outside alphabet of size {k}",
                l + 1
            ))),
            None => Ok(()),
        }
    }
}

/// `x ↦ linear·x + offset` on the torus.
#[derive(Debug, Clone)]
pub struct AffineEndo {
    pub linear: IntMatrix,
    pub offset: Vec<Scalar>,
}

impl AffineEndo {
    pub fn new(linear: IntMatrix, offset: TorusPoint) -> Result<Self> {
        if linear.dim() != offset.dim() {
            return Err(Error::DimensionMismatch {
                expected: linear.dim(),
                found: offset.dim(),
            });
        }
        Ok(AffineEndo {
            linear,
            offset: offset.into_lift(),
        })
    }

    pub fn dim(&self) -> usize {
        self.linear.dim()
    }

    /// Applies the map to a lift without reducing modulo `ℤ^d`.
    pub fn apply_lift(&self, x: &[Scalar]) -> Result<Vec<Scalar>> {
        self.linear
            .apply(x)?
            .iter()
            .zip(&self.offset)
            .map(|(a, b)| a.checked_add(b))
            .collect()
    }

    pub fn apply(&self, x: &TorusPoint) -> Result<TorusPoint> {
        Ok(TorusPoint::new(self.apply_lift(x.lift())?)?.reduced())
    }

    pub fn offset_point(&self) -> TorusPoint {
        TorusPoint::new(self.offset.clone()).expect("nonempty offset")
    }
}

/// The contracting system `f_i(x) = D^{-r_i} x + t_i` with Bernoulli
/// weights `P_i`.
#[derive(Debug, Clone)]
pub struct AffineIFS {
    basis: Arc<IrrationalBasis>,
    expansion: IntMatrix,
    exponents: Vec<u32>,
    translations: Vec<Vec<Scalar>>,
    probabilities: Vec<BigRational>,
    folded_power: u32,
    powers: Vec<IntMatrix>,
    inverse_powers: Vec<RatMatrix>,
    norm: OnceLock<AdaptedNorm>,
}

impl AffineIFS {
    /// Validates the system. When `g = gcd(r_i) > 1` the system is rewritten
    /// with `D^g` and `r_i / g`; the maps themselves are unchanged.
    pub fn new(
        expansion: IntMatrix,
        exponents: Vec<u32>,
        translations: Vec<TorusPoint>,
        probabilities: Vec<BigRational>,
    ) -> Result<Self> {
        let k = exponents.len();
        if k == 0 {
            return Err(Error::Empty("iterated function system"));
        }
        if translations.len() != k || probabilities.len() != k {
            return Err(Error::InvalidArgument(format!(
                "{k} exponents, {} translations, {} probabilities",
                translations.len(),
                probabilities.len()
            )));
        }
        if exponents.contains(&0) {
            return Err(Error::InvalidArgument("exponents must be positive".into()));
        }
        if probabilities.iter().any(|p| !p.is_positive()) {
            return Err(Error::InvalidArgument("probabilities must be positive".into()));
        }
        if probabilities.iter().sum::<BigRational>() != BigRational::one() {
            return Err(Error::InvalidArgument("probabilities must sum to 1".into()));
        }
        let d = expansion.dim();
        let basis = translations[0].basis().clone();
        for t in &translations {
            if t.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: t.dim(),
                });
            }
            if !t.basis().same_as(&basis) {
                return Err(Error::BasisMismatch);
            }
        }
        if !expansion.is_expanding()? {
            return Err(Error::NotExpanding);
        }
        let g = exponents.iter().fold(0u32, |acc, &r| acc.gcd(&r));
        let (expansion, exponents) = if g > 1 {
            log::info!("exponents share the factor {g}; using D^{g} and r_i/{g}");
            (
                expansion.pow(g as u64),
                exponents.iter().map(|r| r / g).collect(),
            )
        } else {
            (expansion, exponents)
        };
        let powers: Vec<IntMatrix> = exponents.iter().map(|&r| expansion.pow(r as u64)).collect();
        let inverse_powers = powers
            .iter()
            .map(IntMatrix::inverse)
            .collect::<Result<Vec<_>>>()?;
        Ok(AffineIFS {
            basis,
            expansion,
            exponents,
            translations: translations.into_iter().map(TorusPoint::into_lift).collect(),
            probabilities,
            folded_power: g.max(1),
            powers,
            inverse_powers,
            norm: OnceLock::new(),
        })
    }

    pub fn basis(&self) -> &Arc<IrrationalBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.expansion.dim()
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn expansion(&self) -> &IntMatrix {
        &self.expansion
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn translation(&self, i: usize) -> &[Scalar] {
        &self.translations[i]
    }

    pub fn translation_points(&self) -> Vec<TorusPoint> {
        self.translations
            .iter()
            .map(|t| TorusPoint::new(t.clone()).expect("nonempty"))
            .collect()
    }

    pub fn probabilities(&self) -> &[BigRational] {
        &self.probabilities
    }

    /// The factor `g` folded into `D` at construction (1 if none).
    pub fn folded_power(&self) -> u32 {
        self.folded_power
    }

    /// `D^{r_i}`.
    pub fn power(&self, i: usize) -> &IntMatrix {
        &self.powers[i]
    }

    /// `D^{-r_i}`.
    pub fn inverse_power(&self, i: usize) -> &RatMatrix {
        &self.inverse_powers[i]
    }

    pub fn adapted_norm(&self) -> &AdaptedNorm {
        self.norm.get_or_init(|| {
            adapted_norm(std::slice::from_ref(&self.expansion)).expect("D was checked expanding")
        })
    }

    /// `f_i` applied to a lift.
    pub fn apply(&self, i: usize, x: &[Scalar]) -> Result<Vec<Scalar>> {
        crate::exact::mat_apply(&self.inverse_powers[i], x)?
            .iter()
            .zip(&self.translations[i])
            .map(|(a, b)| a.checked_add(b))
            .collect()
    }

    /// The walk maps `h_s(x) = D^{r_s}(x + t_s)`.
    pub fn walk_maps(&self) -> Result<Vec<AffineEndo>> {
        (0..self.len())
            .map(|s| {
                let offset = self.powers[s].apply(&self.translations[s])?;
                AffineEndo::new(self.powers[s].clone(), TorusPoint::new(offset)?)
            })
            .collect()
    }

    /// `max_i ‖t_i‖ / (1 - ρ^{-min r})`: every attractor point has adapted
    /// norm at most this.
    pub fn attractor_radius(&self) -> f64 {
        let norm = self.adapted_norm();
        let max_t = self
            .translations
            .iter()
            .map(|t| {
                let v: Vec<f64> = t.iter().map(Scalar::to_f64).collect();
                norm.norm_real(&v)
            })
            .fold(0.0, f64::max)
            * (1.0 + 1e-12);
        let min_r = *self.exponents.iter().min().expect("nonempty") as i32;
        max_t / (1.0 - norm.rho_lower().powi(-min_r))
    }

    /// `ρ^{-min r}`: each `f_i` contracts the adapted norm by at least this
    /// factor.
    pub fn contraction_factor(&self) -> f64 {
        let min_r = *self.exponents.iter().min().expect("nonempty") as i32;
        self.adapted_norm().rho_lower().powi(-min_r)
    }
}

/// `f_{w_1} ∘ ⋯ ∘ f_{w_n}(0)`, exactly.
pub fn code_prefix(ifs: &AffineIFS, w: &Word) -> Result<Vec<Scalar>> {
    w.check_alphabet(ifs.len())?;
    let mut y = vec![Scalar::zero(ifs.basis()); ifs.dim()];
    for &letter in w.letters().iter().rev() {
        y = ifs.apply(letter, &y)?;
    }
    Ok(y)
}

/// Upper bound on the adapted-norm distance between `π(i)` and the coded
/// prefix of length `n`: `R·ρ^{-n·min r}`.
pub fn coding_tail_bound(ifs: &AffineIFS, n: usize) -> f64 {
    ifs.attractor_radius() * ifs.contraction_factor().powi(n.min(i32::MAX as usize) as i32)
}

/// `n` independent letters with law `P`, drawn exactly from the common
/// denominator of the weights.
pub fn sample_word<R: Rng + ?Sized>(ifs: &AffineIFS, rng: &mut R, n: usize) -> Word {
    sample_letters(ifs.probabilities(), rng, n)
}

pub(crate) fn sample_letters<R: Rng + ?Sized>(probs: &[BigRational], rng: &mut R, n: usize) -> Word {
    let den = probs.iter().fold(BigInt::one(), |acc, p| acc.lcm(p.denom()));
    match den.to_u64() {
        Some(q) => {
            let cumulative: Vec<u64> = probs
                .iter()
                .scan(0u64, |acc, p| {
                    *acc += (p * BigRational::from_integer(den.clone()))
                        .to_integer()
                        .to_u64()
                        .expect("weight fits");
                    Some(*acc)
                })
                .collect();
            Word(
                (0..n)
                    .map(|_| {
                        let u = rng.gen_range(0..q);
                        cumulative.partition_point(|&c| c <= u)
                    })
                    .collect(),
            )
        }
        None => {
            let weights: Vec<f64> = probs.iter().map(crate::exact::rational_to_f64).collect();
            let dist = rand::distributions::WeightedIndex::new(&weights).expect("positive weights");
            Word((0..n).map(|_| rng.sample(&dist)).collect())
        }
    }
}

/// Empirical letter frequencies.
pub fn letter_frequencies(w: &Word, k: usize) -> Vec<f64> {
    let mut counts = vec![0usize; k];
    for &l in w.letters() {
        counts[l] += 1;
    }
    let n = w.len().max(1) as f64;
    counts.into_iter().map(|c| c as f64 / n).collect()
}
