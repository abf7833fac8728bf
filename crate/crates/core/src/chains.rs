//! The rational case on the circle: finite invariant sets, the η chain and
//! exact stationary laws.
//!
//! When every `β_j = α_j − (D_j−1)/(D_1−1)·α_1` is rational, the maps
//! `h_j(x) = D_j x + α_j` preserve the finite set `A + x₀`,
//! `x₀ = −α_1/(D_1−1)`, `A = {0, 1/q, …, (q−1)/q}`. For a contracting
//! system with rational translation differences the digits of `D^m x`
//! split as `α_m + η_m + π(T^m i)` with `η_m` a finite Markov chain.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{common_denominator, format_rational, frac_rational, rational_to_f64, RatMatrix, Scalar};
use crate::fractal::{sample_letters, AffineIFS};
use crate::spectral::{CoefficientFn, Convolution, DiscreteMeasure, SelfSimilar};

/// Largest state space the constructions here will enumerate.
pub const MAX_STATES: usize = 1 << 16;

fn check_probabilities(probs: &[BigRational], k: usize) -> Result<()> {
    if probs.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: probs.len(),
        });
    }
    if probs.iter().any(|p| !p.is_positive()) || probs.iter().sum::<BigRational>() != BigRational::one() {
        return Err(Error::InvalidArgument("probabilities must be positive and sum to 1".into()));
    }
    Ok(())
}

fn state_count(q: &BigInt) -> Result<usize> {
    q.to_usize()
        .filter(|&n| n <= MAX_STATES)
        .ok_or_else(|| Error::InvalidArgument(format!("common denominator {q} exceeds {MAX_STATES}")))
}

fn ratio(a: usize, q: usize) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(q))
}

fn matrix_from_rows(rows: Vec<Vec<BigRational>>) -> Result<RatMatrix> {
    let n = rows.len();
    RatMatrix::from_entries(n, rows.into_iter().flatten().collect())
}

fn rows_of(t: &RatMatrix) -> Vec<Vec<BigRational>> {
    (0..t.dim())
        .map(|i| (0..t.dim()).map(|j| t.get(i, j).clone()).collect())
        .collect()
}

fn adjacency(t: &RatMatrix) -> Vec<Vec<usize>> {
    (0..t.dim())
        .map(|i| (0..t.dim()).filter(|&j| !t.get(i, j).is_zero()).collect())
        .collect()
}

/// Strongly connected component id of every vertex.
fn components(adj: &[Vec<usize>]) -> Vec<usize> {
    let mut graph = DiGraph::<(), ()>::with_capacity(adj.len(), 0);
    let nodes: Vec<_> = (0..adj.len()).map(|_| graph.add_node(())).collect();
    for (v, out) in adj.iter().enumerate() {
        for &w in out {
            graph.add_edge(nodes[v], nodes[w], ());
        }
    }
    let mut comp = vec![0; adj.len()];
    for (c, members) in tarjan_scc(&graph).into_iter().enumerate() {
        for v in members {
            comp[v.index()] = c;
        }
    }
    comp
}

fn reachable(adj: &[Vec<usize>], start: impl IntoIterator<Item = usize>) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for s in start {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

pub fn is_irreducible(t: &RatMatrix) -> bool {
    let comp = components(&adjacency(t));
    comp.iter().all(|&c| c == comp[0])
}

/// gcd of cycle lengths of an irreducible chain.
pub fn period(t: &RatMatrix) -> u64 {
    let adj = adjacency(t);
    let mut level = vec![u64::MAX; adj.len()];
    level[0] = 0;
    let mut queue = VecDeque::from([0usize]);
    let mut g = 0u64;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if level[w] == u64::MAX {
                level[w] = level[v] + 1;
                queue.push_back(w);
            } else {
                g = g.gcd(&(level[v] + 1).abs_diff(level[w]));
            }
        }
    }
    g
}

fn check_stochastic(t: &RatMatrix) -> Result<()> {
    for i in 0..t.dim() {
        let mut sum = BigRational::zero();
        for j in 0..t.dim() {
            let e = t.get(i, j);
            if e.is_negative() {
                return Err(Error::InvalidArgument(format!("negative transition entry at ({i}, {j})")));
            }
            sum += e;
        }
        if !sum.is_one() {
            return Err(Error::InvalidArgument(format!("row {i} sums to {sum}")));
        }
    }
    Ok(())
}

/// The unique `v` with `v·T = v`, `Σ v = 1`, by exact Gaussian
/// elimination on `(Tᵀ − I) v = 0` with the last equation replaced by the
/// normalisation.
pub fn stationary_distribution(t: &RatMatrix) -> Result<Vec<BigRational>> {
    check_stochastic(t)?;
    if !is_irreducible(t) {
        return Err(Error::Reducible);
    }
    let n = t.dim();
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            let mut row: Vec<BigRational> = (0..n)
                .map(|j| {
                    let mut e = t.get(j, i).clone();
                    if i == j {
                        e -= BigRational::one();
                    }
                    e
                })
                .collect();
            row.push(BigRational::zero());
            row
        })
        .collect();
    a[n - 1] = vec![BigRational::one(); n + 1];
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero()).ok_or(Error::Singular)?;
        a.swap(col, pivot);
        let inv = a[col][col].recip();
        for e in a[col].iter_mut() {
            *e *= &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..=n {
                    let delta = &f * &a[col][c];
                    a[r][c] -= delta;
                }
            }
        }
    }
    Ok(a.into_iter().map(|row| row[n].clone()).collect())
}

/// `v·T − v`, exactly.
pub fn stationarity_residual(v: &[BigRational], t: &RatMatrix) -> Vec<BigRational> {
    (0..t.dim())
        .map(|j| (0..t.dim()).map(|i| &v[i] * t.get(i, j)).sum::<BigRational>() - &v[j])
        .collect()
}

/// Power iteration on the lazy chain `(I + T)/2`, for cross-checking the
/// exact solve.
pub fn power_iteration(t: &RatMatrix, iterations: usize) -> Vec<f64> {
    let n = t.dim();
    let m: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| rational_to_f64(t.get(i, j))).collect())
        .collect();
    let mut v = vec![1.0 / n as f64; n];
    for _ in 0..iterations {
        let mut next = vec![0.0; n];
        for i in 0..n {
            next[i] += 0.5 * v[i];
            for j in 0..n {
                next[j] += 0.5 * v[i] * m[i][j];
            }
        }
        v = next;
    }
    v
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainReport {
    pub x0: Option<String>,
    pub q: String,
    pub states: Vec<String>,
    pub transition: Vec<Vec<String>>,
    pub stationary: Vec<String>,
}

fn strings(v: &[BigRational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

/// The finite invariant set `A + x₀` with the chain induced by the maps
/// and one exact stationary vector.
#[derive(Debug, Clone)]
pub struct FiniteStationary {
    x0: Scalar,
    q: usize,
    expansions: Vec<i64>,
    alphas: Vec<Scalar>,
    probabilities: Vec<BigRational>,
    transition: RatMatrix,
    stationary: Vec<BigRational>,
}

impl FiniteStationary {
    pub fn x0(&self) -> &Scalar {
        &self.x0
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// `A = {0, 1/q, …, (q−1)/q}`; the support is `A + x₀`.
    pub fn states(&self) -> Vec<BigRational> {
        (0..self.q).map(|a| ratio(a, self.q)).collect()
    }

    pub fn transition(&self) -> &RatMatrix {
        &self.transition
    }

    pub fn stationary(&self) -> &[BigRational] {
        &self.stationary
    }

    fn state_of(&self, y: &Scalar) -> Result<Option<usize>> {
        let rel = y.checked_sub(&self.x0)?;
        Ok(rel.as_rational().and_then(|r| {
            let idx = frac_rational(r) * BigRational::from_integer(BigInt::from(self.q));
            idx.is_integer().then(|| idx.to_integer().to_usize()).flatten()
        }))
    }

    fn image(&self, j: usize, a: usize) -> Result<Scalar> {
        let point = self.x0.checked_add(&Scalar::from_rational(self.x0.basis(), ratio(a, self.q)))?;
        point.mul_int(&BigInt::from(self.expansions[j])).checked_add(&self.alphas[j])
    }

    /// `h_j(A + x₀) ⊆ A + x₀` for every map, in exact arithmetic.
    pub fn check_invariance(&self) -> Result<bool> {
        for j in 0..self.expansions.len() {
            for a in 0..self.q {
                if self.state_of(&self.image(j, a)?)?.is_none() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// `Σ_j P_j (h_j)_* ν`, with `ν` the stationary vector placed on
    /// `A + x₀`. Computed from the maps, not from the transition matrix.
    pub fn pushforward(&self) -> Result<Vec<BigRational>> {
        let mut out = vec![BigRational::zero(); self.q];
        for (j, p) in self.probabilities.iter().enumerate() {
            for (a, w) in self.stationary.iter().enumerate() {
                if w.is_zero() {
                    continue;
                }
                let b = self
                    .state_of(&self.image(j, a)?)?
                    .ok_or_else(|| Error::ConditionViolated("image leaves A + x0".into()))?;
                out[b] += p * w;
            }
        }
        Ok(out)
    }

    /// `μ ∗ ν = ν` exactly.
    pub fn is_stationary_measure(&self) -> Result<bool> {
        Ok(self.pushforward()? == self.stationary)
    }

    pub fn report(&self) -> ChainReport {
        ChainReport {
            x0: Some(self.x0.to_string()),
            q: self.q.to_string(),
            states: strings(&self.states()),
            transition: rows_of(&self.transition).iter().map(|r| strings(r)).collect(),
            stationary: strings(&self.stationary),
        }
    }
}

/// Builds the invariant set for `h_j(x) = D_j x + α_j` on the circle.
///
/// The chain on `A` may have several closed classes; the stationary vector
/// returned is supported on the closed class reachable from `x₀` that
/// contains the smallest state.
pub fn build_finite_stationary(d: &[i64], alpha: &[Scalar], probs: &[BigRational]) -> Result<FiniteStationary> {
    let k = d.len();
    if k == 0 {
        return Err(Error::Empty("map list"));
    }
    if alpha.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: alpha.len(),
        });
    }
    check_probabilities(probs, k)?;
    if d[0] == 1 {
        return Err(Error::InvalidArgument("D_1 = 1 leaves x0 undefined".into()));
    }
    let basis = alpha[0].basis().clone();
    let d1 = BigRational::from_integer(BigInt::from(d[0] - 1));
    let x0 = alpha[0].scale(&(-d1.recip()));
    let mut betas = Vec::with_capacity(k);
    for (j, (&dj, aj)) in d.iter().zip(alpha).enumerate() {
        let f = BigRational::from_integer(BigInt::from(dj - 1)) / &d1;
        let beta = aj.checked_sub(&alpha[0].scale(&f))?;
        match beta.as_rational() {
            Some(b) => betas.push(b.clone()),
            None => {
                return Err(Error::ConditionViolated(format!(
                    "beta_{} = {beta} is irrational",
                    j + 1
                )))
            }
        }
    }
    let q = state_count(&common_denominator(&betas))?;
    let shifts: Vec<i64> = betas
        .iter()
        .map(|b| (b * BigRational::from_integer(BigInt::from(q))).to_integer().mod_floor(&BigInt::from(q)))
        .map(|v| v.to_i64().expect("below q"))
        .collect();
    let mut rows = vec![vec![BigRational::zero(); q]; q];
    for (a, row) in rows.iter_mut().enumerate() {
        for j in 0..k {
            let b = (d[j] as i128 * a as i128 + shifts[j] as i128).rem_euclid(q as i128) as usize;
            row[b] += &probs[j];
        }
    }
    let transition = matrix_from_rows(rows)?;
    let stationary = closed_class_stationary(&transition)?;
    let out = FiniteStationary {
        x0,
        q,
        expansions: d.to_vec(),
        alphas: alpha.to_vec(),
        probabilities: probs.to_vec(),
        transition,
        stationary,
    };
    debug_assert!(out.x0.basis().same_as(&basis));
    Ok(out)
}

fn closed_class_stationary(t: &RatMatrix) -> Result<Vec<BigRational>> {
    let adj = adjacency(t);
    let comp = components(&adj);
    let from_origin = reachable(&adj, [0]);
    let closed = |c: usize| {
        (0..adj.len())
            .filter(|&v| comp[v] == c)
            .all(|v| adj[v].iter().all(|&w| comp[w] == c))
    };
    let class = (0..adj.len())
        .filter(|&v| from_origin[v])
        .map(|v| comp[v])
        .find(|&c| closed(c))
        .ok_or(Error::Reducible)?;
    let members: Vec<usize> = (0..adj.len()).filter(|&v| comp[v] == class).collect();
    let sub: Vec<Vec<BigRational>> = members
        .iter()
        .map(|&i| members.iter().map(|&j| t.get(i, j).clone()).collect())
        .collect();
    let v = stationary_distribution(&matrix_from_rows(sub)?)?;
    let mut out = vec![BigRational::zero(); adj.len()];
    for (i, m) in members.into_iter().enumerate() {
        out[m] = v[i].clone();
    }
    Ok(out)
}

/// The chain `η_1 = δ̃_{i_1}`, `η_{m+1} = D η_m + δ̃_{i_{m+1}}` on its
/// reachable states, with `δ̃_j = D(t_j − t_1) mod 1`.
#[derive(Debug, Clone)]
pub struct EtaChain {
    expansion: i64,
    q: usize,
    states: Vec<BigRational>,
    deltas: Vec<BigRational>,
    probabilities: Vec<BigRational>,
    transition: RatMatrix,
    stationary: Vec<BigRational>,
    initial: Vec<BigRational>,
    /// `next[s][j]`: the state reached from `s` by letter `j`.
    next: Vec<Vec<usize>>,
}

impl EtaChain {
    pub fn expansion(&self) -> i64 {
        self.expansion
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn states(&self) -> &[BigRational] {
        &self.states
    }

    pub fn deltas(&self) -> &[BigRational] {
        &self.deltas
    }

    pub fn probabilities(&self) -> &[BigRational] {
        &self.probabilities
    }

    pub fn transition(&self) -> &RatMatrix {
        &self.transition
    }

    pub fn stationary(&self) -> &[BigRational] {
        &self.stationary
    }

    /// Law of `η_1` on the states.
    pub fn initial(&self) -> &[BigRational] {
        &self.initial
    }

    pub fn zero_state(&self) -> usize {
        self.states.iter().position(Zero::is_zero).expect("0 = δ̃_1 is reachable")
    }

    /// `P(η_{m+1} = 0 | η_m = 0)`, positive for every chain built here.
    pub fn aperiodicity_witness(&self) -> BigRational {
        let z = self.zero_state();
        self.transition.get(z, z).clone()
    }

    pub fn stationary_measure(&self) -> Result<DiscreteMeasure> {
        let (atoms, weights): (Vec<_>, Vec<_>) = self
            .states
            .iter()
            .zip(&self.stationary)
            .filter(|(_, w)| w.is_positive())
            .map(|(a, w)| (a.clone(), w.clone()))
            .unzip();
        DiscreteMeasure::new(atoms, weights)
    }

    pub fn step(&self, state: usize, letter: usize) -> usize {
        self.next[state][letter]
    }

    /// State index of `η_1` for first letter `letter`.
    pub fn first_state(&self, letter: usize) -> usize {
        self.states
            .iter()
            .position(|s| *s == self.deltas[letter])
            .expect("initial support is reachable")
    }

    /// States `η_1, …, η_n` along a word.
    pub fn path(&self, letters: &[usize]) -> Vec<usize> {
        let mut out = Vec::with_capacity(letters.len());
        let mut state = None;
        for &l in letters {
            let s = match state {
                None => self.first_state(l),
                Some(s) => self.step(s, l),
            };
            out.push(s);
            state = Some(s);
        }
        out
    }

    /// Simulates `n` steps and returns state indices.
    pub fn simulate<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<usize> {
        let word = sample_letters(&self.probabilities, rng, n);
        self.path(word.letters())
    }

    pub fn report(&self) -> ChainReport {
        ChainReport {
            x0: None,
            q: self.q.to_string(),
            states: strings(&self.states),
            transition: rows_of(&self.transition).iter().map(|r| strings(r)).collect(),
            stationary: strings(&self.stationary),
        }
    }
}

/// Empirical frequency of each state index in `path`.
pub fn state_frequencies(path: &[usize], states: usize) -> Vec<f64> {
    let mut counts = vec![0usize; states];
    for &s in path {
        counts[s] += 1;
    }
    counts.iter().map(|&c| c as f64 / path.len().max(1) as f64).collect()
}

pub fn build_eta_chain(d: i64, t: &[Scalar], probs: &[BigRational]) -> Result<EtaChain> {
    let k = t.len();
    if k == 0 {
        return Err(Error::Empty("translation list"));
    }
    check_probabilities(probs, k)?;
    if d.abs() < 2 {
        return Err(Error::NotExpanding);
    }
    let mut differences = Vec::with_capacity(k);
    for (j, tj) in t.iter().enumerate() {
        let delta = tj.checked_sub(&t[0])?;
        match delta.as_rational() {
            Some(r) => differences.push(r.clone()),
            None => {
                return Err(Error::ConditionViolated(format!(
                    "t_{} - t_1 = {delta} is irrational",
                    j + 1
                )))
            }
        }
    }
    let q = state_count(&common_denominator(&differences))?;
    let big_q = BigRational::from_integer(BigInt::from(q));
    let dr = BigRational::from_integer(BigInt::from(d));
    let deltas: Vec<BigRational> = differences.iter().map(|x| frac_rational(&(x * &dr))).collect();
    let shifts: Vec<usize> = deltas
        .iter()
        .map(|x| (x * &big_q).to_integer().to_usize().expect("in [0, q)"))
        .collect();
    let target = |a: usize, j: usize| (d as i128 * a as i128 + shifts[j] as i128).rem_euclid(q as i128) as usize;
    let full: Vec<Vec<usize>> = (0..q).map(|a| (0..k).map(|j| target(a, j)).collect()).collect();
    let seen = reachable(&full, shifts.iter().copied());
    let members: Vec<usize> = (0..q).filter(|&a| seen[a]).collect();
    let index: HashMap<usize, usize> = members.iter().enumerate().map(|(i, &a)| (a, i)).collect();
    let n = members.len();
    let next: Vec<Vec<usize>> = members.iter().map(|&a| full[a].iter().map(|b| index[b]).collect()).collect();
    let mut rows = vec![vec![BigRational::zero(); n]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        for (j, p) in probs.iter().enumerate() {
            row[next[i][j]] += p;
        }
    }
    let transition = matrix_from_rows(rows)?;
    if !is_irreducible(&transition) {
        return Err(Error::Reducible);
    }
    if period(&transition) != 1 {
        return Err(Error::ConditionViolated("eta chain is periodic".into()));
    }
    let stationary = stationary_distribution(&transition)?;
    let mut initial = vec![BigRational::zero(); n];
    for (j, p) in probs.iter().enumerate() {
        initial[index[&shifts[j]]] += p;
    }
    Ok(EtaChain {
        expansion: d,
        q,
        states: members.iter().map(|&a| ratio(a, q)).collect(),
        deltas,
        probabilities: probs.to_vec(),
        transition,
        stationary,
        initial,
        next,
    })
}

/// The cycle of `c·D^m mod 1`, `c = D t_1/(D−1)`, shifted by `−c`: the
/// limit law `ν` of `α_m = D^m c − c`.
pub fn alpha_cycle(d: i64, t1: &BigRational) -> Result<Vec<BigRational>> {
    if d.abs() < 2 {
        return Err(Error::NotExpanding);
    }
    let dr = BigRational::from_integer(BigInt::from(d));
    let c = &dr * t1 / (&dr - BigRational::one());
    let mut seen: HashMap<BigRational, usize> = HashMap::new();
    let mut orbit = Vec::new();
    let mut x = frac_rational(&c);
    loop {
        if let Some(&start) = seen.get(&x) {
            return Ok(orbit[start..].iter().map(|y: &BigRational| frac_rational(&(y - &c))).collect());
        }
        if orbit.len() >= MAX_STATES {
            return Err(Error::InvalidArgument("alpha orbit period too long".into()));
        }
        seen.insert(x.clone(), orbit.len());
        orbit.push(x.clone());
        x = frac_rational(&(&x * &dr));
    }
}

pub fn alpha_limit_measure(d: i64, t1: &Scalar) -> Result<DiscreteMeasure> {
    let t1 = t1
        .as_rational()
        .ok_or_else(|| Error::ConditionViolated(format!("t_1 = {t1} is irrational")))?;
    DiscreteMeasure::uniform(alpha_cycle(d, t1)?)
}

fn rational_ifs_parts(ifs: &AffineIFS) -> Result<(i64, Vec<BigRational>)> {
    if ifs.dim() != 1 || ifs.exponents().iter().any(|&r| r != 1) {
        return Err(Error::InvalidArgument("rational case needs d = 1 and r_i = 1".into()));
    }
    let d = ifs.expansion().get(0, 0).to_i64().ok_or_else(|| Error::InvalidArgument("D too large".into()))?;
    let t = (0..ifs.len())
        .map(|i| {
            ifs.translation(i)[0]
                .as_rational()
                .cloned()
                .ok_or_else(|| Error::ConditionViolated("translations must be rational".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((d, t))
}

/// Coefficients of `ν ∗ p ∗ μ̃_K`: `ν` from the `α_m` cycle, `p` the
/// stationary law of the chain, `μ̃_K` the self-similar measure of the
/// system.
pub fn limit_law_fourier(nu: DiscreteMeasure, chain: &EtaChain, ifs: &AffineIFS, tol: f64) -> Result<Convolution> {
    let (d, t) = rational_ifs_parts(ifs)?;
    let mu = SelfSimilar::new(d, t, ifs.probabilities().to_vec(), tol)?;
    let parts: Vec<Arc<dyn CoefficientFn>> = vec![Arc::new(nu), Arc::new(chain.stationary_measure()?), Arc::new(mu)];
    Ok(Convolution::new(parts))
}

/// Everything the rational case needs for one system.
#[derive(Debug)]
pub struct RationalCase {
    pub chain: EtaChain,
    pub alpha_cycle: Vec<BigRational>,
    pub law: Convolution,
}

pub fn rational_case(ifs: &AffineIFS, tol: f64) -> Result<RationalCase> {
    let (d, t) = rational_ifs_parts(ifs)?;
    let basis = ifs.basis();
    let ts: Vec<Scalar> = t.iter().map(|x| Scalar::from_rational(basis, x.clone())).collect();
    let chain = build_eta_chain(d, &ts, ifs.probabilities())?;
    let cycle = alpha_cycle(d, &t[0])?;
    let law = limit_law_fourier(DiscreteMeasure::uniform(cycle.clone())?, &chain, ifs, tol)?;
    Ok(RationalCase {
        chain,
        alpha_cycle: cycle,
        law,
    })
}

/// Points `α_m + η_m + π(T^m i) mod 1`, `m = 1, …, n`, along a random word,
/// where `α_m` and `η_m` are exact and the tail `π(T^m i)` is evaluated in
/// `f64` from a word extended by `extra` letters.
pub fn sample_decomposition<R: Rng + ?Sized>(
    ifs: &AffineIFS,
    chain: &EtaChain,
    rng: &mut R,
    n: usize,
    extra: usize,
) -> Result<Vec<f64>> {
    let (d, t) = rational_ifs_parts(ifs)?;
    let word = sample_letters(ifs.probabilities(), rng, n + extra);
    let letters = word.letters();
    let tf: Vec<f64> = t.iter().map(rational_to_f64).collect();
    let mut tails = vec![0.0; n + extra + 1];
    for m in (0..n + extra).rev() {
        tails[m] = tf[letters[m]] + tails[m + 1] / d as f64;
    }
    let dr = BigRational::from_integer(BigInt::from(d));
    let c = &dr * &t[0] / (&dr - BigRational::one());
    let mut power = frac_rational(&c);
    let path = chain.path(&letters[..n]);
    let mut out = Vec::with_capacity(n);
    for m in 1..=n {
        power = frac_rational(&(&power * &dr));
        let alpha = frac_rational(&(&power - &c));
        let exact = rational_to_f64(&frac_rational(&(alpha + &chain.states[path[m - 1]])));
        let x = exact + tails[m];
        out.push(x - x.floor());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{IntMatrix, IrrationalBasis, TorusPoint};
    use crate::fractal::code_prefix;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn scalars(basis: &Arc<crate::exact::IrrationalBasis>, v: &[&str]) -> Vec<Scalar> {
        v.iter().map(|s| Scalar::parse(basis, s).unwrap()).collect()
    }

    #[test]
    fn two_doublings() {
        let b = IrrationalBasis::rational();
        let fs = build_finite_stationary(&[2, 2], &scalars(&b, &["0", "1/2"]), &[q(1, 2), q(1, 2)]).unwrap();
        assert!(fs.x0().is_zero());
        assert_eq!(fs.q(), 2);
        assert_eq!(fs.states(), vec![q(0, 1), q(1, 2)]);
        assert_eq!(rows_of(fs.transition()), vec![vec![q(1, 2), q(1, 2)], vec![q(1, 2), q(1, 2)]]);
        assert_eq!(fs.stationary(), &[q(1, 2), q(1, 2)]);
        assert!(fs.check_invariance().unwrap());
        assert!(fs.is_stationary_measure().unwrap());
    }

    #[test]
    fn single_map_fixed_point() {
        let b = IrrationalBasis::rational();
        let fs = build_finite_stationary(&[2], &scalars(&b, &["0"]), &[q(1, 1)]).unwrap();
        assert_eq!(fs.states(), vec![q(0, 1)]);
        assert_eq!(fs.stationary(), &[q(1, 1)]);
    }

    #[test]
    fn irrational_beta_rejected() {
        let b = IrrationalBasis::from_names(&["sqrt2"]).unwrap();
        let r = build_finite_stationary(&[2, 3], &scalars(&b, &["0", "sqrt2"]), &[q(1, 2), q(1, 2)]);
        assert!(matches!(r, Err(Error::ConditionViolated(_))));
    }

    #[test]
    fn irrational_but_aligned_offsets() {
        // α_2 = 2α_1 + 1/3 with α_1 irrational: β_2 = 1/3
        let b = IrrationalBasis::from_names(&["sqrt2"]).unwrap();
        let fs = build_finite_stationary(&[2, 3], &scalars(&b, &["sqrt2", "2*sqrt2 + 1/3"]), &[q(1, 3), q(2, 3)])
            .unwrap();
        assert_eq!(fs.x0(), &Scalar::parse(&b, "-sqrt2").unwrap());
        assert!(fs.check_invariance().unwrap());
        assert!(fs.is_stationary_measure().unwrap());
    }

    #[test]
    fn eta_examples() {
        let b = IrrationalBasis::rational();
        let c = build_eta_chain(3, &scalars(&b, &["0", "1/2"]), &[q(1, 3), q(2, 3)]).unwrap();
        assert_eq!(c.deltas(), &[q(0, 1), q(1, 2)]);
        assert_eq!(c.states(), &[q(0, 1), q(1, 2)]);
        assert_eq!(rows_of(c.transition()), vec![vec![q(1, 3), q(2, 3)], vec![q(2, 3), q(1, 3)]]);
        assert_eq!(c.stationary(), &[q(1, 2), q(1, 2)]);
        assert!(c.aperiodicity_witness().is_positive());

        let c = build_eta_chain(2, &scalars(&b, &["0", "1/2"]), &[q(1, 2), q(1, 2)]).unwrap();
        assert_eq!(c.states(), &[q(0, 1)]);
        assert_eq!(c.stationary(), &[q(1, 1)]);
    }

    #[test]
    fn stationary_examples() {
        let flip = matrix_from_rows(vec![vec![q(0, 1), q(1, 1)], vec![q(1, 1), q(0, 1)]]).unwrap();
        assert_eq!(stationary_distribution(&flip).unwrap(), vec![q(1, 2), q(1, 2)]);
        assert_eq!(period(&flip), 2);
        let ds = matrix_from_rows(vec![
            vec![q(1, 2), q(1, 4), q(1, 4)],
            vec![q(1, 4), q(1, 2), q(1, 4)],
            vec![q(1, 4), q(1, 4), q(1, 2)],
        ])
        .unwrap();
        assert_eq!(stationary_distribution(&ds).unwrap(), vec![q(1, 3); 3]);
        let reducible = matrix_from_rows(vec![vec![q(1, 1), q(0, 1)], vec![q(1, 2), q(1, 2)]]).unwrap();
        assert_eq!(stationary_distribution(&reducible), Err(Error::Reducible));
        let pi = power_iteration(&ds, 200);
        assert!(pi.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-12));
    }

    #[test]
    fn alpha_orbit() {
        let cycle = alpha_cycle(3, &q(1, 5)).unwrap();
        let shifted: Vec<_> = [q(3, 10), q(9, 10), q(7, 10), q(1, 10)]
            .iter()
            .map(|x| frac_rational(&(x - q(3, 10))))
            .collect();
        assert_eq!(cycle, shifted);
        assert_eq!(alpha_cycle(3, &q(0, 1)).unwrap(), vec![q(0, 1)]);
    }

    #[test]
    fn decomposition_matches_orbit() {
        let b = IrrationalBasis::rational();
        let ifs = AffineIFS::new(
            IntMatrix::new(vec![vec![3]]).unwrap(),
            vec![1, 1],
            vec![TorusPoint::parse(&b, &["1/5"]).unwrap(), TorusPoint::parse(&b, &["7/10"]).unwrap()],
            vec![q(1, 2), q(1, 2)],
        )
        .unwrap();
        let case = rational_case(&ifs, 1e-9).unwrap();
        let mut rng = crate::rng::stream(7, 0);
        let pts = sample_decomposition(&ifs, &case.chain, &mut rng, 12, 60).unwrap();
        let mut rng = crate::rng::stream(7, 0);
        let word = sample_letters(ifs.probabilities(), &mut rng, 72);
        let x = code_prefix(&ifs, &word).unwrap()[0].as_rational().unwrap().clone();
        for (m, p) in pts.iter().enumerate() {
            let exact = rational_to_f64(&frac_rational(&(&x * BigRational::from_integer(BigInt::from(3).pow(m as u32 + 1)))));
            let diff = (exact - p).abs();
            assert!(diff.min(1.0 - diff) < 1e-9, "m = {m}: {exact} vs {p}");
        }
    }
}
