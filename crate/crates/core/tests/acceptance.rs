//! The acceptance suite: one line per criterion, nonzero exit if any fails.

mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use torwalk::chains::build_eta_chain;
use torwalk::chains::build_finite_stationary;
use torwalk::cli::{run, verify, ExperimentConfig, Outcome};
use torwalk::exact::{adapted_norm, IntMatrix, IrrationalBasis, Scalar, TorusPoint};
use torwalk::fractal::{
    commutation_defect, commutation_vector, kappa, kappa_ell_s, orbit_identity_check, power_identity, AffineEndo,
    AffineIFS, Word,
};
use torwalk::groupcond::{condition_ifs, condition_walk, is_dense};
use torwalk::spectral::{haar_route, is_haar_up_to, quarter_cantor, quarter_shift, CoefficientFn, Convolution, HaarFactor};

use common::*;

type Check = std::result::Result<String, String>;

/// Name, check, and time budget in seconds.
type Criterion = (&'static str, fn() -> Check, u64);

fn sqrt2() -> Arc<IrrationalBasis> {
    IrrationalBasis::from_names(&["sqrt2"]).unwrap()
}

fn random_q2<R: Rng>(rng: &mut R, irrational: bool) -> Q2 {
    let q = rng.gen_range(1..=6);
    let a = rat(rng.gen_range(-6..=6), q);
    let b = if irrational && rng.gen_bool(0.5) {
        rat(rng.gen_range(-4..=4), rng.gen_range(1..=4))
    } else {
        BigRational::zero()
    };
    Q2::new(a, b)
}

fn random_vec<R: Rng>(rng: &mut R, d: usize) -> Vec2 {
    (0..d).map(|_| random_q2(rng, true)).collect()
}

fn random_word<R: Rng>(rng: &mut R, k: usize, max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    Word::new((0..len).map(|_| rng.gen_range(0..k)).collect())
}

fn random_matrix<R: Rng>(rng: &mut R, d: usize, bound: i64) -> Vec<Vec<i64>> {
    (0..d).map(|_| (0..d).map(|_| rng.gen_range(-bound..=bound)).collect()).collect()
}

fn random_expanding<R: Rng>(rng: &mut R, d: usize, bound: i64) -> Vec<Vec<i64>> {
    loop {
        let m = random_matrix(rng, d, bound);
        let oracle = if d == 1 { m[0][0].abs() >= 2 } else { expanding_2x2(&m) };
        let lib = IntMatrix::new(m.clone()).unwrap().is_expanding().unwrap();
        assert_eq!(oracle, lib, "expansion verdicts disagree on {m:?}");
        if oracle {
            return m;
        }
    }
}

fn lib_rows(m: &IntMatrix) -> IntMat {
    (0..m.dim()).map(|i| (0..m.dim()).map(|j| m.get(i, j).clone()).collect()).collect()
}

fn criterion_1() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let basis = sqrt2();
    let mut checked = 0;
    for inst in 0..200 {
        let d = rng.gen_range(1..=2);
        let k = rng.gen_range(2..=4);
        let dm = random_expanding(&mut rng, d, 5);
        let r: Vec<u32> = (0..k).map(|_| rng.gen_range(1..=3)).collect();
        let t: Vec<Vec2> = (0..k).map(|_| random_vec(&mut rng, d)).collect();
        let probs = vec![rat(1, k as i64); k];
        let ifs = AffineIFS::new(
            IntMatrix::new(dm.clone()).unwrap(),
            r.clone(),
            t.iter().map(|v| to_point(v, &basis)).collect(),
            probs,
        )
        .map_err(|e| format!("instance {inst}: {e}"))?;
        let mut w = random_word(&mut rng, k, 20);
        if w.is_empty() {
            w = Word::new(vec![0]);
        }
        let n = rng.gen_range(0..=w.len());

        let dint = int_mat(&dm);
        let powers: Vec<IntMat> = r.iter().map(|&ri| mat_pow(&dint, ri as u64)).collect();
        let inverses: Vec<RatMat> = powers.iter().map(inverse).collect();
        let code = |letters: &[usize]| {
            let mut x = vec![Q2::zero(); d];
            for &l in letters.iter().rev() {
                x = vadd(&apply_rat(&inverses[l], &x), &t[l]);
            }
            x
        };
        let letters = w.letters();
        let product = letters[..n].iter().fold(identity(d), |acc, &l| mat_mul(&acc, &powers[l]));
        let lhs = apply_int(&product, &code(letters));
        let mut y = vec![Q2::zero(); d];
        for &l in &letters[..n] {
            y = apply_int(&powers[l], &vadd(&y, &t[l]));
        }
        let rhs = vadd(&y, &code(&letters[n..]));
        if !eq_mod_z(&lhs, &rhs) {
            return Err(format!("instance {inst}: reference sides differ"));
        }
        let (a, b) = orbit_identity_check(&ifs, &w, n).map_err(|e| e.to_string())?;
        if !eq_mod_z(&from_point(&a), &lhs) || !eq_mod_z(&from_point(&b), &rhs) {
            return Err(format!("instance {inst}: library sides differ from the reference"));
        }
        checked += 1;
    }
    Ok(format!("{checked} instances equal mod Z^d"))
}

fn criterion_2() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let basis = sqrt2();
    for inst in 0..200 {
        let d = rng.gen_range(1..=2);
        let k = rng.gen_range(2..=4);
        let base = int_mat(&random_matrix(&mut rng, d, 3));
        let linear: Vec<IntMat> = (0..k)
            .map(|_| {
                let a = BigInt::from(rng.gen_range(-2..=2));
                let b = BigInt::from(rng.gen_range(-2..=2));
                let id = identity(d);
                (0..d)
                    .map(|i| (0..d).map(|j| &a * &id[i][j] + &b * &base[i][j]).collect())
                    .collect()
            })
            .collect();
        let alpha: Vec<Vec2> = (0..k).map(|_| random_vec(&mut rng, d)).collect();
        let endos: Vec<AffineEndo> = linear
            .iter()
            .zip(&alpha)
            .map(|(m, a)| {
                let rows = m.iter().map(|r| r.iter().map(|v| v.to_i64().unwrap()).collect()).collect();
                AffineEndo::new(IntMatrix::new(rows).unwrap(), to_point(a, &basis)).unwrap()
            })
            .collect();
        let prefix = random_word(&mut rng, k, 12);
        let l = rng.gen_range(0..k);
        let s = rng.gen_range(0..k);
        let x = random_vec(&mut rng, d);

        let h = |i: usize, v: &[Q2]| vadd(&apply_int(&linear[i], v), &alpha[i]);
        let through_prefix = |mut v: Vec2| {
            for &j in prefix.letters().iter().rev() {
                v = h(j, &v);
            }
            v
        };
        let defect = vsub(&through_prefix(h(l, &h(s, &x))), &through_prefix(h(s, &h(l, &x))));
        let id = identity(d);
        let mut closed = vsub(
            &apply_int(&mat_sub(&id, &linear[s]), &alpha[l]),
            &apply_int(&mat_sub(&id, &linear[l]), &alpha[s]),
        );
        for &j in prefix.letters().iter().rev() {
            closed = apply_int(&linear[j], &closed);
        }
        if !eq_mod_z(&defect, &closed) {
            return Err(format!("instance {inst}: reference defect differs from the closed form"));
        }
        let xp = to_point(&x, &basis);
        let lib_defect = commutation_defect(&endos, &prefix, l, s, &xp).map_err(|e| e.to_string())?;
        let lib_vector = commutation_vector(&endos, &prefix, s, l).map_err(|e| e.to_string())?;
        if !eq_mod_z(&from_point(&lib_defect), &defect) || !eq_mod_z(&from_point(&lib_vector), &closed) {
            return Err(format!("instance {inst}: library differs from the reference"));
        }
    }
    Ok("200 instances equal exactly".into())
}

fn criterion_3() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut instances = 0;
    while instances < 200 {
        let k = rng.gen_range(2..=4);
        let r: Vec<u32> = (0..k).map(|_| rng.gen_range(1..=4)).collect();
        if gcd_list(&r) != 1 {
            continue;
        }
        instances += 1;
        let top = *r.iter().max().unwrap() as u64;
        let d = rng.gen_range(1..=2);
        let dm = random_matrix(&mut rng, d, 3);
        let w = random_word(&mut rng, k, 10);
        let sum: u64 = w.letters().iter().map(|&l| r[l] as u64).sum();
        let ell = sum.div_ceil(top);
        let s = top * ell - sum;
        let es = kappa_ell_s(&r, &w).map_err(|e| e.to_string())?;
        if (es.ell, es.s) != (ell, s) {
            return Err(format!("r={r:?} w={:?}: (l, s) = ({}, {}), expected ({ell}, {s})", w.letters(), es.ell, es.s));
        }
        let dint = int_mat(&dm);
        let lhs = mat_pow(&mat_pow(&dint, top), ell);
        let rhs = w
            .letters()
            .iter()
            .fold(identity(d), |acc, &l| mat_mul(&acc, &mat_pow(&dint, r[l] as u64)));
        let rhs = mat_mul(&rhs, &mat_pow(&dint, s));
        if lhs != rhs {
            return Err(format!("reference matrices differ for r={r:?}"));
        }
        let (a, b) = power_identity(&IntMatrix::new(dm).unwrap(), &r, &w).map_err(|e| e.to_string())?;
        if lib_rows(&a) != lhs || lib_rows(&b) != rhs {
            return Err(format!("library matrices differ for r={r:?}"));
        }
        let v = random_word(&mut rng, k, 10);
        let uv = w.concat(&v);
        let (kw, kv, kuv) = (kappa(&r, &w).unwrap(), kappa(&r, &v).unwrap(), kappa(&r, &uv).unwrap());
        let expected = (top - sum % top) % top;
        if kw != expected || kuv != (kw + kv) % top {
            return Err(format!("kappa not additive for r={r:?}"));
        }
    }
    Ok("200 instances: matrix identity and kappa additivity exact".into())
}

fn criterion_4() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let basis = IrrationalBasis::rational();
    for inst in 0..100 {
        let k = rng.gen_range(1..=3);
        let q = rng.gen_range(1..=12);
        let d: Vec<i64> = (0..k).map(|i| rng.gen_range(if i == 0 { 2 } else { 1 }..=5)).collect();
        let alpha: Vec<BigRational> = (0..k).map(|_| rat(rng.gen_range(0..q), q)).collect();
        let weights: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=4)).collect();
        let total: i64 = weights.iter().sum();
        let probs: Vec<BigRational> = weights.iter().map(|&w| rat(w, total)).collect();
        let scalars: Vec<Scalar> = alpha.iter().map(|a| Scalar::from_rational(&basis, a.clone())).collect();
        let fs = build_finite_stationary(&d, &scalars, &probs).map_err(|e| format!("instance {inst}: {e}"))?;
        let x0 = fs.x0().as_rational().cloned().ok_or("x0 is irrational")?;
        let states = fs.states();
        let grid = BigInt::from(fs.q() as i64);
        let index_of = |p: &BigRational| -> Option<usize> {
            let v = frac(&(p - &x0));
            if !(&v * BigRational::from_integer(grid.clone())).is_integer() {
                return None;
            }
            states.iter().position(|s| frac(s) == v)
        };
        let mut pushed = vec![BigRational::zero(); states.len()];
        for (a, mass) in states.iter().zip(fs.stationary()) {
            let point = &x0 + a;
            for i in 0..k {
                let image = BigRational::from_integer(d[i].into()) * &point + &alpha[i];
                let Some(j) = index_of(&image) else {
                    return Err(format!("instance {inst}: h_{} leaves A + x0", i + 1));
                };
                pushed[j] += mass * &probs[i];
            }
        }
        if pushed != fs.stationary() {
            return Err(format!("instance {inst}: mu * nu != nu"));
        }
        if fs.stationary().iter().sum::<BigRational>() != rat(1, 1) {
            return Err(format!("instance {inst}: nu is not a probability"));
        }
        if !(fs.check_invariance().unwrap() && fs.is_stationary_measure().unwrap()) {
            return Err(format!("instance {inst}: library self-check failed"));
        }
    }
    Ok("100 instances invariant and stationary exactly".into())
}

fn run_config(text: &str) -> Result<Outcome, String> {
    let config = ExperimentConfig::parse(text).map_err(|e| e.to_string())?;
    run(&config).map_err(|e| e.to_string())
}

fn all_pass(outcome: &Outcome) -> Check {
    let results = verify(&outcome.report, "acceptance").map_err(|e| e.to_string())?;
    let detail: Vec<String> = results.iter().map(|r| format!("{}: {}", r.criterion, r.detail)).collect();
    if results.iter().all(|r| r.passed) {
        Ok(detail.join("; "))
    } else {
        Err(detail.join("; "))
    }
}

fn criterion_5() -> Check {
    let out = run_config(
        r#"
kind = "rational-case"
seed = 5
n = 100000
k = 8

[system]
expansion = [[3]]
translations = [["1/5"], ["7/10"]]
"#,
    )?;
    // reference chain: states reachable from the one-step differences,
    // stationary vector by iterating the transition operator
    let d = BigRational::from_integer(3.into());
    let t = [rat(1, 5), rat(7, 10)];
    let deltas: Vec<BigRational> = t.iter().map(|tj| frac(&(&d * (tj - &t[0])))).collect();
    let mut states: Vec<BigRational> = deltas.clone();
    states.sort();
    states.dedup();
    let mut i = 0;
    while i < states.len() {
        for dl in &deltas {
            let next = frac(&(&d * &states[i] + dl));
            if !states.contains(&next) {
                states.push(next);
            }
        }
        i += 1;
    }
    let n = states.len();
    let mut p = vec![1.0 / n as f64; n];
    for _ in 0..10_000 {
        let mut next = vec![0.0; n];
        for (a, s) in states.iter().enumerate() {
            // lazy chain, each letter with probability 1/2
            for dl in &deltas {
                let b = states.iter().position(|x| *x == frac(&(&d * s + dl))).unwrap();
                next[b] += 0.25 * p[a];
                next[a] += 0.25 * p[a];
            }
        }
        p = next;
    }
    let basis = IrrationalBasis::rational();
    let ts: Vec<Scalar> = t.iter().map(|x| Scalar::from_rational(&basis, x.clone())).collect();
    let chain = build_eta_chain(3, &ts, &[rat(1, 2), rat(1, 2)]).map_err(|e| e.to_string())?;
    for (s, pi) in chain.states().iter().zip(chain.stationary()) {
        let j = states.iter().position(|x| x == s).ok_or("library state not reachable in reference")?;
        let exact = pi.to_f64().unwrap();
        if (exact - p[j]).abs() > 1e-9 {
            return Err(format!("stationary mass {exact} at {s}, reference {}", p[j]));
        }
    }
    if chain.states().len() != n {
        return Err(format!("{} library states, {n} reference states", chain.states().len()));
    }
    let chars = out.report.numeric["characters"].as_array().ok_or("no characters")?;
    if chars.len() != 16 {
        return Err(format!("{} characters compared, expected 16", chars.len()));
    }
    all_pass(&out)
}

fn criterion_6() -> Check {
    let out = run_config(
        r#"
kind = "walk-sim"
seed = 7
n = 100000
k = 8
irrationals = ["sqrt2"]

[system]
matrices = [[[2]], [[3]]]
offsets = [["0"], ["sqrt2"]]
starts = [["0"], ["1/7"], ["sqrt2/2"]]
"#,
    )?;
    let runs = out.report.numeric["runs"].as_array().ok_or("no runs")?;
    if runs.len() != 3 {
        return Err(format!("{} runs, expected 3", runs.len()));
    }
    all_pass(&out)
}

fn criterion_7() -> Check {
    let out = run_config(
        r#"
kind = "normality"
seed = 11
n = 10000
k = 8
irrationals = ["sqrt2"]

[system]
expansion = [[3]]
translations = [["0"], ["2*sqrt2/3"]]
block_len = 2
"#,
    )?;
    let bits = out.report.precision.bits.ok_or("no precision recorded")?;
    if !(15_000..=17_500).contains(&bits) {
        return Err(format!("precision {bits} bits"));
    }
    if out.report.exact["condition"]["dense"] != Value::Bool(true) {
        return Err("difference set not reported dense".into());
    }
    let blocks = out.report.numeric["orbit"]["blocks"].as_array().ok_or("no blocks")?;
    if blocks.len() != 3 + 9 {
        return Err(format!("{} blocks reported", blocks.len()));
    }
    all_pass(&out).map(|s| format!("{s}; {bits} bits"))
}

fn criterion_8() -> Check {
    let mu0 = quarter_cantor(1e-12).map_err(|e| e.to_string())?;
    let nu = quarter_shift(1e-12).map_err(|e| e.to_string())?;
    for k in 0..=5u32 {
        for m in -20i64..=20 {
            let odd = 4i64.pow(k) * (2 * m + 1);
            let twice = 4i64.pow(k) * (4 * m + 2);
            if !mu0.coefficient(odd).exact_zero {
                return Err(format!("mu0 at {odd} not an exact zero"));
            }
            if !nu.coefficient(twice).exact_zero {
                return Err(format!("nu at {twice} not an exact zero"));
            }
        }
    }
    for n in (1..=1000i64).flat_map(|n| [n, -n]) {
        // reference routing: strip factors of 4, then the residue is odd
        // (a zero of the 0, 1/2 factor) or twice odd (of the 0, 1/4 factor)
        let mut s = 0u32;
        let mut u = n;
        while u % 4 == 0 {
            u /= 4;
            s += 1;
        }
        let expected = if u % 2 != 0 { HaarFactor::QuarterCantor } else { HaarFactor::QuarterShift };
        let (which, level) = haar_route(n).map_err(|e| e.to_string())?;
        if (which, level) != (expected, s) {
            return Err(format!("{n} routed to {which:?} level {level}"));
        }
        let factor = match which {
            HaarFactor::QuarterCantor => mu0.factor(n, s),
            HaarFactor::QuarterShift => nu.factor(n, s),
        };
        if !factor.exact_zero {
            return Err(format!("factor {s} at {n} is not an exact zero"));
        }
        // float product of cosines as a sanity check
        let atom = if which == HaarFactor::QuarterCantor { 0.5 } else { 0.25 };
        let phase = std::f64::consts::PI * n as f64 * atom / 4f64.powi(s as i32);
        if phase.cos().abs() > 1e-12 {
            return Err(format!("cosine factor at {n} is {}", phase.cos()));
        }
    }
    let conv = Convolution::new(vec![Arc::new(nu), Arc::new(mu0)]);
    if !is_haar_up_to(&conv, 1000) {
        return Err("nu * mu0 not Haar up to 1000".into());
    }
    Ok("exact zeros for k <= 5, |m| <= 20; every 1 <= |n| <= 1000 routed; Haar up to 1000".into())
}

fn criterion_9() -> Check {
    let irrational = run_config(
        r#"
kind = "rotation-case"
seed = 3
n = 100000
irrationals = ["sqrt2"]

[system]
offsets = [["1/2"], ["sqrt2/4"]]
"#,
    )?;
    let control = run_config(
        r#"
kind = "rotation-case"
seed = 3
n = 100000

[system]
offsets = [["1/2"], ["1/3"]]
"#,
    )?;
    let q = &control.report.numeric["runs"][0]["control"]["q"];
    if q != 6 {
        return Err(format!("control denominator {q}, expected 6"));
    }
    let a = all_pass(&irrational)?;
    let b = all_pass(&control)?;
    Ok(format!("{a}; control {b}"))
}

fn point_list(basis: &Arc<IrrationalBasis>, rows: &[&[&str]]) -> Vec<TorusPoint> {
    rows.iter().map(|r| TorusPoint::parse(basis, r).unwrap()).collect()
}

fn witness_holds(witness: &[BigInt], set: &[TorusPoint]) -> bool {
    set.iter().all(|p| {
        let sum = witness
            .iter()
            .zip(from_point(p))
            .fold(Q2::zero(), |acc, (k, x)| acc.add(&x.scale(&BigRational::from_integer(k.clone()))));
        sum.is_integer()
    })
}

fn criterion_10() -> Check {
    let b = sqrt2();
    let m = |v: i64| IntMatrix::new(vec![vec![v]]).unwrap();
    let pts = |rows: &[&[&str]]| point_list(&b, rows);

    let mut worked = Vec::new();
    worked.push(("{1/2}", is_dense(&pts(&[&["1/2"]])).unwrap(), false, pts(&[&["1/2"]])));
    worked.push(("{sqrt2}", is_dense(&pts(&[&["sqrt2"]])).unwrap(), true, vec![]));
    let plane = pts(&[&["sqrt2", "0"], &["0", "1/2"]]);
    worked.push(("{(sqrt2,0),(0,1/2)}", is_dense(&plane).unwrap(), false, plane.clone()));
    let o = pts(&[&["0"], &["sqrt2"]]);
    worked.push(("walk D=(2,2)", condition_walk(&[m(2), m(2)], &o).unwrap(), true, vec![]));
    let z = pts(&[&["0"], &["0"]]);
    worked.push(("walk D=(2,3) zero offsets", condition_walk(&[m(2), m(3)], &z).unwrap(), false, pts(&[&["0"]])));
    let same = pts(&[&["1/3"], &["1/3"]]);
    worked.push(("identical walk maps", condition_walk(&[m(2), m(2)], &same).unwrap(), false, pts(&[&["0"]])));
    let cantor = pts(&[&["0"], &["2*sqrt2/3"]]);
    worked.push(("sqrt2 Cantor", condition_ifs(&m(3), &[1, 1], &cantor).unwrap(), true, vec![]));
    let thirds = pts(&[&["0"], &["2/3"]]);
    // {3·t_i − 3·t_j} = {0, ±2}
    worked.push(("middle thirds", condition_ifs(&m(3), &[1, 1], &thirds).unwrap(), false, pts(&[&["0"], &["2"], &["-2"]])));
    worked.push(("zero translations", condition_ifs(&m(2), &[1, 2], &z).unwrap(), false, pts(&[&["0"]])));
    for (name, verdict, dense, set) in &worked {
        if verdict.dense != *dense {
            return Err(format!("{name}: dense = {}", verdict.dense));
        }
        match (&verdict.witness, dense) {
            (None, true) => {}
            (Some(w), false) if w.iter().any(|c| !c.is_zero()) && witness_holds(w, set) => {}
            _ => return Err(format!("{name}: missing or invalid witness")),
        }
    }
    let half = is_dense(&pts(&[&["1/2"]])).unwrap().witness.unwrap();
    if half.len() != 1 || num_traits::Signed::abs(&half[0]) != BigInt::from(2) {
        return Err(format!("{{1/2}} witness {half:?}"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let rb = IrrationalBasis::rational();
    for inst in 0..100 {
        let d = rng.gen_range(1..=2);
        let q = rng.gen_range(1..=12);
        let count = rng.gen_range(1..=3);
        let raw: Vec<Vec<BigRational>> = (0..count).map(|_| (0..d).map(|_| rat(rng.gen_range(0..q), q)).collect()).collect();
        let set: Vec<TorusPoint> = raw
            .iter()
            .map(|p| TorusPoint::new(p.iter().map(|c| Scalar::from_rational(&rb, c.clone())).collect()).unwrap())
            .collect();
        let verdict = is_dense(&set).map_err(|e| e.to_string())?;
        let brute = brute_force_witness(&raw, 12);
        if verdict.dense != brute.is_none() {
            return Err(format!("instance {inst}: dense = {}, brute force found {brute:?}", verdict.dense));
        }
        let w = verdict.witness.ok_or(format!("instance {inst}: no witness"))?;
        let w64: Vec<i64> = w.iter().map(|c| c.to_i64().unwrap()).collect();
        if w64.iter().all(|&c| c == 0) || !annihilates(&w64, &raw) {
            return Err(format!("instance {inst}: witness {w64:?} fails"));
        }
    }
    Ok(format!("{} worked examples match; 100 random instances agree with brute force", worked.len()))
}

fn apply_f64(rows: &[Vec<i64>], x: &[Complex64]) -> Vec<Complex64> {
    rows.iter()
        .map(|r| r.iter().zip(x).map(|(&a, &v)| v * a as f64).sum())
        .collect()
}

fn criterion_11() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    for fam in 0..50 {
        let family: Vec<Vec<Vec<i64>>> = if fam < 25 {
            let a = random_expanding(&mut rng, 2, 3);
            let e = rng.gen_range(2..=3);
            let ai = int_mat(&a);
            vec![a, mat_pow(&ai, e).iter().map(|r| r.iter().map(|v| v.to_i64().unwrap()).collect()).collect()]
        } else {
            let d = rng.gen_range(2..=3);
            let entry = |rng: &mut ChaCha8Rng| rng.gen_range(2..=5) * if rng.gen_bool(0.5) { 1 } else { -1 };
            (0..2)
                .map(|_| {
                    let diag: Vec<i64> = (0..d).map(|_| entry(&mut rng)).collect();
                    (0..d).map(|i| (0..d).map(|j| if i == j { diag[i] } else { 0 }).collect()).collect()
                })
                .collect()
        };
        let mats: Vec<IntMatrix> = family.iter().map(|m| IntMatrix::new(m.clone()).unwrap()).collect();
        let norm = adapted_norm(&mats).map_err(|e| format!("family {fam}: {e}"))?;
        if !(norm.rho() > 1.0 && norm.rho_lower() > 1.0) {
            return Err(format!("family {fam}: rho {} lower {}", norm.rho(), norm.rho_lower()));
        }
        if !norm.check_samples(&norm.sphere_sample(4096), norm.rho()) {
            return Err(format!("family {fam}: sphere sample below rho"));
        }
        let d = family[0].len();
        for _ in 0..4096 {
            let x: Vec<Complex64> = (0..d)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let nx = norm.norm(&x);
            if nx == 0.0 {
                continue;
            }
            let unit: Vec<Complex64> = x.iter().map(|c| c / nx).collect();
            for m in &family {
                let ratio = norm.norm(&apply_f64(m, &unit));
                if ratio < norm.rho_lower() * (1.0 - 1e-12) {
                    return Err(format!("family {fam}: ratio {ratio} below {}", norm.rho_lower()));
                }
            }
        }
    }
    Ok("50 families: rho > 1 and the bound holds on 4096 random unit vectors each".into())
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("exact orbit identity", criterion_1, 10),
        ("exact commutation identity", criterion_2, 10),
        ("exponent bookkeeping", criterion_3, 5),
        ("finite stationary support", criterion_4, 5),
        ("eta-chain law", criterion_5, 60),
        ("walk equidistribution", criterion_6, 60),
        ("normality in a dilated Cantor set", criterion_7, 120),
        ("quarter-Cantor counterexample", criterion_8, 5),
        ("rotation case", criterion_9, 30),
        ("condition checkers", criterion_10, 10),
        ("adapted norm", criterion_11, 10),
    ];
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*limit);
        let (status, detail) = match (&result, in_time) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("{d}; over the {limit} s budget")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("criterion {:>2} {status} {name} ({:.2} s): {detail}", i + 1, elapsed.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 11 criteria passed");
}
