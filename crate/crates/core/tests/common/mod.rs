//! Brute-force oracles and the structural suites shared by the property
//! tests and the acceptance run.
#![allow(dead_code)]

use mbb::env::BlockingInstance;
use mbb::fixtures::{random_explicit, random_matroid, random_weighted_rank};
use mbb::matroid::Matroid;
use mbb::oracles::gap_decomposition;
use mbb::set::ElementSet;
use mbb::simplex::{solve_lp, LinearProgram, LpStatus, Relation};
use mbb::submodular::{MarginalVector, SubmodularFn};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every independent set, by enumeration of all subsets.
pub fn independent_family(m: &Matroid) -> Vec<ElementSet> {
    ElementSet::full(m.k())
        .subsets()
        .filter(|&s| m.is_independent(s).unwrap())
        .collect()
}

pub fn brute_rank(family: &[ElementSet], s: ElementSet) -> usize {
    family
        .iter()
        .filter(|i| i.is_subset(s))
        .map(|i| i.len())
        .max()
        .unwrap_or(0)
}

pub fn weight(s: ElementSet, w: &[f64]) -> f64 {
    s.iter().map(|i| w[i]).sum()
}

/// Max weight of an independent subset of `s`.
pub fn brute_weighted_rank(family: &[ElementSet], w: &[f64], s: ElementSet) -> f64 {
    family
        .iter()
        .filter(|i| i.is_subset(s))
        .map(|&i| weight(i, w))
        .fold(0.0, f64::max)
}

/// Whether some bijection `i1 -> i2` satisfies the exchange property,
/// by trying every permutation.
pub fn exchange_bijection_exists(m: &Matroid, i1: ElementSet, i2: ElementSet) -> bool {
    fn go(m: &Matroid, src: &[usize], i1: ElementSet, left: &mut Vec<usize>, i2: ElementSet) -> bool {
        let Some((&i, rest)) = src.split_first() else {
            return true;
        };
        for p in 0..left.len() {
            let j = left[p];
            if i2.contains(i) && i != j {
                continue;
            }
            if !m.is_independent(i1.without(i).with(j)).unwrap() {
                continue;
            }
            left.swap_remove(p);
            let ok = go(m, rest, i1, left, i2);
            left.push(j);
            let last = left.len() - 1;
            left.swap(p, last);
            if ok {
                return true;
            }
        }
        false
    }
    go(m, &i1.to_vec(), i1, &mut i2.to_vec(), i2)
}

/// `F(x)` by conditioning on one coordinate at a time.
pub fn brute_multilinear(f: &SubmodularFn, x: &[f64]) -> f64 {
    fn go(f: &SubmodularFn, x: &[f64], i: usize, s: ElementSet) -> f64 {
        if i == x.len() {
            return f.eval(s).unwrap();
        }
        let mut v = 0.0;
        if x[i] > 0.0 {
            v += x[i] * go(f, x, i + 1, s.with(i));
        }
        if x[i] < 1.0 {
            v += (1.0 - x[i]) * go(f, x, i + 1, s);
        }
        v
    }
    go(f, x, 0, ElementSet::EMPTY)
}

/// A linear program `max c.x` over rows `a.x <= b`, solved by trying every
/// choice of `n` tight rows. `None` when no vertex is feasible. The
/// feasible region must be bounded.
pub fn brute_lp(c: &[f64], rows: &[(Vec<f64>, f64)]) -> Option<f64> {
    let n = c.len();
    let mut best: Option<f64> = None;
    let mut pick = Vec::with_capacity(n);
    fn choose(
        start: usize,
        n: usize,
        rows: &[(Vec<f64>, f64)],
        pick: &mut Vec<usize>,
        c: &[f64],
        best: &mut Option<f64>,
    ) {
        if pick.len() == n {
            if let Some(x) = solve_square(rows, pick) {
                let feasible = rows.iter().all(|(a, b)| {
                    let lhs: f64 = a.iter().zip(&x).map(|(p, q)| p * q).sum();
                    lhs <= b + 1e-7 * (1.0 + b.abs())
                });
                if feasible {
                    let v: f64 = c.iter().zip(&x).map(|(p, q)| p * q).sum();
                    *best = Some(best.map_or(v, |b: f64| b.max(v)));
                }
            }
            return;
        }
        for r in start..rows.len() {
            pick.push(r);
            choose(r + 1, n, rows, pick, c, best);
            pick.pop();
        }
    }
    choose(0, n, rows, &mut pick, c, &mut best);
    best
}

fn solve_square(rows: &[(Vec<f64>, f64)], pick: &[usize]) -> Option<Vec<f64>> {
    let n = pick.len();
    let mut a: Vec<Vec<f64>> = pick
        .iter()
        .map(|&r| {
            let mut row = rows[r].0.clone();
            row.push(rows[r].1);
            row
        })
        .collect();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, p);
        for r in 0..n {
            if r != col {
                let factor = a[r][col] / a[col][col];
                let pivot_row = a[col].clone();
                for (v, p) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                    *v -= factor * p;
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

/// Best total expected reward over every feasible action sequence of
/// `rounds` rounds, by exhaustive recursion.
pub fn brute_dp(inst: &BlockingInstance, rounds: u64) -> f64 {
    fn go(inst: &BlockingInstance, left: u64, free: &mut Vec<u64>) -> f64 {
        if left == 0 {
            return 0.0;
        }
        let k = inst.k();
        let avail: ElementSet = (0..k).filter(|&i| free[i] == 0).collect();
        let mut best = 0.0f64;
        for a in avail.subsets() {
            if !inst.matroid().is_independent(a).unwrap() {
                continue;
            }
            let saved = free.clone();
            for (i, f) in free.iter_mut().enumerate() {
                *f = if a.contains(i) {
                    inst.delays().get(i) - 1
                } else {
                    f.saturating_sub(1)
                };
            }
            best = best.max(inst.mean_of(a) + go(inst, left - 1, free));
            *free = saved;
        }
        best
    }
    go(inst, rounds, &mut vec![0; inst.k()])
}

/// Two random independent sets of equal size.
pub fn random_equal_pair<R: Rng>(rng: &mut R, m: &Matroid) -> (ElementSet, ElementSet) {
    let k = m.k();
    let mut basis = || {
        let w: Vec<f64> = (0..k).map(|_| rng.gen::<f64>()).collect();
        m.max_weight_independent_set(m.ground(), &w).unwrap()
    };
    let (a, b) = (basis(), basis());
    let r = rng.gen_range(0..=a.len());
    let mut va = a.to_vec();
    let mut vb = b.to_vec();
    va.shuffle(rng);
    vb.shuffle(rng);
    (
        va[..r].iter().copied().collect(),
        vb[..r].iter().copied().collect(),
    )
}

/// Matroid axioms, rank and greedy optimality against enumeration.
pub fn matroid_axioms_suite(seed: u64, cases: usize) -> Result<(), String> {
    let mut rng = rng(seed);
    for case in 0..cases {
        let k = rng.gen_range(1..=7);
        let m = random_matroid(&mut rng, k);
        let family = independent_family(&m);
        let fail = |what: &str| Err(format!("case {case} {:?}: {what}", m.kind()));
        if !family.contains(&ElementSet::EMPTY) {
            return fail("empty set dependent");
        }
        for &i in &family {
            if i.iter().any(|e| !m.is_independent(i.without(e)).unwrap()) {
                return fail("not hereditary");
            }
            for &j in &family {
                if i.len() < j.len() && !j.difference(i).iter().any(|e| m.is_independent(i.with(e)).unwrap()) {
                    return fail("augmentation fails");
                }
            }
        }
        for s in m.ground().subsets() {
            if m.rank(s).unwrap() != brute_rank(&family, s) {
                return fail("rank disagrees with enumeration");
            }
        }
        let w: Vec<f64> = (0..k).map(|_| rng.gen::<f64>()).collect();
        let g = m.max_weight_independent_set(m.ground(), &w).unwrap();
        if !m.is_independent(g).unwrap()
            || (weight(g, &w) - brute_weighted_rank(&family, &w, m.ground())).abs() > 1e-12
        {
            return fail("greedy not optimal");
        }
    }
    Ok(())
}

/// `F(x) <= f^+(x) <= F(x) / (1 - 1/e)` on random functions, `k <= 8`.
pub fn correlation_gap_suite(seed: u64, cases: usize) -> Result<(), String> {
    let mut rng = rng(seed);
    let alpha = 1.0 - (-1.0f64).exp();
    for case in 0..cases {
        let k = rng.gen_range(1..=8);
        let f = random_explicit(&mut rng, k);
        let x: Vec<f64> = (0..k).map(|_| rng.gen::<f64>()).collect();
        let xm = MarginalVector::new(x.clone()).unwrap();
        let big_f = f.multilinear_exact(&xm).unwrap();
        let oracle = brute_multilinear(&f, &x);
        if (big_f - oracle).abs() > 1e-9 * (1.0 + oracle.abs()) {
            return Err(format!("case {case}: F = {big_f}, enumeration gives {oracle}"));
        }
        let cl = f.concave_closure(&xm).unwrap();
        if big_f > cl + 1e-9 || alpha * cl > big_f + 1e-9 {
            return Err(format!("case {case}: F = {big_f}, f+ = {cl}"));
        }
    }
    Ok(())
}

/// Weighted rank functions match enumeration and are monotone submodular.
pub fn weighted_rank_suite(seed: u64, cases: usize) -> Result<(), String> {
    let mut rng = rng(seed);
    for case in 0..cases {
        let k = rng.gen_range(1..=8);
        let f = random_weighted_rank(&mut rng, k);
        let SubmodularFn::WeightedRank { matroid, weights } = &f else {
            unreachable!()
        };
        let family = independent_family(matroid);
        for s in ElementSet::full(k).subsets() {
            let v = f.eval(s).unwrap();
            let b = brute_weighted_rank(&family, weights, s);
            if (v - b).abs() > 1e-12 {
                return Err(format!("case {case}: f({s}) = {v}, enumeration gives {b}"));
            }
        }
        f.check_axioms().map_err(|e| format!("case {case}: {e}"))?;
    }
    Ok(())
}

/// Exchange bijections are valid, and exist exactly when enumeration finds
/// one.
pub fn exchange_suite(seed: u64, cases: usize) -> Result<(), String> {
    let mut rng = rng(seed);
    for case in 0..cases {
        let k = rng.gen_range(1..=8);
        let m = random_matroid(&mut rng, k);
        let (a, b) = random_equal_pair(&mut rng, &m);
        if !exchange_bijection_exists(&m, a, b) {
            return Err(format!("case {case}: enumeration found no bijection {a} -> {b}"));
        }
        let sigma = m.exchange_bijection(a, b).map_err(|e| format!("case {case}: {e}"))?;
        if !sigma.is_valid(&m, a, b) {
            return Err(format!("case {case}: invalid bijection {:?}", sigma.pairs));
        }
        for &(i, j) in &sigma.pairs {
            if !m.is_independent(a.without(i).with(j)).unwrap() {
                return Err(format!("case {case}: {a} - {i} + {j} dependent"));
            }
        }
    }
    Ok(())
}

/// `mu(ig) - mu(ib)` equals the sum of the pair gaps exactly.
pub fn gap_decomposition_suite(seed: u64, cases: usize) -> Result<(), String> {
    let mut rng = rng(seed);
    for case in 0..cases {
        let k = rng.gen_range(1..=8);
        let m = random_matroid(&mut rng, k);
        let mu: Vec<f64> = (0..k).map(|_| rng.gen::<f64>()).collect();
        let (ig, ib) = random_equal_pair(&mut rng, &m);
        let d = gap_decomposition(&m, ig, ib, &mu).map_err(|e| format!("case {case}: {e}"))?;
        let direct = weight(ig, &mu) - weight(ib, &mu);
        if (d.total - direct).abs() > 1e-12 {
            return Err(format!("case {case}: total {} vs {direct}", d.total));
        }
        for &(i, j, g) in &d.gaps {
            if !ig.contains(i) || !ib.contains(j) || g != mu[i] - mu[j] {
                return Err(format!("case {case}: bad pair ({i}, {j}, {g})"));
            }
        }
    }
    Ok(())
}

/// Rows `a.x <= b`.
pub type Rows = Vec<(Vec<f64>, f64)>;

/// A random bounded LP with at most four variables and its row form.
pub fn random_lp<R: Rng>(rng: &mut R) -> (LinearProgram, Vec<f64>, Rows) {
    let n = rng.gen_range(1..=4);
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
    let mut lp = LinearProgram::maximize(c.clone());
    let mut rows = Vec::new();
    for _ in 0..rng.gen_range(1..=4) {
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
        let b = rng.gen_range(-5..=10) as f64;
        let neg: Vec<f64> = a.iter().map(|v| -v).collect();
        match rng.gen_range(0..3) {
            0 => {
                rows.push((a.clone(), b));
                lp.constrain(a, Relation::Le, b);
            }
            1 => {
                rows.push((neg, -b));
                lp.constrain(a, Relation::Ge, b);
            }
            _ => {
                rows.push((a.clone(), b));
                rows.push((neg, -b));
                lp.constrain(a, Relation::Eq, b);
            }
        }
    }
    for j in 0..n {
        let lo = if rng.gen_bool(0.5) { 0.0 } else { -(rng.gen_range(1..=3) as f64) };
        let hi = rng.gen_range(1..=10) as f64;
        lp.bound(j, lo, Some(hi));
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        rows.push((e.clone(), hi));
        e[j] = -1.0;
        rows.push((e, -lo));
    }
    (lp, c, rows)
}

/// The simplex agrees with vertex enumeration on status and value.
pub fn simplex_suite(seed: u64, cases: usize) -> Result<(), String> {
    let mut rng = rng(seed);
    for case in 0..cases {
        let (lp, c, rows) = random_lp(&mut rng);
        let out = solve_lp(&lp).map_err(|e| format!("case {case}: {e}"))?;
        match (out.status, brute_lp(&c, &rows)) {
            (LpStatus::Optimal, Some(v)) => {
                if (out.value - v).abs() > 1e-6 * (1.0 + v.abs()) {
                    return Err(format!("case {case}: simplex {} vs enumeration {v}", out.value));
                }
                if lp.max_violation(&out.x) > 1e-7 {
                    return Err(format!("case {case}: simplex point infeasible"));
                }
            }
            (LpStatus::Infeasible, None) => {}
            (s, v) => return Err(format!("case {case}: simplex {s:?} vs enumeration {v:?}")),
        }
    }
    Ok(())
}
