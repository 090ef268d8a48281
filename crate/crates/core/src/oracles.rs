//! Ground truth for small instances: exact DP optimum, LP and CP upper
//! bounds, gap tables, per-round regret decomposition and periodization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::BlockingInstance;
use crate::error::{Error, Result};
use crate::interleave::Delays;
use crate::matroid::{ExchangeBijection, Matroid};
use crate::set::ElementSet;
use crate::simplex::{solve_lp, LinearProgram, LpStatus, Relation};
use crate::submodular::{MarginalVector, SubmodularFn, CLOSURE_LIMIT};

pub const DP_STATE_LIMIT: u128 = 1_000_000;
pub const DP_HORIZON_LIMIT: u64 = 10_000;
/// Largest ground set for the exact LP bound.
pub const LP_LIMIT: usize = 16;
/// Rank rows added per cutting-plane round.
const CUTS_PER_ROUND: usize = 32;
/// Largest ground set the DP enumerates actions for.
const DP_ARM_LIMIT: usize = 20;

/// `1 - (d_max - 1) / (d_max - 1 + T)`, the factor relating the LP bound
/// to the finite-horizon optimum.
pub fn finite_horizon_factor(d_max: u64, rounds: u64) -> f64 {
    let s = (d_max - 1) as f64;
    1.0 - s / (s + rounds as f64)
}

/// Exact optimum over `T` rounds of a blocking instance, with rewards
/// replaced by their means.
pub fn dp_optimal(inst: &BlockingInstance, rounds: u64) -> Result<f64> {
    let m = inst.matroid();
    let mu = inst.means();
    dp_core(inst.delays(), rounds, |avail| {
        avail
            .intersection(m.ground())
            .subsets()
            .filter(|&s| m.independent_unchecked(s))
            .map(|s| (s, s.iter().map(|i| mu[i]).sum()))
            .collect()
    })
}

/// Exact optimum over `T` rounds of `sum_t f(A_t)` under blocking.
pub fn dp_optimal_set_function(f: &SubmodularFn, delays: &Delays, rounds: u64) -> Result<f64> {
    if delays.len() != f.k() {
        return Err(Error::SizeMismatch(delays.len(), f.k()));
    }
    dp_core(delays, rounds, |avail| {
        avail.subsets().map(|s| (s, f.value(s))).collect()
    })
}

/// Backward value iteration over blocking-counter vectors.
///
/// States are mixed-radix numbers with digit `c_i` in `[0, d_i)`. Playing
/// only touches available arms (digit 0), so the successor of a state under
/// action `A` is its decayed state plus `sum_{i in A} (d_i - 1) radix_i`.
fn dp_core<F>(delays: &Delays, rounds: u64, actions: F) -> Result<f64>
where
    F: Fn(ElementSet) -> Vec<(ElementSet, f64)>,
{
    let k = delays.len();
    let d = delays.as_slice();
    let states: u128 = d.iter().map(|&x| x as u128).product();
    if states > DP_STATE_LIMIT {
        return Err(Error::TooLarge {
            what: "DP state space",
            size: states,
            limit: DP_STATE_LIMIT,
        });
    }
    if rounds > DP_HORIZON_LIMIT {
        return Err(Error::TooLarge {
            what: "DP horizon",
            size: rounds as u128,
            limit: DP_HORIZON_LIMIT as u128,
        });
    }
    if k > DP_ARM_LIMIT {
        return Err(Error::TooLarge {
            what: "DP arm count",
            size: k as u128,
            limit: DP_ARM_LIMIT as u128,
        });
    }
    let n = states as usize;
    let mut radix = vec![1usize; k];
    for i in 1..k {
        radix[i] = radix[i - 1] * d[i - 1] as usize;
    }

    let mut avail = vec![ElementSet::EMPTY; n];
    let mut decayed = vec![0usize; n];
    for (s, (a, dec)) in avail.iter_mut().zip(decayed.iter_mut()).enumerate() {
        for i in 0..k {
            let c = s / radix[i] % d[i] as usize;
            if c == 0 {
                a.insert(i);
            } else {
                *dec += (c - 1) * radix[i];
            }
        }
    }

    // (jump, value) per action, cached per availability mask
    let mut cache: std::collections::HashMap<u64, Vec<(usize, f64)>> = Default::default();
    let mut per_state: Vec<u64> = Vec::with_capacity(n);
    for &a in &avail {
        cache.entry(a.bits()).or_insert_with(|| {
            actions(a)
                .into_iter()
                .map(|(s, v)| {
                    let jump = s.iter().map(|i| (d[i] as usize - 1) * radix[i]).sum();
                    (jump, v)
                })
                .collect()
        });
        per_state.push(a.bits());
    }

    let mut next = vec![0.0f64; n];
    let mut cur = vec![0.0f64; n];
    for _ in 0..rounds {
        for s in 0..n {
            let acts = &cache[&per_state[s]];
            let base = decayed[s];
            cur[s] = acts
                .iter()
                .map(|&(jump, v)| v + next[base + jump])
                .fold(f64::NEG_INFINITY, f64::max);
        }
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(next[0])
}

/// `T * max { mu.z : z(S) <= rk(S) for all S, 0 <= z <= 1/d }`.
pub fn lp_upper_bound(inst: &BlockingInstance, rounds: u64) -> Result<f64> {
    Ok(rounds as f64 * lp_rate(inst)?.0)
}

/// The per-round LP optimum and its maximizer.
///
/// Rank rows are generated lazily: the box alone is solved first, then the
/// most violated rank rows are added and the LP re-solved, until no
/// row of the full family is violated. Rows implied by the box
/// (`sum_{i in S} 1/d_i <= rk(S)`) are never needed.
pub fn lp_rate(inst: &BlockingInstance) -> Result<(f64, Vec<f64>)> {
    let m = inst.matroid();
    let k = m.k();
    if k > LP_LIMIT {
        return Err(Error::TooLarge {
            what: "LP bound ground set",
            size: k as u128,
            limit: LP_LIMIT as u128,
        });
    }
    let inv = inst.delays().inverse();
    let ground = m.ground();
    let mut candidates: Vec<(ElementSet, f64)> = Vec::new();
    for s in ground.subsets() {
        let r = m.rank(s)? as f64;
        let box_sum: f64 = s.iter().map(|i| inv[i]).sum();
        if box_sum > r + 1e-12 {
            candidates.push((s, r));
        }
    }

    let mut lp = LinearProgram::maximize(inst.means().to_vec());
    for (i, &b) in inv.iter().enumerate() {
        let hi = if ground.contains(i) { b } else { 0.0 };
        lp.bound(i, 0.0, Some(hi));
    }
    let mut added = vec![false; candidates.len()];
    loop {
        let out = solve_lp(&lp)?;
        if out.status != LpStatus::Optimal {
            return Err(Error::Internal(format!("LP bound reported {:?}", out.status)));
        }
        let mut violated: Vec<(f64, usize)> = candidates
            .iter()
            .enumerate()
            .filter(|&(j, _)| !added[j])
            .filter_map(|(j, &(s, r))| {
                let excess = s.iter().map(|i| out.x[i]).sum::<f64>() - r;
                (excess > 1e-11).then_some((excess, j))
            })
            .collect();
        if violated.is_empty() {
            return Ok((out.value, out.x));
        }
        violated.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for &(_, j) in violated.iter().take(CUTS_PER_ROUND) {
            let (s, r) = candidates[j];
            let row = (0..k).map(|i| if s.contains(i) { 1.0 } else { 0.0 }).collect();
            lp.constrain(row, Relation::Le, r);
            added[j] = true;
        }
    }
}

/// Result of [`cp_upper_bound`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpBound {
    pub value: f64,
    /// `f^+(1/d)`.
    pub per_round: f64,
    /// Largest `f^+(z)` seen at random points `z <= 1/d`.
    pub audit_max: f64,
}

const CP_AUDIT_POINTS: usize = 20;

/// `T * f^+(1/d)`, the optimum of the concave program over the box
/// `0 <= z <= 1/d`, since `f^+` is monotone for monotone `f`. The claim is
/// audited at random points of the box; a point beating the corner is an
/// internal error.
pub fn cp_upper_bound(f: &SubmodularFn, delays: &Delays, rounds: u64) -> Result<CpBound> {
    let k = f.k();
    if delays.len() != k {
        return Err(Error::SizeMismatch(delays.len(), k));
    }
    if k > CLOSURE_LIMIT {
        return Err(Error::TooLarge {
            what: "CP bound ground set",
            size: k as u128,
            limit: CLOSURE_LIMIT as u128,
        });
    }
    let inv = delays.inverse();
    let per_round = f.concave_closure(&MarginalVector::new(inv.clone())?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x6370_6175_6469_7400);
    let mut audit_max = f64::NEG_INFINITY;
    for _ in 0..CP_AUDIT_POINTS {
        let z: Vec<f64> = inv.iter().map(|&b| b * rng.gen::<f64>()).collect();
        let v = f.concave_closure(&MarginalVector::new(z)?)?;
        audit_max = audit_max.max(v);
    }
    if audit_max > per_round + 1e-9 {
        return Err(Error::Internal(format!(
            "closure at an interior point ({audit_max}) beats the box corner ({per_round})"
        )));
    }
    Ok(CpBound {
        value: rounds as f64 * per_round,
        per_round,
        audit_max,
    })
}

/// Gaps, sample thresholds and the gap-dependent regret bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapTable {
    pub means: Vec<f64>,
    pub rounds: u64,
    /// Arm ids by decreasing mean.
    pub rank_order: Vec<usize>,
    /// `delta[i][j] = mu_i - mu_j`.
    pub delta: Vec<Vec<f64>>,
    /// `floor(8 ln T / delta^2)` when `delta[i][j] > 0`.
    pub ell: Vec<Vec<Option<u64>>>,
    /// `sum_{j>1} 16 ln T / delta_{j-1,j} + (pi^2/3) sum_{i<j} delta_{i,j}`
    /// in rank order.
    pub bound: f64,
}

impl GapTable {
    pub fn delta(&self, i: usize, j: usize) -> f64 {
        self.delta[i][j]
    }

    pub fn ell(&self, i: usize, j: usize) -> Option<u64> {
        self.ell[i][j]
    }
}

/// Floors `x`, forgiving round-off just below an integer.
fn floor_tolerant(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as u64
    } else {
        x.floor() as u64
    }
}

pub fn compute_gap_table(means: &[f64], rounds: u64) -> Result<GapTable> {
    let k = means.len();
    for i in 0..k {
        for j in i + 1..k {
            if means[i] == means[j] {
                return Err(Error::InvalidInstance(format!(
                    "arms {i} and {j} share mean {}",
                    means[i]
                )));
            }
        }
    }
    if rounds == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let ln_t = (rounds as f64).ln();
    let mut delta = vec![vec![0.0; k]; k];
    let mut ell = vec![vec![None; k]; k];
    for i in 0..k {
        for j in 0..k {
            let g = means[i] - means[j];
            delta[i][j] = g;
            if g > 0.0 {
                ell[i][j] = Some(floor_tolerant(8.0 * ln_t / (g * g)));
            }
        }
    }
    let mut rank_order: Vec<usize> = (0..k).collect();
    rank_order.sort_by(|&a, &b| means[b].total_cmp(&means[a]));
    let mut adjacent = 0.0;
    let mut pairs = 0.0;
    for jj in 1..k {
        let j = rank_order[jj];
        adjacent += 16.0 / delta[rank_order[jj - 1]][j];
        for &i in &rank_order[..jj] {
            pairs += delta[i][j];
        }
    }
    let bound = adjacent * ln_t + std::f64::consts::PI.powi(2) / 3.0 * pairs;
    Ok(GapTable {
        means: means.to_vec(),
        rounds,
        rank_order,
        delta,
        ell,
        bound,
    })
}

/// Matching of an `ib` set onto an `ig` set with the gap of each pair.
#[derive(Debug, Clone, PartialEq)]
pub struct GapDecomposition {
    /// `sigma: ib -> ig`.
    pub bijection: ExchangeBijection,
    /// `(i, sigma^{-1}(i), mu_i - mu_{sigma^{-1}(i)})` for each `i` in the
    /// `ig` set.
    pub gaps: Vec<(usize, usize, f64)>,
    pub total: f64,
}

/// Splits `mu(ig) - mu(ib)` into per-pair gaps along an exchange bijection
/// from `ib_set` to `ig_set`.
pub fn gap_decomposition(
    m: &Matroid,
    ig_set: ElementSet,
    ib_set: ElementSet,
    mu: &[f64],
) -> Result<GapDecomposition> {
    if ig_set.len() != ib_set.len() {
        return Err(Error::InvalidArgument(format!(
            "sets of sizes {} and {} cannot be matched",
            ig_set.len(),
            ib_set.len()
        )));
    }
    if mu.len() != m.k() {
        return Err(Error::SizeMismatch(mu.len(), m.k()));
    }
    let bijection = m.exchange_bijection(ib_set, ig_set)?;
    let mut gaps: Vec<(usize, usize, f64)> = bijection
        .pairs
        .iter()
        .map(|&(j, i)| (i, j, mu[i] - mu[j]))
        .collect();
    gaps.sort_by_key(|g| g.0);
    let total = gaps.iter().map(|g| g.2).sum();
    Ok(GapDecomposition {
        bijection,
        gaps,
        total,
    })
}

/// Whether a schedule `A_1, A_2, ...` respects blocking.
pub fn is_feasible_schedule(sets: &[ElementSet], delays: &Delays) -> bool {
    let k = delays.len();
    let mut last: Vec<Option<usize>> = vec![None; k];
    for (t, s) in sets.iter().enumerate() {
        if s.first_at_or_above(k).is_some() {
            return false;
        }
        for i in s.iter() {
            if let Some(p) = last[i] {
                if ((t - p) as u64) < delays.get(i) {
                    return false;
                }
            }
            last[i] = Some(t);
        }
    }
    true
}

/// A schedule obtained by tiling one window.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicAssignment {
    pub period: usize,
    /// Index of the first round of the chosen window (0-based).
    pub start: usize,
    pub window: Vec<ElementSet>,
    /// The tiled schedule, same length as the input.
    pub sets: Vec<ElementSet>,
    /// Average value per round of the window.
    pub average: f64,
}

/// Tiles the best length-`m` window of a feasible schedule whose delays all
/// equal `m`. A window of `m` consecutive rounds plays each element at most
/// once, so the tiling is feasible.
pub fn periodize<V: Fn(ElementSet) -> f64>(
    sets: &[ElementSet],
    m: usize,
    delays: &Delays,
    value: V,
) -> Result<PeriodicAssignment> {
    if m == 0 || delays.as_slice().iter().any(|&d| d != m as u64) {
        return Err(Error::InvalidArgument(format!(
            "periodization needs every delay equal to the period {m}"
        )));
    }
    if !is_feasible_schedule(sets, delays) {
        return Err(Error::InvalidArgument("input schedule violates blocking".into()));
    }
    let n = sets.len();
    let vals: Vec<f64> = sets.iter().map(|&s| value(s)).collect();
    if m >= n {
        let average = if n == 0 { 0.0 } else { vals.iter().sum::<f64>() / n as f64 };
        return Ok(PeriodicAssignment {
            period: m,
            start: 0,
            window: sets.to_vec(),
            sets: sets.to_vec(),
            average,
        });
    }
    let mut best = (0usize, f64::NEG_INFINITY);
    let mut sum: f64 = vals[..m].iter().sum();
    for s in 0..=n - m {
        if s > 0 {
            sum += vals[s + m - 1] - vals[s - 1];
        }
        if sum > best.1 + 1e-12 {
            best = (s, sum);
        }
    }
    let (start, _) = best;
    let window = sets[start..start + m].to_vec();
    let average = vals[start..start + m].iter().sum::<f64>() / m as f64;
    let tiled = (0..n).map(|t| window[t % m]).collect();
    Ok(PeriodicAssignment {
        period: m,
        start,
        window,
        sets: tiled,
        average,
    })
}

/// Upper bounds and the exact optimum where affordable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub rounds: u64,
    pub dp_value: Option<f64>,
    pub lp_value: f64,
    /// CP bound of the weighted rank function, when `k <= 12`.
    pub cp_value: Option<f64>,
    pub dp_rate: Option<f64>,
    pub lp_rate: f64,
    pub cp_rate: Option<f64>,
    pub d_max: u64,
    pub rank: usize,
    /// Value of a max-weight basis, `f(A)`.
    pub f_ground: f64,
    /// `1 - (d_max - 1)/(d_max - 1 + T)`.
    pub horizon_factor: f64,
    /// `lp >= horizon_factor * dp` (true when the DP was skipped).
    pub lp_dominates_dp: bool,
}

pub fn bound_report(inst: &BlockingInstance, rounds: u64) -> Result<BoundReport> {
    let t = rounds as f64;
    let d_max = inst.delays().max();
    let m = inst.matroid();
    let states: u128 = inst.delays().as_slice().iter().map(|&d| d as u128).product();
    let dp_value = if states <= DP_STATE_LIMIT && rounds <= DP_HORIZON_LIMIT && inst.k() <= DP_ARM_LIMIT {
        Some(dp_optimal(inst, rounds)?)
    } else {
        None
    };
    let lp_value = lp_upper_bound(inst, rounds)?;
    let f = SubmodularFn::weighted_rank(m.clone(), inst.means().to_vec())?;
    let cp_value = if inst.k() <= CLOSURE_LIMIT {
        Some(cp_upper_bound(&f, inst.delays(), rounds)?.value)
    } else {
        None
    };
    let horizon_factor = finite_horizon_factor(d_max, rounds);
    let lp_dominates_dp = dp_value.is_none_or(|dp| lp_value >= horizon_factor * dp - 1e-8);
    Ok(BoundReport {
        rounds,
        dp_value,
        lp_value,
        cp_value,
        dp_rate: dp_value.map(|v| v / t),
        lp_rate: lp_value / t,
        cp_rate: cp_value.map(|v| v / t),
        d_max,
        rank: m.full_rank(),
        f_ground: f.value(m.ground()),
        horizon_factor,
        lp_dominates_dp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::RewardLaw;

    fn set(ids: &[usize]) -> ElementSet {
        ids.iter().copied().collect()
    }

    fn det(m: Matroid, means: Vec<f64>, d: Vec<u64>) -> BlockingInstance {
        BlockingInstance::with_law(m, means, RewardLaw::Deterministic, Delays::new(d).unwrap()).unwrap()
    }

    fn two_arm() -> BlockingInstance {
        det(Matroid::uniform(2, 1).unwrap(), vec![1.0, 0.6], vec![2, 2])
    }

    #[test]
    fn dp_two_arm_alternation() {
        assert!((dp_optimal(&two_arm(), 4).unwrap() - 3.2).abs() < 1e-12);
    }

    #[test]
    fn dp_single_round_is_greedy() {
        let inst = det(Matroid::uniform(3, 2).unwrap(), vec![0.3, 0.9, 0.5], vec![3, 2, 2]);
        assert!((dp_optimal(&inst, 1).unwrap() - 1.4).abs() < 1e-12);
        let zero = det(Matroid::uniform(3, 2).unwrap(), vec![0.0; 3], vec![3, 2, 2]);
        assert_eq!(dp_optimal(&zero, 10).unwrap(), 0.0);
    }

    #[test]
    fn dp_limits() {
        let inst = det(Matroid::uniform(1, 1).unwrap(), vec![1.0], vec![1]);
        assert!(dp_optimal(&inst, DP_HORIZON_LIMIT + 1).is_err());
        let big = det(Matroid::uniform(7, 1).unwrap(), vec![0.5; 7], vec![8; 7]);
        assert!(matches!(dp_optimal(&big, 5), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn lp_two_arm() {
        let (rate, z) = lp_rate(&two_arm()).unwrap();
        assert!((rate - 0.8).abs() < 1e-12);
        assert!((z[0] - 0.5).abs() < 1e-12 && (z[1] - 0.5).abs() < 1e-12);
        assert!((lp_upper_bound(&two_arm(), 4).unwrap() - 3.2).abs() < 1e-12);
    }

    #[test]
    fn lp_unit_delays_is_max_basis() {
        let tri = Matroid::graphic(3, vec![(0, 1), (1, 2), (0, 2)]).unwrap();
        let inst = det(tri, vec![0.5, 0.9, 0.7], vec![1, 1, 1]);
        assert!((lp_upper_bound(&inst, 10).unwrap() - 16.0).abs() < 1e-9);
        let zero = det(Matroid::uniform(2, 1).unwrap(), vec![0.0, 0.0], vec![2, 3]);
        assert_eq!(lp_upper_bound(&zero, 10).unwrap(), 0.0);
    }

    #[test]
    fn cp_examples() {
        let f = SubmodularFn::explicit(2, vec![0.0, 2.0, 2.0, 3.0]).unwrap();
        let d = Delays::uniform(2, 2).unwrap();
        let cp = cp_upper_bound(&f, &d, 10).unwrap();
        assert!((cp.per_round - 2.0).abs() < 1e-9);
        assert!((cp.value - 20.0).abs() < 1e-8);
        assert!(cp.audit_max <= cp.per_round + 1e-9);

        let w = [0.5, 1.0, 2.0];
        let f = SubmodularFn::modular(&w).unwrap();
        let d = Delays::new(vec![1, 2, 4]).unwrap();
        let cp = cp_upper_bound(&f, &d, 3).unwrap();
        assert!((cp.value - 3.0 * (0.5 + 0.5 + 0.5)).abs() < 1e-9);

        let f = SubmodularFn::budget_additive(3, 2.0).unwrap();
        let cp = cp_upper_bound(&f, &Delays::uniform(3, 1).unwrap(), 5).unwrap();
        assert!((cp.value - 10.0).abs() < 1e-9);
    }

    #[test]
    fn gap_table_examples() {
        let t = (8.0f64).exp().round() as u64;
        let g = compute_gap_table(&[0.9, 0.5], t).unwrap();
        assert!((g.delta(0, 1) - 0.4).abs() < 1e-15);
        assert_eq!(g.ell(0, 1), Some(floor_tolerant(8.0 * (t as f64).ln() / 0.16)));
        assert_eq!(g.ell(1, 0), None);

        // exact e^8 through the tolerant floor
        assert_eq!(floor_tolerant(8.0 * 8.0 / (0.4f64 * 0.4)), 400);
        assert_eq!(floor_tolerant(399.5), 399);

        let g = compute_gap_table(&[0.5], 100).unwrap();
        assert_eq!(g.bound, 0.0);

        let g = compute_gap_table(&[0.9, 0.8, 0.1], 1000).unwrap();
        let lnt = 1000f64.ln();
        let want = (16.0 / 0.1 + 16.0 / 0.7) * lnt
            + std::f64::consts::PI.powi(2) / 3.0 * (0.1 + 0.8 + 0.7);
        assert!((g.bound - want).abs() < 1e-9 * want);
        assert!(compute_gap_table(&[0.4, 0.4], 10).is_err());
    }

    #[test]
    fn gap_table_uses_rank_order() {
        let a = compute_gap_table(&[0.1, 0.9, 0.8], 1000).unwrap();
        let b = compute_gap_table(&[0.9, 0.8, 0.1], 1000).unwrap();
        assert_eq!(a.rank_order, vec![1, 2, 0]);
        assert!((a.bound - b.bound).abs() < 1e-9);
    }

    #[test]
    fn decomposition_examples() {
        let mu = [0.9, 0.4, 0.7];
        let m = Matroid::uniform(3, 1).unwrap();
        let same = gap_decomposition(&m, set(&[0]), set(&[0]), &mu).unwrap();
        assert_eq!(same.total, 0.0);
        let d = gap_decomposition(&m, set(&[0]), set(&[1]), &mu).unwrap();
        assert_eq!(d.gaps, vec![(0, 1, 0.5)]);
        assert!(gap_decomposition(&m, set(&[0]), ElementSet::EMPTY, &mu).is_err());
    }

    #[test]
    fn periodize_examples() {
        let d = Delays::uniform(6, 2).unwrap();
        // one distinct element per round, valued (1,3,2,2,1,1)
        let vals = [1.0, 3.0, 2.0, 2.0, 1.0, 1.0];
        let sets: Vec<_> = (0..6).map(ElementSet::singleton).collect();
        let p = periodize(&sets, 2, &d, |s| vals[s.iter().next().unwrap()]).unwrap();
        assert_eq!(p.start, 1);
        assert!((p.average - 2.5).abs() < 1e-12);
        assert_eq!(p.sets, vec![sets[1], sets[2], sets[1], sets[2], sets[1], sets[2]]);
        assert!(is_feasible_schedule(&p.sets, &d));

        let whole = periodize(&sets, 6, &Delays::uniform(6, 6).unwrap(), |_| 1.0).unwrap();
        assert_eq!(whole.sets, sets);

        assert!(periodize(&sets, 2, &Delays::uniform(6, 3).unwrap(), |_| 1.0).is_err());
    }

    #[test]
    fn periodic_input_keeps_average() {
        let d = Delays::uniform(2, 2).unwrap();
        let sets: Vec<_> = (0..10).map(|t| ElementSet::singleton(t % 2)).collect();
        let p = periodize(&sets, 2, &d, |s| s.len() as f64).unwrap();
        assert_eq!(p.average, 1.0);
    }

    #[test]
    fn feasibility_check() {
        let d = Delays::uniform(1, 3).unwrap();
        let a = ElementSet::singleton(0);
        let e = ElementSet::EMPTY;
        assert!(is_feasible_schedule(&[a, e, e, a], &d));
        assert!(!is_feasible_schedule(&[a, e, a], &d));
    }

    #[test]
    fn report_on_two_arm() {
        let r = bound_report(&two_arm(), 4).unwrap();
        assert_eq!(r.dp_value, Some(3.2));
        assert!((r.lp_value - 3.2).abs() < 1e-12);
        assert!(r.lp_dominates_dp);
        assert_eq!(r.rank, 1);
        assert_eq!(r.f_ground, 1.0);
        assert!((r.horizon_factor - 0.8).abs() < 1e-15);
    }
}
