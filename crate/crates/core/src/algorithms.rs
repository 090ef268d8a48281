//! Policies and the run loop.
//!
//! Interleaved policies (`is`, `ig`, `ib`) draw one offset vector per run
//! and follow the sampled sets `G_t`; the baselines (`greedy`, `indep`)
//! react to the current availability. All randomness comes from a
//! ChaCha8 generator seeded by the run seed, split into streams:
//!
//! | stream | use |
//! |---|---|
//! | 0 | offsets, shared by every policy |
//! | 16 + tag | reward draws |
//! | 32 + tag | sampling coins |
//!
//! Sharing stream 0 is what couples `ig` and `ib`: with equal seeds both
//! see the same `G_t` at every round. Their per-round difference
//! `mu(A_t^ig) - mu(A_t^ib)` is then non-negative pointwise, and the
//! harness reports its running sum from the two traces.
//!
//! Every greedy here breaks equal weights (true means or UCB indices) by
//! ascending element id.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{BlockingInstance, EnvState, RoundRecord, RunTrace};
use crate::error::{Error, Result};
use crate::interleave::{sample_offsets, sampled_set, Delays, OffsetVector, ScheduleCursor};
use crate::set::ElementSet;
use crate::submodular::SubmodularFn;

/// `emp_mean + sqrt(2 ln t / count)`, or `+inf` for an unplayed arm.
#[inline]
pub fn ucb_index(emp_mean: f64, count: u64, t: u64) -> f64 {
    if count == 0 {
        return f64::INFINITY;
    }
    let t = t.max(1) as f64;
    emp_mean + (2.0 * t.ln() / count as f64).sqrt()
}

/// Play counts and reward sums per arm.
#[derive(Debug, Clone, PartialEq)]
pub struct UcbState {
    counts: Vec<u64>,
    sums: Vec<f64>,
}

impl UcbState {
    pub fn new(k: usize) -> Self {
        UcbState {
            counts: vec![0; k],
            sums: vec![0.0; k],
        }
    }

    pub fn count(&self, i: usize) -> u64 {
        self.counts[i]
    }

    /// Empirical mean, 0 before the first play.
    pub fn mean(&self, i: usize) -> f64 {
        if self.counts[i] == 0 {
            0.0
        } else {
            self.sums[i] / self.counts[i] as f64
        }
    }

    #[inline]
    pub fn index(&self, i: usize, t: u64) -> f64 {
        ucb_index(self.mean(i), self.counts[i], t)
    }

    #[inline]
    pub fn update(&mut self, i: usize, reward: f64) {
        self.counts[i] += 1;
        self.sums[i] += reward;
    }
}

/// Which policy to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolicyRepr", into = "PolicyRepr")]
pub enum PolicySpec {
    /// Play every sampled element (`is`); set-function mode only.
    InterleavedSubmodular,
    /// Max-mean independent subset of `G_t` (`ig`).
    InterleavedGreedy,
    /// Max-UCB independent subset of `G_t` (`ib`).
    InterleavedUcb,
    /// Best available independent set every round (`greedy`).
    NaiveGreedy,
    /// Independent coins on available elements (`indep`); probabilities
    /// default to `1/d_i`.
    IndependentSampling { probabilities: Option<Vec<f64>> },
}

impl PolicySpec {
    pub const NAMES: [&'static str; 5] = ["is", "ig", "ib", "greedy", "indep"];

    pub fn name(&self) -> &'static str {
        Self::NAMES[self.tag() as usize]
    }

    fn tag(&self) -> u64 {
        match self {
            PolicySpec::InterleavedSubmodular => 0,
            PolicySpec::InterleavedGreedy => 1,
            PolicySpec::InterleavedUcb => 2,
            PolicySpec::NaiveGreedy => 3,
            PolicySpec::IndependentSampling { .. } => 4,
        }
    }

    pub fn is_interleaved(&self) -> bool {
        self.tag() <= 2
    }

    fn probabilities(&self, delays: &Delays) -> Result<Vec<f64>> {
        let PolicySpec::IndependentSampling { probabilities } = self else {
            return Ok(Vec::new());
        };
        match probabilities {
            None => Ok(delays.inverse()),
            Some(p) => {
                if p.len() != delays.len() {
                    return Err(Error::SizeMismatch(p.len(), delays.len()));
                }
                if let Some(i) = p.iter().position(|x| !(0.0..=1.0).contains(x)) {
                    return Err(Error::InvalidArgument(format!(
                        "sampling probability {} of element {i} is outside [0, 1]",
                        p[i]
                    )));
                }
                Ok(p.clone())
            }
        }
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "is" => PolicySpec::InterleavedSubmodular,
            "ig" => PolicySpec::InterleavedGreedy,
            "ib" => PolicySpec::InterleavedUcb,
            "greedy" => PolicySpec::NaiveGreedy,
            "indep" => PolicySpec::IndependentSampling {
                probabilities: None,
            },
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown policy `{s}`, expected one of {}",
                    Self::NAMES.join(", ")
                )))
            }
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PolicyRepr {
    Name(String),
    Full {
        policy: String,
        #[serde(default)]
        probabilities: Option<Vec<f64>>,
    },
}

impl TryFrom<PolicyRepr> for PolicySpec {
    type Error = Error;

    fn try_from(r: PolicyRepr) -> Result<Self> {
        match r {
            PolicyRepr::Name(n) => n.parse(),
            PolicyRepr::Full {
                policy,
                probabilities,
            } => match (policy.parse()?, probabilities) {
                (PolicySpec::IndependentSampling { .. }, p) => {
                    Ok(PolicySpec::IndependentSampling { probabilities: p })
                }
                (p, None) => Ok(p),
                (p, Some(_)) => Err(Error::InvalidArgument(format!(
                    "policy `{p}` takes no probabilities"
                ))),
            },
        }
    }
}

impl From<PolicySpec> for PolicyRepr {
    fn from(p: PolicySpec) -> Self {
        match p {
            PolicySpec::IndependentSampling {
                probabilities: Some(v),
            } => PolicyRepr::Full {
                policy: "indep".into(),
                probabilities: Some(v),
            },
            p => PolicyRepr::Name(p.name().into()),
        }
    }
}

/// `ig` at round `t`: greedy by true means over `G_t`.
pub fn ig_step(inst: &BlockingInstance, off: &OffsetVector, t: u64) -> Result<ElementSet> {
    let g = sampled_set(off, inst.delays(), t)?;
    let g = g.intersection(inst.matroid().ground());
    Ok(inst.matroid().greedy_unchecked(g, inst.means()))
}

/// `is` at round `t`: the sampled set itself.
pub fn is_step(f: &SubmodularFn, off: &OffsetVector, delays: &Delays, t: u64) -> Result<ElementSet> {
    if delays.len() != f.k() {
        return Err(Error::SizeMismatch(delays.len(), f.k()));
    }
    sampled_set(off, delays, t)
}

/// `ib` at round `t`: greedy by UCB indices over `G_t`. Unplayed arms have
/// infinite index and come first, lowest id first.
pub fn ib_step(
    inst: &BlockingInstance,
    off: &OffsetVector,
    t: u64,
    ucb: &UcbState,
) -> Result<ElementSet> {
    let g = sampled_set(off, inst.delays(), t)?;
    let g = g.intersection(inst.matroid().ground());
    let mut w = vec![0.0; inst.k()];
    Ok(ib_select(inst, g, t, ucb, &mut w))
}

#[inline]
fn ib_select(
    inst: &BlockingInstance,
    g: ElementSet,
    t: u64,
    ucb: &UcbState,
    w: &mut [f64],
) -> ElementSet {
    for i in g.iter() {
        w[i] = ucb.index(i, t);
    }
    inst.matroid().greedy_unchecked(g, w)
}

/// Best independent set of available arms by true means.
pub fn naive_greedy_step(inst: &BlockingInstance, st: &EnvState) -> ElementSet {
    let avail = st.available_arms().intersection(inst.matroid().ground());
    inst.matroid().greedy_unchecked(avail, inst.means())
}

/// Each available element joins by an independent coin of its probability.
pub fn independent_sampling_step<R: Rng + ?Sized>(
    available: ElementSet,
    probs: &[f64],
    rng: &mut R,
) -> ElementSet {
    let mut s = ElementSet::EMPTY;
    for i in available.iter() {
        if rng.gen::<f64>() < probs[i] {
            s.insert(i);
        }
    }
    s
}

/// Marginal-gain greedy for a monotone set function: repeatedly adds the
/// available element of largest gain (lowest id on ties), zero gains
/// included. Returns every available element for monotone `f`, which is
/// the all-available behaviour of naive greedy without a matroid.
pub fn set_function_greedy_step(f: &SubmodularFn, available: ElementSet) -> ElementSet {
    let mut acc = ElementSet::EMPTY;
    let mut base = f.value(acc);
    let mut rest = available;
    while !rest.is_empty() {
        let mut best: Option<(usize, f64)> = None;
        for i in rest.iter() {
            let gain = f.value(acc.with(i)) - base;
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((i, gain));
            }
        }
        let (i, gain) = best.expect("rest is non-empty");
        acc.insert(i);
        rest.remove(i);
        base += gain;
    }
    acc
}

/// What a run exposes per round to an [`Observer`].
#[derive(Debug, Clone, Copy)]
pub struct RoundView<'a> {
    pub t: u64,
    pub sampled: Option<ElementSet>,
    pub played: ElementSet,
    pub rewards: &'a [f64],
    pub reward: f64,
    pub expected: f64,
}

pub trait Observer {
    fn observe(&mut self, round: &RoundView<'_>);
}

impl Observer for RunTrace {
    fn observe(&mut self, r: &RoundView<'_>) {
        self.push(RoundRecord {
            t: r.t,
            sampled: r.sampled,
            played: r.played,
            rewards: r.rewards.to_vec(),
            reward: r.reward,
            expected: r.expected,
        });
    }
}

/// Running sums with snapshots at chosen rounds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Totals {
    pub rounds: u64,
    pub reward: f64,
    pub expected: f64,
    checkpoints: Vec<u64>,
    /// `(t, reward, expected)` after each checkpoint round.
    pub snapshots: Vec<(u64, f64, f64)>,
}

impl Totals {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_checkpoints(mut checkpoints: Vec<u64>) -> Self {
        checkpoints.sort_unstable();
        checkpoints.dedup();
        Totals {
            checkpoints,
            ..Self::default()
        }
    }
}

impl Observer for Totals {
    #[inline]
    fn observe(&mut self, r: &RoundView<'_>) {
        self.rounds += 1;
        self.reward += r.reward;
        self.expected += r.expected;
        if self.snapshots.len() < self.checkpoints.len() && self.checkpoints[self.snapshots.len()] == r.t {
            self.snapshots.push((r.t, self.reward, self.expected));
        }
    }
}

impl<A: Observer, B: Observer> Observer for (A, B) {
    fn observe(&mut self, r: &RoundView<'_>) {
        self.0.observe(r);
        self.1.observe(r);
    }
}

/// End-of-run facts that do not depend on the observer.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub offsets: Option<OffsetVector>,
    pub play_counts: Vec<u64>,
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

const OFFSET_STREAM: u64 = 0;
const REWARD_STREAM: u64 = 16;
const COIN_STREAM: u64 = 32;

/// The offsets any interleaved policy draws for `seed`.
pub fn offsets_for_seed(delays: &Delays, seed: u64) -> OffsetVector {
    sample_offsets(delays, &mut stream(seed, OFFSET_STREAM))
}

/// Ids sorted by descending weight, ascending id on ties.
fn weight_order(weights: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| (weights[b] + 0.0).total_cmp(&(weights[a] + 0.0)).then(a.cmp(&b)));
    order
}

/// Runs a policy on a blocking instance and records the full trace.
pub fn run(policy: &PolicySpec, inst: &BlockingInstance, rounds: u64, seed: u64) -> Result<RunTrace> {
    let mut trace = RunTrace::new(policy.name(), seed, inst.k());
    let summary = run_observed(policy, inst, rounds, seed, &mut trace)?;
    trace.offsets = summary.offsets;
    Ok(trace)
}

/// The run loop on a blocking instance, reporting each round to `obs`.
pub fn run_observed<O: Observer + ?Sized>(
    policy: &PolicySpec,
    inst: &BlockingInstance,
    rounds: u64,
    seed: u64,
    obs: &mut O,
) -> Result<RunSummary> {
    if rounds == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    if matches!(policy, PolicySpec::InterleavedSubmodular) {
        return Err(Error::InvalidArgument(
            "policy `is` plays a set function; use run_set_function".into(),
        ));
    }
    let k = inst.k();
    let m = inst.matroid();
    let ground = m.ground();
    let delays = inst.delays();
    let order = weight_order(inst.means());
    let probs = policy.probabilities(delays)?;

    let mut reward_rng = stream(seed, REWARD_STREAM + policy.tag());
    let mut coin_rng = stream(seed, COIN_STREAM + policy.tag());
    let offsets = policy
        .is_interleaved()
        .then(|| offsets_for_seed(delays, seed));
    let mut cursor = match &offsets {
        Some(off) => Some(ScheduleCursor::new(off, delays, 1)?),
        None => None,
    };

    // ig depends on G_t alone, so one period of its plays can be tabulated
    let ig_plays: Option<Vec<ElementSet>> = match (policy, &cursor) {
        (PolicySpec::InterleavedGreedy, Some(c)) => c.period_table().map(|table| {
            table
                .iter()
                .map(|&g| m.greedy_in_order(&order, g.intersection(ground)))
                .collect()
        }),
        _ => None,
    };
    let mut pos = 0usize;

    let mut st = EnvState::new(delays);
    let mut ucb = UcbState::new(k);
    let mut w = vec![0.0; k];
    let mut rewards = Vec::with_capacity(k);
    let mut counts = vec![0u64; k];

    for t in 1..=rounds {
        let sampled = cursor.as_mut().map(|c| c.next_set().intersection(ground));
        let play = match policy {
            PolicySpec::InterleavedGreedy => match &ig_plays {
                Some(plays) => {
                    let a = plays[pos];
                    pos += 1;
                    if pos == plays.len() {
                        pos = 0;
                    }
                    a
                }
                None => m.greedy_in_order(&order, sampled.unwrap_or_default()),
            },
            PolicySpec::InterleavedUcb => ib_select(inst, sampled.unwrap_or_default(), t, &ucb, &mut w),
            PolicySpec::NaiveGreedy => m.greedy_in_order(&order, st.available_arms()),
            PolicySpec::IndependentSampling { .. } => {
                let coins = independent_sampling_step(st.available_arms(), &probs, &mut coin_rng);
                m.greedy_in_order(&order, coins.intersection(ground))
            }
            PolicySpec::InterleavedSubmodular => unreachable!(),
        };
        st.step(inst, play, &mut reward_rng, &mut rewards)?;
        let mut reward = 0.0;
        let mut expected = 0.0;
        for (i, &r) in play.iter().zip(&rewards) {
            reward += r;
            expected += inst.means()[i];
            counts[i] += 1;
            if matches!(policy, PolicySpec::InterleavedUcb) {
                ucb.update(i, r);
            }
        }
        obs.observe(&RoundView {
            t,
            sampled,
            played: play,
            rewards: &rewards,
            reward,
            expected,
        });
    }
    Ok(RunSummary {
        offsets,
        play_counts: counts,
    })
}

/// Runs a policy against a set function under blocking, no matroid.
///
/// Supports `is`, `greedy` (all-available marginal greedy) and `indep`.
pub fn run_set_function(
    policy: &PolicySpec,
    f: &SubmodularFn,
    delays: &Delays,
    rounds: u64,
    seed: u64,
) -> Result<RunTrace> {
    let mut trace = RunTrace::new(policy.name(), seed, delays.len());
    let summary = run_set_function_observed(policy, f, delays, rounds, seed, &mut trace)?;
    trace.offsets = summary.offsets;
    Ok(trace)
}

pub fn run_set_function_observed<O: Observer + ?Sized>(
    policy: &PolicySpec,
    f: &SubmodularFn,
    delays: &Delays,
    rounds: u64,
    seed: u64,
    obs: &mut O,
) -> Result<RunSummary> {
    if rounds == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let k = f.k();
    if delays.len() != k {
        return Err(Error::SizeMismatch(delays.len(), k));
    }
    if matches!(policy, PolicySpec::InterleavedGreedy | PolicySpec::InterleavedUcb) {
        return Err(Error::InvalidArgument(format!(
            "policy `{policy}` needs a matroid instance"
        )));
    }
    let probs = policy.probabilities(delays)?;
    let mut coin_rng = stream(seed, COIN_STREAM + policy.tag());
    let offsets = policy
        .is_interleaved()
        .then(|| offsets_for_seed(delays, seed));
    let mut cursor = match &offsets {
        Some(off) => Some(ScheduleCursor::new(off, delays, 1)?),
        None => None,
    };
    let mut st = EnvState::new(delays);
    let mut counts = vec![0u64; k];
    for t in 1..=rounds {
        let sampled = cursor.as_mut().map(|c| c.next_set());
        let avail = st.available_arms();
        let play = match policy {
            PolicySpec::InterleavedSubmodular => sampled.unwrap_or_default(),
            PolicySpec::NaiveGreedy => set_function_greedy_step(f, avail),
            PolicySpec::IndependentSampling { .. } => {
                independent_sampling_step(avail, &probs, &mut coin_rng)
            }
            _ => unreachable!(),
        };
        if !play.is_subset(avail) {
            return Err(Error::ProtocolViolation {
                round: t,
                reason: format!("played blocked arms {:?}", play.difference(avail)),
            });
        }
        st.advance(play);
        for i in play.iter() {
            counts[i] += 1;
        }
        let v = f.value(play);
        obs.observe(&RoundView {
            t,
            sampled,
            played: play,
            rewards: &[],
            reward: v,
            expected: v,
        });
    }
    Ok(RunSummary {
        offsets,
        play_counts: counts,
    })
}

/// Replays a fixed schedule `t -> A_t` against a set function, checking
/// blocking.
pub fn run_schedule<S: FnMut(u64) -> ElementSet>(
    f: &SubmodularFn,
    delays: &Delays,
    rounds: u64,
    mut schedule: S,
) -> Result<RunTrace> {
    let k = f.k();
    if delays.len() != k {
        return Err(Error::SizeMismatch(delays.len(), k));
    }
    let mut trace = RunTrace::new("schedule", 0, k);
    let mut st = EnvState::new(delays);
    for t in 1..=rounds {
        let play = schedule(t);
        if let Some(e) = play.first_at_or_above(k) {
            return Err(Error::ElementOutOfRange { element: e, size: k });
        }
        let avail = st.available_arms();
        if !play.is_subset(avail) {
            return Err(Error::ProtocolViolation {
                round: t,
                reason: format!("played blocked arms {:?}", play.difference(avail)),
            });
        }
        st.advance(play);
        let v = f.value(play);
        trace.observe(&RoundView {
            t,
            sampled: None,
            played: play,
            rewards: &[],
            reward: v,
            expected: v,
        });
    }
    Ok(trace)
}
