//! The blocking bandit environment.
//!
//! Playing arm `i` blocks it for the next `d_i - 1` rounds. Rewards are drawn
//! only for played arms (semi-bandit feedback). Rounds are numbered from 1.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interleave::{Delays, OffsetVector};
use crate::matroid::Matroid;
use crate::set::ElementSet;

/// Per-arm reward distribution with mean `mu_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardLaw {
    Bernoulli,
    Deterministic,
}

impl RewardLaw {
    #[inline]
    pub fn draw<R: Rng + ?Sized>(self, mean: f64, rng: &mut R) -> f64 {
        match self {
            RewardLaw::Deterministic => mean,
            RewardLaw::Bernoulli => {
                if rng.gen::<f64>() < mean {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Laws {
    Shared(RewardLaw),
    PerArm(Vec<RewardLaw>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct InstanceDescriptor {
    matroid: Matroid,
    means: Vec<f64>,
    delays: Delays,
    laws: Laws,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    horizon_hint: Option<u64>,
}

/// A matroid blocking bandit instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceDescriptor", into = "InstanceDescriptor")]
pub struct BlockingInstance {
    means: Vec<f64>,
    laws: Vec<RewardLaw>,
    delays: Delays,
    matroid: Matroid,
    horizon_hint: Option<u64>,
}

impl TryFrom<InstanceDescriptor> for BlockingInstance {
    type Error = Error;

    fn try_from(d: InstanceDescriptor) -> Result<Self> {
        let laws = match d.laws {
            Laws::Shared(l) => vec![l; d.means.len()],
            Laws::PerArm(v) => v,
        };
        let mut inst = BlockingInstance::new(d.matroid, d.means, laws, d.delays)?;
        inst.horizon_hint = d.horizon_hint;
        Ok(inst)
    }
}

impl From<BlockingInstance> for InstanceDescriptor {
    fn from(b: BlockingInstance) -> Self {
        InstanceDescriptor {
            matroid: b.matroid,
            means: b.means,
            delays: b.delays,
            laws: Laws::PerArm(b.laws),
            horizon_hint: b.horizon_hint,
        }
    }
}

impl BlockingInstance {
    pub fn new(
        matroid: Matroid,
        means: Vec<f64>,
        laws: Vec<RewardLaw>,
        delays: Delays,
    ) -> Result<Self> {
        let k = matroid.k();
        if means.len() != k {
            return Err(Error::SizeMismatch(means.len(), k));
        }
        if laws.len() != k {
            return Err(Error::SizeMismatch(laws.len(), k));
        }
        if delays.len() != k {
            return Err(Error::SizeMismatch(delays.len(), k));
        }
        if let Some((element, &weight)) = means
            .iter()
            .enumerate()
            .find(|(_, m)| !(0.0..=1.0).contains(*m))
        {
            return Err(Error::InvalidWeight { element, weight });
        }
        Ok(BlockingInstance {
            means,
            laws,
            delays,
            matroid,
            horizon_hint: None,
        })
    }

    /// Every arm uses the same law.
    pub fn with_law(matroid: Matroid, means: Vec<f64>, law: RewardLaw, delays: Delays) -> Result<Self> {
        let k = means.len();
        Self::new(matroid, means, vec![law; k], delays)
    }

    pub fn with_horizon_hint(mut self, t: u64) -> Self {
        self.horizon_hint = Some(t);
        self
    }

    pub fn k(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn laws(&self) -> &[RewardLaw] {
        &self.laws
    }

    pub fn delays(&self) -> &Delays {
        &self.delays
    }

    pub fn matroid(&self) -> &Matroid {
        &self.matroid
    }

    /// For reporting only.
    pub fn horizon_hint(&self) -> Option<u64> {
        self.horizon_hint
    }

    /// `mu(S)`.
    pub fn mean_of(&self, s: ElementSet) -> f64 {
        s.iter().map(|i| self.means[i]).sum()
    }

    /// Errors unless all means differ, as the regret diagnostics assume.
    pub fn require_distinct_means(&self) -> Result<()> {
        for i in 0..self.k() {
            for j in i + 1..self.k() {
                if self.means[i] == self.means[j] {
                    return Err(Error::InvalidInstance(format!(
                        "arms {i} and {j} share mean {}",
                        self.means[i]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Blocking state of every arm.
///
/// Arm `i` played at round `t` is free again at round `t + d_i`. Releases
/// are kept in a ring indexed by round modulo `d_max`, so advancing a round
/// costs time proportional to the played set only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvState {
    /// The round about to be played, starting at 1.
    pub round: u64,
    delays: Vec<u64>,
    free_at: Vec<u64>,
    blocked: ElementSet,
    release: Vec<ElementSet>,
    /// `round % release.len()`
    slot: usize,
}

impl EnvState {
    pub fn new(delays: &Delays) -> Self {
        let k = delays.len();
        EnvState {
            round: 1,
            delays: delays.as_slice().to_vec(),
            free_at: vec![0; k],
            blocked: ElementSet::EMPTY,
            release: vec![ElementSet::EMPTY; delays.max() as usize],
            slot: 1 % delays.max() as usize,
        }
    }

    pub fn k(&self) -> usize {
        self.delays.len()
    }

    /// Rounds until arm `i` is available; 0 means available now.
    pub fn remaining(&self, i: usize) -> u64 {
        self.free_at[i].saturating_sub(self.round)
    }

    #[inline]
    pub fn available_arms(&self) -> ElementSet {
        ElementSet::full(self.k()).difference(self.blocked)
    }

    /// Checks `play` against blocking and independence.
    #[inline]
    pub fn check_play(&self, matroid: &Matroid, play: ElementSet) -> Result<()> {
        if play.is_empty() {
            return Ok(());
        }
        if let Some(e) = play.first_at_or_above(self.k()) {
            return Err(Error::ElementOutOfRange {
                element: e,
                size: self.k(),
            });
        }
        let blocked = play.intersection(self.blocked);
        if !blocked.is_empty() {
            return Err(Error::ProtocolViolation {
                round: self.round,
                reason: format!("played blocked arms {blocked:?}"),
            });
        }
        if !play.is_subset(matroid.ground()) || !matroid.independent_unchecked(play) {
            return Err(Error::ProtocolViolation {
                round: self.round,
                reason: format!("played dependent set {play:?}"),
            });
        }
        Ok(())
    }

    /// Advances one round after `play` without drawing rewards. `play` must
    /// already be legal.
    #[inline]
    pub fn advance(&mut self, play: ElementSet) {
        let t = self.round;
        let w = self.release.len();
        for i in play.iter() {
            let d = self.delays[i];
            self.free_at[i] = t + d;
            if d > 1 {
                self.blocked.insert(i);
                let mut at = self.slot + d as usize;
                if at >= w {
                    at -= w;
                }
                self.release[at].insert(i);
            }
        }
        self.round = t + 1;
        self.slot += 1;
        if self.slot == w {
            self.slot = 0;
        }
        let slot = &mut self.release[self.slot];
        self.blocked = self.blocked.difference(*slot);
        *slot = ElementSet::EMPTY;
    }

    /// Plays one round: validates `play`, draws one reward per played arm
    /// (ascending id order) into `rewards`, and advances the state.
    #[inline]
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        inst: &BlockingInstance,
        play: ElementSet,
        rng: &mut R,
        rewards: &mut Vec<f64>,
    ) -> Result<()> {
        self.check_play(inst.matroid(), play)?;
        rewards.clear();
        for i in play.iter() {
            rewards.push(inst.laws[i].draw(inst.means[i], rng));
        }
        self.advance(play);
        Ok(())
    }
}

/// One recorded round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub t: u64,
    /// `G_t` for interleaved policies.
    pub sampled: Option<ElementSet>,
    pub played: ElementSet,
    /// Realized reward of each played arm in ascending id order; empty when
    /// the round reward is a set-function value.
    pub rewards: Vec<f64>,
    /// Realized round reward.
    pub reward: f64,
    /// Expected round reward given the played set.
    pub expected: f64,
}

/// A complete run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub algo: String,
    pub seed: u64,
    pub offsets: Option<OffsetVector>,
    pub rounds: Vec<RoundRecord>,
    /// Final play count of each arm.
    pub play_counts: Vec<u64>,
    pub cumulative_reward: f64,
}

impl RunTrace {
    pub fn new(algo: &str, seed: u64, k: usize) -> Self {
        RunTrace {
            algo: algo.to_string(),
            seed,
            offsets: None,
            rounds: Vec::new(),
            play_counts: vec![0; k],
            cumulative_reward: 0.0,
        }
    }

    pub fn push(&mut self, rec: RoundRecord) {
        for i in rec.played.iter() {
            self.play_counts[i] += 1;
        }
        self.cumulative_reward += rec.reward;
        self.rounds.push(rec);
    }

    pub fn horizon(&self) -> u64 {
        self.rounds.len() as u64
    }

    pub fn average_reward(&self) -> f64 {
        if self.rounds.is_empty() {
            0.0
        } else {
            self.cumulative_reward / self.rounds.len() as f64
        }
    }

    pub fn expected_total(&self) -> f64 {
        self.rounds.iter().map(|r| r.expected).sum()
    }

    /// Plays of arm `i` among rounds before `t`.
    pub fn plays_before(&self, i: usize, t: u64) -> u64 {
        self.rounds
            .iter()
            .take_while(|r| r.t < t)
            .filter(|r| r.played.contains(i))
            .count() as u64
    }

    /// CSV with columns `t, algo, sampled_set, played_set, reward,
    /// cum_reward`. Sets print as space separated ids.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv write failed: {e}"));
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "algo", "sampled_set", "played_set", "reward", "cum_reward"])
            .map_err(io)?;
        let mut cum = 0.0;
        for r in &self.rounds {
            cum += r.reward;
            let sampled = r.sampled.map(|s| s.to_string()).unwrap_or_default();
            w.write_record([
                r.t.to_string(),
                self.algo.clone(),
                sampled,
                r.played.to_string(),
                r.reward.to_string(),
                cum.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::InvalidArgument(format!("csv write failed: {e}")))?;
        Ok(())
    }
}
