//! Interleaved scheduling.
//!
//! Element `i` carries a uniform offset `r_i` and is sampled at round `t`
//! iff the half-open interval `[t/d_i + r_i, (t+1)/d_i + r_i)` contains an
//! integer. Offsets are discretised to `u_i / 2^32` so the membership test
//! is exact integer arithmetic.
//!
//! Because the interval at `t + d_i` is the interval at `t` shifted by
//! exactly one, each element is sampled on a single residue class modulo
//! `d_i`. [`ScheduleCursor`] walks rounds with that periodicity instead of
//! re-evaluating the interval test.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::set::ElementSet;

/// Offset resolution `M`; the semantic offset is `u / M`.
pub const OFFSET_SCALE: u64 = 1 << 32;

/// Per-element delays, each at least one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct Delays(Vec<u64>);

impl Delays {
    pub fn new(d: Vec<u64>) -> Result<Self> {
        if let Some(i) = d.iter().position(|&x| x == 0) {
            return Err(Error::InvalidInstance(format!("delay of element {i} is zero")));
        }
        if d.len() > ElementSet::CAPACITY {
            return Err(Error::TooLarge {
                what: "delay vector",
                size: d.len() as u128,
                limit: ElementSet::CAPACITY as u128,
            });
        }
        Ok(Delays(d))
    }

    /// `k` copies of `d`.
    pub fn uniform(k: usize, d: u64) -> Result<Self> {
        Self::new(vec![d; k])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> u64 {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn max(&self) -> u64 {
        self.0.iter().copied().max().unwrap_or(1)
    }

    /// The rate vector `d^{-1}`.
    pub fn inverse(&self) -> Vec<f64> {
        self.0.iter().map(|&d| 1.0 / d as f64).collect()
    }
}

impl TryFrom<Vec<u64>> for Delays {
    type Error = Error;

    fn try_from(d: Vec<u64>) -> Result<Self> {
        Delays::new(d)
    }
}

impl From<Delays> for Vec<u64> {
    fn from(d: Delays) -> Self {
        d.0
    }
}

/// Discretised offsets `u_i` in `[0, 2^32)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OffsetVector {
    pub units: Vec<u32>,
}

impl OffsetVector {
    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    /// Semantic offset `r_i = u_i / M`.
    pub fn offset(&self, i: usize) -> f64 {
        self.units[i] as f64 / OFFSET_SCALE as f64
    }
}

/// Draws one independent uniform offset per element.
pub fn sample_offsets<R: Rng + ?Sized>(delays: &Delays, rng: &mut R) -> OffsetVector {
    OffsetVector {
        units: (0..delays.len()).map(|_| rng.gen::<u32>()).collect(),
    }
}

/// Whether `[t/d + u/M, (t+1)/d + u/M)` contains an integer.
///
/// Scaling by `d*M` turns the interval into `[N, N + M)` with
/// `N = t*M + u*d`; it holds an integer iff it holds a multiple of
/// `D = d*M`. All products fit in 128 bits for any `u64` inputs.
///
/// # Panics
/// If `d == 0`.
#[inline]
pub fn contains_integer(u: u32, d: u64, t: u64) -> bool {
    assert!(d >= 1, "delay must be positive");
    let m = OFFSET_SCALE as u128;
    let n = t as u128 * m + u as u128 * d as u128;
    let dd = d as u128 * m;
    let first_multiple = n.div_ceil(dd) * dd;
    first_multiple < n + m
}

/// The residue `t mod d` of the rounds at which the element is sampled.
///
/// Sampling rounds are `floor((n - r) d)` for integers `n >= 1`; for `n = 1`
/// this is `floor((M - u) d / M)`.
#[inline]
pub fn sampling_phase(u: u32, d: u64) -> u64 {
    assert!(d >= 1, "delay must be positive");
    let m = OFFSET_SCALE as u128;
    let first = ((m - u as u128) * d as u128 / m) as u64;
    first % d
}

/// `G_t = { i : contains_integer(u_i, d_i, t) }`.
pub fn sampled_set(off: &OffsetVector, delays: &Delays, t: u64) -> Result<ElementSet> {
    if off.len() != delays.len() {
        return Err(Error::InvalidArgument(format!(
            "{} offsets for {} delays",
            off.len(),
            delays.len()
        )));
    }
    Ok(off
        .units
        .iter()
        .zip(delays.as_slice())
        .enumerate()
        .filter(|(_, (&u, &d))| contains_integer(u, d, t))
        .map(|(i, _)| i)
        .collect())
}

/// Longest schedule period the cursor tabulates.
pub const PERIOD_TABLE_LIMIT: u64 = 1 << 16;

/// `lcm(d_1, .., d_k)`, the period of every schedule over `delays`, or
/// `None` past `limit`.
pub fn schedule_period(delays: &Delays, limit: u64) -> Option<u64> {
    let mut l = 1u64;
    for &d in delays.as_slice() {
        let g = gcd(l, d);
        l = (l / g).checked_mul(d)?;
        if l > limit {
            return None;
        }
    }
    Some(l)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Sequential walk over `G_t, G_{t+1}, ...`.
///
/// When the schedule period `lcm(d)` is at most [`PERIOD_TABLE_LIMIT`] one
/// period is tabulated up front; otherwise per-element countdowns are
/// stepped every round.
#[derive(Debug, Clone)]
pub struct ScheduleCursor {
    /// rounds until the element is next sampled
    countdown: Vec<u64>,
    delays: Vec<u64>,
    round: u64,
    table: Option<Vec<ElementSet>>,
    pos: usize,
}

impl ScheduleCursor {
    /// Positions the cursor so that the first call to [`next_set`]
    /// returns `G_start`.
    ///
    /// [`next_set`]: ScheduleCursor::next_set
    pub fn new(off: &OffsetVector, delays: &Delays, start: u64) -> Result<Self> {
        if off.len() != delays.len() {
            return Err(Error::InvalidArgument(format!(
                "{} offsets for {} delays",
                off.len(),
                delays.len()
            )));
        }
        let countdown = off
            .units
            .iter()
            .zip(delays.as_slice())
            .map(|(&u, &d)| {
                let phase = sampling_phase(u, d);
                (phase + d - start % d) % d
            })
            .collect();
        let mut cur = ScheduleCursor {
            countdown,
            delays: delays.as_slice().to_vec(),
            round: start,
            table: None,
            pos: 0,
        };
        if let Some(l) = schedule_period(delays, PERIOD_TABLE_LIMIT) {
            let mut probe = cur.clone();
            cur.table = Some((0..l).map(|_| probe.step_countdown()).collect());
        }
        Ok(cur)
    }

    /// Round whose set the next call returns.
    pub fn round(&self) -> u64 {
        self.round
    }

    /// One full period starting at the current round, when tabulated.
    pub fn period_table(&self) -> Option<&[ElementSet]> {
        self.table.as_deref().filter(|_| self.pos == 0)
    }

    #[inline]
    pub fn next_set(&mut self) -> ElementSet {
        match &self.table {
            Some(table) => {
                let s = table[self.pos];
                self.pos += 1;
                if self.pos == table.len() {
                    self.pos = 0;
                }
                self.round += 1;
                s
            }
            None => self.step_countdown(),
        }
    }

    #[inline]
    fn step_countdown(&mut self) -> ElementSet {
        let mut s = ElementSet::EMPTY;
        for (i, (c, &d)) in self.countdown.iter_mut().zip(&self.delays).enumerate() {
            if *c == 0 {
                s.insert(i);
                *c = d - 1;
            } else {
                *c -= 1;
            }
        }
        self.round += 1;
        s
    }
}
