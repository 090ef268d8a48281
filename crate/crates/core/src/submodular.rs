//! Monotone submodular set functions.
//!
//! Every function lives on the ground set `{0, .., k-1}`. Besides plain
//! evaluation this module computes the multilinear extension `F(x)` (exactly
//! by enumeration, or by sampling) and the concave closure `f^+(x)` through
//! a distribution LP solved with [`crate::simplex`].

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matroid::Matroid;
use crate::set::ElementSet;
use crate::simplex::{solve_lp, LinearProgram, LpStatus, Relation};

/// Largest ground set for exact multilinear extension.
pub const MULTILINEAR_EXACT_LIMIT: usize = 20;
/// Largest ground set for the closure LP and exhaustive property checks.
pub const CLOSURE_LIMIT: usize = 12;

const TOL: f64 = 1e-9;

/// A monotone submodular function with `f(empty) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubmodularFn {
    /// `f(S) = max { w(I) : I independent, I within S }`.
    WeightedRank { matroid: Matroid, weights: Vec<f64> },
    /// `f(S) = total weight of items covered by S`; `covers[i]` lists the
    /// items of element `i`.
    Coverage {
        covers: Vec<Vec<usize>>,
        item_weights: Vec<f64>,
    },
    /// `f(S) = min(|S|, cap)`.
    BudgetAdditive { k: usize, cap: f64 },
    /// A full table, `values[S.bits()] = f(S)`.
    Explicit { k: usize, values: Vec<f64> },
}

impl SubmodularFn {
    pub fn weighted_rank(matroid: Matroid, weights: Vec<f64>) -> Result<Self> {
        let f = SubmodularFn::WeightedRank { matroid, weights };
        f.validate()?;
        Ok(f)
    }

    pub fn coverage(covers: Vec<Vec<usize>>, item_weights: Vec<f64>) -> Result<Self> {
        let f = SubmodularFn::Coverage {
            covers,
            item_weights,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn budget_additive(k: usize, cap: f64) -> Result<Self> {
        let f = SubmodularFn::BudgetAdditive { k, cap };
        f.validate()?;
        Ok(f)
    }

    /// Builds a table function and checks the axioms exhaustively when
    /// `k <= 12`.
    pub fn explicit(k: usize, values: Vec<f64>) -> Result<Self> {
        let f = SubmodularFn::Explicit { k, values };
        f.validate()?;
        Ok(f)
    }

    /// `f(S) = sum of w_i over S`.
    pub fn modular(weights: &[f64]) -> Result<Self> {
        let k = weights.len();
        Self::coverage((0..k).map(|i| vec![i]).collect(), weights.to_vec())
    }

    /// Parses `bitmask value` lines. Blank lines and `#` comments are
    /// skipped; bitmasks may be decimal or use a `0x`/`0b` prefix. Every one
    /// of the `2^k` subsets must appear exactly once.
    pub fn parse_table(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = || Error::InvalidFunction(format!("line {}: expected `bitmask value`", n + 1));
            let mut parts = line.split_whitespace();
            let (Some(mask), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(bad());
            };
            let mask = parse_mask(mask).ok_or_else(bad)?;
            let value: f64 = value.parse().map_err(|_| bad())?;
            entries.push((mask, value));
        }
        let len = entries.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::InvalidFunction(format!(
                "table has {len} entries, expected 2^k"
            )));
        }
        let k = len.trailing_zeros() as usize;
        let mut values = vec![f64::NAN; len];
        for (mask, v) in entries {
            if mask >= len as u64 {
                return Err(Error::InvalidFunction(format!(
                    "bitmask {mask} outside a ground set of {k} elements"
                )));
            }
            if !values[mask as usize].is_nan() {
                return Err(Error::InvalidFunction(format!("bitmask {mask} listed twice")));
            }
            values[mask as usize] = v;
        }
        Self::explicit(k, values)
    }

    pub fn load_table(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidArgument(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::parse_table(&text)
    }

    /// Ground set size.
    pub fn k(&self) -> usize {
        match self {
            SubmodularFn::WeightedRank { matroid, .. } => matroid.k(),
            SubmodularFn::Coverage { covers, .. } => covers.len(),
            SubmodularFn::BudgetAdditive { k, .. } | SubmodularFn::Explicit { k, .. } => *k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SubmodularFn::WeightedRank { matroid, weights } => {
                if weights.len() != matroid.k() {
                    return Err(Error::SizeMismatch(weights.len(), matroid.k()));
                }
                if let Some((element, &weight)) = weights
                    .iter()
                    .enumerate()
                    .find(|(_, w)| !w.is_finite() || **w < 0.0)
                {
                    return Err(Error::InvalidWeight { element, weight });
                }
            }
            SubmodularFn::Coverage {
                covers,
                item_weights,
            } => {
                if covers.len() > ElementSet::CAPACITY {
                    return Err(too_many(covers.len()));
                }
                if let Some((element, &weight)) = item_weights
                    .iter()
                    .enumerate()
                    .find(|(_, w)| !w.is_finite() || **w < 0.0)
                {
                    return Err(Error::InvalidWeight { element, weight });
                }
                for (i, items) in covers.iter().enumerate() {
                    if let Some(&j) = items.iter().find(|&&j| j >= item_weights.len()) {
                        return Err(Error::InvalidFunction(format!(
                            "element {i} covers unknown item {j}"
                        )));
                    }
                }
            }
            SubmodularFn::BudgetAdditive { k, cap } => {
                if *k > ElementSet::CAPACITY {
                    return Err(too_many(*k));
                }
                if !(cap.is_finite() && *cap >= 0.0) {
                    return Err(Error::InvalidFunction(format!("budget cap {cap} must be >= 0")));
                }
            }
            SubmodularFn::Explicit { k, values } => {
                if *k > 30 {
                    return Err(too_many(*k));
                }
                if values.len() != 1usize << k {
                    return Err(Error::SizeMismatch(values.len(), 1usize << k));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidFunction("table has a non-finite value".into()));
                }
                if values[0].abs() > TOL {
                    return Err(Error::InvalidFunction(format!(
                        "f(empty) = {}, expected 0",
                        values[0]
                    )));
                }
                if *k <= CLOSURE_LIMIT {
                    self.check_axioms()?;
                }
            }
        }
        Ok(())
    }

    /// Exhaustive monotonicity and submodularity check, `k <= 12`.
    ///
    /// Uses the local forms `f(S+i) >= f(S)` and
    /// `f(S+i) + f(S+j) >= f(S+i+j) + f(S)`, which imply the global ones.
    pub fn check_axioms(&self) -> Result<()> {
        let k = self.k();
        if k > CLOSURE_LIMIT {
            return Err(Error::TooLarge {
                what: "exhaustive submodularity check",
                size: k as u128,
                limit: CLOSURE_LIMIT as u128,
            });
        }
        let table = self.table();
        if table[0].abs() > TOL {
            return Err(Error::InvalidFunction(format!("f(empty) = {}", table[0])));
        }
        let full = (1u64 << k) - 1;
        for s in 0..=full {
            let fs = table[s as usize];
            for i in 0..k {
                let bi = 1u64 << i;
                if s & bi != 0 {
                    continue;
                }
                let fi = table[(s | bi) as usize];
                if fi < fs - TOL {
                    return Err(Error::InvalidFunction(format!(
                        "not monotone: adding {i} to {:?} lowers the value",
                        ElementSet::from_bits(s)
                    )));
                }
                for j in i + 1..k {
                    let bj = 1u64 << j;
                    if s & bj != 0 {
                        continue;
                    }
                    let fj = table[(s | bj) as usize];
                    let fij = table[(s | bi | bj) as usize];
                    if fi + fj < fij + fs - TOL {
                        return Err(Error::InvalidFunction(format!(
                            "not submodular at {:?} with {i}, {j}",
                            ElementSet::from_bits(s)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// `f(S)`; errors if `S` leaves the ground set.
    pub fn eval(&self, s: ElementSet) -> Result<f64> {
        let k = self.k();
        if let Some(e) = s.first_at_or_above(k) {
            return Err(Error::ElementOutOfRange { element: e, size: k });
        }
        Ok(self.value(s))
    }

    /// `f(S)` without range checks.
    pub(crate) fn value(&self, s: ElementSet) -> f64 {
        match self {
            SubmodularFn::WeightedRank { matroid, weights } => {
                let s = s.intersection(matroid.ground());
                matroid
                    .greedy_unchecked(s, weights)
                    .iter()
                    .map(|e| weights[e])
                    .sum()
            }
            SubmodularFn::Coverage {
                covers,
                item_weights,
            } => {
                let mut seen = vec![false; item_weights.len()];
                let mut total = 0.0;
                for e in s.iter() {
                    for &j in &covers[e] {
                        if !seen[j] {
                            seen[j] = true;
                            total += item_weights[j];
                        }
                    }
                }
                total
            }
            SubmodularFn::BudgetAdditive { cap, .. } => (s.len() as f64).min(*cap),
            SubmodularFn::Explicit { values, .. } => values[s.bits() as usize],
        }
    }

    /// Values of all `2^k` subsets, indexed by bitmask.
    pub fn table(&self) -> Vec<f64> {
        match self {
            SubmodularFn::Explicit { values, .. } => values.clone(),
            _ => ElementSet::full(self.k())
                .subsets()
                .map(|s| self.value(s))
                .collect(),
        }
    }

    /// `F(x) = E[f(S)]` with `S` drawn by independent coins of bias `x`,
    /// summed over all `2^k` subsets.
    pub fn multilinear_exact(&self, x: &MarginalVector) -> Result<f64> {
        let k = self.k();
        self.check_dim(x)?;
        if k > MULTILINEAR_EXACT_LIMIT {
            return Err(Error::TooLarge {
                what: "exact multilinear extension",
                size: k as u128,
                limit: MULTILINEAR_EXACT_LIMIT as u128,
            });
        }
        let x = x.as_slice();
        // probabilities of every subset, built one element at a time
        let mut prob = vec![1.0f64];
        for &xi in x {
            let n = prob.len();
            prob.resize(2 * n, 0.0);
            for s in 0..n {
                let p = prob[s];
                prob[s] = p * (1.0 - xi);
                prob[s + n] = p * xi;
            }
        }
        let mut total = 0.0;
        for (bits, &p) in prob.iter().enumerate() {
            if p != 0.0 {
                total += p * self.value(ElementSet::from_bits(bits as u64));
            }
        }
        Ok(total)
    }

    /// Monte Carlo estimate of `F(x)` from `n` draws, with its standard
    /// error.
    pub fn multilinear_mc<R: Rng + ?Sized>(
        &self,
        x: &MarginalVector,
        n: usize,
        rng: &mut R,
    ) -> Result<(f64, f64)> {
        self.check_dim(x)?;
        if n == 0 {
            return Err(Error::InvalidArgument("sample count must be positive".into()));
        }
        let x = x.as_slice();
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for draw in 1..=n {
            let mut s = ElementSet::EMPTY;
            for (i, &xi) in x.iter().enumerate() {
                if rng.gen::<f64>() < xi {
                    s.insert(i);
                }
            }
            let v = self.value(s);
            let delta = v - mean;
            mean += delta / draw as f64;
            m2 += delta * (v - mean);
        }
        let stderr = if n > 1 {
            (m2 / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Ok((mean, stderr))
    }

    /// `f^+(x) = max sum a_S f(S)` over distributions `a` on subsets whose
    /// element marginals equal `x`.
    pub fn concave_closure(&self, x: &MarginalVector) -> Result<f64> {
        let k = self.k();
        self.check_dim(x)?;
        if k > CLOSURE_LIMIT {
            return Err(Error::TooLarge {
                what: "concave closure",
                size: k as u128,
                limit: CLOSURE_LIMIT as u128,
            });
        }
        let table = self.table();
        let n = table.len();
        let mut lp = LinearProgram::maximize(table);
        for (i, &xi) in x.as_slice().iter().enumerate() {
            let row = (0..n).map(|s| ((s >> i) & 1) as f64).collect();
            lp.constrain(row, Relation::Eq, xi);
        }
        lp.constrain(vec![1.0; n], Relation::Eq, 1.0);
        let out = solve_lp(&lp)?;
        match out.status {
            LpStatus::Optimal => Ok(out.value),
            s => Err(Error::Internal(format!("concave closure LP reported {s:?}"))),
        }
    }

    fn check_dim(&self, x: &MarginalVector) -> Result<()> {
        if x.len() != self.k() {
            Err(Error::SizeMismatch(x.len(), self.k()))
        } else {
            Ok(())
        }
    }
}

fn too_many(k: usize) -> Error {
    Error::TooLarge {
        what: "ground set",
        size: k as u128,
        limit: ElementSet::CAPACITY as u128,
    }
}

fn parse_mask(s: &str) -> Option<u64> {
    if let Some(hex) = s.strip_prefix("0x") {
        u64::from_str_radix(hex, 16).ok()
    } else if let Some(bin) = s.strip_prefix("0b") {
        u64::from_str_radix(bin, 2).ok()
    } else {
        s.parse().ok()
    }
}

/// A point of `[0, 1]^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MarginalVector(Vec<f64>);

impl MarginalVector {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if let Some(i) = x.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument(format!(
                "coordinate {i} = {} is outside [0, 1]",
                x[i]
            )));
        }
        Ok(MarginalVector(x))
    }

    /// The indicator vector of `s` in dimension `k`.
    pub fn indicator(s: ElementSet, k: usize) -> Self {
        MarginalVector((0..k).map(|i| if s.contains(i) { 1.0 } else { 0.0 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for MarginalVector {
    type Error = Error;

    fn try_from(x: Vec<f64>) -> Result<Self> {
        MarginalVector::new(x)
    }
}

impl From<MarginalVector> for Vec<f64> {
    fn from(x: MarginalVector) -> Self {
        x.0
    }
}
