//! Experiment configs, seeded replications, reports and canned
//! reproductions.
//!
//! Replication `r` of an experiment with base seed `s` runs every policy
//! with seed `splitmix64` output number `r + 1` of a generator started at
//! `s` (see [`replication_seed`]). Policies of one replication therefore
//! share the offset stream and couple as described in
//! [`crate::algorithms`].

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{
    offsets_for_seed, run, run_observed, run_schedule, run_set_function, run_set_function_observed,
    PolicySpec, Totals,
};
use crate::env::{BlockingInstance, RunTrace};
use crate::error::Error;
use crate::fixtures;
use crate::interleave::{Delays, ScheduleCursor};
use crate::oracles::{
    bound_report, compute_gap_table, cp_upper_bound, dp_optimal, dp_optimal_set_function,
    finite_horizon_factor, lp_upper_bound, BoundReport, CpBound, DP_HORIZON_LIMIT, DP_STATE_LIMIT,
};
use crate::set::ElementSet;
use crate::submodular::{MarginalVector, SubmodularFn};

/// Harness failures, each with a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("acceptance failure: {0}")]
    Acceptance(String),
    #[error("invariant violation: {0}")]
    Invariant(String),
}

impl HarnessError {
    /// 1 for config and i/o errors, 2 for a failed reproduction, 3 for a
    /// broken internal invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Io(_) => 1,
            HarnessError::Acceptance(_) => 2,
            HarnessError::Invariant(_) => 3,
        }
    }
}

impl From<Error> for HarnessError {
    fn from(e: Error) -> Self {
        match e {
            Error::ProtocolViolation { .. } | Error::Internal(_) => HarnessError::Invariant(e.to_string()),
            _ => HarnessError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;

/// One SplitMix64 step: advances `state` and returns the mixed output.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `r`: output `r + 1` of SplitMix64 started at `base`.
pub fn replication_seed(base: u64, r: u64) -> u64 {
    let mut state = base.wrapping_add(r.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    splitmix64(&mut state)
}

/// A set function given inline or as a `bitmask value` table file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionConfig {
    TableFile { table_file: PathBuf },
    Inline(SubmodularFn),
}

impl FunctionConfig {
    pub fn load(&self, base: Option<&Path>) -> HarnessResult<SubmodularFn> {
        match self {
            FunctionConfig::Inline(f) => {
                f.validate()?;
                Ok(f.clone())
            }
            FunctionConfig::TableFile { table_file } => {
                let path = match base {
                    Some(b) if table_file.is_relative() => b.join(table_file),
                    _ => table_file.clone(),
                };
                Ok(SubmodularFn::load_table(&path)?)
            }
        }
    }
}

/// What an experiment plays on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceConfig {
    /// Matroid blocking bandit.
    Mbb { instance: BlockingInstance },
    /// Set-function rewards under blocking, no matroid.
    Rsw { function: FunctionConfig, delays: Delays },
}

fn default_name() -> String {
    "experiment".into()
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub instance: InstanceConfig,
    pub policies: Vec<PolicySpec>,
    pub rounds: u64,
    #[serde(default = "one")]
    pub replications: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Runs a canned reproduction instead of the instance when set.
    #[serde(default)]
    pub reproduce: Option<String>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> HarnessResult<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> HarnessResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> HarnessResult<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.rounds == 0 {
            return bad("rounds must be at least 1".into());
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if let Some(name) = &self.reproduce {
            if !REPRODUCTIONS.contains(&name.as_str()) {
                return bad(format!("unknown reproduction `{name}`"));
            }
            return Ok(());
        }
        if self.policies.is_empty() {
            return bad("at least one policy is required".into());
        }
        for p in &self.policies {
            let mismatched = matches!(
                (&self.instance, p),
                (InstanceConfig::Mbb { .. }, PolicySpec::InterleavedSubmodular)
                    | (InstanceConfig::Rsw { .. }, PolicySpec::InterleavedGreedy | PolicySpec::InterleavedUcb)
            );
            if mismatched {
                return bad(format!("policy `{p}` does not apply to this instance kind"));
            }
        }
        Ok(())
    }
}

/// Per-policy statistics over replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySummary {
    pub policy: String,
    pub mean_reward: f64,
    pub stderr_reward: f64,
    pub mean_expected_reward: f64,
    /// Mean of `sum_t mu(A_t^ig) - mu(A_t)`, when `ig` ran alongside.
    pub mean_coupled_regret: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub experiment: String,
    pub rounds: u64,
    pub replications: u64,
    pub seed: u64,
    pub policies: Vec<PolicySummary>,
    /// Interleaved policies of every replication drew identical offsets.
    pub coupling_verified: bool,
    pub bounds: Option<BoundReport>,
    pub cp_bound: Option<CpBound>,
}

/// `(mean, standard error)`.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

struct ReplicationOutput {
    csv: Vec<u8>,
    totals: Vec<(f64, f64)>,
    regrets: Option<Vec<f64>>,
    coupled: bool,
}

const ROW_HEADER: [&str; 9] = [
    "experiment",
    "replication",
    "t",
    "policy",
    "sampled_set",
    "played_set",
    "reward",
    "cum_reward",
    "coupled_regret",
];

fn run_replication(
    cfg: &ExperimentConfig,
    f: Option<&SubmodularFn>,
    r: u64,
) -> HarnessResult<ReplicationOutput> {
    let seed = replication_seed(cfg.seed, r);
    let traces: Vec<RunTrace> = cfg
        .policies
        .iter()
        .map(|p| match &cfg.instance {
            InstanceConfig::Mbb { instance } => run(p, instance, cfg.rounds, seed),
            InstanceConfig::Rsw { delays, .. } => {
                run_set_function(p, f.expect("rsw function loaded"), delays, cfg.rounds, seed)
            }
        })
        .collect::<Result<_, _>>()?;

    let offsets: Vec<_> = traces.iter().filter_map(|t| t.offsets.as_ref()).collect();
    let coupled = offsets.windows(2).all(|w| w[0] == w[1]);
    if !coupled {
        return Err(HarnessError::Invariant(format!(
            "replication {r}: interleaved policies drew different offsets"
        )));
    }

    let ig = cfg
        .policies
        .iter()
        .position(|p| *p == PolicySpec::InterleavedGreedy)
        .filter(|_| matches!(cfg.instance, InstanceConfig::Mbb { .. }));

    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let mut cum = vec![0.0; traces.len()];
    let mut regret = vec![0.0; traces.len()];
    for t in 0..cfg.rounds as usize {
        for (p, tr) in traces.iter().enumerate() {
            let rec = &tr.rounds[t];
            cum[p] += rec.reward;
            let coupled_regret = match ig {
                Some(g) => {
                    regret[p] += traces[g].rounds[t].expected - rec.expected;
                    regret[p].to_string()
                }
                None => String::new(),
            };
            w.write_record([
                cfg.name.clone(),
                r.to_string(),
                rec.t.to_string(),
                tr.algo.clone(),
                rec.sampled.map(|s| s.to_string()).unwrap_or_default(),
                rec.played.to_string(),
                rec.reward.to_string(),
                cum[p].to_string(),
                coupled_regret,
            ])?;
        }
    }
    let csv = w.into_inner().map_err(|e| HarnessError::Io(e.to_string()))?;
    Ok(ReplicationOutput {
        csv,
        totals: traces
            .iter()
            .map(|t| (t.cumulative_reward, t.expected_total()))
            .collect(),
        regrets: ig.map(|_| regret),
        coupled,
    })
}

/// Runs every replication, writes `rows.csv` and `summary.json` into
/// `out_dir`, and returns the summary. `workers` caps the thread count.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    workers: Option<usize>,
    config_dir: Option<&Path>,
) -> HarnessResult<ExperimentSummary> {
    cfg.validate()?;
    let f = match &cfg.instance {
        InstanceConfig::Rsw { function, delays } => {
            let f = function.load(config_dir)?;
            if f.k() != delays.len() {
                return Err(HarnessError::Config(format!(
                    "function has {} elements but {} delays are given",
                    f.k(),
                    delays.len()
                )));
            }
            Some(f)
        }
        InstanceConfig::Mbb { .. } => None,
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start workers: {e}")))?;
    let outputs: Vec<ReplicationOutput> = pool.install(|| {
        (0..cfg.replications)
            .into_par_iter()
            .map(|r| run_replication(cfg, f.as_ref(), r))
            .collect::<HarnessResult<_>>()
    })?;

    fs::create_dir_all(out_dir)?;
    let mut rows = fs::File::create(out_dir.join("rows.csv"))?;
    let mut header = csv::Writer::from_writer(Vec::new());
    header.write_record(ROW_HEADER)?;
    rows.write_all(&header.into_inner().map_err(|e| HarnessError::Io(e.to_string()))?)?;
    for o in &outputs {
        rows.write_all(&o.csv)?;
    }

    let policies = cfg
        .policies
        .iter()
        .enumerate()
        .map(|(p, spec)| {
            let rewards: Vec<f64> = outputs.iter().map(|o| o.totals[p].0).collect();
            let expected: Vec<f64> = outputs.iter().map(|o| o.totals[p].1).collect();
            let (mean_reward, stderr_reward) = mean_stderr(&rewards);
            let regrets: Option<Vec<f64>> = outputs
                .iter()
                .map(|o| o.regrets.as_ref().map(|r| r[p]))
                .collect();
            PolicySummary {
                policy: spec.name().into(),
                mean_reward,
                stderr_reward,
                mean_expected_reward: mean_stderr(&expected).0,
                mean_coupled_regret: regrets.map(|r| mean_stderr(&r).0),
            }
        })
        .collect();

    let (bounds, cp_bound) = match &cfg.instance {
        InstanceConfig::Mbb { instance } if instance.k() <= crate::oracles::LP_LIMIT => {
            (Some(bound_report(instance, cfg.rounds)?), None)
        }
        InstanceConfig::Rsw { delays, .. } if delays.len() <= crate::submodular::CLOSURE_LIMIT => {
            (None, Some(cp_upper_bound(f.as_ref().unwrap(), delays, cfg.rounds)?))
        }
        _ => (None, None),
    };

    let summary = ExperimentSummary {
        experiment: cfg.name.clone(),
        rounds: cfg.rounds,
        replications: cfg.replications,
        seed: cfg.seed,
        policies,
        coupling_verified: outputs.iter().all(|o| o.coupled),
        bounds,
        cp_bound,
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| HarnessError::Io(e.to_string()))?;
    fs::write(out_dir.join("summary.json"), json + "\n")?;
    Ok(summary)
}

/// Bounds for the `bounds` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundsOutput {
    Mbb(BoundReport),
    Rsw {
        rounds: u64,
        dp_value: Option<f64>,
        cp: CpBound,
        d_max: u64,
        f_ground: f64,
        horizon_factor: f64,
    },
}

pub fn compute_bounds(cfg: &ExperimentConfig, config_dir: Option<&Path>) -> HarnessResult<BoundsOutput> {
    match &cfg.instance {
        InstanceConfig::Mbb { instance } => Ok(BoundsOutput::Mbb(bound_report(instance, cfg.rounds)?)),
        InstanceConfig::Rsw { function, delays } => {
            let f = function.load(config_dir)?;
            let states: u128 = delays.as_slice().iter().map(|&d| d as u128).product();
            let dp_value = if states <= DP_STATE_LIMIT && cfg.rounds <= DP_HORIZON_LIMIT && f.k() <= 12 {
                Some(dp_optimal_set_function(&f, delays, cfg.rounds)?)
            } else {
                None
            };
            Ok(BoundsOutput::Rsw {
                rounds: cfg.rounds,
                dp_value,
                cp: cp_upper_bound(&f, delays, cfg.rounds)?,
                d_max: delays.max(),
                f_ground: f.value(ElementSet::full(f.k())),
                horizon_factor: finite_horizon_factor(delays.max(), cfg.rounds),
            })
        }
    }
}

impl BoundsOutput {
    /// Two-line CSV: field names, then values (empty when absent).
    pub fn to_csv(&self) -> HarnessResult<String> {
        let value = serde_json::to_value(self).map_err(|e| HarnessError::Io(e.to_string()))?;
        let mut names = Vec::new();
        let mut values = Vec::new();
        flatten_json("", &value, &mut names, &mut values);
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&names)?;
        w.write_record(&values)?;
        let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn flatten_json(prefix: &str, v: &serde_json::Value, names: &mut Vec<String>, values: &mut Vec<String>) {
    match v {
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten_json(&key, v, names, values);
            }
        }
        serde_json::Value::Null => {
            names.push(prefix.into());
            values.push(String::new());
        }
        serde_json::Value::String(s) => {
            names.push(prefix.into());
            values.push(s.clone());
        }
        other => {
            names.push(prefix.into());
            values.push(other.to_string());
        }
    }
}

/// `t,sampled_set` rows of the interleaved schedule for `seed`.
pub fn schedule_csv(delays: &Delays, seed: u64, rounds: u64) -> HarnessResult<String> {
    let off = offsets_for_seed(delays, seed);
    let mut cur = ScheduleCursor::new(&off, delays, 1)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "sampled_set"])?;
    for t in 1..=rounds {
        w.write_record([t.to_string(), cur.next_set().to_string()])?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// How a measurement is judged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|measured - target| <= tolerance`
    Within,
    /// `measured >= target - tolerance`
    AtLeast,
    /// `measured <= target + tolerance`
    AtMost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub label: String,
    pub measured: f64,
    pub target: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

impl Measurement {
    pub fn new(label: impl Into<String>, measured: f64, target: f64, tolerance: f64, comparison: Comparison) -> Self {
        let passed = match comparison {
            Comparison::Within => (measured - target).abs() <= tolerance,
            Comparison::AtLeast => measured >= target - tolerance,
            Comparison::AtMost => measured <= target + tolerance,
        };
        Measurement {
            label: label.into(),
            measured,
            target,
            tolerance,
            comparison,
            passed,
        }
    }
}

impl std::fmt::Display for Measurement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let op = match self.comparison {
            Comparison::Within => "within",
            Comparison::AtLeast => ">=",
            Comparison::AtMost => "<=",
        };
        write!(
            f,
            "{}: measured {:.9} {op} target {:.9} (tolerance {:e}) {}",
            self.label,
            self.measured,
            self.target,
            self.tolerance,
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reproduction {
    pub name: String,
    pub measurements: Vec<Measurement>,
    pub seconds: f64,
    pub passed: bool,
}

impl std::fmt::Display for Reproduction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "{} ({:.2} s): {}",
            self.name,
            self.seconds,
            if self.passed { "PASS" } else { "FAIL" }
        )?;
        for m in &self.measurements {
            writeln!(f, "  {m}")?;
        }
        Ok(())
    }
}

pub const REPRODUCTIONS: [&str; 7] = [
    "rank1_tightness",
    "greedy_one_over_k",
    "indep_sampling",
    "cp_remark",
    "graphic_tight",
    "lp_vs_dp",
    "regret_curve",
];

/// Runs a canned reproduction by name.
pub fn reproduce(name: &str) -> HarnessResult<Reproduction> {
    let start = Instant::now();
    let measurements = match name {
        "rank1_tightness" => rank1_tightness(10, 100_000, 1000)?,
        "greedy_one_over_k" => greedy_one_over_k(8, 10_000)?,
        "indep_sampling" => indep_sampling(20, 100_000, 0)?,
        "cp_remark" => cp_remark()?,
        "graphic_tight" => graphic_tight(4, 1e-6, 20_000)?,
        "lp_vs_dp" => lp_vs_dp(&LP_VS_DP_HORIZONS)?,
        "regret_curve" => regret_curve(&[1_000, 10_000, 100_000], 50)?,
        _ => {
            return Err(HarnessError::Config(format!(
                "unknown reproduction `{name}`, expected one of {}",
                REPRODUCTIONS.join(", ")
            )))
        }
    };
    Ok(Reproduction {
        name: name.into(),
        passed: measurements.iter().all(|m| m.passed),
        measurements,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// `ig` average reward with `k` unit-reward arms of delay `k` under rank 1,
/// averaged over `seeds` runs, against `1 - (1 - 1/k)^k`.
pub fn rank1_tightness(k: usize, rounds: u64, seeds: u64) -> HarnessResult<Vec<Measurement>> {
    let inst = fixtures::rank1_tightness(k);
    let mut total = 0.0;
    for s in 0..seeds {
        let mut tot = Totals::new();
        run_observed(&PolicySpec::InterleavedGreedy, &inst, rounds, replication_seed(0, s), &mut tot)?;
        total += tot.reward / rounds as f64;
    }
    let target = 1.0 - (1.0 - 1.0 / k as f64).powi(k as i32);
    Ok(vec![Measurement::new(
        "ig average reward",
        total / seeds as f64,
        target,
        0.01,
        Comparison::Within,
    )])
}

/// `f = min(|S|, 1)`, `k` elements of delay `k`: all-available greedy
/// against `1/k`, round robin against 1.
pub fn greedy_one_over_k(k: usize, rounds: u64) -> HarnessResult<Vec<Measurement>> {
    let f = SubmodularFn::budget_additive(k, 1.0)?;
    let d = Delays::uniform(k, k as u64)?;
    let greedy = run_set_function(&PolicySpec::NaiveGreedy, &f, &d, rounds, 0)?;
    let rr = run_schedule(&f, &d, rounds, |t| ElementSet::singleton(((t - 1) % k as u64) as usize))?;
    Ok(vec![
        Measurement::new("greedy average reward", greedy.average_reward(), 1.0 / k as f64, 0.0, Comparison::Within),
        Measurement::new("round robin average reward", rr.average_reward(), 1.0, 0.0, Comparison::Within),
    ])
}

/// Independent sampling with probability `1/d`, `k` elements of delay `k`,
/// `f = min(|S|, 1)`.
pub fn indep_sampling(k: usize, rounds: u64, seed: u64) -> HarnessResult<Vec<Measurement>> {
    let f = SubmodularFn::budget_additive(k, 1.0)?;
    let d = Delays::uniform(k, k as u64)?;
    let p = PolicySpec::IndependentSampling { probabilities: None };
    let mut tot = Totals::new();
    let summary = run_set_function_observed(&p, &f, &d, rounds, seed, &mut tot)?;
    let freq = 1.0 / (2 * k - 1) as f64;
    let worst = summary
        .play_counts
        .iter()
        .map(|&c| c as f64 / rounds as f64)
        .max_by(|a, b| (a - freq).abs().total_cmp(&(b - freq).abs()))
        .unwrap_or(0.0);
    Ok(vec![
        Measurement::new("worst per-element selection frequency", worst, freq, 0.003, Comparison::Within),
        Measurement::new(
            "average reward",
            tot.reward / rounds as f64,
            1.0 - (1.0 - freq).powi(k as i32),
            0.03,
            Comparison::Within,
        ),
    ])
}

/// The two-element function with `f({1}) = f({2}) = 2`, `f({1,2}) = 3`.
pub fn cp_remark_function() -> SubmodularFn {
    SubmodularFn::explicit(2, vec![0.0, 2.0, 2.0, 3.0]).expect("valid table")
}

/// Max of the multilinear extension over the box `[0, 1/2]^2` on a grid,
/// against the concave-closure value at the box corner.
pub fn cp_remark() -> HarnessResult<Vec<Measurement>> {
    let f = cp_remark_function();
    let d = Delays::uniform(2, 2)?;
    let n = 200;
    let mut best = f64::NEG_INFINITY;
    for a in 0..=n {
        for b in 0..=n {
            let x = MarginalVector::new(vec![0.5 * a as f64 / n as f64, 0.5 * b as f64 / n as f64])?;
            best = best.max(f.multilinear_exact(&x)?);
        }
    }
    let cp = cp_upper_bound(&f, &d, 1)?;
    Ok(vec![
        Measurement::new("max of F over the box", best, 1.75, 1e-6, Comparison::Within),
        Measurement::new("CP per-round value", cp.per_round, 2.0, 1e-6, Comparison::Within),
    ])
}

/// Naive greedy on `G_d` over its optimal average `d - eps H(d)`, against
/// `1/2 + 1/(2d)`.
pub fn graphic_tight(d: usize, eps: f64, rounds: u64) -> HarnessResult<Vec<Measurement>> {
    let inst = fixtures::tight_graph(d, eps);
    let mut tot = Totals::new();
    run_observed(&PolicySpec::NaiveGreedy, &inst, rounds, 0, &mut tot)?;
    let ratio = tot.expected / rounds as f64 / fixtures::tight_graph_optimal_rate(d, eps);
    Ok(vec![Measurement::new(
        "greedy over optimal",
        ratio,
        0.5 + 0.5 / d as f64,
        0.002,
        Comparison::Within,
    )])
}

pub const LP_VS_DP_HORIZONS: [u64; 7] = [1, 2, 3, 5, 8, 24, 100];

/// `lp - (1 - (d_max-1)/(d_max-1+T)) dp` on every tiny fixture and
/// horizon; each must be non-negative up to `1e-8`.
pub fn lp_vs_dp(horizons: &[u64]) -> HarnessResult<Vec<Measurement>> {
    let mut out = Vec::new();
    for (name, inst) in fixtures::tiny_fixtures() {
        let mut worst = f64::INFINITY;
        for &t in horizons {
            let dp = dp_optimal(&inst, t)?;
            let lp = lp_upper_bound(&inst, t)?;
            worst = worst.min(lp - finite_horizon_factor(inst.delays().max(), t) * dp);
        }
        out.push(Measurement::new(
            format!("{name}: min over T of lp - factor * dp"),
            worst,
            0.0,
            1e-8,
            Comparison::AtLeast,
        ));
    }
    Ok(out)
}

/// Monte Carlo `ig` reward against `(1 - 1/e)` times the LP bound on every
/// tiny fixture, with a three standard error allowance.
pub fn ig_lp_guarantee(rounds: u64, seeds: u64) -> HarnessResult<Vec<Measurement>> {
    let alpha = 1.0 - (-1.0f64).exp();
    let mut out = Vec::new();
    for (name, inst) in fixtures::tiny_fixtures() {
        let rewards: Vec<f64> = (0..seeds)
            .map(|s| {
                let mut tot = Totals::new();
                run_observed(&PolicySpec::InterleavedGreedy, &inst, rounds, replication_seed(1, s), &mut tot)
                    .map(|_| tot.reward)
            })
            .collect::<Result<_, _>>()?;
        let (mean, se) = mean_stderr(&rewards);
        let lp = lp_upper_bound(&inst, rounds)?;
        out.push(Measurement::new(
            format!("{name}: ig mean reward vs (1-1/e) lp"),
            mean,
            alpha * lp,
            3.0 * se,
            Comparison::AtLeast,
        ));
    }
    Ok(out)
}

/// Interleaved schedules on random delay vectors, at least `element_rounds`
/// element-rounds in total: blocking violations (must be zero), the share
/// of per-run element frequencies inside `1/d +- 3 sigma` (binomial
/// envelope over the run length), and the largest deviation of the
/// fixed-round marginal over `draws` offset draws, in standard errors.
pub fn schedule_soundness(element_rounds: u64, draws: u64, seed: u64) -> HarnessResult<Vec<Measurement>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let rounds: u64 = 1000;
    let mut covered = 0u64;
    let mut violations = 0u64;
    let mut inside = 0u64;
    let mut checked = 0u64;
    while covered < element_rounds {
        let k = rng.gen_range(1..=8);
        let delays = Delays::new((0..k).map(|_| rng.gen_range(1..=12)).collect())?;
        let off = crate::interleave::sample_offsets(&delays, &mut rng);
        let mut cur = ScheduleCursor::new(&off, &delays, 1)?;
        let mut last: Vec<Option<u64>> = vec![None; k];
        let mut count = vec![0u64; k];
        for t in 1..=rounds {
            for i in cur.next_set().iter() {
                if let Some(p) = last[i] {
                    if t - p < delays.get(i) {
                        violations += 1;
                    }
                }
                last[i] = Some(t);
                count[i] += 1;
            }
        }
        for (i, &c) in count.iter().enumerate() {
            let p = 1.0 / delays.get(i) as f64;
            let sigma = (p * (1.0 - p) / rounds as f64).sqrt();
            checked += 1;
            if (c as f64 / rounds as f64 - p).abs() <= 3.0 * sigma + 1e-12 {
                inside += 1;
            }
        }
        covered += k as u64 * rounds;
    }

    let delays = Delays::new((1..=12).collect())?;
    let t = 12_345;
    let mut hits = vec![0u64; delays.len()];
    for _ in 0..draws {
        let off = crate::interleave::sample_offsets(&delays, &mut rng);
        for i in crate::interleave::sampled_set(&off, &delays, t)?.iter() {
            hits[i] += 1;
        }
    }
    let mut worst: f64 = 0.0;
    for (i, &h) in hits.iter().enumerate() {
        let p = 1.0 / delays.get(i) as f64;
        let freq = h as f64 / draws as f64;
        let sigma = (p * (1.0 - p) / draws as f64).sqrt();
        let z = if sigma == 0.0 {
            if freq == p { 0.0 } else { f64::INFINITY }
        } else {
            (freq - p).abs() / sigma
        };
        worst = worst.max(z);
    }

    Ok(vec![
        Measurement::new("blocking violations", violations as f64, 0.0, 0.0, Comparison::AtMost),
        Measurement::new(
            "share of per-run frequencies inside the binomial envelope",
            inside as f64 / checked as f64,
            0.99,
            0.0,
            Comparison::AtLeast,
        ),
        Measurement::new(
            "largest fixed-round marginal deviation in standard errors",
            worst,
            3.0,
            0.0,
            Comparison::AtMost,
        ),
    ])
}

/// Mean coupled regret `R(T) = sum_t mu(A_t^ig) - mu(A_t^ib)` of the
/// regret instance at each checkpoint, over `seeds` coupled runs.
pub fn coupled_regret(checkpoints: &[u64], seeds: u64) -> HarnessResult<Vec<f64>> {
    let inst = fixtures::regret_instance();
    let horizon = *checkpoints.iter().max().expect("at least one checkpoint");
    let per_seed: Vec<Vec<f64>> = (0..seeds)
        .into_par_iter()
        .map(|s| {
            let seed = replication_seed(2, s);
            let mut ig = Totals::with_checkpoints(checkpoints.to_vec());
            let mut ib = Totals::with_checkpoints(checkpoints.to_vec());
            let a = run_observed(&PolicySpec::InterleavedGreedy, &inst, horizon, seed, &mut ig)?;
            let b = run_observed(&PolicySpec::InterleavedUcb, &inst, horizon, seed, &mut ib)?;
            if a.offsets != b.offsets {
                return Err(Error::Internal("coupled runs drew different offsets".into()));
            }
            Ok(ig.snapshots.iter().zip(&ib.snapshots).map(|(x, y)| x.2 - y.2).collect())
        })
        .collect::<Result<_, Error>>()?;
    Ok((0..checkpoints.len())
        .map(|c| per_seed.iter().map(|r| r[c]).sum::<f64>() / seeds as f64)
        .collect())
}

/// Sublinear growth of the coupled regret across checkpoints and the final
/// value against twice the gap-dependent bound.
pub fn regret_curve(checkpoints: &[u64], seeds: u64) -> HarnessResult<Vec<Measurement>> {
    let mut cps = checkpoints.to_vec();
    cps.sort_unstable();
    let r = coupled_regret(&cps, seeds)?;
    let mut out = Vec::new();
    for w in 0..cps.len().saturating_sub(1) {
        let early = r[w] / cps[w] as f64;
        let late = r[w + 1] / cps[w + 1] as f64;
        out.push(Measurement::new(
            format!("R({})/{} below R({})/{}", cps[w + 1], cps[w + 1], cps[w], cps[w]),
            late,
            early,
            0.0,
            Comparison::AtMost,
        ));
        // strict decrease
        if late >= early {
            out.last_mut().unwrap().passed = false;
        }
    }
    let horizon = *cps.last().unwrap();
    let gap = compute_gap_table(fixtures::regret_instance().means(), horizon)?;
    out.push(Measurement::new(
        format!("R({horizon}) within twice the gap bound"),
        r[r.len() - 1],
        2.0 * gap.bound,
        0.0,
        Comparison::AtMost,
    ));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replication_seeds_follow_splitmix() {
        let mut state = 42u64;
        let first = splitmix64(&mut state);
        let second = splitmix64(&mut state);
        assert_eq!(replication_seed(42, 0), first);
        assert_eq!(replication_seed(42, 1), second);
        // reference output of SplitMix64 seeded with 0
        assert_eq!(replication_seed(0, 0), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(HarnessError::Config(String::new()).exit_code(), 1);
        assert_eq!(HarnessError::Acceptance(String::new()).exit_code(), 2);
        assert_eq!(HarnessError::from(Error::Internal("x".into())).exit_code(), 3);
    }

    #[test]
    fn config_validation() {
        let base = r#"{
            "instance": {"kind": "mbb", "instance": {
                "matroid": {"kind": "uniform", "k": 2, "rank": 1},
                "means": [0.9, 0.4], "delays": [2, 2], "laws": "deterministic"}},
            "policies": ["ig", "ib"],
            "rounds": 10
        }"#;
        let cfg = ExperimentConfig::from_json(base).unwrap();
        assert_eq!(cfg.replications, 1);
        assert!(ExperimentConfig::from_json(&base.replace("\"rounds\": 10", "\"rounds\": 0")).is_err());
        assert!(ExperimentConfig::from_json(&base.replace("\"ib\"", "\"is\"")).is_err());
        assert!(ExperimentConfig::from_json(&base.replace("\"ib\"", "\"nope\"")).is_err());
    }

    #[test]
    fn mean_and_stderr() {
        assert_eq!(mean_stderr(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn measurement_comparisons() {
        assert!(Measurement::new("a", 1.0, 1.05, 0.1, Comparison::Within).passed);
        assert!(!Measurement::new("a", 1.0, 1.2, 0.1, Comparison::Within).passed);
        assert!(Measurement::new("a", 0.95, 1.0, 0.1, Comparison::AtLeast).passed);
        assert!(!Measurement::new("a", 1.2, 1.0, 0.1, Comparison::AtMost).passed);
    }

    #[test]
    fn unknown_reproduction() {
        assert_eq!(reproduce("nope").unwrap_err().exit_code(), 1);
    }
}
