//! One PASS/FAIL line per acceptance criterion. Runtimes are wall-clock
//! times of this test binary's build profile. Lines go straight to stderr
//! so they show up without `--nocapture`.

mod common;

use std::io::Write;
use std::time::{Duration, Instant};

use mbb::harness::{self, Measurement};

struct Outcome {
    lines: Vec<String>,
    failed: Vec<usize>,
}

impl Outcome {
    fn record(&mut self, id: usize, name: &str, budget: Duration, run: impl FnOnce() -> Result<Vec<Measurement>, String>) {
        let start = Instant::now();
        let result = run();
        let took = start.elapsed();
        let (pass, detail) = match result {
            Ok(ms) => {
                let ok = ms.iter().all(|m| m.passed);
                let detail = ms
                    .iter()
                    .map(|m| {
                        format!(
                            "{} = {:.6} (target {:.6}, {})",
                            m.label,
                            m.measured,
                            m.target,
                            if m.passed { "ok" } else { "missed" }
                        )
                    })
                    .collect::<Vec<_>>()
                    .join("; ");
                (ok, detail)
            }
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = took <= budget;
        let pass = pass && in_time;
        let line = format!(
            "{} criterion {id} {name}: {} [{:.2} s of {} s] {detail}",
            if pass { "PASS" } else { "FAIL" },
            if in_time { "in time" } else { "over budget" },
            took.as_secs_f64(),
            budget.as_secs()
        );
        let _ = writeln!(std::io::stderr().lock(), "{line}");
        self.lines.push(line);
        if !pass {
            self.failed.push(id);
        }
    }
}

fn harness_err(e: harness::HarnessError) -> String {
    e.to_string()
}

fn suite(name: &str, r: Result<(), String>) -> Measurement {
    if let Err(e) = &r {
        let _ = writeln!(std::io::stderr().lock(), "  {name}: {e}");
    }
    Measurement::new(name, r.is_ok() as u8 as f64, 1.0, 0.0, harness::Comparison::Within)
}

#[test]
fn acceptance() {
    let s = Duration::from_secs;
    let mut out = Outcome {
        lines: Vec::new(),
        failed: Vec::new(),
    };

    out.record(1, "rank-1 tightness", s(5), || {
        harness::rank1_tightness(10, 100_000, 1000).map_err(harness_err)
    });
    out.record(2, "naive greedy 1/k", s(1), || {
        harness::greedy_one_over_k(8, 10_000).map_err(harness_err)
    });
    out.record(3, "independent sampling", s(5), || {
        harness::indep_sampling(20, 100_000, 0).map_err(harness_err)
    });
    out.record(4, "concave closure counterexample", s(1), || {
        harness::cp_remark().map_err(harness_err)
    });
    out.record(5, "graphic tight example", s(10), || {
        harness::graphic_tight(4, 1e-6, 20_000).map_err(harness_err)
    });
    out.record(6, "ig against (1-1/e) lp", s(60), || {
        harness::ig_lp_guarantee(100, 10_000).map_err(harness_err)
    });
    out.record(7, "lp against dp", s(30), || {
        harness::lp_vs_dp(&harness::LP_VS_DP_HORIZONS).map_err(harness_err)
    });
    out.record(8, "coupled regret", s(300), || {
        harness::regret_curve(&[1_000, 10_000, 100_000], 50).map_err(harness_err)
    });
    out.record(9, "scheduling soundness", s(10), || {
        harness::schedule_soundness(1_000_000, 10_000, 9).map_err(harness_err)
    });
    out.record(10, "structural suites", s(120), || {
        Ok(vec![
            suite("matroid axioms", common::matroid_axioms_suite(10, 60)),
            suite("correlation gap", common::correlation_gap_suite(11, 200)),
            suite("weighted rank", common::weighted_rank_suite(12, 60)),
            suite("exchange bijection", common::exchange_suite(13, 300)),
            suite("gap decomposition", common::gap_decomposition_suite(14, 300)),
            suite("simplex vs enumeration", common::simplex_suite(15, 500)),
        ])
    });

    assert!(out.failed.is_empty(), "failed criteria {:?}:\n{}", out.failed, out.lines.join("\n"));
}
