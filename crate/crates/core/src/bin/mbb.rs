use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mbb::harness::{self, ExperimentConfig, HarnessError, HarnessResult};
use mbb::interleave::Delays;

#[derive(Parser)]
#[command(name = "mbb", version, about = "Matroid blocking bandit simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config and MBB_OUTPUT_DIR.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Base seed; overrides the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (0 = all cores).
        #[arg(long, env = "MBB_WORKERS")]
        workers: Option<usize>,
    },
    /// Run a canned reproduction and compare it against its target.
    Reproduce {
        /// One of rank1_tightness, greedy_one_over_k, indep_sampling,
        /// cp_remark, graphic_tight, lp_vs_dp, regret_curve.
        name: String,
    },
    /// Print upper bounds for a config's instance as JSON, then CSV.
    Bounds {
        #[arg(long)]
        config: PathBuf,
        /// Also write bounds.json and bounds.csv here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the interleaved schedule for one seed as CSV.
    CheckSchedule {
        /// Comma-separated delays.
        #[arg(long, value_delimiter = ',', required = true)]
        delays: Vec<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        rounds: u64,
    },
}

fn config_dir(path: &Path) -> Option<&Path> {
    path.parent()
}

fn execute(cli: Cli) -> HarnessResult<()> {
    match cli.command {
        Command::Simulate { config, out, seed, workers } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(name) = cfg.reproduce.clone() {
                return reproduce(&name);
            }
            let out = out
                .or_else(|| std::env::var_os("MBB_OUTPUT_DIR").map(PathBuf::from))
                .or_else(|| cfg.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
            let summary = harness::run_experiment(&cfg, &out, workers, config_dir(&config))?;
            for p in &summary.policies {
                println!(
                    "{}: mean reward {:.6} (stderr {:.6})",
                    p.policy, p.mean_reward, p.stderr_reward
                );
            }
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Reproduce { name } => reproduce(&name),
        Command::Bounds { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let bounds = harness::compute_bounds(&cfg, config_dir(&config))?;
            let json = serde_json::to_string_pretty(&bounds).map_err(|e| HarnessError::Io(e.to_string()))?;
            let csv = bounds.to_csv()?;
            println!("{json}");
            print!("{csv}");
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join("bounds.json"), json + "\n")?;
                std::fs::write(dir.join("bounds.csv"), csv)?;
            }
            Ok(())
        }
        Command::CheckSchedule { delays, seed, rounds } => {
            let d = Delays::new(delays)?;
            print!("{}", harness::schedule_csv(&d, seed, rounds)?);
            Ok(())
        }
    }
}

fn reproduce(name: &str) -> HarnessResult<()> {
    let rep = harness::reproduce(name)?;
    print!("{rep}");
    if rep.passed {
        Ok(())
    } else {
        Err(HarnessError::Acceptance(format!("{name} missed its target")))
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mbb: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
