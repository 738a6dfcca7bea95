use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use dpero::harness::{self, SweepConfig, DEFAULT_DEFENDER_COUNTS, DEFAULT_REPLICATIONS};
use dpero::scenario::{read_scenario, scenario_to_json};
use dpero::{
    extract_path, make_scenario, shortest_time_path, value_iteration, GenParams, DEFAULT_EPSILON,
};

#[derive(Parser)]
#[command(
    name = "dpero",
    version,
    about = "Maximum-survival escape routing on risk networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GridArgs {
    #[arg(long, default_value_t = 15)]
    rows: usize,
    #[arg(long, default_value_t = 15)]
    cols: usize,
    #[arg(long, default_value_t = 0)]
    extra_edges: usize,
    #[arg(long, default_value_t = 0.2)]
    prob_low: f64,
    #[arg(long, default_value_t = 0.5)]
    prob_high: f64,
    /// Number of exits on the far border.
    #[arg(long, default_value_t = 5)]
    exits: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl GridArgs {
    fn params(&self, defender_count: usize) -> GenParams {
        GenParams {
            rows: self.rows,
            cols: self.cols,
            extra_edges: self.extra_edges,
            defender_count,
            prob_low: self.prob_low,
            prob_high: self.prob_high,
            exit_count: self.exits,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a grid scenario file.
    Generate {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 5)]
        defenders: usize,
        /// Output file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a scenario; prints the safest route and the value table.
    Solve {
        scenario: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Route a scenario with the min-travel-time baseline.
    Baseline {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the safest route against the baseline on one scenario.
    Compare {
        scenario: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a seeded sweep over defender counts and write report files.
    Sweep {
        #[command(flatten)]
        grid: GridArgs,
        /// Comma-separated defender counts.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_DEFENDER_COUNTS)]
        defenders: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_REPLICATIONS)]
        replications: usize,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        /// Output directory for records.csv, summary.json and plot.csv.
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Cross-check every instance against the independent oracles.
        #[arg(long)]
        self_check: bool,
        /// Record measured solve times (makes output run-dependent).
        #[arg(long)]
        timing: bool,
    },
    /// Run every applicable oracle against a scenario.
    Verify {
        scenario: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        /// Monte Carlo trials.
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// Monte Carlo seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn emit(out: Option<&PathBuf>, text: String) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Generate {
            grid,
            defenders,
            out,
        } => {
            let (network, spec) = make_scenario(&grid.params(defenders), grid.seed)?;
            emit(out.as_ref(), scenario_to_json(&network, &spec))?;
        }
        Command::Solve {
            scenario,
            epsilon,
            out,
        } => {
            let (network, spec) = read_scenario(&scenario)?;
            let table = value_iteration(&network, &spec.exits, epsilon)?;
            let path = extract_path(&table, &network, spec.start)?;
            let doc = json!({
                "scenario_id": spec.scenario_id(),
                "path": path,
                "sweeps": table.sweeps,
                "converged": table.converged,
                "value_table": table.records(),
            });
            emit(out.as_ref(), serde_json::to_string_pretty(&doc)?)?;
        }
        Command::Baseline { scenario, out } => {
            let (network, spec) = read_scenario(&scenario)?;
            let path = shortest_time_path(&network, spec.start, &spec.exits)?;
            emit(out.as_ref(), serde_json::to_string_pretty(&path)?)?;
        }
        Command::Compare {
            scenario,
            epsilon,
            out,
        } => {
            let (network, spec) = read_scenario(&scenario)?;
            let record = harness::run_comparison(&network, &spec, epsilon)?;
            emit(out.as_ref(), serde_json::to_string_pretty(&record)?)?;
        }
        Command::Sweep {
            grid,
            defenders,
            replications,
            epsilon,
            out,
            self_check,
            timing,
        } => {
            let config = SweepConfig {
                params: grid.params(0),
                defender_counts: defenders,
                replications,
                base_seed: grid.seed,
                epsilon,
                record_timing: timing,
                self_check,
            };
            let records = harness::sweep(&config)?;
            let paths = harness::emit_report(&records, &out)?;
            for s in harness::summarize(&records) {
                println!(
                    "defenders={:<3} n={:<4} dpero={:.4}±{:.4} baseline={:.4}±{:.4} strict={:.2}",
                    s.defender_count,
                    s.instances,
                    s.dpero_survival.mean,
                    s.dpero_survival.std,
                    s.baseline_survival.mean,
                    s.baseline_survival.std,
                    s.strict_improvement_fraction
                );
            }
            println!(
                "wrote {}, {}, {}",
                paths.csv.display(),
                paths.summary.display(),
                paths.plot.display()
            );
        }
        Command::Verify {
            scenario,
            epsilon,
            trials,
            seed,
        } => {
            let (network, spec) = read_scenario(&scenario)?;
            let report = harness::verify(&network, &spec, epsilon, trials, seed)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            return Ok(report.all_passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!(
                "{}",
                json!({"error": {"kind": "verification_failed", "message": "one or more checks failed"}})
            );
            ExitCode::FAILURE
        }
        Err(e) => {
            let kind = e
                .downcast_ref::<dpero::Error>()
                .map_or("internal", dpero::Error::kind);
            eprintln!(
                "{}",
                json!({"error": {"kind": kind, "message": format!("{e:#}")}})
            );
            ExitCode::FAILURE
        }
    }
}
