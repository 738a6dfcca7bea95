//! Experiment runner: survival-optimal routing versus the min-time baseline
//! on single scenarios and seeded sweeps, plus report emission and oracle
//! cross-checks.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{dijkstra_risk_oracle, shortest_time_path};
use crate::error::{Error, Result};
use crate::generate::make_scenario;
use crate::network::{score_path, EscapePath, RiskNetwork};
use crate::oracles::{enumerate_best_path, monte_carlo_survival, DEFAULT_NODE_LIMIT};
use crate::scenario::{GenParams, ScenarioSpec};
use crate::solver::{extract_path, value_iteration, ValueTable};

pub const DEFAULT_REPLICATIONS: usize = 100;
pub const DEFAULT_DEFENDER_COUNTS: [usize; 5] = [5, 10, 15, 20, 25];

/// Networks at or below this size are also cross-checked by enumeration
/// during self-checked sweeps.
pub const SELF_CHECK_ENUMERATION_LIMIT: usize = 12;

pub const CSV_HEADER: &str = "scenario_id,defender_count,dpero_survival,baseline_survival,dpero_time,baseline_time,dpero_cost,sweeps,wall_clock_ms,status";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    DperoNoRoute,
    BaselineNoRoute,
    NoRoute,
}

/// One solved instance. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRecord {
    pub scenario_id: String,
    pub defender_count: usize,
    pub dpero_survival: f64,
    pub baseline_survival: f64,
    pub dpero_time: Option<f64>,
    pub baseline_time: Option<f64>,
    pub dpero_cost: f64,
    pub sweeps: usize,
    pub wall_clock_ms: f64,
    pub status: Status,
}

/// A comparison together with the artifacts it was computed from.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub record: ComparisonRecord,
    pub table: ValueTable,
    pub dpero_path: Option<EscapePath>,
    pub baseline_path: Option<EscapePath>,
}

fn route_or_none(r: Result<EscapePath>) -> Result<Option<EscapePath>> {
    match r {
        Ok(p) => Ok(Some(p)),
        Err(Error::NoEscapeRoute(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn compare(network: &RiskNetwork, spec: &ScenarioSpec, epsilon: f64) -> Result<Comparison> {
    spec.validate(network)?;

    let clock = Instant::now();
    let table = value_iteration(network, &spec.exits, epsilon)?;
    let dpero_path = route_or_none(extract_path(&table, network, spec.start))?;
    let wall_clock_ms = clock.elapsed().as_secs_f64() * 1e3;

    let baseline_path = route_or_none(shortest_time_path(network, spec.start, &spec.exits))?;

    let status = match (&dpero_path, &baseline_path) {
        (Some(_), Some(_)) => Status::Ok,
        (None, Some(_)) => Status::DperoNoRoute,
        (Some(_), None) => Status::BaselineNoRoute,
        (None, None) => Status::NoRoute,
    };
    let defender_count = spec.params.as_ref().map_or_else(
        || network.capture_probs().iter().filter(|&&p| p > 0.0).count(),
        |p| p.defender_count,
    );

    let record = ComparisonRecord {
        scenario_id: spec.scenario_id(),
        defender_count,
        dpero_survival: dpero_path.as_ref().map_or(0.0, |p| p.survival_prob),
        baseline_survival: baseline_path.as_ref().map_or(0.0, |p| p.survival_prob),
        dpero_time: dpero_path.as_ref().map(|p| p.travel_time),
        baseline_time: baseline_path.as_ref().map(|p| p.travel_time),
        dpero_cost: table.cost(spec.start),
        sweeps: table.sweeps,
        wall_clock_ms,
        status,
    };
    Ok(Comparison {
        record,
        table,
        dpero_path,
        baseline_path,
    })
}

/// Solves one scenario with both routers. A missing route is recorded as
/// zero survival with a non-`ok` status rather than returned as an error.
pub fn run_comparison(
    network: &RiskNetwork,
    spec: &ScenarioSpec,
    epsilon: f64,
) -> Result<ComparisonRecord> {
    compare(network, spec, epsilon).map(|c| c.record)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replication `replication` at `defender_count`:
/// `m(m(m(base) ^ count) ^ replication)` with `m` the SplitMix64 finalizer.
pub fn instance_seed(base_seed: u64, defender_count: usize, replication: usize) -> u64 {
    let h = splitmix64(base_seed);
    let h = splitmix64(h ^ defender_count as u64);
    splitmix64(h ^ replication as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Grid parameters; `defender_count` is overridden per sweep point.
    pub params: GenParams,
    pub defender_counts: Vec<usize>,
    pub replications: usize,
    pub base_seed: u64,
    pub epsilon: f64,
    /// Keep measured solver times; otherwise `wall_clock_ms` is written as 0
    /// so reports are byte-reproducible.
    pub record_timing: bool,
    /// Cross-check every instance against the independent oracles.
    pub self_check: bool,
}

fn run_instance(config: &SweepConfig, defenders: usize, seed: u64) -> Result<ComparisonRecord> {
    let params = GenParams {
        defender_count: defenders,
        ..config.params.clone()
    };
    let (network, spec) = make_scenario(&params, seed)?;
    let cmp = compare(&network, &spec, config.epsilon)?;
    if config.self_check {
        self_check(&network, &spec, &cmp)?;
    }
    let mut record = cmp.record;
    if !config.record_timing {
        record.wall_clock_ms = 0.0;
    }
    Ok(record)
}

/// Generates and solves every `(defender count, replication)` pair. Output is
/// ordered by count, then replication, independent of scheduling.
pub fn sweep(config: &SweepConfig) -> Result<Vec<ComparisonRecord>> {
    if config.replications == 0 {
        return Err(Error::Config("replications must be at least 1".into()));
    }
    let mut counts = config.defender_counts.clone();
    counts.sort_unstable();
    let jobs: Vec<(usize, u64)> = counts
        .iter()
        .flat_map(|&c| {
            (0..config.replications).map(move |r| (c, instance_seed(config.base_seed, c, r)))
        })
        .collect();

    jobs.par_iter()
        .map(|&(count, seed)| {
            run_instance(config, count, seed).map_err(|e| Error::Instance {
                seed,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Cross-checks a solved comparison against the label-setting oracle, the
/// policy, baseline dominance and (for small networks) exhaustive search.
pub fn self_check(network: &RiskNetwork, spec: &ScenarioSpec, cmp: &Comparison) -> Result<()> {
    let j = cmp.table.cost(spec.start);
    let oracle = dijkstra_risk_oracle(network, spec.start, &spec.exits)?;
    if !costs_match(j, oracle.cost, 1e-12) {
        return Err(Error::OracleMismatch(format!(
            "value iteration cost {j} vs label-setting cost {}",
            oracle.cost
        )));
    }
    if cmp.table.sweeps > network.node_count() + 1 {
        return Err(Error::OracleMismatch(format!(
            "{} sweeps exceeds |V| + 1 = {}",
            cmp.table.sweeps,
            network.node_count() + 1
        )));
    }
    if let Some(path) = &cmp.dpero_path {
        check_policy_path(network, spec, j, path)?;
    }
    let r = &cmp.record;
    if r.dpero_survival < r.baseline_survival {
        return Err(Error::OracleMismatch(format!(
            "survival-optimal route {} is worse than baseline {}",
            r.dpero_survival, r.baseline_survival
        )));
    }
    if let (Some(dt), Some(bt)) = (r.dpero_time, r.baseline_time) {
        if bt > dt {
            return Err(Error::OracleMismatch(format!(
                "baseline time {bt} exceeds survival-optimal route time {dt}"
            )));
        }
    }
    if network.node_count() <= SELF_CHECK_ENUMERATION_LIMIT {
        check_enumeration(network, spec, j, DEFAULT_NODE_LIMIT)?;
    }
    Ok(())
}

fn costs_match(a: f64, b: f64, tol: f64) -> bool {
    (a.is_infinite() && b.is_infinite()) || (a - b).abs() <= tol
}

fn check_policy_path(
    network: &RiskNetwork,
    spec: &ScenarioSpec,
    j: f64,
    path: &EscapePath,
) -> Result<()> {
    if path.start() != spec.start || spec.exits.binary_search(&path.end()).is_err() {
        return Err(Error::OracleMismatch(
            "policy route does not join start to an exit".into(),
        ));
    }
    if path.nodes.len() > network.node_count() {
        return Err(Error::OracleMismatch(
            "policy route is longer than |V|".into(),
        ));
    }
    let rescored = score_path(network, &path.nodes)?;
    if (rescored.risk_cost - j).abs() > 1e-9 {
        return Err(Error::OracleMismatch(format!(
            "policy route cost {} differs from J(start) {j}",
            rescored.risk_cost
        )));
    }
    Ok(())
}

fn check_enumeration(
    network: &RiskNetwork,
    spec: &ScenarioSpec,
    j: f64,
    limit: usize,
) -> Result<()> {
    let brute = match enumerate_best_path(network, spec.start, &spec.exits, limit) {
        Ok(p) => p.survival_prob,
        Err(Error::NoEscapeRoute(_)) => 0.0,
        Err(e) => return Err(e),
    };
    let solved = (-j).exp();
    if (brute - solved).abs() > 1e-12 {
        return Err(Error::OracleMismatch(format!(
            "exp(-J) = {solved} vs enumerated best survival {brute}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    /// `None` when the check does not apply to this scenario.
    pub passed: Option<bool>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub scenario_id: String,
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed != Some(false))
    }
}

fn outcome(name: &'static str, r: Result<String>) -> CheckOutcome {
    match r {
        Ok(detail) => CheckOutcome {
            name,
            passed: Some(true),
            detail,
        },
        Err(e) => CheckOutcome {
            name,
            passed: Some(false),
            detail: e.to_string(),
        },
    }
}

/// Runs every applicable oracle on one scenario and reports each outcome.
pub fn verify(
    network: &RiskNetwork,
    spec: &ScenarioSpec,
    epsilon: f64,
    trials: u64,
    seed: u64,
) -> Result<VerifyReport> {
    let cmp = compare(network, spec, epsilon)?;
    let j = cmp.table.cost(spec.start);
    let mut checks = Vec::new();

    checks.push(outcome(
        "label_setting_equivalence",
        dijkstra_risk_oracle(network, spec.start, &spec.exits).and_then(|o| {
            if costs_match(j, o.cost, 1e-12) {
                Ok(format!("J(start) = {j}, oracle = {}", o.cost))
            } else {
                Err(Error::OracleMismatch(format!(
                    "J(start) = {j}, oracle = {}",
                    o.cost
                )))
            }
        }),
    ));

    checks.push(outcome("convergence_bound", {
        let bound = network.node_count() + 1;
        if cmp.table.converged && cmp.table.sweeps <= bound {
            Ok(format!("{} sweeps <= {bound}", cmp.table.sweeps))
        } else {
            Err(Error::OracleMismatch(format!(
                "{} sweeps (bound {bound}), converged = {}",
                cmp.table.sweeps, cmp.table.converged
            )))
        }
    }));

    checks.push(if network.node_count() <= DEFAULT_NODE_LIMIT {
        outcome(
            "exhaustive_enumeration",
            check_enumeration(network, spec, j, DEFAULT_NODE_LIMIT)
                .map(|_| format!("best survival {}", (-j).exp())),
        )
    } else {
        CheckOutcome {
            name: "exhaustive_enumeration",
            passed: None,
            detail: format!(
                "skipped: {} nodes exceeds limit {DEFAULT_NODE_LIMIT}",
                network.node_count()
            ),
        }
    });

    match &cmp.dpero_path {
        Some(path) => {
            checks.push(outcome(
                "policy_soundness",
                check_policy_path(network, spec, j, path)
                    .map(|_| format!("{} hops, cost {}", path.hops(), path.risk_cost)),
            ));
            checks.push(outcome(
                "monte_carlo",
                monte_carlo_survival(network, &path.nodes, trials, seed).and_then(|mc| {
                    let detail = format!(
                        "estimate {} +/- {} vs analytic {} over {trials} trials",
                        mc.estimate, mc.std_error, path.survival_prob
                    );
                    if (mc.estimate - path.survival_prob).abs() <= 4.0 * mc.std_error {
                        Ok(detail)
                    } else {
                        Err(Error::OracleMismatch(detail))
                    }
                }),
            ));
        }
        None => {
            for name in ["policy_soundness", "monte_carlo"] {
                checks.push(CheckOutcome {
                    name,
                    passed: None,
                    detail: "skipped: no escape route".into(),
                });
            }
        }
    }

    let r = &cmp.record;
    checks.push(outcome("baseline_dominance", {
        let detail = format!(
            "survival {} vs baseline {}",
            r.dpero_survival, r.baseline_survival
        );
        if r.dpero_survival >= r.baseline_survival {
            Ok(detail)
        } else {
            Err(Error::OracleMismatch(detail))
        }
    }));

    Ok(VerifyReport {
        scenario_id: spec.scenario_id(),
        checks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Mean and sample standard deviation (0 for a single value).
    pub fn of(values: &[f64]) -> Option<MeanStd> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(MeanStd { mean, std })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountSummary {
    pub defender_count: usize,
    pub instances: usize,
    pub dpero_survival: MeanStd,
    pub baseline_survival: MeanStd,
    pub dpero_time: Option<MeanStd>,
    pub baseline_time: Option<MeanStd>,
    /// Share of instances where the survival-optimal route strictly beats the baseline.
    pub strict_improvement_fraction: f64,
    pub no_route_instances: usize,
}

/// Aggregates records per defender count, in ascending count order.
pub fn summarize(records: &[ComparisonRecord]) -> Vec<CountSummary> {
    let mut groups: BTreeMap<usize, Vec<&ComparisonRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.defender_count).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(count, rs)| {
            let col = |f: fn(&ComparisonRecord) -> f64| rs.iter().map(|r| f(r)).collect::<Vec<_>>();
            let opt = |f: fn(&ComparisonRecord) -> Option<f64>| {
                rs.iter().filter_map(|r| f(r)).collect::<Vec<_>>()
            };
            let strict = rs
                .iter()
                .filter(|r| r.dpero_survival > r.baseline_survival)
                .count();
            CountSummary {
                defender_count: count,
                instances: rs.len(),
                dpero_survival: MeanStd::of(&col(|r| r.dpero_survival)).expect("non-empty group"),
                baseline_survival: MeanStd::of(&col(|r| r.baseline_survival))
                    .expect("non-empty group"),
                dpero_time: MeanStd::of(&opt(|r| r.dpero_time)),
                baseline_time: MeanStd::of(&opt(|r| r.baseline_time)),
                strict_improvement_fraction: strict as f64 / rs.len() as f64,
                no_route_instances: rs.iter().filter(|r| r.status != Status::Ok).count(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportPaths {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub plot: PathBuf,
}

pub fn records_csv(records: &[ComparisonRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    w.into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

fn plot_csv(summary: &[CountSummary]) -> String {
    let mut out = String::from("defender_count,dpero_mean_survival,baseline_mean_survival\n");
    for s in summary {
        out.push_str(&format!(
            "{},{},{}\n",
            s.defender_count, s.dpero_survival.mean, s.baseline_survival.mean
        ));
    }
    out
}

/// Writes `records.csv`, `summary.json` and `plot.csv` into `out_dir`.
pub fn emit_report(records: &[ComparisonRecord], out_dir: impl AsRef<Path>) -> Result<ReportPaths> {
    if records.is_empty() {
        return Err(Error::Config("no records to report".into()));
    }
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir)?;
    let paths = ReportPaths {
        csv: dir.join("records.csv"),
        summary: dir.join("summary.json"),
        plot: dir.join("plot.csv"),
    };
    let summary = summarize(records);
    fs::write(&paths.csv, records_csv(records)?)?;
    fs::write(
        &paths.summary,
        serde_json::to_string_pretty(&summary)? + "\n",
    )?;
    fs::write(&paths.plot, plot_csv(&summary))?;
    Ok(paths)
}
