//! Maximum-survival escape routing for an evader crossing a network of
//! static, independent capture risks.
//!
//! Node capture probabilities become additive `-ln(1 - p)` costs, value
//! iteration computes the minimal cost-to-go to any exit, and following the
//! resulting policy gives the route with the highest survival probability.
//! The crate also provides a risk-blind min-time baseline, grid scenario
//! generation, independent oracles, and an experiment harness.

pub mod baselines;
pub mod error;
pub mod generate;
pub mod harness;
pub mod network;
pub mod oracles;
pub mod scenario;
pub mod solver;

pub use baselines::{dijkstra_risk_oracle, shortest_time_path, RiskOracle};
pub use error::{Error, Result};
pub use generate::{generate_gre, make_scenario, place_defenders};
pub use harness::{emit_report, run_comparison, sweep, ComparisonRecord, SweepConfig};
pub use network::{build_network, risk_cost, score_path, EscapePath, NodeId, RiskNetwork};
pub use oracles::{enumerate_best_path, monte_carlo_survival, SurvivalEstimate};
pub use scenario::{GenParams, ScenarioSpec};
pub use solver::{extract_path, value_iteration, ValueTable, DEFAULT_EPSILON};
