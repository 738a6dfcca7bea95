//! Scenario description and its JSON file format.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{build_network, NodeId, RiskNetwork};

/// Parameters of a generated grid scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub rows: usize,
    pub cols: usize,
    pub extra_edges: usize,
    pub defender_count: usize,
    pub prob_low: f64,
    pub prob_high: f64,
    pub exit_count: usize,
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        if self.rows < 2 || self.cols < 2 {
            return Err(Error::Config(format!(
                "grid must be at least 2x2, got {}x{}",
                self.rows, self.cols
            )));
        }
        validate_prob_range(self.prob_low, self.prob_high)
    }
}

pub(crate) fn validate_prob_range(low: f64, high: f64) -> Result<()> {
    if !(low.is_finite() && high.is_finite() && 0.0 <= low && low <= high && high < 1.0) {
        return Err(Error::Config(format!(
            "defender probability range [{low}, {high}] must satisfy 0 <= low <= high < 1"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub start: NodeId,
    /// Sorted, deduplicated.
    pub exits: Vec<NodeId>,
    pub seed: u64,
    pub params: Option<GenParams>,
}

impl ScenarioSpec {
    pub fn new(start: NodeId, exits: impl IntoIterator<Item = NodeId>, seed: u64) -> Self {
        let exits: BTreeSet<NodeId> = exits.into_iter().collect();
        ScenarioSpec {
            start,
            exits: exits.into_iter().collect(),
            seed,
            params: None,
        }
    }

    pub fn validate(&self, network: &RiskNetwork) -> Result<()> {
        if self.exits.is_empty() {
            return Err(Error::Config("exit set is empty".into()));
        }
        network.check_node(self.start)?;
        for &d in &self.exits {
            network.check_node(d)?;
        }
        if self.exits.binary_search(&self.start).is_ok() {
            return Err(Error::Config(format!(
                "start node {} is also an exit",
                self.start
            )));
        }
        if let Some(p) = &self.params {
            p.validate()?;
        }
        Ok(())
    }

    /// Identifier combining the seed with the generation parameters.
    pub fn scenario_id(&self) -> String {
        match &self.params {
            Some(p) => format!(
                "gre-{}x{}-e{}-x{}-d{}-p{}-{}-s{:016x}",
                p.rows,
                p.cols,
                p.extra_edges,
                p.exit_count,
                p.defender_count,
                p.prob_low,
                p.prob_high,
                self.seed
            ),
            None => format!("scenario-s{:016x}", self.seed),
        }
    }
}

/// On-disk scenario document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub node_count: usize,
    pub edges: Vec<(u32, u32, f64)>,
    pub capture_prob: Vec<f64>,
    pub start: u32,
    pub exits: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

impl ScenarioFile {
    pub fn from_parts(network: &RiskNetwork, spec: &ScenarioSpec) -> Self {
        let meta = spec.params.as_ref().map(|p| {
            let mut v = serde_json::to_value(p).expect("GenParams serializes");
            v["generator"] = "gre".into();
            v
        });
        ScenarioFile {
            node_count: network.node_count(),
            edges: network.edge_list(),
            capture_prob: network.capture_probs().to_vec(),
            start: spec.start.0,
            exits: spec.exits.iter().map(|d| d.0).collect(),
            seed: Some(spec.seed),
            meta,
        }
    }

    pub fn into_parts(self) -> Result<(RiskNetwork, ScenarioSpec)> {
        let network = build_network(self.node_count, &self.edges, &self.capture_prob)?;
        let mut spec = ScenarioSpec::new(
            NodeId(self.start),
            self.exits.into_iter().map(NodeId),
            self.seed.unwrap_or(0),
        );
        spec.params = self
            .meta
            .and_then(|m| serde_json::from_value::<GenParams>(m).ok());
        spec.validate(&network)?;
        Ok((network, spec))
    }
}

pub fn read_scenario(path: impl AsRef<Path>) -> Result<(RiskNetwork, ScenarioSpec)> {
    let text = fs::read_to_string(path)?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> Result<(RiskNetwork, ScenarioSpec)> {
    serde_json::from_str::<ScenarioFile>(text)?.into_parts()
}

pub fn scenario_to_json(network: &RiskNetwork, spec: &ScenarioSpec) -> String {
    serde_json::to_string_pretty(&ScenarioFile::from_parts(network, spec))
        .expect("scenario serializes")
}

pub fn write_scenario(
    path: impl AsRef<Path>,
    network: &RiskNetwork,
    spec: &ScenarioSpec,
) -> Result<()> {
    fs::write(path, scenario_to_json(network, spec) + "\n")?;
    Ok(())
}
