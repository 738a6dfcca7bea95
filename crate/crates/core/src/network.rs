//! Risk network model: directed graph, per-node capture probability, the
//! log-survival risk cost and path scoring.
//!
//! A path's survival probability is the product of `1 - p_c(v)` over every
//! node it visits, start and exit included. Taking `-ln` of each factor turns
//! that product into a sum of non-negative node costs, so the safest route is
//! a shortest path under those costs.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense node index in `[0, node_count)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<u32> for NodeId {
    fn from(v: u32) -> Self {
        NodeId(v)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Outgoing arc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub target: NodeId,
    pub travel_time: f64,
}

/// Risk cost of a node with capture probability `p`: `-ln(1 - p)`.
///
/// `p = 1` maps to `f64::INFINITY`; such a node can be represented but is
/// never part of a finite-cost route.
pub fn risk_cost(p: f64) -> Result<f64> {
    if !p.is_finite() || !(0.0..=1.0).contains(&p) {
        return Err(Error::ProbabilityDomain(p));
    }
    if p == 1.0 {
        return Ok(f64::INFINITY);
    }
    // ln_1p keeps precision for small p; the `+ 0.0` folds -0.0 into 0.0.
    Ok(-(-p).ln_1p() + 0.0)
}

/// Immutable directed network with node capture probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskNetwork {
    out_edges: Vec<Vec<Edge>>,
    capture_prob: Vec<f64>,
    risk: Vec<f64>,
}

/// Validates and assembles a [`RiskNetwork`].
pub fn build_network(
    node_count: usize,
    edges: &[(u32, u32, f64)],
    capture_probs: &[f64],
) -> Result<RiskNetwork> {
    if capture_probs.len() != node_count {
        return Err(Error::ProbabilityCount {
            expected: node_count,
            got: capture_probs.len(),
        });
    }
    let risk = capture_probs
        .iter()
        .map(|&p| risk_cost(p))
        .collect::<Result<Vec<_>>>()?;

    let mut out_edges = vec![Vec::new(); node_count];
    let mut seen = HashSet::with_capacity(edges.len());
    for &(source, target, travel_time) in edges {
        if source as usize >= node_count || target as usize >= node_count {
            return Err(Error::DanglingEdge {
                from: source,
                to: target,
                node_count,
            });
        }
        let (s, t) = (NodeId(source), NodeId(target));
        if s == t {
            return Err(Error::SelfLoop(s));
        }
        if !travel_time.is_finite() || travel_time < 0.0 {
            return Err(Error::InvalidTravelTime {
                from: s,
                to: t,
                travel_time,
            });
        }
        if !seen.insert((source, target)) {
            return Err(Error::DuplicateEdge { from: s, to: t });
        }
        out_edges[s.index()].push(Edge {
            target: t,
            travel_time,
        });
    }

    Ok(RiskNetwork {
        out_edges,
        capture_prob: capture_probs.to_vec(),
        risk,
    })
}

impl RiskNetwork {
    pub fn node_count(&self) -> usize {
        self.capture_prob.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out_edges.iter().map(Vec::len).sum()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count() as u32).map(NodeId)
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v.index() < self.node_count()
    }

    pub fn out_edges(&self, v: NodeId) -> &[Edge] {
        &self.out_edges[v.index()]
    }

    pub fn capture_prob(&self, v: NodeId) -> f64 {
        self.capture_prob[v.index()]
    }

    pub fn capture_probs(&self) -> &[f64] {
        &self.capture_prob
    }

    /// Precomputed `risk_cost(capture_prob(v))`.
    pub fn risk(&self, v: NodeId) -> f64 {
        self.risk[v.index()]
    }

    pub fn edge(&self, source: NodeId, target: NodeId) -> Option<&Edge> {
        self.out_edges[source.index()]
            .iter()
            .find(|e| e.target == target)
    }

    /// All arcs as `(source, target, travel_time)`, in source then insertion order.
    pub fn edge_list(&self) -> Vec<(u32, u32, f64)> {
        self.out_edges
            .iter()
            .enumerate()
            .flat_map(|(s, es)| {
                es.iter()
                    .map(move |e| (s as u32, e.target.0, e.travel_time))
            })
            .collect()
    }

    /// Predecessor lists: `in_edges()[v]` holds every `u` with an arc `u -> v`.
    pub fn in_edges(&self) -> Vec<Vec<NodeId>> {
        let mut rev = vec![Vec::new(); self.node_count()];
        for (s, es) in self.out_edges.iter().enumerate() {
            for e in es {
                rev[e.target.index()].push(NodeId(s as u32));
            }
        }
        rev
    }

    /// Copy of this network with a single capture probability replaced.
    pub fn with_capture_prob(&self, v: NodeId, p: f64) -> Result<RiskNetwork> {
        if !self.contains(v) {
            return Err(Error::UnknownNode(v.0));
        }
        let w = risk_cost(p)?;
        let mut next = self.clone();
        next.capture_prob[v.index()] = p;
        next.risk[v.index()] = w;
        Ok(next)
    }

    pub(crate) fn set_capture_prob(&mut self, v: NodeId, p: f64) -> Result<()> {
        self.risk[v.index()] = risk_cost(p)?;
        self.capture_prob[v.index()] = p;
        Ok(())
    }

    pub(crate) fn check_node(&self, v: NodeId) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::UnknownNode(v.0))
        }
    }
}

/// A scored start-to-exit route.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EscapePath {
    pub nodes: Vec<NodeId>,
    pub risk_cost: f64,
    pub survival_prob: f64,
    pub travel_time: f64,
}

impl EscapePath {
    pub fn start(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn end(&self) -> NodeId {
        *self.nodes.last().expect("escape paths are non-empty")
    }

    pub fn hops(&self) -> usize {
        self.nodes.len() - 1
    }
}

/// Scores a node sequence both additively (summed risk cost) and
/// multiplicatively (product of per-node survival).
pub fn score_path(network: &RiskNetwork, nodes: &[NodeId]) -> Result<EscapePath> {
    let first = *nodes
        .first()
        .ok_or_else(|| Error::InvalidPath("empty node sequence".into()))?;
    if !network.contains(first) {
        return Err(Error::InvalidPath(format!("node {first} does not exist")));
    }

    let mut travel_time = 0.0;
    for pair in nodes.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if !network.contains(b) {
            return Err(Error::InvalidPath(format!("node {b} does not exist")));
        }
        let edge = network
            .edge(a, b)
            .ok_or_else(|| Error::InvalidPath(format!("no edge {a} -> {b}")))?;
        travel_time += edge.travel_time;
    }

    let risk_cost = nodes.iter().map(|&v| network.risk(v)).sum();
    let survival_prob = nodes
        .iter()
        .map(|&v| 1.0 - network.capture_prob(v))
        .product();

    Ok(EscapePath {
        nodes: nodes.to_vec(),
        risk_cost,
        survival_prob,
        travel_time,
    })
}
