//! Risk-blind shortest-travel-time router and a label-setting oracle for the
//! additive risk objective.
//!
//! Both searches treat exits as terminal: an exit is never expanded past.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::network::{score_path, EscapePath, NodeId, RiskNetwork};

#[derive(Debug, Clone, Copy, PartialEq)]
struct Label {
    cost: f64,
    node: NodeId,
}

impl Eq for Label {}

impl Ord for Label {
    // Min-heap on (cost, node).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn exit_mask(network: &RiskNetwork, exits: &[NodeId]) -> Result<Vec<bool>> {
    if exits.is_empty() {
        return Err(Error::Config("exit set is empty".into()));
    }
    let mut mask = vec![false; network.node_count()];
    for &d in exits {
        network.check_node(d)?;
        mask[d.index()] = true;
    }
    Ok(mask)
}

/// Minimum-travel-time route from `start` to the time-nearest exit, ignoring
/// all capture risk. Ties between exits go to the smaller exit id.
///
/// The returned path is scored for risk so it can be compared to the
/// survival-optimal route.
pub fn shortest_time_path(
    network: &RiskNetwork,
    start: NodeId,
    exits: &[NodeId],
) -> Result<EscapePath> {
    let is_exit = exit_mask(network, exits)?;
    network.check_node(start)?;

    let n = network.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred: Vec<Option<NodeId>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[start.index()] = 0.0;
    heap.push(Label {
        cost: 0.0,
        node: start,
    });

    while let Some(Label { cost, node }) = heap.pop() {
        if done[node.index()] {
            continue;
        }
        done[node.index()] = true;
        if is_exit[node.index()] {
            continue;
        }
        for e in network.out_edges(node) {
            let cand = cost + e.travel_time;
            if cand < dist[e.target.index()] {
                dist[e.target.index()] = cand;
                pred[e.target.index()] = Some(node);
                heap.push(Label {
                    cost: cand,
                    node: e.target,
                });
            }
        }
    }

    let exit = exits
        .iter()
        .copied()
        .filter(|d| dist[d.index()].is_finite())
        .min_by(|a, b| dist[a.index()].total_cmp(&dist[b.index()]).then(a.cmp(b)))
        .ok_or(Error::NoEscapeRoute(start))?;

    let mut nodes = vec![exit];
    let mut v = exit;
    while let Some(p) = pred[v.index()] {
        nodes.push(p);
        v = p;
    }
    nodes.reverse();
    score_path(network, &nodes)
}

/// Result of the label-setting risk search.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskOracle {
    /// Minimal summed risk cost from the start to an exit; `+inf` if none.
    pub cost: f64,
    /// Empty when `cost` is infinite.
    pub path: Vec<NodeId>,
}

/// Dijkstra over node costs on the reversed graph, seeded with every exit
/// at its own risk cost. Relaxing `v -> u` sets `cost(v) = w(v) + cost(u)`.
pub fn dijkstra_risk_oracle(
    network: &RiskNetwork,
    start: NodeId,
    exits: &[NodeId],
) -> Result<RiskOracle> {
    let is_exit = exit_mask(network, exits)?;
    network.check_node(start)?;

    let n = network.node_count();
    let preds = network.in_edges();
    let mut cost = vec![f64::INFINITY; n];
    let mut succ: Vec<Option<NodeId>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for &d in exits {
        let w = network.risk(d);
        if w.is_finite() && w < cost[d.index()] {
            cost[d.index()] = w;
            heap.push(Label { cost: w, node: d });
        }
    }

    while let Some(Label { cost: c, node: u }) = heap.pop() {
        if done[u.index()] {
            continue;
        }
        done[u.index()] = true;
        if u == start {
            break;
        }
        for &v in &preds[u.index()] {
            if is_exit[v.index()] || done[v.index()] {
                continue;
            }
            let cand = network.risk(v) + c;
            if cand < cost[v.index()] {
                cost[v.index()] = cand;
                succ[v.index()] = Some(u);
                heap.push(Label {
                    cost: cand,
                    node: v,
                });
            }
        }
    }

    let total = cost[start.index()];
    if !total.is_finite() {
        return Ok(RiskOracle {
            cost: f64::INFINITY,
            path: Vec::new(),
        });
    }
    let mut path = vec![start];
    let mut v = start;
    while let Some(u) = succ[v.index()] {
        path.push(u);
        v = u;
    }
    Ok(RiskOracle { cost: total, path })
}
