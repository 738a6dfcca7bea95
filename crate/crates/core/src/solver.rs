//! Value-iteration solver for the minimum cumulative risk cost to any exit.
//!
//! Cost-to-go satisfies `J(v) = w(v) + min_u J(u)` over successors `u`, with
//! `J(d) = w(d)` on exits. Sweeps are synchronous: every update in a sweep
//! reads the previous sweep's values. Starting from `+inf` off the exits, the
//! values only decrease and reach the fixed point after at most `|V| - 1`
//! sweeps, plus one sweep that observes no change.
//!
//! Successor ties are broken by `(J(u), hops(u), u)` where `hops(u)` is the
//! hop count of `u`'s own policy route. Along any policy edge the pair
//! `(J, hops)` strictly decreases, so following the policy can never cycle,
//! even through zero-risk regions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::{score_path, EscapePath, NodeId, RiskNetwork};

pub const DEFAULT_EPSILON: f64 = 1e-9;

const NO_HOPS: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    pub cost_to_go: Vec<f64>,
    pub policy: Vec<Option<NodeId>>,
    /// Hops from each node to its exit along the policy (`u32::MAX` if none).
    pub hops: Vec<u32>,
    pub sweeps: usize,
    pub converged: bool,
    pub epsilon: f64,
    is_exit: Vec<bool>,
}

impl ValueTable {
    pub fn cost(&self, v: NodeId) -> f64 {
        self.cost_to_go[v.index()]
    }

    pub fn next(&self, v: NodeId) -> Option<NodeId> {
        self.policy[v.index()]
    }

    pub fn is_exit(&self, v: NodeId) -> bool {
        self.is_exit[v.index()]
    }

    /// Debug dump, one record per node; infinite costs become `null`.
    pub fn records(&self) -> Vec<ValueRecord> {
        self.cost_to_go
            .iter()
            .zip(&self.policy)
            .enumerate()
            .map(|(i, (&c, &p))| ValueRecord {
                node: i as u32,
                cost: c.is_finite().then_some(c),
                policy: p.map(|n| n.0),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueRecord {
    pub node: u32,
    pub cost: Option<f64>,
    pub policy: Option<u32>,
}

/// Outcome of a single synchronous sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepStats {
    pub max_change: f64,
    pub policy_changed: bool,
}

/// Stepwise value iteration over a fixed network and exit set.
#[derive(Debug)]
pub struct ValueIteration<'a> {
    network: &'a RiskNetwork,
    is_exit: Vec<bool>,
    interior: Vec<NodeId>,
    cost: Vec<f64>,
    hops: Vec<u32>,
    policy: Vec<Option<NodeId>>,
    sweeps: usize,
}

impl<'a> ValueIteration<'a> {
    pub fn new(network: &'a RiskNetwork, exits: &[NodeId]) -> Result<Self> {
        if exits.is_empty() {
            return Err(Error::Config("exit set is empty".into()));
        }
        let n = network.node_count();
        let mut is_exit = vec![false; n];
        for &d in exits {
            network.check_node(d)?;
            is_exit[d.index()] = true;
        }
        let mut cost = vec![f64::INFINITY; n];
        let mut hops = vec![NO_HOPS; n];
        for &d in exits {
            cost[d.index()] = network.risk(d);
            if cost[d.index()].is_finite() {
                hops[d.index()] = 0;
            }
        }
        let interior = network.nodes().filter(|v| !is_exit[v.index()]).collect();
        Ok(ValueIteration {
            network,
            is_exit,
            interior,
            cost,
            hops,
            policy: vec![None; n],
            sweeps: 0,
        })
    }

    pub fn cost_to_go(&self) -> &[f64] {
        &self.cost
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    /// Non-exit nodes; an empty set means the boundary alone is the fixed point.
    pub fn has_interior(&self) -> bool {
        !self.interior.is_empty()
    }

    /// One synchronous Bellman sweep over all non-exit nodes.
    pub fn sweep(&mut self) -> SweepStats {
        let prev_cost = self.cost.clone();
        let prev_hops = self.hops.clone();
        let mut max_change = 0.0_f64;
        let mut policy_changed = false;

        for &v in &self.interior {
            let mut best: Option<(f64, u32, NodeId)> = None;
            for e in self.network.out_edges(v) {
                let u = e.target;
                let cand = (prev_cost[u.index()], prev_hops[u.index()], u);
                if !cand.0.is_finite() {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some(b) => (cand.0, cand.1, cand.2) < (b.0, b.1, b.2),
                };
                if better {
                    best = Some(cand);
                }
            }

            let w = self.network.risk(v);
            let (new_cost, new_hops, new_next) = match best {
                Some((ju, hu, u)) if w.is_finite() => (w + ju, hu + 1, Some(u)),
                _ => (f64::INFINITY, NO_HOPS, None),
            };

            let old = prev_cost[v.index()];
            let change = if new_cost == old {
                0.0
            } else {
                (new_cost - old).abs()
            };
            max_change = max_change.max(change);
            policy_changed |=
                new_next != self.policy[v.index()] || new_hops != prev_hops[v.index()];

            self.cost[v.index()] = new_cost;
            self.hops[v.index()] = new_hops;
            self.policy[v.index()] = new_next;
        }

        self.sweeps += 1;
        SweepStats {
            max_change,
            policy_changed,
        }
    }

    /// Sweeps until the largest change is below `epsilon` and the policy is
    /// stable, or until `|V| + 1` sweeps have run.
    pub fn run(mut self, epsilon: f64) -> ValueTable {
        let limit = self.network.node_count() + 1;
        let mut converged = !self.has_interior();
        while !converged && self.sweeps < limit {
            let stats = self.sweep();
            converged = stats.max_change < epsilon && !stats.policy_changed;
        }
        ValueTable {
            cost_to_go: self.cost,
            policy: self.policy,
            hops: self.hops,
            sweeps: self.sweeps,
            converged,
            epsilon,
            is_exit: self.is_exit,
        }
    }
}

/// Solves for cost-to-go and the safest-successor policy.
pub fn value_iteration(
    network: &RiskNetwork,
    exits: &[NodeId],
    epsilon: f64,
) -> Result<ValueTable> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Config(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    Ok(ValueIteration::new(network, exits)?.run(epsilon))
}

/// Follows the policy from `start` to an exit and scores the route.
pub fn extract_path(
    table: &ValueTable,
    network: &RiskNetwork,
    start: NodeId,
) -> Result<EscapePath> {
    if table.cost_to_go.len() != network.node_count() {
        return Err(Error::Config("value table does not match network".into()));
    }
    network.check_node(start)?;
    if !table.converged {
        return Err(Error::Config("value table has not converged".into()));
    }
    if !table.cost(start).is_finite() {
        return Err(Error::NoEscapeRoute(start));
    }

    let mut visited = vec![false; network.node_count()];
    let mut nodes = vec![start];
    visited[start.index()] = true;
    let mut v = start;
    while !table.is_exit(v) {
        let next = table
            .next(v)
            .ok_or_else(|| Error::InvalidPath(format!("policy ends at non-exit node {v}")))?;
        if visited[next.index()] {
            return Err(Error::PolicyCycle(next));
        }
        visited[next.index()] = true;
        nodes.push(next);
        v = next;
    }
    score_path(network, &nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::build_network;

    const NEG_LN_07: f64 = 0.35667494393873245;

    fn ids(v: &[u32]) -> Vec<NodeId> {
        v.iter().copied().map(NodeId).collect()
    }

    /// s=0, a=1, d=2
    fn line() -> RiskNetwork {
        build_network(3, &[(0, 1, 1.0), (1, 2, 1.0)], &[0.0, 0.3, 0.0]).unwrap()
    }

    /// s=0, a=1, b=2, c=3, d=4; s->a->d and s->b->c->d
    fn diamond() -> RiskNetwork {
        build_network(
            5,
            &[
                (0, 1, 1.0),
                (1, 4, 1.0),
                (0, 2, 1.0),
                (2, 3, 1.0),
                (3, 4, 1.0),
            ],
            &[0.0, 0.3, 0.0, 0.0, 0.0],
        )
        .unwrap()
    }

    #[test]
    fn degenerate_single_exit() {
        let net = build_network(1, &[], &[0.0]).unwrap();
        let t = value_iteration(&net, &ids(&[0]), DEFAULT_EPSILON).unwrap();
        assert_eq!(t.cost_to_go, vec![0.0]);
        assert_eq!(t.policy, vec![None]);
        assert_eq!(t.sweeps, 0);
        assert!(t.converged);
        let p = extract_path(&t, &net, NodeId(0)).unwrap();
        assert_eq!(p.nodes, ids(&[0]));
    }

    #[test]
    fn line_costs() {
        let net = line();
        let t = value_iteration(&net, &ids(&[2]), DEFAULT_EPSILON).unwrap();
        assert_eq!(t.cost(NodeId(2)), 0.0);
        assert!((t.cost(NodeId(1)) - NEG_LN_07).abs() < 1e-12);
        assert!((t.cost(NodeId(0)) - NEG_LN_07).abs() < 1e-12);
        assert!(t.converged);
        assert!(t.sweeps <= net.node_count() + 1);

        let p = extract_path(&t, &net, NodeId(0)).unwrap();
        assert_eq!(p.nodes, ids(&[0, 1, 2]));
        assert!((p.survival_prob - 0.7).abs() < 1e-12);
        assert!((p.risk_cost - t.cost(NodeId(0))).abs() < 1e-9);
    }

    #[test]
    fn diamond_prefers_risk_free_branch() {
        let net = diamond();
        let t = value_iteration(&net, &ids(&[4]), DEFAULT_EPSILON).unwrap();
        assert_eq!(t.cost(NodeId(0)), 0.0);
        assert_eq!(t.next(NodeId(0)), Some(NodeId(2)));
        let p = extract_path(&t, &net, NodeId(0)).unwrap();
        assert_eq!(p.nodes, ids(&[0, 2, 3, 4]));
        assert_eq!(p.survival_prob, 1.0);
    }

    #[test]
    fn unreachable_node_is_infinite() {
        // 2 is a sink and 3 only reaches 2
        let net = build_network(4, &[(0, 1, 1.0), (3, 2, 1.0)], &[0.0; 4]).unwrap();
        let t = value_iteration(&net, &ids(&[1]), DEFAULT_EPSILON).unwrap();
        assert_eq!(t.cost(NodeId(2)), f64::INFINITY);
        assert_eq!(t.next(NodeId(2)), None);
        assert_eq!(t.cost(NodeId(3)), f64::INFINITY);
        assert!(matches!(
            extract_path(&t, &net, NodeId(3)),
            Err(Error::NoEscapeRoute(NodeId(3)))
        ));
    }

    #[test]
    fn impassable_nodes_block_routes() {
        let net = build_network(3, &[(0, 1, 1.0), (1, 2, 1.0)], &[0.0, 1.0, 0.0]).unwrap();
        let t = value_iteration(&net, &ids(&[2]), DEFAULT_EPSILON).unwrap();
        assert_eq!(t.cost(NodeId(1)), f64::INFINITY);
        assert_eq!(t.cost(NodeId(0)), f64::INFINITY);
        assert_eq!(t.next(NodeId(1)), None);
    }

    #[test]
    fn exits_keep_boundary_value() {
        // exit 1 carries risk and has an outgoing arc to a safer exit
        let net = build_network(3, &[(0, 1, 1.0), (1, 2, 1.0)], &[0.0, 0.5, 0.0]).unwrap();
        let t = value_iteration(&net, &ids(&[1, 2]), DEFAULT_EPSILON).unwrap();
        assert_eq!(t.cost(NodeId(1)), net.risk(NodeId(1)));
        assert_eq!(t.next(NodeId(1)), None);
    }

    #[test]
    fn rejects_bad_configuration() {
        let net = line();
        assert!(matches!(
            value_iteration(&net, &[], DEFAULT_EPSILON),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            value_iteration(&net, &ids(&[9]), DEFAULT_EPSILON),
            Err(Error::UnknownNode(9))
        ));
        assert!(matches!(
            value_iteration(&net, &ids(&[2]), 0.0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn zero_risk_cluster_policy_is_acyclic() {
        // 0 has a short risky route 0->4->5 and a zero-risk detour via 1<->0
        // and 1->2->3->5. Graph hop distances alone would send 1 back to 0.
        let net = build_network(
            6,
            &[
                (0, 4, 1.0),
                (4, 5, 1.0),
                (0, 1, 1.0),
                (1, 0, 1.0),
                (1, 2, 1.0),
                (2, 3, 1.0),
                (3, 5, 1.0),
            ],
            &[0.0, 0.0, 0.0, 0.0, 0.4, 0.0],
        )
        .unwrap();
        let t = value_iteration(&net, &ids(&[5]), DEFAULT_EPSILON).unwrap();
        let p = extract_path(&t, &net, NodeId(0)).unwrap();
        assert_eq!(p.nodes, ids(&[0, 1, 2, 3, 5]));
        let p = extract_path(&t, &net, NodeId(1)).unwrap();
        assert_eq!(p.nodes, ids(&[1, 2, 3, 5]));
    }

    #[test]
    fn ties_prefer_fewer_hops_then_smaller_id() {
        // Two zero-risk routes from 0: 0->1->3 (2 hops) and 0->2->4->3 (3 hops).
        let net = build_network(
            5,
            &[
                (0, 1, 1.0),
                (1, 3, 1.0),
                (0, 2, 1.0),
                (2, 4, 1.0),
                (4, 3, 1.0),
            ],
            &[0.0; 5],
        )
        .unwrap();
        let t = value_iteration(&net, &ids(&[3]), DEFAULT_EPSILON).unwrap();
        assert_eq!(t.next(NodeId(0)), Some(NodeId(1)));

        // Equal hops: both 0->1->3 and 0->2->3; the smaller id wins.
        let net = build_network(
            4,
            &[(0, 2, 1.0), (2, 3, 1.0), (0, 1, 1.0), (1, 3, 1.0)],
            &[0.0; 4],
        )
        .unwrap();
        let t = value_iteration(&net, &ids(&[3]), DEFAULT_EPSILON).unwrap();
        assert_eq!(t.next(NodeId(0)), Some(NodeId(1)));
    }

    #[test]
    fn costs_never_increase_across_sweeps() {
        let net = diamond();
        let exits = ids(&[4]);
        let mut vi = ValueIteration::new(&net, &exits).unwrap();
        let mut prev = vi.cost_to_go().to_vec();
        for _ in 0..net.node_count() + 1 {
            vi.sweep();
            for (a, b) in vi.cost_to_go().iter().zip(&prev) {
                assert!(a <= b);
            }
            prev = vi.cost_to_go().to_vec();
        }
    }

    #[test]
    fn records_use_null_for_infinite_cost() {
        let net = build_network(3, &[(0, 1, 1.0)], &[0.0; 3]).unwrap();
        let t = value_iteration(&net, &ids(&[1]), DEFAULT_EPSILON).unwrap();
        let json = serde_json::to_string(&t.records()).unwrap();
        assert_eq!(
            json,
            r#"[{"node":0,"cost":0.0,"policy":1},{"node":1,"cost":0.0,"policy":null},{"node":2,"cost":null,"policy":null}]"#
        );
    }

    #[test]
    fn extract_rejects_unconverged_table() {
        let net = line();
        let mut t = value_iteration(&net, &ids(&[2]), DEFAULT_EPSILON).unwrap();
        t.converged = false;
        assert!(matches!(
            extract_path(&t, &net, NodeId(0)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn extract_reports_cycles() {
        let net = build_network(3, &[(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0)], &[0.0; 3]).unwrap();
        let mut t = value_iteration(&net, &ids(&[2]), DEFAULT_EPSILON).unwrap();
        t.policy[1] = Some(NodeId(0));
        assert!(matches!(
            extract_path(&t, &net, NodeId(0)),
            Err(Error::PolicyCycle(NodeId(0)))
        ));
    }
}
