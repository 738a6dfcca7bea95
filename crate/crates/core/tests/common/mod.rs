#![allow(dead_code)]

use std::collections::BTreeSet;

use dpero::{build_network, NodeId, RiskNetwork};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random directed network for cross-checking solvers.
pub struct RandomInstance {
    pub network: RiskNetwork,
    pub start: NodeId,
    pub exits: Vec<NodeId>,
}

/// `nodes` nodes, about `density * nodes` distinct arcs, roughly half the
/// nodes risk-free and the rest with capture probability in `[0, max_prob]`.
/// Start is node 0; one to three exits are drawn from the rest.
pub fn random_instance(seed: u64, nodes: usize, density: f64, max_prob: f64) -> RandomInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_arcs = nodes * (nodes - 1);
    let target = ((density * nodes as f64).round() as usize).min(max_arcs);
    let mut arcs = BTreeSet::new();
    while arcs.len() < target {
        let s = rng.gen_range(0..nodes as u32);
        let t = rng.gen_range(0..nodes as u32);
        if s != t {
            arcs.insert((s, t));
        }
    }
    let edges: Vec<(u32, u32, f64)> = arcs
        .into_iter()
        .map(|(s, t)| (s, t, rng.gen_range(1..=3) as f64))
        .collect();
    let probs: Vec<f64> = (0..nodes)
        .map(|_| {
            if rng.gen_bool(0.5) {
                0.0
            } else {
                rng.gen_range(0.0..=max_prob)
            }
        })
        .collect();
    let exit_count = rng.gen_range(1..=3.min(nodes - 1));
    let mut exits = BTreeSet::new();
    while exits.len() < exit_count {
        exits.insert(NodeId(rng.gen_range(1..nodes as u32)));
    }
    RandomInstance {
        network: build_network(nodes, &edges, &probs).expect("valid random network"),
        start: NodeId(0),
        exits: exits.into_iter().collect(),
    }
}
