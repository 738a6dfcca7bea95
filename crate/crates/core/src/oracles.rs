//! Independent checks: exhaustive simple-path enumeration for small networks
//! and Monte Carlo simulation of independent per-node capture.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::{score_path, EscapePath, NodeId, RiskNetwork};

pub const DEFAULT_NODE_LIMIT: usize = 14;

/// Trials per Monte Carlo batch. Each batch draws from its own stream, so the
/// estimate does not depend on how batches are scheduled.
pub const MC_BATCH: u64 = 8192;

struct Search<'a> {
    network: &'a RiskNetwork,
    is_exit: Vec<bool>,
    on_path: Vec<bool>,
    path: Vec<NodeId>,
    best: Option<(f64, Vec<NodeId>)>,
}

impl Search<'_> {
    fn offer(&mut self, survival: f64) {
        let better = match &self.best {
            None => true,
            Some((s, p)) => {
                survival > *s
                    || (survival == *s
                        && (self.path.len() < p.len()
                            || (self.path.len() == p.len() && self.path < *p)))
            }
        };
        if better {
            self.best = Some((survival, self.path.clone()));
        }
    }

    fn visit(&mut self, v: NodeId, prefix: f64) {
        let survival = prefix * (1.0 - self.network.capture_prob(v));
        if let Some((s, _)) = &self.best {
            if survival < *s {
                return;
            }
        }
        self.path.push(v);
        self.on_path[v.index()] = true;
        if self.is_exit[v.index()] {
            self.offer(survival);
        } else {
            for e in self.network.out_edges(v) {
                if !self.on_path[e.target.index()] {
                    self.visit(e.target, survival);
                }
            }
        }
        self.on_path[v.index()] = false;
        self.path.pop();
    }
}

/// Brute-force maximum-survival route over every simple path that ends at the
/// first exit it reaches. Ties go to the shorter path, then the
/// lexicographically smaller node sequence.
pub fn enumerate_best_path(
    network: &RiskNetwork,
    start: NodeId,
    exits: &[NodeId],
    node_limit: usize,
) -> Result<EscapePath> {
    if network.node_count() > node_limit {
        return Err(Error::TooLarge {
            node_count: network.node_count(),
            limit: node_limit,
        });
    }
    if exits.is_empty() {
        return Err(Error::Config("exit set is empty".into()));
    }
    network.check_node(start)?;
    let mut is_exit = vec![false; network.node_count()];
    for &d in exits {
        network.check_node(d)?;
        is_exit[d.index()] = true;
    }

    let mut search = Search {
        network,
        is_exit,
        on_path: vec![false; network.node_count()],
        path: Vec::new(),
        best: None,
    };
    search.visit(start, 1.0);
    let (_, nodes) = search.best.ok_or(Error::NoEscapeRoute(start))?;
    score_path(network, &nodes)
}

/// Monte Carlo survival estimate for a fixed path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

fn batch_rng(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

fn survivors_in_batch(probs: &[f64], trials: u64, seed: u64, batch: u64) -> u64 {
    let mut rng = batch_rng(seed, batch);
    let mut alive = 0;
    'trial: for _ in 0..trials {
        for &p in probs {
            // p == 0 never captures and p == 1 always does, so neither draws.
            if p >= 1.0 || (p > 0.0 && rng.gen::<f64>() < p) {
                continue 'trial;
            }
        }
        alive += 1;
    }
    alive
}

fn batch_sizes(trials: u64) -> impl Iterator<Item = (u64, u64)> {
    let batches = trials.div_ceil(MC_BATCH);
    (0..batches).map(move |b| (b, MC_BATCH.min(trials - b * MC_BATCH)))
}

/// Simulates `trials` traversals of `path`, each node capturing the evader
/// independently with its capture probability.
pub fn monte_carlo_survival(
    network: &RiskNetwork,
    path: &[NodeId],
    trials: u64,
    seed: u64,
) -> Result<SurvivalEstimate> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    score_path(network, path)?;
    let probs: Vec<f64> = path
        .iter()
        .map(|&v| network.capture_prob(v))
        .filter(|&p| p > 0.0)
        .collect();

    let batches: Vec<(u64, u64)> = batch_sizes(trials).collect();
    let alive: u64 = batches
        .par_iter()
        .map(|&(b, n)| survivors_in_batch(&probs, n, seed, b))
        .sum();

    let estimate = alive as f64 / trials as f64;
    let std_error = (estimate * (1.0 - estimate) / trials as f64).sqrt();
    Ok(SurvivalEstimate {
        estimate,
        std_error,
    })
}
