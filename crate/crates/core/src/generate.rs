//! Grid networks with random extra arcs, randomly placed defenders, and the
//! corner-start / far-border-exits scenario layout.
//!
//! Every random choice comes from a ChaCha8 generator seeded with the
//! scenario seed, on a separate stream per concern, so changing the defender
//! count never perturbs topology and vice versa.

use std::collections::HashSet;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::network::{build_network, NodeId, RiskNetwork};
use crate::scenario::{validate_prob_range, GenParams, ScenarioSpec};

const STREAM_EXTRA_EDGES: u64 = 1;
const STREAM_DEFENDER_NODES: u64 = 2;
const STREAM_DEFENDER_PROBS: u64 = 3;

pub const DEFAULT_EXIT_COUNT: usize = 5;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Row-major node index of grid cell `(row, col)`.
pub fn grid_node(cols: usize, row: usize, col: usize) -> NodeId {
    NodeId((row * cols + col) as u32)
}

fn lattice_adjacent(cols: usize, a: usize, b: usize) -> bool {
    let (ra, ca) = (a / cols, a % cols);
    let (rb, cb) = (b / cols, b % cols);
    ra.abs_diff(rb) + ca.abs_diff(cb) == 1
}

/// `rows x cols` 4-connected lattice with bidirectional unit-time arcs plus
/// `extra_edges` random directed arcs between non-adjacent node pairs.
/// All capture probabilities start at zero.
pub fn generate_gre(
    rows: usize,
    cols: usize,
    extra_edges: usize,
    seed: u64,
) -> Result<RiskNetwork> {
    if rows < 2 || cols < 2 {
        return Err(Error::Config(format!(
            "grid must be at least 2x2, got {rows}x{cols}"
        )));
    }
    let n = rows
        .checked_mul(cols)
        .filter(|&n| n <= u32::MAX as usize)
        .ok_or_else(|| Error::Config("grid too large".into()))?;

    let lattice_arcs = 2 * (rows * (cols - 1) + cols * (rows - 1));
    let mut edges = Vec::with_capacity(lattice_arcs + extra_edges);
    for r in 0..rows {
        for c in 0..cols {
            let v = grid_node(cols, r, c).0;
            if c + 1 < cols {
                let u = grid_node(cols, r, c + 1).0;
                edges.push((v, u, 1.0));
                edges.push((u, v, 1.0));
            }
            if r + 1 < rows {
                let u = grid_node(cols, r + 1, c).0;
                edges.push((v, u, 1.0));
                edges.push((u, v, 1.0));
            }
        }
    }

    let available = n * (n - 1) - lattice_arcs;
    if extra_edges > available {
        return Err(Error::Config(format!(
            "requested {extra_edges} extra edges but only {available} non-adjacent pairs exist"
        )));
    }
    let mut rng = stream(seed, STREAM_EXTRA_EDGES);
    let mut taken = HashSet::with_capacity(extra_edges);
    while taken.len() < extra_edges {
        let s = rng.gen_range(0..n);
        let t = rng.gen_range(0..n);
        if s == t || lattice_adjacent(cols, s, t) || !taken.insert((s, t)) {
            continue;
        }
        edges.push((s as u32, t as u32, 1.0));
    }

    build_network(n, &edges, &vec![0.0; n])
}

/// Copy of `network` with `count` distinct nodes outside `forbidden` given a
/// capture probability drawn uniformly from `[prob_low, prob_high]`.
pub fn place_defenders(
    network: &RiskNetwork,
    count: usize,
    prob_low: f64,
    prob_high: f64,
    forbidden: &[NodeId],
    seed: u64,
) -> Result<RiskNetwork> {
    validate_prob_range(prob_low, prob_high)?;
    let blocked: HashSet<NodeId> = forbidden.iter().copied().collect();
    let eligible: Vec<NodeId> = network.nodes().filter(|v| !blocked.contains(v)).collect();
    if count > eligible.len() {
        return Err(Error::Config(format!(
            "cannot place {count} defenders on {} eligible nodes",
            eligible.len()
        )));
    }

    let mut chosen: Vec<NodeId> = index::sample(
        &mut stream(seed, STREAM_DEFENDER_NODES),
        eligible.len(),
        count,
    )
    .into_iter()
    .map(|i| eligible[i])
    .collect();
    chosen.sort_unstable();

    let mut probs = stream(seed, STREAM_DEFENDER_PROBS);
    let mut out = network.clone();
    for v in chosen {
        let p = if prob_low == prob_high {
            prob_low
        } else {
            probs.gen_range(prob_low..=prob_high)
        };
        out.set_capture_prob(v, p)?;
    }
    Ok(out)
}

/// Exit columns evenly spread over `[0, cols - 1]`.
pub fn exit_columns(cols: usize, exit_count: usize) -> Result<Vec<usize>> {
    if exit_count == 0 || exit_count > cols {
        return Err(Error::Config(format!(
            "cannot place {exit_count} exits on a border of {cols} columns"
        )));
    }
    if exit_count == 1 {
        return Ok(vec![cols - 1]);
    }
    Ok((0..exit_count)
        .map(|k| k * (cols - 1) / (exit_count - 1))
        .collect())
}

/// Full scenario: grid, start at `(0, 0)`, exits on the last row, defenders
/// placed away from the start and exits.
pub fn make_scenario(params: &GenParams, seed: u64) -> Result<(RiskNetwork, ScenarioSpec)> {
    params.validate()?;
    let columns = exit_columns(params.cols, params.exit_count)?;
    let grid = generate_gre(params.rows, params.cols, params.extra_edges, seed)?;

    let start = grid_node(params.cols, 0, 0);
    let exits: Vec<NodeId> = columns
        .iter()
        .map(|&c| grid_node(params.cols, params.rows - 1, c))
        .collect();
    let mut forbidden = exits.clone();
    forbidden.push(start);

    let network = place_defenders(
        &grid,
        params.defender_count,
        params.prob_low,
        params.prob_high,
        &forbidden,
        seed,
    )?;
    let mut spec = ScenarioSpec::new(start, exits, seed);
    spec.params = Some(params.clone());
    spec.validate(&network)?;
    Ok((network, spec))
}
