//! Comparison methods: pooled and per-node penalized fits, gossip-averaged
//! local fits, and decentralized subgradient descent on the raw hinge.

use ndarray::{Array1, ArrayView1};

use crate::error::{DecsvmError, Result};
use crate::netgraph::Topology;
use crate::refsolver::{solve_csvm, SolveOptions};
use crate::synthgen::{pool_shards, LabeledShard};

/// Oracle fit on the concatenation of every shard.
pub fn pooled_svm(shards: &[LabeledShard], opts: &SolveOptions) -> Result<Array1<f64>> {
    let pooled = pool_shards(shards)?;
    solve_csvm(pooled.x.view(), pooled.y.view(), opts)
}

/// Independent fit per node; no communication.
pub fn local_svm(shards: &[LabeledShard], opts: &SolveOptions) -> Result<Vec<Array1<f64>>> {
    shards
        .iter()
        .map(|s| solve_csvm(s.x.view(), s.y.view(), opts))
        .collect()
}

/// `rounds` synchronous Metropolis gossip steps applied to per-node vectors.
/// The network mean is preserved exactly at every round.
pub fn average_consensus(
    estimates: &[Array1<f64>],
    topology: &Topology,
    rounds: usize,
) -> Result<Vec<Array1<f64>>> {
    let m = topology.num_nodes();
    if estimates.len() != m {
        return Err(DecsvmError::ShapeMismatch(format!(
            "{} estimates vs {} nodes",
            estimates.len(),
            m
        )));
    }
    let w = topology.metropolis_weights();
    let mut current: Vec<Array1<f64>> = estimates.to_vec();
    for _ in 0..rounds {
        let next: Vec<Array1<f64>> = (0..m)
            .map(|i| {
                let mut acc = &current[i] * w[[i, i]];
                for &j in topology.neighbors(i) {
                    acc.scaled_add(w[[i, j]], &current[j]);
                }
                acc
            })
            .collect();
        current = next;
    }
    Ok(current)
}

/// Hinge subgradient of the mean loss at `beta`; zero at the kink.
fn hinge_subgradient(shard: &LabeledShard, beta: ArrayView1<'_, f64>) -> Array1<f64> {
    let margins = shard.x.dot(&beta) * &shard.y;
    let n = shard.n();
    let mut weights = Array1::<f64>::zeros(n);
    for i in 0..n {
        if margins[i] < 1.0 {
            weights[i] = -shard.y[i];
        }
    }
    shard.x.t().dot(&weights) / n as f64
}

/// Settings for the decentralized subgradient baseline.
#[derive(Debug, Clone, Copy)]
pub struct DsubgdConfig {
    pub lambda: f64,
    pub step0: f64,
    pub decay: f64,
    pub rounds: usize,
}

impl Default for DsubgdConfig {
    fn default() -> Self {
        DsubgdConfig { lambda: 0.0, step0: 1.0, decay: 0.5, rounds: 500 }
    }
}

/// Decentralized projected-free subgradient descent on the l1-penalized
/// hinge loss: gossip mixing followed by a diminishing-step subgradient
/// move, `step_t = step0 / (t + 1)^decay`. Dense iterates: the l1 term only
/// contributes `lambda * sign(beta)` to the direction, so coordinates are
/// essentially never exactly zero.
pub fn dsubgd(
    shards: &[LabeledShard],
    topology: &Topology,
    cfg: &DsubgdConfig,
    init: Option<&[Array1<f64>]>,
) -> Result<Vec<Array1<f64>>> {
    let m = topology.num_nodes();
    if shards.len() != m {
        return Err(DecsvmError::ShapeMismatch(format!(
            "{} shards vs {} nodes",
            shards.len(),
            m
        )));
    }
    if !(cfg.step0 > 0.0) || cfg.decay < 0.0 || cfg.lambda < 0.0 {
        return Err(DecsvmError::InvalidConfig("bad subgradient settings".into()));
    }
    let dim = shards[0].x.ncols();
    let w = topology.metropolis_weights();
    let mut betas: Vec<Array1<f64>> = match init {
        Some(b) => {
            if b.len() != m || b.iter().any(|v| v.len() != dim) {
                return Err(DecsvmError::ShapeMismatch("bad init".into()));
            }
            b.to_vec()
        }
        None => (0..m).map(|_| Array1::zeros(dim)).collect(),
    };
    for t in 0..cfg.rounds {
        let step = cfg.step0 / ((t + 1) as f64).powf(cfg.decay);
        let mixed: Vec<Array1<f64>> = (0..m)
            .map(|i| {
                let mut acc = &betas[i] * w[[i, i]];
                for &j in topology.neighbors(i) {
                    acc.scaled_add(w[[i, j]], &betas[j]);
                }
                acc
            })
            .collect();
        for (i, shard) in shards.iter().enumerate() {
            let mut g = hinge_subgradient(shard, mixed[i].view());
            for j in 0..dim {
                g[j] += cfg.lambda * mixed[i][j].signum() * if mixed[i][j] == 0.0 { 0.0 } else { 1.0 };
            }
            let mut next = mixed[i].clone();
            next.scaled_add(-step, &g);
            betas[i] = next;
        }
    }
    Ok(betas)
}
