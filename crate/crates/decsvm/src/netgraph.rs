//! Communication graph: undirected, connected, self-loop free, plus the
//! Metropolis mixing weights used by the averaging and subgradient baselines.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{DecsvmError, Result};

const MAX_CONNECTED_RETRIES: usize = 10_000;

/// Immutable undirected graph on `m` nodes (0-based internally, 1-based in
/// files and documentation).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    m: usize,
    adjacency: Vec<Vec<bool>>,
    neighbors: Vec<Vec<usize>>,
}

impl Topology {
    fn from_adjacency(adjacency: Vec<Vec<bool>>) -> Result<Self> {
        let m = adjacency.len();
        for (i, row) in adjacency.iter().enumerate() {
            if row.len() != m {
                return Err(DecsvmError::Graph("adjacency must be square".into()));
            }
            if row[i] {
                return Err(DecsvmError::Graph(format!("self-loop at node {}", i + 1)));
            }
            for j in 0..m {
                if adjacency[i][j] != adjacency[j][i] {
                    return Err(DecsvmError::Graph("adjacency must be symmetric".into()));
                }
            }
        }
        let neighbors: Vec<Vec<usize>> = (0..m)
            .map(|i| (0..m).filter(|&j| adjacency[i][j]).collect())
            .collect();
        let t = Topology { m, adjacency, neighbors };
        if !t.is_connected() {
            return Err(DecsvmError::Graph("graph is not connected".into()));
        }
        Ok(t)
    }

    /// Erdős–Rényi draw conditioned on connectivity by rejection sampling,
    /// bounded at 10^4 attempts. Deterministic given the seed.
    pub fn erdos_renyi_connected(m: usize, p_c: f64, seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(DecsvmError::Graph("need at least one node".into()));
        }
        if !(p_c > 0.0 && p_c <= 1.0) {
            return Err(DecsvmError::Graph(format!("p_c must be in (0, 1], got {p_c}")));
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        for _ in 0..MAX_CONNECTED_RETRIES {
            let mut adjacency = vec![vec![false; m]; m];
            for i in 0..m {
                for j in i + 1..m {
                    if rng.random::<f64>() < p_c {
                        adjacency[i][j] = true;
                        adjacency[j][i] = true;
                    }
                }
            }
            if let Ok(t) = Topology::from_adjacency(adjacency) {
                return Ok(t);
            }
        }
        Err(DecsvmError::Graph(format!(
            "no connected draw in {MAX_CONNECTED_RETRIES} attempts (m={m}, p_c={p_c}); \
             p_c is likely too small"
        )))
    }

    /// Build from a 1-based edge list; rejects self-loops, out-of-range
    /// endpoints and disconnected graphs.
    pub fn from_edge_list(m: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adjacency = vec![vec![false; m]; m];
        for &(u, v) in edges {
            if u == v {
                return Err(DecsvmError::Graph(format!("self-loop ({u}, {v})")));
            }
            if u < 1 || u > m || v < 1 || v > m {
                return Err(DecsvmError::Graph(format!(
                    "endpoint out of range in ({u}, {v}); nodes are 1..={m}"
                )));
            }
            adjacency[u - 1][v - 1] = true;
            adjacency[v - 1][u - 1] = true;
        }
        Topology::from_adjacency(adjacency)
    }

    /// Parse a plain-text edge list: one `u v` pair per line (1-based),
    /// comments starting with `#`.
    pub fn load_edge_list(path: &std::path::Path) -> Result<Vec<(usize, usize)>> {
        let text = std::fs::read_to_string(path)?;
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let parse = |s: Option<&str>| -> Result<usize> {
                s.and_then(|v| v.parse().ok()).ok_or_else(|| {
                    DecsvmError::Graph(format!("bad edge line {} in {}", lineno + 1, path.display()))
                })
            };
            let u = parse(parts.next())?;
            let v = parse(parts.next())?;
            edges.push((u, v));
        }
        Ok(edges)
    }

    pub fn from_edge_list_file(m: usize, path: &std::path::Path) -> Result<Self> {
        let edges = Self::load_edge_list(path)?;
        Self::from_edge_list(m, &edges)
    }

    pub fn num_nodes(&self) -> usize {
        self.m
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i][j]
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.neighbors[node].len()
    }

    /// Undirected edges as 0-based `(i, j)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.m {
            for &j in &self.neighbors[i] {
                if i < j {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn num_edges(&self) -> usize {
        self.neighbors.iter().map(|n| n.len()).sum::<usize>() / 2
    }

    pub fn is_connected(&self) -> bool {
        if self.m == 0 {
            return false;
        }
        let mut seen = vec![false; self.m];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.neighbors[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.m
    }

    /// Symmetric doubly stochastic Metropolis weights:
    /// `w_ij = 1/(1 + max(deg i, deg j))` on edges, remainder on the diagonal.
    pub fn metropolis_weights(&self) -> Array2<f64> {
        let m = self.m;
        let mut w = Array2::<f64>::zeros((m, m));
        for i in 0..m {
            for &j in &self.neighbors[i] {
                w[[i, j]] = 1.0 / (1.0 + self.degree(i).max(self.degree(j)) as f64);
            }
        }
        for i in 0..m {
            let off: f64 = (0..m).filter(|&j| j != i).map(|j| w[[i, j]]).sum();
            w[[i, i]] = 1.0 - off;
        }
        w
    }
}
