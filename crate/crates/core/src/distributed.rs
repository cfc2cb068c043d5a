//! Simulated distributed RLS over a communication graph.
//!
//! Every node `i` keeps its own accumulators `Ψ_i`, `ψ_i` built from its own
//! samples only, a local estimate `ŝ_i` of the GFT coefficients and one
//! multiplier `λ_ij` per neighbour. After each sensing instant the nodes run
//! `K` synchronous ADMM iterations:
//!
//! ```text
//! ŝ_i ← (Ψ_i + ϱ|N_i| I)⁻¹ [ψ_i + (ϱ/2) Σ_j (ŝ_i + ŝ_j) − ½ Σ_j (λ_ij − λ_ji)]
//! λ_ij ← λ_ij + (ϱ/2)(ŝ_i − ŝ_j)
//! ```
//!
//! The multiplier moves along the constraint residual `ŝ_i − ŝ_j` of the
//! Lagrangian term `λ_ijᵀ(s_i − s_j)`, and the proximal pull is toward the
//! edge midpoint. Pulling toward `ŝ_j` alone or stepping against the residual
//! makes the parallel iteration diverge on sparse topologies.
//!
//! Updates read only values from the previous inner iteration, so the
//! simulator double-buffers estimates and multipliers.

use rand::Rng;
use thiserror::Error;

use crate::graph::Graph;
use crate::sampling::{draw_sampling_set, observe, NoiseModel, SamplingProbabilities};
use crate::spectral::Bandlimit;
use crate::{Matrix, Vector};

#[derive(Debug, Error)]
pub enum DistributedError {
    #[error("communication graph must have at least one node")]
    Empty,

    #[error("communication graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("neighbour lists are not symmetric: {j} is listed by {i} but not the reverse")]
    Asymmetric { i: usize, j: usize },

    #[error("node {node} lists invalid neighbour {neighbor}")]
    InvalidNeighbor { node: usize, neighbor: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{0}")]
    InvalidParameter(String),
}

/// Symmetric, connected communication topology.
#[derive(Debug, Clone, PartialEq)]
pub struct CommGraph {
    neighbors: Vec<Vec<usize>>,
    /// `reverse[i][a]` is the position of `i` in the list of `neighbors[i][a]`.
    reverse: Vec<Vec<usize>>,
}

impl CommGraph {
    pub fn from_graph(graph: &Graph) -> Result<Self, DistributedError> {
        Self::from_neighbors(graph.neighbors())
    }

    /// Builds the topology from explicit neighbour lists; duplicates are
    /// dropped and lists are sorted.
    pub fn from_neighbors(mut neighbors: Vec<Vec<usize>>) -> Result<Self, DistributedError> {
        let n = neighbors.len();
        if n == 0 {
            return Err(DistributedError::Empty);
        }
        for (i, list) in neighbors.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            if let Some(&j) = list.iter().find(|&&j| j >= n || j == i) {
                return Err(DistributedError::InvalidNeighbor { node: i, neighbor: j });
            }
        }
        let mut reverse = Vec::with_capacity(n);
        for (i, list) in neighbors.iter().enumerate() {
            let mut back = Vec::with_capacity(list.len());
            for &j in list {
                let pos = neighbors[j].binary_search(&i).map_err(|_| DistributedError::Asymmetric { i, j })?;
                back.push(pos);
            }
            reverse.push(back);
        }
        let components = count_components(&neighbors);
        if components != 1 {
            return Err(DistributedError::Disconnected { components });
        }
        Ok(Self { neighbors, reverse })
    }

    pub fn node_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// Number of undirected links `|E_c|`.
    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }
}

fn count_components(neighbors: &[Vec<usize>]) -> usize {
    let n = neighbors.len();
    let mut seen = vec![false; n];
    let mut components = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &u in &neighbors[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
    }
    components
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrlsConfig {
    /// ADMM penalty `ϱ`.
    pub rho: f64,
    /// Inner consensus iterations `K` per sensing instant.
    pub inner_iters: usize,
    /// Forgetting factor `β`.
    pub forgetting: f64,
    /// Regularizer scale: `Ψ_i[0] = (δ/N) I`.
    pub delta: f64,
}

impl Default for DrlsConfig {
    fn default() -> Self {
        Self { rho: 1.0, inner_iters: 1, forgetting: 0.95, delta: 1e-3 }
    }
}

impl DrlsConfig {
    pub fn validate(&self) -> Result<(), DistributedError> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(DistributedError::InvalidParameter(format!("rho must be positive, got {}", self.rho)));
        }
        if self.inner_iters == 0 {
            return Err(DistributedError::InvalidParameter("inner_iters must be at least 1".into()));
        }
        if !(self.forgetting > 0.0 && self.forgetting <= 1.0) {
            return Err(DistributedError::InvalidParameter(format!(
                "forgetting factor must lie in (0, 1], got {}",
                self.forgetting
            )));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(DistributedError::InvalidParameter(format!("delta must be positive, got {}", self.delta)));
        }
        Ok(())
    }
}

/// Local state of one node. `multipliers[a]` is `λ_ij` for the `a`-th
/// neighbour `j` in the communication graph's list.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub psi_mat: Matrix,
    pub psi_vec: Vector,
    pub estimate: Vector,
    pub multipliers: Vec<Vector>,
}

impl NodeState {
    /// `Ψ_i = (δ/N) I`, everything else zero.
    pub fn new(bandwidth: usize, degree: usize, delta: f64, nodes: usize) -> Self {
        Self {
            psi_mat: Matrix::identity(bandwidth, bandwidth) * (delta / nodes as f64),
            psi_vec: Vector::zeros(bandwidth),
            estimate: Vector::zeros(bandwidth),
            multipliers: vec![Vector::zeros(bandwidth); degree],
        }
    }
}

/// Forgets by `β`, then adds the node's own sample if it was taken.
pub fn drls_sense(node: &mut NodeState, y: f64, sampled: bool, noise_var: f64, row: &Vector, forgetting: f64) {
    node.psi_mat *= forgetting;
    node.psi_vec *= forgetting;
    if sampled {
        node.psi_mat.ger(1.0 / noise_var, row, row, 1.0);
        node.psi_vec.axpy(y / noise_var, row, 1.0);
    }
}

/// Closed-form primal step for one node; `node.estimate` is its previous `ŝ_i`.
///
/// `neighbor_estimates[a]` and `incoming[a]` are `ŝ_j` and `λ_ji` for the
/// `a`-th neighbour.
pub fn drls_local_update(node: &NodeState, neighbor_estimates: &[&Vector], incoming: &[&Vector], rho: f64) -> Vector {
    let k = node.psi_vec.len();
    let degree = neighbor_estimates.len();
    let mut rhs = node.psi_vec.clone();
    for a in 0..degree {
        rhs.axpy(0.5 * rho, neighbor_estimates[a], 1.0);
        rhs.axpy(0.5 * rho, &node.estimate, 1.0);
        rhs.axpy(-0.5, &node.multipliers[a], 1.0);
        rhs.axpy(0.5, incoming[a], 1.0);
    }
    let system = &node.psi_mat + Matrix::identity(k, k) * (rho * degree as f64);
    match system.clone().cholesky() {
        Some(chol) => chol.solve(&rhs),
        // only reachable for an isolated node whose Ψ has decayed to zero
        None => system.svd(true, true).solve(&rhs, 0.0).unwrap_or_else(|_| Vector::zeros(k)),
    }
}

/// `λ_ij + (ϱ/2)(ŝ_i − ŝ_j)`.
pub fn drls_multiplier_update(lambda: &Vector, s_own: &Vector, s_neighbor: &Vector, rho: f64) -> Vector {
    lambda + (s_own - s_neighbor) * (0.5 * rho)
}

/// Whole network state plus a running count of transmitted vectors.
#[derive(Debug, Clone)]
pub struct DrlsNetwork {
    comm: CommGraph,
    config: DrlsConfig,
    nodes: Vec<NodeState>,
    messages: u64,
}

impl DrlsNetwork {
    pub fn new(comm: CommGraph, bandwidth: usize, config: DrlsConfig) -> Result<Self, DistributedError> {
        config.validate()?;
        let n = comm.node_count();
        let nodes = (0..n).map(|i| NodeState::new(bandwidth, comm.neighbors(i).len(), config.delta, n)).collect();
        Ok(Self { comm, config, nodes, messages: 0 })
    }

    pub fn comm(&self) -> &CommGraph {
        &self.comm
    }

    pub fn config(&self) -> &DrlsConfig {
        &self.config
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn messages(&self) -> u64 {
        self.messages
    }

    pub fn estimates(&self) -> Vec<Vector> {
        self.nodes.iter().map(|s| s.estimate.clone()).collect()
    }

    /// `Σ_i Ψ_i` and `Σ_i ψ_i`.
    pub fn aggregate(&self) -> (Matrix, Vector) {
        let k = self.nodes[0].psi_vec.len();
        self.nodes.iter().fold((Matrix::zeros(k, k), Vector::zeros(k)), |(m, v), s| (m + &s.psi_mat, v + &s.psi_vec))
    }

    /// `max ‖ŝ_i − ŝ_j‖` over communication links (0 for a single node).
    pub fn consensus_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, list) in self.comm.neighbors.iter().enumerate() {
            for &j in list {
                worst = worst.max((&self.nodes[i].estimate - &self.nodes[j].estimate).norm());
            }
        }
        worst
    }

    /// One sensing instant followed by `K` ADMM iterations.
    ///
    /// `y` holds every node's sample (ignored where `sampled[i]` is false).
    pub fn round(&mut self, y: &Vector, sampled: &[bool], noise: &NoiseModel, band: &Bandlimit) -> Result<(), DistributedError> {
        let n = self.comm.node_count();
        for found in [y.len(), sampled.len(), noise.len(), band.node_count()] {
            if found != n {
                return Err(DistributedError::DimensionMismatch { expected: n, found });
            }
        }
        if band.bandwidth() != self.nodes[0].psi_vec.len() {
            return Err(DistributedError::DimensionMismatch {
                expected: self.nodes[0].psi_vec.len(),
                found: band.bandwidth(),
            });
        }
        for (i, node) in self.nodes.iter_mut().enumerate() {
            drls_sense(node, y[i], sampled[i], noise.variances()[i], &band.row(i), self.config.forgetting);
        }
        let rho = self.config.rho;
        for _ in 0..self.config.inner_iters {
            let fresh: Vec<Vector> = (0..n)
                .map(|i| {
                    let list = &self.comm.neighbors[i];
                    let estimates: Vec<&Vector> = list.iter().map(|&j| &self.nodes[j].estimate).collect();
                    let incoming: Vec<&Vector> = list
                        .iter()
                        .zip(&self.comm.reverse[i])
                        .map(|(&j, &back)| &self.nodes[j].multipliers[back])
                        .collect();
                    drls_local_update(&self.nodes[i], &estimates, &incoming, rho)
                })
                .collect();
            for (node, estimate) in self.nodes.iter_mut().zip(fresh) {
                node.estimate = estimate;
            }
            let updated: Vec<Vec<Vector>> = (0..n)
                .map(|i| {
                    let own = &self.nodes[i].estimate;
                    self.comm.neighbors[i]
                        .iter()
                        .zip(&self.nodes[i].multipliers)
                        .map(|(&j, lambda)| drls_multiplier_update(lambda, own, &self.nodes[j].estimate, rho))
                        .collect()
                })
                .collect();
            for (node, multipliers) in self.nodes.iter_mut().zip(updated) {
                node.multipliers = multipliers;
            }
        }
        self.messages += 2 * self.comm.edge_count() as u64 * self.config.inner_iters as u64;
        Ok(())
    }
}

/// Squared errors `‖U_F ŝ_i[n] − x°‖²` for one trial, indexed `[node][n]`
/// with `n = 0..horizon` counting observations absorbed so far.
#[derive(Debug, Clone)]
pub struct DrlsRun {
    pub per_node: Vec<Vec<f64>>,
    pub network: DrlsNetwork,
}

impl DrlsRun {
    /// Average over nodes at each instant.
    pub fn network_curve(&self) -> Vec<f64> {
        let len = self.per_node.first().map_or(0, Vec::len);
        let nodes = self.per_node.len() as f64;
        (0..len).map(|t| self.per_node.iter().map(|c| c[t]).sum::<f64>() / nodes).collect()
    }
}

/// Runs DRLS for `horizon` curve points on a fixed bandlimited signal `x_true`.
#[allow(clippy::too_many_arguments)]
pub fn drls_run<R: Rng + ?Sized>(
    comm: &CommGraph,
    band: &Bandlimit,
    noise: &NoiseModel,
    probs: &SamplingProbabilities,
    config: &DrlsConfig,
    horizon: usize,
    x_true: &Vector,
    rng: &mut R,
) -> Result<DrlsRun, DistributedError> {
    let n = comm.node_count();
    for found in [band.node_count(), noise.len(), probs.len(), x_true.len()] {
        if found != n {
            return Err(DistributedError::DimensionMismatch { expected: n, found });
        }
    }
    let mut network = DrlsNetwork::new(comm.clone(), band.bandwidth(), config.clone())?;
    let mut per_node = vec![Vec::with_capacity(horizon); n];
    for step in 0..horizon {
        if step > 0 {
            let draw = draw_sampling_set(probs, rng);
            let y = observe(x_true, &draw, noise, rng);
            network.round(&y, draw.mask(), noise, band)?;
        }
        for (curve, node) in per_node.iter_mut().zip(&network.nodes) {
            curve.push((band.basis() * &node.estimate - x_true).norm_squared());
        }
    }
    Ok(DrlsRun { per_node, network })
}
