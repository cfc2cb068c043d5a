//! Weighted undirected graphs.
//!
//! A [`Graph`] owns a dense symmetric weight matrix with a zero diagonal.
//! The combinatorial Laplacian is `L = diag(A·1) − A`.
//!
//! Graphs can be read from and written to a plain edge-list format: one
//! edge per line as `i j w` (0-based, whitespace separated). Lines starting
//! with `#` are comments, except for an optional `# nodes <n>` header that
//! declares the node count so isolated trailing nodes survive a round trip.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::Matrix;

const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("weight matrix is not square: {rows} x {cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("graph must have at least one node")]
    Empty,

    #[error("weights are not symmetric: a[{i}][{j}] = {a_ij} but a[{j}][{i}] = {a_ji}")]
    Asymmetric { i: usize, j: usize, a_ij: f64, a_ji: f64 },

    #[error("invalid weight {weight} on ({i}, {j}): weights must be finite and nonnegative")]
    InvalidWeight { i: usize, j: usize, weight: f64 },

    #[error("self-loop on node {0}: the diagonal must be zero")]
    SelfLoop(usize),

    #[error("node index {index} out of range for a graph with {nodes} nodes")]
    IndexOutOfRange { index: usize, nodes: usize },

    #[error("random geometric graph needs n >= 2 and radius in (0, sqrt(2)], got n = {n}, radius = {radius}")]
    InvalidGeometry { n: usize, radius: f64 },

    #[error("graph is disconnected ({components} components)")]
    Disconnected { graph: Box<Graph>, components: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("conflicting weights for edge ({i}, {j}): {first} vs {second}")]
    ConflictingEdge { i: usize, j: usize, first: f64, second: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Undirected weighted graph backed by a dense adjacency matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    weights: Matrix,
}

impl Graph {
    /// Builds a graph from a weight matrix, validating symmetry,
    /// nonnegativity and the zero diagonal.
    pub fn new(weights: Matrix) -> Result<Self, GraphError> {
        let (rows, cols) = weights.shape();
        if rows != cols {
            return Err(GraphError::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(GraphError::Empty);
        }
        for i in 0..rows {
            if weights[(i, i)] != 0.0 {
                return Err(GraphError::SelfLoop(i));
            }
            for j in 0..rows {
                let w = weights[(i, j)];
                if !w.is_finite() || w < 0.0 {
                    return Err(GraphError::InvalidWeight { i, j, weight: w });
                }
                if j > i && (w - weights[(j, i)]).abs() > SYMMETRY_TOL {
                    return Err(GraphError::Asymmetric { i, j, a_ij: w, a_ji: weights[(j, i)] });
                }
            }
        }
        Ok(Self { weights })
    }

    /// Builds a graph on `n` nodes from `(i, j, w)` triples. Each edge is
    /// stored in both directions.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self, GraphError> {
        let mut weights = Matrix::zeros(n, n);
        for &(i, j, w) in edges {
            insert_edge(&mut weights, i, j, w)?;
        }
        Self::new(weights)
    }

    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Result<Self, GraphError> {
        Self::new(Matrix::zeros(n, n))
    }

    /// Path graph `0 - 1 - ... - (n-1)` with unit weights.
    pub fn path(n: usize) -> Result<Self, GraphError> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i, 1.0)).collect();
        Self::from_edges(n, &edges)
    }

    /// Cycle graph with unit weights.
    pub fn cycle(n: usize) -> Result<Self, GraphError> {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
        Self::from_edges(n, &edges)
    }

    /// Complete graph with unit weights.
    pub fn complete(n: usize) -> Result<Self, GraphError> {
        let mut weights = Matrix::from_element(n, n, 1.0);
        weights.fill_diagonal(0.0);
        Self::new(weights)
    }

    pub fn node_count(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    /// Edges `(i, j, w)` with `i < j` and `w > 0`, in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.node_count();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = self.weights[(i, j)];
                if w > 0.0 {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    /// Neighbor lists (nodes joined by a positive weight), sorted ascending.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        (0..n)
            .map(|i| (0..n).filter(|&j| self.weights[(i, j)] > 0.0).collect())
            .collect()
    }

    /// Combinatorial Laplacian `diag(A·1) − A`.
    pub fn laplacian(&self) -> Matrix {
        let mut lap = -self.weights.clone();
        for i in 0..self.node_count() {
            lap[(i, i)] = self.weights.row(i).sum();
        }
        lap
    }

    /// Number of connected components.
    pub fn component_count(&self) -> usize {
        let n = self.node_count();
        let adjacency = self.neighbors();
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
                for &u in &adjacency[v] {
                    if !seen[u] {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
        }
        components
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() == 1
    }
}

fn insert_edge(weights: &mut Matrix, i: usize, j: usize, w: f64) -> Result<(), GraphError> {
    let n = weights.nrows();
    for index in [i, j] {
        if index >= n {
            return Err(GraphError::IndexOutOfRange { index, nodes: n });
        }
    }
    if i == j {
        return Err(GraphError::SelfLoop(i));
    }
    if !w.is_finite() || w < 0.0 {
        return Err(GraphError::InvalidWeight { i, j, weight: w });
    }
    let existing = weights[(i, j)];
    if existing != 0.0 && existing != w {
        return Err(GraphError::ConflictingEdge { i, j, first: existing, second: w });
    }
    weights[(i, j)] = w;
    weights[(j, i)] = w;
    Ok(())
}

/// Random geometric graph: `n` points uniform on the unit square, unit
/// edges between points at Euclidean distance at most `radius`.
///
/// A disconnected draw is returned as [`GraphError::Disconnected`], which
/// carries the graph so callers may still use it.
pub fn random_geometric_graph(n: usize, radius: f64, seed: u64) -> Result<Graph, GraphError> {
    if n < 2 || !(radius > 0.0 && radius <= std::f64::consts::SQRT_2) {
        return Err(GraphError::InvalidGeometry { n, radius });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<(f64, f64)> = (0..n).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
    let mut weights = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let (dx, dy) = (points[i].0 - points[j].0, points[i].1 - points[j].1);
            if (dx * dx + dy * dy).sqrt() <= radius {
                weights[(i, j)] = 1.0;
                weights[(j, i)] = 1.0;
            }
        }
    }
    let graph = Graph::new(weights)?;
    let components = graph.component_count();
    if components > 1 {
        return Err(GraphError::Disconnected { graph: Box::new(graph), components });
    }
    Ok(graph)
}

/// Draws random geometric graphs with seeds `seed, seed + 1, ...` until a
/// connected one appears, giving up after `max_attempts` draws.
pub fn connected_random_geometric_graph(
    n: usize,
    radius: f64,
    seed: u64,
    max_attempts: usize,
) -> Result<Graph, GraphError> {
    let mut last = None;
    for attempt in 0..max_attempts.max(1) {
        match random_geometric_graph(n, radius, seed.wrapping_add(attempt as u64)) {
            Ok(graph) => return Ok(graph),
            Err(err @ GraphError::Disconnected { .. }) => last = Some(err),
            Err(err) => return Err(err),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Parses the edge-list text format. `nodes` overrides any `# nodes`
/// header; without either, the node count is one past the largest index.
pub fn parse_edge_list(text: &str, nodes: Option<usize>) -> Result<Graph, GraphError> {
    let mut header_nodes = None;
    let mut triples = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let mut parts = comment.split_whitespace();
            if parts.next() == Some("nodes") {
                let value = parts.next().ok_or_else(|| GraphError::Parse {
                    line: line_no,
                    message: "missing node count after '# nodes'".into(),
                })?;
                header_nodes = Some(value.parse::<usize>().map_err(|e| GraphError::Parse {
                    line: line_no,
                    message: format!("bad node count {value:?}: {e}"),
                })?);
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(GraphError::Parse {
                line: line_no,
                message: format!("expected 'i j w', found {} fields", fields.len()),
            });
        }
        let parse_index = |s: &str| {
            s.parse::<usize>().map_err(|e| GraphError::Parse {
                line: line_no,
                message: format!("bad node index {s:?}: {e}"),
            })
        };
        let i = parse_index(fields[0])?;
        let j = parse_index(fields[1])?;
        let w = fields[2].parse::<f64>().map_err(|e| GraphError::Parse {
            line: line_no,
            message: format!("bad weight {:?}: {e}", fields[2]),
        })?;
        triples.push((line_no, i, j, w));
    }

    let n = match nodes.or(header_nodes) {
        Some(n) => n,
        None => triples.iter().map(|&(_, i, j, _)| i.max(j) + 1).max().unwrap_or(0),
    };
    let mut weights = Matrix::zeros(n, n);
    for (line_no, i, j, w) in triples {
        insert_edge(&mut weights, i, j, w).map_err(|err| match err {
            GraphError::IndexOutOfRange { .. } | GraphError::ConflictingEdge { .. } => err,
            other => GraphError::Parse { line: line_no, message: other.to_string() },
        })?;
    }
    Graph::new(weights)
}

/// Renders a graph in the edge-list format, including the `# nodes` header.
/// Weights use the shortest round-trip float representation.
pub fn format_edge_list(graph: &Graph) -> String {
    let mut out = format!("# nodes {}\n", graph.node_count());
    for (i, j, w) in graph.edges() {
        writeln!(out, "{i} {j} {w}").expect("writing to a String");
    }
    out
}

pub fn load_edge_list(path: impl AsRef<Path>, nodes: Option<usize>) -> Result<Graph, GraphError> {
    let text = std::fs::read_to_string(path)?;
    parse_edge_list(&text, nodes)
}

pub fn save_edge_list(graph: &Graph, path: impl AsRef<Path>) -> Result<(), GraphError> {
    std::fs::write(path, format_edge_list(graph))?;
    Ok(())
}
