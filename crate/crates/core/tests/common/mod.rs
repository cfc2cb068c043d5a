//! Independent oracles shared by the integration tests and the acceptance
//! runner. None of these call back into the code paths they check.
#![allow(dead_code)]

use adagraph::graph::connected_random_geometric_graph;
use adagraph::sampling::{NoiseModel, SamplingDraw};
use adagraph::spectral::eigendecompose;
use adagraph::{Bandlimit, Graph, Matrix, Vector};
use nalgebra::SymmetricEigen;

pub fn rgg(n: usize, radius: f64, seed: u64) -> Graph {
    connected_random_geometric_graph(n, radius, seed, 1000).unwrap()
}

pub fn lowest_band(graph: &Graph, k: usize) -> Bandlimit {
    eigendecompose(&graph.laplacian()).unwrap().lowest(k).unwrap()
}

/// Smallest eigenvalue by a fresh dense eigendecomposition.
pub fn dense_lambda_min(m: &Matrix) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

/// `Σ_i w_i u_i u_iᵀ` built row by row.
pub fn dense_gram(band: &Bandlimit, w: &[f64]) -> Matrix {
    let k = band.bandwidth();
    let mut out = Matrix::zeros(k, k);
    for (i, &wi) in w.iter().enumerate() {
        let u = band.basis().row(i).transpose();
        out += &u * u.transpose() * wi;
    }
    out
}

/// Minimiser of `Σ_l β^{n−l} Σ_i d_i[l] (y_i[l] − u_iᵀs)²/σ_i² + β^n δ ‖s‖²`
/// by SVD least squares on the stacked, square-root-weighted system.
pub fn batch_rls(
    history: &[(Vector, SamplingDraw)],
    band: &Bandlimit,
    noise: &NoiseModel,
    forgetting: f64,
    delta: f64,
) -> Vector {
    let k = band.bandwidth();
    let n = history.len() as i32;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let reg = (forgetting.powi(n) * delta).sqrt();
    for c in 0..k {
        let mut row = vec![0.0; k];
        row[c] = reg;
        rows.push(row);
        rhs.push(0.0);
    }
    for (l, (y, draw)) in history.iter().enumerate() {
        let age = n - 1 - l as i32;
        for i in 0..y.len() {
            if draw.is_sampled(i) {
                let w = (forgetting.powi(age) / noise.variances()[i]).sqrt();
                rows.push((0..k).map(|c| w * band.basis()[(i, c)]).collect());
                rhs.push(w * y[i]);
            }
        }
    }
    let a = Matrix::from_fn(rows.len(), k, |r, c| rows[r][c]);
    let b = Vector::from_vec(rhs);
    a.svd(true, true).solve(&b, 1e-300).unwrap()
}

/// Central differences of `f` at `p`, coordinate by coordinate.
pub fn finite_difference(f: impl Fn(&[f64]) -> f64, p: &[f64], h: f64) -> Vector {
    Vector::from_fn(p.len(), |i, _| {
        let mut up = p.to_vec();
        let mut down = p.to_vec();
        up[i] += h;
        down[i] -= h;
        (f(&up) - f(&down)) / (2.0 * h)
    })
}

pub fn relative_error(a: &Vector, b: &Vector) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

/// Determinant of `U_Fᵀ D_S U_F` by LU.
pub fn set_det(band: &Bandlimit, set: &[usize]) -> f64 {
    let mut w = vec![0.0; band.node_count()];
    for &i in set {
        w[i] = 1.0;
    }
    dense_gram(band, &w).determinant()
}
