//! Adaptive learning of bandlimited graph signals.
//!
//! The crate is organised bottom-up:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`graph`] | weighted undirected graphs, Laplacian, random geometric graphs, edge-list I/O |
//! | [`spectral`] | Laplacian eigenbasis, graph Fourier transform, band/vertex projectors |
//! | [`sampling`] | Bernoulli vertex sampling, noisy observations, reconstructability, baseline strategies |
//! | [`filters`] | LMS and RLS estimators on graphs and their closed-form mean-square theory |
//! | [`design`] | solvers that choose per-node sampling probabilities |
//! | [`distributed`] | simulated ADMM-based distributed RLS |
//! | [`experiment`] | config-driven Monte-Carlo harness and CSV output |
//!
//! Everything is real-valued; signals live on undirected graphs so the
//! Laplacian eigenvectors are real.

pub mod design;
pub mod distributed;
pub mod experiment;
pub mod filters;
pub mod graph;
pub(crate) mod linalg;
pub mod sampling;
pub mod spectral;

pub use graph::Graph;
pub use sampling::{NoiseModel, SamplingDraw, SamplingProbabilities};
pub use spectral::{Bandlimit, SpectralBasis};

/// Dense column vector used throughout the crate.
pub type Vector = nalgebra::DVector<f64>;
/// Dense matrix used throughout the crate.
pub type Matrix = nalgebra::DMatrix<f64>;

/// Converts a linear quantity to decibels, `10·log10(x)`.
pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Converts decibels back to a linear quantity.
pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
