//! Config-driven Monte-Carlo harness.
//!
//! An [`ExperimentConfig`] is turned into a [`Setup`] (graph, band, noise),
//! then into sampling probabilities, and finally into learning curves,
//! theory reports or strategy comparisons. Everything is written as CSV by
//! the [`output`] helpers.

mod compare;
pub mod config;
mod monte_carlo;
pub mod output;

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::design::{
    dinkelbach_min_msd, sca_min_msd, sca_min_rate, solve_min_rate_convex, solve_rls_design, Design, DesignError,
    DesignSpec, ScaOptions,
};
use crate::distributed::{CommGraph, DistributedError};
use crate::filters::FilterError;
use crate::graph::{connected_random_geometric_graph, load_edge_list, Graph, GraphError};
use crate::sampling::{
    leverage_order, max_det_greedy, uniform_random_set, NoiseModel, SamplingError, SamplingProbabilities,
};
use crate::spectral::{eigendecompose, Bandlimit, SpectralError};
use crate::from_db;

pub use compare::{compare_sampling, CompareRow, Strategy};
pub use config::{ExperimentConfig, GraphSource, SamplingSource, Solver};
pub use monte_carlo::{fit_rate, run_experiment, steady_state, Algorithm, LearningCurve, RunOutput};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("invalid `{field}`: {message}")]
    Invalid { field: String, message: String },

    #[error(transparent)]
    Graph(#[from] GraphError),

    #[error(transparent)]
    Spectral(#[from] SpectralError),

    #[error(transparent)]
    Sampling(#[from] SamplingError),

    #[error(transparent)]
    Filter(#[from] FilterError),

    #[error("design failed: {0}")]
    Design(#[from] DesignError),

    #[error(transparent)]
    Distributed(#[from] DistributedError),
}

/// Resolved problem data shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Setup {
    pub graph: Graph,
    pub band: Bandlimit,
    pub noise: NoiseModel,
}

impl Setup {
    pub fn build(config: &ExperimentConfig) -> Result<Self, ExperimentError> {
        let graph = build_graph(config, &config.graph)?;
        let n = graph.node_count();
        let basis = eigendecompose(&graph.laplacian())?;
        let band = match (&config.band.bandwidth, &config.band.frequencies) {
            (Some(k), _) => basis.lowest(*k),
            (None, Some(set)) => Bandlimit::new(&basis, set.clone()),
            (None, None) => unreachable!("validated"),
        }
        .map_err(|e| ExperimentError::Invalid { field: "band".into(), message: e.to_string() })?;
        let noise = match (&config.noise.variance, &config.noise.variances) {
            (Some(v), _) => NoiseModel::white(n, *v)?,
            (None, Some(vs)) if vs.len() == n => NoiseModel::new(vs.clone())?,
            (None, Some(vs)) => {
                return Err(ExperimentError::Invalid {
                    field: "noise.variances".into(),
                    message: format!("{} entries for a graph with {n} nodes", vs.len()),
                })
            }
            (None, None) => unreachable!("validated"),
        };
        Ok(Self { graph, band, noise })
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    /// Communication graph for DRLS: `drls.comm` or the processing graph.
    pub fn comm_graph(&self, config: &ExperimentConfig) -> Result<CommGraph, ExperimentError> {
        let graph = match &config.drls.comm {
            Some(source) => build_graph(config, source)?,
            None => self.graph.clone(),
        };
        if graph.node_count() != self.node_count() {
            return Err(ExperimentError::Invalid {
                field: "drls.comm".into(),
                message: format!("{} nodes but the processing graph has {}", graph.node_count(), self.node_count()),
            });
        }
        Ok(CommGraph::from_graph(&graph)?)
    }

    /// Design inputs: step from `[lms]`, forgetting from `[rls]`.
    pub fn design_spec(&self, config: &ExperimentConfig) -> DesignSpec {
        let mut spec = DesignSpec::new(self.band.clone(), self.noise.clone());
        spec.step = config.lms.step;
        spec.forgetting = config.rls.forgetting;
        spec
    }
}

pub fn build_graph(config: &ExperimentConfig, source: &GraphSource) -> Result<Graph, ExperimentError> {
    Ok(match source {
        GraphSource::RandomGeometric { nodes, radius, seed, max_attempts } => {
            connected_random_geometric_graph(*nodes, *radius, seed.unwrap_or(config.seed), *max_attempts)?
        }
        GraphSource::EdgeList { path, nodes } => load_edge_list(config.resolve(path), *nodes)?,
        GraphSource::Path { nodes } => Graph::path(*nodes)?,
        GraphSource::Cycle { nodes } => Graph::cycle(*nodes)?,
        GraphSource::Complete { nodes } => Graph::complete(*nodes)?,
    })
}

/// Runs the configured design solver.
pub fn run_design(setup: &Setup, config: &ExperimentConfig) -> Result<Design, ExperimentError> {
    let SamplingSource::Design(params) = &config.sampling else {
        return Err(ExperimentError::Invalid {
            field: "sampling.kind".into(),
            message: "the design subcommand needs kind = \"design\"".into(),
        });
    };
    let n = setup.node_count();
    let mut spec = setup.design_spec(config);
    if let Some(a) = params.rate_target {
        spec.rate_target = a;
    }
    if let Some(db) = params.msd_target_db {
        spec.msd_target = from_db(db);
    }
    if let Some(b) = params.budget {
        spec.budget = b;
    }
    if let Some(bounds) = &params.bounds {
        if bounds.len() != n {
            return Err(ExperimentError::Invalid {
                field: "sampling.bounds".into(),
                message: format!("{} entries for a graph with {n} nodes", bounds.len()),
            });
        }
        spec.bounds = bounds.clone();
    }
    let options = ScaOptions::default();
    Ok(match params.solver {
        Solver::MinRateConvex => solve_min_rate_convex(&spec)?,
        Solver::ScaMinRate => sca_min_rate(&spec, &options)?,
        Solver::Dinkelbach => dinkelbach_min_msd(&spec)?,
        Solver::ScaMinMsd => sca_min_msd(&spec, &options)?,
        Solver::Rls => solve_rls_design(&spec)?,
    })
}

/// Sampling probabilities for a run, plus the design when one was solved.
pub fn resolve_sampling(
    setup: &Setup,
    config: &ExperimentConfig,
) -> Result<(SamplingProbabilities, Option<Design>), ExperimentError> {
    let n = setup.node_count();
    let check_count = |count: usize| {
        if count == 0 || count > n {
            Err(ExperimentError::Invalid {
                field: "sampling.count".into(),
                message: format!("must lie in 1..={n}, got {count}"),
            })
        } else {
            Ok(count)
        }
    };
    let probs = match &config.sampling {
        SamplingSource::Full => SamplingProbabilities::full(n),
        SamplingSource::Explicit { probs } => {
            if probs.len() != n {
                return Err(ExperimentError::Invalid {
                    field: "sampling.probs".into(),
                    message: format!("{} entries for a graph with {n} nodes", probs.len()),
                });
            }
            SamplingProbabilities::unbounded(probs.clone())?
        }
        SamplingSource::Design(_) => {
            let design = run_design(setup, config)?;
            return Ok((design.probs.clone(), Some(design)));
        }
        SamplingSource::MaxDet { count } => {
            SamplingProbabilities::from_set(n, &max_det_greedy(&setup.band, check_count(*count)?)?)?
        }
        SamplingSource::Leverage { count } => {
            let order = leverage_order(&setup.band);
            SamplingProbabilities::from_set(n, &order[..check_count(*count)?])?
        }
        SamplingSource::Uniform { count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            SamplingProbabilities::from_set(n, &uniform_random_set(n, check_count(*count)?, &mut rng)?)?
        }
    };
    Ok((probs, None))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(extra: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml(&format!(
            "seed = 3\n[graph]\nkind = \"random_geometric\"\nnodes = 12\nradius = 0.5\n[band]\nbandwidth = 3\n[noise]\nvariance = 0.01\n{extra}"
        ))
        .unwrap()
    }

    #[test]
    fn setup_shapes() {
        let setup = Setup::build(&config("")).unwrap();
        assert_eq!(setup.node_count(), 12);
        assert!(setup.graph.is_connected());
        assert_eq!(setup.band.bandwidth(), 3);
        assert_eq!(setup.band.freq_set(), &[0, 1, 2]);
    }

    #[test]
    fn variance_count_is_checked() {
        let mut c = config("");
        c.noise.variance = None;
        c.noise.variances = Some(vec![0.1; 5]);
        match Setup::build(&c) {
            Err(ExperimentError::Invalid { field, .. }) => assert_eq!(field, "noise.variances"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn baseline_sources_sample_with_probability_one() {
        for kind in ["max_det", "leverage", "uniform"] {
            let c = config(&format!("[sampling]\nkind = \"{kind}\"\ncount = 4\n"));
            let setup = Setup::build(&c).unwrap();
            let (p, design) = resolve_sampling(&setup, &c).unwrap();
            assert!(design.is_none());
            assert_eq!(p.expected_count(), 4.0);
            assert!(p.probs().iter().all(|&x| x == 0.0 || x == 1.0));
        }
        let c = config("[sampling]\nkind = \"leverage\"\ncount = 40\n");
        assert!(resolve_sampling(&Setup::build(&c).unwrap(), &c).is_err());
    }

    #[test]
    fn design_source_runs_solver() {
        let c = config("[sampling]\nkind = \"design\"\nsolver = \"min_rate_convex\"\nrate_target = 0.99\n");
        let setup = Setup::build(&c).unwrap();
        let (p, design) = resolve_sampling(&setup, &c).unwrap();
        assert!(design.is_some());
        let lambda = crate::sampling::reconstructability_lambda(p.probs(), &setup.band);
        assert!(lambda >= (1.0 - 0.99) / (2.0 * 0.1) * (1.0 - 1e-6));
    }
}
