//! TOML experiment configuration (format version 1).
//!
//! ```toml
//! version = 1
//! seed = 7
//! trials = 200
//! horizon = 2000
//!
//! [graph]
//! kind = "random_geometric"   # or "edge_list", "path", "cycle", "complete"
//! nodes = 20
//! radius = 0.4
//!
//! [band]
//! bandwidth = 5               # or frequencies = [0, 1, 2]
//!
//! [noise]
//! variance = 0.01             # or variances = [...]
//!
//! [sampling]
//! kind = "design"             # or "full", "explicit", "max_det", "leverage", "uniform"
//! solver = "min_rate_convex"
//! rate_target = 0.98
//! msd_target_db = -25.0
//!
//! [lms]
//! step = 0.1
//! ```
//!
//! Relative edge-list paths are resolved against the config file's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ExperimentError;

pub const CONFIG_VERSION: u32 = 1;

fn default_version() -> u32 {
    CONFIG_VERSION
}
fn default_trials() -> usize {
    200
}
fn default_horizon() -> usize {
    2000
}
fn default_attempts() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    pub graph: GraphSource,
    pub band: BandSpec,
    pub noise: NoiseSpec,
    #[serde(default)]
    pub sampling: SamplingSource,
    #[serde(default)]
    pub lms: LmsParams,
    #[serde(default)]
    pub rls: RlsParams,
    #[serde(default)]
    pub drls: DrlsParams,
    #[serde(default)]
    pub compare: CompareParams,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSource {
    /// Redraws with seeds `seed, seed + 1, ...` until connected.
    RandomGeometric {
        nodes: usize,
        radius: f64,
        /// Defaults to the experiment seed.
        seed: Option<u64>,
        #[serde(default = "default_attempts")]
        max_attempts: usize,
    },
    EdgeList {
        path: PathBuf,
        nodes: Option<usize>,
    },
    Path {
        nodes: usize,
    },
    Cycle {
        nodes: usize,
    },
    Complete {
        nodes: usize,
    },
}

/// Exactly one of `bandwidth` (lowest Laplacian frequencies) or
/// `frequencies` must be given.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandSpec {
    pub bandwidth: Option<usize>,
    pub frequencies: Option<Vec<usize>>,
}

/// Exactly one of `variance` (white) or `variances` (per node).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub variance: Option<f64>,
    pub variances: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    MinRateConvex,
    ScaMinRate,
    Dinkelbach,
    ScaMinMsd,
    Rls,
}

impl Solver {
    pub fn name(self) -> &'static str {
        match self {
            Solver::MinRateConvex => "min_rate_convex",
            Solver::ScaMinRate => "sca_min_rate",
            Solver::Dinkelbach => "dinkelbach",
            Solver::ScaMinMsd => "sca_min_msd",
            Solver::Rls => "rls",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SamplingSource {
    /// Every node sampled at every instant.
    #[default]
    Full,
    Explicit {
        probs: Vec<f64>,
    },
    Design(DesignParams),
    /// Greedy Max-Det set of `count` nodes, sampled with probability one.
    MaxDet {
        count: usize,
    },
    /// Top `count` nodes by leverage score, sampled with probability one.
    Leverage {
        count: usize,
    },
    /// `count` nodes drawn uniformly at random from the experiment seed.
    Uniform {
        count: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignParams {
    pub solver: Solver,
    pub rate_target: Option<f64>,
    pub msd_target_db: Option<f64>,
    pub budget: Option<f64>,
    pub bounds: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LmsParams {
    pub step: f64,
}

impl Default for LmsParams {
    fn default() -> Self {
        Self { step: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RlsParams {
    pub forgetting: f64,
    pub delta: f64,
}

impl Default for RlsParams {
    fn default() -> Self {
        Self { forgetting: 0.95, delta: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DrlsParams {
    pub rho: f64,
    pub inner_iters: usize,
    pub forgetting: f64,
    pub delta: f64,
    /// Communication topology; the processing graph when absent.
    pub comm: Option<GraphSource>,
}

impl Default for DrlsParams {
    fn default() -> Self {
        Self { rho: 1.0, inner_iters: 1, forgetting: 0.95, delta: 1e-3, comm: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareParams {
    /// Rate targets `ᾱ`.
    pub alphas: Vec<f64>,
    pub msd_target_db: Option<f64>,
    /// Random orderings averaged for the uniform baseline.
    pub random_permutations: usize,
    /// `min_rate_convex` or `sca_min_rate`.
    pub solver: Solver,
}

impl Default for CompareParams {
    fn default() -> Self {
        Self {
            alphas: vec![0.95, 0.96, 0.97, 0.98, 0.99],
            msd_target_db: None,
            random_permutations: 200,
            solver: Solver::MinRateConvex,
        }
    }
}

fn invalid(field: &str, message: impl Into<String>) -> ExperimentError {
    ExperimentError::Invalid { field: field.to_string(), message: message.into() }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let config: Self = toml::from_str(text).map_err(|e| ExperimentError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ExperimentError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| ExperimentError::Io { path: path.to_path_buf(), source })?;
        let mut config = Self::from_toml(&text)?;
        config.base_dir = path.parent().map(Path::to_path_buf);
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub(crate) fn resolve(&self, path: &Path) -> PathBuf {
        match &self.base_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }

    /// Range checks that do not need the graph.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.version != CONFIG_VERSION {
            return Err(invalid("version", format!("unsupported config version {} (expected {CONFIG_VERSION})", self.version)));
        }
        if self.trials == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        if self.horizon == 0 {
            return Err(invalid("horizon", "must be at least 1"));
        }
        validate_graph("graph", &self.graph)?;
        match (&self.band.bandwidth, &self.band.frequencies) {
            (Some(0), None) => return Err(invalid("band.bandwidth", "must be at least 1")),
            (Some(_), None) | (None, Some(_)) => {}
            _ => return Err(invalid("band", "give exactly one of `bandwidth` or `frequencies`")),
        }
        match (&self.noise.variance, &self.noise.variances) {
            (Some(v), None) if !(*v > 0.0 && v.is_finite()) => {
                return Err(invalid("noise.variance", format!("must be positive, got {v}")))
            }
            (Some(_), None) => {}
            (None, Some(vs)) => {
                if let Some(v) = vs.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                    return Err(invalid("noise.variances", format!("must be positive, got {v}")));
                }
            }
            _ => return Err(invalid("noise", "give exactly one of `variance` or `variances`")),
        }
        if let SamplingSource::Explicit { probs } = &self.sampling {
            if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(invalid("sampling.probs", format!("probability {p} outside [0, 1]")));
            }
        }
        if let SamplingSource::Design(d) = &self.sampling {
            if let Some(a) = d.rate_target.filter(|a| !(*a > 0.0 && *a < 1.0)) {
                return Err(invalid("sampling.rate_target", format!("must lie in (0, 1), got {a}")));
            }
            if d.solver == Solver::Rls && d.msd_target_db.is_none() {
                return Err(invalid("sampling.msd_target_db", "required by the rls solver"));
            }
            if matches!(d.solver, Solver::Dinkelbach | Solver::ScaMinMsd) && d.budget.is_none() {
                return Err(invalid("sampling.budget", format!("required by the {} solver", d.solver.name())));
            }
        }
        if !(self.lms.step >= 0.0 && self.lms.step.is_finite()) {
            return Err(invalid("lms.step", format!("must be nonnegative, got {}", self.lms.step)));
        }
        for (field, beta) in [("rls.forgetting", self.rls.forgetting), ("drls.forgetting", self.drls.forgetting)] {
            if !(beta > 0.0 && beta <= 1.0) {
                return Err(invalid(field, format!("must lie in (0, 1], got {beta}")));
            }
        }
        for (field, delta) in [("rls.delta", self.rls.delta), ("drls.delta", self.drls.delta)] {
            if !(delta > 0.0 && delta.is_finite()) {
                return Err(invalid(field, format!("must be positive, got {delta}")));
            }
        }
        if !(self.drls.rho > 0.0 && self.drls.rho.is_finite()) {
            return Err(invalid("drls.rho", format!("must be positive, got {}", self.drls.rho)));
        }
        if self.drls.inner_iters == 0 {
            return Err(invalid("drls.inner_iters", "must be at least 1"));
        }
        if let Some(comm) = &self.drls.comm {
            validate_graph("drls.comm", comm)?;
        }
        if self.compare.alphas.is_empty() {
            return Err(invalid("compare.alphas", "must not be empty"));
        }
        if let Some(a) = self.compare.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(invalid("compare.alphas", format!("rate target {a} outside (0, 1)")));
        }
        if self.compare.random_permutations == 0 {
            return Err(invalid("compare.random_permutations", "must be at least 1"));
        }
        if !matches!(self.compare.solver, Solver::MinRateConvex | Solver::ScaMinRate) {
            return Err(invalid("compare.solver", "must be min_rate_convex or sca_min_rate"));
        }
        Ok(())
    }
}

fn validate_graph(field: &str, source: &GraphSource) -> Result<(), ExperimentError> {
    let nodes = match source {
        GraphSource::RandomGeometric { nodes, radius, .. } => {
            if !(*radius > 0.0 && *radius <= std::f64::consts::SQRT_2) {
                return Err(invalid(&format!("{field}.radius"), format!("must lie in (0, sqrt 2], got {radius}")));
            }
            *nodes
        }
        GraphSource::EdgeList { .. } => return Ok(()),
        GraphSource::Path { nodes } | GraphSource::Cycle { nodes } | GraphSource::Complete { nodes } => *nodes,
    };
    if nodes < 2 {
        return Err(invalid(&format!("{field}.nodes"), format!("need at least 2 nodes, got {nodes}")));
    }
    Ok(())
}
