//! Experiment configuration documents.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use pmallows::pseudo::DEFAULT_ALPHA_GRID;
use pmallows::{Alpha, Ranking};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    FullTiming,
    ClickingAccuracy,
    OrderingEnum,
    SigmaStudy,
    GBias,
    AlphaRoundtrip,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::FullTiming => "full-timing",
            Self::ClickingAccuracy => "clicking-accuracy",
            Self::OrderingEnum => "ordering-enum",
            Self::SigmaStudy => "sigma-study",
            Self::GBias => "g-bias",
            Self::AlphaRoundtrip => "alpha-roundtrip",
        }
    }
}

/// The true consensus used to simulate data.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rho0Spec {
    #[default]
    Identity,
    /// A uniformly random permutation per replicate.
    Random,
    Given(Vec<usize>),
}

impl Rho0Spec {
    pub fn resolve<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Ranking, ConfigError> {
        match self {
            Self::Identity => Ok(Ranking::identity(n)),
            Self::Random => {
                let mut v: Vec<usize> = (1..=n).collect();
                v.shuffle(rng);
                Ok(Ranking::new(v).expect("shuffled identity"))
            }
            Self::Given(v) => {
                if v.len() != n {
                    return Err(ConfigError::Invalid(format!("rho0 has {} entries, n is {n}", v.len())));
                }
                Ranking::new(v.clone()).map_err(|e| ConfigError::Invalid(format!("rho0: {e}")))
            }
        }
    }
}

fn one() -> usize {
    1
}
fn three() -> usize {
    3
}
fn five() -> f64 {
    5.0
}
fn two_hundred() -> usize {
    200
}
fn three_hundred() -> usize {
    300
}
fn warm_up() -> usize {
    pmallows::clicking::DEFAULT_WARM_UP
}
fn burn_in_fraction() -> f64 {
    0.2
}
fn reference_iterations() -> usize {
    50_000
}

/// A single experiment. Fields unused by an experiment kind are ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n: usize,
    /// Users per simulated dataset.
    pub n_users: usize,
    pub alpha0: f64,
    #[serde(default)]
    pub rho0: Rho0Spec,
    pub seed: u64,
    #[serde(default = "one")]
    pub replicates: usize,
    /// Scale grid; empty means the default grid.
    #[serde(default)]
    pub alpha_grid: Vec<f64>,
    /// Perturbation grid for the sigma study; empty means `[0, 0.5, 1, 2, 3]`.
    #[serde(default)]
    pub sigma_grid: Vec<f64>,
    /// Perturbation used by the Pseudo-Mallows runs.
    #[serde(default)]
    pub sigma: f64,
    /// Pseudo-Mallows sample budgets, paired with `mcmc_iterations`.
    #[serde(default)]
    pub pm_samples: Vec<usize>,
    #[serde(default)]
    pub mcmc_iterations: Vec<usize>,
    #[serde(default = "burn_in_fraction")]
    pub burn_in_fraction: f64,
    /// Recommendations per user.
    #[serde(default = "three")]
    pub k: usize,
    /// Mean of the truncated Poisson click counts.
    #[serde(default = "five")]
    pub lambda: f64,
    /// Samples per evaluation in the sigma study and g-bias runs.
    #[serde(default = "two_hundred")]
    pub draws: usize,
    #[serde(default = "three_hundred")]
    pub sim_users: usize,
    #[serde(default = "warm_up")]
    pub warm_up: usize,
    /// Chain length for reference marginals when enumeration is infeasible.
    #[serde(default = "reference_iterations")]
    pub reference_iterations: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] pmallows::Error),
}

impl ExperimentConfig {
    /// A configuration with every optional field at its default.
    pub fn new(kind: ExperimentKind, n: usize, n_users: usize, alpha0: f64, seed: u64) -> Self {
        Self {
            kind,
            n,
            n_users,
            alpha0,
            rho0: Rho0Spec::Identity,
            seed,
            replicates: 1,
            alpha_grid: Vec::new(),
            sigma_grid: Vec::new(),
            sigma: 0.0,
            pm_samples: Vec::new(),
            mcmc_iterations: Vec::new(),
            burn_in_fraction: burn_in_fraction(),
            k: 3,
            lambda: 5.0,
            draws: 200,
            sim_users: 300,
            warm_up: warm_up(),
            reference_iterations: reference_iterations(),
            output_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        let cfg = Self::from_json(&text).map_err(|source| ConfigError::Parse {
            path: path.to_owned(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn alpha0(&self) -> Result<Alpha, ConfigError> {
        Ok(Alpha::new(self.alpha0)?.require_positive()?)
    }

    pub fn alpha_grid(&self) -> Result<Vec<Alpha>, ConfigError> {
        let values: &[f64] = if self.alpha_grid.is_empty() {
            &DEFAULT_ALPHA_GRID
        } else {
            &self.alpha_grid
        };
        values
            .iter()
            .map(|&a| Ok(Alpha::new(a)?.require_positive()?))
            .collect()
    }

    pub fn sigma_grid(&self) -> Vec<f64> {
        if self.sigma_grid.is_empty() {
            vec![0.0, 0.5, 1.0, 2.0, 3.0]
        } else {
            self.sigma_grid.clone()
        }
    }

    /// `(pm_samples[i], mcmc_iterations[i])` pairs.
    pub fn schedule(&self) -> Vec<(usize, usize)> {
        self.pm_samples
            .iter()
            .copied()
            .zip(self.mcmc_iterations.iter().copied())
            .collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if self.n == 0 || self.n_users == 0 || self.replicates == 0 {
            return invalid("n, n_users and replicates must be positive".into());
        }
        self.alpha0()?;
        let grid = self.alpha_grid()?;
        if grid.windows(2).any(|w| w[0].value() >= w[1].value()) {
            return invalid("alpha_grid must be strictly ascending".into());
        }
        if self.sigma_grid().iter().any(|s| !(*s >= 0.0) || !s.is_finite()) || !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return invalid("sigma values must be finite and nonnegative".into());
        }
        if self.draws == 0 || self.sim_users < 2 || self.k == 0 || self.reference_iterations == 0 {
            return invalid("draws, k and reference_iterations must be positive and sim_users at least 2".into());
        }
        if !(0.0..1.0).contains(&self.burn_in_fraction) {
            return invalid("burn_in_fraction must lie in [0, 1)".into());
        }
        match self.kind {
            ExperimentKind::FullTiming | ExperimentKind::ClickingAccuracy => {
                if self.pm_samples.is_empty() || self.pm_samples.len() != self.mcmc_iterations.len() {
                    return invalid("pm_samples and mcmc_iterations must be nonempty and of equal length".into());
                }
                if self.pm_samples.iter().chain(&self.mcmc_iterations).any(|&v| v == 0) {
                    return invalid("schedule entries must be positive".into());
                }
                if self.mcmc_iterations.iter().any(|&it| (it as f64 * self.burn_in_fraction) as usize >= it) {
                    return invalid("burn-in leaves no MCMC samples".into());
                }
            }
            ExperimentKind::OrderingEnum => {
                if self.n > pmallows::variational::MAX_STUDY_EXACT_N {
                    return invalid(format!(
                        "ordering enumeration supports n <= {}",
                        pmallows::variational::MAX_STUDY_EXACT_N
                    ));
                }
            }
            ExperimentKind::SigmaStudy | ExperimentKind::GBias | ExperimentKind::AlphaRoundtrip => {}
        }
        if matches!(self.kind, ExperimentKind::ClickingAccuracy | ExperimentKind::AlphaRoundtrip) {
            if self.n < 4 {
                return invalid("click simulations need n >= 4".into());
            }
            if !(self.lambda > 0.0) || !self.lambda.is_finite() {
                return invalid("lambda must be positive".into());
            }
        }
        if let Rho0Spec::Given(v) = &self.rho0 {
            if v.len() != self.n {
                return invalid(format!("rho0 has {} entries, n is {}", v.len(), self.n));
            }
            Ranking::new(v.clone())?;
        }
        Ok(())
    }
}
