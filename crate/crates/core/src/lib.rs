//! Bayesian Mallows rank models with footrule distance: exact enumeration,
//! Metropolis-Hastings baselines, and the Pseudo-Mallows variational sampler
//! for full rankings and click data.

pub mod clicking;
pub mod data;
pub mod error;
pub mod exact;
pub mod math;
pub mod mcmc;
pub mod perm;
pub mod pseudo;
pub mod rng;
pub mod summary;
pub mod variational;

pub use data::{Alpha, ClickDataset, ClickVector, RankCountMatrix, RankingDataset};
pub use error::{Error, Result};
pub use exact::DiscreteDistribution;
pub use mcmc::{ChainStart, ClickingTrace, McmcConfig, McmcTrace};
pub use perm::{footrule_distance, rank_of, Ordering, Ranking, VSet};
pub use pseudo::PseudoConfig;
pub use rng::{derive_seed, stream_rng, SeededRng};
pub use summary::{cp_consensus, SampleSet};
