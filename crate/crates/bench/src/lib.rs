//! Fixtures shared by the benchmarks.

use pmallows::mcmc::simulate_dataset;
use pmallows::{stream_rng, Alpha, Ranking, RankingDataset};
use rand::seq::SliceRandom;

/// Dataset of `users` Mallows draws around a random consensus of `n` items.
pub fn fixture(n: usize, users: usize, alpha: f64, seed: u64) -> RankingDataset {
    let mut rng = stream_rng(seed, &[n as u64]);
    let mut v: Vec<usize> = (1..=n).collect();
    v.shuffle(&mut rng);
    let rho0 = Ranking::new(v).unwrap();
    simulate_dataset(&rho0, Alpha::new(alpha).unwrap(), users, &mut rng).unwrap()
}
