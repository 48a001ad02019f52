//! Metropolis-Hastings baselines: the consensus chain for full rankings, the
//! two-step augmentation chain for clicks, and a Mallows data generator.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Alpha, ClickDataset, ClickVector, RankCountMatrix, RankingDataset};
use crate::error::{Error, Result};
use crate::exact::{mallows_distribution, MAX_EXACT_N};
use crate::perm::Ranking;
use crate::rng::{stream_rng, SeededRng};

/// `max(1, floor(n / 10))`.
pub fn default_leap_size(n: usize) -> usize {
    (n / 10).max(1)
}

fn max_leap_size(n: usize) -> usize {
    ((n.saturating_sub(1)) / 2).max(1)
}

fn check_leap_size(n: usize, leap_size: usize) -> Result<()> {
    if leap_size == 0 || leap_size > max_leap_size(n) {
        return Err(Error::InvalidValue(format!(
            "leap size {leap_size} outside 1..={} for n = {n}",
            max_leap_size(n)
        )));
    }
    Ok(())
}

/// Where a chain starts.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainStart {
    /// A uniformly random permutation drawn from the chain's seed.
    #[default]
    Random,
    Given(Ranking),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McmcConfig {
    pub iterations: usize,
    pub leap_size: usize,
    pub thin: usize,
    pub burn_in: usize,
    pub seed: u64,
    #[serde(default)]
    pub start: ChainStart,
}

impl McmcConfig {
    /// Defaults for `n` items: leap size `max(1, n / 10)`, no burn-in, no thinning.
    pub fn new(n: usize, iterations: usize, seed: u64) -> Self {
        Self {
            iterations,
            leap_size: default_leap_size(n),
            thin: 1,
            burn_in: 0,
            seed,
            start: ChainStart::Random,
        }
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn with_thin(mut self, thin: usize) -> Self {
        self.thin = thin;
        self
    }

    pub fn with_start(mut self, start: ChainStart) -> Self {
        self.start = start;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidValue("iterations must be positive".into()));
        }
        if self.thin == 0 {
            return Err(Error::InvalidValue("thin must be positive".into()));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::InvalidValue(format!(
                "burn-in {} must be below the iteration count {}",
                self.burn_in, self.iterations
            )));
        }
        if n > 1 {
            check_leap_size(n, self.leap_size)?;
        }
        if let ChainStart::Given(r) = &self.start {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: r.len(),
                });
            }
        }
        Ok(())
    }

    /// `floor((iterations - burn_in) / thin)`.
    pub fn recorded_samples(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }

    fn records(&self, iteration: usize) -> bool {
        iteration > self.burn_in && (iteration - self.burn_in).is_multiple_of(self.thin)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McmcTrace {
    pub rho_samples: Vec<Ranking>,
    pub acceptance_rate: f64,
    /// Seconds spent in the sampler.
    pub wall_clock: f64,
}

/// A proposed leap-and-shift move.
#[derive(Clone, Copy, Debug, PartialEq)]
struct LeapShift {
    item: usize,
    from: usize,
    to: usize,
    log_ratio: f64,
}

/// A ranking together with its inverse, so moves touch only the shifted block.
#[derive(Clone, Debug)]
struct ChainState {
    ranks: Vec<usize>,
    // item holding rank r + 1
    items: Vec<usize>,
}

impl ChainState {
    fn new(r: &Ranking) -> Self {
        let ranks = r.as_slice().to_vec();
        let mut items = vec![0; ranks.len()];
        for (i, &x) in ranks.iter().enumerate() {
            items[x - 1] = i;
        }
        Self { ranks, items }
    }

    fn n(&self) -> usize {
        self.ranks.len()
    }

    fn to_ranking(&self) -> Ranking {
        Ranking::from_vec_unchecked(self.ranks.clone())
    }

    fn neighbourhood(n: usize, leap: usize, rank: usize) -> usize {
        let lo = rank.saturating_sub(leap).max(1);
        let hi = (rank + leap).min(n);
        hi - lo
    }

    fn propose<R: Rng + ?Sized>(&self, leap: usize, rng: &mut R) -> Option<LeapShift> {
        let n = self.n();
        if n < 2 {
            return None;
        }
        let item = rng.random_range(0..n);
        let from = self.ranks[item];
        let lo = from.saturating_sub(leap).max(1);
        let hi = (from + leap).min(n);
        // uniform over [lo, hi] without `from`
        let mut to = rng.random_range(lo..hi);
        if to >= from {
            to += 1;
        }
        // An adjacent swap can be reached by moving either of the two items, in
        // both directions, so its proposal ratio is one. Longer moves have a
        // unique reverse move.
        let log_ratio = if from.abs_diff(to) == 1 {
            0.0
        } else {
            (Self::neighbourhood(n, leap, from) as f64).ln()
                - (Self::neighbourhood(n, leap, to) as f64).ln()
        };
        Some(LeapShift {
            item,
            from,
            to,
            log_ratio,
        })
    }

    /// `(item, old rank, new rank)` for every item the move displaces.
    fn displaced(&self, mv: &LeapShift) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let (lo, hi) = (mv.from.min(mv.to), mv.from.max(mv.to));
        let up = mv.from < mv.to;
        let (moved, to) = (mv.item, mv.to);
        (lo..=hi).map(move |rank| {
            let item = self.items[rank - 1];
            let new = if item == moved {
                to
            } else if up {
                rank - 1
            } else {
                rank + 1
            };
            (item, rank, new)
        })
    }

    fn apply(&mut self, mv: &LeapShift) {
        let (lo, hi) = (mv.from.min(mv.to), mv.from.max(mv.to));
        let moves: Vec<(usize, usize)> = self.displaced(mv).map(|(i, _, new)| (i, new)).collect();
        for (item, new) in moves {
            self.ranks[item] = new;
            self.items[new - 1] = item;
        }
        debug_assert!((lo..=hi).all(|r| self.ranks[self.items[r - 1]] == r));
    }
}

/// Leap-and-shift proposal: a uniformly chosen item jumps to a uniformly chosen
/// rank at most `leap_size` away and the items in between shift by one.
///
/// Returns the proposal and `log q(rho' -> rho) - log q(rho -> rho')`.
pub fn leap_and_shift_propose<R: Rng + ?Sized>(
    rho: &Ranking,
    leap_size: usize,
    rng: &mut R,
) -> Result<(Ranking, f64)> {
    let n = rho.len();
    if n < 2 {
        return Ok((rho.clone(), 0.0));
    }
    check_leap_size(n, leap_size)?;
    let mut state = ChainState::new(rho);
    let mv = state.propose(leap_size, rng).expect("n >= 2");
    state.apply(&mv);
    Ok((state.to_ranking(), mv.log_ratio))
}

fn initial_ranking(start: &ChainStart, n: usize, rng: &mut SeededRng) -> Ranking {
    match start {
        ChainStart::Given(r) => r.clone(),
        ChainStart::Random => {
            let mut v: Vec<usize> = (1..=n).collect();
            v.shuffle(rng);
            Ranking::from_vec_unchecked(v)
        }
    }
}

/// Runs a leap-and-shift Metropolis chain whose target is
/// `exp(-a * sum_i cost(i, rho_i))`.
fn run_chain(
    n: usize,
    a: f64,
    cost: &(dyn Fn(usize, usize) -> f64 + Sync),
    cfg: &McmcConfig,
    rng: &mut SeededRng,
    mut on_record: impl FnMut(&ChainState),
) -> f64 {
    let start = initial_ranking(&cfg.start, n, rng);
    let mut state = ChainState::new(&start);
    let mut accepted = 0usize;
    for it in 1..=cfg.iterations {
        if let Some(mv) = state.propose(cfg.leap_size, rng) {
            let delta: f64 = state
                .displaced(&mv)
                .map(|(item, old, new)| cost(item, new) - cost(item, old))
                .sum();
            let log_accept = -a * delta + mv.log_ratio;
            if log_accept >= 0.0 || rng.random::<f64>().ln() < log_accept {
                state.apply(&mv);
                accepted += 1;
            }
        }
        if cfg.records(it) {
            on_record(&state);
        }
    }
    accepted as f64 / cfg.iterations as f64
}

/// Metropolis-Hastings for the consensus given full rankings.
pub fn mcmc_rho(data: &RankingDataset, alpha: Alpha, cfg: &McmcConfig) -> Result<McmcTrace> {
    alpha.require_positive()?;
    let n = data.n_items();
    cfg.validate(n)?;
    let counts = RankCountMatrix::new(data);
    let timer = Instant::now();
    let mut rng = stream_rng(cfg.seed, &[0]);
    let mut samples = Vec::with_capacity(cfg.recorded_samples());
    let acceptance_rate = run_chain(
        n,
        alpha.per_item(n),
        &|i, r| counts.cost(i, r),
        cfg,
        &mut rng,
        |s| samples.push(s.to_ranking()),
    );
    Ok(McmcTrace {
        rho_samples: samples,
        acceptance_rate,
        wall_clock: timer.elapsed().as_secs_f64(),
    })
}

/// Chain settings used when drawing synthetic Mallows data with MCMC.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MallowsSamplerConfig {
    pub burn_in: usize,
    pub thin: usize,
    pub leap_size: usize,
}

impl MallowsSamplerConfig {
    /// Burn-in `100 n^2`, thinning `10 n`.
    pub fn for_items(n: usize) -> Self {
        Self {
            burn_in: 100 * n * n,
            thin: 10 * n,
            leap_size: default_leap_size(n),
        }
    }
}

/// Draws `count` rankings from Mallows(`rho0`, `alpha`): exactly by inverse CDF
/// for `n <= 8`, otherwise from one thinned leap-and-shift chain.
pub fn sample_mallows<R: Rng + ?Sized>(
    rho0: &Ranking,
    alpha: Alpha,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Ranking>> {
    sample_mallows_with(rho0, alpha, count, MallowsSamplerConfig::for_items(rho0.len()), rng)
}

pub fn sample_mallows_with<R: Rng + ?Sized>(
    rho0: &Ranking,
    alpha: Alpha,
    count: usize,
    chain: MallowsSamplerConfig,
    rng: &mut R,
) -> Result<Vec<Ranking>> {
    let n = rho0.len();
    if n <= MAX_EXACT_N {
        let dist = mallows_distribution(rho0, alpha)?;
        return Ok((0..count).map(|_| dist.sample(rng)).collect());
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let cfg = McmcConfig {
        iterations: chain.burn_in + count * chain.thin.max(1),
        leap_size: chain.leap_size,
        thin: chain.thin.max(1),
        burn_in: chain.burn_in,
        seed: rng.random(),
        start: ChainStart::Random,
    };
    cfg.validate(n)?;
    let mut chain_rng = stream_rng(cfg.seed, &[0]);
    let mut out = Vec::with_capacity(count);
    let target = rho0.as_slice();
    run_chain(
        n,
        alpha.per_item(n),
        &|i, r| target[i].abs_diff(r) as f64,
        &cfg,
        &mut chain_rng,
        |s| out.push(s.to_ranking()),
    );
    Ok(out)
}

/// Convenience: a synthetic dataset of `users` Mallows rankings.
pub fn simulate_dataset<R: Rng + ?Sized>(
    rho0: &Ranking,
    alpha: Alpha,
    users: usize,
    rng: &mut R,
) -> Result<RankingDataset> {
    RankingDataset::new(rho0.len(), sample_mallows(rho0, alpha, users, rng)?)
}

/// Output of the clicking augmentation chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClickingTrace {
    pub rho: McmcTrace,
    /// `users[j]` holds user `j`'s ranking at every recorded iteration.
    pub users: Vec<Vec<Ranking>>,
    pub user_acceptance_rate: f64,
}

/// Augmented ranking of one user, with items split by click status.
#[derive(Clone, Debug)]
struct UserChain {
    ranks: Vec<usize>,
    group: Vec<bool>,
    clicked: Vec<usize>,
    unclicked: Vec<usize>,
}

impl UserChain {
    fn new(clicks: &ClickVector, rng: &mut SeededRng) -> Self {
        let mut clicked: Vec<usize> = clicks.clicked().collect();
        let mut unclicked: Vec<usize> = clicks.unclicked().collect();
        let mut ranks = vec![0; clicks.len()];
        clicked.shuffle(rng);
        unclicked.shuffle(rng);
        for (r, &i) in clicked.iter().chain(unclicked.iter()).enumerate() {
            ranks[i] = r + 1;
        }
        clicked.sort_unstable();
        unclicked.sort_unstable();
        Self {
            ranks,
            group: clicks.bits().to_vec(),
            clicked,
            unclicked,
        }
    }

    /// One within-group swap proposal. Returns the swapped pair if accepted.
    fn step(&mut self, rho: &[usize], a: f64, rng: &mut SeededRng) -> Option<(usize, usize)> {
        let n = self.ranks.len();
        let u = rng.random_range(0..n);
        let peers = if self.group[u] { &self.clicked } else { &self.unclicked };
        if peers.len() < 2 {
            return None;
        }
        let mut v = peers[rng.random_range(0..peers.len() - 1)];
        if v == u {
            v = *peers.last().expect("two or more peers");
        }
        let (ru, rv) = (self.ranks[u], self.ranks[v]);
        let before = rho[u].abs_diff(ru) + rho[v].abs_diff(rv);
        let after = rho[u].abs_diff(rv) + rho[v].abs_diff(ru);
        let log_accept = -a * (after as f64 - before as f64);
        if log_accept >= 0.0 || rng.random::<f64>().ln() < log_accept {
            self.ranks.swap(u, v);
            Some((u, v))
        } else {
            None
        }
    }
}

/// Two-step augmentation MCMC for click data: (i) a within-group swap update
/// of every user's latent ranking given the consensus, (ii) one leap-and-shift
/// update of the consensus given the latent rankings.
///
/// Users are updated in parallel; each owns the RNG stream `(seed, 1, user)`,
/// so the result does not depend on the thread count.
pub fn mcmc_clicking(
    clicks: &ClickDataset,
    alpha: Alpha,
    cfg: &McmcConfig,
) -> Result<ClickingTrace> {
    alpha.require_positive()?;
    let n = clicks.n_items();
    cfg.validate(n)?;
    let a = alpha.per_item(n);
    let timer = Instant::now();

    let mut rng = stream_rng(cfg.seed, &[0]);
    let mut user_rngs: Vec<SeededRng> = (0..clicks.n_users())
        .map(|j| stream_rng(cfg.seed, &[1, j as u64]))
        .collect();
    let mut users: Vec<UserChain> = clicks
        .users()
        .iter()
        .zip(user_rngs.iter_mut())
        .map(|(c, r)| UserChain::new(c, r))
        .collect();

    let mut counts = vec![0u64; n * n];
    for u in &users {
        for (i, &r) in u.ranks.iter().enumerate() {
            counts[i * n + r - 1] += 1;
        }
    }
    let cost = |counts: &[u64], item: usize, x: usize| -> f64 {
        counts[item * n..(item + 1) * n]
            .iter()
            .enumerate()
            .map(|(r, &c)| c as f64 * (r + 1).abs_diff(x) as f64)
            .sum()
    };

    let start = initial_ranking(&cfg.start, n, &mut rng);
    let mut rho = ChainState::new(&start);
    let mut rho_accepted = 0usize;
    let mut user_accepted = 0usize;
    let mut rho_samples = Vec::with_capacity(cfg.recorded_samples());
    let mut user_samples: Vec<Vec<Ranking>> =
        vec![Vec::with_capacity(cfg.recorded_samples()); users.len()];

    for it in 1..=cfg.iterations {
        let rho_ranks = &rho.ranks;
        let swaps: Vec<Option<(usize, usize, usize, usize)>> = users
            .par_iter_mut()
            .zip(user_rngs.par_iter_mut())
            .map(|(user, r)| {
                user.step(rho_ranks, a, r)
                    .map(|(u, v)| (u, v, user.ranks[u], user.ranks[v]))
            })
            .collect();
        for (u, v, ru_new, rv_new) in swaps.into_iter().flatten() {
            user_accepted += 1;
            // before the swap u held rv_new and v held ru_new
            counts[u * n + rv_new - 1] -= 1;
            counts[u * n + ru_new - 1] += 1;
            counts[v * n + ru_new - 1] -= 1;
            counts[v * n + rv_new - 1] += 1;
        }

        if let Some(mv) = rho.propose(cfg.leap_size, &mut rng) {
            let delta: f64 = rho
                .displaced(&mv)
                .map(|(item, old, new)| cost(&counts, item, new) - cost(&counts, item, old))
                .sum();
            let log_accept = -a * delta + mv.log_ratio;
            if log_accept >= 0.0 || rng.random::<f64>().ln() < log_accept {
                rho.apply(&mv);
                rho_accepted += 1;
            }
        }

        if cfg.records(it) {
            rho_samples.push(rho.to_ranking());
            for (trace, user) in user_samples.iter_mut().zip(&users) {
                trace.push(Ranking::from_vec_unchecked(user.ranks.clone()));
            }
        }
    }

    let user_steps = (cfg.iterations * users.len()).max(1);
    Ok(ClickingTrace {
        rho: McmcTrace {
            rho_samples,
            acceptance_rate: rho_accepted as f64 / cfg.iterations as f64,
            wall_clock: timer.elapsed().as_secs_f64(),
        },
        users: user_samples,
        user_acceptance_rate: user_accepted as f64 / user_steps as f64,
    })
}
