//! Pseudo-Mallows: a sequential product of one-dimensional Mallows factors
//! used as a variational approximation to the Mallows posterior.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Alpha, RankCountMatrix, RankingDataset};
use crate::error::{Error, Result};
use crate::exact::{check_exact_n, DiscreteDistribution};
use crate::mcmc::sample_mallows;
use crate::perm::{enumerate_permutations, perturbed_member, rank_of, Ordering, Ranking, VSet};
use crate::rng::stream_rng;
use crate::summary::SampleSet;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PseudoConfig {
    pub alpha: Alpha,
    pub sigma: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl PseudoConfig {
    pub fn new(alpha: Alpha, sigma: f64, n_samples: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            alpha,
            sigma,
            n_samples,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.alpha.require_positive()?;
        if self.n_samples == 0 {
            return Err(Error::InvalidValue("n_samples must be positive".into()));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidValue(format!(
                "sigma must be finite and nonnegative, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// Draws a categorical index from unnormalized log weights.
pub(crate) fn sample_log_categorical<R: Rng + ?Sized>(
    log_w: &[f64],
    scratch: &mut Vec<f64>,
    rng: &mut R,
) -> usize {
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    scratch.clear();
    let mut total = 0.0;
    for &lw in log_w {
        let w = (lw - max).exp();
        total += w;
        scratch.push(total);
    }
    let u = rng.random::<f64>() * total;
    scratch.iter().position(|&c| u < c).unwrap_or(log_w.len() - 1)
}

/// Assigns ranks from `available` to `items` in turn; the item at step `k`
/// takes a remaining rank `r` with probability proportional to
/// `exp(-a * cost(item, r))`.
pub(crate) fn sequential_draw<R: Rng + ?Sized>(
    items: impl Iterator<Item = usize>,
    available: &mut Vec<usize>,
    a: f64,
    cost: impl Fn(usize, usize) -> f64,
    ranks: &mut [usize],
    rng: &mut R,
) {
    let mut log_w = Vec::with_capacity(available.len());
    let mut scratch = Vec::with_capacity(available.len());
    for item in items {
        log_w.clear();
        log_w.extend(available.iter().map(|&r| -a * cost(item, r)));
        let pick = sample_log_categorical(&log_w, &mut scratch, rng);
        ranks[item] = available.remove(pick);
    }
}

/// Log weights of the factor for `item` over the ranks in `available`.
pub fn step_log_weights(
    counts: &RankCountMatrix,
    alpha: Alpha,
    item: usize,
    available: &[usize],
) -> Vec<f64> {
    let a = alpha.per_item(counts.n_items());
    available.iter().map(|&r| -a * counts.cost(item, r)).collect()
}

fn check_ordering(ordering: &Ordering, n: usize) -> Result<()> {
    if ordering.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: ordering.len(),
        });
    }
    Ok(())
}

/// Sampler bound to a dataset's rank counts.
#[derive(Clone, Debug)]
pub struct PseudoMallowsSampler {
    counts: RankCountMatrix,
    a: f64,
    vset: VSet,
    sigma: f64,
}

impl PseudoMallowsSampler {
    /// Orderings are drawn around `rho_hat` with perturbation `sigma`.
    pub fn new(data: &RankingDataset, alpha: Alpha, rho_hat: &Ranking, sigma: f64) -> Result<Self> {
        Self::from_counts(RankCountMatrix::new(data), alpha, rho_hat, sigma)
    }

    pub fn from_counts(
        counts: RankCountMatrix,
        alpha: Alpha,
        rho_hat: &Ranking,
        sigma: f64,
    ) -> Result<Self> {
        alpha.require_positive()?;
        if rho_hat.len() != counts.n_items() {
            return Err(Error::DimensionMismatch {
                expected: counts.n_items(),
                found: rho_hat.len(),
            });
        }
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidValue(format!(
                "sigma must be finite and nonnegative, got {sigma}"
            )));
        }
        Ok(Self {
            a: alpha.per_item(counts.n_items()),
            counts,
            vset: VSet::new(rho_hat),
            sigma,
        })
    }

    pub fn counts(&self) -> &RankCountMatrix {
        &self.counts
    }

    pub fn given_ordering<R: Rng + ?Sized>(&self, ordering: &Ordering, rng: &mut R) -> Ranking {
        let n = self.counts.n_items();
        let mut ranks = vec![0; n];
        let mut available: Vec<usize> = (1..=n).collect();
        sequential_draw(
            ordering.items(),
            &mut available,
            self.a,
            |i, r| self.counts.cost(i, r),
            &mut ranks,
            rng,
        );
        Ranking::from_vec_unchecked(ranks)
    }

    /// One draw: a perturbed V-ranking's ordering, then rho given that ordering.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (Ordering, Ranking) {
        let v = perturbed_member(&self.vset, self.sigma, rng).expect("sigma validated");
        let ordering = v.ordering();
        let rho = self.given_ordering(&ordering, rng);
        (ordering, rho)
    }
}

pub fn sample_rho_given_ordering<R: Rng + ?Sized>(
    data: &RankingDataset,
    alpha: Alpha,
    ordering: &Ordering,
    rng: &mut R,
) -> Result<Ranking> {
    alpha.require_positive()?;
    let n = data.n_items();
    check_ordering(ordering, n)?;
    let counts = RankCountMatrix::new(data);
    let sampler = PseudoMallowsSampler::from_counts(counts, alpha, &Ranking::identity(n), 0.0)?;
    Ok(sampler.given_ordering(ordering, rng))
}

/// Per-step `(log numerator, log denominator)` of the sequential factors
/// evaluated at `rho`.
pub fn sequential_factors(
    counts: &RankCountMatrix,
    alpha: Alpha,
    ordering: &Ordering,
    rho: &Ranking,
) -> Result<Vec<(f64, f64)>> {
    let n = counts.n_items();
    check_ordering(ordering, n)?;
    if rho.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: rho.len(),
        });
    }
    let a = alpha.per_item(n);
    let mut available: Vec<usize> = (1..=n).collect();
    let mut out = Vec::with_capacity(n);
    for item in ordering.items() {
        let log_w: Vec<f64> = available.iter().map(|&r| -a * counts.cost(item, r)).collect();
        let num = -a * counts.cost(item, rho.rank(item));
        out.push((num, crate::math::log_sum_exp(&log_w)));
        let pos = available
            .iter()
            .position(|&r| r == rho.rank(item))
            .expect("rho is a permutation");
        available.remove(pos);
    }
    Ok(out)
}

/// `log Z^PM(rho)`: the sum of the log denominators.
pub fn log_pm_normalizer(
    counts: &RankCountMatrix,
    alpha: Alpha,
    ordering: &Ordering,
    rho: &Ranking,
) -> Result<f64> {
    Ok(sequential_factors(counts, alpha, ordering, rho)?
        .iter()
        .map(|&(_, d)| d)
        .sum())
}

/// The Pseudo-Mallows distribution for a fixed ordering, by enumeration (`n <= 8`).
/// `alpha = 0` is allowed and gives the uniform distribution.
pub fn exact_distribution(
    data: &RankingDataset,
    alpha: Alpha,
    ordering: &Ordering,
) -> Result<DiscreteDistribution> {
    let n = data.n_items();
    check_exact_n(n)?;
    check_ordering(ordering, n)?;
    let counts = RankCountMatrix::new(data);
    let support: Vec<Ranking> = enumerate_permutations(n)?.collect();
    let log_w = support
        .iter()
        .map(|rho| {
            let f = sequential_factors(&counts, alpha, ordering, rho)?;
            Ok(f.iter().map(|&(num, den)| num - den).sum())
        })
        .collect::<Result<Vec<f64>>>()?;
    DiscreteDistribution::from_log_weights(support, log_w)
}

/// `rank_of` the per-item mean ranks, ties by item index.
pub fn estimate_rho_hat(data: &RankingDataset) -> Result<Ranking> {
    rank_of(&data.mean_ranks()?)
}

/// Independent Pseudo-Mallows draws of the consensus. Draw `t` uses the RNG
/// stream `(seed, t)`, so the output does not depend on the thread count.
pub fn sample_rho(data: &RankingDataset, cfg: &PseudoConfig) -> Result<SampleSet> {
    cfg.validate()?;
    let rho_hat = estimate_rho_hat(data)?;
    let timer = Instant::now();
    let sampler = PseudoMallowsSampler::new(data, cfg.alpha, &rho_hat, cfg.sigma)?;
    let samples = draw_many(&sampler, cfg.seed, cfg.n_samples);
    Ok(SampleSet::new(samples, cfg.seed, timer.elapsed().as_secs_f64()))
}

pub(crate) fn draw_many(sampler: &PseudoMallowsSampler, seed: u64, count: usize) -> Vec<Ranking> {
    (0..count)
        .into_par_iter()
        .map(|t| sampler.draw(&mut stream_rng(seed, &[t as u64])).1)
        .collect()
}

/// Mean pairwise cosine similarity over ordered pairs `j != k`. Zero vectors
/// are skipped; fewer than two nonzero vectors is an error.
pub fn mean_pairwise_cosine<V: AsRef<[f64]>>(vectors: &[V]) -> Result<f64> {
    let dim = vectors.first().map_or(0, |v| v.as_ref().len());
    let mut sum = vec![0.0; dim];
    let mut used = 0usize;
    for v in vectors {
        let v = v.as_ref();
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        used += 1;
        for (s, x) in sum.iter_mut().zip(v) {
            *s += x / norm;
        }
    }
    if used < 2 {
        return Err(Error::InvalidValue(format!(
            "cosine similarity needs two nonzero vectors, found {used}"
        )));
    }
    // |sum of unit vectors|^2 = N + sum over ordered pairs of their cosines
    let sq: f64 = sum.iter().map(|x| x * x).sum();
    let m = used as f64;
    Ok((sq - m) / (m * (m - 1.0)))
}

pub fn ranking_similarity(data: &RankingDataset) -> Result<f64> {
    let vectors: Vec<Vec<f64>> = data
        .rankings()
        .iter()
        .map(|r| r.as_slice().iter().map(|&x| x as f64).collect())
        .collect();
    mean_pairwise_cosine(&vectors)
}

pub const DEFAULT_ALPHA_GRID: [f64; 7] = [0.5, 1.0, 2.0, 3.0, 5.0, 8.0, 12.0];
pub const DEFAULT_SIM_USERS: usize = 300;

pub fn default_alpha_grid() -> Vec<Alpha> {
    DEFAULT_ALPHA_GRID
        .iter()
        .map(|&a| Alpha::new(a).expect("positive constant"))
        .collect()
}

pub(crate) fn check_grid(grid: &[Alpha]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Empty("alpha grid is empty".into()));
    }
    for g in grid {
        g.require_positive()?;
    }
    if grid.windows(2).any(|w| w[0].value() >= w[1].value()) {
        return Err(Error::InvalidValue("alpha grid must be strictly ascending".into()));
    }
    Ok(())
}

/// Index of the grid value whose simulated statistic is closest to `target`;
/// ties go to the smaller grid value.
pub(crate) fn closest(simulated: &[f64], target: f64) -> usize {
    let mut best = 0;
    for (i, s) in simulated.iter().enumerate() {
        if (s - target).abs() < (simulated[best] - target).abs() {
            best = i;
        }
    }
    best
}

/// Similarity of `sim_users` Mallows rankings centred at the identity, for every grid value.
pub fn simulated_similarity_curve<R: Rng + ?Sized>(
    n: usize,
    alpha_grid: &[Alpha],
    sim_users: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_grid(alpha_grid)?;
    let center = Ranking::identity(n);
    alpha_grid
        .iter()
        .map(|&a| {
            let sim = sample_mallows(&center, a, sim_users, rng)?;
            ranking_similarity(&RankingDataset::new(n, sim)?)
        })
        .collect()
}

/// Grid search for the scale: the grid value whose simulated data has the
/// mean pairwise cosine similarity closest to that of `data`.
pub fn estimate_alpha_full<R: Rng + ?Sized>(
    data: &RankingDataset,
    alpha_grid: &[Alpha],
    sim_users: usize,
    rng: &mut R,
) -> Result<Alpha> {
    check_grid(alpha_grid)?;
    if sim_users < 2 {
        return Err(Error::InvalidValue("sim_users must be at least 2".into()));
    }
    let observed = ranking_similarity(data)?;
    let curve = simulated_similarity_curve(data.n_items(), alpha_grid, sim_users, rng)?;
    Ok(alpha_grid[closest(&curve, observed)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{constrained_l1_minimizer, exact_posterior, marginal_median};
    use crate::mcmc::simulate_dataset;
    use crate::perm::{footrule_distance, ordering_of};
    use crate::summary::lag1_autocorrelation;
    use rand::seq::SliceRandom;

    fn r(v: &[usize]) -> Ranking {
        Ranking::new(v.to_vec()).unwrap()
    }

    fn o(v: &[usize]) -> Ordering {
        Ordering::new(v.to_vec()).unwrap()
    }

    fn alpha(a: f64) -> Alpha {
        Alpha::new(a).unwrap()
    }

    fn data(rows: &[&[usize]]) -> RankingDataset {
        RankingDataset::from_rankings(rows.iter().map(|x| r(x)).collect()).unwrap()
    }

    #[test]
    fn two_item_factor() {
        let d = data(&[&[1, 2]]);
        let mut rng = stream_rng(1, &[]);
        let hits = (0..100_000)
            .filter(|_| {
                sample_rho_given_ordering(&d, alpha(2.0), &o(&[1, 2]), &mut rng)
                    .unwrap()
                    .rank(0)
                    == 1
            })
            .count();
        assert!((hits as f64 / 1e5 - 0.7310585786300049).abs() < 0.005);
        let exact = exact_distribution(&d, alpha(2.0), &o(&[1, 2])).unwrap();
        assert!((exact.prob(&r(&[1, 2])) - 0.7310585786300049).abs() < 1e-15);
    }

    #[test]
    fn single_item_and_errors() {
        let d = data(&[&[1]]);
        let mut rng = stream_rng(2, &[]);
        assert_eq!(sample_rho_given_ordering(&d, alpha(1.0), &o(&[1]), &mut rng).unwrap(), r(&[1]));
        let d3 = data(&[&[1, 2, 3]]);
        assert!(sample_rho_given_ordering(&d3, alpha(0.0), &o(&[1, 2, 3]), &mut rng).is_err());
        assert!(sample_rho_given_ordering(&d3, alpha(1.0), &o(&[1, 2]), &mut rng).is_err());
        assert!(exact_distribution(&RankingDataset::new(9, vec![Ranking::identity(9)]).unwrap(), alpha(1.0), &Ordering::identity(9)).is_err());
    }

    #[test]
    fn vanishing_scale_is_uniform() {
        let d = data(&[&[1, 2, 3, 4], &[2, 1, 4, 3]]);
        let mut rng = stream_rng(3, &[]);
        let draws = 48_000;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..draws {
            let x = sample_rho_given_ordering(&d, alpha(1e-12), &o(&[3, 1, 4, 2]), &mut rng).unwrap();
            *counts.entry(x).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 24);
        let e = draws as f64 / 24.0;
        let chi2: f64 = counts.values().map(|&c| (c as f64 - e).powi(2) / e).sum();
        // 23 degrees of freedom, 0.999 quantile
        assert!(chi2 < 49.73, "chi2 = {chi2}");
        let uniform = exact_distribution(&d, Alpha::new(0.0).unwrap(), &o(&[3, 1, 4, 2])).unwrap();
        assert!(uniform.probs().iter().all(|p| (p - 1.0 / 24.0).abs() < 1e-15));
    }

    #[test]
    fn exact_matches_sampler() {
        let d = data(&[&[1, 2, 3], &[2, 1, 3], &[1, 3, 2]]);
        let ord = o(&[2, 3, 1]);
        let exact = exact_distribution(&d, alpha(3.0), &ord).unwrap();
        assert!((exact.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mut rng = stream_rng(4, &[]);
        let draws: Vec<Ranking> = (0..100_000)
            .map(|_| sample_rho_given_ordering(&d, alpha(3.0), &ord, &mut rng).unwrap())
            .collect();
        let emp = DiscreteDistribution::from_samples(&draws).unwrap();
        assert!(emp.total_variation(&exact) < 0.02);
    }

    #[test]
    fn numerators_multiply_to_mallows_weight() {
        let mut rng = stream_rng(5, &[]);
        for n in 1..=5 {
            let d = simulate_dataset(&Ranking::identity(n), alpha(1.5), 7, &mut rng).unwrap();
            let counts = RankCountMatrix::new(&d);
            let a = alpha(2.3);
            for rho in enumerate_permutations(n).unwrap() {
                let mut items: Vec<usize> = (1..=n).collect();
                items.shuffle(&mut rng);
                let f = sequential_factors(&counts, a, &o(&items), &rho).unwrap();
                let num: f64 = f.iter().map(|x| x.0).sum();
                let direct: usize = d.rankings().iter().map(|x| footrule_distance(x, &rho).unwrap()).sum();
                let expected = -2.3 / n as f64 * direct as f64;
                assert!((num - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exact_distribution_matches_factor_formula() {
        // q(rho) = exp(-a S(rho)) / Z^PM(rho)
        let d = data(&[&[1, 2, 3, 4], &[1, 3, 2, 4], &[2, 1, 3, 4]]);
        let a = alpha(1.7);
        let ord = o(&[2, 3, 1, 4]);
        let q = exact_distribution(&d, a, &ord).unwrap();
        let counts = RankCountMatrix::new(&d);
        for (rho, p) in q.iter() {
            let s = counts.total_distance(rho);
            let z = log_pm_normalizer(&counts, a, &ord, rho).unwrap();
            assert!((p.ln() - (-1.7 / 4.0 * s - z)).abs() < 1e-12);
        }
    }

    #[test]
    fn step_mode_is_constrained_minimizer() {
        let mut rng = stream_rng(6, &[]);
        for trial in 0..200 {
            let n = 3 + trial % 6;
            let d = simulate_dataset(&Ranking::identity(n), alpha(1.0), 1 + trial % 9, &mut rng).unwrap();
            let counts = RankCountMatrix::new(&d);
            let mut ranks: Vec<usize> = (1..=n).collect();
            ranks.shuffle(&mut rng);
            let taken = rng.random_range(0..n);
            let excluded = &ranks[..taken];
            let available: Vec<usize> = (1..=n).filter(|x| !excluded.contains(x)).collect();
            let item = rng.random_range(0..n);
            let w = step_log_weights(&counts, alpha(2.0), item, &available);
            let best = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mode = available[w.iter().position(|&x| x == best).unwrap()];
            assert_eq!(mode, constrained_l1_minimizer(&d, item, excluded).unwrap());
        }
    }

    #[test]
    fn middle_item_first_step_mode() {
        // data equal to the exact Mallows marginals of the middle item
        let n = 5;
        let rho0 = Ranking::identity(n);
        let a = alpha(2.0);
        let m = marginal_median(&rho0, a, 2, &[]).unwrap();
        assert_eq!(m, 3);
        let post = crate::exact::mallows_distribution(&rho0, a).unwrap();
        let rows: Vec<Ranking> = post
            .iter()
            .flat_map(|(x, p)| std::iter::repeat_n(x.clone(), (p * 10_000.0).round() as usize))
            .collect();
        let d = RankingDataset::from_rankings(rows).unwrap();
        let counts = RankCountMatrix::new(&d);
        let w = step_log_weights(&counts, a, 2, &[1, 2, 3, 4, 5]);
        let best = (0..5).max_by(|&x, &y| w[x].total_cmp(&w[y])).unwrap();
        assert_eq!(best + 1, 3);
    }

    #[test]
    fn rho_hat_examples() {
        assert_eq!(estimate_rho_hat(&data(&[&[2, 3, 1]])).unwrap(), r(&[2, 3, 1]));
        assert_eq!(estimate_rho_hat(&data(&[&[1, 2, 3], &[1, 3, 2]])).unwrap(), r(&[1, 2, 3]));
        assert!(estimate_rho_hat(&RankingDataset::new(3, vec![]).unwrap()).is_err());
    }

    #[test]
    fn zero_sigma_uses_v_orderings() {
        let d = data(&[&[1, 2, 3], &[2, 1, 3], &[1, 2, 3]]);
        let rho_hat = estimate_rho_hat(&d).unwrap();
        let sampler = PseudoMallowsSampler::new(&d, alpha(1.0), &rho_hat, 0.0).unwrap();
        let v: Vec<Ordering> = VSet::new(&rho_hat).members().unwrap().map(|x| ordering_of(&x)).collect();
        let mut rng = stream_rng(7, &[]);
        for _ in 0..200 {
            let (ord, rho) = sampler.draw(&mut rng);
            assert!(v.contains(&ord));
            assert_eq!(rho.len(), 3);
        }
    }

    #[test]
    fn draws_are_independent_and_reproducible() {
        let mut rng = stream_rng(8, &[]);
        let rho0 = Ranking::identity(10);
        let d = simulate_dataset(&rho0, alpha(2.0), 50, &mut rng).unwrap();
        let cfg = PseudoConfig::new(alpha(2.0), 0.5, 2000, 11).unwrap();
        let set = sample_rho(&d, &cfg).unwrap();
        assert_eq!(set.len(), 2000);
        let dist = set.distances_to(&rho0).unwrap();
        assert!(lag1_autocorrelation(&dist).unwrap().abs() < 0.05);
        let again = sample_rho(&d, &cfg).unwrap();
        assert_eq!(set.samples, again.samples);
    }

    #[test]
    fn cosine_similarity() {
        assert!((mean_pairwise_cosine(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap() - 0.8).abs() < 1e-15);
        assert!(mean_pairwise_cosine(&[vec![1.0, 2.0]]).is_err());
        // brute force over ordered pairs
        let mut rng = stream_rng(9, &[]);
        let vs: Vec<Vec<f64>> = (0..7).map(|_| (0..5).map(|_| rng.random::<f64>()).collect()).collect();
        let cos = |a: &[f64], b: &[f64]| {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            dot / (na * nb)
        };
        let mut total = 0.0;
        for j in 0..7 {
            for k in 0..7 {
                if j != k {
                    total += cos(&vs[j], &vs[k]);
                }
            }
        }
        assert!((mean_pairwise_cosine(&vs).unwrap() - total / 42.0).abs() < 1e-12);
    }

    #[test]
    fn identical_users_pick_largest_alpha() {
        let d = RankingDataset::from_rankings(vec![r(&[3, 1, 2, 4, 5]); 20]).unwrap();
        let grid = vec![alpha(1.0), alpha(3.0), alpha(10.0)];
        let mut rng = stream_rng(10, &[]);
        assert_eq!(estimate_alpha_full(&d, &grid, 100, &mut rng).unwrap(), alpha(10.0));
        assert!(estimate_alpha_full(&d, &[], 100, &mut rng).is_err());
        assert!(estimate_alpha_full(&d, &[alpha(3.0), alpha(1.0)], 100, &mut rng).is_err());
    }

    #[test]
    fn simulated_similarity_increases_with_alpha() {
        let mut rng = stream_rng(11, &[]);
        let curve = simulated_similarity_curve(10, &default_alpha_grid(), DEFAULT_SIM_USERS, &mut rng).unwrap();
        assert!(curve.windows(2).all(|w| w[0] < w[1]), "{curve:?}");
    }

    #[test]
    fn posterior_of_exact_is_unaffected() {
        // sanity: pseudo and exact agree on a single item
        let d = data(&[&[1]]);
        let q = exact_distribution(&d, alpha(1.0), &o(&[1])).unwrap();
        let p = exact_posterior(&d, alpha(1.0)).unwrap();
        assert_eq!(q.total_variation(&p), 0.0);
    }
}
