//! Exact enumeration over all permutations: the Mallows normalizing constant,
//! the posterior of the consensus, and its marginals. Feasible for `n <= 8`.

use std::collections::HashMap;
use std::sync::OnceLock;

use rand::Rng;

use crate::data::{Alpha, RankCountMatrix, RankingDataset};
use crate::error::{Error, Result};
use crate::math::{log_sum_exp, LogAccumulator};
use crate::perm::{enumerate_permutations, footrule_unchecked, Ranking};

/// Largest `n` handled by exact enumeration.
pub const MAX_EXACT_N: usize = 8;

pub(crate) fn check_exact_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidValue("n must be at least 1".into()));
    }
    if n > MAX_EXACT_N {
        return Err(Error::Capacity {
            what: "exact enumeration",
            size: n,
            limit: MAX_EXACT_N,
        });
    }
    Ok(())
}

/// A distribution over a finite set of distinct rankings.
#[derive(Clone, Debug)]
pub struct DiscreteDistribution {
    support: Vec<Ranking>,
    probs: Vec<f64>,
    log_probs: Vec<f64>,
    cdf: Vec<f64>,
    index: HashMap<Ranking, usize>,
}

impl DiscreteDistribution {
    /// Builds a distribution from explicit probabilities summing to one.
    pub fn new(support: Vec<Ranking>, probs: Vec<f64>) -> Result<Self> {
        if support.len() != probs.len() {
            return Err(Error::DimensionMismatch {
                expected: support.len(),
                found: probs.len(),
            });
        }
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidValue("probabilities must be finite and nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidValue(format!("probabilities sum to {total}, not 1")));
        }
        let log_probs = probs.iter().map(|p| p.ln()).collect();
        Self::assemble(support, probs, log_probs)
    }

    /// Normalizes unnormalized log weights.
    pub fn from_log_weights(support: Vec<Ranking>, log_weights: Vec<f64>) -> Result<Self> {
        if support.len() != log_weights.len() {
            return Err(Error::DimensionMismatch {
                expected: support.len(),
                found: log_weights.len(),
            });
        }
        let log_z = log_sum_exp(&log_weights);
        if !log_z.is_finite() {
            return Err(Error::EmptySupport("all weights are zero".into()));
        }
        let log_probs: Vec<f64> = log_weights.iter().map(|w| w - log_z).collect();
        let probs = log_probs.iter().map(|l| l.exp()).collect();
        Self::assemble(support, probs, log_probs)
    }

    /// Empirical distribution of a sample.
    pub fn from_samples(samples: &[Ranking]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty("no samples".into()));
        }
        let mut counts: HashMap<&Ranking, usize> = HashMap::new();
        for s in samples {
            *counts.entry(s).or_default() += 1;
        }
        let mut pairs: Vec<(&Ranking, usize)> = counts.into_iter().collect();
        pairs.sort();
        let total = samples.len() as f64;
        let support = pairs.iter().map(|(r, _)| (*r).clone()).collect();
        let probs: Vec<f64> = pairs.iter().map(|&(_, c)| c as f64 / total).collect();
        let log_probs = probs.iter().map(|p| p.ln()).collect();
        Self::assemble(support, probs, log_probs)
    }

    fn assemble(support: Vec<Ranking>, probs: Vec<f64>, log_probs: Vec<f64>) -> Result<Self> {
        let n = support.first().map(Ranking::len).unwrap_or(0);
        if support.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidValue("support rankings differ in length".into()));
        }
        let mut index = HashMap::with_capacity(support.len());
        for (i, r) in support.iter().enumerate() {
            if index.insert(r.clone(), i).is_some() {
                return Err(Error::InvalidValue(format!("support entry {r} is repeated")));
            }
        }
        let mut acc = 0.0;
        let cdf = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self {
            support,
            probs,
            log_probs,
            cdf,
            index,
        })
    }

    pub fn support(&self) -> &[Ranking] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    pub fn n_items(&self) -> usize {
        self.support.first().map(Ranking::len).unwrap_or(0)
    }

    pub fn prob(&self, r: &Ranking) -> f64 {
        self.index.get(r).map_or(0.0, |&i| self.probs[i])
    }

    pub fn log_prob(&self, r: &Ranking) -> f64 {
        self.index.get(r).map_or(f64::NEG_INFINITY, |&i| self.log_probs[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Ranking, f64)> {
        self.support.iter().zip(self.probs.iter().copied())
    }

    /// Inverse-CDF draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Ranking {
        let total = *self.cdf.last().expect("nonempty support");
        let u = rng.random::<f64>() * total;
        let i = self.cdf.partition_point(|&c| c <= u).min(self.support.len() - 1);
        self.support[i].clone()
    }

    pub fn total_variation(&self, other: &DiscreteDistribution) -> f64 {
        let mut tv: f64 = self
            .iter()
            .map(|(r, p)| (p - other.prob(r)).abs())
            .sum();
        tv += other
            .iter()
            .filter(|(r, _)| !self.index.contains_key(*r))
            .map(|(_, p)| p)
            .sum::<f64>();
        0.5 * tv
    }

    /// Probability of the most likely ranking and the ranking itself.
    pub fn mode(&self) -> (&Ranking, f64) {
        let (i, p) = self
            .probs
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &p)| if p > best.1 { (i, p) } else { best });
        (&self.support[i], p)
    }
}

fn distance_multiset(n: usize) -> &'static [(usize, u64)] {
    static CACHE: [OnceLock<Vec<(usize, u64)>>; MAX_EXACT_N + 1] =
        [const { OnceLock::new() }; MAX_EXACT_N + 1];
    CACHE[n].get_or_init(|| {
        let reference: Vec<usize> = (1..=n).collect();
        let mut counts: Vec<u64> = vec![0; n * n / 2 + 1];
        for r in enumerate_permutations(n).expect("n checked by caller") {
            counts[footrule_unchecked(r.as_slice(), &reference)] += 1;
        }
        counts
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c > 0)
            .collect()
    })
}

/// `log Z_n(alpha)`, the log normalizing constant of a single Mallows ranking.
pub fn log_partition(n: usize, alpha: Alpha) -> Result<f64> {
    check_exact_n(n)?;
    let a = alpha.per_item(n);
    let terms: Vec<f64> = distance_multiset(n)
        .iter()
        .map(|&(d, c)| (c as f64).ln() - a * d as f64)
        .collect();
    Ok(log_sum_exp(&terms))
}

/// Posterior of the consensus under a uniform prior, by enumeration.
pub fn exact_posterior(data: &RankingDataset, alpha: Alpha) -> Result<DiscreteDistribution> {
    let n = data.n_items();
    check_exact_n(n)?;
    let a = alpha.per_item(n);
    let counts = RankCountMatrix::new(data);
    let support: Vec<Ranking> = enumerate_permutations(n)?.collect();
    let log_weights = support
        .iter()
        .map(|r| -a * counts.total_distance(r))
        .collect();
    DiscreteDistribution::from_log_weights(support, log_weights)
}

/// The Mallows distribution centered at `rho0`.
pub fn mallows_distribution(rho0: &Ranking, alpha: Alpha) -> Result<DiscreteDistribution> {
    let data = RankingDataset::new(rho0.len(), vec![rho0.clone()])?;
    exact_posterior(&data, alpha)
}

/// `log Z_n(alpha, R^1..R^N)`, the log normalizer of the posterior.
pub fn log_posterior_normalizer(data: &RankingDataset, alpha: Alpha) -> Result<f64> {
    let n = data.n_items();
    check_exact_n(n)?;
    let a = alpha.per_item(n);
    let counts = RankCountMatrix::new(data);
    let mut acc = LogAccumulator::default();
    for r in enumerate_permutations(n)? {
        acc.add(-a * counts.total_distance(&r));
    }
    Ok(acc.value())
}

/// Probability vector over ranks `1..=n` for the 0-based `item`.
pub fn marginal_rank_distribution(dist: &DiscreteDistribution, item: usize) -> Result<Vec<f64>> {
    let n = dist.n_items();
    if item >= n {
        return Err(Error::IndexOutOfRange { index: item, len: n });
    }
    let mut out = vec![0.0; n];
    for (r, p) in dist.iter() {
        out[r.rank(item) - 1] += p;
    }
    Ok(out)
}

/// All item marginals in log space, `out[item][rank - 1]`.
pub fn log_marginals(dist: &DiscreteDistribution) -> Vec<Vec<f64>> {
    let n = dist.n_items();
    let mut acc = vec![vec![LogAccumulator::default(); n]; n];
    for (r, &lp) in dist.support().iter().zip(dist.log_probs()) {
        for (item, &rank) in r.as_slice().iter().enumerate() {
            acc[item][rank - 1].add(lp);
        }
    }
    acc.into_iter()
        .map(|row| row.iter().map(LogAccumulator::value).collect())
        .collect()
}

/// Expected rank of every item.
pub fn marginal_expectations(dist: &DiscreteDistribution) -> Vec<f64> {
    let mut out = vec![0.0; dist.n_items()];
    for (r, p) in dist.iter() {
        for (e, &rank) in out.iter_mut().zip(r.as_slice()) {
            *e += p * rank as f64;
        }
    }
    out
}

/// `E[R_item]` under Mallows(`rho0`, `alpha`).
pub fn marginal_expectation(rho0: &Ranking, alpha: Alpha, item: usize) -> Result<f64> {
    if item >= rho0.len() {
        return Err(Error::IndexOutOfRange {
            index: item,
            len: rho0.len(),
        });
    }
    Ok(marginal_expectations(&mallows_distribution(rho0, alpha)?)[item])
}

/// Median of a distribution over ranks `1..=weights.len()` restricted to the
/// ranks not in `excluded`: the smallest admissible rank whose renormalized
/// CDF reaches one half.
pub fn restricted_median(weights: &[f64], excluded: &[usize]) -> Result<usize> {
    let n = weights.len();
    let admissible = |r: usize| !excluded.contains(&r);
    let total: f64 = (1..=n).filter(|&r| admissible(r)).map(|r| weights[r - 1]).sum();
    if !(total > 0.0) {
        return Err(Error::EmptySupport("no admissible rank carries mass".into()));
    }
    let mut cum = 0.0;
    let mut last = None;
    for r in (1..=n).filter(|&r| admissible(r)) {
        cum += weights[r - 1];
        last = Some(r);
        if cum / total >= 0.5 - 1e-12 {
            return Ok(r);
        }
    }
    last.ok_or_else(|| Error::EmptySupport("all ranks excluded".into()))
}

/// Median rank of `item` under Mallows(`rho0`, `alpha`), restricted to ranks
/// outside `excluded`.
pub fn marginal_median(
    rho0: &Ranking,
    alpha: Alpha,
    item: usize,
    excluded: &[usize],
) -> Result<usize> {
    let n = rho0.len();
    if item >= n {
        return Err(Error::IndexOutOfRange { index: item, len: n });
    }
    if (1..=n).all(|r| excluded.contains(&r)) {
        return Err(Error::EmptySupport("all ranks excluded".into()));
    }
    let dist = mallows_distribution(rho0, alpha)?;
    restricted_median(&marginal_rank_distribution(&dist, item)?, excluded)
}

/// The admissible rank `l` minimizing `sum_j |R^j_item - l|`; ties go to the
/// smallest `l`.
pub fn constrained_l1_minimizer(
    data: &RankingDataset,
    item: usize,
    excluded: &[usize],
) -> Result<usize> {
    let n = data.n_items();
    if item >= n {
        return Err(Error::IndexOutOfRange { index: item, len: n });
    }
    let cost = |l: usize| -> usize {
        data.rankings().iter().map(|r| r.rank(item).abs_diff(l)).sum()
    };
    (1..=n)
        .filter(|r| !excluded.contains(r))
        .map(|l| (cost(l), l))
        .min()
        .map(|(_, l)| l)
        .ok_or_else(|| Error::EmptySupport("all ranks excluded".into()))
}
