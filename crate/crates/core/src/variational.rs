//! Approximation quality of Pseudo-Mallows and the search over orderings.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Alpha, RankCountMatrix, RankingDataset};
use crate::error::{Error, Result};
use crate::exact::{check_exact_n, exact_posterior, log_marginals, DiscreteDistribution};
use crate::math::LogAccumulator;
use crate::mcmc::{mcmc_rho, McmcConfig};
use crate::perm::{enumerate_permutations, Ordering, Ranking, VSet};
use crate::pseudo::{sample_rho, PseudoConfig, PseudoMallowsSampler};
use crate::rng::stream_rng;

pub use crate::perm::ls_move;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileSource {
    Exact,
    Empirical { draws: usize, epsilon: f64 },
}

/// Per-item rank marginals, stored as log probabilities `[item][rank - 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalProfile {
    log_probs: Vec<Vec<f64>>,
    source: ProfileSource,
}

impl MarginalProfile {
    pub fn from_distribution(dist: &DiscreteDistribution) -> Self {
        Self {
            log_probs: log_marginals(dist),
            source: ProfileSource::Exact,
        }
    }

    /// Empirical frequencies with `1 / (2 * draws)` added to every cell, rows renormalized.
    pub fn from_samples(samples: &[Ranking]) -> Result<Self> {
        let counts = crate::summary::marginal_counts(samples)?;
        let draws = samples.len();
        let eps = 1.0 / (2.0 * draws as f64);
        let log_probs = counts
            .iter()
            .map(|row| {
                let cells: Vec<f64> = row.iter().map(|&c| c as f64 / draws as f64 + eps).collect();
                let total: f64 = cells.iter().sum();
                cells.iter().map(|c| (c / total).ln()).collect()
            })
            .collect();
        Ok(Self {
            log_probs,
            source: ProfileSource::Empirical { draws, epsilon: eps },
        })
    }

    /// From explicit probability rows, which must each sum to one.
    pub fn from_probabilities(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        for row in &rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            let total: f64 = row.iter().sum();
            if row.iter().any(|&p| !(p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidValue(format!("row does not sum to 1 ({total})")));
            }
        }
        Ok(Self {
            log_probs: rows.iter().map(|r| r.iter().map(|p| p.ln()).collect()).collect(),
            source: ProfileSource::Exact,
        })
    }

    pub fn n(&self) -> usize {
        self.log_probs.len()
    }

    pub fn source(&self) -> ProfileSource {
        self.source
    }

    pub fn log_probs(&self) -> &[Vec<f64>] {
        &self.log_probs
    }

    pub fn probabilities(&self) -> Vec<Vec<f64>> {
        self.log_probs
            .iter()
            .map(|row| row.iter().map(|lp| lp.exp()).collect())
            .collect()
    }
}

/// `sum_i sum_r q_i(r) log(q_i(r) / p_i(r))`, with `0 log 0 = 0`.
pub fn marginal_kl(q: &MarginalProfile, p: &MarginalProfile) -> Result<f64> {
    if q.n() != p.n() {
        return Err(Error::DimensionMismatch {
            expected: q.n(),
            found: p.n(),
        });
    }
    let mut total = 0.0;
    for (item, (qr, pr)) in q.log_probs.iter().zip(&p.log_probs).enumerate() {
        for (rank, (&lq, &lp)) in qr.iter().zip(pr).enumerate() {
            if lq == f64::NEG_INFINITY {
                continue;
            }
            if lp == f64::NEG_INFINITY {
                return Err(Error::Divergence(format!(
                    "reference marginal of item {} is zero at rank {} where the approximation is not",
                    item + 1,
                    rank + 1
                )));
            }
            total += lq.exp() * (lq - lp);
        }
    }
    Ok(total.max(0.0))
}

/// Joint KL divergence between two distributions over rankings.
pub fn kl_full(q: &DiscreteDistribution, p: &DiscreteDistribution) -> Result<f64> {
    let mut total = 0.0;
    for (r, &lq) in q.support().iter().zip(q.log_probs()) {
        if lq == f64::NEG_INFINITY {
            continue;
        }
        let lp = p.log_prob(r);
        if lp == f64::NEG_INFINITY {
            return Err(Error::Divergence(format!("reference assigns zero mass to {r}")));
        }
        total += lq.exp() * (lq - lp);
    }
    Ok(total)
}

/// Largest `n` for the exact ELBO.
pub const MAX_ELBO_N: usize = 7;

/// `log q(rho)` of the Pseudo-Mallows distribution and `log Z^PM(rho)` for
/// every permutation, in enumeration order.
fn pm_log_terms(counts: &RankCountMatrix, a: f64, ordering: &Ordering, perms: &[Ranking]) -> Vec<(f64, f64)> {
    let n = counts.n_items();
    let items: Vec<usize> = ordering.items().collect();
    let mut available = Vec::with_capacity(n);
    perms
        .iter()
        .map(|rho| {
            available.clear();
            available.extend(1..=n);
            let (mut num, mut log_z) = (0.0, 0.0);
            for &item in &items {
                let mut acc = LogAccumulator::default();
                for &r in &available {
                    acc.add(-a * counts.cost(item, r));
                }
                let target = rho.rank(item);
                num += -a * counts.cost(item, target);
                log_z += acc.value();
                let pos = available.iter().position(|&r| r == target).expect("permutation");
                available.remove(pos);
            }
            (num - log_z, log_z)
        })
        .collect()
}

/// `sum_rho exp(-(alpha / n) S(rho)) log Z^PM(rho) / Z^PM(rho)`, the ELBO of
/// the ordering; exact enumeration for `n <= 7`.
pub fn elbo_exact(data: &RankingDataset, alpha: Alpha, ordering: &Ordering) -> Result<f64> {
    let n = data.n_items();
    if n > MAX_ELBO_N {
        return Err(Error::Capacity {
            what: "exact ELBO",
            size: n,
            limit: MAX_ELBO_N,
        });
    }
    check_exact_n(n)?;
    check_len(ordering.len(), n)?;
    let counts = RankCountMatrix::new(data);
    let perms: Vec<Ranking> = enumerate_permutations(n)?.collect();
    Ok(pm_log_terms(&counts, alpha.per_item(n), ordering, &perms)
        .iter()
        .map(|&(lq, log_z)| lq.exp() * log_z)
        .sum())
}

fn check_len(found: usize, expected: usize) -> Result<()> {
    if found != expected {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Exact Pseudo-Mallows marginals for the ordering of `ordering_ranking`.
fn pm_exact_profile(counts: &RankCountMatrix, a: f64, ordering_ranking: &Ranking, perms: &[Ranking]) -> MarginalProfile {
    let n = counts.n_items();
    let terms = pm_log_terms(counts, a, &ordering_ranking.ordering(), perms);
    let mut acc = vec![vec![LogAccumulator::default(); n]; n];
    for (rho, &(lq, _)) in perms.iter().zip(&terms) {
        for (item, &rank) in rho.as_slice().iter().enumerate() {
            acc[item][rank - 1].add(lq);
        }
    }
    MarginalProfile {
        log_probs: acc
            .into_iter()
            .map(|row| row.iter().map(LogAccumulator::value).collect())
            .collect(),
        source: ProfileSource::Exact,
    }
}

fn pm_sampled_profile(
    counts: &RankCountMatrix,
    alpha: Alpha,
    ordering_ranking: &Ranking,
    draws: usize,
    seed: u64,
    path: &[u64],
) -> Result<MarginalProfile> {
    let n = counts.n_items();
    let sampler = PseudoMallowsSampler::from_counts(counts.clone(), alpha, &Ranking::identity(n), 0.0)?;
    let ordering = ordering_ranking.ordering();
    let mut rng = stream_rng(seed, path);
    let samples: Vec<Ranking> = (0..draws).map(|_| sampler.given_ordering(&ordering, &mut rng)).collect();
    MarginalProfile::from_samples(&samples)
}

/// How Pseudo-Mallows marginals are obtained for a candidate ordering.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EvalMode {
    Exact,
    /// Empirical marginals of `draws` samples; candidate RNG streams derive from `seed`.
    Sampled { draws: usize, seed: u64 },
}

/// Marginal KL of one ordering-ranking.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderingScore {
    /// Position of each item in the sampling order.
    pub ordering_ranking: Ranking,
    pub kl: f64,
}

/// Largest `n` for the exact-mode ordering study.
pub const MAX_STUDY_EXACT_N: usize = 6;

/// Marginal KL between Pseudo-Mallows and the exact posterior for every
/// ordering, sorted ascending (stable in enumeration order).
pub fn enumerate_ordering_study(data: &RankingDataset, alpha: Alpha, mode: EvalMode) -> Result<Vec<OrderingScore>> {
    alpha.require_positive()?;
    let n = data.n_items();
    check_exact_n(n)?;
    if matches!(mode, EvalMode::Exact) && n > MAX_STUDY_EXACT_N {
        return Err(Error::Capacity {
            what: "exact ordering study",
            size: n,
            limit: MAX_STUDY_EXACT_N,
        });
    }
    if let EvalMode::Sampled { draws: 0, .. } = mode {
        return Err(Error::InvalidValue("draws must be positive".into()));
    }
    let reference = MarginalProfile::from_distribution(&exact_posterior(data, alpha)?);
    let counts = RankCountMatrix::new(data);
    let perms: Vec<Ranking> = enumerate_permutations(n)?.collect();
    let a = alpha.per_item(n);
    let mut scores = perms
        .par_iter()
        .enumerate()
        .map(|(idx, x)| {
            let q = match mode {
                EvalMode::Exact => pm_exact_profile(&counts, a, x, &perms),
                EvalMode::Sampled { draws, seed } => {
                    pm_sampled_profile(&counts, alpha, x, draws, seed, &[idx as u64])?
                }
            };
            Ok(OrderingScore {
                ordering_ranking: x.clone(),
                kl: marginal_kl(&q, &reference)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    scores.sort_by(|a, b| a.kl.total_cmp(&b.kl));
    Ok(scores)
}

/// Minimum-cost perfect matching of a square matrix (Hungarian method,
/// `O(n^3)`). Returns `assignment[row] = column` and the total cost.
pub fn assignment_solve(cost: &[Vec<f64>]) -> Result<(Vec<usize>, f64)> {
    let n = cost.len();
    for row in cost {
        check_len(row.len(), n)?;
        if row.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidValue("assignment costs must be finite".into()));
        }
    }
    // potentials and matching are 1-based; index 0 is a sentinel column
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut min_v = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if reduced < min_v[j] {
                    min_v[j] = reduced;
                    way[j] = j0;
                }
                if min_v[j] < delta {
                    delta = min_v[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_v[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[row_of[j] - 1] = j - 1;
    }
    let total = assignment.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
    Ok((assignment, total))
}

/// One evaluated ordering-ranking in a search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchStep {
    pub ordering_ranking: Ranking,
    pub kl: f64,
    /// Footrule distance to the nearest V-set member of the reference consensus.
    pub v_distance: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub initial: SearchStep,
    /// One entry per completed iteration.
    pub steps: Vec<SearchStep>,
    /// Lowest-KL entry among `initial` and `steps`; earliest on ties.
    pub best: SearchStep,
}

impl SearchTrace {
    pub fn last(&self) -> &SearchStep {
        self.steps.last().unwrap_or(&self.initial)
    }
}

/// Largest `n` for exact-mode search.
pub const MAX_SEARCH_EXACT_N: usize = 5;
/// Largest `n` for sampled-mode search.
pub const MAX_SEARCH_SAMPLED_N: usize = 15;

/// Posterior marginals used as the search target: exact for `n <= 6`,
/// otherwise from a leap-and-shift chain with the given settings.
pub fn reference_profile(data: &RankingDataset, alpha: Alpha, chain: &McmcConfig) -> Result<MarginalProfile> {
    let n = data.n_items();
    if n <= MAX_STUDY_EXACT_N {
        return Ok(MarginalProfile::from_distribution(&exact_posterior(data, alpha)?));
    }
    let trace = mcmc_rho(data, alpha, chain)?;
    MarginalProfile::from_samples(&trace.rho_samples)
}

/// Iterative search over orderings: every `(item, rank)` pair is scored by the
/// marginal KL change of the corresponding leap-and-shift move, and the
/// minimum-cost matching of items to ranks becomes the next ordering-ranking.
///
/// `v_reference` is the consensus whose V-set distances are reported. The
/// search stops early in exact mode once an iteration leaves the ordering unchanged.
pub fn iterative_search(
    data: &RankingDataset,
    alpha: Alpha,
    init: &Ranking,
    max_iters: usize,
    mode: EvalMode,
    reference: &MarginalProfile,
    v_reference: &Ranking,
) -> Result<SearchTrace> {
    alpha.require_positive()?;
    let n = data.n_items();
    check_len(init.len(), n)?;
    check_len(reference.n(), n)?;
    check_len(v_reference.len(), n)?;
    let limit = match mode {
        EvalMode::Exact => MAX_SEARCH_EXACT_N,
        EvalMode::Sampled { draws, .. } => {
            if draws == 0 {
                return Err(Error::InvalidValue("draws must be positive".into()));
            }
            MAX_SEARCH_SAMPLED_N
        }
    };
    if n > limit {
        return Err(Error::Capacity {
            what: "ordering search",
            size: n,
            limit,
        });
    }
    let counts = RankCountMatrix::new(data);
    let perms: Vec<Ranking> = match mode {
        EvalMode::Exact => enumerate_permutations(n)?.collect(),
        EvalMode::Sampled { .. } => Vec::new(),
    };
    let a = alpha.per_item(n);
    let vset = VSet::new(v_reference);
    let score = |x: &Ranking, path: &[u64]| -> Result<f64> {
        let q = match mode {
            EvalMode::Exact => pm_exact_profile(&counts, a, x, &perms),
            EvalMode::Sampled { draws, seed } => pm_sampled_profile(&counts, alpha, x, draws, seed, path)?,
        };
        marginal_kl(&q, reference)
    };
    let step = |x: Ranking, kl: f64| -> Result<SearchStep> {
        Ok(SearchStep {
            v_distance: vset.nearest_distance(&x)?,
            ordering_ranking: x,
            kl,
        })
    };

    let initial = step(init.clone(), score(init, &[0, 0])?)?;
    let mut best = initial.clone();
    let mut current = initial.clone();
    let mut steps = Vec::new();
    for l in 1..=max_iters {
        let l64 = l as u64;
        let rows = (0..n)
            .into_par_iter()
            .map(|j| {
                (1..=n)
                    .map(|r| {
                        let candidate = ls_move(&current.ordering_ranking, j, r)?;
                        let kl = if candidate == current.ordering_ranking {
                            current.kl
                        } else {
                            score(&candidate, &[l64, (j * n + r) as u64])?
                        };
                        Ok(kl - current.kl)
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let (assignment, _) = assignment_solve(&rows)?;
        let next = Ranking::new(assignment.iter().map(|&c| c + 1).collect())?;
        let unchanged = next == current.ordering_ranking;
        let kl = if unchanged && matches!(mode, EvalMode::Exact) {
            current.kl
        } else {
            score(&next, &[l64, u64::MAX])?
        };
        current = step(next, kl)?;
        if current.kl < best.kl {
            best = current.clone();
        }
        steps.push(current.clone());
        if unchanged && matches!(mode, EvalMode::Exact) {
            break;
        }
    }
    Ok(SearchTrace {
        initial,
        steps,
        best,
    })
}

/// The grid value of `sigma` whose Pseudo-Mallows marginals (from `draws`
/// samples with a common seed) are closest to `reference`; ties go to the smaller value.
pub fn choose_sigma(
    data: &RankingDataset,
    alpha: Alpha,
    sigma_grid: &[f64],
    reference: &MarginalProfile,
    draws: usize,
    seed: u64,
) -> Result<f64> {
    Ok(sigma_scores(data, alpha, sigma_grid, reference, draws, seed)?
        .into_iter()
        .fold(None, |best: Option<(f64, f64)>, (s, kl)| match best {
            Some((bs, bk)) if bk < kl || (bk == kl && bs <= s) => Some((bs, bk)),
            _ => Some((s, kl)),
        })
        .expect("grid checked nonempty")
        .0)
}

/// `(sigma, marginal KL)` for every grid value.
pub fn sigma_scores(
    data: &RankingDataset,
    alpha: Alpha,
    sigma_grid: &[f64],
    reference: &MarginalProfile,
    draws: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if sigma_grid.is_empty() {
        return Err(Error::Empty("sigma grid is empty".into()));
    }
    check_len(reference.n(), data.n_items())?;
    sigma_grid
        .iter()
        .map(|&sigma| {
            let cfg = PseudoConfig::new(alpha, sigma, draws, seed)?;
            let set = sample_rho(data, &cfg)?;
            Ok((sigma, marginal_kl(&MarginalProfile::from_samples(&set.samples)?, reference)?))
        })
        .collect()
}

/// Default perturbation: zero for `alpha >= 2` with at least 500 users,
/// otherwise [`choose_sigma`].
pub fn resolve_sigma(
    data: &RankingDataset,
    alpha: Alpha,
    sigma_grid: &[f64],
    reference: &MarginalProfile,
    draws: usize,
    seed: u64,
) -> Result<f64> {
    if alpha.value() >= 2.0 && data.n_users() >= 500 {
        return Ok(0.0);
    }
    choose_sigma(data, alpha, sigma_grid, reference, draws, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::log_posterior_normalizer;
    use crate::mcmc::simulate_dataset;
    use crate::perm::footrule_distance;
    use crate::pseudo::exact_distribution;
    use rand::seq::SliceRandom;
    use rand::Rng;

    fn r(v: &[usize]) -> Ranking {
        Ranking::new(v.to_vec()).unwrap()
    }

    fn alpha(a: f64) -> Alpha {
        Alpha::new(a).unwrap()
    }

    fn profile(rows: &[&[f64]]) -> MarginalProfile {
        MarginalProfile::from_probabilities(rows.iter().map(|x| x.to_vec()).collect()).unwrap()
    }

    #[test]
    fn marginal_kl_examples() {
        let q = profile(&[&[0.75, 0.25], &[0.25, 0.75]]);
        let p = profile(&[&[0.5, 0.5], &[0.5, 0.5]]);
        assert!((marginal_kl(&q, &p).unwrap() - 0.26162407188227393).abs() < 1e-12);
        assert_eq!(marginal_kl(&q, &q).unwrap(), 0.0);
        let zero = profile(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(marginal_kl(&q, &zero), Err(Error::Divergence(_))));
        assert!(marginal_kl(&zero, &q).unwrap() > 0.0);
        let three = profile(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        assert!(marginal_kl(&q, &three).is_err());
    }

    #[test]
    fn marginal_kl_matches_double_enumeration() {
        let d = RankingDataset::from_rankings(vec![r(&[1, 2, 3]), r(&[2, 1, 3]), r(&[1, 3, 2]), r(&[3, 1, 2])]).unwrap();
        let a = alpha(2.0);
        let ord = Ordering::new(vec![3, 1, 2]).unwrap();
        let q = exact_distribution(&d, a, &ord).unwrap();
        let p = exact_posterior(&d, a).unwrap();
        let mut expected = 0.0;
        for item in 0..3 {
            for rank in 1..=3 {
                let qm: f64 = q.iter().filter(|(x, _)| x.rank(item) == rank).map(|(_, w)| w).sum();
                let pm: f64 = p.iter().filter(|(x, _)| x.rank(item) == rank).map(|(_, w)| w).sum();
                if qm > 0.0 {
                    expected += qm * (qm / pm).ln();
                }
            }
        }
        let got = marginal_kl(&MarginalProfile::from_distribution(&q), &MarginalProfile::from_distribution(&p)).unwrap();
        assert!((got - expected).abs() < 1e-12);
        // the enumeration-based profile agrees with the one from the distribution
        let fast = pm_exact_profile(&RankCountMatrix::new(&d), a.per_item(3), &ord.ranking(), &enumerate_permutations(3).unwrap().collect::<Vec<_>>());
        assert!((marginal_kl(&fast, &MarginalProfile::from_distribution(&p)).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn empirical_profile_is_smoothed() {
        let samples = vec![r(&[1, 2, 3]); 10];
        let prof = MarginalProfile::from_samples(&samples).unwrap();
        let probs = prof.probabilities();
        for row in &probs {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(row.iter().all(|&p| p > 0.0));
        }
        assert_eq!(prof.source(), ProfileSource::Empirical { draws: 10, epsilon: 0.05 });
    }

    #[test]
    fn kl_plus_elbo_is_log_normalizer() {
        let mut rng = stream_rng(1, &[]);
        for n in 1..=4 {
            let d = simulate_dataset(&Ranking::identity(n), alpha(1.0), 6, &mut rng).unwrap();
            let a = alpha(1.7);
            let p = exact_posterior(&d, a).unwrap();
            let log_z = log_posterior_normalizer(&d, a).unwrap();
            for x in enumerate_permutations(n).unwrap() {
                let ord = x.ordering();
                let q = exact_distribution(&d, a, &ord).unwrap();
                let lhs = kl_full(&q, &p).unwrap() + elbo_exact(&d, a, &ord).unwrap();
                assert!((lhs - log_z).abs() < 1e-10, "n={n}: {lhs} vs {log_z}");
            }
        }
    }

    #[test]
    fn elbo_edge_cases() {
        let one = RankingDataset::from_rankings(vec![r(&[1])]).unwrap();
        assert_eq!(elbo_exact(&one, alpha(3.0), &Ordering::identity(1)).unwrap(), 0.0);
        let big = RankingDataset::new(8, vec![Ranking::identity(8)]).unwrap();
        assert!(matches!(elbo_exact(&big, alpha(1.0), &Ordering::identity(8)), Err(Error::Capacity { .. })));
    }

    #[test]
    fn elbo_is_invariant_to_relabeling() {
        let d = RankingDataset::from_rankings(vec![r(&[1, 2, 3]), r(&[2, 3, 1]), r(&[1, 3, 2])]).unwrap();
        let a = alpha(2.2);
        for perm in enumerate_permutations(3).unwrap() {
            // item i is renamed to perm(i) - 1
            let relabel = |x: &Ranking| {
                let mut v = vec![0; 3];
                for i in 0..3 {
                    v[perm.rank(i) - 1] = x.rank(i);
                }
                Ranking::new(v).unwrap()
            };
            let d2 = RankingDataset::from_rankings(d.rankings().iter().map(relabel).collect()).unwrap();
            for x in enumerate_permutations(3).unwrap() {
                let e1 = elbo_exact(&d, a, &x.ordering()).unwrap();
                let e2 = elbo_exact(&d2, a, &relabel(&x).ordering()).unwrap();
                assert!((e1 - e2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ordering_study_shapes() {
        let d = RankingDataset::from_rankings(vec![r(&[1, 2]), r(&[1, 2]), r(&[2, 1])]).unwrap();
        let s = enumerate_ordering_study(&d, alpha(1.0), EvalMode::Exact).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.iter().all(|x| x.kl >= 0.0));
        assert!(s.windows(2).all(|w| w[0].kl <= w[1].kl));
        let big = RankingDataset::new(7, vec![Ranking::identity(7)]).unwrap();
        assert!(enumerate_ordering_study(&big, alpha(1.0), EvalMode::Exact).is_err());
        let sampled = enumerate_ordering_study(&d, alpha(1.0), EvalMode::Sampled { draws: 200, seed: 3 }).unwrap();
        assert_eq!(sampled.len(), 2);
    }

    #[test]
    fn assignment_examples() {
        let (m, c) = assignment_solve(&[vec![4.0, 1.0], vec![2.0, 3.0]]).unwrap();
        assert_eq!((m, c), (vec![1, 0], 3.0));
        let eye: Vec<Vec<f64>> = (0..5).map(|i| (0..5).map(|j| if i == j { 0.0 } else { 1.0 }).collect()).collect();
        assert_eq!(assignment_solve(&eye).unwrap(), (vec![0, 1, 2, 3, 4], 0.0));
        assert!(assignment_solve(&[vec![1.0, 2.0]]).is_err());
        assert!(assignment_solve(&[vec![f64::NAN]]).is_err());
        assert_eq!(assignment_solve(&[]).unwrap(), (vec![], 0.0));
    }

    #[test]
    fn assignment_matches_brute_force() {
        let mut rng = stream_rng(2, &[]);
        for (n, trials) in [(6usize, 100usize), (7, 20)] {
            for _ in 0..trials {
                let cost: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-5.0..5.0)).collect()).collect();
                let (m, c) = assignment_solve(&cost).unwrap();
                let mut seen = m.clone();
                seen.sort_unstable();
                assert_eq!(seen, (0..n).collect::<Vec<_>>());
                let brute = enumerate_permutations(n)
                    .unwrap()
                    .map(|p| (0..n).map(|i| cost[i][p.rank(i) - 1]).sum::<f64>())
                    .fold(f64::INFINITY, f64::min);
                assert!((c - brute).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn search_with_no_iterations_reports_initial() {
        let d = RankingDataset::from_rankings(vec![r(&[1, 2, 3]), r(&[1, 3, 2])]).unwrap();
        let a = alpha(2.0);
        let p = MarginalProfile::from_distribution(&exact_posterior(&d, a).unwrap());
        let t = iterative_search(&d, a, &r(&[1, 2, 3]), 0, EvalMode::Exact, &p, &r(&[1, 2, 3])).unwrap();
        assert!(t.steps.is_empty());
        assert_eq!(t.best, t.initial);
        assert_eq!(t.initial.v_distance, 2);
    }

    #[test]
    fn search_from_v_ranking_never_reports_worse() {
        let mut rng = stream_rng(3, &[]);
        let rho0 = Ranking::identity(5);
        let d = simulate_dataset(&rho0, alpha(2.0), 40, &mut rng).unwrap();
        let a = alpha(2.0);
        let p = MarginalProfile::from_distribution(&exact_posterior(&d, a).unwrap());
        let init = VSet::new(&rho0).sample(&mut rng);
        let t = iterative_search(&d, a, &init, 10, EvalMode::Exact, &p, &rho0).unwrap();
        assert!(t.best.kl <= t.initial.kl);
        assert!(t.steps.len() <= 10);
        assert!(t.steps.iter().all(|s| s.kl >= t.best.kl));
    }

    #[test]
    fn sampled_search_runs_beyond_exact_sizes() {
        let mut rng = stream_rng(4, &[]);
        let rho0 = Ranking::identity(7);
        let d = simulate_dataset(&rho0, alpha(3.0), 30, &mut rng).unwrap();
        let a = alpha(3.0);
        let chain = McmcConfig::new(7, 20_000, 1).with_burn_in(2_000);
        let p = reference_profile(&d, a, &chain).unwrap();
        assert!(matches!(p.source(), ProfileSource::Empirical { .. }));
        let mut init: Vec<usize> = (1..=7).collect();
        init.shuffle(&mut rng);
        let init = Ranking::new(init).unwrap();
        let t = iterative_search(&d, a, &init, 3, EvalMode::Sampled { draws: 200, seed: 5 }, &p, &rho0).unwrap();
        assert_eq!(t.steps.len(), 3);
        assert!(iterative_search(&d, a, &init, 3, EvalMode::Exact, &p, &rho0).is_err());
        assert!(footrule_distance(&t.best.ordering_ranking, &init).is_ok());
    }

    #[test]
    fn sigma_selection_rules() {
        let mut rng = stream_rng(5, &[]);
        let d = simulate_dataset(&Ranking::identity(5), alpha(2.0), 30, &mut rng).unwrap();
        let a = alpha(2.0);
        let p = MarginalProfile::from_distribution(&exact_posterior(&d, a).unwrap());
        assert_eq!(choose_sigma(&d, a, &[0.0], &p, 200, 1).unwrap(), 0.0);
        assert!(choose_sigma(&d, a, &[], &p, 200, 1).is_err());
        assert!(choose_sigma(&d, a, &[-1.0], &p, 200, 1).is_err());
        let big = d.replicated(20);
        assert_eq!(resolve_sigma(&big, a, &[1.0, 2.0], &p, 200, 1).unwrap(), 0.0);
    }
}
