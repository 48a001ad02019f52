//! Click data: per-user augmentation sampler, the alternating Pseudo-Mallows
//! loop, top-k recommendations, click-count models and scale tuning.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Alpha, ClickDataset, ClickVector, RankCountMatrix, RankingDataset};
use crate::error::{Error, Result};
use crate::mcmc::sample_mallows;
use crate::perm::{rank_of, Ranking, VSet};
use crate::pseudo::{
    check_grid, closest, estimate_rho_hat, mean_pairwise_cosine, sequential_draw,
    PseudoConfig, PseudoMallowsSampler,
};
use crate::rng::stream_rng;
use crate::summary::SampleSet;

/// Default number of alternation sweeps discarded before collection.
pub const DEFAULT_WARM_UP: usize = 10;

/// Ordering distribution used inside a group of the per-user sampler.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupOrdering {
    /// Uniformly random order of the group's items.
    #[default]
    Uniform,
    /// A uniform member of the V-set of the group consensus.
    VSet,
}

/// Relative ranks `1..=items.len()` of `items` under `rho`.
fn group_consensus(rho: &Ranking, items: &[usize]) -> Vec<usize> {
    let mut by_rank: Vec<usize> = (0..items.len()).collect();
    by_rank.sort_by_key(|&k| rho.rank(items[k]));
    let mut out = vec![0; items.len()];
    for (pos, k) in by_rank.into_iter().enumerate() {
        out[k] = pos + 1;
    }
    out
}

/// Samples ranks `1..=items.len()` for `items` around their relative order in
/// `rho`, writing `offset + rank` into `ranks`.
fn sample_group<R: Rng + ?Sized>(
    items: &[usize],
    rho: &Ranking,
    a: f64,
    offset: usize,
    order: GroupOrdering,
    ranks: &mut [usize],
    rng: &mut R,
) {
    let m = items.len();
    if m == 0 {
        return;
    }
    let consensus = group_consensus(rho, items);
    // positions within `items`, in sampling order
    let sequence: Vec<usize> = match order {
        GroupOrdering::Uniform => {
            let mut s: Vec<usize> = (0..m).collect();
            s.shuffle(rng);
            s
        }
        GroupOrdering::VSet => VSet::new(&Ranking::from_vec_unchecked(consensus.clone()))
            .sample(rng)
            .ordering()
            .items()
            .collect(),
    };
    let mut local = vec![0; m];
    let mut available: Vec<usize> = (1..=m).collect();
    sequential_draw(
        sequence.into_iter(),
        &mut available,
        a,
        |k, r| consensus[k].abs_diff(r) as f64,
        &mut local,
        rng,
    );
    for (k, &item) in items.iter().enumerate() {
        ranks[item] = offset + local[k];
    }
}

/// A full ranking compatible with `clicks`, drawn around `rho`: clicked and
/// unclicked items are sampled separately against their within-group
/// consensus and unclicked ranks are shifted below the clicked ones.
pub fn sample_user_ranking<R: Rng + ?Sized>(
    clicks: &ClickVector,
    alpha: Alpha,
    rho: &Ranking,
    rng: &mut R,
) -> Result<Ranking> {
    alpha.require_positive()?;
    let n = clicks.len();
    if rho.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: rho.len(),
        });
    }
    Ok(draw_user(clicks, alpha.per_item(n), rho, rng))
}

fn draw_user<R: Rng + ?Sized>(clicks: &ClickVector, a: f64, rho: &Ranking, rng: &mut R) -> Ranking {
    let clicked: Vec<usize> = clicks.clicked().collect();
    let unclicked: Vec<usize> = clicks.unclicked().collect();
    let mut ranks = vec![0; clicks.len()];
    let order = GroupOrdering::Uniform;
    sample_group(&clicked, rho, a, 0, order, &mut ranks, rng);
    sample_group(&unclicked, rho, a, clicked.len(), order, &mut ranks, rng);
    Ranking::from_vec_unchecked(ranks)
}

/// The per-user sampler without click constraints: all items form one group.
pub fn sample_ranking_given_consensus<R: Rng + ?Sized>(
    rho: &Ranking,
    alpha: Alpha,
    order: GroupOrdering,
    rng: &mut R,
) -> Result<Ranking> {
    alpha.require_positive()?;
    let n = rho.len();
    let items: Vec<usize> = (0..n).collect();
    let mut ranks = vec![0; n];
    sample_group(&items, rho, alpha.per_item(n), 0, order, &mut ranks, rng);
    Ok(Ranking::from_vec_unchecked(ranks))
}

/// Items ranked by descending click frequency; ties by item index.
pub fn initial_consensus(clicks: &ClickDataset) -> Result<Ranking> {
    let neg: Vec<f64> = clicks.click_frequencies().iter().map(|f| -f).collect();
    rank_of(&neg)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClickingConfig {
    pub base: PseudoConfig,
    #[serde(default = "default_warm_up")]
    pub warm_up: usize,
}

fn default_warm_up() -> usize {
    DEFAULT_WARM_UP
}

impl ClickingConfig {
    pub fn new(base: PseudoConfig) -> Self {
        Self {
            base,
            warm_up: DEFAULT_WARM_UP,
        }
    }

    pub fn with_warm_up(mut self, warm_up: usize) -> Self {
        self.warm_up = warm_up;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClickingSamples {
    pub rho: SampleSet,
    /// One sample set per user, aligned with `rho`.
    pub users: Vec<SampleSet>,
}

/// Alternates (i) a draw of every user's latent ranking given the current
/// consensus and (ii) a Pseudo-Mallows draw of the consensus given those
/// rankings. The first `warm_up` sweeps are discarded.
///
/// User `j` at sweep `t` uses the RNG stream `(seed, 1, t, j)` and the
/// consensus step uses `(seed, 0, t)`, so results do not depend on the
/// thread count.
pub fn pseudo_clicking(clicks: &ClickDataset, cfg: &ClickingConfig) -> Result<ClickingSamples> {
    let base = &cfg.base;
    base.validate()?;
    let n = clicks.n_items();
    let a = base.alpha.per_item(n);
    let timer = Instant::now();
    let mut rho = initial_consensus(clicks)?;
    let sweeps = cfg.warm_up + base.n_samples;
    let mut rho_samples = Vec::with_capacity(base.n_samples);
    let mut user_samples: Vec<Vec<Ranking>> = vec![Vec::with_capacity(base.n_samples); clicks.n_users()];

    for t in 0..sweeps {
        let current = &rho;
        let latent: Vec<Ranking> = clicks
            .users()
            .par_iter()
            .enumerate()
            .map(|(j, c)| draw_user(c, a, current, &mut stream_rng(base.seed, &[1, t as u64, j as u64])))
            .collect();
        let data = RankingDataset::new(n, latent)?;
        let rho_hat = estimate_rho_hat(&data)?;
        let sampler = PseudoMallowsSampler::from_counts(RankCountMatrix::new(&data), base.alpha, &rho_hat, base.sigma)?;
        rho = sampler.draw(&mut stream_rng(base.seed, &[0, t as u64])).1;
        if t >= cfg.warm_up {
            rho_samples.push(rho.clone());
            for (trace, r) in user_samples.iter_mut().zip(data.rankings()) {
                trace.push(r.clone());
            }
        }
    }

    let wall_clock = timer.elapsed().as_secs_f64();
    Ok(ClickingSamples {
        rho: SampleSet::new(rho_samples, base.seed, wall_clock),
        users: user_samples
            .into_iter()
            .map(|s| SampleSet::new(s, base.seed, wall_clock))
            .collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub item: usize,
    pub probability: f64,
}

/// For every unclicked item, the fraction of samples ranking it in `[c + 1, c + k]`.
pub fn topk_probabilities(
    user_samples: &[Ranking],
    clicks: &ClickVector,
    k: usize,
) -> Result<Vec<Recommendation>> {
    let n = clicks.len();
    let c = clicks.count();
    if k == 0 || k > n - c {
        return Err(Error::InvalidValue(format!(
            "k = {k} outside 1..={} for a user with {c} clicks",
            n - c
        )));
    }
    if user_samples.is_empty() {
        return Err(Error::Empty("no samples for user".into()));
    }
    if let Some(bad) = user_samples.iter().find(|s| s.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad.len(),
        });
    }
    let total = user_samples.len() as f64;
    Ok(clicks
        .unclicked()
        .map(|item| {
            let hits = user_samples
                .iter()
                .filter(|s| (c + 1..=c + k).contains(&s.rank(item)))
                .count();
            Recommendation {
                item,
                probability: hits as f64 / total,
            }
        })
        .collect())
}

/// The `k` unclicked items most often sampled in the window just below the
/// clicked ones; ties by item index.
pub fn recommend_topk(
    user_samples: &SampleSet,
    clicks: &ClickVector,
    k: usize,
) -> Result<Vec<Recommendation>> {
    let mut probs = topk_probabilities(&user_samples.samples, clicks, k)?;
    probs.sort_by(|a, b| b.probability.total_cmp(&a.probability).then(a.item.cmp(&b.item)));
    probs.truncate(k);
    Ok(probs)
}

/// Fraction of recommended items whose true rank lies in `[c + 1, c + k]`.
pub fn recommendation_accuracy(recs: &[Recommendation], truth: &Ranking, clicks: &ClickVector) -> f64 {
    if recs.is_empty() {
        return 0.0;
    }
    let c = clicks.count();
    let k = recs.len();
    let hits = recs
        .iter()
        .filter(|r| (c + 1..=c + k).contains(&truth.rank(r.item)))
        .count();
    hits as f64 / k as f64
}

/// Distribution of the number of clicks per user.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CountModel {
    /// Poisson(`lambda`) restricted to `lo..=hi`.
    TruncatedPoisson { lambda: f64, lo: usize, hi: usize },
    /// Exponential(`mean`) rounded to the nearest integer and restricted to `lo..=hi`.
    TruncatedExponential { mean: f64, lo: usize, hi: usize },
    /// Resampling of observed counts.
    Empirical { counts: Vec<usize> },
}

impl CountModel {
    /// Probabilities of the counts `0..=n`.
    pub fn pmf(&self, n: usize) -> Result<Vec<f64>> {
        let mut w = vec![0.0; n + 1];
        match self {
            Self::TruncatedPoisson { lambda, lo, hi } => {
                check_bounds(*lo, *hi, n)?;
                if !(*lambda > 0.0) || !lambda.is_finite() {
                    return Err(Error::InvalidValue(format!("Poisson rate {lambda} must be positive")));
                }
                let mut log_fact = 0.0;
                let mut log_p = vec![f64::NEG_INFINITY; n + 1];
                for c in 0..=*hi {
                    if c > 0 {
                        log_fact += (c as f64).ln();
                    }
                    if c >= *lo {
                        log_p[c] = c as f64 * lambda.ln() - lambda - log_fact;
                    }
                }
                let max = log_p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                for (wi, lp) in w.iter_mut().zip(&log_p) {
                    *wi = (lp - max).exp();
                }
            }
            Self::TruncatedExponential { mean, lo, hi } => {
                check_bounds(*lo, *hi, n)?;
                if !(*mean > 0.0) || !mean.is_finite() {
                    return Err(Error::InvalidValue(format!("exponential mean {mean} must be positive")));
                }
                let cdf = |x: f64| if x <= 0.0 { 0.0 } else { 1.0 - (-x / mean).exp() };
                for c in *lo..=*hi {
                    w[c] = cdf(c as f64 + 0.5) - cdf(c as f64 - 0.5);
                }
            }
            Self::Empirical { counts } => {
                if counts.is_empty() {
                    return Err(Error::Empty("no observed counts".into()));
                }
                for &c in counts {
                    if c > n {
                        return Err(Error::InvalidValue(format!("count {c} exceeds {n} items")));
                    }
                    w[c] += 1.0;
                }
            }
        }
        let total: f64 = w.iter().sum();
        if !(total > 0.0) {
            return Err(Error::EmptySupport("count model has no mass on its support".into()));
        }
        w.iter_mut().for_each(|x| *x /= total);
        Ok(w)
    }

    /// Draws one count for `n` items.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<usize> {
        let pmf = self.pmf(n)?;
        Ok(sample_pmf(&pmf, rng))
    }

    /// Fits the Poisson rate so the truncated mean on `lo..=hi` matches the
    /// observed mean, with bounds at the observed extremes (`lo >= 1`).
    pub fn fit_truncated_poisson(observed: &[usize], n: usize) -> Result<Self> {
        let positive: Vec<usize> = observed.iter().copied().filter(|&c| c > 0).collect();
        if positive.is_empty() {
            return Err(Error::Empty("no positive click counts to fit".into()));
        }
        let lo = *positive.iter().min().expect("nonempty");
        let hi = (*positive.iter().max().expect("nonempty")).min(n);
        let target = positive.iter().sum::<usize>() as f64 / positive.len() as f64;
        if lo == hi {
            return Ok(Self::TruncatedPoisson { lambda: lo as f64, lo, hi });
        }
        let mean_at = |lambda: f64| -> Result<f64> {
            let pmf = Self::TruncatedPoisson { lambda, lo, hi }.pmf(n)?;
            Ok(pmf.iter().enumerate().map(|(c, p)| c as f64 * p).sum())
        };
        // the truncated mean is increasing in the rate
        let (mut low, mut high) = (1e-6, 2.0 * hi as f64 + 10.0);
        for _ in 0..100 {
            let mid = 0.5 * (low + high);
            if mean_at(mid)? < target {
                low = mid;
            } else {
                high = mid;
            }
        }
        Ok(Self::TruncatedPoisson {
            lambda: 0.5 * (low + high),
            lo,
            hi,
        })
    }
}

fn check_bounds(lo: usize, hi: usize, n: usize) -> Result<()> {
    if lo < 1 || hi > n || lo > hi {
        return Err(Error::InvalidValue(format!(
            "count bounds {lo}..={hi} infeasible for {n} items"
        )));
    }
    Ok(())
}

fn sample_pmf<R: Rng + ?Sized>(pmf: &[f64], rng: &mut R) -> usize {
    let u = rng.random::<f64>();
    let mut cum = 0.0;
    for (c, p) in pmf.iter().enumerate() {
        cum += p;
        if u < cum {
            return c;
        }
    }
    pmf.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Marks each user's top `c_j` items as clicked, with `c_j` drawn from `model`.
pub fn binarize<R: Rng + ?Sized>(
    data: &RankingDataset,
    model: &CountModel,
    rng: &mut R,
) -> Result<ClickDataset> {
    let n = data.n_items();
    let pmf = model.pmf(n)?;
    let users = data
        .rankings()
        .iter()
        .map(|r| {
            let c = sample_pmf(&pmf, rng);
            ClickVector::new(r.as_slice().iter().map(|&x| x <= c).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    ClickDataset::new(n, users)
}

/// Mean pairwise cosine similarity of the click vectors of users with at least one click.
pub fn click_similarity(clicks: &ClickDataset) -> Result<f64> {
    let vectors: Vec<Vec<f64>> = clicks
        .users()
        .iter()
        .filter(|u| u.count() > 0)
        .map(|u| u.bits().iter().map(|&b| f64::from(u8::from(b))).collect())
        .collect();
    if vectors.len() < 2 {
        return Err(Error::InvalidValue(format!(
            "need two users with clicks, found {}",
            vectors.len()
        )));
    }
    mean_pairwise_cosine(&vectors)
}

/// How the count model for simulated clicks is fitted to the observed counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountFamily {
    #[default]
    Empirical,
    TruncatedPoisson,
}

impl CountFamily {
    pub fn fit(self, clicks: &ClickDataset) -> Result<CountModel> {
        let counts: Vec<usize> = clicks.users().iter().map(ClickVector::count).collect();
        match self {
            Self::Empirical => Ok(CountModel::Empirical { counts }),
            Self::TruncatedPoisson => CountModel::fit_truncated_poisson(&counts, clicks.n_items()),
        }
    }
}

/// Simulated binary similarity for every grid value.
pub fn simulated_click_similarity_curve<R: Rng + ?Sized>(
    n: usize,
    alpha_grid: &[Alpha],
    model: &CountModel,
    sim_users: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_grid(alpha_grid)?;
    let center = Ranking::identity(n);
    alpha_grid
        .iter()
        .map(|&a| {
            let sim = RankingDataset::new(n, sample_mallows(&center, a, sim_users, rng)?)?;
            click_similarity(&binarize(&sim, model, rng)?)
        })
        .collect()
}

/// Grid search for the scale from clicks: simulated Mallows data are
/// binarized with a count model fitted to the observed click counts, and the
/// grid value whose binary similarity is closest to the observed one wins.
pub fn estimate_alpha_clicks<R: Rng + ?Sized>(
    clicks: &ClickDataset,
    alpha_grid: &[Alpha],
    family: CountFamily,
    sim_users: usize,
    rng: &mut R,
) -> Result<Alpha> {
    check_grid(alpha_grid)?;
    let observed = click_similarity(clicks)?;
    let model = family.fit(clicks)?;
    let curve = simulated_click_similarity_curve(clicks.n_items(), alpha_grid, &model, sim_users, rng)?;
    Ok(alpha_grid[closest(&curve, observed)])
}
