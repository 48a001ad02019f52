//! Datasets and the scale parameter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::Ranking;

/// Mallows scale parameter. Zero is allowed only by the enumeration oracles.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidValue(format!(
                "alpha must be finite and nonnegative, got {value}"
            )));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Samplers reject the uniform limit.
    pub fn require_positive(self) -> Result<Self> {
        if self.0 > 0.0 {
            Ok(self)
        } else {
            Err(Error::InvalidValue(format!(
                "alpha must be positive for inference, got {}",
                self.0
            )))
        }
    }

    /// The per-unit-distance exponent `alpha / n`.
    pub(crate) fn per_item(self, n: usize) -> f64 {
        self.0 / n as f64
    }
}

/// `N` complete rankings of the same `n` items.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankingDataset {
    n: usize,
    rankings: Vec<Ranking>,
    #[serde(default)]
    labels: Option<Vec<String>>,
}

impl RankingDataset {
    pub fn new(n: usize, rankings: Vec<Ranking>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidValue("a dataset needs at least one item".into()));
        }
        if let Some(bad) = rankings.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Ok(Self {
            n,
            rankings,
            labels: None,
        })
    }

    /// Infers `n` from the first ranking.
    pub fn from_rankings(rankings: Vec<Ranking>) -> Result<Self> {
        let n = rankings
            .first()
            .map(Ranking::len)
            .ok_or_else(|| Error::Empty("no rankings".into()))?;
        Self::new(n, rankings)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n_items(&self) -> usize {
        self.n
    }

    pub fn n_users(&self) -> usize {
        self.rankings.len()
    }

    pub fn rankings(&self) -> &[Ranking] {
        &self.rankings
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Per-item mean rank.
    pub fn mean_ranks(&self) -> Result<Vec<f64>> {
        if self.rankings.is_empty() {
            return Err(Error::Empty("mean ranks of an empty dataset".into()));
        }
        let mut sums = vec![0.0; self.n];
        for r in &self.rankings {
            for (s, &v) in sums.iter_mut().zip(r.as_slice()) {
                *s += v as f64;
            }
        }
        let users = self.rankings.len() as f64;
        Ok(sums.into_iter().map(|s| s / users).collect())
    }

    /// The dataset with every ranking repeated `times` times.
    pub fn replicated(&self, times: usize) -> Self {
        let rankings = (0..times).flat_map(|_| self.rankings.iter().cloned()).collect();
        Self {
            n: self.n,
            rankings,
            labels: self.labels.clone(),
        }
    }
}

/// One user's clicks; `true` marks a clicked item.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClickVector {
    bits: Vec<bool>,
}

impl ClickVector {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::Empty("click vector with no items".into()));
        }
        Ok(Self { bits })
    }

    pub fn from_01(values: &[u8]) -> Result<Self> {
        let bits = values
            .iter()
            .enumerate()
            .map(|(i, &v)| match v {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::InvalidValue(format!(
                    "click entry {other} at position {} is not 0 or 1",
                    i + 1
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(bits)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn is_clicked(&self, item: usize) -> bool {
        self.bits[item]
    }

    /// Number of clicked items.
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn clicked(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn unclicked(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| !b).map(|(i, _)| i)
    }

    /// Whether `r` ranks every clicked item above every unclicked one.
    pub fn is_compatible(&self, r: &Ranking) -> bool {
        let c = self.count();
        r.len() == self.len()
            && self
                .bits
                .iter()
                .zip(r.as_slice())
                .all(|(&b, &rank)| if b { rank <= c } else { rank > c })
    }
}

/// Click vectors of `N` users over the same `n` items.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClickDataset {
    n: usize,
    users: Vec<ClickVector>,
    #[serde(default)]
    labels: Option<Vec<String>>,
}

impl ClickDataset {
    pub fn new(n: usize, users: Vec<ClickVector>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidValue("a dataset needs at least one item".into()));
        }
        if let Some(bad) = users.iter().find(|u| u.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Ok(Self {
            n,
            users,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n_items(&self) -> usize {
        self.n
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn users(&self) -> &[ClickVector] {
        &self.users
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Fraction of users who clicked each item.
    pub fn click_frequencies(&self) -> Vec<f64> {
        let mut freq = vec![0.0; self.n];
        for u in &self.users {
            for i in u.clicked() {
                freq[i] += 1.0;
            }
        }
        let users = self.users.len().max(1) as f64;
        freq.iter_mut().for_each(|f| *f /= users);
        freq
    }
}

/// Aggregated rank counts of a ranking dataset.
///
/// `cost(item, l)` is `sum_j |R^j_item - l|`, precomputed for every item and
/// rank from per-item prefix sums, so samplers never loop over users.
#[derive(Clone, Debug, PartialEq)]
pub struct RankCountMatrix {
    n: usize,
    users: usize,
    counts: Vec<u64>,
    cost: Vec<f64>,
}

impl RankCountMatrix {
    pub fn new(data: &RankingDataset) -> Self {
        let n = data.n_items();
        let mut counts = vec![0u64; n * n];
        for r in data.rankings() {
            for (item, &rank) in r.as_slice().iter().enumerate() {
                counts[item * n + rank - 1] += 1;
            }
        }
        Self::from_counts(n, data.n_users(), counts)
    }

    pub(crate) fn from_counts(n: usize, users: usize, counts: Vec<u64>) -> Self {
        let mut cost = vec![0.0; n * n];
        for item in 0..n {
            let row = &counts[item * n..(item + 1) * n];
            let total_count: u64 = row.iter().sum();
            let total_sum: u64 = row.iter().enumerate().map(|(r, &c)| (r as u64 + 1) * c).sum();
            // running count and rank-weighted sum of ranks <= l
            let (mut below_count, mut below_sum) = (0u64, 0u64);
            for l in 1..=n {
                below_count += row[l - 1];
                below_sum += l as u64 * row[l - 1];
                let l64 = l as u64;
                let lower = l64 * below_count - below_sum;
                let upper = (total_sum - below_sum) - l64 * (total_count - below_count);
                cost[item * n + l - 1] = (lower + upper) as f64;
            }
        }
        Self {
            n,
            users,
            counts,
            cost,
        }
    }

    pub fn n_items(&self) -> usize {
        self.n
    }

    pub fn n_users(&self) -> usize {
        self.users
    }

    /// Number of users giving `item` (0-based) rank `rank` (1-based).
    pub fn count(&self, item: usize, rank: usize) -> u64 {
        self.counts[item * self.n + rank - 1]
    }

    /// `sum_j |R^j_item - rank|`.
    pub fn cost(&self, item: usize, rank: usize) -> f64 {
        self.cost[item * self.n + rank - 1]
    }

    /// Costs of `item` for ranks `1..=n`.
    pub fn cost_row(&self, item: usize) -> &[f64] {
        &self.cost[item * self.n..(item + 1) * self.n]
    }

    /// `sum_j d(R^j, rho)`.
    pub fn total_distance(&self, rho: &Ranking) -> f64 {
        rho.as_slice()
            .iter()
            .enumerate()
            .map(|(item, &rank)| self.cost(item, rank))
            .sum()
    }
}
