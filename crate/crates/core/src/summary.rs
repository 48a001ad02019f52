//! Sample containers and point summaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{footrule_unchecked, Ranking};

/// A sequence of sampled rankings with the seed and sampler time that produced them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub samples: Vec<Ranking>,
    pub seed: u64,
    /// Seconds spent drawing the samples.
    pub wall_clock: f64,
}

impl SampleSet {
    pub fn new(samples: Vec<Ranking>, seed: u64, wall_clock: f64) -> Self {
        Self {
            samples,
            seed,
            wall_clock,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn n_items(&self) -> Option<usize> {
        self.samples.first().map(Ranking::len)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Ranking> {
        self.samples.iter()
    }

    pub fn cp_consensus(&self) -> Result<Ranking> {
        cp_consensus(&self.samples)
    }

    /// `counts[item][rank - 1]`.
    pub fn marginal_counts(&self) -> Result<Vec<Vec<u64>>> {
        marginal_counts(&self.samples)
    }

    /// Footrule distance of every sample to `reference`.
    pub fn distances_to(&self, reference: &Ranking) -> Result<Vec<f64>> {
        self.samples
            .iter()
            .map(|s| {
                if s.len() != reference.len() {
                    return Err(Error::DimensionMismatch {
                        expected: reference.len(),
                        found: s.len(),
                    });
                }
                Ok(footrule_unchecked(s.as_slice(), reference.as_slice()) as f64)
            })
            .collect()
    }
}

pub fn marginal_counts(samples: &[Ranking]) -> Result<Vec<Vec<u64>>> {
    let n = samples
        .first()
        .ok_or_else(|| Error::Empty("no samples".into()))?
        .len();
    let mut counts = vec![vec![0u64; n]; n];
    for s in samples {
        if s.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: s.len(),
            });
        }
        for (i, &r) in s.as_slice().iter().enumerate() {
            counts[i][r - 1] += 1;
        }
    }
    Ok(counts)
}

/// Cumulative-probability consensus. For ranks `k = 1..n` in turn, the
/// unassigned item with the largest empirical `P(R_item <= k)` takes rank `k`;
/// ties go to the lower item index.
pub fn cp_consensus(samples: &[Ranking]) -> Result<Ranking> {
    let counts = marginal_counts(samples)?;
    let n = counts.len();
    let mut cumulative = vec![0u64; n];
    let mut ranks = vec![0usize; n];
    for k in 1..=n {
        for (c, row) in cumulative.iter_mut().zip(&counts) {
            *c += row[k - 1];
        }
        let pick = (0..n)
            .filter(|&i| ranks[i] == 0)
            .max_by(|&a, &b| cumulative[a].cmp(&cumulative[b]).then(b.cmp(&a)))
            .expect("an item is unassigned while ranks remain");
        ranks[pick] = k;
    }
    Ranking::new(ranks)
}

/// Lag-1 sample autocorrelation; `None` for fewer than two values or zero variance.
pub fn lag1_autocorrelation(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    if var == 0.0 {
        return None;
    }
    let cov: f64 = xs.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
    Some(cov / var)
}
