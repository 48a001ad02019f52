//! Permutation primitives.
//!
//! A [`Ranking`] stores, for every item, the rank it receives (rank 1 is the
//! most preferred). An [`Ordering`] is its inverse: position `m` holds the item
//! that has rank `m`. Both carry 1-based values; item *arguments* to functions
//! are 0-based indices into a ranking.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `n` accepted by [`enumerate_permutations`].
pub const MAX_ENUMERATION_N: usize = 10;

fn check_permutation(values: &[usize], what: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidPermutation(format!("empty {what}")));
    }
    let n = values.len();
    let mut seen = vec![false; n];
    for (pos, &v) in values.iter().enumerate() {
        if v == 0 || v > n {
            return Err(Error::InvalidPermutation(format!(
                "{what} entry {v} at position {} is outside 1..={n}",
                pos + 1
            )));
        }
        if std::mem::replace(&mut seen[v - 1], true) {
            return Err(Error::InvalidPermutation(format!(
                "{what} entry {v} is repeated"
            )));
        }
    }
    Ok(())
}

fn invert(values: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; values.len()];
    for (pos, &v) in values.iter().enumerate() {
        inv[v - 1] = pos + 1;
    }
    inv
}

/// Ranks of `n` items, a permutation of `1..=n`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Ranking(Vec<usize>);

impl Ranking {
    pub fn new(ranks: Vec<usize>) -> Result<Self> {
        check_permutation(&ranks, "ranking")?;
        Ok(Self(ranks))
    }

    /// The ranking `(1, 2, ..., n)`.
    pub fn identity(n: usize) -> Self {
        Self((1..=n).collect())
    }

    pub(crate) fn from_vec_unchecked(ranks: Vec<usize>) -> Self {
        debug_assert!(check_permutation(&ranks, "ranking").is_ok());
        Self(ranks)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Rank of the 0-based `item`.
    pub fn rank(&self, item: usize) -> usize {
        self.0[item]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn ordering(&self) -> Ordering {
        ordering_of(self)
    }
}

impl TryFrom<Vec<usize>> for Ranking {
    type Error = Error;

    fn try_from(value: Vec<usize>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<Ranking> for Vec<usize> {
    fn from(value: Ranking) -> Self {
        value.0
    }
}

impl fmt::Debug for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ranking{:?}", self.0)
    }
}

impl fmt::Display for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|r| r.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Items listed from rank 1 to rank n; entries are 1-based item labels.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Ordering(Vec<usize>);

impl Ordering {
    pub fn new(items: Vec<usize>) -> Result<Self> {
        check_permutation(&items, "ordering")?;
        Ok(Self(items))
    }

    pub fn identity(n: usize) -> Self {
        Self((1..=n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// 0-based item indices in sequence order.
    pub fn items(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.0.iter().map(|&i| i - 1)
    }

    pub fn ranking(&self) -> Ranking {
        ranking_of(self)
    }
}

impl TryFrom<Vec<usize>> for Ordering {
    type Error = Error;

    fn try_from(value: Vec<usize>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<Ordering> for Vec<usize> {
    fn from(value: Ordering) -> Self {
        value.0
    }
}

impl fmt::Debug for Ordering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ordering{:?}", self.0)
    }
}

pub fn ordering_of(r: &Ranking) -> Ordering {
    Ordering(invert(&r.0))
}

pub fn ranking_of(o: &Ordering) -> Ranking {
    Ranking(invert(&o.0))
}

/// Footrule (L1) distance between two rankings.
pub fn footrule_distance(a: &Ranking, b: &Ranking) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(footrule_unchecked(a.as_slice(), b.as_slice()))
}

pub(crate) fn footrule_unchecked(a: &[usize], b: &[usize]) -> usize {
    a.iter().zip(b).map(|(&x, &y)| x.abs_diff(y)).sum()
}

/// Rank vector of a real vector: the smallest value gets rank 1.
///
/// Exact ties are broken by position, so the result is always a permutation.
pub fn rank_of(x: &[f64]) -> Result<Ranking> {
    if x.is_empty() {
        return Err(Error::Empty("cannot rank an empty vector".into()));
    }
    if let Some(pos) = x.iter().position(|v| v.is_nan()) {
        return Err(Error::InvalidValue(format!("NaN at position {}", pos + 1)));
    }
    let mut idx: Vec<usize> = (0..x.len()).collect();
    // stable sort keeps ascending index among ties
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0; x.len()];
    for (r, &i) in idx.iter().enumerate() {
        ranks[i] = r + 1;
    }
    Ok(Ranking(ranks))
}

/// Leap-and-shift relocation: `item` (0-based) moves to rank `dest` and the
/// items ranked between its old and new rank shift by one towards the gap.
pub fn ls_move(ranking: &Ranking, item: usize, dest: usize) -> Result<Ranking> {
    let n = ranking.len();
    if item >= n {
        return Err(Error::IndexOutOfRange { index: item, len: n });
    }
    if dest == 0 || dest > n {
        return Err(Error::InvalidValue(format!("rank {dest} outside 1..={n}")));
    }
    let mut out = ranking.clone();
    ls_move_in_place(&mut out.0, item, dest);
    Ok(out)
}

pub(crate) fn ls_move_in_place(ranks: &mut [usize], item: usize, dest: usize) {
    let q = ranks[item];
    if q < dest {
        for r in ranks.iter_mut() {
            if *r > q && *r <= dest {
                *r -= 1;
            }
        }
    } else if q > dest {
        for r in ranks.iter_mut() {
            if *r >= dest && *r < q {
                *r += 1;
            }
        }
    }
    ranks[item] = dest;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct VPair {
    // 0-based items: `lower_item` holds the smaller base rank of the two
    lower_item: usize,
    upper_item: usize,
    // the pair shares ranks `first` and `first + 1`
    first: usize,
}

/// The V-set of a base ranking: rankings that put the middle item(s) of the
/// base first and then move outwards pair by pair, each pair's orientation
/// being free.
#[derive(Clone, Debug)]
pub struct VSet {
    base: Ranking,
    center: Option<usize>,
    pairs: Vec<VPair>,
}

impl VSet {
    pub fn new(base: &Ranking) -> Self {
        let n = base.len();
        let o: Vec<usize> = base.ordering().items().collect();
        // o[k - 1] is the 0-based item with base rank k
        let at = |rank: usize| o[rank - 1];
        let mut pairs = Vec::with_capacity(n / 2);
        let center;
        if n % 2 == 1 {
            let m = n.div_ceil(2);
            center = Some(at(m));
            for k in 1..m {
                pairs.push(VPair {
                    lower_item: at(m - k),
                    upper_item: at(m + k),
                    first: 2 * k,
                });
            }
        } else {
            let m = n / 2;
            center = None;
            for k in 0..m {
                pairs.push(VPair {
                    lower_item: at(m - k),
                    upper_item: at(m + k + 1),
                    first: 2 * k + 1,
                });
            }
        }
        Self {
            base: base.clone(),
            center,
            pairs,
        }
    }

    pub fn base(&self) -> &Ranking {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.base.len()
    }

    /// Number of independent pair orientations; the set has `2^free_pairs()` members.
    pub fn free_pairs(&self) -> usize {
        self.pairs.len()
    }

    /// Cardinality, or `None` when it does not fit in a `u128`.
    pub fn cardinality(&self) -> Option<u128> {
        1u128.checked_shl(self.free_pairs() as u32)
    }

    /// The member selected by `flip[k]` for each pair (`false` gives the
    /// smaller rank of the pair to the item ranked higher in the base).
    pub fn member(&self, flip: &[bool]) -> Result<Ranking> {
        if flip.len() != self.pairs.len() {
            return Err(Error::DimensionMismatch {
                expected: self.pairs.len(),
                found: flip.len(),
            });
        }
        Ok(self.member_with(|k| flip[k]))
    }

    fn member_with(&self, mut flip: impl FnMut(usize) -> bool) -> Ranking {
        let mut ranks = vec![0; self.n()];
        if let Some(c) = self.center {
            ranks[c] = 1;
        }
        for (k, p) in self.pairs.iter().enumerate() {
            let (a, b) = if flip(k) {
                (p.first + 1, p.first)
            } else {
                (p.first, p.first + 1)
            };
            ranks[p.lower_item] = a;
            ranks[p.upper_item] = b;
        }
        Ranking(ranks)
    }

    /// All members, in binary-counter order of the pair flips.
    pub fn members(&self) -> Result<impl Iterator<Item = Ranking> + '_> {
        const LIMIT: usize = 24;
        let k = self.pairs.len();
        if k > LIMIT {
            return Err(Error::Capacity {
                what: "V-set pair count",
                size: k,
                limit: LIMIT,
            });
        }
        Ok((0u64..(1u64 << k)).map(move |bits| self.member_with(|j| (bits >> j) & 1 == 1)))
    }

    /// Uniform draw: each pair orientation is an independent fair coin.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Ranking {
        self.member_with(|_| rng.random::<bool>())
    }

    pub fn contains(&self, r: &Ranking) -> bool {
        if r.len() != self.n() {
            return false;
        }
        if let Some(c) = self.center {
            if r.rank(c) != 1 {
                return false;
            }
        }
        self.pairs.iter().all(|p| {
            let (a, b) = (r.rank(p.lower_item), r.rank(p.upper_item));
            (a, b) == (p.first, p.first + 1) || (a, b) == (p.first + 1, p.first)
        })
    }

    /// Footrule distance from `r` to the closest member. Pairs occupy disjoint
    /// items, so the minimum decomposes pair by pair.
    pub fn nearest_distance(&self, r: &Ranking) -> Result<usize> {
        if r.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: r.len(),
            });
        }
        let center = self.center.map_or(0, |c| r.rank(c).abs_diff(1));
        let pairs: usize = self
            .pairs
            .iter()
            .map(|p| {
                let (a, b) = (r.rank(p.lower_item), r.rank(p.upper_item));
                let keep = a.abs_diff(p.first) + b.abs_diff(p.first + 1);
                let flip = a.abs_diff(p.first + 1) + b.abs_diff(p.first);
                keep.min(flip)
            })
            .sum();
        Ok(center + pairs)
    }
}

pub fn v_set(rho: &Ranking) -> VSet {
    VSet::new(rho)
}

/// A uniform V-set member of `rho_hat` with Gaussian jitter of standard
/// deviation `sigma` added to every rank, then re-ranked.
pub fn perturbed_v_ranking<R: Rng + ?Sized>(
    rho_hat: &Ranking,
    sigma: f64,
    rng: &mut R,
) -> Result<Ranking> {
    perturbed_member(&VSet::new(rho_hat), sigma, rng)
}

pub(crate) fn perturbed_member<R: Rng + ?Sized>(
    vset: &VSet,
    sigma: f64,
    rng: &mut R,
) -> Result<Ranking> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidValue(format!(
            "sigma must be finite and nonnegative, got {sigma}"
        )));
    }
    let v = vset.sample(rng);
    if sigma == 0.0 {
        return Ok(v);
    }
    let noise = Normal::new(0.0, sigma).expect("sigma validated above");
    let x: Vec<f64> = v
        .as_slice()
        .iter()
        .map(|&r| r as f64 + noise.sample(rng))
        .collect();
    rank_of(&x)
}

/// Lexicographic iterator over all permutations of `1..=n`.
#[derive(Debug, Clone)]
pub struct Permutations {
    next: Option<Vec<usize>>,
}

impl Iterator for Permutations {
    type Item = Ranking;

    fn next(&mut self) -> Option<Ranking> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if next_permutation(&mut succ) {
            self.next = Some(succ);
        }
        Some(Ranking(current))
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

pub fn enumerate_permutations(n: usize) -> Result<Permutations> {
    if n == 0 {
        return Err(Error::InvalidValue("n must be at least 1".into()));
    }
    if n > MAX_ENUMERATION_N {
        return Err(Error::Capacity {
            what: "permutation enumeration",
            size: n,
            limit: MAX_ENUMERATION_N,
        });
    }
    Ok(Permutations {
        next: Some((1..=n).collect()),
    })
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}
