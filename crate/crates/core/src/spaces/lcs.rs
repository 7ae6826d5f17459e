use rand::distr::weighted::WeightedIndex;
use rand_distr::Distribution;

use crate::error::{Error, Result};
use crate::ranking::RankTable;
use crate::rng::seeded;

/// Strings of a fixed length `m` under `rho = 1 - M/m`, where `M` is the
/// length of the longest common substring.
#[derive(Debug, Clone, PartialEq)]
pub struct LcsSpace {
    m: usize,
    mu: Vec<f64>,
    strings: Vec<Vec<u8>>,
}

/// Distance between two strings plus the key that orders equal distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LcsDistance {
    pub rho: f64,
    /// `-log` of the probability product of the canonical longest shared
    /// substring; smaller means the shared substring is more likely, so nearer.
    pub tiekey: f64,
    pub len: usize,
}

/// Longest common substring of `a` and `b` by dynamic programming.
///
/// Returns `(length, start in a)`. Among several longest substrings the one
/// with the smallest start index in `a` is reported.
pub fn longest_common_substring(a: &[u8], b: &[u8]) -> (usize, usize) {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    let (mut best, mut best_end) = (0usize, 0usize);
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            cur[j] = if a[i - 1] == b[j - 1] { prev[j - 1] + 1 } else { 0 };
            // strict improvement only, so the first (smallest) end index in `a` wins
            if cur[j] > best {
                best = cur[j];
                best_end = i;
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    (best, best_end - best)
}

impl LcsSpace {
    /// `n` strings of length `m`, characters i.i.d. from `mu` (weights over
    /// the alphabet `0..mu.len()`, normalized here).
    pub fn sample(n: usize, m: usize, mu: &[f64], seed: u64) -> Result<Self> {
        let mu = normalize(mu)?;
        let dist = WeightedIndex::new(&mu).map_err(|e| Error::input(e.to_string()))?;
        let mut rng = seeded(seed);
        let strings = (0..n).map(|_| (0..m).map(|_| dist.sample(&mut rng) as u8).collect()).collect();
        Ok(LcsSpace { m, mu, strings })
    }

    pub fn from_strings(strings: Vec<Vec<u8>>, mu: &[f64]) -> Result<Self> {
        let mu = normalize(mu)?;
        let m = strings.first().map_or(0, Vec::len);
        if let Some(s) = strings.iter().find(|s| s.len() != m) {
            return Err(Error::input(format!("string lengths differ ({} vs {m})", s.len())));
        }
        if strings.iter().flatten().any(|&c| c as usize >= mu.len()) {
            return Err(Error::input("character outside the alphabet"));
        }
        Ok(LcsSpace { m, mu, strings })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    pub fn strings(&self) -> &[Vec<u8>] {
        &self.strings
    }

    /// `p = sum_a mu(a)^2`.
    pub fn collision_probability(&self) -> f64 {
        self.mu.iter().map(|q| q * q).sum()
    }

    pub fn lcs_distance(&self, a: usize, b: usize) -> Result<LcsDistance> {
        if a == b {
            return Err(Error::input("LCS distance needs two distinct strings"));
        }
        let (sa, sb) = (&self.strings[a], &self.strings[b]);
        if sa.len() != sb.len() {
            return Err(Error::input("strings have unequal lengths"));
        }
        let (len, start) = longest_common_substring(sa, sb);
        let tiekey = -sa[start..start + len].iter().map(|&c| self.mu[c as usize].ln()).sum::<f64>();
        Ok(LcsDistance { rho: 1.0 - len as f64 / self.m as f64, tiekey, len })
    }

    /// Rank table ordered by `(rho, tiekey, index)`.
    pub fn rank_table(&self) -> Result<RankTable> {
        let n = self.len();
        let mut d = vec![LcsDistance { rho: 0.0, tiekey: 0.0, len: self.m }; n * n];
        for x in 0..n {
            for y in (0..n).filter(|&y| y != x) {
                d[x * n + y] = self.lcs_distance(x, y)?;
            }
        }
        RankTable::from_comparator(n, |x, y, z| {
            let (dy, dz) = (&d[x * n + y], &d[x * n + z]);
            dy.rho
                .total_cmp(&dz.rho)
                .then(dy.tiekey.total_cmp(&dz.tiekey))
                .then(y.cmp(&z))
        })
    }
}

fn normalize(mu: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = mu.iter().sum();
    if mu.len() < 2 || mu.len() > 256 || mu.iter().any(|&q| !(q > 0.0 && q.is_finite())) {
        return Err(Error::input("alphabet needs 2..=256 characters with positive weights"));
    }
    Ok(mu.iter().map(|q| q / total).collect())
}

/// Typical shared-substring length of the K-th and the first nearest
/// neighbor: `q_K = (2 log m + log((1 - p) n / K)) / (-log p)`.
///
/// Returns `(q_K, q_1)` un-rounded.
pub fn lcs_qk(m: f64, n: f64, k: f64, p: f64) -> (f64, f64) {
    debug_assert!(p > 0.0 && p < 1.0 && k >= 1.0 && k < n && m >= 2.0);
    let q = |k: f64| (2.0 * m.ln() + ((1.0 - p) * n / k).ln()) / -p.ln();
    (q(k), q(1.0))
}
