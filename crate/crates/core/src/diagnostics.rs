//! Diameter and vertex expansion of random K-out graphs.

use std::collections::BTreeMap;
use std::io::Write;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::nnd::FriendState;
use crate::ranking::KnnGraph;
use crate::rng::{derive, seeded};

/// Largest n for which the all-source BFS is run.
pub const EXACT_DIAMETER_LIMIT: usize = 20_000;

/// Undirected multigraph in CSR form.
#[derive(Debug, Clone)]
pub struct UndirectedGraph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl UndirectedGraph {
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (u32, u32)> + Clone) -> Self {
        let mut deg = vec![0usize; n];
        for (u, v) in edges.clone() {
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for v in 0..n {
            offsets[v + 1] = offsets[v] + deg[v];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0u32; offsets[n]];
        for (u, v) in edges {
            targets[fill[u as usize]] = v;
            fill[u as usize] += 1;
            targets[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        UndirectedGraph { offsets, targets }
    }

    /// Forgets arc directions; reciprocal arcs become parallel edges.
    pub fn from_knn(g: &KnnGraph) -> Self {
        let edges: Vec<(u32, u32)> =
            g.lists().iter().enumerate().flat_map(|(x, l)| l.iter().map(move |y| (x as u32, y.0))).collect();
        Self::from_edges(g.n(), edges.iter().copied())
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Hop distances from `src` (`u32::MAX` when unreachable).
    pub fn bfs(&self, src: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.n()];
        let mut queue = std::collections::VecDeque::from([src]);
        dist[src] = 0;
        while let Some(u) = queue.pop_front() {
            for &w in self.neighbors(u) {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dist[u] + 1;
                    queue.push_back(w as usize);
                }
            }
        }
        dist
    }

    // Eccentricities of up to 64 sources at once, one bit per source.
    fn batch_eccentricity(&self, sources: &[usize]) -> Option<u32> {
        let n = self.n();
        let full: u64 = if sources.len() == 64 { u64::MAX } else { (1u64 << sources.len()) - 1 };
        let mut seen = vec![0u64; n];
        let mut frontier = vec![0u64; n];
        for (b, &s) in sources.iter().enumerate() {
            seen[s] |= 1 << b;
            frontier[s] |= 1 << b;
        }
        let mut next = vec![0u64; n];
        let mut level = 0;
        loop {
            let mut any = false;
            for v in 0..n {
                let mut acc = 0u64;
                for &u in self.neighbors(v) {
                    acc |= frontier[u as usize];
                }
                let new = acc & !seen[v];
                next[v] = new;
                seen[v] |= new;
                any |= new != 0;
            }
            if !any {
                break;
            }
            level += 1;
            std::mem::swap(&mut frontier, &mut next);
        }
        seen.iter().all(|&s| s & full == full).then_some(level)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Diameter {
    Exact { value: u32 },
    /// Two-sweep lower bound and twice the smaller swept eccentricity.
    Interval { lower: u32, upper: u32 },
    Disconnected,
}

impl Diameter {
    /// Largest value the diameter can have, if finite.
    pub fn upper(&self) -> Option<u32> {
        match *self {
            Diameter::Exact { value } => Some(value),
            Diameter::Interval { upper, .. } => Some(upper),
            Diameter::Disconnected => None,
        }
    }
}

pub fn undirected_diameter(g: &UndirectedGraph) -> Result<Diameter> {
    let n = g.n();
    if n < 2 {
        return Err(Error::input("diameter needs at least two vertices"));
    }
    if n <= EXACT_DIAMETER_LIMIT {
        let sources: Vec<usize> = (0..n).collect();
        let eccs: Vec<Option<u32>> = sources.par_chunks(64).map(|c| g.batch_eccentricity(c)).collect();
        return Ok(match eccs.into_iter().collect::<Option<Vec<u32>>>() {
            Some(e) => Diameter::Exact { value: e.into_iter().max().unwrap_or(0) },
            None => Diameter::Disconnected,
        });
    }
    let d0 = g.bfs(0);
    if d0.contains(&u32::MAX) {
        return Ok(Diameter::Disconnected);
    }
    let (far, &ecc0) = d0.iter().enumerate().max_by_key(|&(i, d)| (*d, std::cmp::Reverse(i))).expect("n >= 2");
    let ecc_far = *g.bfs(far).iter().max().expect("n >= 2");
    Ok(Diameter::Interval { lower: ecc_far.max(ecc0), upper: 2 * ecc0.min(ecc_far) })
}

#[derive(Debug, Clone, Serialize)]
pub struct DiameterReport {
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub diameters: Vec<Diameter>,
    pub disconnected: usize,
    /// `(1 + ε) log_{K-1} n`.
    pub bound: f64,
    /// Share of trials whose diameter is certainly within the bound.
    pub fraction_within: f64,
}

impl DiameterReport {
    /// Rows `diameter,count`, keyed by the upper value; disconnected trials
    /// are listed as `disconnected`.
    pub fn write_histogram_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
        for d in &self.diameters {
            if let Some(u) = d.upper() {
                *counts.entry(u).or_default() += 1;
            }
        }
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["diameter", "count"])?;
        for (d, c) in counts {
            wtr.write_record([d.to_string(), c.to_string()])?;
        }
        if self.disconnected > 0 {
            wtr.write_record(["disconnected".to_string(), self.disconnected.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn median_diameter(&self) -> Option<u32> {
        let mut v: Vec<u32> = self.diameters.iter().filter_map(Diameter::upper).collect();
        v.sort_unstable();
        v.get(v.len() / 2).copied()
    }
}

/// Diameters of `trials` independent random K-out graphs, viewed undirected.
pub fn diameter_experiment(n: usize, k: usize, trials: usize, epsilon: f64, seed: u64) -> Result<DiameterReport> {
    if k < 3 {
        return Err(Error::Refused(format!("the diameter bound needs K >= 3 (K = {k})")));
    }
    if trials == 0 || !(epsilon > 0.0) {
        return Err(Error::input("need trials > 0 and epsilon > 0"));
    }
    let bound = (1.0 + epsilon) * (n as f64).ln() / ((k - 1) as f64).ln();
    let mut diameters = Vec::with_capacity(trials);
    for t in 0..trials {
        let state = FriendState::init_random_kout(n, k, derive(seed, t as u64))?;
        diameters.push(undirected_diameter(&UndirectedGraph::from_knn(&state.to_graph()))?);
    }
    let within = diameters.iter().filter(|d| d.upper().is_some_and(|u| u as f64 <= bound)).count();
    let disconnected = diameters.iter().filter(|d| **d == Diameter::Disconnected).count();
    Ok(DiameterReport { n, k, trials, epsilon, seed, diameters, disconnected, bound, fraction_within: within as f64 / trials as f64 })
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpansionReport {
    pub n: usize,
    pub k: usize,
    pub expansion_alpha: f64,
    pub epsilon: f64,
    /// Largest tested `|X|`; sizes satisfy `|X| < alpha n / ln n`.
    pub max_set_size: usize,
    pub sampled: usize,
    /// Sets with `|N(X)| <= (K - 1 - ε)|X|`.
    pub violations: usize,
    /// Smallest `|N(X)| / |X|` seen.
    pub min_ratio: f64,
}

/// Samples vertex sets of uniform random size below `alpha n / ln n` and
/// counts those whose out-neighborhood (outside `X`) is too small.
pub fn expansion_check(g: &KnnGraph, expansion_alpha: f64, epsilon: f64, sample_sets: usize, seed: u64) -> Result<ExpansionReport> {
    let n = g.n();
    let k = g.k();
    if n < 3 || !(expansion_alpha > 0.0) {
        return Err(Error::input("need n >= 3 and a positive expansion constant"));
    }
    let limit = expansion_alpha * n as f64 / (n as f64).ln();
    let max_set_size = ((limit.ceil() as usize).saturating_sub(1)).min(n - 1);
    let threshold = k as f64 - 1.0 - epsilon;
    let mut rng = seeded(seed);
    let mut in_x = vec![0u32; n];
    let mut in_nx = vec![0u32; n];
    let mut violations = 0;
    let mut min_ratio = f64::INFINITY;
    let mut sampled = 0;
    if max_set_size >= 1 {
        for s in 0..sample_sets {
            let stamp = s as u32 + 1;
            let size = rng.random_range(1..=max_set_size);
            let x = index::sample(&mut rng, n, size).into_vec();
            for &v in &x {
                in_x[v] = stamp;
            }
            let mut nx = 0usize;
            for &v in &x {
                for y in g.neighbors(crate::ItemId::from(v)) {
                    let y = y.idx();
                    if in_x[y] != stamp && in_nx[y] != stamp {
                        in_nx[y] = stamp;
                        nx += 1;
                    }
                }
            }
            let ratio = nx as f64 / size as f64;
            min_ratio = min_ratio.min(ratio);
            if nx as f64 <= threshold * size as f64 {
                violations += 1;
            }
            sampled += 1;
        }
    }
    Ok(ExpansionReport { n, k, expansion_alpha, epsilon, max_set_size, sampled, violations, min_ratio })
}

/// `[e^(2+ε) (K+1)^(2+2ε)]^(-1/ε)`, the expansion constant from the union
/// bound argument. Tiny for practical K.
pub fn proof_expansion_alpha(k: usize, epsilon: f64) -> f64 {
    let log = (2.0 + epsilon) + (2.0 + 2.0 * epsilon) * ((k + 1) as f64).ln();
    (-log / epsilon).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ItemId;

    fn path(n: u32) -> UndirectedGraph {
        UndirectedGraph::from_edges(n as usize, (0..n - 1).map(|i| (i, i + 1)).collect::<Vec<_>>())
    }

    #[test]
    fn hand_cases() {
        assert_eq!(undirected_diameter(&path(5)).unwrap(), Diameter::Exact { value: 4 });
        let complete: Vec<(u32, u32)> = (0..6).flat_map(|i| (i + 1..6).map(move |j| (i, j))).collect();
        assert_eq!(undirected_diameter(&UndirectedGraph::from_edges(6, complete)).unwrap(), Diameter::Exact { value: 1 });
        let star: Vec<(u32, u32)> = (1..7).map(|i| (0, i)).collect();
        assert_eq!(undirected_diameter(&UndirectedGraph::from_edges(7, star)).unwrap(), Diameter::Exact { value: 2 });
        let split = UndirectedGraph::from_edges(4, vec![(0, 1), (2, 3)]);
        assert_eq!(undirected_diameter(&split).unwrap(), Diameter::Disconnected);
    }

    #[test]
    fn bit_parallel_matches_plain_bfs() {
        let state = FriendState::init_random_kout(300, 2, 4).unwrap();
        let g = UndirectedGraph::from_knn(&state.to_graph());
        let plain = (0..300).map(|s| g.bfs(s).into_iter().max().unwrap()).max().unwrap();
        assert_eq!(undirected_diameter(&g).unwrap(), Diameter::Exact { value: plain });
    }

    #[test]
    fn long_path_gets_interval() {
        let d = undirected_diameter(&path(EXACT_DIAMETER_LIMIT as u32 + 5)).unwrap();
        let Diameter::Interval { lower, upper } = d else { panic!("{d:?}") };
        assert!(lower <= EXACT_DIAMETER_LIMIT as u32 + 4 && EXACT_DIAMETER_LIMIT as u32 + 4 <= upper);
        assert_eq!(lower, EXACT_DIAMETER_LIMIT as u32 + 4);
    }

    #[test]
    fn degrees_sum_to_2kn() {
        let state = FriendState::init_random_kout(500, 5, 1).unwrap();
        let g = UndirectedGraph::from_knn(&state.to_graph());
        assert_eq!((0..500).map(|v| g.degree(v)).sum::<usize>(), 2 * 5 * 500);
        for v in 0..500 {
            assert_eq!(g.degree(v), 5 + state.cofriends(ItemId::from(v)).len());
        }
        let d0 = g.bfs(0);
        let d7 = g.bfs(7);
        assert_eq!(d0[7], d7[0]);
    }

    #[test]
    fn forced_graph_has_diameter_one() {
        let r = diameter_experiment(6, 5, 3, 0.5, 0).unwrap();
        assert!(r.diameters.iter().all(|d| *d == Diameter::Exact { value: 1 }));
        assert!(matches!(diameter_experiment(100, 2, 3, 0.5, 0), Err(Error::Refused(_))));
    }

    #[test]
    fn singleton_sets_expand() {
        let g = FriendState::init_random_kout(2000, 6, 2).unwrap().to_graph();
        let r = expansion_check(&g, 0.007, 1.0, 200, 3).unwrap();
        assert_eq!(r.max_set_size, 1);
        assert_eq!(r.violations, 0);
        assert_eq!(r.min_ratio, 6.0);
    }

    #[test]
    fn proof_constant_is_positive_and_small() {
        let a = proof_expansion_alpha(16, 1.0);
        assert!(a > 0.0 && a < 1e-6);
    }

    #[test]
    fn histogram_csv() {
        let r = diameter_experiment(200, 3, 4, 0.5, 1).unwrap();
        let mut buf = Vec::new();
        r.write_histogram_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("diameter,count\n"));
    }
}
