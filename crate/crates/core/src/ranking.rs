//! Ranking systems, the exact K-nearest-neighbor graph, and recall.
//!
//! A ranking system assigns each point `x` a strict ranking `r_x` of every
//! other point. Algorithms never see the ranks themselves; they ask a
//! [`RankingOracle`] whether `x` prefers `y` to `z`, and the oracle counts
//! how many times it was asked.

use std::cmp::Ordering;
use std::fmt;
use std::io::{Read, Write};
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense identifier of one of the `n` points, in `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
#[repr(transparent)]
pub struct ItemId(pub u32);

impl ItemId {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for ItemId {
    #[inline]
    fn from(i: usize) -> Self {
        ItemId(i as u32)
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Anything that can answer "does `x` prefer `y` to `z`".
///
/// `compare(x, y, z)` is `Less` when `x` prefers `y`. For a fixed `x` it must
/// be a strict total order on the other points.
pub trait Ranking: Sync {
    fn len(&self) -> usize;

    fn compare(&self, x: ItemId, y: ItemId, z: ItemId) -> Ordering;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A symmetric, non-negative distance on `0..len()`.
pub trait Metric: Sync {
    fn len(&self) -> usize;

    fn distance(&self, i: usize, j: usize) -> f64;
}

/// Strict total order used to break distance ties.
#[derive(Debug, Clone, Default, PartialEq)]
pub enum TieBreak {
    /// Lower index wins.
    #[default]
    Index,
    /// `position[i]` is the place of item `i` in the tie-break order; lower wins.
    Order(Vec<usize>),
}

impl TieBreak {
    fn key(&self, i: usize) -> usize {
        match self {
            TieBreak::Index => i,
            TieBreak::Order(pos) => pos[i],
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if let TieBreak::Order(pos) = self {
            if pos.len() != n {
                return Err(Error::input(format!("tie-break order has {} entries, expected {n}", pos.len())));
            }
            let mut seen = vec![false; n];
            for &p in pos {
                if p >= n || std::mem::replace(&mut seen[p], true) {
                    return Err(Error::input("tie-break order is not a permutation"));
                }
            }
        }
        Ok(())
    }
}

/// Ranking induced by a [`Metric`], ties broken by index.
///
/// This evaluates distances on demand and needs no `O(n^2)` table.
pub struct ByDistance<'a, M: ?Sized>(pub &'a M);

impl<M: Metric + ?Sized> Ranking for ByDistance<'_, M> {
    fn len(&self) -> usize {
        self.0.len()
    }

    fn compare(&self, x: ItemId, y: ItemId, z: ItemId) -> Ordering {
        let dy = self.0.distance(x.idx(), y.idx());
        let dz = self.0.distance(x.idx(), z.idx());
        dy.total_cmp(&dz).then(y.cmp(&z))
    }
}

/// Counting front-end to a [`Ranking`].
///
/// Every call to [`prefers`](Self::prefers) or [`compare`](Self::compare)
/// adds exactly one to the work meter. The meter is atomic so the oracle can
/// be shared across worker threads.
pub struct RankingOracle<'a, R: ?Sized> {
    ranking: &'a R,
    count: AtomicU64,
}

impl<'a, R: Ranking + ?Sized> RankingOracle<'a, R> {
    pub fn new(ranking: &'a R) -> Self {
        RankingOracle { ranking, count: AtomicU64::new(0) }
    }

    pub fn len(&self) -> usize {
        self.ranking.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranking.len() == 0
    }

    /// True iff `x` prefers `y` to `z`. The three points must be distinct.
    pub fn prefers(&self, x: ItemId, y: ItemId, z: ItemId) -> bool {
        self.compare(x, y, z) == Ordering::Less
    }

    pub fn compare(&self, x: ItemId, y: ItemId, z: ItemId) -> Ordering {
        debug_assert!(x != y && x != z && y != z, "oracle query needs distinct points");
        self.count.fetch_add(1, AtomicOrdering::Relaxed);
        self.ranking.compare(x, y, z)
    }

    pub fn comparisons(&self) -> u64 {
        self.count.load(AtomicOrdering::Relaxed)
    }

    pub fn ranking(&self) -> &'a R {
        self.ranking
    }
}

/// Exact rank tables are test oracles; above this size only the oracle
/// interface is used.
pub const DEFAULT_TABLE_CAP: usize = 1 << 15;

/// Full rank table: `rank(x, y)` in `1..n` for every ordered pair `x != y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankTable {
    n: usize,
    // Row-major n x n, diagonal holds 0.
    ranks: Vec<u32>,
}

impl RankTable {
    /// Builds a table by sorting, for each `x`, the other points with `cmp(x, y, z)`.
    pub fn from_comparator<F>(n: usize, cmp: F) -> Result<RankTable>
    where
        F: Fn(usize, usize, usize) -> Ordering,
    {
        Self::from_comparator_capped(n, DEFAULT_TABLE_CAP, cmp)
    }

    pub fn from_comparator_capped<F>(n: usize, cap: usize, cmp: F) -> Result<RankTable>
    where
        F: Fn(usize, usize, usize) -> Ordering,
    {
        check_cap(n, cap)?;
        let mut ranks = vec![0u32; n * n];
        let mut others: Vec<usize> = Vec::with_capacity(n.saturating_sub(1));
        for x in 0..n {
            others.clear();
            others.extend((0..n).filter(|&y| y != x));
            others.sort_by(|&y, &z| cmp(x, y, z));
            for (r, &y) in others.iter().enumerate() {
                ranks[x * n + y] = r as u32 + 1;
            }
        }
        Ok(RankTable { n, ranks })
    }

    /// Builds a table from each point's preference list, most preferred first.
    pub fn from_orders(orders: &[Vec<ItemId>]) -> Result<RankTable> {
        let n = orders.len();
        check_cap(n, DEFAULT_TABLE_CAP)?;
        let mut ranks = vec![0u32; n * n];
        for (x, list) in orders.iter().enumerate() {
            if list.len() != n.saturating_sub(1) {
                return Err(Error::input(format!("ranking of {x} has {} entries, expected {}", list.len(), n - 1)));
            }
            for (r, &y) in list.iter().enumerate() {
                let y = y.idx();
                if y >= n || y == x || ranks[x * n + y] != 0 {
                    return Err(Error::input(format!("ranking of {x} is not a permutation of the other points")));
                }
                ranks[x * n + y] = r as u32 + 1;
            }
        }
        Ok(RankTable { n, ranks })
    }

    /// Wraps a row-major rank matrix that is already known to be valid.
    pub(crate) fn from_raw(n: usize, ranks: Vec<u32>) -> RankTable {
        debug_assert_eq!(ranks.len(), n * n);
        RankTable { n, ranks }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `r_x(y)`, in `1..n`. Panics when `x == y`.
    #[inline]
    pub fn rank(&self, x: ItemId, y: ItemId) -> u32 {
        assert_ne!(x, y, "rank of a point relative to itself");
        self.ranks[x.idx() * self.n + y.idx()]
    }

    /// The other points in `x`'s preference order, most preferred first.
    pub fn order(&self, x: ItemId) -> Vec<ItemId> {
        let mut out = vec![ItemId(0); self.n.saturating_sub(1)];
        let row = &self.ranks[x.idx() * self.n..(x.idx() + 1) * self.n];
        for (y, &r) in row.iter().enumerate() {
            if y != x.idx() {
                out[r as usize - 1] = ItemId::from(y);
            }
        }
        out
    }

    /// Checks that every row is a bijection onto `1..n`.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        for x in 0..n {
            let mut seen = vec![false; n];
            for y in (0..n).filter(|&y| y != x) {
                let r = self.ranks[x * n + y] as usize;
                if r == 0 || r >= n || std::mem::replace(&mut seen[r], true) {
                    return Err(Error::input(format!("row {x} is not a bijection onto 1..{}", n - 1)));
                }
            }
        }
        Ok(())
    }

    /// Writes rows `x,y,rank`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["x", "y", "rank"])?;
        for x in 0..self.n {
            for y in (0..self.n).filter(|&y| y != x) {
                wtr.serialize((x, y, self.ranks[x * self.n + y]))?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<RankTable> {
        let mut rdr = csv::Reader::from_reader(r);
        let rows: Vec<(usize, usize, u32)> = rdr.deserialize().collect::<std::result::Result<_, _>>()?;
        let n = rows.iter().map(|&(x, y, _)| x.max(y) + 1).max().unwrap_or(0);
        if rows.len() != n * n.saturating_sub(1) {
            return Err(Error::input("rank table CSV does not cover every ordered pair"));
        }
        let mut ranks = vec![0u32; n * n];
        for (x, y, r) in rows {
            ranks[x * n + y] = r;
        }
        let table = RankTable { n, ranks };
        table.validate()?;
        Ok(table)
    }
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        Err(Error::Refused(format!("rank table for n = {n} exceeds the cap of {cap} points")))
    } else {
        Ok(())
    }
}

impl Ranking for RankTable {
    fn len(&self) -> usize {
        self.n
    }

    #[inline]
    fn compare(&self, x: ItemId, y: ItemId, z: ItemId) -> Ordering {
        let row = x.idx() * self.n;
        self.ranks[row + y.idx()].cmp(&self.ranks[row + z.idx()])
    }
}

/// Rank table induced by a distance, with the given tie-break.
///
/// `r_x(y) < r_x(z)` iff `d(x,y) < d(x,z)`, or the distances are equal and
/// `y` precedes `z` under `tie_break`.
pub fn ranking_from_distances<M: Metric + ?Sized>(metric: &M, tie_break: &TieBreak) -> Result<RankTable> {
    let n = metric.len();
    tie_break.validate(n)?;
    check_cap(n, DEFAULT_TABLE_CAP)?;
    let mut dist = vec![0.0f64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = metric.distance(i, j);
            if !d.is_finite() || d < 0.0 {
                return Err(Error::input(format!("distance({i}, {j}) = {d} is not a finite non-negative number")));
            }
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    RankTable::from_comparator(n, |x, y, z| {
        dist[x * n + y]
            .total_cmp(&dist[x * n + z])
            .then_with(|| tie_break.key(y).cmp(&tie_break.key(z)))
    })
}

/// Directed K-out graph with rank-ordered neighbor lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnnGraph {
    n: usize,
    k: usize,
    neighbors: Vec<Vec<ItemId>>,
}

impl KnnGraph {
    pub fn new(k: usize, neighbors: Vec<Vec<ItemId>>) -> Result<KnnGraph> {
        let g = KnnGraph { n: neighbors.len(), k, neighbors };
        g.validate()?;
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Out-neighbors of `x`, most preferred first.
    pub fn neighbors(&self, x: ItemId) -> &[ItemId] {
        &self.neighbors[x.idx()]
    }

    pub fn lists(&self) -> &[Vec<ItemId>] {
        &self.neighbors
    }

    pub fn validate(&self) -> Result<()> {
        for (x, list) in self.neighbors.iter().enumerate() {
            if list.len() != self.k {
                return Err(Error::input(format!("vertex {x} has {} neighbors, expected {}", list.len(), self.k)));
            }
            for (i, y) in list.iter().enumerate() {
                if y.idx() >= self.n || y.idx() == x || list[..i].contains(y) {
                    return Err(Error::input(format!("vertex {x} has an invalid or repeated neighbor {y}")));
                }
            }
        }
        Ok(())
    }

    /// Writes rows `source,rank,target` with 1-based rank.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["source", "rank", "target"])?;
        for (x, list) in self.neighbors.iter().enumerate() {
            for (r, y) in list.iter().enumerate() {
                wtr.serialize((x, r + 1, y.0))?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<KnnGraph> {
        let mut rdr = csv::Reader::from_reader(r);
        let rows: Vec<(usize, usize, u32)> = rdr.deserialize().collect::<std::result::Result<_, _>>()?;
        let n = rows.iter().map(|&(x, _, _)| x + 1).max().unwrap_or(0);
        let mut neighbors: Vec<Vec<(usize, ItemId)>> = vec![Vec::new(); n];
        for (x, rank, y) in rows {
            neighbors[x].push((rank, ItemId(y)));
        }
        let k = neighbors.first().map_or(0, Vec::len);
        let lists = neighbors
            .into_iter()
            .map(|mut l| {
                l.sort_unstable_by_key(|&(r, _)| r);
                if l.iter().enumerate().any(|(i, &(r, _))| r != i + 1) {
                    return Err(Error::input("neighbor ranks must run 1..=K"));
                }
                Ok(l.into_iter().map(|(_, y)| y).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        KnnGraph::new(k, lists)
    }
}

/// The exact K-NN graph: arc `x -> y` iff `r_x(y) <= K`, lists in rank order.
pub fn exact_knn(table: &RankTable, k: usize) -> Result<KnnGraph> {
    let n = table.n();
    if k == 0 || k >= n {
        return Err(Error::input(format!("K must satisfy 1 <= K < n (K = {k}, n = {n})")));
    }
    let neighbors = (0..n)
        .map(|x| {
            let mut list = vec![ItemId(0); k];
            for y in (0..n).filter(|&y| y != x) {
                let r = table.ranks[x * n + y] as usize;
                if r <= k {
                    list[r - 1] = ItemId::from(y);
                }
            }
            list
        })
        .collect();
    Ok(KnnGraph { n, k, neighbors })
}

/// Exact K-NN graph computed only through oracle comparisons (full sort per point).
pub fn exact_knn_by_oracle<R: Ranking + ?Sized>(oracle: &RankingOracle<'_, R>, k: usize) -> Result<KnnGraph> {
    let n = oracle.len();
    if k == 0 || k >= n {
        return Err(Error::input(format!("K must satisfy 1 <= K < n (K = {k}, n = {n})")));
    }
    let neighbors = (0..n)
        .map(|x| {
            let x = ItemId::from(x);
            let mut others: Vec<ItemId> = (0..n).map(ItemId::from).filter(|&y| y != x).collect();
            others.sort_by(|&y, &z| oracle.compare(x, y, z));
            others.truncate(k);
            others
        })
        .collect();
    Ok(KnnGraph { n, k, neighbors })
}

/// Fraction of exact arcs recovered: `sum_x |approx(x) ∩ exact(x)| / (nK)`.
pub fn recall(approx: &KnnGraph, exact: &KnnGraph) -> Result<f64> {
    if approx.n != exact.n || approx.k != exact.k {
        return Err(Error::input(format!(
            "graph shapes differ: (n, K) = ({}, {}) vs ({}, {})",
            approx.n, approx.k, exact.n, exact.k
        )));
    }
    if approx.n == 0 {
        return Ok(1.0);
    }
    let hits: usize = approx
        .neighbors
        .iter()
        .zip(&exact.neighbors)
        .map(|(a, e)| a.iter().filter(|y| e.contains(y)).count())
        .sum();
    Ok(hits as f64 / (approx.n * approx.k) as f64)
}
