use std::fmt;
use std::io::{Read, Write};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ranking::ItemId;
use crate::rng::seeded;

/// Unordered pair of distinct points, stored with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairId {
    i: u32,
    j: u32,
}

impl PairId {
    pub fn new(a: ItemId, b: ItemId) -> Result<PairId> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(PairId { i: a.0, j: b.0 }),
            std::cmp::Ordering::Greater => Ok(PairId { i: b.0, j: a.0 }),
            std::cmp::Ordering::Equal => Err(Error::input(format!("pair needs two distinct points, got {a} twice"))),
        }
    }

    /// Panics when `a == b`.
    #[inline]
    pub fn of(a: usize, b: usize) -> PairId {
        assert_ne!(a, b, "degenerate pair");
        PairId { i: a.min(b) as u32, j: a.max(b) as u32 }
    }

    #[inline]
    pub fn i(self) -> ItemId {
        ItemId(self.i)
    }

    #[inline]
    pub fn j(self) -> ItemId {
        ItemId(self.j)
    }

    /// Lexicographic triangular index in `0..count(n)`.
    #[inline]
    pub fn index(self, n: usize) -> usize {
        let (i, j) = (self.i as usize, self.j as usize);
        i * n - i * (i + 1) / 2 + (j - i - 1)
    }

    pub fn from_index(idx: usize, n: usize) -> PairId {
        let mut i = 0;
        let mut start = 0;
        while start + (n - i - 1) <= idx {
            start += n - i - 1;
            i += 1;
        }
        PairId::of(i, i + 1 + idx - start)
    }

    /// `n(n-1)/2`.
    pub fn count(n: usize) -> usize {
        n * n.saturating_sub(1) / 2
    }

    #[inline]
    pub fn contains(self, x: ItemId) -> bool {
        self.i == x.0 || self.j == x.0
    }

    /// The endpoint other than `x`. Panics if `x` is not an endpoint.
    #[inline]
    pub fn other(self, x: ItemId) -> ItemId {
        if self.i == x.0 {
            ItemId(self.j)
        } else {
            assert_eq!(self.j, x.0, "{x} is not an endpoint of {self}");
            ItemId(self.i)
        }
    }

    #[inline]
    pub fn is_disjoint(self, other: PairId) -> bool {
        self.i != other.i && self.i != other.j && self.j != other.i && self.j != other.j
    }
}

impl fmt::Display for PairId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.i, self.j)
    }
}

/// Linear order on all pairs of `0..n`, smallest first.
///
/// Positions `σ` are 1-based: the first pair has `σ = 1`, the last `σ = N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearOrder {
    n: usize,
    pairs: Vec<PairId>,
    // Indexed by triangular pair index.
    sigma: Vec<u32>,
}

impl LinearOrder {
    pub fn from_pairs(n: usize, pairs: Vec<PairId>) -> Result<LinearOrder> {
        let big_n = PairId::count(n);
        if pairs.len() != big_n {
            return Err(Error::input(format!("order lists {} pairs, expected {big_n}", pairs.len())));
        }
        let mut sigma = vec![0u32; big_n];
        for (pos, p) in pairs.iter().enumerate() {
            if p.j as usize >= n {
                return Err(Error::input(format!("pair {p} out of range for n = {n}")));
            }
            let slot = &mut sigma[p.index(n)];
            if *slot != 0 {
                return Err(Error::input(format!("pair {p} listed twice")));
            }
            *slot = pos as u32 + 1;
        }
        Ok(LinearOrder { n, pairs, sigma })
    }

    /// Builds an order from triangular indices, as produced by [`LinearOrder::codes`].
    pub fn from_codes(n: usize, codes: &[u32]) -> Result<LinearOrder> {
        let big_n = PairId::count(n);
        if codes.iter().any(|&c| c as usize >= big_n) {
            return Err(Error::input("pair code out of range"));
        }
        let lookup: Vec<PairId> = (0..big_n).map(|k| PairId::from_index(k, n)).collect();
        Self::from_pairs(n, codes.iter().map(|&c| lookup[c as usize]).collect())
    }

    /// Pairs in lexicographic order.
    pub fn lexicographic(n: usize) -> LinearOrder {
        let pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| PairId::of(i, j))).collect();
        Self::from_pairs(n, pairs).expect("lexicographic order is a bijection")
    }

    /// Uniform random order (Fisher-Yates).
    pub fn random(n: usize, seed: u64) -> LinearOrder {
        let mut order = Self::lexicographic(n);
        order.pairs.shuffle(&mut seeded(seed));
        order.reindex();
        order
    }

    fn reindex(&mut self) {
        for (pos, p) in self.pairs.iter().enumerate() {
            self.sigma[p.index(self.n)] = pos as u32 + 1;
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `N`, the number of pairs.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pairs in order, smallest first.
    pub fn pairs(&self) -> &[PairId] {
        &self.pairs
    }

    /// Pair at 1-based position `pos`.
    pub fn at(&self, pos: usize) -> PairId {
        self.pairs[pos - 1]
    }

    /// 1-based position of `p`.
    #[inline]
    pub fn sigma(&self, p: PairId) -> u32 {
        self.sigma[p.index(self.n)]
    }

    /// Triangular indices in order; a compact key for hashing.
    pub fn codes(&self) -> Vec<u32> {
        self.pairs.iter().map(|p| p.index(self.n) as u32).collect()
    }

    /// Copy with the pairs at positions `pos` and `pos + 1` exchanged.
    pub fn swapped(&self, pos: usize) -> Result<LinearOrder> {
        check_pos(pos, self.len())?;
        let mut out = self.clone();
        out.pairs.swap(pos - 1, pos);
        let (a, b) = (out.pairs[pos - 1], out.pairs[pos]);
        out.sigma[a.index(self.n)] = pos as u32;
        out.sigma[b.index(self.n)] = pos as u32 + 1;
        Ok(out)
    }

    /// One row `i,j` per pair, in order.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["i", "j"])?;
        for p in &self.pairs {
            wtr.serialize((p.i, p.j))?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<LinearOrder> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut pairs = Vec::new();
        let mut n = 0;
        for row in rdr.deserialize() {
            let (a, b): (u32, u32) = row?;
            pairs.push(PairId::new(ItemId(a), ItemId(b))?);
            n = n.max(a.max(b) as usize + 1);
        }
        Self::from_pairs(n, pairs)
    }
}

pub(crate) fn check_pos(pos: usize, big_n: usize) -> Result<()> {
    if pos == 0 || pos >= big_n {
        return Err(Error::input(format!("swap position {pos} outside 1..{}", big_n.saturating_sub(1))));
    }
    Ok(())
}
