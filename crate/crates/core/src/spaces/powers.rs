use crate::error::{Error, Result};
use crate::ranking::Metric;

/// The points `2^0, ..., 2^(n-1)` on the real line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PowersOfTwoSpace {
    n: usize,
}

impl PowersOfTwoSpace {
    /// `n` is limited to 53 so every pairwise distance is exact in `f64`.
    pub fn new(n: usize) -> Result<Self> {
        if n > 53 {
            return Err(Error::input("powers-of-two space supports n <= 53"));
        }
        Ok(PowersOfTwoSpace { n })
    }

    pub fn value(&self, i: usize) -> f64 {
        (1u64 << i) as f64
    }
}

impl Metric for PowersOfTwoSpace {
    fn len(&self) -> usize {
        self.n
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        (self.value(i) - self.value(j)).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranking::{exact_knn, ranking_from_distances, ItemId, TieBreak};

    #[test]
    fn nearest_two_of_32() {
        let s = PowersOfTwoSpace::new(6).unwrap();
        let g = exact_knn(&ranking_from_distances(&s, &TieBreak::Index).unwrap(), 2).unwrap();
        // 32 = 2^5, 16 = 2^4, 8 = 2^3
        assert_eq!(g.neighbors(ItemId(5)), &[ItemId(4), ItemId(3)]);
    }

    #[test]
    fn values_increase() {
        let s = PowersOfTwoSpace::new(10).unwrap();
        assert!((1..10).all(|i| s.value(i) > s.value(i - 1)));
        assert!(PowersOfTwoSpace::new(54).is_err());
    }
}
