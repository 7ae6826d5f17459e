use rand::seq::SliceRandom;

use crate::error::Result;
use crate::ranking::{ItemId, RankTable};
use crate::rng::seeded;

/// Each point ranks the others by an independent uniform permutation.
pub fn random_ranking_system(n: usize, seed: u64) -> Result<RankTable> {
    let mut rng = seeded(seed);
    let orders: Vec<Vec<ItemId>> = (0..n)
        .map(|x| {
            let mut others: Vec<ItemId> = (0..n).filter(|&y| y != x).map(ItemId::from).collect();
            others.shuffle(&mut rng);
            others
        })
        .collect();
    RankTable::from_orders(&orders)
}
