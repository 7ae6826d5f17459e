//! A small hand-made concordant system on points `a..e` (indices 0..4),
//! with one linear extension of its order type.

use super::pair::{LinearOrder, PairId};
use crate::ranking::{ItemId, RankTable};

fn letter(c: u8) -> usize {
    (c - b'a') as usize
}

/// Rankings `a: b e d c`, `b: a c d e`, `c: d e b a`, `d: c e a b`, `e: c a d b`.
pub fn five_point_system() -> RankTable {
    let rows: [&[u8; 4]; 5] = [b"bedc", b"acde", b"deba", b"ceab", b"cadb"];
    let orders: Vec<Vec<ItemId>> = rows.iter().map(|r| r.iter().map(|&c| ItemId::from(letter(c))).collect()).collect();
    RankTable::from_orders(&orders).expect("fixture is a valid ranking system")
}

/// `ab cd ce ae bc de ad ac bd be`.
pub fn five_point_extension() -> LinearOrder {
    let pairs = ["ab", "cd", "ce", "ae", "bc", "de", "ad", "ac", "bd", "be"]
        .iter()
        .map(|s| {
            let b = s.as_bytes();
            PairId::of(letter(b[0]), letter(b[1]))
        })
        .collect();
    LinearOrder::from_pairs(5, pairs).expect("fixture is a bijection")
}
