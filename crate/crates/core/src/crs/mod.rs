//! Concordant ranking systems (CRS).
//!
//! A linear order on the pairs of `0..n` induces a ranking system through
//! `φ`: each point ranks the others by the position of the shared pair.
//! Exactly the concordant systems arise this way. The white graph joins
//! orders that differ by one adjacent swap of disjoint pairs; its components
//! are the fibers of `φ`.

mod census;
mod concord;
mod embed;
pub mod fixtures;
mod pair;
mod white;

pub use census::{enumerate_small, Census};
pub use concord::{concordancy_check, phi, phi_table, Certificate, Crs, OrderTypeDag};
pub use embed::{linf_embed, linf_embed_with_extension, verify_embedding, EmbeddingMatrix};
pub use pair::{LinearOrder, PairId};
pub use white::{
    baranyai_order, eulerian_order, is_isolated, powers_of_two_order, powers_of_two_variants, round_robin_matchings,
    swap_is_white, white_component, white_edge_fraction, WhiteComponent, WhiteFraction,
};

use crate::error::{Error, Result};

/// `φ` of a uniformly random order.
pub fn generic_crs(n: usize, seed: u64) -> Result<Crs> {
    if n < 2 {
        return Err(Error::input("generic CRS needs n >= 2"));
    }
    Ok(phi(&LinearOrder::random(n, seed)))
}
