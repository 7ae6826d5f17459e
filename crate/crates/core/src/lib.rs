//! Laboratory for K-nearest-neighbor descent (NND) over abstract ranking systems.
//!
//! The crate is organized by subsystem:
//!
//! * [`ranking`]: ranking systems, the exact K-NN graph and recall scoring.
//! * [`spaces`]: generators for the example spaces (Paris metric, circle,
//!   powers of two, longest common substring, random rankings, torus).
//! * [`nnd`]: NND proper, in batch and scheduled pointwise variants.
//! * [`crs`]: concordant ranking systems, the map from linear orders on
//!   point pairs, the l-infinity embedding and the white graph.
//! * [`twonrq`]: the second-neighbor range query process on the torus.
//! * [`diagnostics`]: diameter and expansion of random K-out graphs.
//!
//! Every random procedure takes an explicit `u64` seed and uses
//! [`rng::seeded`], a ChaCha8 generator, so runs are reproducible across
//! platforms.

pub mod crs;
pub mod diagnostics;
pub mod error;
pub mod nnd;
pub mod ranking;
pub mod rng;
pub mod spaces;
pub mod stats;
pub mod twonrq;

pub use error::{Error, Result};
pub use ranking::{
    exact_knn, ranking_from_distances, recall, ItemId, KnnGraph, Metric, RankTable, Ranking,
    RankingOracle,
};
