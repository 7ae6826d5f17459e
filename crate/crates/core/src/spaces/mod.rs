//! Example spaces: each exposes its points and a distance (or a ranking
//! directly), plus the analytic side-quantities that go with it.

mod circle;
mod lcs;
mod paris;
mod powers;
mod random;
mod torus;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use circle::CircleSpace;
pub use lcs::{lcs_qk, LcsDistance, LcsSpace};
pub use paris::ParisSpace;
pub use powers::PowersOfTwoSpace;
pub use random::random_ranking_system;
pub use torus::{torus_distance, TorusSpace};

use crate::error::Result;

/// Parameters that regenerate a space exactly. Spaces serialize as this,
/// never as raw points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpaceSpec {
    /// Paris metric with `eta_i = i + 1`.
    Paris { n: usize },
    Circle { n_mean: usize, seed: u64, poissonize: bool },
    PowersOfTwo { n: usize },
    Lcs { n: usize, m: usize, alphabet: Vec<f64>, seed: u64 },
    RandomRanking { n: usize, seed: u64 },
    Torus { n_mean: f64, d: u32, seed: u64 },
}

/// Writes one row per point: `id,x0,x1,...`.
pub fn write_points_csv<W: Write>(w: W, dims: usize, coords: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["id".to_string()];
    header.extend((0..dims).map(|i| format!("x{i}")));
    wtr.write_record(&header)?;
    for (id, c) in coords.enumerate() {
        let mut rec = vec![id.to_string()];
        rec.extend(c.iter().map(|v| v.to_string()));
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}
