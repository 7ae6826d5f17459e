//! Second-neighbor range queries (2NRQ) on a Poisson process in the
//! l-infinity torus `[-1, 1)^d`.
//!
//! Round `t` keeps, for each vertex, a rate-`θ_t` sample of the points within
//! radius `r_t`. Hubs introduce their neighbors to each other; a pair within
//! `r_t` is joined after an acceptance test that corrects for how much the
//! two previous-round balls overlap.

mod params;
mod schedule;
mod sim;

pub use params::{derive_params, g_min_overlap, TwoNrqParams};
pub use schedule::{compute_schedule, solve_next_radius, Schedule};
pub use sim::{
    init_e0, range_query_round, run_2nrq, verify_sampling_property, RoundReport, SamplingReport, SimOptions,
    TwoNrqRun, TwoNrqState, WorkReport,
};

use crate::spaces::TorusSpace;

/// `ν_r(v, v')`: volume of the intersection of the two r-balls.
pub fn nu_overlap(space: &TorusSpace, v: usize, w: usize, r: f64) -> f64 {
    space.ball_overlap(v, w, r)
}
