use std::io::Write;

use serde::Serialize;

use super::params::{g_min_overlap, TwoNrqParams};
use crate::error::{Error, Result};

const BISECTION_TOL: f64 = 1e-12;
const BISECTION_MAX_ITER: usize = 200;

/// Radii `1 = r_0 > r_1 > ... > r_tau` and their success rates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    pub params: TwoNrqParams,
    pub radii: Vec<f64>,
    pub rates: Vec<f64>,
    /// Whether step `t` came from the explicit formula (false for `t = 0`).
    pub explicit: Vec<bool>,
    /// Last step computed by the explicit formula (0 if none).
    pub t_prime: usize,
    pub tau: usize,
}

impl Schedule {
    /// Rows `t,r_t,theta_t,formula_used`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["t", "r_t", "theta_t", "formula_used"])?;
        for t in 0..=self.tau {
            let formula = match (t, self.explicit[t]) {
                (0, _) => "initial",
                (_, true) => "explicit",
                (_, false) => "bisection",
            };
            wtr.write_record([t.to_string(), self.radii[t].to_string(), self.rates[t].to_string(), formula.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Next radius from the previous one, and whether the explicit formula
/// produced it.
///
/// With `θ' = K/(n r_prev^d)` the radius solves
/// `θ'^2 n g(r, r_prev) / 2^d = -ln(1 - K/(n r^d))`. While `2 r_prev - r >= 1`
/// the overlap term is 1 and the equation is solved in closed form;
/// otherwise by bisection on `(max(r_min, γ r_prev), r_prev)`.
pub fn solve_next_radius(params: &TwoNrqParams, r_prev: f64) -> Result<(f64, bool)> {
    let d = params.d;
    let df = d as f64;
    let vmin = params.min_volume_ratio();
    if !(r_prev > 0.0 && r_prev <= 1.0) || r_prev.powi(d as i32) < vmin * (1.0 - 1e-12) {
        return Err(Error::Parameter(format!("previous radius {r_prev} outside the admissible range")));
    }
    let theta_prev = params.rate_at(r_prev);
    let scale = theta_prev * theta_prev * params.n / params.two_d();
    if r_prev > 0.5 {
        let r = (params.k / (params.n * -(-scale).exp_m1())).powf(1.0 / df);
        if 2.0 * r_prev - r >= 1.0 {
            return Ok((r, true));
        }
    }
    let f = |r: f64| scale * g_min_overlap(r, r_prev, d) + (-params.k / (params.n * r.powi(d as i32))).ln_1p();
    let mut lo = vmin.powf(1.0 / df).max(params.gamma * r_prev);
    let mut hi = r_prev;
    let (f_lo, f_hi) = (f(lo), f(hi));
    if !(f_lo.is_finite() && f_hi.is_finite()) || f_lo.signum() == f_hi.signum() || lo >= hi {
        return Err(Error::ScheduleExhausted { r_prev });
    }
    let lo_positive = f_lo > 0.0;
    for _ in 0..BISECTION_MAX_ITER {
        if hi - lo <= BISECTION_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi), false))
}

/// Iterates [`solve_next_radius`] from `r_0 = 1` while `r^d >= K/(n alpha)`.
pub fn compute_schedule(params: &TwoNrqParams) -> Result<Schedule> {
    let vmin = params.min_volume_ratio();
    let mut radii = vec![1.0];
    let mut explicit = vec![false];
    let mut t_prime = 0;
    loop {
        let r_prev = *radii.last().expect("non-empty");
        let (r, used_explicit) = match solve_next_radius(params, r_prev) {
            Ok(step) => step,
            Err(Error::ScheduleExhausted { .. }) => break,
            Err(e) => return Err(e),
        };
        if r.powi(params.d as i32) < vmin {
            break;
        }
        if !(r < r_prev) {
            return Err(Error::Invariant(format!("radius did not shrink ({r_prev} -> {r})")));
        }
        radii.push(r);
        explicit.push(used_explicit);
        if used_explicit {
            t_prime = radii.len() - 1;
        }
    }
    let rates = radii.iter().map(|&r| params.rate_at(r)).collect();
    let tau = radii.len() - 1;
    Ok(Schedule { params: *params, radii, rates, explicit, t_prime, tau })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twonrq::params::derive_params;

    #[test]
    fn first_steps_are_explicit() {
        let p = derive_params(1e7, 28.0, 4, 0.5).unwrap();
        let (r1, e1) = solve_next_radius(&p, 1.0).unwrap();
        assert!(e1 && (r1 - 0.8694).abs() < 1e-4);
        let (r2, e2) = solve_next_radius(&p, r1).unwrap();
        assert!(e2 && (r2 - 0.6572).abs() < 1e-4);
        let (r3, e3) = solve_next_radius(&p, r2).unwrap();
        assert!(!e3 && (r3 - 0.420).abs() < 1e-3);
    }

    #[test]
    fn schedule_invariants() {
        for (n, k, d, a) in [(1e7, 28.0, 4, 0.5), (2e4, 12.0, 2, 0.5), (1e6, 40.0, 3, 0.3), (5e4, 7.0, 1, 0.8)] {
            let p = derive_params(n, k, d, a).unwrap();
            let s = compute_schedule(&p).unwrap();
            for t in 0..=s.tau {
                assert!((s.rates[t] * n * s.radii[t].powi(d as i32) - k).abs() < 1e-9 * k);
            }
            for t in 1..=s.tau {
                assert!(s.radii[t] < s.radii[t - 1]);
                if t > s.t_prime {
                    let ratio = s.radii[t] / s.radii[t - 1];
                    assert!(ratio > p.gamma && ratio <= p.gamma_star + 1e-12, "t = {t}, ratio = {ratio}");
                    let q = s.rates[t] / s.rates[t - 1];
                    assert!(q >= p.gamma_star.powi(-(d as i32)) * (1.0 - 1e-9) && q < p.gamma.powi(-(d as i32)));
                }
            }
            let last = s.rates[s.tau];
            assert!(last > p.final_rate_floor() && last <= a);
            assert!((s.tau as f64) < p.round_bound(s.t_prime));
            assert!((s.t_prime as f64) < p.t_prime_bound);
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let s = compute_schedule(&derive_params(2e4, 12.0, 2, 0.5).unwrap()).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,r_t,theta_t,formula_used\n0,1,"));
        assert_eq!(text.lines().count(), s.tau + 2);
    }
}
