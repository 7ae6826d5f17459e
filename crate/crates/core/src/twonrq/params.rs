use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scaling constants of a 2NRQ run on the d-dimensional torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoNrqParams {
    /// Mean point count.
    pub n: f64,
    /// Target mean degree.
    pub k: f64,
    pub d: u32,
    /// Largest success rate the schedule may reach.
    pub alpha: f64,
    /// `-ln(1 - alpha) / alpha`.
    pub beta: f64,
    /// `1 - sqrt(1 - 2 / K^(1/d))`.
    pub gamma: f64,
    /// `1 - sqrt(1 - 2 (beta/K)^(1/d))`.
    pub gamma_star: f64,
    /// Upper bound on the length of the explicit-formula phase.
    pub t_prime_bound: f64,
}

impl TwoNrqParams {
    /// `2^d`.
    pub fn two_d(&self) -> f64 {
        2f64.powi(self.d as i32)
    }

    /// Smallest admissible `r^d`, namely `K / (n alpha)`.
    pub fn min_volume_ratio(&self) -> f64 {
        self.k / (self.n * self.alpha)
    }

    /// `θ = K / (n r^d)`.
    pub fn rate_at(&self, r: f64) -> f64 {
        self.k / (self.n * r.powi(self.d as i32))
    }

    /// `alpha gamma^d`, the guaranteed floor for the final success rate.
    pub fn final_rate_floor(&self) -> f64 {
        self.alpha * self.gamma.powi(self.d as i32)
    }

    /// Round bound `t' + ln(n alpha / K) / (d ln(1/gamma*))` for a given `t'`.
    pub fn round_bound(&self, t_prime: usize) -> f64 {
        t_prime as f64 + (self.n * self.alpha / self.k).ln() / (self.d as f64 * (1.0 / self.gamma_star).ln())
    }
}

pub fn derive_params(n: f64, k: f64, d: u32, alpha: f64) -> Result<TwoNrqParams> {
    if d == 0 || d > 30 {
        return Err(Error::Parameter(format!("dimension must be in 1..=30 (d = {d})")));
    }
    if !(n.is_finite() && k.is_finite() && n > 0.0 && k > 0.0) {
        return Err(Error::Parameter("n and K must be positive and finite".into()));
    }
    let two_d = 2f64.powi(d as i32);
    if k <= two_d {
        return Err(Error::DimensionTooHigh { k, d });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!("alpha must lie in (0, 1) (alpha = {alpha})")));
    }
    if n * alpha <= k {
        return Err(Error::Parameter(format!("need n alpha > K (n = {n}, K = {k}, alpha = {alpha})")));
    }
    let beta = -(-alpha).ln_1p() / alpha;
    if !(beta > 1.0 && beta < k / two_d) {
        return Err(Error::Parameter(format!("beta = {beta} must lie in (1, K/2^d = {})", k / two_d)));
    }
    let df = d as f64;
    let gamma = 1.0 - (1.0 - 2.0 / k.powf(1.0 / df)).sqrt();
    let gamma_star = 1.0 - (1.0 - 2.0 * (beta / k).powf(1.0 / df)).sqrt();
    let l = (k / beta).log2();
    let t_prime_bound = (l / (l - df)).log2();
    Ok(TwoNrqParams { n, k, d, alpha, beta, gamma, gamma_star, t_prime_bound })
}

/// Guaranteed overlap ratio `min(1, (2r - s)^d)` of two r-balls whose
/// centers are `s` apart; 0 once `s >= 2r`.
pub fn g_min_overlap(s: f64, r: f64, d: u32) -> f64 {
    if s >= 2.0 * r {
        return 0.0;
    }
    (2.0 * r - s).powi(d as i32).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_parameters() {
        let p = derive_params(1e7, 28.0, 4, 0.5).unwrap();
        assert!((p.beta - 2f64.ln() * 2.0).abs() < 1e-12);
        assert!((p.gamma - 0.638_67).abs() < 1e-4);
        assert!((p.gamma_star - 0.762_13).abs() < 1e-4);
        assert!(p.gamma < p.gamma_star && p.gamma_star < 1.0);
    }

    #[test]
    fn one_dimensional_gamma() {
        let p = derive_params(1e4, 3.0, 1, 0.3).unwrap();
        assert!((p.gamma - (1.0 - (1.0f64 / 3.0).sqrt())).abs() < 1e-12);
    }

    #[test]
    fn small_alpha_limit() {
        let a = 1e-6;
        let p = derive_params(1e9, 28.0, 4, a).unwrap();
        assert!((p.beta - (1.0 + a / 2.0)).abs() < 1e-6);
    }

    #[test]
    fn rejections() {
        assert!(matches!(derive_params(1e4, 16.0, 4, 0.5), Err(Error::DimensionTooHigh { .. })));
        assert!(matches!(derive_params(1e4, 12.0, 2, 0.0), Err(Error::Parameter(_))));
        // beta(0.99) ≈ 4.65 > 12/4.
        assert!(matches!(derive_params(1e4, 12.0, 2, 0.99), Err(Error::Parameter(_))));
    }

    #[test]
    fn overlap_ratio() {
        assert!((g_min_overlap(0.3, 0.3, 3) - 0.3f64.powi(3)).abs() < 1e-15);
        assert_eq!(g_min_overlap(0.2, 0.7, 2), 1.0);
        assert!((g_min_overlap(0.3, 0.4, 2) - 0.25).abs() < 1e-15);
        assert_eq!(g_min_overlap(0.9, 0.4, 2), 0.0);
    }
}
