use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::ranking::Metric;
use crate::rng::seeded;

/// Wrapped distance along one axis of circumference 2; lies in `[0, 1]`.
#[inline]
pub fn axis_distance(a: f64, b: f64) -> f64 {
    let t = (a - b).abs();
    t.min(2.0 - t)
}

/// l-infinity distance on the torus `[-1, 1)^d` with opposite faces glued.
#[inline]
pub fn torus_distance(u: &[f64], v: &[f64]) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    u.iter().zip(v).map(|(&a, &b)| axis_distance(a, b)).fold(0.0, f64::max)
}

/// Points of a homogeneous Poisson process on the d-dimensional torus.
///
/// The torus has volume `2^d` and diameter 1; a ball of radius `r < 1` is a
/// cube of side `2r`, so its volume ratio is `h(r) = r^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusSpace {
    d: usize,
    coords: Vec<f64>,
}

impl TorusSpace {
    /// Poisson(`n_mean`) points, coordinates i.i.d. uniform in `[-1, 1)`.
    pub fn poisson(n_mean: f64, d: usize, seed: u64) -> Self {
        assert!(n_mean >= 1.0 && d >= 1, "need n_mean >= 1 and d >= 1");
        let mut rng = seeded(seed);
        let n = Poisson::new(n_mean).expect("positive mean").sample(&mut rng) as usize;
        let coords = (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect();
        TorusSpace { d, coords }
    }

    pub fn from_points(d: usize, points: &[Vec<f64>]) -> Self {
        assert!(points.iter().all(|p| p.len() == d));
        TorusSpace { d, coords: points.concat() }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn volume(&self) -> f64 {
        2f64.powi(self.d as i32)
    }

    /// Ball-to-space volume ratio `h(r) = r^d`, for `r <= 1`.
    pub fn volume_ratio(&self, r: f64) -> f64 {
        r.powi(self.d as i32)
    }

    /// Per-axis wrapped offsets between points `i` and `j`.
    pub fn axis_offsets(&self, i: usize, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.point(i).iter().zip(self.point(j)).map(|(&a, &b)| axis_distance(a, b))
    }

    /// `nu_r(v, v') = lambda(B_r(v) ∩ B_r(v'))`, exactly.
    ///
    /// Each axis contributes the overlap of two arcs of length `2r` on a
    /// circle of circumference 2 whose centers are `t` apart.
    pub fn ball_overlap(&self, i: usize, j: usize, r: f64) -> f64 {
        self.axis_offsets(i, j).map(|t| arc_overlap(t, r)).product()
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.d)
    }
}

/// Overlap of two arcs of half-length `r` on a circle of circumference 2.
#[inline]
pub fn arc_overlap(t: f64, r: f64) -> f64 {
    ((2.0 * r - t).max(0.0) + (2.0 * r + t - 2.0).max(0.0)).min(2.0)
}

impl Metric for TorusSpace {
    fn len(&self) -> usize {
        TorusSpace::len(self)
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        torus_distance(self.point(i), self.point(j))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn direct_and_wrapped() {
        assert!((torus_distance(&[0.0, 0.0], &[0.3, -0.4]) - 0.4).abs() < 1e-12);
        assert!((torus_distance(&[0.9, 0.9], &[-0.9, -0.9]) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn symmetric_and_triangle_on_random_triples() {
        let mut rng = seeded(1);
        for _ in 0..10_000 {
            let p: Vec<Vec<f64>> = (0..3).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            let (ab, bc, ac) = (torus_distance(&p[0], &p[1]), torus_distance(&p[1], &p[2]), torus_distance(&p[0], &p[2]));
            assert_eq!(ab, torus_distance(&p[1], &p[0]));
            assert!(ac <= ab + bc + 1e-12);
            assert!((0.0..=1.0).contains(&ab));
        }
    }

    #[test]
    fn poisson_count_mean() {
        let mean = (0..10_000).map(|s| TorusSpace::poisson(50.0, 2, s).len() as f64).sum::<f64>() / 1e4;
        assert!((mean - 50.0).abs() < 1.5, "{mean}");
        assert_eq!(TorusSpace::poisson(50.0, 2, 3), TorusSpace::poisson(50.0, 2, 3));
    }

    #[test]
    fn ball_fraction_matches_volume_ratio() {
        let s = TorusSpace::poisson(1e4, 4, 17);
        let center = [0.0; 4];
        let inside = s.points().filter(|p| torus_distance(p, &center) <= 0.5).count();
        let frac = inside as f64 / s.len() as f64;
        assert!((frac - s.volume_ratio(0.5)).abs() < 0.01, "{frac}");
    }

    #[test]
    fn ratio_times_volume_is_cube_volume() {
        let s = TorusSpace::from_points(3, &[vec![0.0; 3]]);
        for r in [0.1, 0.5, 0.9] {
            assert!((s.volume_ratio(r) * s.volume() - (2.0 * r).powi(3)).abs() < 1e-12);
        }
    }

    #[test]
    fn overlap_cases() {
        let s = TorusSpace::from_points(1, &[vec![0.0], vec![0.3]]);
        assert!((s.ball_overlap(0, 1, 0.4) - 0.5).abs() < 1e-12);
        assert!((s.ball_overlap(0, 0, 0.4) - 0.8).abs() < 1e-12);
        let s2 = TorusSpace::from_points(2, &[vec![0.1, 0.2], vec![0.1, 0.2]]);
        assert!((s2.ball_overlap(0, 1, 0.3) - 0.36).abs() < 1e-12);
        // whole-torus balls
        assert!((s.ball_overlap(0, 1, 1.0) - 2.0).abs() < 1e-12);
    }
}
