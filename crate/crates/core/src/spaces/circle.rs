use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::ranking::Metric;
use crate::rng::seeded;

/// Points on the unit circle under the path (arc-length) metric.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleSpace {
    angles: Vec<f64>,
    seed: u64,
}

impl CircleSpace {
    /// `n_mean` i.i.d. uniform angles, or a Poisson(`n_mean`) number of them.
    pub fn sample(n_mean: usize, seed: u64, poissonize: bool) -> Self {
        let mut rng = seeded(seed);
        let n = if poissonize {
            Poisson::new(n_mean.max(1) as f64).expect("positive mean").sample(&mut rng) as usize
        } else {
            n_mean
        };
        let angles = (0..n).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        CircleSpace { angles, seed }
    }

    pub fn from_angles(angles: Vec<f64>) -> Self {
        CircleSpace { angles, seed: 0 }
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl Metric for CircleSpace {
    fn len(&self) -> usize {
        self.angles.len()
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        let t = (self.angles[i] - self.angles[j]).abs();
        t.min(2.0 * PI - t)
    }
}
