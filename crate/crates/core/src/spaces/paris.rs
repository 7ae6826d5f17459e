use crate::error::{Error, Result};
use crate::ranking::Metric;

/// Leaves of a weighted star: `d(x_i, x_j) = eta_i + eta_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParisSpace {
    etas: Vec<f64>,
}

impl ParisSpace {
    pub fn new(etas: Vec<f64>) -> Result<Self> {
        if etas.iter().any(|&e| !(e.is_finite() && e > 0.0)) {
            return Err(Error::input("Paris weights must be positive and finite"));
        }
        if etas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::input("Paris weights must be strictly increasing"));
        }
        Ok(ParisSpace { etas })
    }

    /// `eta = (1, 2, ..., n)`.
    pub fn standard(n: usize) -> Self {
        ParisSpace { etas: (1..=n).map(|i| i as f64).collect() }
    }

    pub fn etas(&self) -> &[f64] {
        &self.etas
    }

    pub fn paris_distance(&self, i: usize, j: usize) -> Result<f64> {
        if i == j {
            return Err(Error::input("Paris distance needs two distinct points"));
        }
        let n = self.etas.len();
        if i >= n || j >= n {
            return Err(Error::input(format!("point index out of range (n = {n})")));
        }
        Ok(self.etas[i] + self.etas[j])
    }
}

impl Metric for ParisSpace {
    fn len(&self) -> usize {
        self.etas.len()
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            self.etas[i] + self.etas[j]
        }
    }
}
