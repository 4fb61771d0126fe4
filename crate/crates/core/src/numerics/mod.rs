//! Special functions and adaptive quadrature.

mod quadrature;
mod special;

pub use quadrature::{
    integrate, integrate_with_budget, Interval, QuadratureResult, DEFAULT_ABS_TOL,
    DEFAULT_MAX_EVALUATIONS, DEFAULT_REL_TOL,
};
pub use special::{
    digamma, ln_beta, ln_gamma, ln_gamma_diff, regularized_incomplete_beta, trigamma,
};

pub(crate) use special::{incomplete_beta_pair, ln_t_normalization};

/// Compensated (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_keeps_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }
}
