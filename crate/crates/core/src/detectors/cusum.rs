//! Page's cumulative-sum rule for a simple pre/post pair.

use crate::distributions::DistributionModel;
use crate::error::{Error, Result};

/// CuSum statistic for detecting a change from `from` to `to`:
///
/// ```text
/// S(t) = max(0, S(t-1) + log(to(x_t) / from(x_t)))
/// ```
///
/// which equals the running maximum over all change hypotheses k of the
/// log-likelihood ratio of the suffix x_k..x_t (the empty suffix contributes
/// zero, so the statistic is never negative).
#[derive(Debug, Clone)]
pub struct CuSum {
    from: DistributionModel,
    to: DistributionModel,
    statistic: f64,
    t: u64,
}

impl CuSum {
    pub fn new(from: DistributionModel, to: DistributionModel) -> Self {
        Self { from, to, statistic: 0.0, t: 0 }
    }

    /// Consume one observation and return the updated statistic.
    pub fn step(&mut self, x: f64) -> Result<f64> {
        let llr = self.to.log_density(x)? - self.from.log_density(x)?;
        if !llr.is_finite() {
            return Err(Error::NonFinite("cusum log-likelihood ratio"));
        }
        self.statistic = (self.statistic + llr).max(0.0);
        self.t += 1;
        Ok(self.statistic)
    }

    pub fn statistic(&self) -> f64 {
        self.statistic
    }

    pub fn time(&self) -> u64 {
        self.t
    }

    pub fn reset(&mut self) {
        self.statistic = 0.0;
        self.t = 0;
    }
}
