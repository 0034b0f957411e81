//! The four-regime signal model.
//!
//! An observed stream is i.i.d. within regimes delimited by two unknown
//! change points: the nuisance change at time `nu_n` and the critical change
//! at `nu_c` (both 1-based, either may be absent). The density of the sample
//! at time t is
//!
//! ```text
//!   f      if t <  min(nu_c, nu_n)
//!   f_n    if nu_n <= t < nu_c
//!   g      if nu_c <= t < nu_n
//!   g_n    if max(nu_c, nu_n) <= t
//! ```
//!
//! so when both changes land on the same index the stream jumps straight
//! from `f` to `g_n`. Absent change points are encoded as `None`.

use serde::{Deserialize, Serialize};

use crate::distributions::DistributionModel;
use crate::error::{Error, Result};
use rand::Rng;

/// The four densities of a detection problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadModels {
    /// Pre-change density.
    pub f: DistributionModel,
    /// Nuisance post-change density.
    #[serde(rename = "fn")]
    pub f_n: DistributionModel,
    /// Critical post-change density.
    pub g: DistributionModel,
    /// Density once both changes have occurred.
    #[serde(rename = "gn")]
    pub g_n: DistributionModel,
}

/// A concrete scenario: four densities plus the (possibly absent) change
/// points. `None` means the change never happens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadScenario {
    #[serde(flatten)]
    pub models: QuadModels,
    #[serde(default)]
    pub nu_n: Option<u64>,
    #[serde(default)]
    pub nu_c: Option<u64>,
}

/// t < nu, with `None` standing for infinity.
fn strictly_before(t: u64, nu: Option<u64>) -> bool {
    match nu {
        Some(v) => t < v,
        None => true,
    }
}

impl QuadScenario {
    pub fn new(models: QuadModels, nu_n: Option<u64>, nu_c: Option<u64>) -> Result<Self> {
        let scenario = Self { models, nu_n, nu_c };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, nu) in [("nu_n", self.nu_n), ("nu_c", self.nu_c)] {
            if nu == Some(0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = 0: change points are 1-based; use null for no change"
                )));
            }
        }
        Ok(())
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let scenario: Self = serde_json::from_str(json)?;
        scenario.validate()?;
        Ok(scenario)
    }

    /// The density in force at time `t` (1-based).
    pub fn distribution_at(&self, t: u64) -> &DistributionModel {
        assert!(t >= 1, "time indices are 1-based");
        match (strictly_before(t, self.nu_n), strictly_before(t, self.nu_c)) {
            (true, true) => &self.models.f,
            (false, true) => &self.models.f_n,
            (true, false) => &self.models.g,
            (false, false) => &self.models.g_n,
        }
    }

    /// Draw the sample at time `t`.
    pub fn sample_at<R: Rng>(&self, t: u64, rng: &mut R) -> Result<f64> {
        self.distribution_at(t).sample(rng)
    }

    /// Generate the first `len` samples of the stream.
    pub fn generate<R: Rng>(&self, len: usize, rng: &mut R) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(len);
        for t in 1..=len as u64 {
            out.push(self.sample_at(t, rng)?);
        }
        Ok(out)
    }
}
