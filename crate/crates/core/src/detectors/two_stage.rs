//! Two-stage baseline: declare the nuisance change first, then restart.
//!
//! Stage one runs three CuSum statistics from the initial density f: two
//! critical ones (toward g and toward g_n, thresholded at `b_c`) and one
//! nuisance one (toward f_n, thresholded at `b_n`). If a critical statistic
//! crosses first the detector stops. If the nuisance statistic crosses first,
//! the detector declares the nuisance change, discards everything, and runs a
//! fresh CuSum from f_n toward g_n on the *subsequent* samples (stage two).
//! When both cross on the same sample the critical verdict wins.
//!
//! The reported statistic is the active critical statistic, so the rule stops
//! when `statistic() >= b_c`. Samples spent before the stage switch are lost
//! to stage two, which is what makes this baseline slow when the nuisance
//! change precedes the critical one.

use crate::error::{Error, Result};
use crate::signal::QuadModels;

use super::cusum::CuSum;

/// Which stage the detector is in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoStageStage {
    /// Watching for either change from the initial density f.
    First,
    /// Nuisance change declared; watching f_n -> g_n only.
    Second,
}

#[derive(Debug, Clone)]
pub struct TwoStage {
    b_c: f64,
    b_n: f64,
    crit_g: CuSum,
    crit_gn: CuSum,
    nuisance: CuSum,
    stage_two: CuSum,
    stage: TwoStageStage,
    statistic: f64,
    t: u64,
    /// 1-based time of the sample on which the nuisance change was declared.
    switched_at: Option<u64>,
}

impl TwoStage {
    pub fn new(models: QuadModels, b_c: f64, b_n: f64) -> Result<Self> {
        if !b_c.is_finite() || !b_n.is_finite() || b_n < 0.0 {
            return Err(Error::InvalidParameter(
                "two-stage thresholds must be finite and b_n nonnegative".into(),
            ));
        }
        Ok(Self {
            b_c,
            b_n,
            crit_g: CuSum::new(models.f.clone(), models.g.clone()),
            crit_gn: CuSum::new(models.f.clone(), models.g_n.clone()),
            nuisance: CuSum::new(models.f.clone(), models.f_n.clone()),
            stage_two: CuSum::new(models.f_n.clone(), models.g_n.clone()),
            stage: TwoStageStage::First,
            statistic: 0.0,
            t: 0,
            switched_at: None,
        })
    }

    /// Consume one observation; returns the active critical statistic.
    pub fn step(&mut self, x: f64) -> Result<f64> {
        self.t += 1;
        match self.stage {
            TwoStageStage::First => {
                let s_g = self.crit_g.step(x)?;
                let s_gn = self.crit_gn.step(x)?;
                let s_nuis = self.nuisance.step(x)?;
                let crit = s_g.max(s_gn);
                if crit < self.b_c && s_nuis >= self.b_n {
                    self.stage = TwoStageStage::Second;
                    self.switched_at = Some(self.t);
                    // Stage two starts on the *next* sample.
                    self.statistic = self.stage_two.statistic();
                } else {
                    self.statistic = crit;
                }
            }
            TwoStageStage::Second => {
                self.statistic = self.stage_two.step(x)?;
            }
        }
        Ok(self.statistic)
    }

    pub fn statistic(&self) -> f64 {
        self.statistic
    }

    pub fn stage(&self) -> TwoStageStage {
        self.stage
    }

    pub fn time(&self) -> u64 {
        self.t
    }

    /// Time of the stage switch, if it happened.
    pub fn switched_at(&self) -> Option<u64> {
        self.switched_at
    }

    pub fn critical_threshold(&self) -> f64 {
        self.b_c
    }

    pub fn nuisance_threshold(&self) -> f64 {
        self.b_n
    }
}
