//! Stopping rules for quickest change detection subject to nuisance changes.
//!
//! All detectors consume one observation per [`AnyDetector::step`] call and
//! expose a scalar decision statistic; a rule stops the first time the
//! statistic reaches its threshold b. The family:
//!
//! * [`CuSum`] — classical Page rule for a simple f -> g change, blind to the
//!   nuisance structure.
//! * [`WindowSglr`] — window-limited simplified GLR, the recommended rule:
//!   O(m_b) per step.
//! * [`Fma`] — finite moving average, the single oldest window of the same
//!   statistic: cheapest, weakest.
//! * [`Sglr`] / [`Glr`] — unbounded-window references, O(t) per step.
//! * [`TwoStage`] — declare-nuisance-then-restart baseline.
//! * [`GenWsglr`](crate::generalized::GenWsglr) — window-limited rule with the
//!   post-change density known only up to a parametric family.

mod cusum;
mod exhaustive;
pub mod oracle;
mod two_stage;
mod window;

pub use cusum::CuSum;
pub use exhaustive::{Glr, Sglr};
pub use two_stage::{TwoStage, TwoStageStage};
pub use window::{denom_step, Fma, WindowSglr};

use serde::{Deserialize, Serialize};

use crate::distributions::growth_rates;
use crate::error::{Error, Result};
use crate::generalized::{GenFamily, GenWsglr};
use crate::signal::QuadModels;

/// Window size for a threshold b and worst-case post-change drift
/// `growth_rate` (the smallest of the four relevant KL divergences): the
/// smallest power of two at least `2 b / growth_rate`, so that the window
/// comfortably contains the expected crossing excursion. An explicit
/// `override_m` short-circuits the rule.
pub fn choose_window(b: f64, growth_rate: f64, override_m: Option<usize>) -> Result<usize> {
    if let Some(m) = override_m {
        if m == 0 {
            return Err(Error::InvalidParameter("window override must be >= 1".into()));
        }
        return Ok(m);
    }
    if !b.is_finite() || b <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "threshold must be positive and finite, got {b}"
        )));
    }
    if !growth_rate.is_finite() || growth_rate <= 0.0 {
        return Err(Error::NonPositiveRate(growth_rate));
    }
    let target = 2.0 * b / growth_rate;
    let mut m = 1usize;
    while (m as f64) < target {
        m = m
            .checked_mul(2)
            .ok_or_else(|| Error::InvalidParameter("window size overflow".into()))?;
    }
    Ok(m)
}

/// Result of one detector step.
#[derive(Debug, Clone, Copy)]
pub struct Step {
    /// Decision statistic after consuming the observation.
    pub statistic: f64,
    /// For detectors whose stopping condition is not a plain threshold
    /// comparison on `statistic` (two-stage, generalized), the firing verdict
    /// against their internally configured threshold.
    fired_hint: Option<bool>,
}

impl Step {
    pub(crate) fn threshold(statistic: f64) -> Self {
        Self { statistic, fired_hint: None }
    }

    pub(crate) fn verdict(statistic: f64, fired: bool) -> Self {
        Self { statistic, fired_hint: Some(fired) }
    }

    /// Did the detector fire at threshold `b` on this step?
    pub fn fired(&self, b: f64) -> bool {
        self.fired_hint.unwrap_or(self.statistic >= b)
    }
}

/// Which stopping rule to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    Cusum,
    Glr,
    Sglr,
    Wsglr,
    Fma,
    TwoStage,
    GenWsglr,
}

impl DetectorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Cusum => "cusum",
            Self::Glr => "glr",
            Self::Sglr => "sglr",
            Self::Wsglr => "wsglr",
            Self::Fma => "fma",
            Self::TwoStage => "two_stage",
            Self::GenWsglr => "gen_wsglr",
        }
    }
}

impl std::fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Serializable description of a detector plus its thresholds.
///
/// `b` is the decision threshold (the critical threshold `b_c` for the
/// two-stage rule). `m_b` defaults to [`choose_window`] with the scenario's
/// growth rate where a window is needed. `b_n`, `family`, `m_b_prime` and
/// `disable_interior_check` apply only to the detectors that use them.
/// An absent `b_n` ties the nuisance threshold to `b`, so a threshold sweep
/// moves both together; set it explicitly to hold it fixed instead.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    pub detector: DetectorKind,
    pub b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_b: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_n: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_b_prime: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<GenFamily>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub disable_interior_check: bool,
}

impl DetectorConfig {
    pub fn new(detector: DetectorKind, b: f64) -> Self {
        Self {
            detector,
            b,
            m_b: None,
            b_n: None,
            m_b_prime: None,
            family: None,
            disable_interior_check: false,
        }
    }

    pub fn with_window(mut self, m_b: usize) -> Self {
        self.m_b = Some(m_b);
        self
    }

    pub fn with_nuisance_threshold(mut self, b_n: f64) -> Self {
        self.b_n = Some(b_n);
        self
    }

    /// Same configuration at a different threshold.
    pub fn with_threshold(&self, b: f64) -> Self {
        let mut c = self.clone();
        c.b = b;
        c
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Does the statistic path depend on the threshold? If not, one simulated
    /// path can be scanned for crossings of many thresholds at once.
    pub fn path_depends_on_threshold(&self) -> bool {
        match self.detector {
            DetectorKind::Cusum | DetectorKind::Glr | DetectorKind::Sglr => false,
            // The default window is a function of b.
            DetectorKind::Wsglr | DetectorKind::Fma => self.m_b.is_none(),
            DetectorKind::TwoStage | DetectorKind::GenWsglr => true,
        }
    }

    fn resolve_window(&self, models: &QuadModels) -> Result<usize> {
        if let Some(m) = self.m_b {
            return choose_window(self.b, f64::NAN, Some(m));
        }
        let rates = growth_rates(&models.f, &models.f_n, &models.g, &models.g_n)?;
        choose_window(self.b, rates.growth_rate, None)
    }

    /// Instantiate the detector against a concrete model quadruple.
    pub fn build(&self, models: &QuadModels) -> Result<AnyDetector> {
        if !self.b.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "threshold must be finite, got {}",
                self.b
            )));
        }
        Ok(match self.detector {
            DetectorKind::Cusum => {
                AnyDetector::CuSum(CuSum::new(models.f.clone(), models.g.clone()))
            }
            DetectorKind::Glr => AnyDetector::Glr(Glr::new(models.clone())),
            DetectorKind::Sglr => AnyDetector::Sglr(Sglr::new(models.clone())),
            DetectorKind::Wsglr => {
                let m_b = self.resolve_window(models)?;
                AnyDetector::WindowSglr(WindowSglr::new(models.clone(), m_b)?)
            }
            DetectorKind::Fma => {
                let m_b = self.resolve_window(models)?;
                AnyDetector::Fma(Fma::new(models.clone(), m_b)?)
            }
            DetectorKind::TwoStage => {
                let b_n = self.b_n.unwrap_or(self.b);
                AnyDetector::TwoStage(TwoStage::new(models.clone(), self.b, b_n)?)
            }
            DetectorKind::GenWsglr => {
                let family = self.family.clone().ok_or_else(|| {
                    Error::InvalidParameter(
                        "gen_wsglr requires a post-change family description".into(),
                    )
                })?;
                let m_b = self.resolve_window(models)?;
                let m_b_prime = self
                    .m_b_prime
                    .unwrap_or_else(|| (family.param_dim() + 1).max(2));
                AnyDetector::Gen(GenWsglr::new(
                    models.f.clone(),
                    models.f_n.clone(),
                    family,
                    m_b,
                    m_b_prime,
                    self.b,
                    self.disable_interior_check,
                )?)
            }
        })
    }
}

/// Any of the supported detectors behind one stepping interface.
#[derive(Debug, Clone)]
pub enum AnyDetector {
    CuSum(CuSum),
    WindowSglr(WindowSglr),
    Fma(Fma),
    Sglr(Sglr),
    Glr(Glr),
    TwoStage(TwoStage),
    Gen(GenWsglr),
}

impl AnyDetector {
    pub fn step(&mut self, x: f64) -> Result<Step> {
        Ok(match self {
            Self::CuSum(d) => Step::threshold(d.step(x)?),
            Self::WindowSglr(d) => Step::threshold(d.step(x)?),
            Self::Fma(d) => Step::threshold(d.step(x)?),
            Self::Sglr(d) => Step::threshold(d.step(x)?),
            Self::Glr(d) => Step::threshold(d.step(x)?),
            Self::TwoStage(d) => {
                let s = d.step(x)?;
                Step::verdict(s, s >= d.critical_threshold())
            }
            Self::Gen(d) => {
                let out = d.step(x)?;
                Step::verdict(out.statistic, out.fired)
            }
        })
    }

    pub fn statistic(&self) -> f64 {
        match self {
            Self::CuSum(d) => d.statistic(),
            Self::WindowSglr(d) => d.statistic(),
            Self::Fma(d) => d.statistic(),
            Self::Sglr(d) => d.statistic(),
            Self::Glr(d) => d.statistic(),
            Self::TwoStage(d) => d.statistic(),
            Self::Gen(d) => d.statistic(),
        }
    }

    pub fn kind(&self) -> DetectorKind {
        match self {
            Self::CuSum(_) => DetectorKind::Cusum,
            Self::WindowSglr(_) => DetectorKind::Wsglr,
            Self::Fma(_) => DetectorKind::Fma,
            Self::Sglr(_) => DetectorKind::Sglr,
            Self::Glr(_) => DetectorKind::Glr,
            Self::TwoStage(_) => DetectorKind::TwoStage,
            Self::Gen(_) => DetectorKind::GenWsglr,
        }
    }

    /// The threshold baked into the detector at construction, if any.
    pub fn internal_threshold(&self) -> Option<f64> {
        match self {
            Self::TwoStage(d) => Some(d.critical_threshold()),
            Self::Gen(d) => Some(d.threshold()),
            _ => None,
        }
    }

    pub fn as_two_stage(&self) -> Option<&TwoStage> {
        match self {
            Self::TwoStage(d) => Some(d),
            _ => None,
        }
    }

    pub fn as_gen(&self) -> Option<&GenWsglr> {
        match self {
            Self::Gen(d) => Some(d),
            _ => None,
        }
    }
}

/// Outcome of running a detector over a stream until it stops or the horizon
/// is exhausted.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RunOutcome {
    /// 1-based stopping time; `None` if censored at the horizon.
    pub tau: Option<u64>,
    pub threshold: f64,
    pub horizon: u64,
    /// Stop strictly before the critical change (always true for a stop when
    /// there is no critical change).
    pub false_alarm: bool,
    /// `tau - nu_c + 1` for a stop at or after the critical change.
    pub detection_delay: Option<u64>,
}

impl RunOutcome {
    pub(crate) fn stopped(tau: u64, threshold: f64, horizon: u64, nu_c: Option<u64>) -> Self {
        let false_alarm = match nu_c {
            Some(v) => tau < v,
            None => true,
        };
        let detection_delay = match nu_c {
            Some(v) if tau >= v => Some(tau - v + 1),
            _ => None,
        };
        Self { tau: Some(tau), threshold, horizon, false_alarm, detection_delay }
    }

    pub(crate) fn censored(threshold: f64, horizon: u64) -> Self {
        Self { tau: None, threshold, horizon, false_alarm: false, detection_delay: None }
    }
}

/// Feed observations to `detector` until it fires at threshold `b` or
/// `horizon` samples are exhausted (the stream running dry censors early).
///
/// `nu_c` is the true critical change time used to classify the stop; pass
/// `None` when no critical change occurs. For detectors with internal
/// thresholds (two-stage, generalized) `b` must match the built-in value.
pub fn run_until_stop<I>(
    detector: &mut AnyDetector,
    xs: I,
    b: f64,
    horizon: u64,
    nu_c: Option<u64>,
) -> Result<RunOutcome>
where
    I: IntoIterator<Item = f64>,
{
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    if let Some(internal) = detector.internal_threshold() {
        if (internal - b).abs() > 1e-12 {
            return Err(Error::PlanMismatch(format!(
                "detector was built with threshold {internal} but asked to run at {b}"
            )));
        }
    }
    let mut t: u64 = 0;
    for x in xs.into_iter().take(horizon as usize) {
        t += 1;
        let step = detector.step(x)?;
        if step.fired(b) {
            return Ok(RunOutcome::stopped(t, b, horizon, nu_c));
        }
    }
    Ok(RunOutcome::censored(b, horizon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DistributionModel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn quad() -> QuadModels {
        QuadModels {
            f: DistributionModel::gaussian(0.0, 1.0).unwrap(),
            f_n: DistributionModel::gaussian(2.0, 1.0).unwrap(),
            g: DistributionModel::gaussian(0.0, 10.0).unwrap(),
            g_n: DistributionModel::gaussian(2.0, 10.0).unwrap(),
        }
    }

    #[test]
    fn window_rule_rounds_up_to_a_power_of_two() {
        // 2 * 10 / 3.3487... = 5.97..., next power of two is 8.
        assert_eq!(choose_window(10.0, 3.348_707_453_502_977, None).unwrap(), 8);
        // Exact powers of two stay put.
        assert_eq!(choose_window(8.0, 1.0, None).unwrap(), 16);
        assert_eq!(choose_window(2.0, 1.0, None).unwrap(), 4);
        // Tiny targets floor at 1.
        assert_eq!(choose_window(1e-6, 10.0, None).unwrap(), 1);
        // Overrides win.
        assert_eq!(choose_window(10.0, 3.3, Some(300)).unwrap(), 300);
        assert!(choose_window(10.0, 0.0, None).is_err());
        assert!(choose_window(10.0, f64::NAN, None).is_err());
        assert!(choose_window(-1.0, 1.0, None).is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let text = r#"{"detector":"wsglr","b":10.0,"m_b":256}"#;
        let config = DetectorConfig::from_json(text).unwrap();
        assert_eq!(config.detector, DetectorKind::Wsglr);
        assert_eq!(config.m_b, Some(256));
        let again: DetectorConfig =
            serde_json::from_str(&serde_json::to_string(&config).unwrap()).unwrap();
        assert_eq!(again.detector, DetectorKind::Wsglr);
        assert!(DetectorConfig::from_json(r#"{"detector":"wsglr","b":1.0,"mb":4}"#).is_err());
    }

    #[test]
    fn default_window_uses_the_growth_rate() {
        let config = DetectorConfig::new(DetectorKind::Wsglr, 10.0);
        let det = config.build(&quad()).unwrap();
        match det {
            AnyDetector::WindowSglr(w) => assert_eq!(w.window(), 8),
            _ => panic!("wrong detector"),
        }
    }

    #[test]
    fn two_stage_nuisance_threshold_defaults_to_b() {
        let config = DetectorConfig::new(DetectorKind::TwoStage, 5.0);
        let tied = config.build(&quad()).unwrap();
        match tied {
            AnyDetector::TwoStage(d) => assert_eq!(d.nuisance_threshold(), 5.0),
            _ => panic!("wrong detector"),
        }
        let pinned = config.with_nuisance_threshold(2.0).build(&quad()).unwrap();
        match pinned {
            AnyDetector::TwoStage(d) => assert_eq!(d.nuisance_threshold(), 2.0),
            _ => panic!("wrong detector"),
        }
    }

    #[test]
    fn run_stops_and_classifies_false_alarms() {
        let models = quad();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        // Critical change at t = 1: everything is g.
        let scenario =
            crate::signal::QuadScenario::new(models.clone(), None, Some(1)).unwrap();
        let xs = scenario.generate(400, &mut rng).unwrap();
        let mut det = DetectorConfig::new(DetectorKind::Wsglr, 6.0)
            .with_window(64)
            .build(&models)
            .unwrap();
        let out = run_until_stop(&mut det, xs.iter().copied(), 6.0, 400, Some(1)).unwrap();
        let tau = out.tau.expect("variance jump of 10x should be caught in 400 samples");
        assert!(!out.false_alarm);
        assert_eq!(out.detection_delay, Some(tau));
    }

    #[test]
    fn run_censors_at_horizon_and_marks_no_change_stops_as_false_alarms() {
        let models = quad();
        let mut det = DetectorConfig::new(DetectorKind::Wsglr, 50.0)
            .with_window(16)
            .build(&models)
            .unwrap();
        // All-f samples never push the statistic to 50.
        let xs = vec![0.0; 100];
        let out = run_until_stop(&mut det, xs.iter().copied(), 50.0, 100, None).unwrap();
        assert_eq!(out.tau, None);
        assert!(!out.false_alarm);

        let mut det = DetectorConfig::new(DetectorKind::Wsglr, 1e-12)
            .with_window(16)
            .build(&models)
            .unwrap();
        let out = run_until_stop(&mut det, [5.0, 5.0].iter().copied(), 1e-12, 100, None).unwrap();
        assert!(out.tau.is_some());
        assert!(out.false_alarm, "a stop with no critical change is a false alarm");
    }

    #[test]
    fn mismatched_internal_threshold_is_rejected() {
        let models = quad();
        let config = DetectorConfig::new(DetectorKind::TwoStage, 5.0).with_nuisance_threshold(2.0);
        let mut det = config.build(&models).unwrap();
        let err = run_until_stop(&mut det, [0.0].iter().copied(), 7.0, 10, None);
        assert!(err.is_err());
    }
}
