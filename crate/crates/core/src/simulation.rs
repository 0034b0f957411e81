//! Monte-Carlo estimation of run-length and detection-delay operating
//! characteristics.
//!
//! A [`TrialPlan`] bundles a model quadruple, change-point policies, a
//! detector configuration, and reproducibility parameters. Every trial i
//! derives its RNG seed as `base_seed XOR i`, so runs are bitwise
//! reproducible regardless of thread scheduling (trials are farmed out with
//! rayon but collected in index order).
//!
//! * [`estimate_arl`] — average run length to false alarm: the plan must have
//!   no critical change; censored trials count at the horizon, so the
//!   estimate is a lower bound when censoring occurs.
//! * [`estimate_add`] — average detection delay `tau - nu_c + 1` over trials
//!   that stop at or after the critical change; stops before it are tallied
//!   as false alarms and horizon exhaustions as censored, never mixed into
//!   the delay average.
//! * [`tradeoff_sweep`] — (ARL, ADD) pairs across thresholds. Detectors whose
//!   statistic path does not depend on the threshold are simulated once per
//!   trial and scanned for all crossings at once; the others are re-run per
//!   threshold with the same per-trial seeds, so both routes see identical
//!   streams.
//! * [`compare_detectors`] — the sweep for several detector plans that share
//!   everything but the detector.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::detectors::DetectorConfig;
use crate::error::{Error, Result};
use crate::signal::{QuadModels, QuadScenario};

/// How a change point is drawn for each trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy", content = "value")]
pub enum ChangePointPolicy {
    /// The change happens at this 1-based time in every trial.
    Fixed(u64),
    /// Uniform over 1..=horizon, drawn per trial.
    UniformOverHorizon,
    /// The change never happens.
    Never,
}

impl ChangePointPolicy {
    pub fn from_fixed(nu: Option<u64>) -> Self {
        match nu {
            Some(v) => Self::Fixed(v),
            None => Self::Never,
        }
    }

    fn draw<R: Rng>(&self, horizon: u64, rng: &mut R) -> Result<Option<u64>> {
        match self {
            Self::Fixed(v) => {
                if *v == 0 {
                    return Err(Error::InvalidParameter(
                        "change times are 1-based; 0 is invalid".into(),
                    ));
                }
                Ok(Some(*v))
            }
            Self::UniformOverHorizon => Ok(Some(rng.random_range(1..=horizon))),
            Self::Never => Ok(None),
        }
    }
}

/// Everything needed to reproduce a batch of Monte-Carlo trials.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialPlan {
    pub models: QuadModels,
    pub nu_n: ChangePointPolicy,
    pub nu_c: ChangePointPolicy,
    pub detector: DetectorConfig,
    pub n_trials: usize,
    pub horizon: u64,
    pub base_seed: u64,
}

impl TrialPlan {
    pub fn new(
        models: QuadModels,
        nu_n: ChangePointPolicy,
        nu_c: ChangePointPolicy,
        detector: DetectorConfig,
        n_trials: usize,
        horizon: u64,
        base_seed: u64,
    ) -> Self {
        Self { models, nu_n, nu_c, detector, n_trials, horizon, base_seed }
    }

    /// Fixed change points (or their absence) taken from a scenario.
    pub fn from_scenario(
        scenario: &QuadScenario,
        detector: DetectorConfig,
        n_trials: usize,
        horizon: u64,
        base_seed: u64,
    ) -> Self {
        Self::new(
            scenario.models.clone(),
            ChangePointPolicy::from_fixed(scenario.nu_n),
            ChangePointPolicy::from_fixed(scenario.nu_c),
            detector,
            n_trials,
            horizon,
            base_seed,
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let plan: Self = serde_json::from_str(text)?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::InvalidParameter("n_trials must be at least 1".into()));
        }
        if self.horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be at least 1".into()));
        }
        Ok(())
    }

    fn with_nu_c(&self, nu_c: ChangePointPolicy) -> Self {
        let mut p = self.clone();
        p.nu_c = nu_c;
        p
    }

    fn with_seed(&self, base_seed: u64) -> Self {
        let mut p = self.clone();
        p.base_seed = base_seed;
        p
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed tags keeping the no-change and with-change arms of a sweep on
/// disjoint random streams.
const ARL_ARM_TAG: u64 = 0x41524c_01;
const ADD_ARM_TAG: u64 = 0x414444_02;

/// Stopping times of one simulated trial scanned against several thresholds,
/// plus the change points that were drawn.
struct TrialResult {
    taus: Vec<Option<u64>>,
    nu_c: Option<u64>,
}

/// One trial, one statistic path, all thresholds at once. Only valid when the
/// statistic path does not depend on the threshold.
fn run_trial_multi(plan: &TrialPlan, trial: u64, thresholds: &[f64]) -> Result<TrialResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.base_seed ^ trial);
    let nu_n = plan.nu_n.draw(plan.horizon, &mut rng)?;
    let nu_c = plan.nu_c.draw(plan.horizon, &mut rng)?;
    let scenario = QuadScenario::new(plan.models.clone(), nu_n, nu_c)?;
    let mut detector = plan.detector.build(&plan.models)?;
    let mut taus = vec![None; thresholds.len()];
    let mut remaining = thresholds.len();
    for t in 1..=plan.horizon {
        let x = scenario.sample_at(t, &mut rng)?;
        let step = detector.step(x)?;
        for (tau, &b) in taus.iter_mut().zip(thresholds) {
            if tau.is_none() && step.statistic >= b {
                *tau = Some(t);
                remaining -= 1;
            }
        }
        if remaining == 0 {
            break;
        }
    }
    Ok(TrialResult { taus, nu_c })
}

/// One trial at one threshold, rebuilding the detector so threshold-dependent
/// internals (stage switching, verdict checks, default windows) see `b`.
fn run_trial_single(plan: &TrialPlan, trial: u64, b: f64) -> Result<TrialResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.base_seed ^ trial);
    let nu_n = plan.nu_n.draw(plan.horizon, &mut rng)?;
    let nu_c = plan.nu_c.draw(plan.horizon, &mut rng)?;
    let scenario = QuadScenario::new(plan.models.clone(), nu_n, nu_c)?;
    let mut detector = plan.detector.with_threshold(b).build(&plan.models)?;
    let mut tau = None;
    for t in 1..=plan.horizon {
        let x = scenario.sample_at(t, &mut rng)?;
        let step = detector.step(x)?;
        if step.fired(b) {
            tau = Some(t);
            break;
        }
    }
    Ok(TrialResult { taus: vec![tau], nu_c })
}

/// All trials of a plan against several thresholds; `results[trial].taus[i]`
/// is the stopping time at `thresholds[i]`.
fn run_all_trials(plan: &TrialPlan, thresholds: &[f64]) -> Result<Vec<TrialResult>> {
    plan.validate()?;
    if plan.detector.path_depends_on_threshold() {
        (0..plan.n_trials as u64)
            .into_par_iter()
            .map(|trial| {
                let per_b = thresholds
                    .iter()
                    .map(|&b| run_trial_single(plan, trial, b))
                    .collect::<Result<Vec<_>>>()?;
                Ok(TrialResult {
                    nu_c: per_b.first().and_then(|r| r.nu_c),
                    taus: per_b.into_iter().map(|r| r.taus[0]).collect(),
                })
            })
            .collect()
    } else {
        (0..plan.n_trials as u64)
            .into_par_iter()
            .map(|trial| run_trial_multi(plan, trial, thresholds))
            .collect()
    }
}

fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Estimated average run length to false alarm.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ArlEstimate {
    /// Mean stopping time, with censored trials counted at the horizon (an
    /// underestimate of the true ARL whenever `n_censored > 0`).
    pub mean: f64,
    pub std_error: f64,
    pub n_trials: usize,
    pub n_censored: usize,
    /// Every trial was censored; the mean is just the horizon.
    pub unreliable: bool,
}

/// Estimated average detection delay.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AddEstimate {
    /// Mean of `tau - nu_c + 1` over the valid trials only.
    pub mean: f64,
    pub std_error: f64,
    pub n_trials: usize,
    /// Trials that stopped at or after the critical change.
    pub n_valid: usize,
    /// Trials that stopped strictly before the critical change.
    pub n_false_alarms: usize,
    /// Trials that never stopped.
    pub n_censored: usize,
}

fn arl_from_results(results: &[TrialResult], which: usize, horizon: u64) -> ArlEstimate {
    let mut n_censored = 0usize;
    let values: Vec<f64> = results
        .iter()
        .map(|r| match r.taus[which] {
            Some(tau) => tau as f64,
            None => {
                n_censored += 1;
                horizon as f64
            }
        })
        .collect();
    let (mean, std_error) = mean_stderr(&values);
    ArlEstimate {
        mean,
        std_error,
        n_trials: results.len(),
        n_censored,
        unreliable: n_censored == results.len(),
    }
}

fn add_from_results(results: &[TrialResult], which: usize) -> Result<AddEstimate> {
    let mut delays = Vec::new();
    let mut n_false_alarms = 0usize;
    let mut n_censored = 0usize;
    for r in results {
        let nu_c = r.nu_c.ok_or_else(|| {
            Error::PlanMismatch("delay estimation needs a critical change in every trial".into())
        })?;
        match r.taus[which] {
            Some(tau) if tau >= nu_c => delays.push((tau - nu_c + 1) as f64),
            Some(_) => n_false_alarms += 1,
            None => n_censored += 1,
        }
    }
    if delays.is_empty() {
        return Err(Error::ZeroValidTrials);
    }
    let (mean, std_error) = mean_stderr(&delays);
    Ok(AddEstimate {
        mean,
        std_error,
        n_trials: results.len(),
        n_valid: delays.len(),
        n_false_alarms,
        n_censored,
    })
}

/// Average run length to false alarm at the plan's threshold. The plan must
/// not schedule a critical change (`nu_c` policy `Never`); the nuisance
/// change policy is free.
pub fn estimate_arl(plan: &TrialPlan) -> Result<ArlEstimate> {
    if plan.nu_c != ChangePointPolicy::Never {
        return Err(Error::PlanMismatch(
            "run-length estimation requires the no-critical-change policy".into(),
        ));
    }
    let results = run_all_trials(plan, &[plan.detector.b])?;
    Ok(arl_from_results(&results, 0, plan.horizon))
}

/// Average detection delay at the plan's threshold. The critical change
/// policy must schedule a change in every trial.
pub fn estimate_add(plan: &TrialPlan) -> Result<AddEstimate> {
    if plan.nu_c == ChangePointPolicy::Never {
        return Err(Error::PlanMismatch(
            "delay estimation requires a critical change policy".into(),
        ));
    }
    let results = run_all_trials(plan, &[plan.detector.b])?;
    add_from_results(&results, 0)
}

/// One threshold's operating point on the trade-off curve.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub b: f64,
    pub arl: ArlEstimate,
    pub add: AddEstimate,
}

/// (ARL, ADD) operating points of one detector across thresholds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TradeoffCurve {
    pub detector: DetectorConfig,
    pub points: Vec<TradeoffPoint>,
}

impl TradeoffCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("b,arl,arl_se,add,add_se,censored\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                p.b,
                p.arl.mean,
                p.arl.std_error,
                p.add.mean,
                p.add.std_error,
                p.arl.n_censored + p.add.n_censored,
            ));
        }
        out
    }
}

/// Sweep the plan's detector across `thresholds`. The ARL arm replaces the
/// critical-change policy with `Never`; the ADD arm runs the plan as given.
/// Each arm mixes its own sub-seed from the plan's base seed, and within an
/// arm every threshold sees the same per-trial streams.
pub fn tradeoff_sweep(plan: &TrialPlan, thresholds: &[f64]) -> Result<TradeoffCurve> {
    if thresholds.is_empty() {
        return Err(Error::InvalidParameter("no thresholds to sweep".into()));
    }
    if plan.nu_c == ChangePointPolicy::Never {
        return Err(Error::PlanMismatch(
            "a trade-off sweep needs a critical change policy for its delay arm".into(),
        ));
    }
    let arl_plan = plan
        .with_nu_c(ChangePointPolicy::Never)
        .with_seed(splitmix64(plan.base_seed ^ ARL_ARM_TAG));
    let add_plan = plan.with_seed(splitmix64(plan.base_seed ^ ADD_ARM_TAG));
    let arl_results = run_all_trials(&arl_plan, thresholds)?;
    let add_results = run_all_trials(&add_plan, thresholds)?;
    let mut points = Vec::with_capacity(thresholds.len());
    for (i, &b) in thresholds.iter().enumerate() {
        points.push(TradeoffPoint {
            b,
            arl: arl_from_results(&arl_results, i, plan.horizon),
            add: add_from_results(&add_results, i)?,
        });
    }
    Ok(TradeoffCurve { detector: plan.detector.clone(), points })
}

/// Trade-off curves for several plans that must agree on everything except
/// the detector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub curves: Vec<TradeoffCurve>,
}

impl ComparisonTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("detector,b,arl,arl_se,add,add_se,censored\n");
        for curve in &self.curves {
            for p in &curve.points {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    curve.detector.detector,
                    p.b,
                    p.arl.mean,
                    p.arl.std_error,
                    p.add.mean,
                    p.add.std_error,
                    p.arl.n_censored + p.add.n_censored,
                ));
            }
        }
        out
    }
}

/// Run [`tradeoff_sweep`] for each plan. All plans must share the models,
/// change-point policies, horizon, trial count, and base seed, so the
/// detectors are compared on identically distributed (and identically
/// seeded) streams.
pub fn compare_detectors(plans: &[TrialPlan], thresholds: &[f64]) -> Result<ComparisonTable> {
    let first = plans
        .first()
        .ok_or_else(|| Error::InvalidParameter("no plans to compare".into()))?;
    for plan in &plans[1..] {
        let same = plan.models == first.models
            && plan.nu_n == first.nu_n
            && plan.nu_c == first.nu_c
            && plan.horizon == first.horizon
            && plan.n_trials == first.n_trials
            && plan.base_seed == first.base_seed;
        if !same {
            return Err(Error::PlanMismatch(
                "compared plans must differ only in the detector".into(),
            ));
        }
    }
    let curves = plans
        .iter()
        .map(|p| tradeoff_sweep(p, thresholds))
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonTable { curves })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::DetectorKind;
    use crate::distributions::DistributionModel;

    fn quad() -> QuadModels {
        QuadModels {
            f: DistributionModel::gaussian(0.0, 1.0).unwrap(),
            f_n: DistributionModel::gaussian(2.0, 1.0).unwrap(),
            g: DistributionModel::gaussian(0.0, 10.0).unwrap(),
            g_n: DistributionModel::gaussian(2.0, 10.0).unwrap(),
        }
    }

    fn wsglr_plan() -> TrialPlan {
        TrialPlan::new(
            quad(),
            ChangePointPolicy::Fixed(40),
            ChangePointPolicy::Fixed(60),
            DetectorConfig::new(DetectorKind::Wsglr, 4.0).with_window(32),
            40,
            600,
            99,
        )
    }

    #[test]
    fn estimates_are_bitwise_reproducible() {
        let plan = wsglr_plan();
        let a = estimate_add(&plan).unwrap();
        let b = estimate_add(&plan).unwrap();
        assert_eq!(a.mean, b.mean);
        assert_eq!(a.std_error, b.std_error);
        assert_eq!(a.n_valid, b.n_valid);

        let arl_plan = plan.with_nu_c(ChangePointPolicy::Never);
        let a = estimate_arl(&arl_plan).unwrap();
        let b = estimate_arl(&arl_plan).unwrap();
        assert_eq!(a.mean, b.mean);
        assert_eq!(a.n_censored, b.n_censored);
    }

    #[test]
    fn multi_threshold_scan_agrees_with_single_runs() {
        let plan = wsglr_plan();
        let thresholds = [1.0, 3.0, 6.0];
        for trial in 0..10u64 {
            let multi = run_trial_multi(&plan, trial, &thresholds).unwrap();
            for (i, &b) in thresholds.iter().enumerate() {
                let single = run_trial_single(&plan, trial, b).unwrap();
                assert_eq!(multi.taus[i], single.taus[0], "trial {trial}, b = {b}");
                assert_eq!(multi.nu_c, single.nu_c);
            }
        }
    }

    #[test]
    fn delay_accounting_partitions_the_trials() {
        let plan = wsglr_plan();
        let add = estimate_add(&plan).unwrap();
        assert_eq!(add.n_valid + add.n_false_alarms + add.n_censored, add.n_trials);
        assert!(add.n_valid > 0);
        assert!(add.mean >= 1.0, "delays are counted from the change sample");
    }

    #[test]
    fn arl_requires_the_no_change_policy_and_add_requires_a_change() {
        let plan = wsglr_plan();
        assert!(estimate_arl(&plan).is_err());
        assert!(estimate_add(&plan.with_nu_c(ChangePointPolicy::Never)).is_err());
    }

    #[test]
    fn huge_threshold_censors_everything() {
        let mut plan = wsglr_plan().with_nu_c(ChangePointPolicy::Never);
        plan.detector.b = 1e6;
        plan.horizon = 200;
        plan.n_trials = 10;
        let arl = estimate_arl(&plan).unwrap();
        assert_eq!(arl.n_censored, 10);
        assert!(arl.unreliable);
        assert_eq!(arl.mean, 200.0);
    }

    #[test]
    fn zero_valid_trials_is_an_error_not_a_number() {
        // Threshold so high nothing fires before the horizon, change so late
        // no valid detection can happen.
        let mut plan = wsglr_plan();
        plan.detector.b = 1e6;
        plan.nu_c = ChangePointPolicy::Fixed(599);
        plan.horizon = 600;
        plan.n_trials = 5;
        match estimate_add(&plan) {
            Err(Error::ZeroValidTrials) => {}
            other => panic!("expected ZeroValidTrials, got {other:?}"),
        }
    }

    #[test]
    fn uniform_change_points_stay_within_the_horizon() {
        let mut plan = wsglr_plan();
        plan.nu_c = ChangePointPolicy::UniformOverHorizon;
        plan.horizon = 50;
        plan.detector.b = 0.0; // the statistic starts at zero: fire immediately
        let results = run_all_trials(&plan, &[plan.detector.b]).unwrap();
        for r in &results {
            let nu_c = r.nu_c.unwrap();
            assert!((1..=50).contains(&nu_c));
            assert_eq!(r.taus[0], Some(1));
        }
    }

    #[test]
    fn sweep_produces_monotone_arl_in_the_threshold() {
        let plan = wsglr_plan();
        let curve = tradeoff_sweep(&plan, &[1.0, 2.0, 4.0]).unwrap();
        assert_eq!(curve.points.len(), 3);
        // Same streams per arm, so crossing a higher threshold can only
        // happen later: the ARL estimates are monotone even at finite n.
        assert!(curve.points[0].arl.mean <= curve.points[1].arl.mean);
        assert!(curve.points[1].arl.mean <= curve.points[2].arl.mean);
        let csv = curve.to_csv();
        assert!(csv.starts_with("b,arl,arl_se,add,add_se,censored\n"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn comparison_rejects_mismatched_plans() {
        // No nuisance change here: it would false-alarm the CuSum baseline in
        // every trial and leave it with no valid delays at all.
        let mut a = wsglr_plan();
        a.nu_n = ChangePointPolicy::Never;
        let mut b = a.clone();
        b.detector = DetectorConfig::new(DetectorKind::Cusum, 4.0);
        assert!(compare_detectors(&[a.clone(), b], &[2.0]).is_ok());
        let mut c = a.clone();
        c.horizon = 999;
        assert!(compare_detectors(&[a, c], &[2.0]).is_err());
    }

    #[test]
    fn two_stage_plans_take_the_per_threshold_route() {
        let mut plan = wsglr_plan();
        plan.detector = DetectorConfig::new(DetectorKind::TwoStage, 4.0).with_nuisance_threshold(2.0);
        assert!(plan.detector.path_depends_on_threshold());
        let curve = tradeoffsweep_smoke(&plan);
        assert_eq!(curve.points.len(), 2);
    }

    fn tradeoffsweep_smoke(plan: &TrialPlan) -> TradeoffCurve {
        tradeoff_sweep(plan, &[2.0, 4.0]).unwrap()
    }
}
