//! Streaming quickest-change detection for signals that are subject to both
//! a nuisance change and a critical change.
//!
//! The observed stream starts under a pre-change density `f`; at an unknown
//! time it may switch to a nuisance density `f_n` (a change we must ignore),
//! and at another unknown time to a critical density `g` (the change we must
//! report as quickly as possible), with `g_n` in force once both switches
//! have happened. The centerpiece is a window-limited stopping rule whose
//! statistic maximizes a simplified generalized likelihood ratio over recent
//! window starts and over the unknown nuisance split, is computable in O(m_b)
//! per sample, stays flat through nuisance changes, and grows linearly after
//! the critical change.
//!
//! The crate provides:
//!
//! * [`distributions`]: density models, KL divergences, drift moments, and
//!   closed-form exponential-family optimality checks;
//! * [`signal`]: the four-regime scenario model and stream generation;
//! * [`detectors`]: the windowed detector, its unwindowed and brute-force
//!   references, CuSum, a finite-moving-average rule, and a naive two-stage
//!   baseline, plus the shared run loop;
//! * [`generalized`]: the composite-hypothesis variant for post-change
//!   families with unknown parameters;
//! * [`simulation`]: seeded monte-carlo estimation of average run length and
//!   detection delay, trade-off sweeps, and detector comparisons;
//! * [`ingestion`]: de-trending, model fitting, and file-based detection for
//!   real recordings.

pub mod distributions;
pub mod detectors;
pub mod error;
pub mod generalized;
pub mod ingestion;
pub mod signal;
pub mod simulation;

pub use distributions::{
    check_exp_family_conditions, drift_moments, growth_rates, growth_rates_mc, kl_analytic,
    kl_divergence, kl_monte_carlo, DistributionModel, DriftMoments, ExpFamilyConditions,
    GaussianNatural, GrowthRates, HistogramDensity, KlEstimate, KlMethod, NaturalFamily,
};
pub use detectors::{
    choose_window, run_until_stop, AnyDetector, CuSum, DetectorConfig, DetectorKind, Fma, Glr,
    RunOutcome, Sglr, TwoStage, TwoStageStage, WindowSglr,
};
pub use error::{Error, Result};
pub use generalized::{
    hessian_ball_check, mle_over_window, Branch, FamilyKind, GenFamily, GenStep, GenWindowVerdict,
    GenWsglr, ThetaBox, WindowStats,
};
pub use ingestion::{
    build_quad_from_segments, detect_on_file, detrend, fit_model, fit_histogram, DetectionReport,
    LabeledSegment, RoleMap, SplicePhase,
};
pub use signal::{QuadModels, QuadScenario};
pub use simulation::{
    compare_detectors, estimate_arl, estimate_add, tradeoff_sweep, AddEstimate, ArlEstimate,
    ChangePointPolicy, ComparisonTable, TradeoffCurve, TradeoffPoint, TrialPlan,
};
