//! Distribution models and the divergence machinery the detectors are built on.
//!
//! A detection problem is specified by four densities on the real line:
//! the pre-change density `f`, the nuisance post-change density `f_n`, the
//! critical post-change density `g`, and the density `g_n` in force once both
//! changes have happened. This module provides:
//!
//! * [`DistributionModel`]: Gaussian, exponential-family, and histogram
//!   densities with log-density evaluation and sampling,
//! * Kullback-Leibler divergence, analytic where a closed form exists and
//!   monte-carlo otherwise ([`kl_divergence`]),
//! * the drift moments of `log(f_n/f)` under `g` and `g_n`
//!   ([`drift_moments`]), which must be nonzero for the detectors' growth
//!   analysis to apply,
//! * the four divergence growth rates and their minimum `I`
//!   ([`growth_rates`]), which governs the detection-delay slope and the
//!   window-size rule,
//! * closed-form exponential-family inequalities that certify the divergence
//!   ordering needed for asymptotic optimality without computing any KL
//!   integrals ([`check_exp_family_conditions`]).

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// ln(2*pi), the normalization constant of the Gaussian log-density.
pub const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// Default number of samples for monte-carlo moment and divergence estimates.
pub const DEFAULT_MC_SAMPLES: usize = 1_000_000;

/// Densities are floored at this value so that log-likelihood ratios against
/// empirical (histogram) models stay finite.
pub const DENSITY_FLOOR: f64 = 1e-12;

/// Drift moments smaller than this in magnitude are treated as zero.
pub const DRIFT_TOLERANCE: f64 = 1e-9;

/// Where a density puts its mass. Every shipped model lives on the full real
/// line; the variant exists so that mismatched-support pairs can be rejected
/// before a divergence is attempted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    RealLine,
}

/// An exponential family phi(x; theta) = h(x) exp(sum_i B_i(theta) T_i(x) - A(theta))
/// over scalar observations, with parameter vector theta in R^M.
///
/// `theta` is the family's native parameterization, not necessarily the
/// natural one; `nat_coeffs` maps it onto the coefficients B_i.
pub trait NaturalFamily: Send + Sync {
    /// Stable identifier used in serialized configurations.
    fn name(&self) -> &'static str;

    /// Number of natural statistics `s`.
    fn num_stats(&self) -> usize;

    /// Dimension of the parameter vector.
    fn param_dim(&self) -> usize;

    fn validate_theta(&self, theta: &[f64]) -> Result<()>;

    /// ln h(x).
    fn log_base(&self, x: f64) -> f64;

    /// T_i(x) for i = 1..s.
    fn suff_stats(&self, x: f64) -> Vec<f64>;

    /// B_i(theta) for i = 1..s.
    fn nat_coeffs(&self, theta: &[f64]) -> Vec<f64>;

    /// A(theta).
    fn log_partition(&self, theta: &[f64]) -> f64;

    /// ln phi(x; theta), composed from the pieces above.
    fn log_density(&self, theta: &[f64], x: f64) -> f64 {
        let coeffs = self.nat_coeffs(theta);
        let stats = self.suff_stats(x);
        let dot: f64 = coeffs.iter().zip(&stats).map(|(b, t)| b * t).sum();
        self.log_base(x) + dot - self.log_partition(theta)
    }

    /// E_theta[T_i(X)] in closed form, when the family knows it.
    fn stat_means(&self, theta: &[f64]) -> Option<Vec<f64>>;

    /// Draw one observation, when the family knows how to sample itself.
    fn sample(&self, theta: &[f64], rng: &mut dyn rand::RngCore) -> Option<f64>;
}

/// The Gaussian family in exponential-family form, parameterized by
/// theta = [mean, variance]. The natural statistics are T = [x, x^2] with
/// coefficients B = [mean/variance, -1/(2 variance)], base measure
/// h(x) = (2 pi)^(-1/2), and log-partition
/// A = mean^2 / (2 variance) + ln(variance) / 2.
#[derive(Debug, Clone, Copy, Default)]
pub struct GaussianNatural;

impl NaturalFamily for GaussianNatural {
    fn name(&self) -> &'static str {
        "gaussian_natural"
    }

    fn num_stats(&self) -> usize {
        2
    }

    fn param_dim(&self) -> usize {
        2
    }

    fn validate_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != 2 {
            return Err(Error::ThetaDimension { got: theta.len(), want: 2 });
        }
        if !theta[0].is_finite() || !theta[1].is_finite() || theta[1] <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gaussian_natural theta = [{}, {}]: mean must be finite, variance positive",
                theta[0], theta[1]
            )));
        }
        Ok(())
    }

    fn log_base(&self, _x: f64) -> f64 {
        -0.5 * LN_2PI
    }

    fn suff_stats(&self, x: f64) -> Vec<f64> {
        vec![x, x * x]
    }

    fn nat_coeffs(&self, theta: &[f64]) -> Vec<f64> {
        let (mean, var) = (theta[0], theta[1]);
        vec![mean / var, -0.5 / var]
    }

    fn log_partition(&self, theta: &[f64]) -> f64 {
        let (mean, var) = (theta[0], theta[1]);
        mean * mean / (2.0 * var) + 0.5 * var.ln()
    }

    fn stat_means(&self, theta: &[f64]) -> Option<Vec<f64>> {
        let (mean, var) = (theta[0], theta[1]);
        Some(vec![mean, mean * mean + var])
    }

    fn sample(&self, theta: &[f64], rng: &mut dyn rand::RngCore) -> Option<f64> {
        let normal = Normal::new(theta[0], theta[1].sqrt()).ok()?;
        Some(normal.sample(rng))
    }
}

/// Resolve a serialized family name to its implementation.
pub fn family_by_name(name: &str) -> Result<Arc<dyn NaturalFamily>> {
    match name {
        "gaussian_natural" => Ok(Arc::new(GaussianNatural)),
        other => Err(Error::UnknownFamily(other.to_string())),
    }
}

/// A piecewise-constant density over `[lo, hi)` with equal-width bins,
/// floored outside the range (and inside empty bins) so that log-likelihood
/// ratios against it stay finite. Fitted from data by the ingestion pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramDensity {
    lo: f64,
    hi: f64,
    /// Normalized bin masses; they sum to 1.
    masses: Vec<f64>,
    /// ln(mass / bin_width), with the floor already applied.
    log_dens: Vec<f64>,
    /// Cumulative masses for inverse-cdf sampling.
    cdf: Vec<f64>,
}

impl HistogramDensity {
    /// Build a histogram density from raw (unnormalized) bin masses.
    pub fn from_masses(lo: f64, hi: f64, raw: &[f64]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyInput("histogram masses"));
        }
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::InvalidParameter(format!(
                "histogram range [{lo}, {hi}] must be finite and nonempty"
            )));
        }
        if raw.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::InvalidParameter(
                "histogram masses must be finite and nonnegative".to_string(),
            ));
        }
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidParameter("histogram has no mass".to_string()));
        }
        let width = (hi - lo) / raw.len() as f64;
        let masses: Vec<f64> = raw.iter().map(|m| m / total).collect();
        let log_dens = masses
            .iter()
            .map(|m| (m / width).max(DENSITY_FLOOR).ln())
            .collect();
        let mut acc = 0.0;
        let cdf = masses
            .iter()
            .map(|m| {
                acc += m;
                acc
            })
            .collect();
        Ok(Self { lo, hi, masses, log_dens, cdf })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn num_bins(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.masses.len() as f64
    }

    fn log_density(&self, x: f64) -> f64 {
        if x < self.lo || x >= self.hi {
            return DENSITY_FLOOR.ln();
        }
        let idx = ((x - self.lo) / self.bin_width()) as usize;
        self.log_dens[idx.min(self.log_dens.len() - 1)]
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let idx = self.cdf.partition_point(|&c| c < u).min(self.masses.len() - 1);
        let prev = if idx == 0 { 0.0 } else { self.cdf[idx - 1] };
        let mass = self.masses[idx];
        let frac = if mass > 0.0 { ((u - prev) / mass).clamp(0.0, 1.0) } else { rng.random() };
        self.lo + (idx as f64 + frac) * self.bin_width()
    }
}

/// A probability density on the real line.
#[derive(Clone)]
pub enum DistributionModel {
    /// Gaussian with the given mean and variance.
    Gaussian { mean: f64, variance: f64 },
    /// A member of an exponential family at a fixed parameter vector.
    ExpFamily { family: Arc<dyn NaturalFamily>, theta: Vec<f64> },
    /// An empirical histogram density.
    Histogram(HistogramDensity),
}

impl fmt::Debug for DistributionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Gaussian { mean, variance } => {
                write!(f, "Gaussian {{ mean: {mean}, variance: {variance} }}")
            }
            Self::ExpFamily { family, theta } => {
                write!(f, "ExpFamily {{ family: {}, theta: {:?} }}", family.name(), theta)
            }
            Self::Histogram(h) => write!(
                f,
                "Histogram {{ range: [{}, {}), bins: {} }}",
                h.lo,
                h.hi,
                h.num_bins()
            ),
        }
    }
}

impl PartialEq for DistributionModel {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (
                Self::Gaussian { mean: m1, variance: v1 },
                Self::Gaussian { mean: m2, variance: v2 },
            ) => m1 == m2 && v1 == v2,
            (
                Self::ExpFamily { family: f1, theta: t1 },
                Self::ExpFamily { family: f2, theta: t2 },
            ) => f1.name() == f2.name() && t1 == t2,
            (Self::Histogram(h1), Self::Histogram(h2)) => h1 == h2,
            _ => false,
        }
    }
}

impl DistributionModel {
    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() || !variance.is_finite() || variance <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gaussian(mean = {mean}, variance = {variance}): mean must be finite, variance positive"
            )));
        }
        Ok(Self::Gaussian { mean, variance })
    }

    pub fn exp_family(family: Arc<dyn NaturalFamily>, theta: Vec<f64>) -> Result<Self> {
        family.validate_theta(&theta)?;
        Ok(Self::ExpFamily { family, theta })
    }

    pub fn support(&self) -> Support {
        Support::RealLine
    }

    /// (mean, variance) when the model is Gaussian in either representation.
    pub fn as_gaussian(&self) -> Option<(f64, f64)> {
        match self {
            Self::Gaussian { mean, variance } => Some((*mean, *variance)),
            Self::ExpFamily { family, theta } if family.name() == "gaussian_natural" => {
                Some((theta[0], theta[1]))
            }
            _ => None,
        }
    }

    /// ln of the density at `x`. Rejects non-finite inputs.
    pub fn log_density(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::NonFiniteSample(x));
        }
        Ok(match self {
            Self::Gaussian { mean, variance } => {
                let d = x - mean;
                -0.5 * (LN_2PI + variance.ln()) - d * d / (2.0 * variance)
            }
            Self::ExpFamily { family, theta } => family.log_density(theta, x),
            Self::Histogram(h) => h.log_density(x),
        })
    }

    /// Draw one observation.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Result<f64> {
        match self {
            Self::Gaussian { mean, variance } => {
                let normal = Normal::new(*mean, variance.sqrt())
                    .map_err(|e| Error::InvalidParameter(e.to_string()))?;
                Ok(normal.sample(rng))
            }
            Self::ExpFamily { family, theta } => family
                .sample(theta, rng)
                .ok_or_else(|| Error::InvalidParameter(format!(
                    "family {} cannot sample itself",
                    family.name()
                ))),
            Self::Histogram(h) => Ok(h.sample(rng)),
        }
    }
}

/// Wire format for [`DistributionModel`]; the `kind` tag selects the variant.
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ModelWire {
    Gaussian { mean: f64, variance: f64 },
    ExpFamily { family: String, theta: Vec<f64> },
    Histogram { lo: f64, hi: f64, masses: Vec<f64> },
}

impl Serialize for DistributionModel {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let wire = match self {
            Self::Gaussian { mean, variance } => {
                ModelWire::Gaussian { mean: *mean, variance: *variance }
            }
            Self::ExpFamily { family, theta } => ModelWire::ExpFamily {
                family: family.name().to_string(),
                theta: theta.clone(),
            },
            Self::Histogram(h) => ModelWire::Histogram {
                lo: h.lo,
                hi: h.hi,
                masses: h.masses.clone(),
            },
        };
        wire.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for DistributionModel {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = ModelWire::deserialize(de)?;
        let model = match wire {
            ModelWire::Gaussian { mean, variance } => {
                DistributionModel::gaussian(mean, variance)
            }
            ModelWire::ExpFamily { family, theta } => {
                family_by_name(&family).and_then(|f| DistributionModel::exp_family(f, theta))
            }
            ModelWire::Histogram { lo, hi, masses } => {
                HistogramDensity::from_masses(lo, hi, &masses).map(DistributionModel::Histogram)
            }
        };
        model.map_err(D::Error::custom)
    }
}

/// How to compute a divergence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KlMethod {
    /// Closed form; falls back to monte-carlo with [`DEFAULT_MC_SAMPLES`]
    /// draws when no closed form exists for the pair.
    Analytic,
    MonteCarlo { samples: usize },
}

/// A divergence value with its sampling uncertainty (zero when analytic).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KlEstimate {
    pub value: f64,
    pub std_error: f64,
    /// Number of monte-carlo draws behind the estimate; 0 means closed form.
    pub samples: usize,
}

/// KL(p || q) in closed form. Errors with [`Error::NoAnalyticForm`] when the
/// pair has none.
pub fn kl_analytic(p: &DistributionModel, q: &DistributionModel) -> Result<f64> {
    if p.support() != q.support() {
        return Err(Error::MismatchedSupport);
    }
    if let (Some((mp, vp)), Some((mq, vq))) = (p.as_gaussian(), q.as_gaussian()) {
        let d = mp - mq;
        return Ok(0.5 * (vq / vp).ln() + (vp + d * d) / (2.0 * vq) - 0.5);
    }
    if let (
        DistributionModel::ExpFamily { family: fp, theta: tp },
        DistributionModel::ExpFamily { family: fq, theta: tq },
    ) = (p, q)
    {
        if fp.name() == fq.name() {
            if let Some(means) = fp.stat_means(tp) {
                // KL(p || q) = E_p[log phi_p - log phi_q]
                //            = A(q) - A(p) - sum_i (B_i(q) - B_i(p)) E_p[T_i].
                return Ok(exp_family_bridge(fp.as_ref(), tq, tp, &means));
            }
        }
    }
    Err(Error::NoAnalyticForm)
}

/// Monte-carlo estimate of KL(p || q): the sample mean of log p(X) - log q(X)
/// under X ~ p, with its standard error.
pub fn kl_monte_carlo<R: Rng>(
    p: &DistributionModel,
    q: &DistributionModel,
    samples: usize,
    rng: &mut R,
) -> Result<KlEstimate> {
    if p.support() != q.support() {
        return Err(Error::MismatchedSupport);
    }
    if samples < 2 {
        return Err(Error::InvalidParameter(
            "monte-carlo divergence needs at least 2 samples".to_string(),
        ));
    }
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..samples {
        let x = p.sample(rng)?;
        let l = p.log_density(x)? - q.log_density(x)?;
        if !l.is_finite() {
            return Err(Error::NonFinite("monte-carlo log-likelihood ratio"));
        }
        let delta = l - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (l - mean);
    }
    let variance = m2 / (samples - 1) as f64;
    Ok(KlEstimate {
        value: mean,
        std_error: (variance / samples as f64).sqrt(),
        samples,
    })
}

/// KL(p || q) by the requested method. `Analytic` silently falls back to
/// monte-carlo when the pair has no closed form, which is why an rng handle
/// is always required.
pub fn kl_divergence<R: Rng>(
    p: &DistributionModel,
    q: &DistributionModel,
    method: KlMethod,
    rng: &mut R,
) -> Result<KlEstimate> {
    match method {
        KlMethod::Analytic => match kl_analytic(p, q) {
            Ok(value) => Ok(KlEstimate { value, std_error: 0.0, samples: 0 }),
            Err(Error::NoAnalyticForm) => {
                kl_monte_carlo(p, q, DEFAULT_MC_SAMPLES, rng)
            }
            Err(e) => Err(e),
        },
        KlMethod::MonteCarlo { samples } => kl_monte_carlo(p, q, samples, rng),
    }
}

/// First, second, and fourth central moments of the nuisance log-likelihood
/// ratio L = log(f_n(X)/f(X)) under the two post-change regimes. The first
/// moments must be nonzero for the detectors' delay analysis to apply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftMoments {
    /// E_g[L]; equals KL(g||f) - KL(g||f_n).
    pub rho_g: f64,
    /// Var_g[L].
    pub sigma2_g: f64,
    /// E_g[(L - rho_g)^4].
    pub omega4_g: f64,
    /// E_gn[L]; equals KL(g_n||f) - KL(g_n||f_n).
    pub rho_gn: f64,
    pub sigma2_gn: f64,
    pub omega4_gn: f64,
    /// True when the moments came from a closed form rather than monte-carlo.
    pub analytic: bool,
}

impl DriftMoments {
    /// omega^4 + (3/2) sigma^4 under g: the fourth-moment constant that
    /// bounds maximal fluctuations of partial sums of L.
    pub fn moment_bound_g(&self) -> f64 {
        self.omega4_g + 1.5 * self.sigma2_g * self.sigma2_g
    }

    /// The same bound under g_n.
    pub fn moment_bound_gn(&self) -> f64 {
        self.omega4_gn + 1.5 * self.sigma2_gn * self.sigma2_gn
    }
}

fn affine_nuisance_ratio(
    f: &DistributionModel,
    f_n: &DistributionModel,
) -> Option<(f64, f64)> {
    // log(f_n/f) is affine in x exactly when both are Gaussian with equal
    // variance: L(x) = (m1 - m0)/v * x + (m0^2 - m1^2)/(2v).
    let (m0, v0) = f.as_gaussian()?;
    let (m1, v1) = f_n.as_gaussian()?;
    if v0 != v1 {
        return None;
    }
    Some(((m1 - m0) / v0, (m0 * m0 - m1 * m1) / (2.0 * v0)))
}

/// Compute [`DriftMoments`] for a scenario. Uses the closed form when
/// log(f_n/f) is affine in x and both post-change models are Gaussian;
/// otherwise estimates by monte-carlo with `n_mc` draws per regime.
pub fn drift_moments<R: Rng>(
    f: &DistributionModel,
    f_n: &DistributionModel,
    g: &DistributionModel,
    g_n: &DistributionModel,
    n_mc: usize,
    rng: &mut R,
) -> Result<DriftMoments> {
    let analytic = match (affine_nuisance_ratio(f, f_n), g.as_gaussian(), g_n.as_gaussian()) {
        (Some((a, c)), Some((mg, vg)), Some((mgn, vgn))) => {
            // Under N(m, v), an affine L = a X + c has mean a m + c,
            // variance a^2 v, and fourth central moment 3 a^4 v^2.
            let a2 = a * a;
            Some(DriftMoments {
                rho_g: a * mg + c,
                sigma2_g: a2 * vg,
                omega4_g: 3.0 * a2 * a2 * vg * vg,
                rho_gn: a * mgn + c,
                sigma2_gn: a2 * vgn,
                omega4_gn: 3.0 * a2 * a2 * vgn * vgn,
                analytic: true,
            })
        }
        _ => None,
    };
    let moments = match analytic {
        Some(m) => m,
        None => {
            if n_mc < 10_000 {
                return Err(Error::InvalidParameter(format!(
                    "monte-carlo drift moments need at least 10000 samples, got {n_mc}"
                )));
            }
            let (rho_g, sigma2_g, omega4_g) = mc_ratio_moments(f, f_n, g, n_mc, rng)?;
            let (rho_gn, sigma2_gn, omega4_gn) = mc_ratio_moments(f, f_n, g_n, n_mc, rng)?;
            DriftMoments {
                rho_g,
                sigma2_g,
                omega4_g,
                rho_gn,
                sigma2_gn,
                omega4_gn,
                analytic: false,
            }
        }
    };
    for (name, value) in [
        ("rho_g", moments.rho_g),
        ("sigma2_g", moments.sigma2_g),
        ("omega4_g", moments.omega4_g),
        ("rho_gn", moments.rho_gn),
        ("sigma2_gn", moments.sigma2_gn),
        ("omega4_gn", moments.omega4_gn),
    ] {
        if !value.is_finite() {
            let _ = name;
            return Err(Error::NonFinite("drift moment"));
        }
    }
    if moments.rho_g.abs() < DRIFT_TOLERANCE {
        return Err(Error::DegenerateDrift("g"));
    }
    if moments.rho_gn.abs() < DRIFT_TOLERANCE {
        return Err(Error::DegenerateDrift("g_n"));
    }
    Ok(moments)
}

fn mc_ratio_moments<R: Rng>(
    f: &DistributionModel,
    f_n: &DistributionModel,
    under: &DistributionModel,
    n: usize,
    rng: &mut R,
) -> Result<(f64, f64, f64)> {
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let x = under.sample(rng)?;
        values.push(f_n.log_density(x)? - f.log_density(x)?);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut m2 = 0.0;
    let mut m4 = 0.0;
    for v in &values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    Ok((mean, m2 / n as f64, m4 / n as f64))
}

/// The four KL divergences that control statistic growth after the critical
/// change, their minimum `I`, and the divergence-ordering verdict that the
/// optimality analysis needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRates {
    pub kl_g_f: f64,
    pub kl_g_fn: f64,
    pub kl_gn_f: f64,
    pub kl_gn_fn: f64,
    /// I = min of the four divergences above; the statistic grows at rate at
    /// least I after the critical change, so delays scale like b / I.
    pub growth_rate: f64,
    /// KL(g||f_n) > min{KL(g||f), KL(g_n||f), KL(g_n||f_n)}.
    pub assumption2_holds: bool,
}

impl GrowthRates {
    fn from_kls(kl_g_f: f64, kl_g_fn: f64, kl_gn_f: f64, kl_gn_fn: f64) -> Result<Self> {
        let growth_rate = kl_g_f.min(kl_g_fn).min(kl_gn_f).min(kl_gn_fn);
        if !growth_rate.is_finite() {
            return Err(Error::NonFinite("growth rate"));
        }
        Ok(GrowthRates {
            kl_g_f,
            kl_g_fn,
            kl_gn_f,
            kl_gn_fn,
            growth_rate,
            assumption2_holds: kl_g_fn > kl_g_f.min(kl_gn_f).min(kl_gn_fn),
        })
    }
}

/// Closed-form growth rates. Errors with [`Error::NoAnalyticForm`] when any
/// pair lacks one; use [`growth_rates_mc`] for such models.
pub fn growth_rates(
    f: &DistributionModel,
    f_n: &DistributionModel,
    g: &DistributionModel,
    g_n: &DistributionModel,
) -> Result<GrowthRates> {
    GrowthRates::from_kls(
        kl_analytic(g, f)?,
        kl_analytic(g, f_n)?,
        kl_analytic(g_n, f)?,
        kl_analytic(g_n, f_n)?,
    )
}

/// Growth rates with each divergence estimated by monte-carlo.
pub fn growth_rates_mc<R: Rng>(
    f: &DistributionModel,
    f_n: &DistributionModel,
    g: &DistributionModel,
    g_n: &DistributionModel,
    samples: usize,
    rng: &mut R,
) -> Result<GrowthRates> {
    GrowthRates::from_kls(
        kl_monte_carlo(g, f, samples, rng)?.value,
        kl_monte_carlo(g, f_n, samples, rng)?.value,
        kl_monte_carlo(g_n, f, samples, rng)?.value,
        kl_monte_carlo(g_n, f_n, samples, rng)?.value,
    )
}

/// A(theta_a) - A(theta_b) - sum_i (B_i(theta_a) - B_i(theta_b)) m_i.
///
/// When `m` is the statistic mean vector E_p[T], this equals
/// E_p[log phi_b(X) - log phi_a(X)]: the log-partition and coefficient
/// differences reproduce an expected log-likelihood ratio without any
/// integration.
fn exp_family_bridge(
    family: &dyn NaturalFamily,
    theta_a: &[f64],
    theta_b: &[f64],
    m: &[f64],
) -> f64 {
    let ba = family.nat_coeffs(theta_a);
    let bb = family.nat_coeffs(theta_b);
    let dot: f64 = ba
        .iter()
        .zip(&bb)
        .zip(m)
        .map(|((a, b), mi)| (a - b) * mi)
        .sum();
    family.log_partition(theta_a) - family.log_partition(theta_b) - dot
}

/// Outcome of the closed-form exponential-family inequalities. Each flag is a
/// sufficient condition for the divergence ordering `assumption2`; any single
/// true flag implies it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExpFamilyConditions {
    /// A(th_fn) - A(th_f) - sum (B(th_fn) - B(th_f)) E_g[T] > 0,
    /// i.e. E_g[log(f/f_n)] > 0, i.e. the drift rho_g is negative.
    pub rho_g_negative: bool,
    /// E_g[log(g/f_n)] > E_gn[log(g_n/f)], i.e. KL(g||f_n) > KL(g_n||f).
    pub g_fn_exceeds_gn_f: bool,
    /// E_g[log(g/f_n)] > E_gn[log(g_n/f_n)], i.e. KL(g||f_n) > KL(g_n||f_n).
    pub g_fn_exceeds_gn_fn: bool,
    /// True when any of the three inequalities holds.
    pub assumption2_implied: bool,
}

/// Evaluate the three sufficient inequalities for the divergence ordering on
/// an exponential family, using only log-partition values, coefficient
/// differences, and statistic means. Statistic means come from the family's
/// closed form when available and from `mc_samples` monte-carlo draws
/// otherwise.
pub fn check_exp_family_conditions<R: Rng>(
    family: &dyn NaturalFamily,
    theta_f: &[f64],
    theta_fn: &[f64],
    theta_g: &[f64],
    theta_gn: &[f64],
    mc_samples: usize,
    rng: &mut R,
) -> Result<ExpFamilyConditions> {
    for theta in [theta_f, theta_fn, theta_g, theta_gn] {
        family.validate_theta(theta)?;
    }
    let m_g = stat_means_or_mc(family, theta_g, mc_samples, rng)?;
    let m_gn = stat_means_or_mc(family, theta_gn, mc_samples, rng)?;

    // E_g[log(f/f_n)] > 0.
    let rho_g_negative = exp_family_bridge(family, theta_fn, theta_f, &m_g) > 0.0;
    // E_g[log(g/f_n)] = bridge(fn, g, E_g[T]); E_gn[log(g_n/f)] = bridge(f, gn, E_gn[T]).
    let lhs = exp_family_bridge(family, theta_fn, theta_g, &m_g);
    let g_fn_exceeds_gn_f = lhs > exp_family_bridge(family, theta_f, theta_gn, &m_gn);
    let g_fn_exceeds_gn_fn = lhs > exp_family_bridge(family, theta_fn, theta_gn, &m_gn);

    Ok(ExpFamilyConditions {
        rho_g_negative,
        g_fn_exceeds_gn_f,
        g_fn_exceeds_gn_fn,
        assumption2_implied: rho_g_negative || g_fn_exceeds_gn_f || g_fn_exceeds_gn_fn,
    })
}

fn stat_means_or_mc<R: Rng>(
    family: &dyn NaturalFamily,
    theta: &[f64],
    mc_samples: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if let Some(means) = family.stat_means(theta) {
        return Ok(means);
    }
    if mc_samples == 0 {
        return Err(Error::InvalidParameter(
            "family has no closed-form statistic means and mc_samples is 0".to_string(),
        ));
    }
    let mut sums = vec![0.0; family.num_stats()];
    for _ in 0..mc_samples {
        let x = family.sample(theta, rng).ok_or_else(|| {
            Error::InvalidParameter(format!("family {} cannot sample itself", family.name()))
        })?;
        for (s, t) in sums.iter_mut().zip(family.suff_stats(x)) {
            *s += t;
        }
    }
    Ok(sums.into_iter().map(|s| s / mc_samples as f64).collect())
}
