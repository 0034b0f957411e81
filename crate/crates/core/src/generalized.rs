//! Window-limited detection when the post-change density is known only up to
//! a parametric family.
//!
//! The pre-change pair (f, f_n) is known, but the critical densities are
//! specified as members g_θ, g_{n,θ} of a family indexed by θ in a compact
//! box Θ. For each window length l and each branch (critical change before
//! or after the nuisance change) the detector maximises the windowed
//! log-likelihood over θ and compares
//!
//! ```text
//! log Λ̂(t - l + 1, t, θ̂) = sup_θ Σ log g_θ(x_i)  -  max_j split(f, f_n)
//! ```
//!
//! against the threshold b. Because a maximum over a parameter can spike on
//! short windows, a verdict fires only when two regularity checks also pass:
//!
//! * **curvature**: the largest eigenvalue of the negated Hessian of the
//!   windowed log-likelihood stays at most b over a ball of radius 1/sqrt(b)
//!   around θ̂ (probed at axis and diagonal offsets, clipped to Θ);
//! * **interior**: θ̂ lies strictly inside Θ (up to a relative margin of
//!   1e-6 of each side's width; a zero-width side always passes, which is
//!   what makes a collapsed box reduce to the known-θ detector).
//!
//! The rule stops at the first step where *any* (l, branch) verdict with
//! l between `m_b_prime` and `m_b` fires. The denominator never involves θ,
//! so it reuses the same split recursion as the known-θ detectors.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::detectors::denom_step;
use crate::distributions::{DistributionModel, LN_2PI};
use crate::error::{Error, Result};

/// Compact axis-aligned parameter box Θ.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl ThetaBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidParameter(
                "parameter box needs matching, nonempty bound vectors".into(),
            ));
        }
        for (&l, &h) in lo.iter().zip(&hi) {
            if !l.is_finite() || !h.is_finite() || l > h {
                return Err(Error::InvalidParameter(format!(
                    "bad parameter interval [{l}, {h}]"
                )));
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn from_intervals(intervals: &[[f64; 2]]) -> Result<Self> {
        let lo = intervals.iter().map(|p| p[0]).collect();
        let hi = intervals.iter().map(|p| p[1]).collect();
        Self::new(lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn intervals(&self) -> Vec<[f64; 2]> {
        self.lo.iter().zip(&self.hi).map(|(&l, &h)| [l, h]).collect()
    }

    /// Clamp a point into the box, coordinate by coordinate.
    pub fn project(&self, theta: &[f64]) -> Vec<f64> {
        theta
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&t, (&l, &h))| t.clamp(l, h))
            .collect()
    }

    /// Is `theta` inside the box with a relative margin on every side?
    /// Comparisons are non-strict, so a zero-width side accepts its single
    /// point.
    pub fn strictly_inside(&self, theta: &[f64], rel_margin: f64) -> bool {
        theta.len() == self.dim()
            && theta.iter().zip(self.lo.iter().zip(&self.hi)).all(|(&t, (&l, &h))| {
                let margin = rel_margin * (h - l);
                t >= l + margin && t <= h - margin
            })
    }
}

/// Which side of the nuisance change the critical-change window is assumed
/// to lie on: before it (density g_θ) or after it (density g_{n,θ}).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    G,
    Gn,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::G => "g",
            Self::Gn => "gn",
        }
    }
}

/// Sufficient statistics of a window of observations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WindowStats {
    pub len: usize,
    pub sum_x: f64,
    pub sum_x2: f64,
}

impl WindowStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_samples(xs: &[f64]) -> Self {
        let mut s = Self::new();
        for &x in xs {
            s.push(x);
        }
        s
    }

    pub fn push(&mut self, x: f64) {
        self.len += 1;
        self.sum_x += x;
        self.sum_x2 += x * x;
    }

    /// Σ (x - m)^2 over the window, floored at zero against cancellation.
    pub fn centered_sum_squares(&self, m: f64) -> f64 {
        (self.sum_x2 - 2.0 * m * self.sum_x + self.len as f64 * m * m).max(0.0)
    }
}

/// The supported post-change families. Both are one-parameter Gaussian
/// families where the two branches share θ but differ in the fixed
/// coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyKind {
    /// θ = common variance; g = N(mean_g, θ), g_n = N(mean_gn, θ).
    GaussianVariance { mean_g: f64, mean_gn: f64 },
    /// θ = common mean; g = N(θ, var_g), g_n = N(θ, var_gn).
    GaussianMean { var_g: f64, var_gn: f64 },
}

impl FamilyKind {
    pub fn param_dim(&self) -> usize {
        1
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::GaussianVariance { .. } => "gaussian_variance",
            Self::GaussianMean { .. } => "gaussian_mean",
        }
    }

    fn branch_fixed(&self, branch: Branch) -> f64 {
        match (self, branch) {
            (Self::GaussianVariance { mean_g, .. }, Branch::G) => *mean_g,
            (Self::GaussianVariance { mean_gn, .. }, Branch::Gn) => *mean_gn,
            (Self::GaussianMean { var_g, .. }, Branch::G) => *var_g,
            (Self::GaussianMean { var_gn, .. }, Branch::Gn) => *var_gn,
        }
    }

    /// Windowed log-likelihood of the branch density at parameter `theta`.
    pub fn log_likelihood(&self, stats: &WindowStats, branch: Branch, theta: &[f64]) -> f64 {
        let n = stats.len as f64;
        match self {
            Self::GaussianVariance { .. } => {
                let m = self.branch_fixed(branch);
                let v = theta[0];
                -0.5 * n * (LN_2PI + v.ln()) - stats.centered_sum_squares(m) / (2.0 * v)
            }
            Self::GaussianMean { .. } => {
                let v = self.branch_fixed(branch);
                let m = theta[0];
                -0.5 * n * (LN_2PI + v.ln()) - stats.centered_sum_squares(m) / (2.0 * v)
            }
        }
    }

    /// Unconstrained maximiser of the windowed log-likelihood.
    fn unconstrained_mle(&self, stats: &WindowStats, branch: Branch) -> Vec<f64> {
        let n = stats.len as f64;
        match self {
            Self::GaussianVariance { .. } => {
                let m = self.branch_fixed(branch);
                vec![stats.centered_sum_squares(m) / n]
            }
            Self::GaussianMean { .. } => vec![stats.sum_x / n],
        }
    }

    /// Negated Hessian of the windowed log-likelihood at `theta`.
    pub fn neg_hessian(&self, stats: &WindowStats, branch: Branch, theta: &[f64]) -> DMatrix<f64> {
        let n = stats.len as f64;
        let entry = match self {
            Self::GaussianVariance { .. } => {
                let m = self.branch_fixed(branch);
                let v = theta[0];
                stats.centered_sum_squares(m) / (v * v * v) - n / (2.0 * v * v)
            }
            Self::GaussianMean { .. } => {
                let v = self.branch_fixed(branch);
                n / v
            }
        };
        DMatrix::from_element(1, 1, entry)
    }
}

/// A post-change family together with its parameter box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilyWire", into = "FamilyWire")]
pub struct GenFamily {
    kind: FamilyKind,
    theta_box: ThetaBox,
}

impl GenFamily {
    pub fn new(kind: FamilyKind, theta_box: ThetaBox) -> Result<Self> {
        if theta_box.dim() != kind.param_dim() {
            return Err(Error::ThetaDimension {
                got: theta_box.dim(),
                want: kind.param_dim(),
            });
        }
        match kind {
            FamilyKind::GaussianVariance { mean_g, mean_gn } => {
                if !mean_g.is_finite() || !mean_gn.is_finite() {
                    return Err(Error::InvalidParameter("family means must be finite".into()));
                }
                if theta_box.lo[0] <= 0.0 {
                    return Err(Error::InvalidParameter(
                        "variance parameter box must be strictly positive".into(),
                    ));
                }
            }
            FamilyKind::GaussianMean { var_g, var_gn } => {
                if !(var_g.is_finite() && var_g > 0.0 && var_gn.is_finite() && var_gn > 0.0) {
                    return Err(Error::InvalidParameter(
                        "family variances must be positive and finite".into(),
                    ));
                }
            }
        }
        Ok(Self { kind, theta_box })
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn theta_box(&self) -> &ThetaBox {
        &self.theta_box
    }

    pub fn param_dim(&self) -> usize {
        self.kind.param_dim()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// The branch density at a fixed parameter, as an ordinary model.
    pub fn density_at(&self, branch: Branch, theta: &[f64]) -> Result<DistributionModel> {
        match self.kind {
            FamilyKind::GaussianVariance { .. } => {
                DistributionModel::gaussian(self.kind.branch_fixed(branch), theta[0])
            }
            FamilyKind::GaussianMean { .. } => {
                DistributionModel::gaussian(theta[0], self.kind.branch_fixed(branch))
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct FamilyWire {
    family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mean_n: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    variance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    variance_n: Option<f64>,
    theta_box: Vec<[f64; 2]>,
}

impl TryFrom<FamilyWire> for GenFamily {
    type Error = Error;

    fn try_from(w: FamilyWire) -> Result<Self> {
        let theta_box = ThetaBox::from_intervals(&w.theta_box)?;
        let kind = match w.family.as_str() {
            "gaussian_variance" => {
                let mean_g = w.mean.unwrap_or(0.0);
                let mean_gn = w.mean_n.unwrap_or(mean_g);
                FamilyKind::GaussianVariance { mean_g, mean_gn }
            }
            "gaussian_mean" => {
                let var_g = w.variance.ok_or_else(|| {
                    Error::InvalidParameter("gaussian_mean family requires a variance".into())
                })?;
                let var_gn = w.variance_n.unwrap_or(var_g);
                FamilyKind::GaussianMean { var_g, var_gn }
            }
            other => return Err(Error::UnknownFamily(other.to_string())),
        };
        GenFamily::new(kind, theta_box)
    }
}

impl From<GenFamily> for FamilyWire {
    fn from(f: GenFamily) -> Self {
        let theta_box = f.theta_box.intervals();
        match f.kind {
            FamilyKind::GaussianVariance { mean_g, mean_gn } => FamilyWire {
                family: "gaussian_variance".into(),
                mean: Some(mean_g),
                mean_n: Some(mean_gn),
                variance: None,
                variance_n: None,
                theta_box,
            },
            FamilyKind::GaussianMean { var_g, var_gn } => FamilyWire {
                family: "gaussian_mean".into(),
                mean: None,
                mean_n: None,
                variance: Some(var_g),
                variance_n: Some(var_gn),
                theta_box,
            },
        }
    }
}

/// Maximise the branch log-likelihood over the box; returns the (projected)
/// maximiser and the log-likelihood there.
pub fn mle_over_window(
    kind: &FamilyKind,
    theta_box: &ThetaBox,
    stats: &WindowStats,
    branch: Branch,
) -> Result<(Vec<f64>, f64)> {
    if stats.len == 0 {
        return Err(Error::WindowTooShort { got: 0, want: 1 });
    }
    if theta_box.dim() != kind.param_dim() {
        return Err(Error::ThetaDimension { got: theta_box.dim(), want: kind.param_dim() });
    }
    // Both supported families are one-dimensional with concave windowed
    // log-likelihood in θ (after the usual reparameterisation), so the box
    // maximiser is the clamped unconstrained maximiser.
    let theta = theta_box.project(&kind.unconstrained_mle(stats, branch));
    let value = kind.log_likelihood(stats, branch, &theta);
    if !value.is_finite() {
        return Err(Error::NonFinite("windowed log-likelihood"));
    }
    Ok((theta, value))
}

/// Relative margin used by the interior check.
pub const INTERIOR_MARGIN: f64 = 1e-6;

/// Does the largest eigenvalue of the negated Hessian stay at most `b` over
/// the radius-`1/sqrt(b)` ball around `theta_hat`? The ball is probed at the
/// centre, the 2d axis offsets, and the 2^d diagonal corners, all clipped to
/// the box.
pub fn hessian_ball_check(
    kind: &FamilyKind,
    theta_box: &ThetaBox,
    stats: &WindowStats,
    branch: Branch,
    theta_hat: &[f64],
    b: f64,
) -> Result<bool> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "curvature check needs a positive finite threshold, got {b}"
        )));
    }
    let d = kind.param_dim();
    let radius = 1.0 / b.sqrt();
    let mut probes: Vec<Vec<f64>> = vec![theta_hat.to_vec()];
    for i in 0..d {
        for sign in [-1.0, 1.0] {
            let mut p = theta_hat.to_vec();
            p[i] += sign * radius;
            probes.push(p);
        }
    }
    let diag = radius / (d as f64).sqrt();
    for corner in 0..(1usize << d) {
        let mut p = theta_hat.to_vec();
        for (i, v) in p.iter_mut().enumerate() {
            *v += if corner >> i & 1 == 1 { diag } else { -diag };
        }
        probes.push(p);
    }
    for probe in probes {
        let clipped = theta_box.project(&probe);
        let neg_h = kind.neg_hessian(stats, branch, &clipped);
        let eigen = neg_h.symmetric_eigen();
        let lambda_max = eigen.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !lambda_max.is_finite() {
            return Err(Error::NonFinite("curvature eigenvalue"));
        }
        if lambda_max > b {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One window's verdict: the branch maximised log-likelihood ratio and the
/// regularity checks at the maximiser.
#[derive(Debug, Clone, Serialize)]
pub struct GenWindowVerdict {
    /// Window length (the window covers the most recent `l` samples).
    pub l: usize,
    pub branch: Branch,
    pub theta_hat: Vec<f64>,
    pub llr: f64,
    pub hessian_ok: bool,
    pub interior_ok: bool,
    pub fired: bool,
}

/// One detector step: the best window's statistic and verdict.
#[derive(Debug, Clone, Serialize)]
pub struct GenStep {
    pub t: u64,
    /// Best maximised log-likelihood ratio over the evaluated windows and
    /// branches; zero when no window is long enough yet.
    pub statistic: f64,
    pub fired: bool,
    pub verdict: Option<GenWindowVerdict>,
}

#[derive(Debug, Clone, Copy)]
struct GenEntry {
    stats: WindowStats,
    sum_log_f: f64,
    denom: f64,
}

/// Window-limited detector for a parametric post-change family.
#[derive(Debug, Clone)]
pub struct GenWsglr {
    f: DistributionModel,
    f_n: DistributionModel,
    family: GenFamily,
    m_b: usize,
    m_b_prime: usize,
    b: f64,
    disable_interior_check: bool,
    t: u64,
    /// Entries for window lengths 1..=m_b; front is the longest window.
    entries: VecDeque<GenEntry>,
    statistic: f64,
}

impl GenWsglr {
    pub fn new(
        f: DistributionModel,
        f_n: DistributionModel,
        family: GenFamily,
        m_b: usize,
        m_b_prime: usize,
        b: f64,
        disable_interior_check: bool,
    ) -> Result<Self> {
        if m_b_prime == 0 || m_b_prime > m_b {
            return Err(Error::WindowTooShort { got: m_b, want: m_b_prime.max(1) });
        }
        if !b.is_finite() || b <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "threshold must be positive and finite, got {b}"
            )));
        }
        Ok(Self {
            f,
            f_n,
            family,
            m_b,
            m_b_prime,
            b,
            disable_interior_check,
            t: 0,
            entries: VecDeque::with_capacity(m_b + 1),
            statistic: 0.0,
        })
    }

    pub fn threshold(&self) -> f64 {
        self.b
    }

    pub fn window(&self) -> usize {
        self.m_b
    }

    pub fn min_window(&self) -> usize {
        self.m_b_prime
    }

    pub fn statistic(&self) -> f64 {
        self.statistic
    }

    pub fn time(&self) -> u64 {
        self.t
    }

    pub fn family(&self) -> &GenFamily {
        &self.family
    }

    fn evaluate(&self, entry: &GenEntry, branch: Branch) -> Result<GenWindowVerdict> {
        let (theta_hat, loglik) =
            mle_over_window(&self.family.kind, &self.family.theta_box, &entry.stats, branch)?;
        let llr = loglik - entry.denom;
        Ok(GenWindowVerdict {
            l: entry.stats.len,
            branch,
            theta_hat,
            llr,
            hessian_ok: false,
            interior_ok: false,
            fired: false,
        })
    }

    fn run_checks(&self, entry: &GenEntry, verdict: &mut GenWindowVerdict) -> Result<()> {
        verdict.interior_ok = self.disable_interior_check
            || self
                .family
                .theta_box
                .strictly_inside(&verdict.theta_hat, INTERIOR_MARGIN);
        verdict.hessian_ok = hessian_ball_check(
            &self.family.kind,
            &self.family.theta_box,
            &entry.stats,
            verdict.branch,
            &verdict.theta_hat,
            self.b,
        )?;
        verdict.fired = verdict.llr >= self.b && verdict.hessian_ok && verdict.interior_ok;
        Ok(())
    }

    /// Consume one observation; the full verdict is in the returned step.
    pub fn step(&mut self, x: f64) -> Result<GenStep> {
        let lf = self.f.log_density(x)?;
        let lfn = self.f_n.log_density(x)?;
        if !lf.is_finite() || !lfn.is_finite() {
            return Err(Error::NonFinite("log density"));
        }
        for entry in self.entries.iter_mut() {
            entry.stats.push(x);
            entry.sum_log_f += lf;
            entry.denom = denom_step(entry.denom, entry.sum_log_f, lfn);
        }
        self.entries.push_back(GenEntry {
            stats: WindowStats { len: 1, sum_x: x, sum_x2: x * x },
            sum_log_f: lf,
            denom: lf.max(lfn),
        });
        if self.entries.len() > self.m_b {
            self.entries.pop_front();
        }
        self.t += 1;

        // Longest windows first, so ties resolve toward the earlier start.
        let mut best: Option<(usize, GenWindowVerdict)> = None;
        let mut fired: Option<(usize, GenWindowVerdict)> = None;
        for (idx, entry) in self.entries.iter().enumerate() {
            if entry.stats.len < self.m_b_prime {
                break; // windows only get shorter from here
            }
            for branch in [Branch::G, Branch::Gn] {
                let mut verdict = self.evaluate(entry, branch)?;
                if verdict.llr >= self.b && fired.is_none() {
                    self.run_checks(entry, &mut verdict)?;
                    if verdict.fired {
                        fired = Some((idx, verdict.clone()));
                    }
                }
                if best.as_ref().map_or(true, |(_, b)| verdict.llr > b.llr) {
                    best = Some((idx, verdict));
                }
            }
        }

        self.statistic = best.as_ref().map_or(0.0, |(_, v)| v.llr);
        let (fired_flag, verdict) = match fired {
            Some((_, v)) => (true, Some(v)),
            None => match best {
                Some((idx, mut v)) => {
                    // Report the checks for the best window even when quiet.
                    let entry = self.entries[idx];
                    self.run_checks(&entry, &mut v)?;
                    (v.fired, Some(v))
                }
                None => (false, None),
            },
        };
        Ok(GenStep { t: self.t, statistic: self.statistic, fired: fired_flag, verdict })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn variance_family(lo: f64, hi: f64) -> GenFamily {
        GenFamily::new(
            FamilyKind::GaussianVariance { mean_g: 0.0, mean_gn: 2.0 },
            ThetaBox::new(vec![lo], vec![hi]).unwrap(),
        )
        .unwrap()
    }

    fn mean_family(lo: f64, hi: f64) -> GenFamily {
        GenFamily::new(
            FamilyKind::GaussianMean { var_g: 1.0, var_gn: 2.0 },
            ThetaBox::new(vec![lo], vec![hi]).unwrap(),
        )
        .unwrap()
    }

    /// Dense grid search over the box, the dumb way.
    fn grid_mle(
        kind: &FamilyKind,
        theta_box: &ThetaBox,
        stats: &WindowStats,
        branch: Branch,
    ) -> (f64, f64) {
        let (lo, hi) = (theta_box.lo()[0], theta_box.hi()[0]);
        let mut best = (lo, f64::NEG_INFINITY);
        for i in 0..=200_000 {
            let theta = lo + (hi - lo) * i as f64 / 200_000.0;
            let v = kind.log_likelihood(stats, branch, &[theta]);
            if v > best.1 {
                best = (theta, v);
            }
        }
        best
    }

    #[test]
    fn variance_mle_matches_grid_search() {
        let family = variance_family(0.01, 100.0);
        let stats = WindowStats::from_samples(&[1.0, -1.0, 2.0]);
        let (theta, value) =
            mle_over_window(family.kind(), family.theta_box(), &stats, Branch::G).unwrap();
        // Mean 0 branch: MLE variance = (1 + 1 + 4) / 3 = 2.
        assert!((theta[0] - 2.0).abs() < 1e-12);
        let (grid_theta, grid_value) = grid_mle(family.kind(), family.theta_box(), &stats, Branch::G);
        assert!((theta[0] - grid_theta).abs() < 1e-2);
        assert!(value >= grid_value - 1e-9);
    }

    #[test]
    fn mean_mle_matches_grid_search() {
        let family = mean_family(-10.0, 10.0);
        let stats = WindowStats::from_samples(&[1.0, 2.0, 6.0]);
        let (theta, value) =
            mle_over_window(family.kind(), family.theta_box(), &stats, Branch::G).unwrap();
        assert!((theta[0] - 3.0).abs() < 1e-12);
        let (grid_theta, grid_value) = grid_mle(family.kind(), family.theta_box(), &stats, Branch::G);
        assert!((theta[0] - grid_theta).abs() < 1e-3);
        assert!(value >= grid_value - 1e-9);
    }

    #[test]
    fn clamped_mle_lands_on_the_boundary_and_fails_the_interior_check() {
        let family = variance_family(0.5, 1.5);
        // Sample variance 2 exceeds the box.
        let stats = WindowStats::from_samples(&[1.0, -1.0, 2.0]);
        let (theta, _) =
            mle_over_window(family.kind(), family.theta_box(), &stats, Branch::G).unwrap();
        assert_eq!(theta[0], 1.5);
        assert!(!family.theta_box().strictly_inside(&theta, INTERIOR_MARGIN));
    }

    #[test]
    fn collapsed_box_passes_the_interior_check() {
        let theta_box = ThetaBox::new(vec![10.0], vec![10.0]).unwrap();
        assert!(theta_box.strictly_inside(&[10.0], INTERIOR_MARGIN));
    }

    #[test]
    fn mean_family_curvature_is_constant_and_binds_for_long_windows() {
        // -H = l / var; with var 1 and b = 8 the check caps l at 8.
        let family = mean_family(-10.0, 10.0);
        let mut stats = WindowStats::new();
        for i in 0..8 {
            stats.push(i as f64 * 0.1);
        }
        assert!(hessian_ball_check(family.kind(), family.theta_box(), &stats, Branch::G, &[0.4], 8.0)
            .unwrap());
        stats.push(0.9);
        assert!(!hessian_ball_check(family.kind(), family.theta_box(), &stats, Branch::G, &[0.4], 8.0)
            .unwrap());
    }

    #[test]
    fn variance_family_curvature_probes_the_ball() {
        // At the MLE, -H = l / (2 θ̂²), far below b for θ̂ = 10; the probe at
        // θ̂ - 1/sqrt(b) is slightly larger but still tiny.
        let family = variance_family(0.01, 100.0);
        let mut stats = WindowStats::new();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..64 {
            let x: f64 = rng.random_range(-6.0..6.0);
            stats.push(x);
        }
        let (theta, _) =
            mle_over_window(family.kind(), family.theta_box(), &stats, Branch::G).unwrap();
        assert!(hessian_ball_check(family.kind(), family.theta_box(), &stats, Branch::G, &theta, 8.0)
            .unwrap());
    }

    #[test]
    fn detector_fires_on_a_variance_burst() {
        let f = DistributionModel::gaussian(0.0, 1.0).unwrap();
        let f_n = DistributionModel::gaussian(2.0, 1.0).unwrap();
        let family = variance_family(0.01, 100.0);
        let mut det = GenWsglr::new(f, f_n, family, 32, 2, 8.0, false).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut fired_at = None;
        for t in 1..=400u64 {
            let x: f64 = if t < 200 {
                rng.random_range(-1.0..1.0)
            } else {
                // Variance ~48 burst, comfortably inside the box.
                rng.random_range(-12.0..12.0)
            };
            let out = det.step(x).unwrap();
            if out.fired {
                fired_at = Some((t, out));
                break;
            }
        }
        let (t, out) = fired_at.expect("burst should fire the detector");
        assert!(t >= 200, "fired before the burst at t = {t}");
        let v = out.verdict.unwrap();
        assert!(v.fired && v.hessian_ok && v.interior_ok);
        assert!(v.llr >= 8.0);
    }

    #[test]
    fn family_json_round_trips_and_validates() {
        let text = r#"{"family":"gaussian_variance","mean":0.0,"theta_box":[[0.01,100.0]]}"#;
        let family = GenFamily::from_json(text).unwrap();
        assert_eq!(family.kind().name(), "gaussian_variance");
        assert_eq!(family.theta_box().intervals(), vec![[0.01, 100.0]]);
        let again: GenFamily =
            serde_json::from_str(&serde_json::to_string(&family).unwrap()).unwrap();
        assert_eq!(again, family);

        assert!(GenFamily::from_json(r#"{"family":"unknown","theta_box":[[0.0,1.0]]}"#).is_err());
        assert!(
            GenFamily::from_json(r#"{"family":"gaussian_variance","theta_box":[[-1.0,1.0]]}"#)
                .is_err(),
            "variance box must be positive"
        );
        assert!(
            GenFamily::from_json(r#"{"family":"gaussian_mean","theta_box":[[-1.0,1.0]]}"#)
                .is_err(),
            "mean family needs a variance"
        );
    }

    #[test]
    fn window_bounds_are_validated() {
        let f = DistributionModel::gaussian(0.0, 1.0).unwrap();
        let f_n = DistributionModel::gaussian(2.0, 1.0).unwrap();
        assert!(GenWsglr::new(f.clone(), f_n.clone(), variance_family(0.01, 100.0), 4, 5, 8.0, false)
            .is_err());
        assert!(GenWsglr::new(f, f_n, variance_family(0.01, 100.0), 4, 0, 8.0, false).is_err());
    }
}
