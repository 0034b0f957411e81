//! Fitting detector models to recorded signals and running detection on
//! files.
//!
//! The intended workflow for real measurements (e.g. vibration traces):
//!
//! 1. Difference the raw series ([`detrend`]) so slow drifts become a roughly
//!    i.i.d. increment stream.
//! 2. Fit a density to each labeled training segment ([`fit_model`], or
//!    [`fit_histogram`] when a Gaussian is too crude) and assemble the four
//!    detection roles with [`build_quad_from_segments`].
//! 3. Run any configured detector over a measurement file with
//!    [`detect_on_file`], which differences the file the same way before
//!    stepping the detector.
//!
//! [`splice_segments`] concatenates labeled segments into one stream, which
//! is how a change scenario is staged from separately recorded conditions.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detectors::DetectorConfig;
use crate::distributions::{DistributionModel, HistogramDensity};
use crate::error::{Error, Result};
use crate::signal::QuadModels;

/// First differences: `y[1] - y[0], ..., y[n-1] - y[n-2]`.
///
/// Drifting level series become increment series; a cumulative-sum series is
/// mapped back to (floating-point approximations of) its increments.
pub fn detrend(ys: &[f64]) -> Result<Vec<f64>> {
    if ys.len() < 2 {
        return Err(Error::EmptyInput("differencing needs at least two samples"));
    }
    Ok(ys.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Gaussian maximum-likelihood fit: sample mean and population variance.
pub fn fit_model(samples: &[f64]) -> Result<DistributionModel> {
    if samples.len() < 2 {
        return Err(Error::EmptyInput("fitting needs at least two samples"));
    }
    for &x in samples {
        if !x.is_finite() {
            return Err(Error::NonFiniteSample(x));
        }
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let variance = samples.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / n;
    if variance == 0.0 {
        return Err(Error::InvalidParameter(
            "training segment is constant; its variance is zero".into(),
        ));
    }
    DistributionModel::gaussian(mean, variance.max(1e-12))
}

/// Histogram fit over the sample range with equal-width bins.
pub fn fit_histogram(samples: &[f64], num_bins: usize) -> Result<HistogramDensity> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("fitting needs samples"));
    }
    if num_bins == 0 {
        return Err(Error::InvalidParameter("histogram needs at least one bin".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in samples {
        if !x.is_finite() {
            return Err(Error::NonFiniteSample(x));
        }
        lo = lo.min(x);
        hi = hi.max(x);
    }
    if lo == hi {
        // Degenerate range: give the single point a unit-width bin.
        lo -= 0.5;
        hi += 0.5;
    }
    let mut counts = vec![0.0f64; num_bins];
    let width = (hi - lo) / num_bins as f64;
    for &x in samples {
        let idx = (((x - lo) / width) as usize).min(num_bins - 1);
        counts[idx] += 1.0;
    }
    HistogramDensity::from_masses(lo, hi, &counts)
}

/// A training or measurement segment with a condition label.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabeledSegment {
    pub label: String,
    pub samples: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_rate: Option<f64>,
}

impl LabeledSegment {
    pub fn new(label: impl Into<String>, samples: Vec<f64>) -> Self {
        Self { label: label.into(), samples, sample_rate: None }
    }
}

/// Which segment label plays which detection role.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoleMap {
    pub f: String,
    #[serde(rename = "fn")]
    pub f_n: String,
    pub g: String,
    #[serde(rename = "gn")]
    pub g_n: String,
}

impl RoleMap {
    fn roles(&self) -> [(&'static str, &str); 4] {
        [("f", &self.f), ("fn", &self.f_n), ("g", &self.g), ("gn", &self.g_n)]
    }
}

fn segment_for<'a>(
    segments: &'a [LabeledSegment],
    role: &str,
    label: &str,
) -> Result<&'a LabeledSegment> {
    let mut found = None;
    for seg in segments {
        if seg.label == label {
            if found.is_some() {
                return Err(Error::DuplicateRole(format!("{role} -> {label}")));
            }
            found = Some(seg);
        }
    }
    found.ok_or_else(|| Error::MissingRole(format!("{role} -> {label}")))
}

/// Fit the four detection densities from labeled segments. Each role's label
/// must match exactly one segment; segments are treated as already-detrended
/// observations.
pub fn build_quad_from_segments(
    segments: &[LabeledSegment],
    roles: &RoleMap,
) -> Result<QuadModels> {
    let [f, f_n, g, g_n] = roles
        .roles()
        .map(|(role, label)| segment_for(segments, role, label).and_then(|s| fit_model(&s.samples)));
    Ok(QuadModels { f: f?, f_n: f_n?, g: g?, g_n: g_n? })
}

/// One phase of a spliced stream: take the leading `len` samples of the
/// segment with this label.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplicePhase {
    pub label: String,
    pub len: usize,
}

impl SplicePhase {
    pub fn new(label: impl Into<String>, len: usize) -> Self {
        Self { label: label.into(), len }
    }
}

/// Concatenate the leading samples of labeled segments into one stream.
pub fn splice_segments(segments: &[LabeledSegment], phases: &[SplicePhase]) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for phase in phases {
        let seg = segment_for(segments, "splice", &phase.label)?;
        if seg.samples.len() < phase.len {
            return Err(Error::InvalidParameter(format!(
                "segment {:?} has {} samples, phase needs {}",
                phase.label,
                seg.samples.len(),
                phase.len
            )));
        }
        out.extend_from_slice(&seg.samples[..phase.len]);
    }
    if out.is_empty() {
        return Err(Error::EmptyInput("splice produced no samples"));
    }
    Ok(out)
}

/// Parse a single-column CSV: one float per line, optional header on line 1,
/// blank lines skipped, CR/LF tolerated.
pub fn parse_single_column(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            Ok(v) => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("non-finite value {v}"),
                })
            }
            Err(_) if line_no == 1 => continue, // header row
            Err(e) => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("{e}: {line:?}"),
                })
            }
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyInput("no numeric rows in input"));
    }
    Ok(out)
}

/// Read a single-column CSV file; see [`parse_single_column`].
pub fn read_single_column_csv(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    parse_single_column(&std::fs::read_to_string(path)?)
}

/// The outcome of running a detector over one recorded stream.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionReport {
    pub threshold: f64,
    /// Rows read from the file.
    pub raw_len: usize,
    /// Samples actually fed to the detector (one fewer when differenced).
    pub analyzed_len: usize,
    /// 1-based stopping time in the analyzed stream; `None` if it never fired.
    pub tau: Option<u64>,
    /// Statistic value at the stop.
    pub statistic_at_stop: Option<f64>,
    /// (t, statistic) for every analyzed step up to and including the stop.
    #[serde(skip)]
    pub trace: Vec<(u64, f64)>,
}

impl DetectionReport {
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("t,statistic\n");
        for (t, s) in &self.trace {
            out.push_str(&format!("{t},{s}\n"));
        }
        out
    }
}

/// Run a configured detector over an in-memory series. With `apply_detrend`
/// the series is first differenced, matching the file-based path.
pub fn detect_on_values(
    raw: &[f64],
    models: &QuadModels,
    config: &DetectorConfig,
    apply_detrend: bool,
) -> Result<DetectionReport> {
    let detrended;
    let xs: &[f64] = if apply_detrend {
        detrended = detrend(raw)?;
        &detrended
    } else {
        raw
    };
    if xs.is_empty() {
        return Err(Error::EmptyInput("no samples to analyze"));
    }
    let mut detector = config.build(models)?;
    let mut trace = Vec::with_capacity(xs.len());
    let mut tau = None;
    let mut statistic_at_stop = None;
    for (i, &x) in xs.iter().enumerate() {
        let t = i as u64 + 1;
        let step = detector.step(x)?;
        trace.push((t, step.statistic));
        if step.fired(config.b) {
            tau = Some(t);
            statistic_at_stop = Some(step.statistic);
            break;
        }
    }
    Ok(DetectionReport {
        threshold: config.b,
        raw_len: raw.len(),
        analyzed_len: xs.len(),
        tau,
        statistic_at_stop,
        trace,
    })
}

/// Read a single-column CSV, difference it (unless `apply_detrend` is
/// false), and run the configured detector over the result.
pub fn detect_on_file(
    path: impl AsRef<Path>,
    models: &QuadModels,
    config: &DetectorConfig,
    apply_detrend: bool,
) -> Result<DetectionReport> {
    let raw = read_single_column_csv(path)?;
    detect_on_values(&raw, models, config, apply_detrend)
}
