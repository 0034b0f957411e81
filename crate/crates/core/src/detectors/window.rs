//! Window-limited SGLR statistic and its finite-moving-average variant.
//!
//! Both detectors watch a signal that may undergo a *nuisance* change
//! (`f -> f_n` before the critical time, `g -> g_n` after) and a *critical*
//! change (`f -> g` or `f_n -> g_n`), with the nuisance time unknown. For a
//! candidate critical time k the single-window statistic is
//!
//! ```text
//! log Λ(k, t) = max( Σ_{i=k}^t log g(x_i), Σ_{i=k}^t log g_n(x_i) )
//!             - max_{k<=j<=t+1} ( Σ_{i=k}^{j-1} log f(x_i) + Σ_{i=j}^t log f_n(x_i) )
//! ```
//!
//! i.e. the post-change likelihood maximised over which side of the critical
//! change we are on, against the pre-change likelihood maximised over the
//! unknown nuisance time j. The window-limited rule takes the maximum over
//! the last `m_b + 1` candidate starts k (plus the empty window, which pins
//! the statistic at zero or above); the moving-average rule keeps only the
//! oldest start k = t - m_b.
//!
//! The denominator is never recomputed from scratch: it satisfies
//!
//! ```text
//! D(k, t) = max( D(k, t-1) + log f_n(x_t), Σ_{i=k}^t log f(x_i) )
//! ```
//!
//! because a maximising split j either lies strictly before t (first branch)
//! or at t + 1, meaning no nuisance samples yet (second branch). The same
//! left-to-right accumulation makes the recursion bitwise equal to the
//! exhaustive maximum over j, not merely equal up to rounding.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::signal::QuadModels;

/// One step of the split-likelihood denominator recursion.
///
/// `prev` is D(k, t-1), `f_prefix` is the full-f log-likelihood
/// Σ_{i=k}^t log f(x_i) *including* the new sample, and `log_fn_x` is
/// log f_n(x_t). Returns D(k, t).
pub fn denom_step(prev: f64, f_prefix: f64, log_fn_x: f64) -> f64 {
    (prev + log_fn_x).max(f_prefix)
}

/// Per-candidate-start running sums. `k` is implicit in the entry's position
/// within the ring buffer.
#[derive(Debug, Clone, Copy)]
pub(crate) struct KEntry {
    pub sum_log_g: f64,
    pub sum_log_gn: f64,
    pub sum_log_f: f64,
    /// max_j split log-likelihood of f then f_n over the entry's window.
    pub denom: f64,
}

impl KEntry {
    /// Entry for a window starting (and for now ending) at the current sample.
    pub fn fresh(lf: f64, lfn: f64, lg: f64, lgn: f64) -> Self {
        Self {
            sum_log_g: lg,
            sum_log_gn: lgn,
            sum_log_f: lf,
            // j = k (all nuisance) vs j = k + 1 (all pre-nuisance).
            denom: lfn.max(lf),
        }
    }

    /// Extend the entry's window by the current sample.
    pub fn advance(&mut self, lf: f64, lfn: f64, lg: f64, lgn: f64) {
        self.sum_log_g += lg;
        self.sum_log_gn += lgn;
        self.sum_log_f += lf;
        self.denom = denom_step(self.denom, self.sum_log_f, lfn);
    }

    /// log Λ(k, t) for this entry's window.
    pub fn term(&self) -> f64 {
        self.sum_log_g.max(self.sum_log_gn) - self.denom
    }
}

/// Evaluates the four log-densities at one observation.
pub(crate) fn log_quad(models: &QuadModels, x: f64) -> Result<[f64; 4]> {
    let lf = models.f.log_density(x)?;
    let lfn = models.f_n.log_density(x)?;
    let lg = models.g.log_density(x)?;
    let lgn = models.g_n.log_density(x)?;
    for l in [lf, lfn, lg, lgn] {
        if l.is_infinite() && l > 0.0 {
            return Err(Error::NonFinite("log density"));
        }
        if l.is_nan() {
            return Err(Error::NonFinite("log density"));
        }
    }
    Ok([lf, lfn, lg, lgn])
}

/// Window-limited SGLR detector: the statistic is
/// `max(0, max_{t - m_b <= k <= t} log Λ(k, t))`, maintained in O(m_b) time
/// and memory per step.
#[derive(Debug, Clone)]
pub struct WindowSglr {
    models: QuadModels,
    m_b: usize,
    t: u64,
    /// Entries for k = max(1, t - m_b) ..= t, oldest first.
    entries: VecDeque<KEntry>,
    statistic: f64,
}

impl WindowSglr {
    pub fn new(models: QuadModels, m_b: usize) -> Result<Self> {
        if m_b == 0 {
            return Err(Error::InvalidParameter(
                "window size m_b must be at least 1".into(),
            ));
        }
        Ok(Self {
            models,
            m_b,
            t: 0,
            entries: VecDeque::with_capacity(m_b + 2),
            statistic: 0.0,
        })
    }

    /// Consume one observation and return the updated statistic.
    pub fn step(&mut self, x: f64) -> Result<f64> {
        let [lf, lfn, lg, lgn] = log_quad(&self.models, x)?;
        for entry in self.entries.iter_mut() {
            entry.advance(lf, lfn, lg, lgn);
        }
        self.entries.push_back(KEntry::fresh(lf, lfn, lg, lgn));
        if self.entries.len() > self.m_b + 1 {
            self.entries.pop_front();
        }
        self.t += 1;
        // The empty window k = t + 1 contributes zero; iterate oldest-first so
        // an argmax-style scan would resolve ties toward the smaller k.
        let mut best = 0.0f64;
        for entry in &self.entries {
            let term = entry.term();
            if term > best {
                best = term;
            }
        }
        self.statistic = best;
        Ok(self.statistic)
    }

    pub fn statistic(&self) -> f64 {
        self.statistic
    }

    pub fn window(&self) -> usize {
        self.m_b
    }

    pub fn time(&self) -> u64 {
        self.t
    }

    pub fn models(&self) -> &QuadModels {
        &self.models
    }

    /// The k = t - m_b term alone, once that window is full.
    pub(crate) fn oldest_full_term(&self) -> Option<f64> {
        if self.entries.len() == self.m_b + 1 {
            self.entries.front().map(KEntry::term)
        } else {
            None
        }
    }
}

/// Finite-moving-average detector: the single window statistic
/// `log Λ(t - m_b, t)`, i.e. only the oldest candidate start of [`WindowSglr`],
/// with no maximisation over k. Zero until `m_b + 1` samples have arrived.
/// Unlike the window-limited statistic it can be negative.
#[derive(Debug, Clone)]
pub struct Fma {
    inner: WindowSglr,
    statistic: f64,
}

impl Fma {
    pub fn new(models: QuadModels, m_b: usize) -> Result<Self> {
        Ok(Self { inner: WindowSglr::new(models, m_b)?, statistic: 0.0 })
    }

    pub fn step(&mut self, x: f64) -> Result<f64> {
        self.inner.step(x)?;
        self.statistic = self.inner.oldest_full_term().unwrap_or(0.0);
        Ok(self.statistic)
    }

    pub fn statistic(&self) -> f64 {
        self.statistic
    }

    pub fn window(&self) -> usize {
        self.inner.window()
    }

    pub fn time(&self) -> u64 {
        self.inner.time()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::oracle::{
        denominator_bruteforce, sglr_term_bruteforce, wsglr_bruteforce,
    };
    use crate::distributions::DistributionModel;
    use rand::{Rng, SeedableRng};
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
    fn denominator_recursion_matches_exhaustive_split_exactly() {
        let models = quad();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let xs: Vec<f64> = (0..120).map(|_| rng.random_range(-5.0..7.0)).collect();
        // Maintain a single entry with unbounded window (k = 1).
        let [lf, lfn, lg, lgn] = log_quad(&models, xs[0]).unwrap();
        let mut entry = KEntry::fresh(lf, lfn, lg, lgn);
        assert_eq!(entry.denom, denominator_bruteforce(&models, &xs[..1]).unwrap());
        for t in 2..=xs.len() {
            let [lf, lfn, lg, lgn] = log_quad(&models, xs[t - 1]).unwrap();
            entry.advance(lf, lfn, lg, lgn);
            let oracle = denominator_bruteforce(&models, &xs[..t]).unwrap();
            assert_eq!(entry.denom, oracle, "t = {t}");
        }
    }

    #[test]
    fn statistic_matches_bruteforce_window_maximum() {
        let models = quad();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs: Vec<f64> = (0..90).map(|_| rng.random_range(-6.0..8.0)).collect();
        for m_b in [1usize, 3, 8, 32] {
            let mut det = WindowSglr::new(models.clone(), m_b).unwrap();
            for t in 1..=xs.len() {
                let s = det.step(xs[t - 1]).unwrap();
                let oracle = wsglr_bruteforce(&models, &xs[..t], m_b).unwrap();
                let scale = s.abs().max(oracle.abs()).max(1.0);
                assert!(
                    (s - oracle).abs() <= 1e-12 * scale,
                    "m_b = {m_b}, t = {t}: {s} vs {oracle}"
                );
            }
        }
    }

    #[test]
    fn statistic_is_never_negative() {
        let models = quad();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut det = WindowSglr::new(models, 16).unwrap();
        for _ in 0..200 {
            let s = det.step(rng.random_range(-10.0..10.0)).unwrap();
            assert!(s >= 0.0);
        }
    }

    #[test]
    fn identical_models_give_zero_statistic() {
        let f = DistributionModel::gaussian(0.0, 1.0).unwrap();
        let models = QuadModels { f: f.clone(), f_n: f.clone(), g: f.clone(), g_n: f };
        let mut det = WindowSglr::new(models, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let s = det.step(rng.random_range(-3.0..3.0)).unwrap();
            assert_eq!(s, 0.0);
        }
    }

    #[test]
    fn fma_reports_only_the_oldest_window() {
        let models = quad();
        let m_b = 6usize;
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let xs: Vec<f64> = (0..60).map(|_| rng.random_range(-5.0..7.0)).collect();
        let mut fma = Fma::new(models.clone(), m_b).unwrap();
        for t in 1..=xs.len() {
            let s = fma.step(xs[t - 1]).unwrap();
            if t <= m_b {
                assert_eq!(s, 0.0, "undefined before the window fills");
            } else {
                let k = t - m_b; // 1-based start of the oldest full window
                let oracle = sglr_term_bruteforce(&models, &xs[..t], k).unwrap();
                let scale = s.abs().max(oracle.abs()).max(1.0);
                assert!((s - oracle).abs() <= 1e-12 * scale, "t = {t}");
            }
        }
    }

    #[test]
    fn rejects_zero_window() {
        assert!(WindowSglr::new(quad(), 0).is_err());
    }
}
