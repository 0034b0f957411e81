//! Unbounded-window SGLR and GLR detectors.
//!
//! These keep one running entry per candidate critical time k = 1..=t, so a
//! step costs O(t) time and total memory grows linearly with the stream.
//! They exist as references and baselines; use [`WindowSglr`](super::WindowSglr)
//! for long streams.
//!
//! The GLR numerator maximises the post-change likelihood over the unknown
//! nuisance time j within the window, via the same split recursion as the
//! denominator:
//!
//! ```text
//! N(k, t) = max( N(k, t-1) + log g_n(x_t), Σ_{i=k}^t log g(x_i) )
//! ```
//!
//! The SGLR numerator keeps only the two extreme splits (all-g and all-g_n),
//! so SGLR <= GLR pointwise, with equality when the best split is extreme.

use crate::error::Result;
use crate::signal::QuadModels;

use super::window::{denom_step, log_quad, KEntry};

/// SGLR with the candidate start k unrestricted (every k = 1..=t is live).
#[derive(Debug, Clone)]
pub struct Sglr {
    models: QuadModels,
    t: u64,
    entries: Vec<KEntry>,
    statistic: f64,
}

impl Sglr {
    pub fn new(models: QuadModels) -> Self {
        Self { models, t: 0, entries: Vec::new(), statistic: 0.0 }
    }

    pub fn step(&mut self, x: f64) -> Result<f64> {
        let [lf, lfn, lg, lgn] = log_quad(&self.models, x)?;
        for entry in self.entries.iter_mut() {
            entry.advance(lf, lfn, lg, lgn);
        }
        self.entries.push(KEntry::fresh(lf, lfn, lg, lgn));
        self.t += 1;
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

    pub fn time(&self) -> u64 {
        self.t
    }
}

#[derive(Debug, Clone, Copy)]
struct GlrEntry {
    base: KEntry,
    /// max_j split log-likelihood of g then g_n over the entry's window.
    numer: f64,
}

/// Full GLR: both the numerator (g / g_n split) and the denominator
/// (f / f_n split) are maximised over their change times.
#[derive(Debug, Clone)]
pub struct Glr {
    models: QuadModels,
    t: u64,
    entries: Vec<GlrEntry>,
    statistic: f64,
}

impl Glr {
    pub fn new(models: QuadModels) -> Self {
        Self { models, t: 0, entries: Vec::new(), statistic: 0.0 }
    }

    pub fn step(&mut self, x: f64) -> Result<f64> {
        let [lf, lfn, lg, lgn] = log_quad(&self.models, x)?;
        for entry in self.entries.iter_mut() {
            entry.base.advance(lf, lfn, lg, lgn);
            entry.numer = denom_step(entry.numer, entry.base.sum_log_g, lgn);
        }
        self.entries.push(GlrEntry {
            base: KEntry::fresh(lf, lfn, lg, lgn),
            numer: lgn.max(lg),
        });
        self.t += 1;
        let mut best = 0.0f64;
        for entry in &self.entries {
            let term = entry.numer - entry.base.denom;
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

    pub fn time(&self) -> u64 {
        self.t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::oracle::{glr_bruteforce, sglr_bruteforce};
    use crate::detectors::{Fma, WindowSglr};
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
    fn sglr_matches_bruteforce() {
        let models = quad();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let xs: Vec<f64> = (0..70).map(|_| rng.random_range(-6.0..8.0)).collect();
        let mut det = Sglr::new(models.clone());
        for t in 1..=xs.len() {
            let s = det.step(xs[t - 1]).unwrap();
            let oracle = sglr_bruteforce(&models, &xs[..t]).unwrap();
            let scale = s.abs().max(oracle.abs()).max(1.0);
            assert!((s - oracle).abs() <= 1e-12 * scale, "t = {t}: {s} vs {oracle}");
        }
    }

    #[test]
    fn glr_matches_bruteforce() {
        let models = quad();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let xs: Vec<f64> = (0..70).map(|_| rng.random_range(-6.0..8.0)).collect();
        let mut det = Glr::new(models.clone());
        for t in 1..=xs.len() {
            let s = det.step(xs[t - 1]).unwrap();
            let oracle = glr_bruteforce(&models, &xs[..t]).unwrap();
            let scale = s.abs().max(oracle.abs()).max(1.0);
            assert!((s - oracle).abs() <= 1e-12 * scale, "t = {t}: {s} vs {oracle}");
        }
    }

    #[test]
    fn pointwise_ordering_fma_wsglr_sglr_glr() {
        let models = quad();
        let m_b = 12usize;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut fma = Fma::new(models.clone(), m_b).unwrap();
        let mut wsglr = WindowSglr::new(models.clone(), m_b).unwrap();
        let mut sglr = Sglr::new(models.clone());
        let mut glr = Glr::new(models);
        for t in 1..=250u32 {
            let x: f64 = rng.random_range(-7.0..9.0);
            let s_fma = fma.step(x).unwrap();
            let s_w = wsglr.step(x).unwrap();
            let s_s = sglr.step(x).unwrap();
            let s_g = glr.step(x).unwrap();
            let eps = 1e-9;
            assert!(s_fma <= s_w + eps, "t = {t}: fma {s_fma} > wsglr {s_w}");
            assert!(s_w <= s_s + eps, "t = {t}: wsglr {s_w} > sglr {s_s}");
            assert!(s_s <= s_g + eps, "t = {t}: sglr {s_s} > glr {s_g}");
        }
    }

    #[test]
    fn window_at_least_stream_length_equals_unbounded_sglr() {
        let models = quad();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let mut windowed = WindowSglr::new(models.clone(), 512).unwrap();
        let mut unbounded = Sglr::new(models);
        for _ in 0..200 {
            let x: f64 = rng.random_range(-6.0..8.0);
            let a = windowed.step(x).unwrap();
            let b = unbounded.step(x).unwrap();
            assert_eq!(a, b);
        }
    }
}
