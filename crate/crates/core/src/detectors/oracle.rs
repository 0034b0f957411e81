//! Exhaustive reference implementations of every detector statistic.
//!
//! Each function recomputes its statistic from scratch by enumerating all
//! candidate change times, accumulating sums strictly left to right. The
//! streaming recursions are expected to reproduce these values bitwise (the
//! recursions replace an inner maximisation with a running maximum, and
//! floating-point rounding is monotone), so tests can compare exactly or at
//! tolerances far below any statistical noise. Costs are polynomial in the
//! stream length; these are for tests, not production streams.

use crate::error::Result;
use crate::signal::QuadModels;

/// `max_j sum(log_a[..j]) + sum(log_b[j..])` over all splits j = 0..=n,
/// each candidate accumulated left to right.
fn split_max(log_a: &[f64], log_b: &[f64]) -> f64 {
    debug_assert_eq!(log_a.len(), log_b.len());
    let n = log_a.len();
    let mut best = f64::NEG_INFINITY;
    for j in 0..=n {
        let mut cand = 0.0;
        for &l in &log_a[..j] {
            cand += l;
        }
        for &l in &log_b[j..] {
            cand += l;
        }
        if cand > best {
            best = cand;
        }
    }
    best
}

fn log_vectors(models: &QuadModels, window: &[f64]) -> Result<[Vec<f64>; 4]> {
    let mut lf = Vec::with_capacity(window.len());
    let mut lfn = Vec::with_capacity(window.len());
    let mut lg = Vec::with_capacity(window.len());
    let mut lgn = Vec::with_capacity(window.len());
    for &x in window {
        lf.push(models.f.log_density(x)?);
        lfn.push(models.f_n.log_density(x)?);
        lg.push(models.g.log_density(x)?);
        lgn.push(models.g_n.log_density(x)?);
    }
    Ok([lf, lfn, lg, lgn])
}

/// CuSum statistic after the last of `llrs`: the maximum over all suffixes
/// (including the empty one) of the suffix sum of log-likelihood ratios.
pub fn cusum_bruteforce(llrs: &[f64]) -> f64 {
    let mut best = 0.0f64; // empty suffix
    for k in 0..llrs.len() {
        let mut sum = 0.0;
        for &l in &llrs[k..] {
            sum += l;
        }
        if sum > best {
            best = sum;
        }
    }
    best
}

/// Pre-change log-likelihood of `window`, maximised over the unknown
/// nuisance time: `max_j sum(log f before j) + sum(log f_n from j on)`.
pub fn denominator_bruteforce(models: &QuadModels, window: &[f64]) -> Result<f64> {
    let [lf, lfn, _, _] = log_vectors(models, window)?;
    Ok(split_max(&lf, &lfn))
}

/// The single SGLR window term for 1-based start `k` over the stream `xs`:
/// best of the all-g and all-g_n log-likelihoods minus the split-maximised
/// pre-change log-likelihood.
pub fn sglr_term_bruteforce(models: &QuadModels, xs: &[f64], k: usize) -> Result<f64> {
    assert!(k >= 1 && k <= xs.len(), "window start out of range");
    let window = &xs[k - 1..];
    let [lf, lfn, lg, lgn] = log_vectors(models, window)?;
    let sum_g: f64 = lg.iter().sum();
    let sum_gn: f64 = lgn.iter().sum();
    Ok(sum_g.max(sum_gn) - split_max(&lf, &lfn))
}

/// Window-limited SGLR statistic at t = `xs.len()`: the maximum window term
/// over starts k = max(1, t - m_b) ..= t, floored at zero by the empty window.
pub fn wsglr_bruteforce(models: &QuadModels, xs: &[f64], m_b: usize) -> Result<f64> {
    let t = xs.len();
    let k_min = t.saturating_sub(m_b).max(1);
    let mut best = 0.0f64;
    for k in k_min..=t {
        let term = sglr_term_bruteforce(models, xs, k)?;
        if term > best {
            best = term;
        }
    }
    Ok(best)
}

/// Unrestricted SGLR statistic at t = `xs.len()` (every start k is live).
pub fn sglr_bruteforce(models: &QuadModels, xs: &[f64]) -> Result<f64> {
    wsglr_bruteforce(models, xs, xs.len())
}

/// Full GLR statistic at t = `xs.len()`: both the post-change likelihood
/// (g then g_n) and the pre-change likelihood (f then f_n) are maximised over
/// their split times within each window.
pub fn glr_bruteforce(models: &QuadModels, xs: &[f64]) -> Result<f64> {
    let t = xs.len();
    let mut best = 0.0f64;
    for k in 1..=t {
        let window = &xs[k - 1..];
        let [lf, lfn, lg, lgn] = log_vectors(models, window)?;
        let term = split_max(&lg, &lgn) - split_max(&lf, &lfn);
        if term > best {
            best = term;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DistributionModel;

    #[test]
    fn cusum_bruteforce_hand_cases() {
        assert_eq!(cusum_bruteforce(&[]), 0.0);
        assert_eq!(cusum_bruteforce(&[-1.0, -2.0]), 0.0);
        // Suffix sums of [1, -3, 2]: 0 (empty), 2, -1, 0 -> max 2.
        assert_eq!(cusum_bruteforce(&[1.0, -3.0, 2.0]), 2.0);
    }

    #[test]
    fn split_max_hand_case() {
        // Splits of a=[1,2] / b=[10,20]: 30 (all b), 21, 3 (all a) -> 30.
        assert_eq!(split_max(&[1.0, 2.0], &[10.0, 20.0]), 30.0);
        // Empty window: the only split is the empty sum.
        assert_eq!(split_max(&[], &[]), 0.0);
    }

    #[test]
    fn sglr_never_exceeds_glr() {
        let models = QuadModels {
            f: DistributionModel::gaussian(0.0, 1.0).unwrap(),
            f_n: DistributionModel::gaussian(2.0, 1.0).unwrap(),
            g: DistributionModel::gaussian(0.0, 10.0).unwrap(),
            g_n: DistributionModel::gaussian(2.0, 10.0).unwrap(),
        };
        let xs = [0.4, -1.0, 2.2, 5.0, 1.9, -0.3, 4.4];
        for t in 1..=xs.len() {
            let s = sglr_bruteforce(&models, &xs[..t]).unwrap();
            let g = glr_bruteforce(&models, &xs[..t]).unwrap();
            assert!(s <= g + 1e-12, "t = {t}");
        }
    }
}
