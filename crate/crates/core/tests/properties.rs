//! Randomized cross-module properties: statistic ordering and window
//! monotonicity, oracle agreement, detrending as an inverse, divergence
//! positivity, and the exponential-family shortcut implication.

use proptest::collection::vec;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wsglr::detectors::oracle;
use wsglr::{
    check_exp_family_conditions, choose_window, detrend, growth_rates, kl_analytic, CuSum,
    DistributionModel, Fma, GaussianNatural, Glr, QuadModels, QuadScenario, Sglr, WindowSglr,
};

fn gaussian(mean: f64, variance: f64) -> DistributionModel {
    DistributionModel::gaussian(mean, variance).unwrap()
}

prop_compose! {
    /// Four Gaussians with moderate parameters; all statistics stay finite
    /// on streams drawn from the same range.
    fn quads()(params in vec((-3.0..3.0f64, 0.2..8.0f64), 4)) -> QuadModels {
        QuadModels {
            f: gaussian(params[0].0, params[0].1),
            f_n: gaussian(params[1].0, params[1].1),
            g: gaussian(params[2].0, params[2].1),
            g_n: gaussian(params[3].0, params[3].1),
        }
    }
}

fn streams() -> impl Strategy<Value = Vec<f64>> {
    vec(-6.0..6.0f64, 2..120)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The four statistics maximize over nested candidate sets, so they are
    /// pointwise ordered at every step.
    #[test]
    fn statistics_are_pointwise_ordered(models in quads(), xs in streams(), m_b in 1usize..24) {
        let mut fma = Fma::new(models.clone(), m_b).unwrap();
        let mut wsglr = WindowSglr::new(models.clone(), m_b).unwrap();
        let mut sglr = Sglr::new(models.clone());
        let mut glr = Glr::new(models);
        for &x in &xs {
            let s_f = fma.step(x).unwrap();
            let s_w = wsglr.step(x).unwrap();
            let s_s = sglr.step(x).unwrap();
            let s_g = glr.step(x).unwrap();
            let eps = 1e-9 * (1.0 + s_g.abs());
            prop_assert!(s_f <= s_w + eps, "fma {s_f} > wsglr {s_w}");
            prop_assert!(s_w <= s_s + eps, "wsglr {s_w} > sglr {s_s}");
            prop_assert!(s_s <= s_g + eps, "sglr {s_s} > glr {s_g}");
            prop_assert!(s_w >= 0.0 && s_s >= 0.0 && s_g >= 0.0);
        }
    }

    /// Doubling the window enlarges the candidate set, so the statistic can
    /// only grow.
    #[test]
    fn longer_windows_dominate_shorter_ones(models in quads(), xs in streams(), m_b in 1usize..16) {
        let mut small = WindowSglr::new(models.clone(), m_b).unwrap();
        let mut large = WindowSglr::new(models, 2 * m_b).unwrap();
        for &x in &xs {
            let s_small = small.step(x).unwrap();
            let s_large = large.step(x).unwrap();
            let eps = 1e-9 * (1.0 + s_large.abs());
            prop_assert!(s_large >= s_small - eps, "window {m_b}: {s_small} > {s_large}");
        }
    }

    /// The windowed recursion agrees with the direct per-window maximization.
    #[test]
    fn windowed_recursion_matches_bruteforce(models in quads(), xs in streams(), m_b in 1usize..24) {
        let mut det = WindowSglr::new(models.clone(), m_b).unwrap();
        for t in 1..=xs.len() {
            let recursive = det.step(xs[t - 1]).unwrap();
            let direct = oracle::wsglr_bruteforce(&models, &xs[..t], m_b).unwrap();
            let eps = 1e-9 * (1.0 + direct.abs());
            prop_assert!((recursive - direct).abs() <= eps, "t = {t}: {recursive} vs {direct}");
        }
    }

    /// The one-sided recursion and the clamped prefix-sum maximum are the
    /// same computation, so they agree bitwise.
    #[test]
    fn cusum_equals_prefix_max_exactly(models in quads(), xs in streams()) {
        let mut det = CuSum::new(models.f.clone(), models.g.clone());
        let llrs: Vec<f64> = xs
            .iter()
            .map(|&x| models.g.log_density(x).unwrap() - models.f.log_density(x).unwrap())
            .collect();
        for t in 1..=xs.len() {
            let recursive = det.step(xs[t - 1]).unwrap();
            prop_assert_eq!(recursive, oracle::cusum_bruteforce(&llrs[..t]));
        }
    }

    /// First differences undo cumulative summation.
    #[test]
    fn detrend_inverts_cumulative_sums(start in -10.0..10.0f64, increments in vec(-5.0..5.0f64, 1..200)) {
        let mut level = start;
        let mut path = vec![start];
        for &d in &increments {
            level += d;
            path.push(level);
        }
        let recovered = detrend(&path).unwrap();
        prop_assert_eq!(recovered.len(), increments.len());
        for (r, d) in recovered.iter().zip(&increments) {
            prop_assert!((r - d).abs() <= 1e-9, "{r} vs {d}");
        }
    }

    /// KL divergence between Gaussians is nonnegative and vanishes exactly
    /// at equal parameters.
    #[test]
    fn kl_divergence_is_nonnegative(m1 in -5.0..5.0f64, v1 in 0.1..10.0f64, m2 in -5.0..5.0f64, v2 in 0.1..10.0f64) {
        let p = gaussian(m1, v1);
        let q = gaussian(m2, v2);
        let kl = kl_analytic(&p, &q).unwrap();
        prop_assert!(kl >= 0.0, "KL = {kl}");
        if m1 == m2 && v1 == v2 {
            prop_assert_eq!(kl, 0.0);
        }
        prop_assert_eq!(kl_analytic(&p, &p).unwrap(), 0.0);
    }

    /// Each closed-form exponential-family inequality is sufficient for the
    /// divergence ordering, as long as the ordering is not balanced on a
    /// knife edge (where floating-point noise decides both sides).
    #[test]
    fn exp_family_shortcuts_imply_divergence_ordering(params in vec((-3.0..3.0f64, 0.2..8.0f64), 4)) {
        let family = GaussianNatural;
        let thetas: Vec<[f64; 2]> = params.iter().map(|&(m, v)| [m, v]).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let conditions = check_exp_family_conditions(
            &family, &thetas[0], &thetas[1], &thetas[2], &thetas[3], 1_000, &mut rng,
        ).unwrap();
        let models = QuadModels {
            f: gaussian(thetas[0][0], thetas[0][1]),
            f_n: gaussian(thetas[1][0], thetas[1][1]),
            g: gaussian(thetas[2][0], thetas[2][1]),
            g_n: gaussian(thetas[3][0], thetas[3][1]),
        };
        let rates = growth_rates(&models.f, &models.f_n, &models.g, &models.g_n).unwrap();
        let floor = rates.kl_g_f.min(rates.kl_gn_f).min(rates.kl_gn_fn);
        prop_assume!((rates.kl_g_fn - floor).abs() > 1e-9);
        if conditions.assumption2_implied {
            prop_assert!(rates.assumption2_holds, "shortcut held but ordering failed: {rates:?}");
        }
    }

    /// The default window is the smallest power of two covering 2b/I.
    #[test]
    fn window_rule_picks_minimal_covering_power_of_two(b in 0.1..50.0f64, rate in 0.05..10.0f64) {
        let m = choose_window(b, rate, None).unwrap();
        let target = 2.0 * b / rate;
        prop_assert!(m.is_power_of_two());
        prop_assert!(m as f64 >= target, "{m} < {target}");
        prop_assert!(m == 1 || ((m / 2) as f64) < target, "{m} is not minimal for {target}");
    }

    /// The stream's density switches regimes exactly at the change points.
    #[test]
    fn scenario_regimes_partition_time(
        models in quads(),
        nu_n in proptest::option::of(1u64..300),
        nu_c in proptest::option::of(1u64..300),
        t in 1u64..400,
    ) {
        let scenario = QuadScenario::new(models.clone(), nu_n, nu_c).unwrap();
        let before = |nu: Option<u64>| nu.map_or(true, |v| t < v);
        let expected = match (before(nu_c), before(nu_n)) {
            (true, true) => &models.f,
            (true, false) => &models.f_n,
            (false, true) => &models.g,
            (false, false) => &models.g_n,
        };
        prop_assert_eq!(scenario.distribution_at(t), expected);
    }
}
