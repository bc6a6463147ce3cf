use noncolliding_core::densities::{vandermonde, Configuration};
use noncolliding_core::kernels_det::{correlation_det, kernel_bm, DetKernelParams, InitialConfig, OuterMethod};
use noncolliding_core::kernels_pf::{correlation_pf, PfKernel, PfKernelParams};
use noncolliding_core::matrixcore::{determinant, pfaffian, pfaffian_naive, Matrix, SkewMatrix};
use noncolliding_core::mc_sim::{evolve_besq, path_rng, sample_initial, EnsembleKind, EnsembleSpec};
use noncolliding_core::specfun::{gamma_signed_log, gen_binom, hermite, laguerre, ln_factorial};
use noncolliding_core::SpaceTimePoint;
use proptest::prelude::*;

fn skew(order: usize, entries: &[f64]) -> SkewMatrix {
    SkewMatrix::from_upper(order, |i, j| entries[i * order + j]).unwrap()
}

fn skew_strategy() -> impl Strategy<Value = SkewMatrix> {
    (1usize..=6).prop_flat_map(|h| {
        let n = 2 * h;
        prop::collection::vec(-2.0f64..2.0, n * n).prop_map(move |v| skew(n, &v))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pf_squared_is_det(a in skew_strategy()) {
        let pf = pfaffian(&a);
        let det = determinant(a.as_matrix());
        prop_assume!(det.log_abs > -30.0);
        prop_assert!(((2.0 * pf.log_abs - det.log_abs).exp() - 1.0).abs() < 1e-9);
        let naive = pfaffian_naive(&a).unwrap();
        prop_assert!((pf.value() - naive).abs() <= 1e-10 * naive.abs().max(1e-300) + 1e-14);
    }

    #[test]
    fn pf_congruence(a in skew_strategy(), seed in 0u64..1000) {
        let n = a.order();
        let mut s = seed;
        let b = Matrix::from_fn(n, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        });
        let lhs = pfaffian(&a.congruence(&b).unwrap()).value();
        let rhs = determinant(&b).value() * pfaffian(&a).value();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1e-12));
    }

    #[test]
    fn gen_binom_matches_gamma(n in 0i64..25, alpha in -4.7f64..6.3) {
        prop_assume!((alpha - alpha.round()).abs() > 1e-3);
        // (n + alpha choose n) = prod_{i=1}^n (alpha + i) / i = Gamma(n + alpha + 1) / (n! Gamma(alpha + 1)).
        let direct: f64 = (1..=n).map(|i| (alpha + i as f64) / i as f64).product();
        prop_assert!((gen_binom(n, alpha) - direct).abs() <= 1e-11 * direct.abs().max(1e-300));
        let ratio = gamma_signed_log(n as f64 + alpha + 1.0).unwrap().log_abs - gamma_signed_log(alpha + 1.0).unwrap().log_abs - ln_factorial(n as usize);
        prop_assert!((gen_binom(n, alpha).abs().ln() - ratio).abs() < 1e-9);
    }

    #[test]
    fn hermite_matches_explicit_sum(n in 0usize..20, x in -3.0f64..3.0) {
        let mut sum = 0.0;
        for m in 0..=n / 2 {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * (2.0 * x).powi((n - 2 * m) as i32) * (ln_factorial(n) - ln_factorial(m) - ln_factorial(n - 2 * m)).exp();
        }
        let scale = (ln_factorial(n) + (n as f64) * (2.0 * x.abs() + 1.0).ln()).exp();
        prop_assert!((hermite(n, x) - sum).abs() <= 1e-12 * scale);
    }

    #[test]
    fn laguerre_matches_explicit_sum(n in 0usize..18, nu in -0.9f64..4.0, x in 0.0f64..8.0) {
        let mut sum = 0.0;
        let mut scale = 0.0;
        for i in 0..=n {
            let c = gen_binom((n - i) as i64, nu + i as f64) * x.powi(i as i32) / ln_factorial(i).exp();
            let term = if i % 2 == 0 { c } else { -c };
            sum += term;
            scale += term.abs();
        }
        prop_assert!((laguerre(n, nu, x).unwrap() - sum).abs() <= 1e-11 * scale.max(1.0));
    }

    #[test]
    fn pf_correlation_is_symmetric_and_nonnegative(x in -2.0f64..2.0, y in -2.0f64..2.0, s in 0.2f64..2.0, dt in 0.0f64..1.5) {
        let k = PfKernel::new(PfKernelParams::bm(2, 1.0).unwrap());
        let p = [SpaceTimePoint::new(s, x), SpaceTimePoint::new(s + dt, y)];
        let a = correlation_pf(&p, &k).unwrap();
        let b = correlation_pf(&[p[1], p[0]], &k).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-12));
        prop_assert!(a >= -1e-12);
    }

    #[test]
    fn det_kernel_methods_agree(a in -2.0f64..0.0, gap in 0.1f64..2.5, s in 0.2f64..2.0, t in 0.2f64..2.0, x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let xi = Configuration::new(vec![a, a + gap, a + gap]).unwrap();
        let q = kernel_bm(&xi, s, x, t, y, &DetKernelParams::default()).unwrap();
        let m = kernel_bm(&xi, s, x, t, y, &DetKernelParams { method: OuterMethod::Moments, ..Default::default() }).unwrap();
        prop_assert!((q - m).abs() < 1e-8 * (1.0 + m.abs()), "{} vs {}", q, m);
    }

    #[test]
    fn equal_time_det_correlation_is_nonnegative(a in -2.0f64..2.0, b in -2.0f64..2.0, t in 0.2f64..2.0, x in -3.0f64..3.0, y in -3.0f64..3.0) {
        prop_assume!((a - b).abs() > 1e-3);
        let init = InitialConfig::Atoms(Configuration::new(vec![a, b]).unwrap());
        let params = DetKernelParams { method: OuterMethod::Moments, ..Default::default() };
        let v = correlation_det(&init, &[SpaceTimePoint::new(t, x), SpaceTimePoint::new(t, y)], &params).unwrap().value();
        prop_assert!(v >= -1e-12);
    }

    #[test]
    fn ensemble_samples_are_strictly_ordered(seed in 0u64..10_000, n in 1usize..6, nu in 0u32..3) {
        for kind in [EnsembleKind::Goe, EnsembleKind::Gue, EnsembleKind::ChGoe(nu), EnsembleKind::ChGue(nu)] {
            let spec = EnsembleSpec::new(kind, n, 1.3).unwrap();
            let v = sample_initial(&spec, &mut path_rng(seed, 0)).unwrap();
            prop_assert_eq!(v.len(), n);
            prop_assert!(v.windows(2).all(|w| w[0] < w[1]));
            if matches!(kind, EnsembleKind::ChGoe(_) | EnsembleKind::ChGue(_)) {
                prop_assert!(v[0] >= 0.0);
            }
        }
    }

    #[test]
    fn laguerre_paths_stay_nonnegative(seed in 0u64..10_000) {
        let p = evolve_besq(1, &[0.3, 1.2], &[0.1, 0.5, 2.0], &mut path_rng(seed, 1)).unwrap();
        prop_assert!(p.configs.iter().flatten().all(|&x| x >= 0.0));
    }

    #[test]
    fn vandermonde_sign_under_swap(x in prop::collection::vec(-3.0f64..3.0, 2..6)) {
        let mut y = x.clone();
        y.swap(0, 1);
        prop_assert!((vandermonde(&x) + vandermonde(&y)).abs() <= 1e-12 * vandermonde(&x).abs().max(1.0));
    }
}
