use noncolliding_core::densities::{c_shrink, f_det, h_plus, joint_density_bm, p_bm_real, vandermonde, Configuration};
use noncolliding_core::kernels_det::{check_shift_identity, correlation_det, kernel_bm_delta0, DetKernelParams, InitialConfig, OuterMethod};
use noncolliding_core::kernels_pf::coeff_b;
use noncolliding_core::mc_sim::{evolve_bm, path_rng, sample_initial, EnsembleKind, EnsembleSpec, Histogram1, Window};
use noncolliding_core::quad::GaussLegendre;
use noncolliding_core::specfun::gen_binom;
use noncolliding_core::SpaceTimePoint;

fn pt(t: f64, x: f64) -> SpaceTimePoint {
    SpaceTimePoint::new(t, x)
}

fn moments() -> DetKernelParams {
    DetKernelParams { method: OuterMethod::Moments, ..Default::default() }
}

#[test]
fn binomial_boundary_cases() {
    assert_eq!(gen_binom(0, -0.3), 1.0);
    assert_eq!(gen_binom(-2, 1.7), 0.0);
}

#[test]
fn odd_index_above_range_gives_one() {
    assert_eq!(coeff_b(3, 1, 1.0, 0.5), 1.0);
}

#[test]
fn dilatation_time_reverses_order() {
    let s2 = 1.3;
    for (s, t) in [(0.1, 0.4), (0.5, 2.0), (1.0, 7.0)] {
        assert!(s2 * c_shrink(s2, s).unwrap() > s2 * c_shrink(s2, t).unwrap());
    }
}

#[test]
fn harmonic_transform_for_distinct_start() {
    let xi = Configuration::new(vec![-0.4, 0.3, 1.2]).unwrap();
    let y = [-1.0, 0.2, 0.9];
    let t = 0.7;
    let expect = f_det(t, &y, xi.points()).unwrap().value() / vandermonde(xi.points());
    let got = h_plus(t, &y, &xi).unwrap().value();
    assert!((got - expect).abs() < 1e-12 * expect.abs());
}

#[test]
fn equal_time_det_matches_joint_density() {
    let xi = Configuration::new(vec![-0.7, 0.9]).unwrap();
    let init = InitialConfig::Atoms(xi.clone());
    let params = DetKernelParams::default();
    for &(t, x, y) in &[(0.5, -0.6, 0.4), (1.2, -1.5, 1.1), (2.0, 0.1, 0.3)] {
        let det = correlation_det(&init, &[pt(t, x), pt(t, y)], &params).unwrap().value();
        let joint = joint_density_bm(&xi, &[t], &[vec![x, y]]).unwrap().value();
        assert!((det - joint).abs() < 1e-5 * joint.max(1e-3), "{det} vs {joint}");
    }
}

#[test]
fn delta0_one_point_integrates_to_n() {
    let gl = GaussLegendre::new(20);
    let params = DetKernelParams::default();
    let t = 0.8;
    let total = gl.integrate_panels(-8.0, 8.0, 12, |x| kernel_bm_delta0(2, t, x, t, x, &params).unwrap());
    assert!((total - 2.0).abs() < 1e-5, "{total}");
}

#[test]
fn two_point_function_integrates_to_pairs() {
    let gl = GaussLegendre::new(20);
    for init in [InitialConfig::Atoms(Configuration::new(vec![-1.0, 1.0]).unwrap()), InitialConfig::Delta0(2)] {
        let t = 1.0;
        let nodes = gl.composite_points(-8.0, 8.0, 10);
        let mut total = 0.0;
        for &(x, wx) in &nodes {
            for &(y, wy) in &nodes {
                total += wx * wy * correlation_det(&init, &[pt(t, x), pt(t, y)], &moments()).unwrap().value();
            }
        }
        assert!((total - 2.0).abs() < 1e-4, "{init:?}: {total}");
    }
}

#[test]
fn delta0_two_point_nonnegative() {
    let params = DetKernelParams::default();
    let mut rng = path_rng(42, 0);
    use rand::Rng;
    for _ in 0..100 {
        let t: f64 = rng.random_range(0.2..3.0);
        let x: f64 = rng.random_range(-3.0..3.0);
        let y: f64 = rng.random_range(-3.0..3.0);
        let v = correlation_det(&InitialConfig::Delta0(2), &[pt(t, x), pt(t, y)], &params).unwrap().value();
        assert!(v >= -1e-12, "{t} {x} {y}: {v}");
    }
}

#[test]
fn single_particle_shift_is_gaussian_convolution() {
    let s2 = 0.7;
    let (t, x) = (0.9, 0.4);
    let r = check_shift_identity(1, s2, &[pt(t, x)], 20_000, 5, &DetKernelParams::default()).unwrap();
    assert!((r.shifted - p_bm_real(t + s2, x, 0.0)).abs() < 1e-10);
    assert!(r.pass, "{r:?}");
}

#[test]
fn single_bm_from_goe_histogram() {
    let (s2, t) = (1.0, 0.5);
    let spec = EnsembleSpec::new(EnsembleKind::Goe, 1, s2).unwrap();
    let mut h = Histogram1::new(Window::bm_default(s2, t, 30).unwrap());
    for i in 0..20_000 {
        let mut rng = path_rng(77, i);
        let init = sample_initial(&spec, &mut rng).unwrap();
        h.add_sample(&evolve_bm(&init, &[t], &mut rng).unwrap().configs[0]);
    }
    let a = h.compare(3.0, |x| p_bm_real(s2 + t, x, 0.0));
    assert!(a.fraction() >= 0.95, "{a:?}");
    assert!((h.total() - 1.0).abs() < 1e-3);
}
