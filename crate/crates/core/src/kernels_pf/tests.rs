use super::*;
use crate::matrixcore::determinant;
use crate::quad::GaussLegendre;

fn pt(t: f64, x: f64) -> SpaceTimePoint {
    SpaceTimePoint::new(t, x)
}

#[test]
fn b_bm_examples() {
    let (x, s2) = (0.7, 1.3);
    assert!((b_bm(0, 0.0, x, s2).unwrap() - libm::exp(-x * x / (2.0 * s2))).abs() < 1e-15);
    assert_eq!(b_bm(1, 0.0, 0.0, s2).unwrap(), 0.0);
    // B_3 carries the H_1 correction: g^{3/2} e^{..} [H_3(z) - 4 s2/(s2+2s) H_1(z)].
    let (s, x) = (0.4, 0.9);
    let v = s2 + 2.0 * s;
    let z = x / libm::sqrt(v);
    let g: f64 = v / (4.0 * s2);
    let expect = g.powf(1.5) * libm::exp(-x * x / (2.0 * (s2 + s)))
        * (crate::specfun::hermite(3, z) - 4.0 * s2 / v * crate::specfun::hermite(1, z));
    assert!((b_bm(3, s, x, s2).unwrap() - expect).abs() < 1e-14);
}

#[test]
fn c_bm_odd_closed_form() {
    let (s, s2) = (0.5, 2.0);
    let r: f64 = s2 / (s2 + 2.0 * s);
    let v = c_bm(1, s, 0.0, s2, &Truncation::default()).unwrap();
    assert!((v + 2.0 * libm::sqrt(s2) * libm::sqrt(r)).abs() < 1e-14);
}

#[test]
fn c_bm_zero_matches_erf_closed_form() {
    // sum_l l!/(2l+1)! w^{2l+1} H_{2l+1}(z) = sqrt(pi/(1+w^2)) e^{z^2 w^2/(1+w^2)} erf(z w / sqrt(1+w^2))
    let s2 = 1.0;
    for &(s, x) in &[(0.25, 0.3), (1.0, -1.7), (4.0, 2.5)] {
        let v = s2 + 2.0 * s;
        let r = s2 / v;
        let z = x / libm::sqrt(v);
        let w2 = r;
        let w = libm::sqrt(w2);
        let closed = libm::sqrt(core::f64::consts::PI / (1.0 + w2)) * libm::exp(z * z * w2 / (1.0 + w2))
            * libm::erf(z * w / libm::sqrt(1.0 + w2));
        let e = x * x / (2.0 * (s2 + s)) - x * x / v;
        let expect = 2.0 * libm::sqrt(s2) * w * libm::exp(e) * closed;
        let got = c_bm(0, s, x, s2, &Truncation::default()).unwrap();
        assert!((got - expect).abs() < 1e-12 * expect.abs().max(1e-300), "{s} {x}: {got} vs {expect}");
    }
}

#[test]
fn c_bm_rejects_initial_time() {
    assert!(c_bm(0, 0.0, 0.3, 1.0, &Truncation::default()).is_err());
}

#[test]
fn block_antisymmetries() {
    let k = PfKernel::new(PfKernelParams::bm(4, 1.0).unwrap());
    let (p, q) = (pt(0.6, -0.4), pt(1.3, 0.8));
    let same = k.block(p, p).unwrap();
    assert_eq!(same.a11, 0.0);
    assert!(same.a22.abs() < 1e-14);
    assert!((same.a12 - same.a12t).abs() < 1e-15);
    let b1 = k.block(p, q).unwrap();
    let b2 = k.block(q, p).unwrap();
    assert!((b1.a11 + b2.a11).abs() < 1e-12);
    assert!((b1.a22 + b2.a22).abs() < 1e-12 * b1.a22.abs().max(1.0));
    assert_eq!(b1.a12, b2.a12t);
}

#[test]
fn rho_bm_integrates_to_n() {
    let gl = GaussLegendre::new(20);
    for &n in &[2usize, 4] {
        let k = PfKernel::new(PfKernelParams::bm(n, 1.0).unwrap());
        let t = 1.0;
        let w = 9.0 * libm::sqrt(1.0 + t);
        let total = gl.integrate_panels(-w, w, 24, |x| k.rho1(pt(t, x)).unwrap());
        assert!((total - n as f64).abs() < 1e-8, "N={n}: {total}");
    }
}

#[test]
fn rho_bm_single_time_oracle() {
    // E over the GOE(2) start of the one-point density (x1, x2 distinct):
    // rho^xi(t, x) = p(t,x|a)(b-x)/(b-a) + p(t,x|b)(x-a)/(b-a), weighted by mu^(1).
    let (t, x) = (0.5, 0.0);
    let gl = GaussLegendre::new(24);
    let mut oracle = 0.0;
    let lim = 9.0;
    for (a, wa) in gl.composite_points(-lim, lim, 12) {
        for (u, wu) in gl.composite_points(0.0, 2.0 * lim, 12) {
            let b = a + u;
            let mu = crate::densities::mu_beta(1.0, 1.0, &[a, b]).unwrap();
            let rho = p_bm_real(t, x, a) * (b - x) / (b - a) + p_bm_real(t, x, b) * (x - a) / (b - a);
            oracle += wa * wu * mu * rho;
        }
    }
    let k = PfKernel::new(PfKernelParams::bm(2, 1.0).unwrap());
    let v = k.rho1(pt(t, x)).unwrap();
    assert!((v - oracle).abs() < 1e-8, "{v} vs {oracle}");
}

#[test]
fn assembled_matrix_pf_squared_is_det() {
    let k = PfKernel::new(PfKernelParams::bm(4, 1.0).unwrap());
    let pts = [pt(0.5, -0.3), pt(0.9, 0.4), pt(1.6, 1.1)];
    let (m, _) = k.assemble(&pts).unwrap();
    let pf = pfaffian(&m);
    let det = determinant(m.as_matrix());
    assert!((2.0 * pf.log_abs - det.log_abs).abs() < 1e-8);
}

#[test]
fn point_permutation_leaves_correlation_unchanged() {
    let k = PfKernel::new(PfKernelParams::bm(2, 1.0).unwrap());
    let a = [pt(0.5, -0.3), pt(1.2, 0.6)];
    let b = [a[1], a[0]];
    let va = correlation_pf(&a, &k).unwrap();
    let vb = correlation_pf(&b, &k).unwrap();
    assert!((va - vb).abs() < 1e-13 * va.abs(), "{va} vs {vb}");
    assert!(va > 0.0);
}

#[test]
fn one_point_pfaffian_is_rho() {
    let k = PfKernel::new(PfKernelParams::bm(2, 1.0).unwrap());
    let p = pt(0.7, 0.2);
    assert!((correlation_pf(&[p], &k).unwrap() - k.rho1(p).unwrap()).abs() < 1e-15);
}

#[test]
fn far_tail_point_is_negligible() {
    let k = PfKernel::new(PfKernelParams::bm(2, 1.0).unwrap());
    let t = 1.0;
    let x = 8.5 * libm::sqrt(1.0 + t);
    assert!(correlation_pf(&[pt(t, x)], &k).unwrap() < 1e-10);
}

#[test]
fn a12_continuous_from_below_in_time() {
    let k = PfKernel::new(PfKernelParams::bm(2, 1.0).unwrap());
    let (t, x, y) = (1.0, -0.2, 0.9);
    let at = k.block(pt(t, x), pt(t, y)).unwrap().a12;
    let mut prev = f64::INFINITY;
    for &d in &[1e-2, 1e-3, 1e-4] {
        let err = (k.block(pt(t - d, x), pt(t, y)).unwrap().a12 - at).abs();
        assert!(err < prev && err < 5.0 * d, "delta {d}: {err}");
        prev = err;
    }
}

#[test]
fn odd_n_rejected() {
    assert!(PfKernelParams::bm(3, 1.0).is_err());
    assert!(PfKernelParams::bm(2, 0.0).is_err());
}

#[test]
fn besq_b_zero_closed_form() {
    let p = BesqParams::new(1.5, 0.5).unwrap();
    let (nu, kappa) = (p.nu(), p.kappa());
    let (x, s2) = (0.8, 1.4);
    let expect = libm::exp(-x / (2.0 * s2)) * libm::pow(x, nu - kappa / 2.0)
        / (libm::pow(2.0, nu + 1.0) * libm::tgamma(nu + 1.0) * libm::pow(s2, kappa + 1.0) * libm::pow(s2, nu - kappa));
    assert!((b_besq(0, 0.0, x, s2, &p).unwrap() - expect).abs() < 1e-14 * expect);
}

#[test]
fn besq_b_at_origin() {
    let p = BesqParams::new(1.0, 0.0).unwrap();
    assert!(b_besq(0, 0.3, 0.0, 1.0, &p).unwrap() > 0.0);
    let q = BesqParams::new(1.0, 0.5).unwrap();
    assert_eq!(b_besq(0, 0.3, 0.0, 1.0, &q).unwrap(), 0.0);
}

#[test]
fn besq_c_terms_decay_geometrically() {
    // Terms of the C_1 series behave like r^j with r = sigma^2/(sigma^2+2s); at s = sigma^2, r = 1/3.
    let p = BesqParams::new(0.5, 0.5).unwrap();
    let (s, s2, x) = (1.0, 1.0, 1.2);
    let tables = CoeffTables::new(&p, 2, 120);
    let r = s2 / (s2 + 2.0 * s);
    let z = x / (s2 + 2.0 * s);
    let lag = crate::specfun::laguerre_log_seq(120, p.nu(), z).unwrap();
    let term = |j: usize| {
        let jf = j as f64;
        tables.gb[j] * libm::exp(libm::lgamma(jf + 1.0) - libm::lgamma(jf + 1.0 + p.nu()) + lag[j].log_abs) * libm::pow(r, jf)
    };
    let rate = libm::pow((term(80) / term(60)).abs(), 1.0 / 20.0);
    assert!(rate > r / 2.0 && rate < 2.0 * r, "rate {rate}");
}

#[test]
fn besq_rho_integrates_to_n() {
    let gl = GaussLegendre::new(20);
    for &(nu, a) in &[(1.0, 0.0), (0.5, 0.5)] {
        let params = PfKernelParams::besq(2, 1.0, BesqParams::new(nu, a).unwrap()).unwrap();
        let k = PfKernel::new(params);
        let t = 1.0;
        // x = u^2 removes the x^a endpoint behaviour.
        let total = gl.integrate_panels(0.0, 12.0, 60, |u| 2.0 * u * k.rho1(pt(t, u * u)).unwrap());
        assert!((total - 2.0).abs() < 1e-7, "({nu},{a}): {total}");
    }
}

#[test]
fn besq_same_point_block_is_degenerate() {
    let params = PfKernelParams::besq(2, 1.0, BesqParams::new(1.0, 0.0).unwrap()).unwrap();
    let b = a_besq(0.5, 1.3, 0.5, 1.3, &params).unwrap();
    assert_eq!(b.a11, 0.0);
    assert!(b.a22.abs() < 1e-14);
    assert!(a_besq(0.5, 0.0, 0.5, 1.0, &params).is_err());
}
