use super::*;
use crate::charts::{leading_terms, ChartTag, Coeffs10, A003, A030, A102, A120, A300};
use crate::expr::{parse_expr, Binding};
use crate::rat::rat_i;
use crate::rng::SplitMix64;

fn p(s: &str) -> Expr {
    parse_expr(s).expect(s)
}

fn oscillator_candidate() -> (Expr, Coeffs10, Expr, Expr) {
    let v = p("1/2*x1^2 + 1/2*x2^2");
    let a = Coeffs10::from_named(&[("A120", rat(1, 2)), ("A102", rat(1, 2))]).unwrap();
    let g1 = p("-1/2*(x1^2*x2 + x2^3)");
    let g2 = p("1/2*(x1*x2^2 + x1^3)");
    (v, a, g1, g2)
}

#[test]
fn g_residuals_zero_potential() {
    let a = Coeffs10::unit(A300);
    let r = g_residuals(&Expr::zero(), &a, &Expr::zero(), &Expr::zero()).unwrap();
    assert!(r.iter().all(|e| e.is_zero()));
}

#[test]
fn g_residuals_oscillator() {
    let (v, a, g1, g2) = oscillator_candidate();
    let r = g_residuals(&v, &a, &g1, &g2).unwrap();
    assert!(r.iter().all(|e| e.is_zero()), "residuals: {r:?}");
}

#[test]
fn g_residuals_missing_gauge_fields() {
    let (v, a, _, _) = oscillator_candidate();
    let r = g_residuals(&v, &a, &Expr::zero(), &Expr::zero()).unwrap();
    assert_eq!(r[0], p("x1*x2"));
}

#[test]
fn g_residuals_rejects_momentum_dependence() {
    let (v, a, _, _) = oscillator_candidate();
    assert!(matches!(
        g_residuals(&v, &a, &p("p1*x1"), &Expr::zero()),
        Err(DetError::MomentumDependence(_))
    ));
}

#[test]
fn zeroth_residual_oscillator() {
    let (v, a, g1, g2) = oscillator_candidate();
    let r0 = zeroth_residual(&v, &a, &g1, &g2, &rat_i(0)).unwrap();
    assert!(r0.is_zero(), "classical: {r0}");
    // quadratic potential: quantum corrections vanish for this candidate
    let r1 = zeroth_residual(&v, &a, &g1, &g2, &rat_i(1)).unwrap();
    assert!(r1.is_zero(), "quantum: {r1}");
}

#[test]
fn zeroth_residual_zero_potential() {
    let a = Coeffs10::unit(A030);
    let r = zeroth_residual(&Expr::zero(), &a, &Expr::num(3), &Expr::num(-2), &rat_i(1))
        .unwrap();
    assert!(r.is_zero());
}

#[test]
fn zeroth_residual_case1_reduces_to_one_variable() {
    // A030 only, V = V1(x1): residual = g1 V1' - hbar^2/4 V1'''
    let a = Coeffs10::unit(A030);
    let v1 = p("x1^4");
    let g1 = p("3*x1^4"); // 3 V1 + const gauge
    let r = zeroth_residual(&v1, &a, &g1, &Expr::zero(), &rat_i(1)).unwrap();
    // g1 V1' - 1/4 V1''' = 12 x1^7 - 6 x1
    assert_eq!(r, p("12*x1^7 - 6*x1"));
    assert!(!r.contains_symbol("x2"));
}

#[test]
fn linear_compat_separable_a030() {
    let a = Coeffs10::unit(A030);
    let v = p("x1^5 + x2^3");
    assert!(linear_compat(&v, &a).unwrap().is_zero());
}

#[test]
fn linear_compat_a300_linear_potential() {
    let a = Coeffs10::unit(A300);
    let lc = linear_compat(&p("x1"), &a).unwrap();
    assert_eq!(lc, p("36*x2"));
}

#[test]
fn linear_compat_zero() {
    let a = Coeffs10::unit(A300);
    assert!(linear_compat(&Expr::zero(), &a).unwrap().is_zero());
}

#[test]
fn chart_compat_polar_d0_identically_zero() {
    let a = Coeffs10::unit(A300);
    let r = chart_compat(ChartTag::Polar, &a, &p("r^2 + 1/2*r"), &p("cos(2*th)"))
        .unwrap();
    assert!(r.is_zero(), "got {r}");
}

#[test]
fn chart_compat_cartesian_a102() {
    let a = Coeffs10::unit(A102);
    let r = chart_compat(ChartTag::Cartesian, &a, &p("x1^4"), &Expr::zero()).unwrap();
    // F3 = -x2, F2 = 0: residual = x2 * V1''' = 24 x1 x2
    assert_eq!(r, p("24*x1*x2"));
}

#[test]
fn chart_compat_zero_potential() {
    for chart in [
        ChartTag::Cartesian,
        ChartTag::Polar,
        ChartTag::Parabolic,
        ChartTag::Elliptic,
    ] {
        let a = Coeffs10::unit(A300);
        let r = chart_compat(chart, &a, &Expr::zero(), &Expr::zero()).unwrap();
        assert!(r.is_zero(), "{}", chart.name());
    }
}

#[test]
fn cartesian_chart_compat_matches_linear_compat_symbolically() {
    let mut rng = SplitMix64::new(23);
    for _ in 0..6 {
        let a = Coeffs10(core::array::from_fn(|_| rng.small_rat(5, 2)));
        let (v1, v2) = consistency::random_potential_pair(ChartTag::Cartesian, &mut rng, 4);
        let cc = chart_compat(ChartTag::Cartesian, &a, &v1, &v2).unwrap();
        let v = (v1 + v2).normalize();
        let lc = linear_compat(&v, &a).unwrap();
        assert_eq!(cc, lc);
    }
}

#[test]
fn linear_compat_matches_fd_elimination() {
    // independent oracle: the compatibility combination
    // d1 d2 (rhs of the mixed equation) - d2^2 (rhs1) - d1^2 (rhs3)
    // evaluated by central finite differences of the right-hand fields.
    let mut rng = SplitMix64::new(77);
    for _ in 0..4 {
        let a = Coeffs10(core::array::from_fn(|_| rng.small_rat(4, 2)));
        let (v1e, v2e) = consistency::random_potential_pair(ChartTag::Cartesian, &mut rng, 3);
        let v = (v1e + v2e).normalize();
        let f = leading_terms(ChartTag::Cartesian, &a).f;
        let vx = crate::expr::diff(&v, "x1", 1).unwrap();
        let vy = crate::expr::diff(&v, "x2", 1).unwrap();
        let r1 = (Expr::num(3) * f[0].clone() * vx.clone() + f[1].clone() * vy.clone())
            .normalize();
        let r2 = (Expr::num(2) * (f[1].clone() * vx.clone() + f[2].clone() * vy.clone()))
            .normalize();
        let r3 = (f[2].clone() * vx + Expr::num(3) * f[3].clone() * vy).normalize();
        let lc = linear_compat(&v, &a).unwrap();
        let at = |e: &Expr, x: f64, y: f64| {
            let mut b = Binding::new();
            b.set_f64("x1", x).set_f64("x2", y);
            e.eval_f64(&b).unwrap()
        };
        for _ in 0..4 {
            let x = rng.f64_in(-1.5, 1.5);
            let y = rng.f64_in(-1.5, 1.5);
            let h = 1e-4;
            let d12r2 = (at(&r2, x + h, y + h) - at(&r2, x + h, y - h)
                - at(&r2, x - h, y + h)
                + at(&r2, x - h, y - h))
                / (4.0 * h * h);
            let d22r1 =
                (at(&r1, x, y + h) - 2.0 * at(&r1, x, y) + at(&r1, x, y - h)) / (h * h);
            let d11r3 =
                (at(&r3, x + h, y) - 2.0 * at(&r3, x, y) + at(&r3, x - h, y)) / (h * h);
            let oracle = d12r2 - d22r1 - d11r3;
            let direct = at(&lc, x, y);
            let scale = direct.abs().max(oracle.abs()).max(1.0);
            assert!(
                (direct - oracle).abs() / scale < 1e-6,
                "{direct} vs {oracle} at ({x},{y})"
            );
        }
    }
}

#[test]
fn reduce_cartesian_a102_gives_third_derivative_only() {
    let a = Coeffs10::unit(A102);
    let spec = reduce_to_ode(ChartTag::Cartesian, &a, Target::Component1, rat_i(1)).unwrap();
    assert!(!spec.degenerate);
    assert_eq!(spec.coeffs[0], Expr::one());
    assert!(spec.coeffs[1].is_zero() && spec.coeffs[2].is_zero() && spec.coeffs[3].is_zero());
    assert!(spec.inhomogeneity.is_empty());
}

#[test]
fn reduce_cartesian_generic_leading_coefficient_quadratic() {
    let mut rng = SplitMix64::new(5);
    let a = Coeffs10(core::array::from_fn(|_| rng.small_rat(5, 1)));
    let spec = reduce_to_ode(ChartTag::Cartesian, &a, Target::Component1, rat_i(2)).unwrap();
    let coeffs = crate::expr::poly_coeffs(&spec.coeffs[0], &["x1"]).unwrap();
    let max_deg = coeffs.keys().map(|k| k[0]).max().unwrap_or(0);
    assert_eq!(max_deg, 2, "leading coefficient should be quadratic in x1");
}

#[test]
fn reduce_case2_solution_space() {
    let a = Coeffs10::unit(A120);
    let spec = reduce_to_ode(ChartTag::Cartesian, &a, Target::Component2, rat_i(1)).unwrap();
    assert!(!spec.degenerate);
    assert_eq!(spec.coeffs[0], p("-1"));
    assert!(spec.coeffs[1].is_zero() && spec.coeffs[2].is_zero() && spec.coeffs[3].is_zero());
    // a y^2 + a' y solves it; chart_compat vanishes identically for it
    let r = chart_compat(
        ChartTag::Cartesian,
        &a,
        &Expr::zero(),
        &p("a*x2^2 + aprime*x2"),
    )
    .unwrap();
    assert!(r.is_zero());
}

#[test]
fn reduce_degenerate_case1() {
    let mut a = Coeffs10::unit(A030);
    a.0[A003] = rat_i(2);
    let spec = reduce_to_ode(ChartTag::Cartesian, &a, Target::Component1, rat_i(1)).unwrap();
    assert!(spec.degenerate);
}

#[test]
fn reduce_rejects_singular_point() {
    let a = Coeffs10::unit(A300);
    assert!(matches!(
        reduce_to_ode(ChartTag::Polar, &a, Target::Component2, rat_i(0)),
        Err(DetError::SingularPoint(_))
    ));
}

#[test]
fn reduce_is_linear_in_target() {
    let a = Coeffs10::unit(A102);
    let spec = reduce_to_ode(ChartTag::Cartesian, &a, Target::Component1, rat_i(1)).unwrap();
    let v = p("x1^5 + 2*x1^3");
    let double = (Expr::num(2) * v.clone()).normalize();
    let lhs = spec.apply_homogeneous(&double).unwrap();
    let rhs = (Expr::num(2) * spec.apply_homogeneous(&v).unwrap()).normalize();
    assert_eq!(lhs, rhs);
}

#[test]
fn kernel_cartesian_case1() {
    let rep = vanishing_kernel(ChartTag::Cartesian, &[1, 2]);
    assert_eq!(rep.dimension, 2);
    assert!(rep.methods_agree);
    assert!(rep.basis.contains(&Coeffs10::unit(A030)));
    assert!(rep.basis.contains(&Coeffs10::unit(A003)));
    assert!(kernel::kernel_annihilates(&rep));
}

#[test]
fn kernel_polar_case1() {
    let rep = vanishing_kernel(ChartTag::Polar, &[0, 2]);
    assert_eq!(rep.dimension, 2);
    assert!(rep.methods_agree);
    assert!(kernel::kernel_annihilates(&rep));
    // basis maps to pure D0 and pure B0 directions
    let mut seen_d0 = false;
    let mut seen_b0 = false;
    for v in &rep.basis {
        let pc = crate::charts::cartesian_to_polar_coeffs(v);
        let zeros = [&pc.a1, &pc.a2, &pc.a3, &pc.a4, &pc.b1, &pc.b2, &pc.c1, &pc.c2];
        assert!(zeros.iter().all(|z| z.is_zero()));
        if !pc.d0.is_zero() && pc.b0.is_zero() {
            seen_d0 = true;
        }
        if !pc.b0.is_zero() && pc.d0.is_zero() {
            seen_b0 = true;
        }
    }
    assert!(seen_d0 && seen_b0);
}

#[test]
fn kernel_parabolic_empty() {
    for sel in [&[1][..], &[2][..]] {
        let rep = vanishing_kernel(ChartTag::Parabolic, sel);
        assert_eq!(rep.dimension, 0, "selected {sel:?}");
        assert_eq!(rep.sampled_dimension, 0);
        assert!(rep.methods_agree);
    }
}

#[test]
fn kernel_elliptic_empty() {
    for sel in [&[1][..], &[2][..]] {
        let rep = vanishing_kernel(ChartTag::Elliptic, sel);
        assert_eq!(rep.dimension, 0, "selected {sel:?}");
        assert_eq!(rep.sampled_dimension, 0);
        assert!(rep.methods_agree);
    }
}

#[test]
fn compat_consistency_cartesian_multiplier_one() {
    let mut rng = SplitMix64::new(9);
    let a = Coeffs10(core::array::from_fn(|_| rng.small_rat(4, 2)));
    let pts: Vec<[f64; 2]> = (0..5)
        .map(|_| consistency::random_regular_point(ChartTag::Cartesian, &mut rng))
        .collect();
    let rep = compat_consistency(ChartTag::Cartesian, &a, &pts, 6, 123).unwrap();
    assert!(rep.max_residual < 1e-9, "residual {}", rep.max_residual);
    for pt in &rep.points {
        if let Some(c) = pt.multiplier {
            assert!((c - 1.0).abs() < 1e-9, "multiplier {c}");
        }
    }
}

#[test]
fn compat_consistency_zero_coefficients_degenerate() {
    let mut rng = SplitMix64::new(2);
    let pts: Vec<[f64; 2]> = (0..3)
        .map(|_| consistency::random_regular_point(ChartTag::Polar, &mut rng))
        .collect();
    let rep = compat_consistency(ChartTag::Polar, &Coeffs10::zero(), &pts, 4, 7).unwrap();
    assert_eq!(rep.degenerate_points, pts.len());
}
