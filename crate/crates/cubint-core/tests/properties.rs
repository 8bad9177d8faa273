//! Property tests for the expression kernel and the chart layer.

use cubint_core::charts::{self, ChartTag, Coeffs10};
use cubint_core::expr::{diff, normal_terms, parse_expr, poly_coeffs, poly_reconstruct, Binding, Expr};
use cubint_core::rat::{rat, rat_i, Rat};
use cubint_core::rng::SplitMix64;
use proptest::prelude::*;

/// Random expression over x1, x2 staying inside the polynomial-trig
/// fragment where exact evaluation is available.
fn arb_poly_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-6i64..=6).prop_map(Expr::num),
        ((-6i64..=6), (1i64..=4)).prop_map(|(n, d)| Expr::ratio(n, d)),
        Just(Expr::sym("x1")),
        Just(Expr::sym("x2")),
        Just(Expr::sym("a")),
    ];
    leaf.prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            proptest::collection::vec(inner.clone(), 2..4).prop_map(Expr::Sum),
            proptest::collection::vec(inner.clone(), 2..3).prop_map(Expr::Prod),
            (inner.clone(), 1i64..=3).prop_map(|(e, k)| e.pow_i(k)),
        ]
    })
}

/// Random expression that may also contain trig harmonics of x1.
fn arb_trig_expr() -> impl Strategy<Value = Expr> {
    (arb_poly_expr(), 1i64..=3, -4i64..=4, proptest::bool::ANY).prop_map(
        |(p, k, c, use_sin)| {
            let harm = (Expr::num(k) * Expr::sym("x1")).normalize();
            let t = if use_sin { harm.sin() } else { harm.cos() };
            (p + Expr::num(c) * t).normalize()
        },
    )
}

fn random_binding(rng: &mut SplitMix64) -> Binding {
    let mut b = Binding::new();
    b.set_exact("x1", rng.small_rat(8, 4));
    b.set_exact("x2", rng.small_rat(8, 4));
    b.set_exact("a", rng.small_rat(8, 4));
    b
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normalize_preserves_value(e in arb_poly_expr(), seed in 0u64..1u64 << 48) {
        let n = e.normalize();
        let mut rng = SplitMix64::new(seed);
        for _ in 0..100 {
            let b = random_binding(&mut rng);
            let v1 = e.eval_exact(&b).unwrap();
            let v2 = n.eval_exact(&b).unwrap();
            prop_assert_eq!(&v1, &v2);
        }
    }

    #[test]
    fn normalize_idempotent(e in arb_trig_expr()) {
        let n = e.normalize();
        prop_assert_eq!(n.normalize(), n);
    }

    #[test]
    fn diff_is_linear(f in arb_trig_expr(), g in arb_trig_expr(), c in -5i64..=5) {
        let combo = (f.clone() * Expr::num(c) + g.clone()).normalize();
        let lhs = diff(&combo, "x1", 1).unwrap();
        let rhs = (diff(&f, "x1", 1).unwrap() * Expr::num(c)
            + diff(&g, "x1", 1).unwrap())
        .normalize();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn diff_product_rule_symbolic(f in arb_poly_expr(), g in arb_poly_expr()) {
        let prod = (f.clone() * g.clone()).normalize();
        let lhs = diff(&prod, "x1", 1).unwrap();
        let rhs = (diff(&f, "x1", 1).unwrap() * g.clone()
            + f.clone() * diff(&g, "x1", 1).unwrap())
        .normalize();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn diff_matches_difference_quotient(e in arb_trig_expr(), seed in 0u64..1u64 << 48) {
        let d = diff(&e, "x1", 1).unwrap();
        let mut rng = SplitMix64::new(seed);
        for _ in 0..4 {
            let x = rng.f64_in(-1.5, 1.5);
            let y = rng.f64_in(-1.5, 1.5);
            let a = rng.f64_in(-1.0, 1.0);
            let at = |xv: f64| {
                let mut b = Binding::new();
                b.set_f64("x1", xv).set_f64("x2", y).set_f64("a", a);
                e.eval_f64(&b).unwrap()
            };
            let h = 1e-5;
            let fd = (at(x + h) - at(x - h)) / (2.0 * h);
            let mut b = Binding::new();
            b.set_f64("x1", x).set_f64("x2", y).set_f64("a", a);
            let sym = d.eval_f64(&b).unwrap();
            let scale = sym.abs().max(fd.abs()).max(1.0);
            prop_assert!((sym - fd).abs() / scale < 1e-6,
                "sym {} fd {} at x={}", sym, fd, x);
        }
    }

    #[test]
    fn poly_roundtrip(e in arb_poly_expr()) {
        let coeffs = poly_coeffs(&e, &["x1", "x2"]).unwrap();
        let back = poly_reconstruct(&coeffs, &["x1", "x2"]);
        prop_assert_eq!(back, e.normalize());
        for c in coeffs.values() {
            prop_assert!(!c.contains_symbol("x1") && !c.contains_symbol("x2"));
        }
    }

    #[test]
    fn printer_round_trips(e in arb_trig_expr()) {
        let n = e.normalize();
        let s = format!("{n}");
        let back = parse_expr(&s).unwrap();
        prop_assert_eq!(back, n, "printed `{}`", s);
    }
}

#[test]
fn divergence_chain_holds_for_100_random_vectors() {
    let mut rng = SplitMix64::new(0xD1CE);
    for trial in 0..100 {
        let a = Coeffs10(core::array::from_fn(|_| rng.small_rat(20, 7)));
        let f = charts::leading_terms(ChartTag::Cartesian, &a).f;
        for j in 0..5usize {
            let dx = if j < 4 {
                diff(&f[j], "x1", 1).unwrap()
            } else {
                Expr::zero()
            };
            let dy = if j >= 1 {
                diff(&f[j - 1], "x2", 1).unwrap()
            } else {
                Expr::zero()
            };
            assert!(
                (dx + dy).normalize().is_zero(),
                "trial {trial}, j = {}",
                j + 1
            );
        }
    }
}

#[test]
fn leading_terms_linear_in_coefficients() {
    // superposition: F(a + b) = F(a) + F(b) for every chart
    let mut rng = SplitMix64::new(0xAB);
    for chart in [
        ChartTag::Cartesian,
        ChartTag::Polar,
        ChartTag::Parabolic,
        ChartTag::Elliptic,
    ] {
        let a = Coeffs10(core::array::from_fn(|_| rng.small_rat(5, 3)));
        let b = Coeffs10(core::array::from_fn(|_| rng.small_rat(5, 3)));
        let sum = Coeffs10(core::array::from_fn(|i| &a.0[i] + &b.0[i]));
        let fa = charts::leading_terms(chart, &a).f;
        let fb = charts::leading_terms(chart, &b).f;
        let fs = charts::leading_terms(chart, &sum).f;
        for j in 0..4 {
            let combined = (fa[j].clone() + fb[j].clone()).normalize();
            assert_eq!(combined, fs[j], "{} F{}", chart.name(), j + 1);
        }
    }
}

#[test]
fn normal_terms_carry_sorted_unique_factors() {
    let e = parse_expr("3*x1^2*x2 - 2*x1*x2^2 + x1^2*x2").unwrap();
    let terms = normal_terms(&e);
    assert_eq!(terms.len(), 2);
    for (_, factors) in terms {
        for w in factors.windows(2) {
            assert!(w[0].0.cmp_expr(&w[1].0) == core::cmp::Ordering::Less);
        }
    }
}

#[test]
fn exact_eval_on_rational_circle() {
    // polar leading terms evaluate exactly on rational circle points
    let mut rng = SplitMix64::new(7);
    let a = Coeffs10(core::array::from_fn(|_| rng.small_rat(6, 3)));
    let lt = charts::leading_terms(ChartTag::Polar, &a);
    let t = rat(1, 2);
    let one = rat_i(1);
    let den = &one + &t * &t;
    let c: Rat = (&one - &t * &t) / den.clone();
    let s: Rat = rat_i(2) * &t / den;
    let mut b = Binding::new();
    b.set_exact("r", rat(3, 2));
    b.set_unit_circle("th", c, s);
    for f in &lt.f {
        f.eval_exact(&b).expect("exact value on the circle");
    }
}
