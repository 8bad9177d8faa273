use super::*;
use crate::rat::rat_i;

/// Taylor coefficients of the first Painlevé equation w'' = 6w^2 + z by
/// direct series recursion; independent of the integrator.
fn p1_taylor(w0: f64, dw0: f64, order: usize) -> Vec<f64> {
    let mut a = alloc::vec![0.0f64; order + 1];
    a[0] = w0;
    a[1] = dw0;
    for n in 0..order.saturating_sub(1) {
        let mut conv = 0.0;
        for i in 0..=n {
            conv += a[i] * a[n - i];
        }
        let mut rhs = 6.0 * conv;
        if n == 1 {
            rhs += 1.0;
        }
        a[n + 2] = rhs / ((n + 2) as f64 * (n + 1) as f64);
    }
    a
}

fn taylor_eval(a: &[f64], z: f64) -> f64 {
    let mut acc = 0.0;
    for &c in a.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

#[test]
fn p2_zero_solution_is_exact() {
    let spec = PainleveSpec {
        kind: PainleveKind::Second,
        alpha: 0.0,
        beta: 0.0,
        z0: 0.0,
        w0: 0.0,
        dw0: 0.0,
        z_min: -3.0,
        z_max: 3.0,
        tolerance: 1e-10,
        samples: 101,
    };
    let sol = integrate_painleve(&spec).unwrap();
    assert!(!sol.truncated);
    for i in 0..sol.len() {
        assert_eq!(sol.w[i], 0.0, "w at z={}", sol.zs[i]);
        assert_eq!(sol.dw[i], 0.0);
    }
}

#[test]
fn p1_matches_taylor_oracle() {
    let spec = PainleveSpec {
        kind: PainleveKind::First,
        alpha: 0.0,
        beta: 0.0,
        z0: 0.0,
        w0: 0.0,
        dw0: 0.0,
        z_min: -0.1,
        z_max: 0.1,
        tolerance: 1e-12,
        samples: 81,
    };
    let sol = integrate_painleve(&spec).unwrap();
    let a = p1_taylor(0.0, 0.0, 14);
    // sanity of the oracle itself: a3 = 1/6, a8 = 1/336
    assert!((a[3] - 1.0 / 6.0).abs() < 1e-15);
    assert!((a[8] - 1.0 / 336.0).abs() < 1e-15);
    for i in 0..sol.len() {
        let want = taylor_eval(&a[..9], sol.zs[i]);
        let got = sol.w[i];
        let rel = (got - want).abs() / want.abs().max(1.0);
        assert!(rel < 1e-8, "z={} got {got} want {want}", sol.zs[i]);
    }
}

#[test]
fn p1_finite_difference_residual() {
    let spec = PainleveSpec {
        kind: PainleveKind::First,
        alpha: 0.0,
        beta: 0.0,
        z0: 0.0,
        w0: 0.0,
        dw0: 0.0,
        z_min: -0.1,
        z_max: 0.1,
        tolerance: 1e-10,
        samples: 201,
    };
    let sol = integrate_painleve(&spec).unwrap();
    let h = sol.zs[1] - sol.zs[0];
    let mut worst = 0.0f64;
    for i in 1..sol.len() - 1 {
        let d2 = (sol.w[i + 1] - 2.0 * sol.w[i] + sol.w[i - 1]) / (h * h);
        let rhs = 6.0 * sol.w[i] * sol.w[i] + sol.zs[i];
        worst = worst.max((d2 - rhs).abs());
    }
    assert!(worst < 1e-6, "max FD residual {worst}");
}

#[test]
fn p1_pole_detection() {
    // blow-up solutions hit a movable pole at finite z
    let spec = PainleveSpec {
        kind: PainleveKind::First,
        alpha: 0.0,
        beta: 0.0,
        z0: 0.0,
        w0: 2.0,
        dw0: 5.0,
        z_min: 0.0,
        z_max: 50.0,
        tolerance: 1e-10,
        samples: 201,
    };
    let sol = integrate_painleve(&spec).unwrap();
    assert!(sol.truncated, "expected a pole before z = 50");
    assert!(sol.pole_flag.iter().any(|&f| f));
}

#[test]
fn p4_guard_band() {
    let spec = PainleveSpec {
        kind: PainleveKind::Fourth,
        alpha: 0.5,
        beta: -0.25,
        z0: 0.0,
        w0: 0.0,
        dw0: 1.0,
        z_min: 0.0,
        z_max: 1.0,
        tolerance: 1e-10,
        samples: 11,
    };
    assert!(matches!(
        integrate_painleve(&spec),
        Err(SpecFunError::BadSpec(_))
    ));
}

#[test]
fn p4_regular_run() {
    let spec = PainleveSpec {
        kind: PainleveKind::Fourth,
        alpha: 1.0,
        beta: -0.5,
        z0: 0.0,
        w0: 1.0,
        dw0: 0.0,
        z_min: 0.0,
        z_max: 0.4,
        tolerance: 1e-10,
        samples: 101,
    };
    let sol = integrate_painleve(&spec).unwrap();
    // residual against the defining equation on interior nodes
    let h = sol.zs[1] - sol.zs[0];
    let mut worst = 0.0f64;
    for i in 1..sol.len() - 1 {
        if sol.pole_flag[i] {
            continue;
        }
        let (w, dw, z) = (sol.w[i], sol.dw[i], sol.zs[i]);
        let d2 = (sol.w[i + 1] - 2.0 * w + sol.w[i - 1]) / (h * h);
        let rhs = dw * dw / (2.0 * w)
            + 1.5 * w * w * w
            + 4.0 * z * w * w
            + 2.0 * (z * z - 1.0) * w
            - 0.5 / w;
        worst = worst.max((d2 - rhs).abs());
    }
    assert!(worst < 1e-4, "P4 FD residual {worst}");
}

#[test]
fn weierstrass_first_integral_drift() {
    let spec = WeierstrassSpec {
        g2: 1.0,
        g3: 2.0,
        z0: 0.0,
        p0: 1.0,
        dp0: 1.0,
        z_min: -0.5,
        z_max: 0.5,
        tolerance: 1e-12,
        samples: 101,
    };
    let out = weierstrass_p(&spec).unwrap();
    assert!(!out.solution.truncated);
    assert!(out.max_drift < 1e-10, "drift {}", out.max_drift);
}

#[test]
fn weierstrass_rejects_inconsistent_data() {
    let spec = WeierstrassSpec {
        g2: 1.0,
        g3: 2.0,
        z0: 0.0,
        p0: 1.0,
        dp0: 1.5,
        z_min: 0.0,
        z_max: 1.0,
        tolerance: 1e-12,
        samples: 11,
    };
    assert!(matches!(
        weierstrass_p(&spec),
        Err(SpecFunError::InconsistentInitialData(_))
    ));
}

#[test]
fn weierstrass_degenerate_closed_form() {
    // g2 = g3 = 0 with p(0) = 1, p'(0) = -2: p(z) = 1/(z+1)^2
    let spec = WeierstrassSpec {
        g2: 0.0,
        g3: 0.0,
        z0: 0.0,
        p0: 1.0,
        dp0: -2.0,
        z_min: 0.0,
        z_max: 2.0,
        tolerance: 1e-12,
        samples: 101,
    };
    let out = weierstrass_p(&spec).unwrap();
    for i in 0..out.solution.len() {
        let z = out.solution.zs[i];
        let want = 1.0 / ((z + 1.0) * (z + 1.0));
        let got = out.solution.w[i];
        assert!(
            (got - want).abs() / want.abs() < 1e-8,
            "z={z}: {got} vs {want}"
        );
    }
}

#[test]
fn weierstrass_equianharmonic_fd_residual() {
    // g2 = 0: p'' = 6 p^2; consistent data p0=1, dp0 with dp0^2 = 4 - g3
    let spec = WeierstrassSpec {
        g2: 0.0,
        g3: 3.0,
        z0: 0.0,
        p0: 1.0,
        dp0: 1.0,
        z_min: -0.25,
        z_max: 0.25,
        tolerance: 1e-12,
        samples: 201,
    };
    let out = weierstrass_p(&spec).unwrap();
    let sol = &out.solution;
    let h = sol.zs[1] - sol.zs[0];
    let mut worst = 0.0f64;
    // fourth-order five-point second difference
    for i in 2..sol.len() - 2 {
        let d2 = (-sol.w[i + 2] + 16.0 * sol.w[i + 1] - 30.0 * sol.w[i]
            + 16.0 * sol.w[i - 1]
            - sol.w[i - 2])
            / (12.0 * h * h);
        worst = worst.max((d2 - 6.0 * sol.w[i] * sol.w[i]).abs());
    }
    assert!(worst < 1e-6, "FD residual {worst}");
}

#[test]
fn tolerance_scaling_reduces_drift() {
    let drift_at = |tol: f64| {
        let spec = WeierstrassSpec {
            g2: 1.0,
            g3: 2.0,
            z0: 0.0,
            p0: 1.0,
            dp0: 1.0,
            z_min: -0.5,
            z_max: 0.5,
            tolerance: tol,
            samples: 101,
        };
        weierstrass_p(&spec).unwrap().max_drift
    };
    let d8 = drift_at(1e-8);
    let d10 = drift_at(1e-10);
    let d12 = drift_at(1e-12);
    assert!(d10 < d8, "1e-10 drift {d10} vs 1e-8 drift {d8}");
    assert!(d12 < d10, "1e-12 drift {d12} vs 1e-10 drift {d10}");
}

#[test]
fn case1_potential_values() {
    let v = classical_case1_potential(rat_i(1), true, "x1");
    let mut b = crate::expr::Binding::new();
    b.set_exact("x1", rat_i(4));
    assert_eq!(v.eval_exact(&b).unwrap(), rat_i(2));

    let zero = classical_case1_potential(rat_i(0), true, "x1");
    assert!(zero.is_zero());

    // sqrt(x) solves the classical branch 0 = 6 V^2 + k x with k = -6
    let check = (Expr::num(6) * v.clone() * v - Expr::num(6) * Expr::sym("x1")).normalize();
    assert!(check.is_zero());
}

#[test]
fn quartic_repeated_root_stub() {
    // (V-1)^4 = V^4 - 4V^3 + 6V^2 - 4V + 1
    let q = QuarticPotential {
        coeffs: [
            Expr::one(),
            Expr::num(-4),
            Expr::num(6),
            Expr::num(-4),
            Expr::one(),
        ],
        var: "x1".into(),
    };
    let track = classical_case2_potential(&q, &[0.0, 0.5, 1.0], 1.1).unwrap();
    for p in &track.points {
        assert!((p.value - 1.0).abs() < 1e-3, "root {}", p.value);
    }
    assert!(track.collided, "quadruple root must flag a collision");
}

#[test]
fn quartic_branch_continuity() {
    // (V - x1)(V - 5)(V + 7)(V - 11) tracked along x: the branch near x
    let x = Expr::sym("x1");
    // expand (V - x)(V-5)(V+7)(V-11) in V: coefficients via symbolic algebra
    // (V-5)(V+7)(V-11) = V^3 - 9V^2 - 53V + 385
    let c4 = Expr::one();
    let c3 = (Expr::num(-9) - x.clone()).normalize();
    let c2 = (Expr::num(-53) + Expr::num(9) * x.clone()).normalize();
    let c1 = (Expr::num(385) + Expr::num(53) * x.clone()).normalize();
    let c0 = (Expr::num(-385) * x.clone()).normalize();
    let q = QuarticPotential {
        coeffs: [c4, c3, c2, c1, c0],
        var: "x1".into(),
    };
    let xs: Vec<f64> = (0..100).map(|i| 0.5 + i as f64 * 0.02).collect();
    let track = classical_case2_potential(&q, &xs, 0.5).unwrap();
    assert!(!track.collided);
    for (i, p) in track.points.iter().enumerate() {
        assert!(
            (p.value - p.x).abs() < 1e-8,
            "branch should follow V = x at {}: {}",
            p.x,
            p.value
        );
        if i > 0 {
            let slope_bound = 2.0;
            let jump = (p.value - track.points[i - 1].value).abs();
            assert!(jump < 10.0 * 0.02 * slope_bound, "jump {jump}");
        }
    }
}

#[test]
fn quartic_exact_quadratic_limit() {
    // factored family whose selected branch is exactly x^2/2 + 1
    let x = Expr::sym("x1");
    let quad = (Expr::ratio(1, 2) * x.clone() * x.clone() + Expr::one()).normalize();
    // (V - quad)(V - 20)(V - 30)(V - 40)
    let c3 = (Expr::num(-90) - quad.clone()).normalize();
    let c2 = (Expr::num(2600) + Expr::num(90) * quad.clone()).normalize();
    let c1 = (Expr::num(-24000) - Expr::num(2600) * quad.clone()).normalize();
    let c0 = (Expr::num(24000) * quad.clone()).normalize();
    let q = QuarticPotential {
        coeffs: [Expr::one(), c3, c2, c1, c0],
        var: "x1".into(),
    };
    let xs: Vec<f64> = (0..50).map(|i| -2.0 + i as f64 * 0.08).collect();
    let track = classical_case2_potential(&q, &xs, 3.0).unwrap();
    for p in &track.points {
        let want = p.x * p.x / 2.0 + 1.0;
        assert!(
            (p.value - want).abs() < 1e-10,
            "x={}: {} vs {}",
            p.x,
            p.value,
            want
        );
    }
}

#[test]
fn scaled_p1_satisfies_operative_condition() {
    let hbar = 1.0;
    let kappa = 1.0;
    let (field, sc) = painleve1_potential(
        hbar, kappa, 0.0, 0.0, 0.0, -0.5, 0.5, 401, 1e-12,
    )
    .unwrap();
    assert!((sc.scale_b - 1.0).abs() < 1e-14);
    // finite differences on the sampled V against hbar^2 V'' = 6V^2 + kappa x
    let h = field.xs[1] - field.xs[0];
    let mut worst = 0.0f64;
    for i in 1..field.xs.len() - 1 {
        let d2 = (field.rows[i + 1][0] - 2.0 * field.rows[i][0] + field.rows[i - 1][0])
            / (h * h);
        let rhs = 6.0 * field.rows[i][0] * field.rows[i][0] + kappa * field.xs[i];
        worst = worst.max((hbar * hbar * d2 - rhs).abs());
    }
    assert!(worst < 1e-5, "operative-condition residual {worst}");
    // stored higher derivatives agree with the defining relations
    for i in 0..field.xs.len() {
        let [v, dv, d2v, d3v] = field.rows[i];
        assert!((d2v - (6.0 * v * v + kappa * field.xs[i])).abs() < 1e-9);
        assert!((d3v - (12.0 * v * dv + kappa)).abs() < 1e-9);
    }
}
