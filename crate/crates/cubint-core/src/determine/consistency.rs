//! Numeric cross-validation of the chart-specific compatibility forms
//! against the general linear compatibility condition pulled back through
//! the chart map. At every regular point the two are linear functionals
//! of the potential pair; the report fits the scalar multiplier between
//! them over random polynomial trials and records the proportionality
//! residual.

use super::{compat_coeffs, DetError};
use crate::charts::{self, ChartTag, Coeffs10};
use crate::expr::{diff, sum_of, Binding, Expr};
use crate::rng::SplitMix64;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Clone, Debug)]
pub struct CompatPointReport {
    pub point: [f64; 2],
    /// Fitted scalar with chart_form ≈ multiplier · pulled_back_form.
    pub multiplier: Option<f64>,
    pub residual: f64,
    pub degenerate: bool,
}

#[derive(Clone, Debug)]
pub struct CompatReport {
    pub chart: ChartTag,
    pub points: Vec<CompatPointReport>,
    pub max_residual: f64,
    pub degenerate_points: usize,
}

/// Random polynomial potential pair in the chart variables; polar
/// angular components live in the trig basis.
pub fn random_potential_pair(
    chart: ChartTag,
    rng: &mut SplitMix64,
    degree: i64,
) -> (Expr, Expr) {
    let (q1, q2) = chart.vars();
    let poly = |rng: &mut SplitMix64, var: &str| {
        let mut items = Vec::new();
        for k in 1..=degree {
            let c = rng.int_in(-4, 4);
            if c != 0 {
                items.push(Expr::num(c) * Expr::sym(var).pow_i(k));
            }
        }
        items.push(Expr::num(rng.int_in(-3, 3)));
        sum_of(items).normalize()
    };
    let trig = |rng: &mut SplitMix64, var: &str| {
        let mut items = Vec::new();
        for k in 1..=degree.min(3) {
            let c = rng.int_in(-4, 4);
            if c != 0 {
                items.push(Expr::num(c) * (Expr::num(k) * Expr::sym(var)).cos());
            }
            let s = rng.int_in(-4, 4);
            if s != 0 {
                items.push(Expr::num(s) * (Expr::num(k) * Expr::sym(var)).sin());
            }
        }
        sum_of(items).normalize()
    };
    match chart {
        ChartTag::Polar => (poly(rng, q1), trig(rng, q2)),
        _ => (poly(rng, q1), poly(rng, q2)),
    }
}

pub fn random_regular_point(chart: ChartTag, rng: &mut SplitMix64) -> [f64; 2] {
    match chart {
        ChartTag::Cartesian => [rng.f64_in(-1.8, 1.8), rng.f64_in(-1.8, 1.8)],
        ChartTag::Polar => [rng.f64_in(0.4, 2.0), rng.f64_in(0.2, 1.3)],
        ChartTag::Parabolic => [rng.f64_in(0.4, 1.7), rng.f64_in(0.4, 1.7)],
        ChartTag::Elliptic => {
            let u = if rng.unit_f64() < 0.5 {
                rng.f64_in(-0.8, -0.2)
            } else {
                rng.f64_in(0.2, 0.8)
            };
            [u, rng.f64_in(1.2, 2.2)]
        }
    }
}

/// Cartesian derivative tower of a potential: orders
/// [V1, V2, V11, V12, V22, V111, V112, V122, V222].
fn derivative_tower(v: &Expr) -> Result<[Expr; 9], DetError> {
    let v1 = diff(v, "x1", 1)?;
    let v2 = diff(v, "x2", 1)?;
    let v11 = diff(&v1, "x1", 1)?;
    let v12 = diff(&v1, "x2", 1)?;
    let v22 = diff(&v2, "x2", 1)?;
    let v111 = diff(&v11, "x1", 1)?;
    let v112 = diff(&v11, "x2", 1)?;
    let v122 = diff(&v12, "x2", 1)?;
    let v222 = diff(&v22, "x2", 1)?;
    Ok([v1, v2, v11, v12, v22, v111, v112, v122, v222])
}

/// Coefficient expressions of the general compatibility condition in the
/// same tower order.
fn eq7_slots(a: &Coeffs10) -> Result<[Expr; 9], DetError> {
    let f = charts::leading_terms(ChartTag::Cartesian, a).f;
    let d = |e: &Expr, var: &str, n: u32| diff(e, var, n);
    let f12 = d(&f[0], "x2", 1)?;
    let f122 = d(&f[0], "x2", 2)?;
    let f21 = d(&f[1], "x1", 1)?;
    let f22 = d(&f[1], "x2", 1)?;
    let f222 = d(&f[1], "x2", 2)?;
    let f212 = d(&f21, "x2", 1)?;
    let f31 = d(&f[2], "x1", 1)?;
    let f32 = d(&f[2], "x2", 1)?;
    let f311 = d(&f[2], "x1", 2)?;
    let f312 = d(&f31, "x2", 1)?;
    let f41 = d(&f[3], "x1", 1)?;
    let f411 = d(&f[3], "x1", 2)?;
    Ok([
        sum_of([
            Expr::num(-3) * f122,
            Expr::num(2) * f212,
            -f311,
        ])
        .normalize(),
        sum_of([-f222, Expr::num(2) * f312, Expr::num(-3) * f411]).normalize(),
        (Expr::num(2) * (f22.clone() - f31.clone())).normalize(),
        (Expr::num(2)
            * sum_of([
                Expr::num(-3) * f12,
                f21,
                f32,
                Expr::num(-3) * f41,
            ]))
        .normalize(),
        (Expr::num(2) * (f31 - f22)).normalize(),
        (-f[2].clone()).normalize(),
        (Expr::num(2) * f[1].clone() - Expr::num(3) * f[3].clone()).normalize(),
        (Expr::num(-3) * f[0].clone() + Expr::num(2) * f[2].clone()).normalize(),
        (-f[1].clone()).normalize(),
    ])
}

struct TrialData {
    /// tower values at each point: [point][9]
    tower_vals: Vec<[f64; 9]>,
    /// chart-variable derivative values d^k(v1)(q1), d^k(v2)(q2): [point][8]
    dvals: Vec<[f64; 8]>,
}

/// Shared evaluation grid for one chart: Cartesian images, bindings.
struct PointData {
    chart_points: Vec<[f64; 2]>,
    cart_bindings: Vec<Binding>,
    chart_bindings: Vec<Binding>,
}

fn build_points(chart: ChartTag, points: &[[f64; 2]]) -> Result<PointData, DetError> {
    let (q1, q2) = chart.vars();
    let mut cart_bindings = Vec::with_capacity(points.len());
    let mut chart_bindings = Vec::with_capacity(points.len());
    for &q in points {
        let x = charts::to_cartesian(chart, q)?;
        let mut gb = Binding::new();
        gb.set_f64("x1", x[0]).set_f64("x2", x[1]);
        cart_bindings.push(gb);
        let mut cb = Binding::new();
        cb.set_f64(q1, q[0]).set_f64(q2, q[1]);
        chart_bindings.push(cb);
    }
    Ok(PointData {
        chart_points: points.to_vec(),
        cart_bindings,
        chart_bindings,
    })
}

fn build_trial(
    chart: ChartTag,
    v1: &Expr,
    v2: &Expr,
    pd: &PointData,
) -> Result<TrialData, DetError> {
    let (q1, q2) = chart.vars();
    let vcart = charts::compose_potential(chart, v1, v2)?;
    let tower = derivative_tower(&vcart)?;
    let mut d1 = Vec::with_capacity(4);
    let mut d2 = Vec::with_capacity(4);
    for k in 0..4u32 {
        d1.push(diff(v1, q1, k)?);
        d2.push(diff(v2, q2, k)?);
    }
    let ev = |e: &Expr, b: &Binding| {
        e.eval_f64(b)
            .map_err(|e| DetError::SingularPoint(alloc::format!("{e}")))
    };
    let mut tower_vals = Vec::with_capacity(pd.chart_points.len());
    let mut dvals = Vec::with_capacity(pd.chart_points.len());
    for i in 0..pd.chart_points.len() {
        let gb = &pd.cart_bindings[i];
        let cb = &pd.chart_bindings[i];
        let mut tv = [0.0f64; 9];
        for (k, e) in tower.iter().enumerate() {
            tv[k] = ev(e, gb)?;
        }
        tower_vals.push(tv);
        let mut dv = [0.0f64; 8];
        for k in 0..4 {
            dv[k] = ev(&d1[k], cb)?;
            dv[4 + k] = ev(&d2[k], cb)?;
        }
        dvals.push(dv);
    }
    Ok(TrialData { tower_vals, dvals })
}

fn report_for_vector(
    chart: ChartTag,
    a: &Coeffs10,
    pd: &PointData,
    trials: &[TrialData],
) -> Result<CompatReport, DetError> {
    let slots = eq7_slots(a)?;
    let cc = compat_coeffs(chart, a);
    let ev = |e: &Expr, b: &Binding| {
        e.eval_f64(b)
            .map_err(|e| DetError::SingularPoint(alloc::format!("{e}")))
    };
    let mut reports = Vec::with_capacity(pd.chart_points.len());
    let mut max_residual = 0.0f64;
    let mut degenerate_points = 0usize;
    for i in 0..pd.chart_points.len() {
        let gb = &pd.cart_bindings[i];
        let cb = &pd.chart_bindings[i];
        let mut slot_vals = [0.0f64; 9];
        for (k, e) in slots.iter().enumerate() {
            slot_vals[k] = ev(e, gb)?;
        }
        let mut wvals = [0.0f64; 8];
        for k in 0..4 {
            wvals[k] = ev(&cc.w1[k], cb)?;
            wvals[4 + k] = ev(&cc.w2[k], cb)?;
        }
        let mut ys = Vec::with_capacity(trials.len());
        let mut zs = Vec::with_capacity(trials.len());
        for t in trials {
            let y: f64 = (0..9).map(|k| slot_vals[k] * t.tower_vals[i][k]).sum();
            // dvals hold orders 0..3; w-coefficients are stored 0..3 too
            let z: f64 = (0..4)
                .map(|k| wvals[k] * t.dvals[i][k] + wvals[4 + k] * t.dvals[i][4 + k])
                .sum();
            ys.push(y);
            zs.push(z);
        }
        let ny: f64 = ys.iter().map(|y| y * y).sum::<f64>().sqrt();
        let nz: f64 = zs.iter().map(|z| z * z).sum::<f64>().sqrt();
        if ny < 1e-12 && nz < 1e-12 {
            degenerate_points += 1;
            reports.push(CompatPointReport {
                point: pd.chart_points[i],
                multiplier: None,
                residual: 0.0,
                degenerate: true,
            });
            continue;
        }
        let dot: f64 = ys.iter().zip(&zs).map(|(y, z)| y * z).sum();
        let c = dot / (ny * ny).max(f64::MIN_POSITIVE);
        let mut err = 0.0f64;
        for (y, z) in ys.iter().zip(&zs) {
            err += (z - c * y) * (z - c * y);
        }
        let residual = err.sqrt() / ny.max(nz);
        max_residual = max_residual.max(residual);
        reports.push(CompatPointReport {
            point: pd.chart_points[i],
            multiplier: Some(c),
            residual,
            degenerate: false,
        });
    }
    Ok(CompatReport {
        chart,
        points: reports,
        max_residual,
        degenerate_points,
    })
}

/// Evaluate the pulled-back general condition and the chart form at the
/// given chart points for `trials` random potential pairs, and fit the
/// pointwise proportionality between the two functionals.
pub fn compat_consistency(
    chart: ChartTag,
    a: &Coeffs10,
    points: &[[f64; 2]],
    trials: usize,
    seed: u64,
) -> Result<CompatReport, DetError> {
    let mut rng = SplitMix64::new(seed);
    let pd = build_points(chart, points)?;
    let mut trial_data = Vec::with_capacity(trials);
    for _ in 0..trials {
        // the w-coefficient of the third derivative needs degree >= 3
        let (v1, v2) = random_potential_pair(chart, &mut rng, 3);
        trial_data.push(build_trial(chart, &v1, &v2, &pd)?);
    }
    report_for_vector(chart, a, &pd, &trial_data)
}

/// Suite variant: many coefficient vectors against a shared set of points
/// and trial potentials (the expensive derivative towers are built once).
pub fn compat_consistency_suite(
    chart: ChartTag,
    vectors: &[Coeffs10],
    n_points: usize,
    n_trials: usize,
    seed: u64,
) -> Result<Vec<CompatReport>, DetError> {
    let mut rng = SplitMix64::new(seed);
    let points: Vec<[f64; 2]> = (0..n_points)
        .map(|_| random_regular_point(chart, &mut rng))
        .collect();
    let pd = build_points(chart, &points)?;
    let mut trial_data = Vec::with_capacity(n_trials);
    for _ in 0..n_trials {
        let (v1, v2) = random_potential_pair(chart, &mut rng, 3);
        trial_data.push(build_trial(chart, &v1, &v2, &pd)?);
    }
    let mut out = Vec::with_capacity(vectors.len());
    for a in vectors {
        out.push(report_for_vector(chart, a, &pd, &trial_data)?);
    }
    Ok(out)
}
