//! Classical verification layer: Poisson brackets of phase-space
//! expressions, numerical recovery of the gauge fields from the
//! second-order determining equations, full candidate assembly, and
//! conserved-quantity drift along Hamiltonian trajectories.


use crate::charts::{self, ChartTag, Coeffs10};
use crate::determine::{DetError, SampledField1D, SeparablePotential};
use crate::expr::{diff, poly_coeffs, sum_of, Binding, Expr};
use crate::rat::{rat, Rat};
use crate::specfun::rk::{self, RkError, RkOptions};
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Clone, Debug)]
pub enum DynError {
    NonPolynomialMomenta,
    Det(DetError),
    Eval(String),
    CompatibilityViolated(f64),
    WindowTouchesSingularity(String),
}

impl From<DetError> for DynError {
    fn from(e: DetError) -> Self {
        DynError::Det(e)
    }
}

impl From<RkError> for DynError {
    fn from(e: RkError) -> Self {
        DynError::Eval(alloc::format!("{e}"))
    }
}

impl core::fmt::Display for DynError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            DynError::NonPolynomialMomenta => {
                write!(f, "phase-space expression is not polynomial in momenta")
            }
            DynError::Det(e) => write!(f, "{e}"),
            DynError::Eval(m) => write!(f, "evaluation failed: {m}"),
            DynError::CompatibilityViolated(r) => write!(
                f,
                "compatibility residual {r:e} violates the quadrature precondition"
            ),
            DynError::WindowTouchesSingularity(m) => {
                write!(f, "window touches a potential singularity: {m}")
            }
        }
    }
}

/// A phase-space point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseState {
    pub x1: f64,
    pub x2: f64,
    pub p1: f64,
    pub p2: f64,
}

impl PhaseState {
    pub fn new(x1: f64, x2: f64, p1: f64, p2: f64) -> Self {
        PhaseState { x1, x2, p1, p2 }
    }
    pub fn binding(&self) -> Binding {
        let mut b = Binding::new();
        b.set_f64("x1", self.x1)
            .set_f64("x2", self.x2)
            .set_f64("p1", self.p1)
            .set_f64("p2", self.p2);
        b
    }
}

/// Poisson bracket of two phase-space expressions polynomial in momenta.
pub fn poisson_bracket(f: &Expr, h: &Expr) -> Result<Expr, DynError> {
    for e in [f, h] {
        poly_coeffs(e, &["p1", "p2"]).map_err(|_| DynError::NonPolynomialMomenta)?;
    }
    let d = |e: &Expr, v: &str| diff(e, v, 1).expect("phase variables");
    Ok(sum_of([
        d(f, "x1") * d(h, "p1"),
        -(d(f, "p1") * d(h, "x1")),
        d(f, "x2") * d(h, "p2"),
        -(d(f, "p2") * d(h, "x2")),
    ])
    .normalize())
}

/// Full candidate third-order integral: leading constants, gauge fields
/// and the quantum parameter (0 for classical).
#[derive(Clone, Debug)]
pub struct IntegralCandidate {
    pub coeffs: Coeffs10,
    pub g1: Expr,
    pub g2: Expr,
    pub hbar: Rat,
}

/// X = F1 p1^3 + F2 p1^2 p2 + F3 p1 p2^2 + F4 p2^3 + g1 p1 + g2 p2 with
/// the Cartesian leading-term functions of the candidate's constants.
pub fn build_integral(c: &IntegralCandidate) -> Result<Expr, DynError> {
    for g in [&c.g1, &c.g2] {
        if g.contains_symbol("p1") || g.contains_symbol("p2") {
            return Err(DynError::NonPolynomialMomenta);
        }
    }
    let f = charts::leading_terms(ChartTag::Cartesian, &c.coeffs).f;
    let p1 = Expr::sym("p1");
    let p2 = Expr::sym("p2");
    Ok(sum_of([
        f[0].clone() * p1.clone().pow_i(3),
        f[1].clone() * p1.clone().pow_i(2) * p2.clone(),
        f[2].clone() * p1.clone() * p2.clone().pow_i(2),
        f[3].clone() * p2.clone().pow_i(3),
        c.g1.clone() * p1,
        c.g2.clone() * p2,
    ])
    .normalize())
}

/// Second-order integral associated with separation of variables,
/// expressed in Cartesian phase-space variables.
#[derive(Clone, Debug)]
pub struct SecondOrderIntegral {
    pub chart: ChartTag,
    pub expr: Expr,
}

impl SecondOrderIntegral {
    /// Build from symbolic potential components in the chart variables.
    pub fn new(chart: ChartTag, v1: &Expr, v2: &Expr) -> Result<Self, DynError> {
        let x1 = Expr::sym("x1");
        let x2 = Expr::sym("x2");
        let p1 = Expr::sym("p1");
        let p2 = Expr::sym("p2");
        let l3 = (x1.clone() * p2.clone() - x2.clone() * p1.clone()).normalize();
        let r2 = (x1.clone().pow_i(2) + x2.clone().pow_i(2)).normalize();
        let expr = match chart {
            ChartTag::Cartesian => {
                (Expr::ratio(1, 2) * p1.clone().pow_i(2) + v1.clone()).normalize()
            }
            ChartTag::Polar => {
                let rinv = r2.clone().pow_r(rat(-1, 2));
                let cos_th = (x1.clone() * rinv.clone()).normalize();
                let sin_th = (x2.clone() * rinv).normalize();
                let s = v2
                    .subst_trig_unit("th", &cos_th, &sin_th)
                    .map_err(DetError::from)
                    .map_err(DynError::from)?;
                (Expr::ratio(1, 2) * l3.clone().pow_i(2) + s).normalize()
            }
            ChartTag::Parabolic => {
                let r = r2.clone().sqrt();
                let xi = (r.clone() + x1.clone()).sqrt();
                let eta = (r.clone() - x1.clone()).sqrt();
                let w1 = v1.subst("xi", &xi);
                let w2 = v2.subst("eta", &eta);
                // (xi^2 W2 - eta^2 W1)/(xi^2+eta^2) with xi^2 = r + x1
                let scalar = ((r.clone() + x1.clone()) * w2 - (r.clone() - x1.clone()) * w1)
                    * (Expr::num(2) * r).normalize().pow_i(-1);
                (p2.clone() * l3.clone() + scalar).normalize()
            }
            ChartTag::Elliptic => {
                let q = (r2 + Expr::one()).normalize();
                let w = (q.clone().pow_i(2) - Expr::num(4) * x1.clone().pow_i(2))
                    .normalize()
                    .sqrt();
                let vsq = ((q.clone() + w.clone()) * Expr::ratio(1, 2)).normalize();
                let usq = ((q - w.clone()) * Expr::ratio(1, 2)).normalize();
                let vv = vsq.clone().sqrt();
                let uu = (x1.clone() * vsq.clone().pow_r(rat(-1, 2))).normalize();
                let w1 = v1.subst("u", &uu);
                let w2 = v2.subst("v", &vv);
                // F = ((2v^2-1) W1 + (2u^2-1) W2)/(u^2-v^2), u^2-v^2 = -w
                let fuv = -(((Expr::num(2) * vsq - Expr::one()) * w1
                    + (Expr::num(2) * usq - Expr::one()) * w2)
                    * w.pow_i(-1));
                (l3.clone().pow_i(2)
                    + Expr::ratio(1, 2) * (p1.clone().pow_i(2) - p2.clone().pow_i(2))
                    + fuv)
                    .normalize()
            }
        };
        Ok(SecondOrderIntegral { chart, expr })
    }
}

/// Rectangular Cartesian window.
#[derive(Clone, Copy, Debug)]
pub struct Window {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

/// Gauge fields reconstructed on a grid by line quadrature, with the
/// residual norms of the three defining equations.
#[derive(Clone, Debug)]
pub struct GaugeFieldGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// g1[i][j] at (xs[i], ys[j])
    pub g1: Vec<Vec<f64>>,
    pub g2: Vec<Vec<f64>>,
    pub base: [f64; 2],
    /// max-norm residuals of the three second-order determining
    /// equations evaluated by high-order finite differences
    pub residuals: [f64; 3],
}

struct Field2 {
    expr: Expr,
}

impl Field2 {
    fn new(expr: Expr) -> Self {
        Field2 { expr }
    }
    fn at(&self, x: f64, y: f64) -> Result<f64, DynError> {
        let mut b = Binding::new();
        b.set_f64("x1", x).set_f64("x2", y);
        self.expr
            .eval_f64(&b)
            .map_err(|e| DynError::Eval(alloc::format!("{e}")))
    }
}

/// Cumulative composite Simpson along a line of nodes; f is evaluated at
/// nodes and midpoints.
fn cumulative_simpson(
    f: &dyn Fn(f64) -> Result<f64, DynError>,
    ts: &[f64],
) -> Result<Vec<f64>, DynError> {
    let mut out = Vec::with_capacity(ts.len());
    let mut acc = 0.0f64;
    out.push(0.0);
    for k in 1..ts.len() {
        let (a, b) = (ts[k - 1], ts[k]);
        let m = 0.5 * (a + b);
        acc += (b - a) / 6.0 * (f(a)? + 4.0 * f(m)? + f(b)?);
        out.push(acc);
    }
    Ok(out)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Definite Simpson integral over [a, b] with a fixed node count.
fn simpson_to(
    f: &dyn Fn(f64) -> Result<f64, DynError>,
    a: f64,
    b: f64,
    steps: usize,
) -> Result<f64, DynError> {
    if (b - a).abs() < 1e-15 {
        return Ok(0.0);
    }
    let ts = linspace(a, b, steps.max(2));
    let vals = cumulative_simpson(f, &ts)?;
    Ok(*vals.last().unwrap())
}

/// Scalar fields feeding the gauge-field quadrature: the right-hand
/// sides of the three defining equations, the cross derivatives
/// resolving the mixed-partial split, and the compatibility field.
struct GradFields<'a> {
    r1: alloc::boxed::Box<dyn Fn(f64, f64) -> Result<f64, DynError> + 'a>,
    r2: alloc::boxed::Box<dyn Fn(f64, f64) -> Result<f64, DynError> + 'a>,
    r3: alloc::boxed::Box<dyn Fn(f64, f64) -> Result<f64, DynError> + 'a>,
    r1y: alloc::boxed::Box<dyn Fn(f64, f64) -> Result<f64, DynError> + 'a>,
    r2y: alloc::boxed::Box<dyn Fn(f64, f64) -> Result<f64, DynError> + 'a>,
    r3x: alloc::boxed::Box<dyn Fn(f64, f64) -> Result<f64, DynError> + 'a>,
    compat: alloc::boxed::Box<dyn Fn(f64, f64) -> Result<f64, DynError> + 'a>,
}

/// Reconstruct g1, g2 from the second-order determining equations by
/// line quadrature of the gradient system; the mixed-partial split is
/// resolved through cross-derivative consistency and the gauge is fixed
/// by g1 = g2 = 0 at the base point.
pub fn solve_g_numeric(
    v: &SeparablePotential,
    a: &Coeffs10,
    window: Window,
    basepoint: [f64; 2],
    resolution: usize,
) -> Result<GaugeFieldGrid, DynError> {
    match (&v.comp1, &v.comp2) {
        (
            crate::determine::PotentialComponent::Symbolic(_),
            crate::determine::PotentialComponent::Symbolic(_),
        ) => {
            let vcart = v.to_cartesian_expr()?;
            solve_g_numeric_cartesian(&vcart, a, window, basepoint, resolution)
        }
        _ => {
            if v.chart != ChartTag::Cartesian {
                return Err(DynError::Det(DetError::Chart(
                    crate::charts::ChartError::Mismatch {
                        expected: "cartesian",
                        got: v.chart.name(),
                    },
                )));
            }
            let c1 = v.resolved(&v.comp1);
            let c2 = v.resolved(&v.comp2);
            let e1 = component_stack(&c1, "x1")?;
            let e2 = component_stack(&c2, "x2")?;
            let fields = stack_fields(a, &e1, &e2);
            quadrature_engine(&fields, window, basepoint, resolution)
        }
    }
}

/// Same quadrature on a potential already given in Cartesian variables.
pub fn solve_g_numeric_cartesian(
    vcart: &Expr,
    a: &Coeffs10,
    window: Window,
    basepoint: [f64; 2],
    resolution: usize,
) -> Result<GaugeFieldGrid, DynError> {
    let lc = crate::determine::linear_compat(vcart, a)?;
    let f = charts::leading_terms(ChartTag::Cartesian, a).f;
    let d = |e: &Expr, var: &str| diff(e, var, 1).map_err(DetError::from);
    let v1 = d(vcart, "x1")?;
    let v2 = d(vcart, "x2")?;
    let r1 = (Expr::num(3) * f[0].clone() * v1.clone() + f[1].clone() * v2.clone())
        .normalize();
    let r2 = (Expr::num(2) * (f[1].clone() * v1.clone() + f[2].clone() * v2.clone()))
        .normalize();
    let r3 = (f[2].clone() * v1 + Expr::num(3) * f[3].clone() * v2).normalize();
    let r1y = d(&r1, "x2")?;
    let r3x = d(&r3, "x1")?;
    let r2y = d(&r2, "x2")?;
    let fr1 = Field2::new(r1);
    let fr2 = Field2::new(r2);
    let fr3 = Field2::new(r3);
    let fr1y = Field2::new(r1y);
    let fr3x = Field2::new(r3x);
    let fr2y = Field2::new(r2y);
    let flc = Field2::new(lc);
    let fields = GradFields {
        r1: alloc::boxed::Box::new(move |x, y| fr1.at(x, y)),
        r2: alloc::boxed::Box::new(move |x, y| fr2.at(x, y)),
        r3: alloc::boxed::Box::new(move |x, y| fr3.at(x, y)),
        r1y: alloc::boxed::Box::new(move |x, y| fr1y.at(x, y)),
        r2y: alloc::boxed::Box::new(move |x, y| fr2y.at(x, y)),
        r3x: alloc::boxed::Box::new(move |x, y| fr3x.at(x, y)),
        compat: alloc::boxed::Box::new(move |x, y| flc.at(x, y)),
    };
    quadrature_engine(&fields, window, basepoint, resolution)
}

/// One-variable derivative stack evaluator (value and first three
/// derivatives).
enum StackEval<'a> {
    Sym([Expr; 4], &'static str),
    Field(&'a SampledField1D),
}

impl StackEval<'_> {
    fn at(&self, t: f64) -> Result<[f64; 4], DynError> {
        match self {
            StackEval::Sym(d, var) => {
                let mut b = Binding::new();
                b.set_f64(var, t);
                let mut out = [0.0f64; 4];
                for (k, e) in d.iter().enumerate() {
                    out[k] = e
                        .eval_f64(&b)
                        .map_err(|err| DynError::Eval(alloc::format!("{err}")))?;
                }
                Ok(out)
            }
            StackEval::Field(f) => Ok(f.eval(t)),
        }
    }
}

fn component_stack<'a>(
    c: &'a crate::determine::PotentialComponent,
    var: &'static str,
) -> Result<StackEval<'a>, DynError> {
    match c {
        crate::determine::PotentialComponent::Symbolic(e) => {
            let d0 = e.normalize();
            let d1 = diff(&d0, var, 1).map_err(DetError::from)?;
            let d2 = diff(&d1, var, 1).map_err(DetError::from)?;
            let d3 = diff(&d2, var, 1).map_err(DetError::from)?;
            Ok(StackEval::Sym([d0, d1, d2, d3], var))
        }
        crate::determine::PotentialComponent::Sampled(f) => Ok(StackEval::Field(f)),
    }
}

/// Leading-term function values and the derivative combinations entering
/// the separable gradient fields.
struct LeadFns {
    f: [Field2; 4],
    f1y: Field2,
    f2y: Field2,
    f3x: Field2,
    f3y: Field2,
    f4x: Field2,
    f1yy: Field2,
    f2xy: Field2,
    f2yy: Field2,
    f3xx: Field2,
    f3xy: Field2,
    f4xx: Field2,
}

fn lead_fns(a: &Coeffs10) -> LeadFns {
    let f = charts::leading_terms(ChartTag::Cartesian, a).f;
    let d = |e: &Expr, v: &str, n: u32| diff(e, v, n).expect("cartesian vars");
    LeadFns {
        f1y: Field2::new(d(&f[0], "x2", 1)),
        f2y: Field2::new(d(&f[1], "x2", 1)),
        f3x: Field2::new(d(&f[2], "x1", 1)),
        f3y: Field2::new(d(&f[2], "x2", 1)),
        f4x: Field2::new(d(&f[3], "x1", 1)),
        f1yy: Field2::new(d(&f[0], "x2", 2)),
        f2xy: Field2::new(d(&d(&f[1], "x1", 1), "x2", 1)),
        f2yy: Field2::new(d(&f[1], "x2", 2)),
        f3xx: Field2::new(d(&f[2], "x1", 2)),
        f3xy: Field2::new(d(&d(&f[2], "x1", 1), "x2", 1)),
        f4xx: Field2::new(d(&f[3], "x1", 2)),
        f: f.map(Field2::new),
    }
}

/// Gradient fields for a Cartesian-separable potential given as a pair
/// of one-variable derivative-stack evaluators.
fn stack_fields<'a>(
    a: &Coeffs10,
    e1: &'a StackEval<'a>,
    e2: &'a StackEval<'a>,
) -> GradFields<'a> {
    type Term<'b> =
        alloc::boxed::Box<dyn Fn(&LeadFns, [f64; 4], [f64; 4], f64, f64) -> Result<f64, DynError> + 'b>;
    let lf = alloc::rc::Rc::new(lead_fns(a));
    let mk = move |f: Term<'a>| {
        let lf = lf.clone();
        alloc::boxed::Box::new(move |x: f64, y: f64| {
            let s1 = e1.at(x)?;
            let s2 = e2.at(y)?;
            f(&lf, s1, s2, x, y)
        }) as alloc::boxed::Box<dyn Fn(f64, f64) -> Result<f64, DynError> + 'a>
    };
    GradFields {
        r1: mk(alloc::boxed::Box::new(|lf, s1, s2, x, y| {
            Ok(3.0 * lf.f[0].at(x, y)? * s1[1] + lf.f[1].at(x, y)? * s2[1])
        })),
        r2: mk(alloc::boxed::Box::new(|lf, s1, s2, x, y| {
            Ok(2.0 * (lf.f[1].at(x, y)? * s1[1] + lf.f[2].at(x, y)? * s2[1]))
        })),
        r3: mk(alloc::boxed::Box::new(|lf, s1, s2, x, y| {
            Ok(lf.f[2].at(x, y)? * s1[1] + 3.0 * lf.f[3].at(x, y)? * s2[1])
        })),
        r1y: mk(alloc::boxed::Box::new(|lf, s1, s2, x, y| {
            Ok(3.0 * lf.f1y.at(x, y)? * s1[1]
                + lf.f2y.at(x, y)? * s2[1]
                + lf.f[1].at(x, y)? * s2[2])
        })),
        r2y: mk(alloc::boxed::Box::new(|lf, s1, s2, x, y| {
            Ok(2.0
                * (lf.f2y.at(x, y)? * s1[1]
                    + lf.f3y.at(x, y)? * s2[1]
                    + lf.f[2].at(x, y)? * s2[2]))
        })),
        r3x: mk(alloc::boxed::Box::new(|lf, s1, s2, x, y| {
            Ok(lf.f3x.at(x, y)? * s1[1]
                + lf.f[2].at(x, y)? * s1[2]
                + 3.0 * lf.f4x.at(x, y)? * s2[1])
        })),
        compat: mk(alloc::boxed::Box::new(|lf, s1, s2, x, y| {
            // separable form of the linear compatibility condition
            let f2y = lf.f2y.at(x, y)?;
            let f3x = lf.f3x.at(x, y)?;
            Ok(-lf.f[2].at(x, y)? * s1[3] - lf.f[1].at(x, y)? * s2[3]
                + 2.0 * (f2y - f3x) * s1[2]
                + 2.0 * (f3x - f2y) * s2[2]
                + (-3.0 * lf.f1yy.at(x, y)? + 2.0 * lf.f2xy.at(x, y)?
                    - lf.f3xx.at(x, y)?)
                    * s1[1]
                + (-lf.f2yy.at(x, y)? + 2.0 * lf.f3xy.at(x, y)?
                    - 3.0 * lf.f4xx.at(x, y)?)
                    * s2[1])
        })),
    }
}

fn quadrature_engine(
    fields: &GradFields<'_>,
    window: Window,
    basepoint: [f64; 2],
    resolution: usize,
) -> Result<GaugeFieldGrid, DynError> {
    assert!(resolution >= 5, "resolution too small");
    let n = resolution;
    let xs = linspace(window.x[0], window.x[1], n);
    let ys = linspace(window.y[0], window.y[1], n);
    let (bx, by) = (basepoint[0], basepoint[1]);

    // path-independence prerequisite
    let mut worst = 0.0f64;
    for i in (0..n).step_by((n / 8).max(1)) {
        for j in (0..n).step_by((n / 8).max(1)) {
            worst = worst.max((fields.compat)(xs[i], ys[j])?.abs());
        }
    }
    if worst > 1e-8 {
        return Err(DynError::CompatibilityViolated(worst));
    }

    // Split constant for the mixed equation: symmetric at the window
    // center, then transported to the base point along two legs. Tying
    // the split to the window rather than the base point keeps the
    // selected solution member invariant under base-point changes.
    let (cx, cy) = (
        0.5 * (window.x[0] + window.x[1]),
        0.5 * (window.y[0] + window.y[1]),
    );
    let s0 = {
        let leg1 = |t: f64| (fields.r1y)(t, cy);
        let leg2 = |t: f64| Ok((fields.r2y)(bx, t)? - (fields.r3x)(bx, t)?);
        (fields.r2)(cx, cy)? / 2.0
            + simpson_to(&leg1, cx, bx, 65)?
            + simpson_to(&leg2, cy, by, 65)?
    };

    // g1 on the base column: integrate g1_y(bx, ·), itself defined by
    // quadrature of the cross-derivative consistency relation
    let g1_base_col = {
        let inner = |y: f64| -> Result<f64, DynError> {
            let f = |t: f64| Ok((fields.r2y)(bx, t)? - (fields.r3x)(bx, t)?);
            Ok(s0 + simpson_to(&f, by, y, 33)?)
        };
        let vals = cumulative_simpson(&inner, &ys)?;
        let base_val = simpson_to(&inner, ys[0], by, 65)?;
        vals.into_iter().map(|v| v - base_val).collect::<Vec<f64>>()
    };

    // g1(x, y) = g1(bx, y) + int_bx^x R1(·, y)
    let mut g1 = alloc::vec![alloc::vec![0.0f64; n]; n];
    for j in 0..n {
        let y = ys[j];
        let f = |x: f64| (fields.r1)(x, y);
        let vals = cumulative_simpson(&f, &xs)?;
        let base_val = simpson_to(&f, xs[0], bx, 65)?;
        for i in 0..n {
            g1[i][j] = g1_base_col[j] + vals[i] - base_val;
        }
    }

    // g2 on the base row: g2_x(x, by) = R2(x, by) - g1_y(x, by),
    // g1_y(x, by) = s0 + int_bx^x R1_y(·, by)
    let g2_base_row = {
        let f = |x: f64| -> Result<f64, DynError> {
            let g = |t: f64| (fields.r1y)(t, by);
            Ok((fields.r2)(x, by)? - (s0 + simpson_to(&g, bx, x, 33)?))
        };
        let vals = cumulative_simpson(&f, &xs)?;
        let base_val = simpson_to(&f, xs[0], bx, 65)?;
        vals.into_iter().map(|v| v - base_val).collect::<Vec<f64>>()
    };

    // g2(x, y) = g2(x, by) + int_by^y R3(x, ·)
    let mut g2 = alloc::vec![alloc::vec![0.0f64; n]; n];
    for i in 0..n {
        let x = xs[i];
        let f = |y: f64| (fields.r3)(x, y);
        let vals = cumulative_simpson(&f, &ys)?;
        let base_val = simpson_to(&f, ys[0], by, 65)?;
        for j in 0..n {
            g2[i][j] = g2_base_row[i] + vals[j] - base_val;
        }
    }

    // residual norms by fourth-order finite differences on the interior
    let hx = xs[1] - xs[0];
    let hy = ys[1] - ys[0];
    let d4 = |vals: [f64; 4], h: f64| {
        // f'(x) from f(x-2h), f(x-h), f(x+h), f(x+2h)
        (vals[0] - 8.0 * vals[1] + 8.0 * vals[2] - vals[3]) / (12.0 * h)
    };
    let mut res = [0.0f64; 3];
    for i in 2..n - 2 {
        for j in 2..n - 2 {
            let g1x = d4([g1[i - 2][j], g1[i - 1][j], g1[i + 1][j], g1[i + 2][j]], hx);
            let g1yv = d4([g1[i][j - 2], g1[i][j - 1], g1[i][j + 1], g1[i][j + 2]], hy);
            let g2x = d4([g2[i - 2][j], g2[i - 1][j], g2[i + 1][j], g2[i + 2][j]], hx);
            let g2yv = d4([g2[i][j - 2], g2[i][j - 1], g2[i][j + 1], g2[i][j + 2]], hy);
            let (x, y) = (xs[i], ys[j]);
            res[0] = res[0].max((g1x - (fields.r1)(x, y)?).abs());
            res[1] = res[1].max((g1yv + g2x - (fields.r2)(x, y)?).abs());
            res[2] = res[2].max((g2yv - (fields.r3)(x, y)?).abs());
        }
    }

    Ok(GaugeFieldGrid {
        xs,
        ys,
        g1,
        g2,
        base: basepoint,
        residuals: res,
    })
}

/// Residual report for the zeroth-order determining equation evaluated
/// on a gauge-field grid.
#[derive(Clone, Debug)]
pub struct GridResidualReport {
    pub max_residual: f64,
    /// additive gauge constants fitted from the zeroth equation itself
    pub gauge_constants: [f64; 2],
}

/// Evaluate the zeroth-order determining equation on the grid of a
/// reconstructed gauge field for a Cartesian-separable potential. The
/// quadrature determines g1, g2 only up to additive constants; those two
/// constants belong to the zeroth equation, so they are fitted here by
/// linear least squares before the max-norm residual is taken.
pub fn zeroth_residual_grid(
    v: &SeparablePotential,
    a: &Coeffs10,
    grid: &GaugeFieldGrid,
    hbar: f64,
) -> Result<GridResidualReport, DynError> {
    if v.chart != ChartTag::Cartesian {
        return Err(DynError::Det(DetError::Chart(
            crate::charts::ChartError::Mismatch {
                expected: "cartesian",
                got: v.chart.name(),
            },
        )));
    }
    let c1 = v.resolved(&v.comp1);
    let c2 = v.resolved(&v.comp2);
    let e1 = component_stack(&c1, "x1")?;
    let e2 = component_stack(&c2, "x2")?;
    let lf = lead_fns(a);
    let h2 = hbar * hbar;
    let a300 = crate::rat::rat_to_f64(&a.0[crate::charts::A300]);
    let a210 = crate::rat::rat_to_f64(&a.0[crate::charts::A210]);
    let a201 = crate::rat::rat_to_f64(&a.0[crate::charts::A201]);

    let n = grid.xs.len();
    let m = grid.ys.len();
    // residual(x,y) = r0 + c1 * V_x + c2 * V_y with unknown constants
    let mut r0 = alloc::vec![alloc::vec![0.0f64; m]; n];
    let mut w1 = alloc::vec![alloc::vec![0.0f64; m]; n];
    let mut w2 = alloc::vec![alloc::vec![0.0f64; m]; n];
    for (i, &x) in grid.xs.iter().enumerate() {
        let s1 = e1.at(x)?;
        for (j, &y) in grid.ys.iter().enumerate() {
            let s2 = e2.at(y)?;
            let corr1 = h2 * (-2.0 * a300 * y + 0.5 * a210);
            let corr2 = h2 * (2.0 * a300 * x + 0.5 * a201);
            let third = lf.f[0].at(x, y)? * s1[3]
                + lf.f[1].at(x, y)? * 0.0
                + lf.f[2].at(x, y)? * 0.0
                + lf.f[3].at(x, y)? * s2[3];
            r0[i][j] = (grid.g1[i][j] - corr1) * s1[1] + (grid.g2[i][j] - corr2) * s2[1]
                - 0.25 * h2 * third;
            w1[i][j] = s1[1];
            w2[i][j] = s2[1];
        }
    }
    // least squares over the additive constants
    let mut a11 = 0.0f64;
    let mut a12 = 0.0f64;
    let mut a22 = 0.0f64;
    let mut b1 = 0.0f64;
    let mut b2 = 0.0f64;
    for i in 0..n {
        for j in 0..m {
            a11 += w1[i][j] * w1[i][j];
            a12 += w1[i][j] * w2[i][j];
            a22 += w2[i][j] * w2[i][j];
            b1 -= r0[i][j] * w1[i][j];
            b2 -= r0[i][j] * w2[i][j];
        }
    }
    let det = a11 * a22 - a12 * a12;
    let (c1, c2) = if det.abs() > 1e-12 * (a11 * a22).max(1.0) {
        ((b1 * a22 - b2 * a12) / det, (a11 * b2 - a12 * b1) / det)
    } else if a11 > 1e-12 {
        (b1 / a11, 0.0)
    } else if a22 > 1e-12 {
        (0.0, b2 / a22)
    } else {
        (0.0, 0.0)
    };
    let mut max_residual = 0.0f64;
    for i in 0..n {
        for j in 0..m {
            let r = r0[i][j] + c1 * w1[i][j] + c2 * w2[i][j];
            max_residual = max_residual.max(r.abs());
        }
    }
    Ok(GridResidualReport {
        max_residual,
        gauge_constants: [c1, c2],
    })
}

/// Drift of one conserved quantity along a trajectory.
#[derive(Clone, Debug)]
pub struct DriftReport {
    pub names: Vec<String>,
    /// max |Q(t) - Q(0)| / max(1, |Q(0)|) per quantity
    pub drifts: Vec<f64>,
    /// (t, values) time series sampled at accepted steps
    pub series: Vec<(f64, Vec<f64>)>,
    pub truncated: bool,
}

/// Integrate Hamilton's equations with the adaptive embedded pair and
/// report conserved-quantity drift. Deliberately non-symplectic: drift
/// is the measurement.
pub fn trajectory_drift(
    hamiltonian: &Expr,
    integrals: &[(String, Expr)],
    s0: PhaseState,
    t_end: f64,
    tol: f64,
) -> Result<DriftReport, DynError> {
    let dh = |v: &str| diff(hamiltonian, v, 1).map_err(DetError::from);
    let hp1 = dh("p1")?;
    let hp2 = dh("p2")?;
    let hx1 = dh("x1")?;
    let hx2 = dh("x2")?;
    let sys = move |t: f64, y: &[f64; 4]| -> Result<[f64; 4], RkError> {
        let mut b = Binding::new();
        b.set_f64("x1", y[0])
            .set_f64("x2", y[1])
            .set_f64("p1", y[2])
            .set_f64("p2", y[3]);
        let e = |ex: &Expr| ex.eval_f64(&b).map_err(|_| RkError::NonFinite(t));
        Ok([e(&hp1)?, e(&hp2)?, -(e(&hx1)?), -(e(&hx2)?)])
    };
    let opts = RkOptions {
        rtol: tol,
        atol: tol,
        divergence: 1e9,
        ..Default::default()
    };
    let y0 = [s0.x1, s0.x2, s0.p1, s0.p2];
    let traj = rk::integrate(&sys, 0.0, y0, t_end, &opts)?;
    let truncated = traj.halt == rk::Halt::Pole;

    let q_at = |y: &[f64; 4]| -> Result<Vec<f64>, DynError> {
        let st = PhaseState::new(y[0], y[1], y[2], y[3]);
        let b = st.binding();
        integrals
            .iter()
            .map(|(_, e)| {
                e.eval_f64(&b)
                    .map_err(|e| DynError::Eval(alloc::format!("{e}")))
            })
            .collect()
    };
    let q0 = q_at(&y0)?;
    let mut series = Vec::with_capacity(traj.steps.len() + 1);
    series.push((0.0, q0.clone()));
    let mut drifts = alloc::vec![0.0f64; integrals.len()];
    for step in &traj.steps {
        let t = step.z0 + step.h;
        let q = q_at(&step.y1)?;
        for (k, v) in q.iter().enumerate() {
            let scale = q0[k].abs().max(1.0);
            drifts[k] = drifts[k].max((v - q0[k]).abs() / scale);
        }
        series.push((t, q));
    }
    Ok(DriftReport {
        names: integrals.iter().map(|(n, _)| n.clone()).collect(),
        drifts,
        series,
        truncated,
    })
}
