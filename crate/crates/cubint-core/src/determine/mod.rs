//! Determining-equation residuals, linear compatibility conditions,
//! reduction to one-variable ODEs at regular points, and exact vanishing
//! analysis of coefficient space.

mod consistency;
mod kernel;
#[cfg(test)]
mod tests;

pub use consistency::{compat_consistency, compat_consistency_suite, random_potential_pair, random_regular_point, CompatPointReport, CompatReport};
pub use kernel::{kernel_annihilates, vanishing_kernel, KernelReport};

use crate::charts::{self, ChartError, ChartTag, Coeffs10};
use crate::expr::{diff, sum_of, Expr, ExprError};
use crate::rat::{rat, Rat};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use num_traits::{Signed, Zero};

#[derive(Clone, Debug)]
pub enum DetError {
    MomentumDependence(&'static str),
    Chart(ChartError),
    Expr(ExprError),
    SingularPoint(String),
}

impl From<ChartError> for DetError {
    fn from(e: ChartError) -> Self {
        DetError::Chart(e)
    }
}

impl From<ExprError> for DetError {
    fn from(e: ExprError) -> Self {
        DetError::Expr(e)
    }
}

impl core::fmt::Display for DetError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            DetError::MomentumDependence(which) => {
                write!(f, "{which} must not depend on momenta")
            }
            DetError::Chart(e) => write!(f, "{e}"),
            DetError::Expr(e) => write!(f, "{e}"),
            DetError::SingularPoint(m) => write!(f, "singular point: {m}"),
        }
    }
}

/// One-variable potential component: a closed-form expression in the
/// chart variable, or a sampled field with derivative stacks.
#[derive(Clone, Debug)]
pub enum PotentialComponent {
    Symbolic(Expr),
    Sampled(SampledField1D),
}

impl PotentialComponent {
    pub fn zero() -> Self {
        PotentialComponent::Symbolic(Expr::zero())
    }

    pub fn as_symbolic(&self) -> Option<&Expr> {
        match self {
            PotentialComponent::Symbolic(e) => Some(e),
            PotentialComponent::Sampled(_) => None,
        }
    }
}

/// Sampled one-variable field carrying values and first three
/// derivatives on a monotone grid.
#[derive(Clone, Debug)]
pub struct SampledField1D {
    pub xs: Vec<f64>,
    pub rows: Vec<[f64; 4]>,
}

impl SampledField1D {
    /// Piecewise-linear evaluation of the derivative stack; the grids we
    /// build are dense enough that interpolation error is negligible
    /// next to the tolerances they feed.
    pub fn eval(&self, x: f64) -> [f64; 4] {
        let n = self.xs.len();
        assert!(n >= 2, "sampled field needs at least two nodes");
        if x <= self.xs[0] {
            return self.rows[0];
        }
        if x >= self.xs[n - 1] {
            return self.rows[n - 1];
        }
        let mut lo = 0usize;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.xs[mid] <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = (x - self.xs[lo]) / (self.xs[hi] - self.xs[lo]);
        core::array::from_fn(|k| self.rows[lo][k] * (1.0 - t) + self.rows[hi][k] * t)
    }
}

/// Chart tag plus two one-variable potential components and optional
/// exact values for family parameters (a, aprime, a1, a2, sigma, ...).
#[derive(Clone, Debug)]
pub struct SeparablePotential {
    pub chart: ChartTag,
    pub comp1: PotentialComponent,
    pub comp2: PotentialComponent,
    pub params: Vec<(String, Rat)>,
}

impl SeparablePotential {
    pub fn symbolic(chart: ChartTag, v1: Expr, v2: Expr) -> Self {
        SeparablePotential {
            chart,
            comp1: PotentialComponent::Symbolic(v1),
            comp2: PotentialComponent::Symbolic(v2),
            params: Vec::new(),
        }
    }

    pub fn with_param(mut self, name: &str, value: Rat) -> Self {
        self.params.push((name.to_string(), value));
        self
    }

    /// Component with the parameter bindings substituted in.
    pub fn resolved(&self, c: &PotentialComponent) -> PotentialComponent {
        match c {
            PotentialComponent::Symbolic(e) => {
                let mut out = e.clone();
                for (name, v) in &self.params {
                    out = out.subst(name, &Expr::from_rat(v.clone()));
                }
                PotentialComponent::Symbolic(out)
            }
            PotentialComponent::Sampled(f) => PotentialComponent::Sampled(f.clone()),
        }
    }

    /// Cartesian expression of the full potential (symbolic components).
    pub fn to_cartesian_expr(&self) -> Result<Expr, DetError> {
        let c1 = self.resolved(&self.comp1);
        let c2 = self.resolved(&self.comp2);
        let v1 = c1
            .as_symbolic()
            .ok_or(DetError::MomentumDependence("sampled component"))?
            .clone();
        let v2 = c2
            .as_symbolic()
            .ok_or(DetError::MomentumDependence("sampled component"))?
            .clone();
        Ok(charts::compose_potential(self.chart, &v1, &v2)?)
    }
}

fn check_no_momenta(e: &Expr, what: &'static str) -> Result<(), DetError> {
    if e.contains_symbol("p1") || e.contains_symbol("p2") {
        Err(DetError::MomentumDependence(what))
    } else {
        Ok(())
    }
}

/// Residuals of the three second-order determining equations
///   g1_,1 = 3 F1 V_,1 + F2 V_,2
///   g1_,2 + g2_,1 = 2 (F2 V_,1 + F3 V_,2)
///   g2_,2 = F3 V_,1 + 3 F4 V_,2
/// as left minus right, normalized. V, g1, g2 in Cartesian variables.
pub fn g_residuals(
    v: &Expr,
    a: &Coeffs10,
    g1: &Expr,
    g2: &Expr,
) -> Result<[Expr; 3], DetError> {
    check_no_momenta(g1, "g1")?;
    check_no_momenta(g2, "g2")?;
    let f = charts::leading_terms(ChartTag::Cartesian, a).f;
    let v1 = diff(v, "x1", 1)?;
    let v2 = diff(v, "x2", 1)?;
    let r1 = (diff(g1, "x1", 1)?
        - (Expr::num(3) * f[0].clone() * v1.clone() + f[1].clone() * v2.clone()))
    .normalize();
    let r2 = (diff(g1, "x2", 1)? + diff(g2, "x1", 1)?
        - Expr::num(2) * (f[1].clone() * v1.clone() + f[2].clone() * v2.clone()))
    .normalize();
    let r3 = (diff(g2, "x2", 1)?
        - (f[2].clone() * v1 + Expr::num(3) * f[3].clone() * v2))
    .normalize();
    Ok([r1, r2, r3])
}

/// Residual of the zeroth-order determining equation, including the
/// quantum correction terms; hbar = 0 gives the classical condition.
pub fn zeroth_residual(
    v: &Expr,
    a: &Coeffs10,
    g1: &Expr,
    g2: &Expr,
    hbar: &Rat,
) -> Result<Expr, DetError> {
    check_no_momenta(g1, "g1")?;
    check_no_momenta(g2, "g2")?;
    let f = charts::leading_terms(ChartTag::Cartesian, a).f;
    let h2 = Expr::from_rat(hbar * hbar);
    let x1 = Expr::sym("x1");
    let x2 = Expr::sym("x2");
    let a300 = Expr::from_rat(a.0[charts::A300].clone());
    let a210 = Expr::from_rat(a.0[charts::A210].clone());
    let a201 = Expr::from_rat(a.0[charts::A201].clone());
    let corr1 = h2.clone()
        * (Expr::num(-2) * a300.clone() * x2 + Expr::ratio(1, 2) * a210);
    let corr2 = h2.clone() * (Expr::num(2) * a300 * x1 + Expr::ratio(1, 2) * a201);
    let v1 = diff(v, "x1", 1)?;
    let v2 = diff(v, "x2", 1)?;
    let v111 = diff(v, "x1", 3)?;
    let v112 = diff(&diff(v, "x1", 2)?, "x2", 1)?;
    let v122 = diff(&diff(v, "x1", 1)?, "x2", 2)?;
    let v222 = diff(v, "x2", 3)?;
    let third = sum_of([
        f[0].clone() * v111,
        f[1].clone() * v112,
        f[2].clone() * v122,
        f[3].clone() * v222,
    ]);
    Ok(((g1.clone() - corr1) * v1 + (g2.clone() - corr2) * v2
        - h2 * Expr::ratio(1, 4) * third)
        .normalize())
}

/// The linear compatibility condition eliminating g1, g2: third order in
/// V, linear in V, with the leading-term functions as coefficients.
pub fn linear_compat(v: &Expr, a: &Coeffs10) -> Result<Expr, DetError> {
    let f = charts::leading_terms(ChartTag::Cartesian, a).f;
    let d = |e: &Expr, n1: u32, n2: u32| -> Result<Expr, DetError> {
        let mut cur = e.clone();
        if n1 > 0 {
            cur = diff(&cur, "x1", n1)?;
        }
        if n2 > 0 {
            cur = diff(&cur, "x2", n2)?;
        }
        Ok(cur)
    };
    let v111 = d(v, 3, 0)?;
    let v112 = d(v, 2, 1)?;
    let v122 = d(v, 1, 2)?;
    let v222 = d(v, 0, 3)?;
    let v11 = d(v, 2, 0)?;
    let v12 = d(v, 1, 1)?;
    let v22 = d(v, 0, 2)?;
    let v1 = d(v, 1, 0)?;
    let v2 = d(v, 0, 1)?;

    let f12 = d(&f[0], 0, 1)?;
    let f122 = d(&f[0], 0, 2)?;
    let f21 = d(&f[1], 1, 0)?;
    let f22 = d(&f[1], 0, 1)?;
    let f222 = d(&f[1], 0, 2)?;
    let f212 = d(&f[1], 1, 1)?;
    let f31 = d(&f[2], 1, 0)?;
    let f32 = d(&f[2], 0, 1)?;
    let f311 = d(&f[2], 2, 0)?;
    let f312 = d(&f[2], 1, 1)?;
    let f41 = d(&f[3], 1, 0)?;
    let f411 = d(&f[3], 2, 0)?;

    Ok(sum_of([
        -(f[2].clone() * v111),
        (Expr::num(2) * f[1].clone() - Expr::num(3) * f[3].clone()) * v112,
        (Expr::num(-3) * f[0].clone() + Expr::num(2) * f[2].clone()) * v122,
        -(f[1].clone() * v222),
        Expr::num(2) * (f22.clone() - f31.clone()) * v11,
        Expr::num(2)
            * sum_of([
                Expr::num(-3) * f12,
                f21,
                f32,
                Expr::num(-3) * f41,
            ])
            * v12,
        Expr::num(2) * (f31 - f22) * v22,
        sum_of([
            Expr::num(-3) * f122,
            Expr::num(2) * f212,
            -f311,
        ]) * v1,
        sum_of([-f222, Expr::num(2) * f312, Expr::num(-3) * f411]) * v2,
    ])
    .normalize())
}

/// Coefficient arrays of the chart-specific compatibility condition:
/// condition = sum_k w1[k] · d^k(V1) + sum_k w2[k] · d^k(V2), indices
/// running 0..=3 by derivative order.
#[derive(Clone, Debug)]
pub struct CompatCoeffs {
    pub chart: ChartTag,
    pub w1: [Expr; 4],
    pub w2: [Expr; 4],
}

pub fn compat_coeffs(chart: ChartTag, a: &Coeffs10) -> CompatCoeffs {
    let lt = charts::leading_terms(chart, a);
    let f = &lt.f;
    let (q1, q2) = chart.vars();
    let d = |e: &Expr, var: &str, n: u32| diff(e, var, n).expect("chart vars");
    match chart {
        ChartTag::Cartesian => {
            let f3x = d(&f[2], q1, 1);
            let f3xx = d(&f[2], q1, 2);
            let f2y = d(&f[1], q2, 1);
            let f2yy = d(&f[1], q2, 2);
            CompatCoeffs {
                chart,
                w1: [
                    Expr::zero(),
                    (Expr::num(-6) * f3xx).normalize(),
                    (Expr::num(-4) * f3x).normalize(),
                    (-f[2].clone()).normalize(),
                ],
                w2: [
                    Expr::zero(),
                    (Expr::num(-6) * f2yy).normalize(),
                    (Expr::num(-4) * f2y).normalize(),
                    (-f[1].clone()).normalize(),
                ],
            }
        }
        ChartTag::Polar => {
            let r = Expr::sym("r");
            let f3r = d(&f[2], "r", 1);
            let f3rr = d(&f[2], "r", 2);
            let f2t = d(&f[1], "th", 1);
            let f2tt = d(&f[1], "th", 2);
            let f2r = d(&f[1], "r", 1);
            let f2tr = d(&f2t, "r", 1);
            let r2 = |k: i64| r.clone().pow_i(k);
            let w1_3 = (r2(4) * f[2].clone()).normalize();
            let w1_2 = (r.clone()
                * sum_of([
                    Expr::num(4) * r2(3) * f3r.clone(),
                    Expr::num(6) * r2(2) * f[2].clone(),
                    Expr::num(3) * f[0].clone(),
                ]))
            .normalize();
            let w1_1 = sum_of([
                Expr::num(6) * r2(4) * f3rr,
                Expr::num(20) * r2(3) * f3r,
                Expr::num(6) * r2(2) * f[2].clone(),
                Expr::num(-3) * f[0].clone(),
            ])
            .normalize();
            let w2_3 = (r2(-2) * f[1].clone()).normalize();
            let w2_2 = (Expr::num(4) * r2(-2) * f2t.clone()).normalize();
            let w2_1 = (r2(-2)
                * sum_of([
                    Expr::num(6) * f2tt,
                    Expr::num(-6) * r.clone() * f2r,
                    Expr::num(4) * f[1].clone(),
                ]))
            .normalize();
            let w2_0 = sum_of([
                r2(-2)
                    * (Expr::num(12) * r.clone() * f2tr - Expr::num(8) * f2t),
                Expr::num(-36) * r2(-3) * f[0].clone(),
            ])
            .normalize();
            CompatCoeffs {
                chart,
                w1: [Expr::zero(), w1_1, w1_2, w1_3],
                w2: [w2_0, w2_1, w2_2, w2_3],
            }
        }
        ChartTag::Parabolic => parabolic_compat(f),
        ChartTag::Elliptic => elliptic_compat(f),
    }
}

fn parabolic_compat(f: &[Expr; 4]) -> CompatCoeffs {
    let xi = Expr::sym("xi");
    let eta = Expr::sym("eta");
    let dd = (xi.clone().pow_i(2) + eta.clone().pow_i(2)).normalize();
    let dinv = |k: i64| dd.clone().pow_i(-k);
    let d = |e: &Expr, var: &str, n: u32| diff(e, var, n).expect("chart vars");

    let f1x = d(&f[0], "xi", 1);
    let f1e = d(&f[0], "eta", 1);
    let f1xe = d(&f1x, "eta", 1);
    let f3x = d(&f[2], "xi", 1);
    let f3e = d(&f[2], "eta", 1);
    let f3xx = d(&f[2], "xi", 2);
    let f3ex = d(&f3e, "xi", 1);
    let f2e = d(&f[1], "eta", 1);
    let f2x = d(&f[1], "xi", 1);
    let f2ee = d(&f[1], "eta", 2);
    let f2ex = d(&f2e, "xi", 1);
    let f4e = d(&f[3], "eta", 1);
    let f4x = d(&f[3], "xi", 1);
    let f4xe = d(&f4x, "eta", 1);

    let w1_3 = f[2].clone();
    let w1_2 = sum_of([
        Expr::num(4) * f3x.clone(),
        (f[2].clone() + Expr::num(3) * f[0].clone()) * xi.clone() * dinv(1),
    ])
    .normalize();
    let w1_1 = sum_of([
        Expr::num(6) * f3xx.clone(),
        dinv(1)
            * sum_of([
                Expr::num(6) * xi.clone() * f3x.clone(),
                Expr::num(-6) * eta.clone() * f3e.clone(),
                Expr::num(12) * xi.clone() * f1x.clone(),
                Expr::num(-3) * (f[2].clone() - Expr::num(3) * f[0].clone()),
            ]),
    ])
    .normalize();
    let c1 = sum_of([

        -(dinv(1)
            * sum_of([
                Expr::num(12) * xi.clone() * f3xx,
                Expr::num(-12) * eta.clone() * f3ex,
                Expr::num(12)
                    * eta.clone().pow_i(-1)
                    * (Expr::num(2) * eta.clone().pow_i(2) - xi.clone().pow_i(2))
                    * f1xe,
            ])),
        -(dinv(2)
            * sum_of([
                Expr::num(24) * (xi.clone().pow_i(2) - eta.clone().pow_i(2)) * f3x,
                Expr::num(-24) * xi.clone() * eta.clone() * f3e,
                Expr::num(12)
                    * eta.clone().pow_i(-2)
                    * sum_of([
                        Expr::num(4) * eta.clone().pow_i(4),
                        Expr::num(-2) * eta.clone().pow_i(2) * xi.clone().pow_i(2),
                        xi.clone().pow_i(4),
                    ])
                    * f1x,
                Expr::num(12)
                    * (Expr::num(4) * eta.clone().pow_i(2)
                        - Expr::num(3) * xi.clone().pow_i(2))
                    * xi.clone()
                    * eta.clone().pow_i(-1)
                    * f1e,
            ])),
        -(Expr::num(12)
            * xi.clone()
            * sum_of([
                Expr::num(2) * eta.clone().pow_i(4) * f[2].clone(),
                Expr::num(3)
                    * (xi.clone().pow_i(4) - xi.clone().pow_i(2) * eta.clone().pow_i(2))
                    * f[0].clone(),
            ])
            * eta.clone().pow_i(-2)
            * dinv(3)),
    ])
    .normalize();

    let w2_3 = f[1].clone();
    let w2_2 = sum_of([
        Expr::num(4) * f2e.clone(),
        (f[1].clone() + Expr::num(3) * f[3].clone()) * eta.clone() * dinv(1),
    ])
    .normalize();
    let w2_1 = sum_of([
        Expr::num(6) * f2ee.clone(),
        dinv(1)
            * sum_of([
                Expr::num(6)
                    * sum_of([
                        eta.clone() * f2e.clone(),
                        -(xi.clone() * f2x.clone()),
                        Expr::num(2) * eta.clone() * f4e.clone(),
                    ]),
                Expr::num(-3) * (f[1].clone() - Expr::num(3) * f[3].clone()),
            ]),
    ])
    .normalize();
    let c2 = sum_of([
        -(dinv(1)
            * sum_of([
                Expr::num(12) * eta.clone() * f2ee,
                Expr::num(-12) * xi.clone() * f2ex,
                Expr::num(12)
                    * xi.clone().pow_i(-1)
                    * (Expr::num(2) * xi.clone().pow_i(2) - eta.clone().pow_i(2))
                    * f4xe,
            ])),
        dinv(2)
            * sum_of([
                Expr::num(24) * (xi.clone().pow_i(2) - eta.clone().pow_i(2)) * f2e,
                Expr::num(24) * xi.clone() * eta.clone() * f2x,
                Expr::num(-12)
                    * xi.clone().pow_i(-2)
                    * sum_of([
                        Expr::num(4) * xi.clone().pow_i(4),
                        Expr::num(-2) * eta.clone().pow_i(2) * xi.clone().pow_i(2),
                        eta.clone().pow_i(4),
                    ])
                    * f4e,
                Expr::num(-12)
                    * (Expr::num(4) * xi.clone().pow_i(2)
                        - Expr::num(3) * eta.clone().pow_i(2))
                    * xi.clone().pow_i(-1)
                    * eta.clone()
                    * f4x,
            ]),
        -(Expr::num(12)
            * eta.clone()
            * sum_of([
                Expr::num(2) * xi.clone().pow_i(4) * f[1].clone(),
                Expr::num(3)
                    * (eta.clone().pow_i(4) - xi.clone().pow_i(2) * eta.clone().pow_i(2))
                    * f[3].clone(),
            ])
            * xi.clone().pow_i(-2)
            * dinv(3)),
    ])
    .normalize();

    CompatCoeffs {
        chart: ChartTag::Parabolic,
        w1: [c1, w1_1, w1_2, w1_3.normalize()],
        w2: [c2, w2_1, w2_2, w2_3.normalize()],
    }
}

/// The nine fraction-terms of the elliptic zeroth-order coefficient,
/// exposed for transcription diagnostics.
pub fn elliptic_c1_pieces(a: &Coeffs10) -> Vec<Expr> {
    let f = charts::leading_terms(ChartTag::Elliptic, a).f;
    elliptic_c1_piece_list(&f)
}

fn elliptic_compat(f: &[Expr; 4]) -> CompatCoeffs {
    let u = || Expr::sym("u");
    let v = || Expr::sym("v");
    let u2 = || u().pow_i(2);
    let v2 = || v().pow_i(2);
    let s2 = || (Expr::one() - u2()).normalize();
    let t2 = || (v2() - Expr::one()).normalize();
    let uv = (u2() - v2()).normalize();
    let uvp = |k: i64| uv.clone().pow_i(k);
    let d = |e: &Expr, var: &str, n: u32| diff(e, var, n).expect("chart vars");

    let f1u = d(&f[0], "u", 1);
    let f3u = d(&f[2], "u", 1);
    let f3v = d(&f[2], "v", 1);
    let f3uu = d(&f[2], "u", 2);
    let f2u = d(&f[1], "u", 1);
    let f2v = d(&f[1], "v", 1);
    let f2vv = d(&f[1], "v", 2);
    let f2vu = d(&f2v, "u", 1);
    let f4u = d(&f[3], "u", 1);
    let f4v = d(&f[3], "v", 1);
    let f4vu = d(&f4v, "u", 1);

    let w1_3 = (f[2].clone() * s2() * t2().pow_i(-1)).normalize();
    let w1_2 = sum_of([
        Expr::num(4) * s2() * f3u.clone() * t2().pow_i(-1),
        -(u() * (f[2].clone() - Expr::num(3) * f[0].clone()) * uvp(-1)),
    ])
    .normalize();
    let w1_1 = sum_of([
        Expr::num(6) * f3uu.clone() * s2() * t2().pow_i(-1),
        sum_of([
            Expr::num(-2)
                * u()
                * (Expr::num(2) * u2() + v2() - Expr::num(3))
                * f3u.clone(),
            Expr::num(6)
                * t2()
                * (v() * f3v.clone() + Expr::num(2) * u() * f1u.clone()),
        ]) * t2().pow_i(-1)
            * uvp(-1),
        sum_of([
            sum_of([
                u2() * v2(),
                Expr::num(11) * u2(),
                Expr::num(-9) * v2(),
                Expr::num(-3),
            ]) * f[2].clone(),
            Expr::num(3) * (Expr::num(5) * u2() + Expr::num(3)) * t2() * f[0].clone(),
        ]) * s2().pow_i(-1)
            * t2().pow_i(-1)
            * uvp(-1),
    ])
    .normalize();
    let c1 = sum_of(elliptic_c1_piece_list(f)).normalize();

    let w2_3 = (f[1].clone() * t2() * s2().pow_i(-1)).normalize();
    let w2_2 = sum_of([
        Expr::num(4) * t2() * f2v.clone() * s2().pow_i(-1),
        v() * (f[1].clone() - Expr::num(3) * f[3].clone()) * uvp(-1),
    ])
    .normalize();
    let w2_1 = sum_of([
        Expr::num(6) * f2vv.clone() * t2() * s2().pow_i(-1),
        -(sum_of([
            Expr::num(2)
                * v()
                * (u2() + Expr::num(2) * v2() - Expr::num(3))
                * f2v.clone(),
            Expr::num(6)
                * s2()
                * (u() * f2u.clone() + Expr::num(2) * v() * f4v.clone()),
        ]) * s2().pow_i(-1)
            * uvp(-1)),
        -(sum_of([
            sum_of([
                u2() * v2(),
                Expr::num(11) * v2(),
                Expr::num(-9) * u2(),
                Expr::num(-3),
            ]) * f[1].clone(),
            Expr::num(-3) * (Expr::num(5) * v2() + Expr::num(3)) * s2() * f[3].clone(),
        ]) * s2().pow_i(-1)
            * t2().pow_i(-1)
            * uvp(-1)),
    ])
    .normalize();
    let c2 = sum_of([
        Expr::num(12) * v() * t2() * f2vv * s2().pow_i(-1) * uvp(-1),
        Expr::num(12) * u() * f2vu * uvp(-1),
        Expr::num(-4)
            * sum_of([
                u().pow_i(4),
                Expr::num(7) * u2() * v2(),
                Expr::num(4) * v().pow_i(4),
                Expr::num(-6) * u2(),
                Expr::num(-6) * v2(),
            ])
            * f2v
            * uvp(-2)
            * s2().pow_i(-1),
        Expr::num(-12) * v() * u() * (u2() + v2() - Expr::num(2)) * f2u
            * uvp(-2)
            * t2().pow_i(-1),
        Expr::num(4)
            * v()
            * sum_of([
                u().pow_i(6),
                Expr::num(-8) * u().pow_i(4) * v2(),
                u2() * v().pow_i(4),
                Expr::num(11) * u().pow_i(4),
                Expr::num(-4) * u2() * v2(),
                Expr::num(5) * v().pow_i(4),
                Expr::num(-6) * u2(),
            ])
            * f[1].clone()
            * uvp(-3)
            * s2().pow_i(-1)
            * t2().pow_i(-1),
        Expr::num(12)
            * sum_of([
                u().pow_i(4),
                Expr::num(2) * u2() * v2(),
                Expr::num(-2) * u2(),
                -v2(),
            ])
            * f4vu
            * uvp(-1)
            * t2().pow_i(-1)
            * u().pow_i(-1),
        Expr::num(-12)
            * sum_of([
                u().pow_i(8),
                Expr::num(4) * u().pow_i(6) * v2(),
                Expr::num(2) * u().pow_i(4) * v().pow_i(4),
                Expr::num(-4) * u().pow_i(6),
                Expr::num(-8) * u().pow_i(4) * v2(),
                Expr::num(-2) * u2() * v().pow_i(4),
                Expr::num(4) * u().pow_i(4),
                Expr::num(2) * u2() * v2(),
                v().pow_i(4),
            ])
            * f4v
            * uvp(-2)
            * s2().pow_i(-1)
            * t2().pow_i(-1)
            * u().pow_i(-2),
        Expr::num(-12)
            * v()
            * sum_of([
                Expr::num(3) * u().pow_i(6),
                Expr::num(4) * u().pow_i(4) * v2(),
                Expr::num(-7) * u().pow_i(4),
                Expr::num(-7) * u2() * v2(),
                Expr::num(4) * u2(),
                Expr::num(3) * v2(),
            ])
            * f4u
            * uvp(-2)
            * t2().pow_i(-2)
            * u().pow_i(-1),
        Expr::num(-12)
            * v()
            * sum_of([
                Expr::num(3) * u().pow_i(8),
                Expr::num(5) * u().pow_i(6) * v2(),
                Expr::num(-4) * u().pow_i(4) * v().pow_i(4),
                Expr::num(2) * u2() * v().pow_i(6),
                Expr::num(-5) * u().pow_i(6),
                Expr::num(-2) * u().pow_i(4) * v2(),
                Expr::num(-5) * u2() * v().pow_i(4),
                Expr::num(3) * u2() * v2(),
                Expr::num(3) * v().pow_i(4),
            ])
            * f[3].clone()
            * uvp(-3)
            * t2().pow_i(-2)
            * u().pow_i(-2),
    ])
    .normalize();

    CompatCoeffs {
        chart: ChartTag::Elliptic,
        w1: [c1, w1_1, w1_2, w1_3],
        w2: [c2, w2_1, w2_2, w2_3],
    }
}

/// Chart-specific compatibility residual for concrete potential
/// components (expressions in the chart's own variables).
pub fn chart_compat(
    chart: ChartTag,
    a: &Coeffs10,
    v1: &Expr,
    v2: &Expr,
) -> Result<Expr, DetError> {
    let cc = compat_coeffs(chart, a);
    let (q1, q2) = chart.vars();
    let mut items = Vec::with_capacity(8);
    for k in 0..4u32 {
        let d1 = diff(v1, q1, k)?;
        if !d1.is_zero() {
            items.push(cc.w1[k as usize].clone() * d1);
        }
        let d2 = diff(v2, q2, k)?;
        if !d2.is_zero() {
            items.push(cc.w2[k as usize].clone() * d2);
        }
    }
    Ok(sum_of(items).normalize())
}

/// Which potential component a reduction targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Component1,
    Component2,
}

/// Third-order linear ODE extracted from the compatibility condition by
/// freezing the other variable at a regular point. Unknown values of the
/// frozen component enter the inhomogeneity as named constants K0..K3.
#[derive(Clone, Debug)]
pub struct LinearOdeSpec {
    pub var: String,
    /// Coefficients of derivative orders 3, 2, 1, 0 of the target.
    pub coeffs: [Expr; 4],
    /// (constant name, multiplier expression) pairs; the named constant
    /// Kk stands for the k-th derivative of the frozen component at the
    /// fixed point.
    pub inhomogeneity: Vec<(String, Expr)>,
    pub fixed_var: String,
    pub fixed_value: Rat,
    /// All coefficients vanish identically: the condition is identically
    /// satisfied and the reduction carries no information.
    pub degenerate: bool,
}

impl LinearOdeSpec {
    /// Apply the homogeneous part: sum_k coeffs[k] * d^(3-k) target.
    pub fn apply_homogeneous(&self, target: &Expr) -> Result<Expr, DetError> {
        let mut items = Vec::with_capacity(4);
        for (i, c) in self.coeffs.iter().enumerate() {
            let order = (3 - i) as u32;
            let d = diff(target, &self.var, order)?;
            if !c.is_zero() && !d.is_zero() {
                items.push(c.clone() * d);
            }
        }
        Ok(sum_of(items).normalize())
    }
}

fn frozen_point_regular(chart: ChartTag, var: &str, value: &Rat) -> bool {
    let zero = value.is_zero();
    match (chart, var) {
        (ChartTag::Cartesian, _) => true,
        (ChartTag::Polar, "r") => value > &Rat::zero(),
        (ChartTag::Polar, _) => true,
        (ChartTag::Parabolic, _) => !zero,
        (ChartTag::Elliptic, "u") => {
            !zero && value.clone().abs() < rat(1, 1)
        }
        (ChartTag::Elliptic, _) => value > &rat(1, 1),
    }
}

pub fn reduce_to_ode(
    chart: ChartTag,
    a: &Coeffs10,
    target: Target,
    fixed: Rat,
) -> Result<LinearOdeSpec, DetError> {
    let cc = compat_coeffs(chart, a);
    let (q1, q2) = chart.vars();
    let (tvar, fvar, tside, oside) = match target {
        Target::Component1 => (q1, q2, &cc.w1, &cc.w2),
        Target::Component2 => (q2, q1, &cc.w2, &cc.w1),
    };
    if !frozen_point_regular(chart, fvar, &fixed) {
        return Err(DetError::SingularPoint(alloc::format!(
            "{fvar} = {} is singular for the {} chart",
            crate::rat::format_rat(&fixed),
            chart.name()
        )));
    }
    let fixed_expr = Expr::from_rat(fixed.clone());
    let freeze = |e: &Expr| e.subst(fvar, &fixed_expr);
    let coeffs: [Expr; 4] = [
        freeze(&tside[3]),
        freeze(&tside[2]),
        freeze(&tside[1]),
        freeze(&tside[0]),
    ];
    let mut inhomogeneity = Vec::new();
    for k in 0..4usize {
        let m = freeze(&oside[k]);
        if !m.is_zero() {
            inhomogeneity.push((alloc::format!("K{k}"), m));
        }
    }
    let degenerate = coeffs.iter().all(|c| c.is_zero()) && inhomogeneity.is_empty();
    Ok(LinearOdeSpec {
        var: tvar.to_string(),
        coeffs,
        inhomogeneity,
        fixed_var: fvar.to_string(),
        fixed_value: fixed,
        degenerate,
    })
}

fn elliptic_c1_piece_list(f: &[Expr; 4]) -> Vec<Expr> {
    let u = || Expr::sym("u");
    let v = || Expr::sym("v");
    let u2 = || u().pow_i(2);
    let v2 = || v().pow_i(2);
    let s2 = || (Expr::one() - u2()).normalize();
    let t2 = || (v2() - Expr::one()).normalize();
    let uv = (u2() - v2()).normalize();
    let uvp = |k: i64| uv.clone().pow_i(k);
    let d = |e: &Expr, var: &str, n: u32| diff(e, var, n).expect("chart vars");
    let f1u = d(&f[0], "u", 1);
    let f1v = d(&f[0], "v", 1);
    let f1vu = d(&f1v, "u", 1);
    let f3u = d(&f[2], "u", 1);
    let f3v = d(&f[2], "v", 1);
    let f3uu = d(&f[2], "u", 2);
    let f3vu = d(&f3v, "u", 1);
    alloc::vec![
        Expr::num(-12) * u() * s2() * f3uu * t2().pow_i(-1) * uvp(-1),
        Expr::num(-12) * v() * f3vu * uvp(-1),
        Expr::num(4)
            * sum_of([
                Expr::num(4) * u().pow_i(4),
                Expr::num(7) * u2() * v2(),
                v().pow_i(4),
                Expr::num(-6) * u2(),
                Expr::num(-6) * v2(),
            ])
            * f3u
            * uvp(-2)
            * t2().pow_i(-1),
        Expr::num(12) * v() * u() * (u2() + v2() - Expr::num(2)) * f3v
            * uvp(-2)
            * s2().pow_i(-1),
        // sign fixed against the pulled-back general condition (the
        // pointwise delta-potential fit pins this term at -1)
        Expr::num(-4)
            * u()
            * sum_of([
                u().pow_i(4) * v2(),
                Expr::num(-8) * u2() * v().pow_i(4),
                v().pow_i(6),
                Expr::num(5) * u().pow_i(4),
                Expr::num(-4) * u2() * v2(),
                Expr::num(11) * v().pow_i(4),
                Expr::num(-6) * v2(),
            ])
            * f[2].clone()
            * uvp(-3)
            * s2().pow_i(-1)
            * t2().pow_i(-1),
        Expr::num(12)
            * sum_of([
                Expr::num(2) * u2() * v2(),
                v().pow_i(4),
                -u2(),
                Expr::num(-2) * v2(),
            ])
            * f1vu
            * uvp(-1)
            * s2().pow_i(-1)
            * v().pow_i(-1),
        Expr::num(-12)
            * sum_of([
                Expr::num(2) * u().pow_i(4) * v().pow_i(4),
                Expr::num(4) * u2() * v().pow_i(6),
                v().pow_i(8),
                Expr::num(-2) * u().pow_i(4) * v2(),
                Expr::num(-8) * u2() * v().pow_i(4),
                Expr::num(-4) * v().pow_i(6),
                u().pow_i(4),
                Expr::num(2) * u2() * v2(),
                Expr::num(4) * v().pow_i(4),
            ])
            * f1u
            * uvp(-2)
            * s2().pow_i(-1)
            * t2().pow_i(-1)
            * v().pow_i(-2),
        Expr::num(-12)
            * u()
            * sum_of([
                Expr::num(4) * u2() * v().pow_i(4),
                Expr::num(3) * v().pow_i(6),
                Expr::num(-7) * u2() * v2(),
                Expr::num(-7) * v().pow_i(4),
                Expr::num(3) * u2(),
                Expr::num(4) * v2(),
            ])
            * f1v
            * uvp(-2)
            * s2().pow_i(-2)
            * v().pow_i(-1),
        Expr::num(12)
            * u()
            * sum_of([
                Expr::num(2) * u().pow_i(6) * v2(),
                Expr::num(-4) * u().pow_i(4) * v().pow_i(4),
                Expr::num(5) * u2() * v().pow_i(6),
                Expr::num(3) * v().pow_i(8),
                Expr::num(-5) * u().pow_i(4) * v2(),
                Expr::num(-2) * u2() * v().pow_i(4),
                Expr::num(-5) * v().pow_i(6),
                Expr::num(3) * u().pow_i(4),
                Expr::num(3) * u2() * v2(),
            ])
            * f[0].clone()
            * uvp(-3)
            * s2().pow_i(-2)
            * v().pow_i(-2),
    ]
    .into_iter()
    .map(|e: Expr| e.normalize())
    .collect()
}
