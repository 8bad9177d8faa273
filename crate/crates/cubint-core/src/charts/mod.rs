//! Coordinate charts, chart-to-Cartesian maps, the leading-term functions
//! F1..F4 of the cubic-in-momenta integral for every chart, and the
//! Cartesian-to-polar coefficient dictionary.
//!
//! Chart formulas are transcribed literally and cross-validated by a
//! numeric pullback property (the chart leading terms must equal the
//! Cartesian ones transformed as third-order symbol components under the
//! chart Jacobian) rather than derived at runtime.

use crate::expr::{prod_of, sum_of, Expr};
use crate::rat::{rat, rat_i, Rat};
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;

pub const COEFF_NAMES: [&str; 10] = [
    "A300", "A210", "A201", "A120", "A111", "A102", "A030", "A021", "A012", "A003",
];

pub const A300: usize = 0;
pub const A210: usize = 1;
pub const A201: usize = 2;
pub const A120: usize = 3;
pub const A111: usize = 4;
pub const A102: usize = 5;
pub const A030: usize = 6;
pub const A021: usize = 7;
pub const A012: usize = 8;
pub const A003: usize = 9;

/// The ten leading-order constants of a third-order integral, exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coeffs10(pub [Rat; 10]);

impl Coeffs10 {
    pub fn zero() -> Self {
        Coeffs10(core::array::from_fn(|_| Rat::zero()))
    }

    pub fn unit(idx: usize) -> Self {
        let mut c = Self::zero();
        c.0[idx] = rat_i(1);
        c
    }

    pub fn from_named(pairs: &[(&str, Rat)]) -> Option<Self> {
        let mut c = Self::zero();
        for (name, v) in pairs {
            let idx = COEFF_NAMES.iter().position(|n| n == name)?;
            c.0[idx] = v.clone();
        }
        Some(c)
    }

    pub fn get(&self, name: &str) -> Option<&Rat> {
        let idx = COEFF_NAMES.iter().position(|n| *n == name)?;
        Some(&self.0[idx])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|r| r.is_zero())
    }

    pub fn scale(&self, s: &Rat) -> Self {
        Coeffs10(core::array::from_fn(|i| &self.0[i] * s))
    }
}

/// Polar-basis coefficients related to `Coeffs10` by an invertible
/// linear dictionary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolarCoeffs {
    pub a1: Rat,
    pub a2: Rat,
    pub a3: Rat,
    pub a4: Rat,
    pub b0: Rat,
    pub b1: Rat,
    pub b2: Rat,
    pub c1: Rat,
    pub c2: Rat,
    pub d0: Rat,
}

pub fn cartesian_to_polar_coeffs(a: &Coeffs10) -> PolarCoeffs {
    let q = |i: usize| a.0[i].clone();
    PolarCoeffs {
        a1: (q(A030) - q(A012)) / rat_i(4),
        a2: (q(A021) - q(A003)) / rat_i(4),
        a3: (q(A030) * rat_i(3) + q(A012)) / rat_i(4),
        a4: (q(A003) * rat_i(3) + q(A021)) / rat_i(4),
        b1: (q(A120) - q(A102)) / rat_i(2),
        b2: q(A111) / rat_i(2),
        b0: (q(A120) + q(A102)) / rat_i(2),
        c1: q(A210),
        c2: q(A201),
        d0: q(A300),
    }
}

pub fn polar_to_cartesian_coeffs(p: &PolarCoeffs) -> Coeffs10 {
    let mut c = Coeffs10::zero();
    c.0[A030] = &p.a1 + &p.a3;
    c.0[A012] = &p.a3 - &p.a1 * rat_i(3);
    c.0[A021] = &p.a2 * rat_i(3) + &p.a4;
    c.0[A003] = &p.a4 - &p.a2;
    c.0[A120] = &p.b0 + &p.b1;
    c.0[A102] = &p.b0 - &p.b1;
    c.0[A111] = &p.b2 * rat_i(2);
    c.0[A210] = p.c1.clone();
    c.0[A201] = p.c2.clone();
    c.0[A300] = p.d0.clone();
    c
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChartTag {
    Cartesian,
    Polar,
    Parabolic,
    Elliptic,
}

impl ChartTag {
    pub fn vars(self) -> (&'static str, &'static str) {
        match self {
            ChartTag::Cartesian => ("x1", "x2"),
            ChartTag::Polar => ("r", "th"),
            ChartTag::Parabolic => ("xi", "eta"),
            ChartTag::Elliptic => ("u", "v"),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ChartTag::Cartesian => "cartesian",
            ChartTag::Polar => "polar",
            ChartTag::Parabolic => "parabolic",
            ChartTag::Elliptic => "elliptic",
        }
    }

    pub fn parse(s: &str) -> Option<ChartTag> {
        match s {
            "cartesian" => Some(ChartTag::Cartesian),
            "polar" => Some(ChartTag::Polar),
            "parabolic" => Some(ChartTag::Parabolic),
            "elliptic" => Some(ChartTag::Elliptic),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChartError {
    Domain { constraint: String },
    Mismatch { expected: &'static str, got: &'static str },
    BadComponent(String),
}

impl core::fmt::Display for ChartError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ChartError::Domain { constraint } => {
                write!(f, "point outside chart domain: violates {constraint}")
            }
            ChartError::Mismatch { expected, got } => {
                write!(f, "chart mismatch: expected {expected}, got {got}")
            }
            ChartError::BadComponent(m) => write!(f, "bad potential component: {m}"),
        }
    }
}

/// Check a chart point against the chart's stated domain.
pub fn domain_check(tag: ChartTag, q: [f64; 2]) -> Result<(), ChartError> {
    match tag {
        ChartTag::Cartesian => Ok(()),
        ChartTag::Polar => {
            if q[0] > 0.0 {
                Ok(())
            } else {
                Err(ChartError::Domain {
                    constraint: String::from("r > 0"),
                })
            }
        }
        ChartTag::Parabolic => {
            if q[0] * q[0] + q[1] * q[1] > 0.0 {
                Ok(())
            } else {
                Err(ChartError::Domain {
                    constraint: String::from("xi^2 + eta^2 > 0"),
                })
            }
        }
        ChartTag::Elliptic => {
            if !(-1.0..=1.0).contains(&q[0]) {
                return Err(ChartError::Domain {
                    constraint: String::from("-1 <= u <= 1"),
                });
            }
            if q[1] < 1.0 {
                return Err(ChartError::Domain {
                    constraint: String::from("v >= 1"),
                });
            }
            Ok(())
        }
    }
}

/// Map a chart point into Cartesian coordinates (elliptic covers x2 >= 0).
pub fn to_cartesian(tag: ChartTag, q: [f64; 2]) -> Result<[f64; 2], ChartError> {
    domain_check(tag, q)?;
    Ok(match tag {
        ChartTag::Cartesian => q,
        ChartTag::Polar => [q[0] * q[1].cos(), q[0] * q[1].sin()],
        ChartTag::Parabolic => [(q[0] * q[0] - q[1] * q[1]) / 2.0, q[0] * q[1]],
        ChartTag::Elliptic => {
            let (u, v) = (q[0], q[1]);
            [u * v, (1.0 - u * u).max(0.0).sqrt() * (v * v - 1.0).max(0.0).sqrt()]
        }
    })
}

/// Forward Jacobian d(x1,x2)/d(q1,q2) at a chart point.
pub fn jacobian(tag: ChartTag, q: [f64; 2]) -> [[f64; 2]; 2] {
    match tag {
        ChartTag::Cartesian => [[1.0, 0.0], [0.0, 1.0]],
        ChartTag::Polar => {
            let (r, th) = (q[0], q[1]);
            [[th.cos(), -r * th.sin()], [th.sin(), r * th.cos()]]
        }
        ChartTag::Parabolic => {
            let (xi, eta) = (q[0], q[1]);
            [[xi, -eta], [eta, xi]]
        }
        ChartTag::Elliptic => {
            let (u, v) = (q[0], q[1]);
            let s = (1.0 - u * u).sqrt();
            let t = (v * v - 1.0).sqrt();
            [[v, u], [-u * t / s, v * s / t]]
        }
    }
}

/// Matrix M with p_cartesian = M · p_chart (inverse transpose Jacobian).
pub fn momentum_transform(tag: ChartTag, q: [f64; 2]) -> [[f64; 2]; 2] {
    let j = jacobian(tag, q);
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    // (J^T)^{-1} = (J^{-1})^T
    [
        [j[1][1] / det, -j[1][0] / det],
        [-j[0][1] / det, j[0][0] / det],
    ]
}

/// Leading-term functions of a chart; for the elliptic chart the
/// denominator-free numerators are kept alongside.
#[derive(Clone, Debug)]
pub struct LeadingTerms {
    pub chart: ChartTag,
    pub f: [Expr; 4],
    pub fhat: Option<[Expr; 4]>,
}

pub fn leading_terms(chart: ChartTag, a: &Coeffs10) -> LeadingTerms {
    let coeff = |i: usize| Expr::from_rat(a.0[i].clone());
    leading_terms_with(chart, &coeff)
}

/// Leading terms with arbitrary coefficient expressions in the ten slots
/// (rationals for concrete candidates, named parameters for kernel rows).
pub fn leading_terms_with(chart: ChartTag, a: &dyn Fn(usize) -> Expr) -> LeadingTerms {
    match chart {
        ChartTag::Cartesian => LeadingTerms {
            chart,
            f: cartesian_f(a).map(|e| e.normalize()),
            fhat: None,
        },
        ChartTag::Polar => LeadingTerms {
            chart,
            f: polar_f(a).map(|e| e.normalize()),
            fhat: None,
        },
        ChartTag::Parabolic => LeadingTerms {
            chart,
            f: parabolic_groups(a)
                .map(|groups| assemble_inverse_powers(groups, &parabolic_denom(), 0)),
            fhat: None,
        },
        ChartTag::Elliptic => {
            let fhat = elliptic_fhat(a).map(|e| e.normalize());
            let dinv = (Expr::sym("u").pow_i(2) - Expr::sym("v").pow_i(2)).pow_i(-3);
            let f = core::array::from_fn(|j| (fhat[j].clone() * dinv.clone()).normalize());
            LeadingTerms {
                chart,
                f,
                fhat: Some(fhat),
            }
        }
    }
}

/// Denominator-free forms used by the exact kernel analysis: the elliptic
/// numerators, the parabolic leading terms scaled by (xi^2+eta^2)^3, and
/// the Cartesian/polar leading terms unchanged.
pub fn cleared_terms_with(chart: ChartTag, a: &dyn Fn(usize) -> Expr) -> [Expr; 4] {
    match chart {
        ChartTag::Cartesian | ChartTag::Polar => leading_terms_with(chart, a).f,
        ChartTag::Parabolic => parabolic_groups(a)
            .map(|groups| assemble_inverse_powers(groups, &parabolic_denom(), 3)),
        ChartTag::Elliptic => elliptic_fhat(a).map(|e| e.normalize()),
    }
}

fn cartesian_f(a: &dyn Fn(usize) -> Expr) -> [Expr; 4] {
    let x1 = Expr::sym("x1");
    let x2 = Expr::sym("x2");
    let f1 = sum_of([
        -(a(A300) * x2.clone().pow_i(3)),
        a(A210) * x2.clone().pow_i(2),
        -(a(A120) * x2.clone()),
        a(A030),
    ]);
    let f2 = sum_of([
        Expr::num(3) * a(A300) * x1.clone() * x2.clone().pow_i(2),
        Expr::num(-2) * a(A210) * x1.clone() * x2.clone(),
        a(A201) * x2.clone().pow_i(2),
        a(A120) * x1.clone(),
        -(a(A111) * x2.clone()),
        a(A021),
    ]);
    let f3 = sum_of([
        Expr::num(-3) * a(A300) * x1.clone().pow_i(2) * x2.clone(),
        Expr::num(-2) * a(A201) * x1.clone() * x2.clone(),
        a(A210) * x1.clone().pow_i(2),
        a(A111) * x1.clone(),
        -(a(A102) * x2.clone()),
        a(A012),
    ]);
    let f4 = sum_of([
        a(A300) * x1.clone().pow_i(3),
        a(A201) * x1.clone().pow_i(2),
        a(A102) * x1,
        a(A003),
    ]);
    [f1, f2, f3, f4]
}

fn polar_f(a: &dyn Fn(usize) -> Expr) -> [Expr; 4] {
    let r = Expr::sym("r");
    let th = || Expr::sym("th");
    let sin = |k: i64| (Expr::num(k) * th()).sin();
    let cos = |k: i64| (Expr::num(k) * th()).cos();
    let q4 = || Expr::ratio(1, 4);
    let q2 = || Expr::ratio(1, 2);
    // dictionary images of the ten coefficients
    let a1 = (a(A030) - a(A012)) * q4();
    let a2 = (a(A021) - a(A003)) * q4();
    let a3 = (Expr::num(3) * a(A030) + a(A012)) * q4();
    let a4 = (Expr::num(3) * a(A003) + a(A021)) * q4();
    let b1 = (a(A120) - a(A102)) * q2();
    let b2 = a(A111) * q2();
    let b0 = (a(A120) + a(A102)) * q2();
    let c1 = a(A210);
    let c2 = a(A201);
    let d0 = a(A300);

    let f1 = sum_of([
        a1.clone() * cos(3),
        a2.clone() * sin(3),
        a3.clone() * cos(1),
        a4.clone() * sin(1),
    ]);
    let f2 = sum_of([
        sum_of([
            Expr::num(-3) * a1.clone() * sin(3),
            Expr::num(3) * a2.clone() * cos(3),
            -(a3.clone() * sin(1)),
            a4.clone() * cos(1),
        ]) * r.clone().pow_i(-1),
        b1.clone() * cos(2),
        b2.clone() * sin(2),
        b0.clone(),
    ]);
    let f3 = sum_of([
        sum_of([
            Expr::num(-3) * a1.clone() * cos(3),
            Expr::num(-3) * a2.clone() * sin(3),
            a3.clone() * cos(1),
            a4.clone() * sin(1),
        ]) * r.clone().pow_i(-2),
        sum_of([
            Expr::num(-2) * b1.clone() * sin(2),
            Expr::num(2) * b2.clone() * cos(2),
        ]) * r.clone().pow_i(-1),
        c1.clone() * cos(1),
        c2.clone() * sin(1),
    ]);
    let f4 = sum_of([
        sum_of([
            a1 * sin(3),
            -(a2 * cos(3)),
            -(a3 * sin(1)),
            a4 * cos(1),
        ]) * r.clone().pow_i(-3),
        -(sum_of([b1 * cos(2), b2 * sin(2), -b0]) * r.clone().pow_i(-2)),
        -(sum_of([c1 * sin(1), -(c2 * cos(1))]) * r.pow_i(-1)),
        d0,
    ]);
    [f1, f2, f3, f4]
}

fn parabolic_denom() -> Expr {
    (Expr::sym("xi").pow_i(2) + Expr::sym("eta").pow_i(2)).normalize()
}

/// Groups (numerator, k) so that F = sum numerator · (xi^2+eta^2)^(-k).
type PowerGroups = Vec<(Expr, i64)>;

fn assemble_inverse_powers(groups: PowerGroups, denom: &Expr, clear_to: i64) -> Expr {
    let mut items = Vec::new();
    for (num, k) in groups {
        let p = clear_to - k;
        let piece = if p == 0 {
            num
        } else {
            num * denom.clone().pow_i(p)
        };
        items.push(piece);
    }
    sum_of(items).normalize()
}

fn parabolic_groups(a: &dyn Fn(usize) -> Expr) -> [PowerGroups; 4] {
    let xi = || Expr::sym("xi");
    let eta = || Expr::sym("eta");
    let x3 = || xi().pow_i(3);
    let e3 = || eta().pow_i(3);
    let x2 = || xi().pow_i(2);
    let e2 = || eta().pow_i(2);

    let f1 = alloc::vec![
        (-(Expr::ratio(1, 8) * e3() * a(A300)), 0),
        (
            Expr::ratio(1, 4) * e2() * (xi() * a(A210) + eta() * a(A201)),
            1
        ),
        (
            -(Expr::ratio(1, 2)
                * (x2() * eta() * a(A120) + e2() * xi() * a(A111) + e3() * a(A102))),
            2
        ),
        (
            sum_of([
                x3() * a(A030),
                x2() * eta() * a(A021),
                e2() * xi() * a(A012),
                e3() * a(A003),
            ]),
            3
        ),
    ];
    let f2 = alloc::vec![
        (Expr::ratio(3, 8) * e2() * xi() * a(A300), 0),
        (
            -(Expr::ratio(1, 4)
                * (eta() * (e2() + Expr::num(2) * x2()) * a(A210) + e2() * xi() * a(A201))),
            1
        ),
        (
            Expr::ratio(1, 2)
                * sum_of([
                    xi() * (Expr::num(2) * e2() + x2()) * a(A120),
                    e3() * a(A111),
                    -(e2() * xi() * a(A102)),
                ]),
            2
        ),
        (
            -(sum_of([
                Expr::num(3) * x2() * eta() * a(A030),
                xi() * (Expr::num(2) * e2() - x2()) * a(A021),
                eta() * (e2() - Expr::num(2) * x2()) * a(A012),
                Expr::num(-3) * e2() * xi() * a(A003),
            ])),
            3
        ),
    ];
    let f3 = alloc::vec![
        (-(Expr::ratio(3, 8) * eta() * x2() * a(A300)), 0),
        (
            Expr::ratio(1, 4)
                * (xi() * (Expr::num(2) * e2() + x2()) * a(A210) - eta() * x2() * a(A201)),
            1
        ),
        (
            Expr::ratio(1, 2)
                * sum_of([
                    x3() * a(A111),
                    eta() * x2() * a(A102),
                    -(eta() * (e2() + Expr::num(2) * x2()) * a(A120)),
                ]),
            2
        ),
        (
            sum_of([
                Expr::num(3) * e2() * xi() * a(A030),
                eta() * (e2() - Expr::num(2) * x2()) * a(A021),
                xi() * (x2() - Expr::num(2) * e2()) * a(A012),
                Expr::num(3) * eta() * x2() * a(A003),
            ]),
            3
        ),
    ];
    let f4 = alloc::vec![
        (Expr::ratio(1, 8) * x3() * a(A300), 0),
        (
            Expr::ratio(1, 4) * (x3() * a(A201) - eta() * x2() * a(A210)),
            1
        ),
        (
            Expr::ratio(1, 2)
                * sum_of([
                    e2() * xi() * a(A120),
                    -(eta() * x2() * a(A111)),
                    x3() * a(A102),
                ]),
            2
        ),
        (
            sum_of([
                x3() * a(A003),
                e2() * xi() * a(A021),
                -(eta() * x2() * a(A012)),
                -(e3() * a(A030)),
            ]),
            3
        ),
    ];
    [f1, f2, f3, f4]
}

/// Elliptic numerators; F_j = fhat_j / (u^2-v^2)^3. Radical weights are
/// s = sqrt(1-u^2), t = sqrt(v^2-1) in the powers shown by the factors.
fn elliptic_fhat(a: &dyn Fn(usize) -> Expr) -> [Expr; 4] {
    let u = || Expr::sym("u");
    let v = || Expr::sym("v");
    let u2 = || u().pow_i(2);
    let v2 = || v().pow_i(2);
    let u3 = || u().pow_i(3);
    let v3 = || v().pow_i(3);
    let s2 = || (Expr::one() - u2()).normalize();
    let t2 = || (v2() - Expr::one()).normalize();
    // s^k t^l as rational powers of the squared bases
    let st = |ks: i64, kt: i64| {
        prod_of([
            s2().pow_r(rat(ks, 2)),
            t2().pow_r(rat(kt, 2)),
        ])
    };

    let fhat1 = sum_of([
        st(3, 3)
            * sum_of([
                v3() * a(A300),
                u() * v2() * a(A201),
                u2() * v() * a(A102),
                u3() * a(A003),
            ]),
        st(5, 1) * sum_of([v3() * a(A120), u() * v2() * a(A021)]),
        -(st(4, 2)
            * sum_of([v3() * a(A210), u() * v2() * a(A111), u2() * v() * a(A012)])),
        -(st(6, 0) * v3() * a(A030)),
    ]);

    let fhat2 = sum_of([
        -(st(3, 3)
            * sum_of([
                Expr::num(3) * u() * v2() * a(A300),
                v() * (Expr::num(2) * u2() + v2()) * a(A201),
                u() * (u2() + Expr::num(2) * v2()) * a(A102),
                Expr::num(3) * u2() * v() * a(A003),
            ])),
        st(3, 1)
            * sum_of([
                (u2() + Expr::num(2) * v2() - Expr::num(3)) * u() * v2() * a(A120),
                v() * (Expr::num(3) * u2() * v2() - Expr::num(2) * u2() - v2()) * a(A021),
            ]),
        -(st(2, 2)
            * sum_of([
                v2() * u() * (Expr::num(2) * u2() + v2() - Expr::num(3)) * a(A210),
                v() * (u().pow_i(4) + Expr::num(2) * u2() * v2()
                    - Expr::num(2) * u2()
                    - v2())
                    * a(A111),
                u() * (Expr::num(3) * u2() * v2() - u2() - Expr::num(2) * v2()) * a(A012),
            ])),
        -(Expr::num(3) * st(4, 2) * u() * v2() * a(A030)),
    ]);

    let fhat3 = sum_of([
        st(3, 3)
            * sum_of([
                Expr::num(3) * u2() * v() * a(A300),
                u() * (u2() + Expr::num(2) * v2()) * a(A201),
                v() * (Expr::num(2) * u2() + v2()) * a(A102),
                Expr::num(3) * u() * v2() * a(A003),
            ]),
        st(1, 3)
            * sum_of([
                (Expr::num(2) * u2() + v2() - Expr::num(3)) * u2() * v() * a(A120),
                u() * (Expr::num(3) * u2() * v2() - u2() - Expr::num(2) * v2()) * a(A021),
            ]),
        st(2, 2)
            * sum_of([
                u2() * v() * (u2() + Expr::num(2) * v2() - Expr::num(3)) * a(A210),
                u() * (v().pow_i(4) + Expr::num(2) * u2() * v2()
                    - u2()
                    - Expr::num(2) * v2())
                    * a(A111),
                v() * (Expr::num(3) * u2() * v2() - Expr::num(2) * u2() - v2()) * a(A012),
            ]),
        -(Expr::num(3) * st(2, 4) * u2() * v() * a(A030)),
    ]);

    let fhat4 = sum_of([
        -(st(3, 3)
            * sum_of([
                u3() * a(A300),
                u2() * v() * a(A201),
                u() * v2() * a(A102),
                v3() * a(A003),
            ])),
        -(st(1, 5) * sum_of([u3() * a(A120), u2() * v() * a(A021)])),
        -(st(2, 4) * sum_of([u3() * a(A210), u2() * v() * a(A111), u() * v2() * a(A012)])),
        -(st(0, 6) * u3() * a(A030)),
    ]);

    [fhat1, fhat2, fhat3, fhat4]
}

/// Compose a separable chart potential into a Cartesian expression.
/// Components are expressions in the chart's own variables; the polar
/// angular component must live in the `{sin k th, cos k th}` basis.
pub fn compose_potential(tag: ChartTag, v1: &Expr, v2: &Expr) -> Result<Expr, ChartError> {
    let x1 = Expr::sym("x1");
    let x2 = Expr::sym("x2");
    let r2 = (x1.clone().pow_i(2) + x2.clone().pow_i(2)).normalize();
    match tag {
        ChartTag::Cartesian => Ok((v1.clone() + v2.clone()).normalize()),
        ChartTag::Polar => {
            let r = r2.clone().sqrt();
            let rinv = r2.clone().pow_r(rat(-1, 2));
            let radial = v1.subst("r", &r);
            let cos_th = (x1.clone() * rinv.clone()).normalize();
            let sin_th = (x2.clone() * rinv).normalize();
            let angular = v2
                .subst_trig_unit("th", &cos_th, &sin_th)
                .map_err(|_| ChartError::BadComponent(String::from(
                    "polar angular component must be a trig polynomial in th",
                )))?;
            Ok((radial + angular * r2.pow_i(-1)).normalize())
        }
        ChartTag::Parabolic => {
            let r = r2.clone().sqrt();
            let xi = (r.clone() + x1.clone()).sqrt();
            let eta = (r.clone() - x1.clone()).sqrt();
            let w1 = v1.subst("xi", &xi);
            let w2 = v2.subst("eta", &eta);
            // xi^2 + eta^2 = 2r
            let denom = (Expr::num(2) * r).normalize();
            Ok(((w1 + w2) * denom.pow_i(-1)).normalize())
        }
        ChartTag::Elliptic => {
            // u^2 = (q - w)/2, v^2 = (q + w)/2 with q = x1^2+x2^2+1,
            // w = sqrt(q^2 - 4 x1^2); u^2 - v^2 = -w.
            let q = (r2 + Expr::one()).normalize();
            let w = (q.clone().pow_i(2) - Expr::num(4) * x1.clone().pow_i(2))
                .normalize()
                .sqrt();
            let vsq = ((q + w.clone()) * Expr::ratio(1, 2)).normalize();
            let vv = vsq.clone().sqrt();
            let uu = (x1 * vsq.pow_r(rat(-1, 2))).normalize();
            let w1 = v1.subst("u", &uu);
            let w2 = v2.subst("v", &vv);
            Ok((-((w1 + w2) * w.pow_i(-1))).normalize())
        }
    }
}

/// Classical Hamiltonian split (kinetic, potential) in Cartesian
/// phase-space variables; the kinetic form is flat for every chart.
pub fn hamiltonian(tag: ChartTag, v1: &Expr, v2: &Expr) -> Result<(Expr, Expr), ChartError> {
    let kinetic = (Expr::ratio(1, 2)
        * (Expr::sym("p1").pow_i(2) + Expr::sym("p2").pow_i(2)))
    .normalize();
    let potential = compose_potential(tag, v1, v2)?;
    Ok((kinetic, potential))
}
