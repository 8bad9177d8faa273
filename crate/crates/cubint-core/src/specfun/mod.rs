//! Numerical construction of the nonlinear potentials: Painlevé I, II,
//! IV transcendents, the Weierstrass elliptic function, and the classical
//! square-root / quartic-root families.

pub mod rk;
#[cfg(test)]
mod tests;

use crate::determine::SampledField1D;
use crate::expr::Expr;
use crate::rat::Rat;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rk::{integrate, Halt, RkError, RkOptions, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PainleveKind {
    /// w'' = 6 w^2 + z
    First,
    /// w'' = 2 w^3 + z w + alpha
    Second,
    /// w'' = w'^2/(2w) + 3 w^3/2 + 4 z w^2 + 2 (z^2 - alpha) w + beta/w
    Fourth,
}

impl PainleveKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "P1" | "p1" | "PI" => Some(PainleveKind::First),
            "P2" | "p2" | "PII" => Some(PainleveKind::Second),
            "P4" | "p4" | "PIV" => Some(PainleveKind::Fourth),
            _ => None,
        }
    }
    pub fn name(self) -> &'static str {
        match self {
            PainleveKind::First => "P1",
            PainleveKind::Second => "P2",
            PainleveKind::Fourth => "P4",
        }
    }
}

#[derive(Clone, Debug)]
pub struct PainleveSpec {
    pub kind: PainleveKind,
    pub alpha: f64,
    pub beta: f64,
    pub z0: f64,
    pub w0: f64,
    pub dw0: f64,
    /// two-sided span containing z0
    pub z_min: f64,
    pub z_max: f64,
    pub tolerance: f64,
    /// number of output grid points
    pub samples: usize,
}

#[derive(Clone, Debug)]
pub struct WeierstrassSpec {
    pub g2: f64,
    pub g3: f64,
    pub z0: f64,
    pub p0: f64,
    pub dp0: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub tolerance: f64,
    pub samples: usize,
}

#[derive(Clone, Debug)]
pub enum SpecFunError {
    BadSpec(String),
    Rk(RkError),
    /// Initial data violates the defining first integral.
    InconsistentInitialData(f64),
}

impl From<RkError> for SpecFunError {
    fn from(e: RkError) -> Self {
        SpecFunError::Rk(e)
    }
}

impl core::fmt::Display for SpecFunError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SpecFunError::BadSpec(m) => write!(f, "bad spec: {m}"),
            SpecFunError::Rk(e) => write!(f, "{e}"),
            SpecFunError::InconsistentInitialData(d) => {
                write!(f, "initial data violates the first integral by {d:e}")
            }
        }
    }
}

/// Numerically integrated special-function solution on a 1D grid.
#[derive(Clone, Debug)]
pub struct SampledSolution {
    pub zs: Vec<f64>,
    pub w: Vec<f64>,
    pub dw: Vec<f64>,
    /// absolute local-error estimate of the step covering each node
    pub err: Vec<f64>,
    pub pole_flag: Vec<bool>,
    /// true when integration halted before covering the whole span
    pub truncated: bool,
}

impl SampledSolution {
    pub fn len(&self) -> usize {
        self.zs.len()
    }
    pub fn is_empty(&self) -> bool {
        self.zs.is_empty()
    }
}

fn sample_two_sided(
    left: Option<&Trajectory<2>>,
    right: Option<&Trajectory<2>>,
    z0: f64,
    y0: [f64; 2],
    z_min: f64,
    z_max: f64,
    samples: usize,
    tolerance: f64,
) -> SampledSolution {
    let n = samples.max(2);
    let mut zs = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    let mut dw = Vec::with_capacity(n);
    let mut err = Vec::with_capacity(n);
    let mut pole = Vec::with_capacity(n);
    let mut truncated = false;
    for i in 0..n {
        let z = z_min + (z_max - z_min) * i as f64 / (n - 1) as f64;
        let (val, e, fl) = if (z - z0).abs() < 1e-14 {
            (Some(y0), 0.0, false)
        } else if z < z0 {
            match left {
                Some(t) => match t.sample(z) {
                    Some(v) => (Some(v), step_err_at(t, z) * tolerance, false),
                    None => (None, f64::NAN, true),
                },
                None => (None, f64::NAN, true),
            }
        } else {
            match right {
                Some(t) => match t.sample(z) {
                    Some(v) => (Some(v), step_err_at(t, z) * tolerance, false),
                    None => (None, f64::NAN, true),
                },
                None => (None, f64::NAN, true),
            }
        };
        zs.push(z);
        match val {
            Some(v) => {
                w.push(v[0]);
                dw.push(v[1]);
                err.push(e);
                pole.push(fl);
            }
            None => {
                w.push(f64::NAN);
                dw.push(f64::NAN);
                err.push(f64::NAN);
                pole.push(true);
                truncated = true;
            }
        }
    }
    if let Some(t) = left {
        truncated |= t.halt == Halt::Pole;
    }
    if let Some(t) = right {
        truncated |= t.halt == Halt::Pole;
    }
    SampledSolution {
        zs,
        w,
        dw,
        err,
        pole_flag: pole,
        truncated,
    }
}

fn step_err_at(t: &Trajectory<2>, z: f64) -> f64 {
    for s in &t.steps {
        let (lo, hi) = if s.h > 0.0 {
            (s.z0, s.z0 + s.h)
        } else {
            (s.z0 + s.h, s.z0)
        };
        if z >= lo - 1e-12 && z <= hi + 1e-12 {
            return s.err;
        }
    }
    f64::NAN
}

/// Integrate a Painlevé transcendent over the spec's span, both
/// directions from z0, with pole detection.
pub fn integrate_painleve(spec: &PainleveSpec) -> Result<SampledSolution, SpecFunError> {
    if spec.tolerance <= 0.0 {
        return Err(SpecFunError::BadSpec("tolerance must be positive".into()));
    }
    if !(spec.z_min <= spec.z0 && spec.z0 <= spec.z_max) || spec.z_min >= spec.z_max {
        return Err(SpecFunError::BadSpec(
            "span must contain the initial point".into(),
        ));
    }
    if spec.kind == PainleveKind::Fourth && spec.w0.abs() < 1e-8 {
        return Err(SpecFunError::BadSpec(
            "P4 initial value inside the w = 0 guard band".into(),
        ));
    }
    let kind = spec.kind;
    let (alpha, beta) = (spec.alpha, spec.beta);
    let sys = move |z: f64, y: &[f64; 2]| -> Result<[f64; 2], RkError> {
        let (w, dw) = (y[0], y[1]);
        let ddw = match kind {
            PainleveKind::First => 6.0 * w * w + z,
            PainleveKind::Second => 2.0 * w * w * w + z * w + alpha,
            PainleveKind::Fourth => {
                if w.abs() < 1e-8 {
                    return Err(RkError::SingularCoefficient(z));
                }
                dw * dw / (2.0 * w)
                    + 1.5 * w * w * w
                    + 4.0 * z * w * w
                    + 2.0 * (z * z - alpha) * w
                    + beta / w
            }
        };
        if !ddw.is_finite() {
            return Err(RkError::NonFinite(z));
        }
        Ok([dw, ddw])
    };
    let opts = RkOptions {
        rtol: spec.tolerance,
        atol: spec.tolerance,
        ..Default::default()
    };
    let y0 = [spec.w0, spec.dw0];
    let right = if spec.z_max > spec.z0 {
        Some(integrate(&sys, spec.z0, y0, spec.z_max, &opts)?)
    } else {
        None
    };
    let left = if spec.z_min < spec.z0 {
        Some(integrate(&sys, spec.z0, y0, spec.z_min, &opts)?)
    } else {
        None
    };
    Ok(sample_two_sided(
        left.as_ref(),
        right.as_ref(),
        spec.z0,
        y0,
        spec.z_min,
        spec.z_max,
        spec.samples,
        spec.tolerance,
    ))
}

/// Integrated Weierstrass function plus the first-integral drift report.
#[derive(Clone, Debug)]
pub struct WeierstrassSolution {
    pub solution: SampledSolution,
    /// max |p'^2 - 4p^3 + g2 p + g3| over unflagged grid nodes
    pub max_drift: f64,
}

/// Integrate p'' = 6 p^2 - g2/2 and report the drift of the first
/// integral p'^2 - 4 p^3 + g2 p + g3.
pub fn weierstrass_p(spec: &WeierstrassSpec) -> Result<WeierstrassSolution, SpecFunError> {
    let defect = (spec.dp0 * spec.dp0
        - (4.0 * spec.p0.powi(3) - spec.g2 * spec.p0 - spec.g3))
        .abs();
    if defect > 1e-12 {
        return Err(SpecFunError::InconsistentInitialData(defect));
    }
    if spec.tolerance <= 0.0 {
        return Err(SpecFunError::BadSpec("tolerance must be positive".into()));
    }
    let g2 = spec.g2;
    let sys = move |_z: f64, y: &[f64; 2]| -> Result<[f64; 2], RkError> {
        Ok([y[1], 6.0 * y[0] * y[0] - g2 / 2.0])
    };
    let opts = RkOptions {
        rtol: spec.tolerance,
        atol: spec.tolerance,
        ..Default::default()
    };
    let y0 = [spec.p0, spec.dp0];
    let right = if spec.z_max > spec.z0 {
        Some(integrate(&sys, spec.z0, y0, spec.z_max, &opts)?)
    } else {
        None
    };
    let left = if spec.z_min < spec.z0 {
        Some(integrate(&sys, spec.z0, y0, spec.z_min, &opts)?)
    } else {
        None
    };
    let solution = sample_two_sided(
        left.as_ref(),
        right.as_ref(),
        spec.z0,
        y0,
        spec.z_min,
        spec.z_max,
        spec.samples,
        spec.tolerance,
    );
    let mut max_drift = 0.0f64;
    for i in 0..solution.len() {
        if solution.pole_flag[i] {
            continue;
        }
        let (p, dp) = (solution.w[i], solution.dw[i]);
        let d = (dp * dp - (4.0 * p.powi(3) - spec.g2 * p - spec.g3)).abs();
        max_drift = max_drift.max(d);
    }
    Ok(WeierstrassSolution {
        solution,
        max_drift,
    })
}

/// Classical square-root potential ±c sqrt(x) in the given variable,
/// usable by the determining-equation and dynamics layers (domain x > 0).
pub fn classical_case1_potential(coefficient: Rat, positive: bool, var: &str) -> Expr {
    let c = if positive {
        coefficient
    } else {
        -coefficient
    };
    (Expr::from_rat(c) * Expr::sym(var).sqrt()).normalize()
}

/// Quartic in V with coefficient functions of x: q4 V^4 + ... + q0.
#[derive(Clone, Debug)]
pub struct QuarticPotential {
    /// coefficients ordered by descending degree: [q4, q3, q2, q1, q0]
    pub coeffs: [Expr; 5],
    pub var: String,
}

#[derive(Clone, Debug)]
pub struct BranchPoint {
    pub x: f64,
    pub value: f64,
    /// nearest other root distance; small values flag branch collisions
    pub separation: f64,
}

#[derive(Clone, Debug)]
pub struct BranchTrack {
    pub points: Vec<BranchPoint>,
    pub collided: bool,
}

#[derive(Clone, Copy, Debug)]
struct Cplx {
    re: f64,
    im: f64,
}

impl Cplx {
    fn new(re: f64, im: f64) -> Self {
        Cplx { re, im }
    }
    fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }
    fn mul(self, o: Cplx) -> Cplx {
        Cplx::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
    fn sub(self, o: Cplx) -> Cplx {
        Cplx::new(self.re - o.re, self.im - o.im)
    }
    fn div(self, o: Cplx) -> Cplx {
        let d = o.re * o.re + o.im * o.im;
        Cplx::new(
            (self.re * o.re + self.im * o.im) / d,
            (self.im * o.re - self.re * o.im) / d,
        )
    }
}

/// All four roots by Durand-Kerner iteration, warm-started from the
/// previous step's roots for continuation.
fn quartic_roots(c: &[f64; 5], start: Option<&[Cplx; 4]>) -> Option<[Cplx; 4]> {
    let lead = c[0];
    if lead.abs() < 1e-300 {
        return None;
    }
    let a: Vec<f64> = c.iter().map(|x| x / lead).collect();
    let eval = |z: Cplx| -> Cplx {
        // Horner on monic descending coefficients
        let mut out = Cplx::new(a[0], 0.0);
        for c in a.iter().skip(1) {
            out = out.mul(z);
            out = Cplx::new(out.re + c, out.im);
        }
        out
    };
    let mut roots = match start {
        Some(r) => *r,
        None => {
            // standard spread starting points
            let r = 1.0 + a.iter().map(|x| x.abs()).fold(0.0, f64::max);
            [
                Cplx::new(0.4 * r, 0.9 * r),
                Cplx::new(-0.9 * r, 0.4 * r),
                Cplx::new(-0.4 * r, -0.9 * r),
                Cplx::new(0.9 * r, -0.4 * r),
            ]
        }
    };
    for _ in 0..200 {
        let mut delta = 0.0f64;
        for i in 0..4 {
            let mut denom = Cplx::new(1.0, 0.0);
            for j in 0..4 {
                if i != j {
                    denom = denom.mul(roots[i].sub(roots[j]));
                }
            }
            if denom.abs() < 1e-30 {
                // perturb coincident iterates
                roots[i] = Cplx::new(roots[i].re + 1e-6, roots[i].im + 1e-6);
                continue;
            }
            let step = eval(roots[i]).div(denom);
            roots[i] = roots[i].sub(step);
            delta = delta.max(step.abs());
        }
        if delta < 1e-14 {
            break;
        }
    }
    Some(roots)
}

/// Evaluate the quartic coefficient functions at x.
fn quartic_coeffs_at(q: &QuarticPotential, x: f64) -> Option<[f64; 5]> {
    let mut b = crate::expr::Binding::new();
    b.set_f64(&q.var, x);
    let mut out = [0.0f64; 5];
    for (i, c) in q.coeffs.iter().enumerate() {
        out[i] = c.eval_f64(&b).ok()?;
    }
    Some(out)
}

/// Track the real root branch of a quartic potential along a grid,
/// continuing from the anchor root; never selects by root index.
pub fn classical_case2_potential(
    q: &QuarticPotential,
    xs: &[f64],
    anchor: f64,
) -> Result<BranchTrack, SpecFunError> {
    if xs.is_empty() {
        return Err(SpecFunError::BadSpec("empty grid".into()));
    }
    let mut points = Vec::with_capacity(xs.len());
    let mut collided = false;
    let mut prev_roots: Option<[Cplx; 4]> = None;
    let mut prev_value = anchor;
    for &x in xs {
        let c = quartic_coeffs_at(q, x)
            .ok_or_else(|| SpecFunError::BadSpec("coefficient evaluation failed".into()))?;
        let roots = quartic_roots(&c, prev_roots.as_ref())
            .ok_or_else(|| SpecFunError::BadSpec("degenerate quartic (zero leading coefficient)".into()))?;
        // nearest root to the continued branch, among (near-)real roots
        let mut best: Option<(f64, f64)> = None; // (distance, value)
        for r in roots.iter() {
            // multiple roots spread the iterates by eps^(1/multiplicity),
            // so the realness gate must stay loose
            if r.im.abs() > 1e-3 * (1.0 + r.re.abs()) {
                continue;
            }
            let d = (r.re - prev_value).abs();
            if best.map(|(bd, _)| d < bd).unwrap_or(true) {
                best = Some((d, r.re));
            }
        }
        let Some((_, value)) = best else {
            return Err(SpecFunError::BadSpec(alloc::format!(
                "no real root at x = {x}"
            )));
        };
        // separation from the other roots of this quartic
        let mut sep = f64::INFINITY;
        for r in roots.iter() {
            let d = (r.re - value).hypot(r.im);
            if d > 1e-12 {
                sep = sep.min(d);
            }
        }
        // multiplicity smears numeric roots across ~eps^(1/4)
        if sep < 1e-3 {
            collided = true;
        }
        points.push(BranchPoint {
            x,
            value,
            separation: sep,
        });
        prev_roots = Some(roots);
        prev_value = value;
    }
    Ok(BranchTrack { points, collided })
}

/// Potential built from the first Painlevé transcendent by the affine
/// scaling V(x) = hbar^2 b^2 w(b x + shift), b = (kappa/hbar^4)^(1/5),
/// so that hbar^2 V'' = 6 V^2 + kappa (x + shift/b). Returns the field
/// of V and its first three derivatives (the second and third from the
/// defining relation, exactly).
pub struct ScaledPainleve1 {
    pub hbar: f64,
    pub kappa: f64,
    pub scale_b: f64,
    pub shift: f64,
}

pub fn painleve1_potential(
    hbar: f64,
    kappa: f64,
    shift: f64,
    w0: f64,
    dw0: f64,
    x_min: f64,
    x_max: f64,
    samples: usize,
    tolerance: f64,
) -> Result<(SampledField1D, ScaledPainleve1), SpecFunError> {
    if hbar == 0.0 || kappa == 0.0 {
        return Err(SpecFunError::BadSpec(
            "the scaling needs hbar != 0 and kappa != 0".into(),
        ));
    }
    // real fifth root keeps the sign of kappa
    let b = kappa.signum() * (kappa.abs() / hbar.powi(4)).powf(0.2);
    let spec = PainleveSpec {
        kind: PainleveKind::First,
        alpha: 0.0,
        beta: 0.0,
        z0: b * (x_min + x_max) / 2.0 + shift,
        w0,
        dw0,
        z_min: (b * x_min + shift).min(b * x_max + shift),
        z_max: (b * x_min + shift).max(b * x_max + shift),
        tolerance,
        samples,
    };
    let sol = integrate_painleve(&spec)?;
    let h2 = hbar * hbar;
    let mut xs = Vec::with_capacity(sol.len());
    let mut rows = Vec::with_capacity(sol.len());
    for i in 0..sol.len() {
        let z = sol.zs[i];
        let x = (z - shift) / b;
        let w = sol.w[i];
        let dw = sol.dw[i];
        let v = h2 * b * b * w;
        let dv = h2 * b * b * b * dw;
        // from the defining equation of P1
        let d2v = (6.0 * v * v + kappa * x + kappa * shift / b) / h2;
        let d3v = (12.0 * v * dv + kappa) / h2;
        xs.push(x);
        rows.push([v, dv, d2v, d3v]);
    }
    if b < 0.0 {
        xs.reverse();
        rows.reverse();
    }
    Ok((
        SampledField1D { xs, rows },
        ScaledPainleve1 {
            hbar,
            kappa,
            scale_b: b,
            shift,
        },
    ))
}
