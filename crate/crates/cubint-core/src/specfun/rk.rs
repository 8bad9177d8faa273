//! Embedded Dormand-Prince 5(4) pair with dense output, PI step control
//! and pole detection for ODE solutions with movable singularities.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

/// Right-hand side of a first-order system y' = f(z, y).
pub trait OdeSystem<const N: usize> {
    fn eval(&self, z: f64, y: &[f64; N]) -> Result<[f64; N], RkError>;
}

impl<F, const N: usize> OdeSystem<N> for F
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N], RkError>,
{
    fn eval(&self, z: f64, y: &[f64; N]) -> Result<[f64; N], RkError> {
        self(z, y)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RkError {
    SingularCoefficient(f64),
    NonFinite(f64),
    BadSpan,
}

impl core::fmt::Display for RkError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            RkError::SingularCoefficient(z) => {
                write!(f, "singular right-hand side near z = {z}")
            }
            RkError::NonFinite(z) => write!(f, "non-finite state near z = {z}"),
            RkError::BadSpan => write!(f, "integration span is empty"),
        }
    }
}

/// Why an integration stopped before the end of the span.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Halt {
    Completed,
    /// Solution magnitude blew past the divergence threshold or the step
    /// collapsed: a movable singularity.
    Pole,
}

/// One accepted step with its dense-output data.
#[derive(Clone, Debug)]
pub struct Step<const N: usize> {
    pub z0: f64,
    pub h: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    /// local error estimate accepted for this step
    pub err: f64,
    cont: [[f64; N]; 5],
}

impl<const N: usize> Step<N> {
    /// Dense output at z inside [z0, z0+h] (quartic interpolant).
    pub fn interpolate(&self, z: f64) -> [f64; N] {
        let th = (z - self.z0) / self.h;
        let th1 = 1.0 - th;
        core::array::from_fn(|i| {
            self.cont[0][i]
                + th * (self.cont[1][i]
                    + th1 * (self.cont[2][i]
                        + th * (self.cont[3][i] + th1 * self.cont[4][i])))
        })
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory<const N: usize> {
    pub steps: Vec<Step<N>>,
    pub halt: Halt,
    /// z actually reached
    pub z_end: f64,
    pub rhs_evals: usize,
}

impl<const N: usize> Trajectory<N> {
    pub fn sample(&self, z: f64) -> Option<[f64; N]> {
        let first = self.steps.first()?;
        let dir = first.h.signum();
        for s in &self.steps {
            let (lo, hi) = if dir > 0.0 {
                (s.z0, s.z0 + s.h)
            } else {
                (s.z0 + s.h, s.z0)
            };
            if z >= lo - 1e-12 && z <= hi + 1e-12 {
                return Some(s.interpolate(z));
            }
        }
        None
    }
}

pub struct RkOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h0: Option<f64>,
    pub max_steps: usize,
    /// |y| threshold flagging a pole
    pub divergence: f64,
}

impl Default for RkOptions {
    fn default() -> Self {
        RkOptions {
            rtol: 1e-10,
            atol: 1e-10,
            h0: None,
            max_steps: 1_000_000,
            divergence: 1e6,
        }
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// 5th-order weights (FSAL: equal to the last A row).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// Error weights b5 - b4.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
/// Dense output auxiliary weights.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Integrate from z0 to z1 (either direction). Stops early with a pole
/// flag when |y| exceeds the divergence threshold or the step collapses.
pub fn integrate<const N: usize>(
    sys: &dyn OdeSystem<N>,
    z0: f64,
    y0: [f64; N],
    z1: f64,
    opts: &RkOptions,
) -> Result<Trajectory<N>, RkError> {
    if !(z1 - z0).is_finite() || z0 == z1 {
        return Err(RkError::BadSpan);
    }
    let dir = (z1 - z0).signum();
    let span = (z1 - z0).abs();
    let mut h = opts.h0.unwrap_or(span / 100.0).abs().min(span) * dir;
    let mut z = z0;
    let mut y = y0;
    let mut k0 = sys.eval(z, &y)?;
    let mut rhs_evals = 1usize;
    let mut steps: Vec<Step<N>> = Vec::new();
    let mut facold: f64 = 1e-4;
    let beta = 0.04f64;
    let expo1 = 0.2 - beta * 0.75;
    let safe = 0.9f64;

    for _ in 0..opts.max_steps {
        if (z - z1) * dir >= 0.0 {
            return Ok(Trajectory {
                steps,
                halt: Halt::Completed,
                z_end: z,
                rhs_evals,
            });
        }
        if (z + h - z1) * dir > 0.0 {
            h = z1 - z;
        }
        if h.abs() < 1e-14 * span.max(1.0) {
            return Ok(Trajectory {
                steps,
                halt: Halt::Pole,
                z_end: z,
                rhs_evals,
            });
        }
        let mut k = [[0.0f64; N]; 7];
        k[0] = k0;
        let mut failed_eval = false;
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                for i in 0..N {
                    ys[i] += h * A[s][j] * kj[i];
                }
            }
            match sys.eval(z + C[s] * h, &ys) {
                Ok(v) => k[s] = v,
                Err(RkError::SingularCoefficient(_)) | Err(RkError::NonFinite(_)) => {
                    failed_eval = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        rhs_evals += 6;
        if failed_eval {
            // approach to a singular coefficient: retreat
            h *= 0.25;
            continue;
        }
        let mut y1 = y;
        for (j, kj) in k.iter().enumerate() {
            for i in 0..N {
                y1[i] += h * B5[j] * kj[i];
            }
        }
        // error norm
        let mut err = 0.0f64;
        for i in 0..N {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            e *= h;
            let sk = opts.atol + opts.rtol * y[i].abs().max(y1[i].abs());
            err += (e / sk) * (e / sk);
        }
        err = (err / N as f64).sqrt();

        if !y1.iter().all(|v| v.is_finite()) {
            h *= 0.25;
            if h.abs() < 1e-14 * span.max(1.0) {
                return Ok(Trajectory {
                    steps,
                    halt: Halt::Pole,
                    z_end: z,
                    rhs_evals,
                });
            }
            continue;
        }

        let fac11 = err.powf(expo1);
        if err <= 1.0 {
            // accept; the last stage is the FSAL evaluation at (z+h, y1)
            let k1 = k[6];
            let ydiff: [f64; N] = core::array::from_fn(|i| y1[i] - y[i]);
            let bspl: [f64; N] = core::array::from_fn(|i| h * k[0][i] - ydiff[i]);
            let mut cont = [[0.0f64; N]; 5];
            for i in 0..N {
                cont[0][i] = y[i];
                cont[1][i] = ydiff[i];
                cont[2][i] = bspl[i];
                cont[3][i] = ydiff[i] - h * k1[i] - bspl[i];
                let mut dsum = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    dsum += D[j] * kj[i];
                }
                cont[4][i] = h * dsum;
            }
            steps.push(Step {
                z0: z,
                h,
                y0: y,
                y1,
                err,
                cont,
            });
            z += h;
            y = y1;
            k0 = k1;
            if y.iter().any(|v| v.abs() > opts.divergence) {
                return Ok(Trajectory {
                    steps,
                    halt: Halt::Pole,
                    z_end: z,
                    rhs_evals,
                });
            }
            let fac = (fac11 / facold.powf(beta) / safe).clamp(0.1, 5.0);
            facold = err.max(1e-4);
            h /= fac;
        } else {
            h /= (fac11 / safe).min(5.0);
        }
    }
    Ok(Trajectory {
        steps,
        halt: Halt::Pole,
        z_end: z,
        rhs_evals,
    })
}
