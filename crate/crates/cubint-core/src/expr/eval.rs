//! Exact and floating evaluation under a binding of symbols to values.

use super::{Expr, Symbol};
use crate::rat::{pow_exact, rat_to_f64, to_i64, Rat};
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug)]
pub enum BVal {
    Exact(Rat),
    Float(f64),
    /// Unit-circle binding for an angle variable: exact (cos v, sin v).
    /// Enables exact evaluation of sin(k·v), cos(k·v) at rational circle
    /// points; the bare angle itself stays unbound.
    UnitCircle { cos: Rat, sin: Rat },
}

#[derive(Clone, Debug, Default)]
pub struct Binding {
    map: BTreeMap<Symbol, BVal>,
}

impl Binding {
    pub fn new() -> Self {
        Binding {
            map: BTreeMap::new(),
        }
    }
    pub fn set_exact(&mut self, name: &str, v: Rat) -> &mut Self {
        self.map.insert(Symbol::new(name), BVal::Exact(v));
        self
    }
    pub fn set_f64(&mut self, name: &str, v: f64) -> &mut Self {
        self.map.insert(Symbol::new(name), BVal::Float(v));
        self
    }
    pub fn set_unit_circle(&mut self, name: &str, cos: Rat, sin: Rat) -> &mut Self {
        self.map.insert(Symbol::new(name), BVal::UnitCircle { cos, sin });
        self
    }
    pub fn get(&self, name: &str) -> Option<&BVal> {
        self.map.get(&Symbol::new(name))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Exact(Rat),
    Float(f64),
}

impl Value {
    pub fn as_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => rat_to_f64(r),
            Value::Float(f) => *f,
        }
    }
    pub fn as_exact(&self) -> Option<&Rat> {
        match self {
            Value::Exact(r) => Some(r),
            Value::Float(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalError {
    Unbound(String),
    /// Exact mode hit an irrational node (root of a non-square,
    /// trig away from special points) or a float binding.
    Irrational(String),
    DivisionByZero,
    DomainError(String),
}

impl core::fmt::Display for EvalError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EvalError::Unbound(n) => write!(f, "unbound symbol `{n}`"),
            EvalError::Irrational(m) => write!(f, "exact evaluation impossible: {m}"),
            EvalError::DivisionByZero => write!(f, "division by zero"),
            EvalError::DomainError(m) => write!(f, "domain error: {m}"),
        }
    }
}

impl Expr {
    pub fn eval_exact(&self, b: &Binding) -> Result<Rat, EvalError> {
        ev_exact(self, b)
    }

    pub fn eval_f64(&self, b: &Binding) -> Result<f64, EvalError> {
        ev_f64(self, b)
    }
}

fn ev_exact(e: &Expr, b: &Binding) -> Result<Rat, EvalError> {
    match e {
        Expr::Num(r) => Ok(r.clone()),
        Expr::Sym(s) => match b.get(s.as_str()) {
            Some(BVal::Exact(r)) => Ok(r.clone()),
            Some(BVal::Float(_)) => Err(EvalError::Irrational(format_sym(s, "float binding"))),
            Some(BVal::UnitCircle { .. }) => Err(EvalError::Irrational(format_sym(
                s,
                "angle bound only through its circle point",
            ))),
            None => Err(EvalError::Unbound(s.as_str().to_string())),
        },
        Expr::Sum(es) => {
            let mut acc = Rat::zero();
            for x in es {
                acc += ev_exact(x, b)?;
            }
            Ok(acc)
        }
        Expr::Prod(es) => {
            let mut acc = Rat::one();
            for x in es {
                acc *= ev_exact(x, b)?;
                if acc.is_zero() {
                    // keep scanning for errors like unbound symbols
                }
            }
            Ok(acc)
        }
        Expr::Pow(base, q) => {
            let bv = ev_exact(base, b)?;
            if bv.is_zero() && q.is_negative() {
                return Err(EvalError::DivisionByZero);
            }
            pow_exact(&bv, q).ok_or_else(|| {
                EvalError::Irrational(alloc::format!(
                    "{} ^ {} is not rational",
                    crate::rat::format_rat(&bv),
                    crate::rat::format_rat(q)
                ))
            })
        }
        Expr::Sin(a) | Expr::Cos(a) => {
            let is_sin = matches!(e, Expr::Sin(_));
            if let Some((k, c, s)) = circle_harmonic(a, b) {
                let (ck, sk) = chebyshev(k, &c, &s);
                return Ok(if is_sin { sk } else { ck });
            }
            let av = ev_exact(a, b)?;
            if av.is_zero() {
                Ok(if is_sin { Rat::zero() } else { Rat::one() })
            } else {
                Err(EvalError::Irrational(
                    "trig at a generic point".to_string(),
                ))
            }
        }
    }
}

/// Recognize sin/cos argument `k·v` with a unit-circle binding for `v`.
fn circle_harmonic(arg: &Expr, b: &Binding) -> Option<(i64, Rat, Rat)> {
    let (k, name): (i64, &str) = match arg {
        Expr::Sym(s) => (1, s.as_str()),
        Expr::Prod(fs) if fs.len() == 2 => match (&fs[0], &fs[1]) {
            (Expr::Num(n), Expr::Sym(s)) => (to_i64(n)?, s.as_str()),
            _ => return None,
        },
        _ => return None,
    };
    match b.get(name) {
        Some(BVal::UnitCircle { cos, sin }) => Some((k, cos.clone(), sin.clone())),
        _ => None,
    }
}

/// (cos k·t, sin k·t) from (cos t, sin t) by angle addition; k may be negative.
fn chebyshev(k: i64, c: &Rat, s: &Rat) -> (Rat, Rat) {
    let n = k.unsigned_abs();
    let mut ck = Rat::one();
    let mut sk = Rat::zero();
    for _ in 0..n {
        let c2 = &ck * c - &sk * s;
        let s2 = &sk * c + &ck * s;
        ck = c2;
        sk = s2;
    }
    if k < 0 {
        sk = -sk;
    }
    (ck, sk)
}

fn ev_f64(e: &Expr, b: &Binding) -> Result<f64, EvalError> {
    match e {
        Expr::Num(r) => Ok(rat_to_f64(r)),
        Expr::Sym(s) => match b.get(s.as_str()) {
            Some(BVal::Exact(r)) => Ok(rat_to_f64(r)),
            Some(BVal::Float(f)) => Ok(*f),
            Some(BVal::UnitCircle { cos, sin }) => {
                // reconstruct the angle for completeness
                let c = rat_to_f64(cos);
                let s = rat_to_f64(sin);
                Ok(s.atan2(c))
            }
            None => Err(EvalError::Unbound(s.as_str().to_string())),
        },
        Expr::Sum(es) => {
            let mut acc = 0.0;
            for x in es {
                acc += ev_f64(x, b)?;
            }
            Ok(acc)
        }
        Expr::Prod(es) => {
            let mut acc = 1.0;
            for x in es {
                acc *= ev_f64(x, b)?;
            }
            Ok(acc)
        }
        Expr::Pow(base, q) => {
            let bv = ev_f64(base, b)?;
            if bv == 0.0 && q.is_negative() {
                return Err(EvalError::DivisionByZero);
            }
            if let Some(k) = to_i64(q) {
                if let Ok(ki) = i32::try_from(k) {
                    return Ok(bv.powi(ki));
                }
            }
            let qf = rat_to_f64(q);
            let out = bv.powf(qf);
            if out.is_nan() && bv < 0.0 {
                return Err(EvalError::DomainError(
                    "fractional power of a negative value".to_string(),
                ));
            }
            Ok(out)
        }
        Expr::Sin(a) => Ok(ev_f64(a, b)?.sin()),
        Expr::Cos(a) => Ok(ev_f64(a, b)?.cos()),
    }
}

fn format_sym(s: &Symbol, why: &str) -> String {
    alloc::format!("`{}`: {}", s.as_str(), why)
}
