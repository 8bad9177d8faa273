//! Immutable symbolic expressions over exact rationals.
//!
//! The node set is deliberately small: rationals, named symbols, sums,
//! products, rational powers, sine and cosine. Everything downstream
//! (leading-term functions, compatibility conditions, kernel analysis)
//! lives inside this fragment.
//!
//! Normal form: expanded sum of products with collected like terms.
//! Trigonometric content is kept in the `{sin k·a, cos k·a}` linear basis
//! via product-to-sum rewriting. Square roots are opaque half-integer
//! powers with `(sqrt f)^2 -> f`; division is a power of exponent -1.

mod diff;
mod eval;
mod normal;
mod parse;
mod poly;
mod print;

pub use diff::diff;
pub use eval::{BVal, Binding, EvalError, Value};
pub use parse::{parse_expr, ParseError};
pub use poly::{poly_coeffs, poly_reconstruct};

/// Normalized term decomposition (coefficient, sorted factor list per
/// term) backing coefficient-extraction passes.
pub fn normal_terms(e: &Expr) -> alloc::vec::Vec<(crate::rat::Rat, alloc::vec::Vec<(Expr, crate::rat::Rat)>)> {
    normal::terms_of(e)
}

use crate::rat::{rat_i, Rat};
use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use num_traits::{One, Zero};

/// Interned-by-value symbol name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Symbol(pub String);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(name.to_string())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// Names `diff` accepts as differentiation variables. Everything else
/// (hbar, sigma, a, aprime, a1, a2, A300..A003, K0..) is a parameter.
pub const VARIABLES: &[&str] = &["x1", "x2", "r", "th", "xi", "eta", "u", "v", "p1", "p2"];

pub fn is_variable(name: &str) -> bool {
    VARIABLES.contains(&name)
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Expr {
    Num(Rat),
    Sym(Symbol),
    Sum(Vec<Expr>),
    Prod(Vec<Expr>),
    Pow(Box<Expr>, Rat),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ExprError {
    NotAVariable(String),
    NonPolynomial(String),
    BadExponent(String),
}

impl core::fmt::Display for ExprError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ExprError::NotAVariable(n) => write!(f, "`{n}` is not a declared variable"),
            ExprError::NonPolynomial(n) => write!(f, "non-polynomial dependence on `{n}`"),
            ExprError::BadExponent(m) => write!(f, "unsupported exponent: {m}"),
        }
    }
}

impl Expr {
    pub fn num(n: i64) -> Expr {
        Expr::Num(rat_i(n))
    }
    pub fn ratio(n: i64, d: i64) -> Expr {
        Expr::Num(crate::rat::rat(n, d))
    }
    pub fn from_rat(r: Rat) -> Expr {
        Expr::Num(r)
    }
    pub fn sym(name: &str) -> Expr {
        Expr::Sym(Symbol::new(name))
    }
    pub fn zero() -> Expr {
        Expr::Num(Rat::zero())
    }
    pub fn one() -> Expr {
        Expr::Num(Rat::one())
    }

    pub fn pow_i(self, e: i64) -> Expr {
        Expr::Pow(Box::new(self), rat_i(e))
    }
    pub fn pow_r(self, e: Rat) -> Expr {
        Expr::Pow(Box::new(self), e)
    }
    pub fn sqrt(self) -> Expr {
        Expr::Pow(Box::new(self), crate::rat::rat(1, 2))
    }
    pub fn sin(self) -> Expr {
        Expr::Sin(Box::new(self))
    }
    pub fn cos(self) -> Expr {
        Expr::Cos(Box::new(self))
    }
    pub fn recip(self) -> Expr {
        self.pow_i(-1)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(r) if r.is_zero())
    }
    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Num(r) if r.is_one())
    }

    /// Collect every symbol occurring anywhere in the tree.
    pub fn free_symbols(&self) -> alloc::collections::BTreeSet<Symbol> {
        let mut out = alloc::collections::BTreeSet::new();
        self.walk_symbols(&mut out);
        out
    }

    fn walk_symbols(&self, out: &mut alloc::collections::BTreeSet<Symbol>) {
        match self {
            Expr::Num(_) => {}
            Expr::Sym(s) => {
                out.insert(s.clone());
            }
            Expr::Sum(es) | Expr::Prod(es) => {
                for e in es {
                    e.walk_symbols(out);
                }
            }
            Expr::Pow(b, _) => b.walk_symbols(out),
            Expr::Sin(a) | Expr::Cos(a) => a.walk_symbols(out),
        }
    }

    pub fn contains_symbol(&self, name: &str) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Sym(s) => s.as_str() == name,
            Expr::Sum(es) | Expr::Prod(es) => es.iter().any(|e| e.contains_symbol(name)),
            Expr::Pow(b, _) => b.contains_symbol(name),
            Expr::Sin(a) | Expr::Cos(a) => a.contains_symbol(name),
        }
    }

    /// Replace every occurrence of `name` by `with`, then renormalize.
    pub fn subst(&self, name: &str, with: &Expr) -> Expr {
        self.subst_raw(name, with).normalize()
    }

    fn subst_raw(&self, name: &str, with: &Expr) -> Expr {
        match self {
            Expr::Num(_) => self.clone(),
            Expr::Sym(s) => {
                if s.as_str() == name {
                    with.clone()
                } else {
                    self.clone()
                }
            }
            Expr::Sum(es) => Expr::Sum(es.iter().map(|e| e.subst_raw(name, with)).collect()),
            Expr::Prod(es) => Expr::Prod(es.iter().map(|e| e.subst_raw(name, with)).collect()),
            Expr::Pow(b, q) => Expr::Pow(Box::new(b.subst_raw(name, with)), q.clone()),
            Expr::Sin(a) => Expr::Sin(Box::new(a.subst_raw(name, with))),
            Expr::Cos(a) => Expr::Cos(Box::new(a.subst_raw(name, with))),
        }
    }

    /// Rewrite `sin(k·var)` / `cos(k·var)` as Chebyshev polynomials in the
    /// supplied unit-circle pair and drop all other dependence on `var`.
    /// Errors if `var` occurs outside harmonics of itself.
    pub fn subst_trig_unit(
        &self,
        var: &str,
        cos_v: &Expr,
        sin_v: &Expr,
    ) -> Result<Expr, ExprError> {
        Ok(self.subst_trig_raw(var, cos_v, sin_v)?.normalize())
    }

    fn subst_trig_raw(&self, var: &str, cos_v: &Expr, sin_v: &Expr) -> Result<Expr, ExprError> {
        match self {
            Expr::Num(_) => Ok(self.clone()),
            Expr::Sym(s) => {
                if s.as_str() == var {
                    Err(ExprError::NonPolynomial(var.to_string()))
                } else {
                    Ok(self.clone())
                }
            }
            Expr::Sum(es) => Ok(Expr::Sum(
                es.iter()
                    .map(|e| e.subst_trig_raw(var, cos_v, sin_v))
                    .collect::<Result<Vec<_>, _>>()?,
            )),
            Expr::Prod(es) => Ok(Expr::Prod(
                es.iter()
                    .map(|e| e.subst_trig_raw(var, cos_v, sin_v))
                    .collect::<Result<Vec<_>, _>>()?,
            )),
            Expr::Pow(b, q) => Ok(Expr::Pow(
                Box::new(b.subst_trig_raw(var, cos_v, sin_v)?),
                q.clone(),
            )),
            Expr::Sin(a) | Expr::Cos(a) => {
                let is_sin = matches!(self, Expr::Sin(_));
                if !a.contains_symbol(var) {
                    return Ok(self.clone());
                }
                let k = harmonic_of(a, var).ok_or(ExprError::NonPolynomial(var.to_string()))?;
                let (c, s) = chebyshev_pair(k, cos_v, sin_v);
                Ok(if is_sin { s } else { c })
            }
        }
    }

    pub fn normalize(&self) -> Expr {
        normal::normalize(self)
    }

    /// Structural total order used for canonical sorting.
    pub fn cmp_expr(&self, other: &Expr) -> Ordering {
        normal::cmp_expr(self, other)
    }
}

/// If `a` normalizes to `k·var` with integer `k > 0` returns `k`.
fn harmonic_of(a: &Expr, var: &str) -> Option<i64> {
    let n = a.normalize();
    match &n {
        Expr::Sym(s) if s.as_str() == var => Some(1),
        Expr::Prod(fs) if fs.len() == 2 => match (&fs[0], &fs[1]) {
            (Expr::Num(k), Expr::Sym(s)) if s.as_str() == var => {
                let k = crate::rat::to_i64(k)?;
                if k > 0 {
                    Some(k)
                } else {
                    None
                }
            }
            _ => None,
        },
        _ => None,
    }
}

/// (cos k·v, sin k·v) expanded in a given unit-circle pair by the
/// angle-addition recurrence.
fn chebyshev_pair(k: i64, c: &Expr, s: &Expr) -> (Expr, Expr) {
    let mut ck = Expr::one();
    let mut sk = Expr::zero();
    for _ in 0..k {
        let c2 = (ck.clone() * c.clone() - sk.clone() * s.clone()).normalize();
        let s2 = (sk.clone() * c.clone() + ck.clone() * s.clone()).normalize();
        ck = c2;
        sk = s2;
    }
    (ck, sk)
}

impl core::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Sum(vec![self, rhs])
    }
}

impl core::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sum(vec![self, -rhs])
    }
}

impl core::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Prod(vec![self, rhs])
    }
}

impl core::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Prod(vec![self, rhs.pow_i(-1)])
    }
}

impl core::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Prod(vec![Expr::num(-1), self])
    }
}

/// Sum of an iterator of expressions (unnormalized).
pub fn sum_of(items: impl IntoIterator<Item = Expr>) -> Expr {
    let v: Vec<Expr> = items.into_iter().collect();
    match v.len() {
        0 => Expr::zero(),
        1 => v.into_iter().next().unwrap(),
        _ => Expr::Sum(v),
    }
}

/// Product of an iterator of expressions (unnormalized).
pub fn prod_of(items: impl IntoIterator<Item = Expr>) -> Expr {
    let v: Vec<Expr> = items.into_iter().collect();
    match v.len() {
        0 => Expr::one(),
        1 => v.into_iter().next().unwrap(),
        _ => Expr::Prod(v),
    }
}
