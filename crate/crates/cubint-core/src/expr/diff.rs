//! Partial differentiation.

use super::{is_variable, Expr, ExprError};
use crate::rat::Rat;
use alloc::boxed::Box;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use num_traits::One;

/// n-th partial derivative with respect to a declared variable, normalized.
pub fn diff(e: &Expr, var: &str, order: u32) -> Result<Expr, ExprError> {
    if !is_variable(var) {
        return Err(ExprError::NotAVariable(var.to_string()));
    }
    let mut cur = e.clone();
    for _ in 0..order {
        cur = d1(&cur, var).normalize();
    }
    Ok(cur)
}

fn d1(e: &Expr, v: &str) -> Expr {
    match e {
        Expr::Num(_) => Expr::zero(),
        Expr::Sym(s) => {
            if s.as_str() == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Sum(es) => Expr::Sum(es.iter().map(|x| d1(x, v)).collect()),
        Expr::Prod(es) => {
            let mut parts: Vec<Expr> = Vec::with_capacity(es.len());
            for (i, x) in es.iter().enumerate() {
                let dx = d1(x, v);
                if dx.is_zero() {
                    continue;
                }
                let mut fs: Vec<Expr> = Vec::with_capacity(es.len());
                for (j, y) in es.iter().enumerate() {
                    if i == j {
                        fs.push(dx.clone());
                    } else {
                        fs.push(y.clone());
                    }
                }
                parts.push(Expr::Prod(fs));
            }
            super::sum_of(parts)
        }
        Expr::Pow(b, q) => {
            let db = d1(b, v);
            if db.is_zero() {
                return Expr::zero();
            }
            let qm1 = q - Rat::one();
            Expr::Num(q.clone()) * Expr::Pow(b.clone(), qm1) * db
        }
        Expr::Sin(a) => {
            let da = d1(a, v);
            if da.is_zero() {
                return Expr::zero();
            }
            Expr::Cos(a.clone()) * da
        }
        Expr::Cos(a) => {
            let da = d1(a, v);
            if da.is_zero() {
                return Expr::zero();
            }
            Expr::Prod(vec![Expr::num(-1), Expr::Sin(a.clone()), da])
        }
    }
}

#[allow(dead_code)]
fn boxed(e: Expr) -> Box<Expr> {
    Box::new(e)
}
