//! Canonical infix printer; inverse of the parser on normalized trees.

use super::Expr;
use crate::rat::{format_rat, is_integer, Rat};
use core::fmt;
use num_traits::{One, Signed};

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self, f, 0)
    }
}

/// Precedence levels: 0 sum, 1 product, 2 power/atom.
fn write_expr(e: &Expr, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
    match e {
        Expr::Num(r) => write_num(r, f, prec),
        Expr::Sym(s) => f.write_str(s.as_str()),
        Expr::Sum(items) => {
            if prec > 0 {
                f.write_str("(")?;
            }
            for (i, it) in items.iter().enumerate() {
                if i == 0 {
                    write_expr(it, f, 1)?;
                } else if let Some(neg) = negated_view(it) {
                    f.write_str(" - ")?;
                    write_expr(&neg, f, 1)?;
                } else {
                    f.write_str(" + ")?;
                    write_expr(it, f, 1)?;
                }
            }
            if prec > 0 {
                f.write_str(")")?;
            }
            Ok(())
        }
        Expr::Prod(items) => {
            if prec > 1 {
                f.write_str("(")?;
            }
            for (i, it) in items.iter().enumerate() {
                if i > 0 {
                    f.write_str("*")?;
                }
                write_expr(it, f, 2)?;
            }
            if prec > 1 {
                f.write_str(")")?;
            }
            Ok(())
        }
        Expr::Pow(b, q) => {
            write_expr(b, f, 2)?;
            f.write_str("^")?;
            if is_integer(q) && !q.is_negative() {
                f.write_str(&format_rat(q))
            } else {
                write!(f, "({})", format_rat(q))
            }
        }
        Expr::Sin(a) => write!(f, "sin({a})"),
        Expr::Cos(a) => write!(f, "cos({a})"),
    }
}

fn write_num(r: &Rat, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
    let needs_paren = prec > 1 && (!is_integer(r) || r.is_negative());
    if needs_paren {
        write!(f, "({})", format_rat(r))
    } else {
        f.write_str(&format_rat(r))
    }
}

/// If a term is a product with a negative leading coefficient, produce the
/// positive remainder so sums print with `-`.
fn negated_view(e: &Expr) -> Option<Expr> {
    match e {
        Expr::Num(r) if r.is_negative() => Some(Expr::Num(-r.clone())),
        Expr::Prod(items) => match items.first() {
            Some(Expr::Num(r)) if r.is_negative() => {
                let mut out = items.clone();
                let nr = -r.clone();
                if nr.is_one() && out.len() > 1 {
                    out.remove(0);
                } else {
                    out[0] = Expr::Num(nr);
                }
                Some(if out.len() == 1 {
                    out.into_iter().next().unwrap()
                } else {
                    Expr::Prod(out)
                })
            }
            _ => None,
        },
        _ => None,
    }
}
