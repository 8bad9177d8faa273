//! Polynomial coefficient extraction.

use super::normal::{self, cmp_expr};
use super::{Expr, ExprError};
use crate::rat::{to_i64, Rat};
use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;

/// Decompose `e` as a polynomial in `vars`: a map from exponent tuples
/// (ordered as `vars`) to coefficient expressions free of `vars`.
/// Errors if any term depends non-polynomially on a member of `vars`.
pub fn poly_coeffs(
    e: &Expr,
    vars: &[&str],
) -> Result<BTreeMap<Vec<u32>, Expr>, ExprError> {
    let mut groups: BTreeMap<Vec<u32>, Vec<(Rat, Vec<(Expr, Rat)>)>> = BTreeMap::new();
    for (coeff, factors) in normal::terms_of(e) {
        let mut exps = alloc::vec![0u32; vars.len()];
        let mut rest: Vec<(Expr, Rat)> = Vec::new();
        for (base, exp) in factors {
            match &base {
                Expr::Sym(s) if vars.contains(&s.as_str()) => {
                    let idx = vars.iter().position(|v| *v == s.as_str()).unwrap();
                    let k = to_i64(&exp).filter(|k| *k >= 0).ok_or_else(|| {
                        ExprError::NonPolynomial(s.as_str().to_string())
                    })?;
                    exps[idx] = u32::try_from(k)
                        .map_err(|_| ExprError::NonPolynomial(s.as_str().to_string()))?;
                }
                _ => {
                    // a var hiding inside a composite base is non-polynomial
                    for v in vars {
                        if base.contains_symbol(v) {
                            return Err(ExprError::NonPolynomial((*v).to_string()));
                        }
                    }
                    rest.push((base, exp));
                }
            }
        }
        groups.entry(exps).or_default().push((coeff, rest));
    }
    let mut out = BTreeMap::new();
    for (exps, terms) in groups {
        let mut items: Vec<Expr> = Vec::with_capacity(terms.len());
        for (coeff, factors) in terms {
            let mut parts: Vec<Expr> = Vec::with_capacity(factors.len() + 1);
            parts.push(Expr::Num(coeff));
            for (base, exp) in factors {
                parts.push(Expr::Pow(alloc::boxed::Box::new(base), exp));
            }
            items.push(super::prod_of(parts));
        }
        let coeff_expr = super::sum_of(items).normalize();
        if !coeff_expr.is_zero() {
            out.insert(exps, coeff_expr);
        }
    }
    Ok(out)
}

/// Rebuild `Σ coeff · monomial`; inverse of `poly_coeffs` on its image.
pub fn poly_reconstruct(coeffs: &BTreeMap<Vec<u32>, Expr>, vars: &[&str]) -> Expr {
    let mut items: Vec<Expr> = Vec::new();
    for (exps, c) in coeffs {
        let mut parts = alloc::vec![c.clone()];
        for (i, k) in exps.iter().enumerate() {
            if *k > 0 {
                parts.push(Expr::sym(vars[i]).pow_i(*k as i64));
            }
        }
        items.push(super::prod_of(parts));
    }
    super::sum_of(items).normalize()
}

/// Keys ordered consistently with the normal form (used by kernel rows).
#[allow(dead_code)]
pub(crate) fn cmp_keys(a: &Expr, b: &Expr) -> core::cmp::Ordering {
    cmp_expr(a, b)
}
