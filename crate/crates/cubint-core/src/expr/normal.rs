//! Normalization to expanded sum-of-products form.
//!
//! Invariants of the normal form:
//! - sums are flat, like terms collected, terms in canonical order;
//! - each term is `coeff · Π base^exp` with distinct bases;
//! - composite (sum) bases carry only negative integer or half-integer
//!   exponents `<= 1/2`; integer powers of sums are expanded;
//! - at most one trigonometric factor per term, exponent 1, argument
//!   sign-canonical (product-to-sum rewriting);
//! - rational content of composite bases is extracted so that scaled
//!   copies of the same base collide structurally.

use super::Expr;
use crate::rat::{is_integer, pow_exact, rat_gcd, rat_i, to_i64, Rat};
use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug)]
pub(crate) struct NTerm {
    pub coeff: Rat,
    /// Sorted by base under `cmp_expr`; bases unique; exponents nonzero.
    pub factors: Vec<(Expr, Rat)>,
}

#[derive(Clone, Debug)]
pub(crate) struct NF {
    /// Sorted by factor key; like keys merged; zero coefficients dropped.
    pub terms: Vec<NTerm>,
}

impl NTerm {
    fn constant(c: Rat) -> Self {
        NTerm {
            coeff: c,
            factors: Vec::new(),
        }
    }
}

impl NF {
    pub fn zero() -> Self {
        NF { terms: Vec::new() }
    }
    pub fn constant(c: Rat) -> Self {
        if c.is_zero() {
            NF::zero()
        } else {
            NF {
                terms: vec![NTerm::constant(c)],
            }
        }
    }
    pub fn one() -> Self {
        NF::constant(Rat::one())
    }
    fn single(t: NTerm) -> Self {
        if t.coeff.is_zero() {
            NF::zero()
        } else {
            NF { terms: vec![t] }
        }
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

pub fn cmp_expr(a: &Expr, b: &Expr) -> Ordering {
    fn rank(e: &Expr) -> u8 {
        match e {
            Expr::Num(_) => 0,
            Expr::Sym(_) => 1,
            Expr::Pow(_, _) => 2,
            Expr::Sin(_) => 3,
            Expr::Cos(_) => 4,
            Expr::Prod(_) => 5,
            Expr::Sum(_) => 6,
        }
    }
    match rank(a).cmp(&rank(b)) {
        Ordering::Equal => {}
        o => return o,
    }
    match (a, b) {
        (Expr::Num(x), Expr::Num(y)) => x.cmp(y),
        (Expr::Sym(x), Expr::Sym(y)) => x.cmp(y),
        (Expr::Pow(bx, ex), Expr::Pow(by, ey)) => {
            cmp_expr(bx, by).then_with(|| ex.cmp(ey))
        }
        (Expr::Sin(x), Expr::Sin(y)) | (Expr::Cos(x), Expr::Cos(y)) => cmp_expr(x, y),
        (Expr::Prod(xs), Expr::Prod(ys)) | (Expr::Sum(xs), Expr::Sum(ys)) => {
            for (x, y) in xs.iter().zip(ys.iter()) {
                match cmp_expr(x, y) {
                    Ordering::Equal => {}
                    o => return o,
                }
            }
            xs.len().cmp(&ys.len())
        }
        _ => unreachable!(),
    }
}

fn cmp_factors(a: &[(Expr, Rat)], b: &[(Expr, Rat)]) -> Ordering {
    for ((ba, ea), (bb, eb)) in a.iter().zip(b.iter()) {
        match cmp_expr(ba, bb).then_with(|| ea.cmp(eb)) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

pub(crate) fn add_nf(a: NF, b: NF) -> NF {
    if a.is_zero() {
        return b;
    }
    if b.is_zero() {
        return a;
    }
    let mut out: Vec<NTerm> = Vec::with_capacity(a.terms.len() + b.terms.len());
    let mut ia = a.terms.into_iter().peekable();
    let mut ib = b.terms.into_iter().peekable();
    loop {
        match (ia.peek(), ib.peek()) {
            (Some(ta), Some(tb)) => match cmp_factors(&ta.factors, &tb.factors) {
                Ordering::Less => out.push(ia.next().unwrap()),
                Ordering::Greater => out.push(ib.next().unwrap()),
                Ordering::Equal => {
                    let ta = ia.next().unwrap();
                    let tb = ib.next().unwrap();
                    let c = ta.coeff + tb.coeff;
                    if !c.is_zero() {
                        out.push(NTerm {
                            coeff: c,
                            factors: ta.factors,
                        });
                    }
                }
            },
            (Some(_), None) => out.push(ia.next().unwrap()),
            (None, Some(_)) => out.push(ib.next().unwrap()),
            (None, None) => break,
        }
    }
    NF { terms: out }
}

fn sort_merge_terms(mut terms: Vec<NTerm>) -> NF {
    terms.sort_by(|x, y| cmp_factors(&x.factors, &y.factors));
    let mut out: Vec<NTerm> = Vec::with_capacity(terms.len());
    for t in terms {
        if t.coeff.is_zero() {
            continue;
        }
        if let Some(last) = out.last_mut() {
            if cmp_factors(&last.factors, &t.factors) == Ordering::Equal {
                last.coeff += t.coeff;
                if last.coeff.is_zero() {
                    out.pop();
                }
                continue;
            }
        }
        out.push(t);
    }
    NF { terms: out }
}

/// Multiply a term by `base^exp`, folding into existing factors.
/// May expand into several terms (integer powers of sums, exact roots).
fn mul_term_by_power(t: NTerm, base: &Expr, exp: &Rat) -> NF {
    if exp.is_zero() || t.coeff.is_zero() {
        return NF::single(t);
    }
    match t
        .factors
        .binary_search_by(|(b, _)| cmp_expr(b, base))
    {
        Ok(pos) => {
            let mut t = t;
            let (b, old) = t.factors.remove(pos);
            let newexp = old + exp;
            attach_power(t, b, newexp)
        }
        Err(_) => attach_power(t, base.clone(), exp.clone()),
    }
}

/// Attach `base^exp` to a term that does not currently contain `base`.
fn attach_power(mut t: NTerm, base: Expr, exp: Rat) -> NF {
    if exp.is_zero() {
        return NF::single(t);
    }
    match &base {
        Expr::Num(r) => {
            if let Some(v) = pow_exact(r, &exp) {
                t.coeff *= v;
                NF::single(t)
            } else {
                insert_factor(&mut t, base, exp);
                NF::single(t)
            }
        }
        Expr::Sum(_) => {
            if is_integer(&exp) {
                let k = to_i64(&exp).expect("exponent fits i64");
                if k >= 1 {
                    let base_nf = nf_of(&base);
                    let powed = pow_nf_int(base_nf, k as u64);
                    mul_nf(NF::single(t), powed)
                } else {
                    insert_factor(&mut t, base, exp);
                    NF::single(t)
                }
            } else if crate::rat::is_half_integer(&exp) {
                // base^(m + 1/2): keep the half power opaque, expand base^m.
                let half = crate::rat::rat(1, 2);
                let m = (&exp - &half).to_integer();
                let m: i64 = to_i64(&Rat::from_integer(m.clone())).unwrap_or(0);
                if m > 0 {
                    let base_nf = nf_of(&base);
                    let powed = pow_nf_int(base_nf, m as u64);
                    let with_half = {
                        insert_factor(&mut t, base, half);
                        NF::single(t)
                    };
                    mul_nf(with_half, powed)
                } else {
                    insert_factor(&mut t, base, exp);
                    NF::single(t)
                }
            } else {
                insert_factor(&mut t, base, exp);
                NF::single(t)
            }
        }
        _ => {
            insert_factor(&mut t, base, exp);
            NF::single(t)
        }
    }
}

fn insert_factor(t: &mut NTerm, base: Expr, exp: Rat) {
    if exp.is_zero() {
        return;
    }
    match t.factors.binary_search_by(|(b, _)| cmp_expr(b, &base)) {
        Ok(_) => unreachable!("factor collision handled by caller"),
        Err(pos) => t.factors.insert(pos, (base, exp)),
    }
}

fn mul_terms(a: &NTerm, b: &NTerm) -> NF {
    let coeff = &a.coeff * &b.coeff;
    if coeff.is_zero() {
        return NF::zero();
    }
    let mut acc = NF::single(NTerm {
        coeff,
        factors: a.factors.clone(),
    });
    for (base, exp) in &b.factors {
        let mut next = NF::zero();
        for t in acc.terms {
            next = add_nf(next, mul_term_by_power(t, base, exp));
        }
        acc = next;
    }
    // restore the trig linear basis
    let mut out = NF::zero();
    for t in acc.terms {
        out = add_nf(out, trig_fold(t));
    }
    out
}

pub(crate) fn mul_nf(a: NF, b: NF) -> NF {
    if a.is_zero() || b.is_zero() {
        return NF::zero();
    }
    let mut terms: Vec<NTerm> = Vec::new();
    for ta in &a.terms {
        for tb in &b.terms {
            let prod = mul_terms(ta, tb);
            terms.extend(prod.terms);
        }
    }
    sort_merge_terms(terms)
}

fn pow_nf_int(base: NF, k: u64) -> NF {
    let mut result = NF::one();
    let mut sq = base;
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            result = mul_nf(result, sq.clone());
        }
        k >>= 1;
        if k > 0 {
            sq = mul_nf(sq.clone(), sq);
        }
    }
    result
}

/// Positive rational content of the coefficients.
fn content_of(nf: &NF) -> Rat {
    let mut c = Rat::zero();
    for t in &nf.terms {
        c = rat_gcd(&c, &t.coeff);
    }
    if c.is_zero() {
        Rat::one()
    } else {
        c
    }
}

fn scale_nf(nf: NF, s: &Rat) -> NF {
    NF {
        terms: nf
            .terms
            .into_iter()
            .map(|mut t| {
                t.coeff *= s;
                t
            })
            .collect(),
    }
}

pub(crate) fn pow_nf(b: NF, q: &Rat) -> NF {
    if q.is_zero() {
        return NF::one();
    }
    if q.is_one() {
        return b;
    }
    if b.is_zero() {
        if q.is_positive() {
            return NF::zero();
        }
        // 0^negative: kept opaque; evaluation reports the error
        let t = NTerm {
            coeff: Rat::one(),
            factors: vec![(Expr::Num(Rat::zero()), q.clone())],
        };
        return NF::single(t);
    }
    if b.terms.len() == 1 {
        // distribute over a single term (principal-branch semantics)
        let t = b.terms.into_iter().next().unwrap();
        let mut acc = attach_power(NTerm::constant(Rat::one()), Expr::Num(t.coeff), q.clone());
        for (base, exp) in t.factors {
            let mut next = NF::zero();
            let e = exp * q;
            for tt in acc.terms {
                next = add_nf(next, mul_term_by_power(tt, &base, &e));
            }
            acc = next;
        }
        let mut out = NF::zero();
        for t in acc.terms {
            out = add_nf(out, trig_fold(t));
        }
        return out;
    }
    // genuine sum base
    if is_integer(q) {
        let k = to_i64(q).expect("integer exponent fits i64");
        if k >= 0 {
            return pow_nf_int(b, k as u64);
        }
        // negative: canonicalize sign and content, keep atomic
        let content = content_of(&b);
        let lead_neg = b.terms[0].coeff.is_negative();
        let scale = if lead_neg { -content.clone() } else { content.clone() };
        let canon = scale_nf(b, &scale.clone().recip());
        let base_expr = to_expr(canon);
        let coeff = pow_exact(&scale, q).expect("integer power of rational");
        let t = NTerm {
            coeff,
            factors: vec![(base_expr, q.clone())],
        };
        return NF::single(t);
    }
    // fractional exponent of a sum: extract positive content only
    let content = content_of(&b);
    let canon = scale_nf(b, &content.clone().recip());
    let base_expr = to_expr(canon);
    let t = attach_power(NTerm::constant(Rat::one()), Expr::Num(content), q.clone());
    let mut out = NF::zero();
    for tt in t.terms {
        out = add_nf(out, mul_term_by_power(tt, &base_expr, q));
    }
    out
}

/// Leading coefficient of a normalized expression is negative.
pub(crate) fn neg_leading(nf: &NF) -> bool {
    nf.terms
        .first()
        .map(|t| t.coeff.is_negative())
        .unwrap_or(false)
}

pub(crate) fn norm_sin(arg: NF) -> NF {
    if arg.is_zero() {
        return NF::zero();
    }
    let (arg, sign) = if neg_leading(&arg) {
        (scale_nf(arg, &rat_i(-1)), -1i64)
    } else {
        (arg, 1)
    };
    let t = NTerm {
        coeff: rat_i(sign),
        factors: vec![(Expr::Sin(Box::new(to_expr(arg))), Rat::one())],
    };
    NF::single(t)
}

pub(crate) fn norm_cos(arg: NF) -> NF {
    if arg.is_zero() {
        return NF::one();
    }
    let arg = if neg_leading(&arg) {
        scale_nf(arg, &rat_i(-1))
    } else {
        arg
    };
    let t = NTerm {
        coeff: Rat::one(),
        factors: vec![(Expr::Cos(Box::new(to_expr(arg))), Rat::one())],
    };
    NF::single(t)
}

#[derive(Clone)]
struct TrigAtom {
    is_sin: bool,
    arg: Expr,
}

/// Rewrite products of trig atoms so each term keeps at most one,
/// using sin a sin b = (cos(a-b) - cos(a+b))/2 and friends.
fn trig_fold(t: NTerm) -> NF {
    let mut atoms: Vec<TrigAtom> = Vec::new();
    let mut rest: Vec<(Expr, Rat)> = Vec::new();
    for (base, exp) in t.factors {
        let trig = matches!(base, Expr::Sin(_) | Expr::Cos(_));
        if trig && is_integer(&exp) && exp.is_positive() {
            let k = to_i64(&exp).unwrap_or(0);
            let (is_sin, arg) = match &base {
                Expr::Sin(a) => (true, (**a).clone()),
                Expr::Cos(a) => (false, (**a).clone()),
                _ => unreachable!(),
            };
            for _ in 0..k {
                atoms.push(TrigAtom {
                    is_sin,
                    arg: arg.clone(),
                });
            }
        } else {
            rest.push((base, exp));
        }
    }
    if atoms.len() <= 1 {
        let mut factors = rest;
        if let Some(a) = atoms.pop() {
            let base = if a.is_sin {
                Expr::Sin(Box::new(a.arg))
            } else {
                Expr::Cos(Box::new(a.arg))
            };
            match factors.binary_search_by(|(b, _)| cmp_expr(b, &base)) {
                Ok(_) => unreachable!(),
                Err(pos) => factors.insert(pos, (base, Rat::one())),
            }
        }
        return NF::single(NTerm {
            coeff: t.coeff,
            factors,
        });
    }
    // fold atoms pairwise into an NF whose terms carry <= 1 trig factor
    let first = atoms[0].clone();
    let mut running = trig_atom_nf(&first);
    for a in &atoms[1..] {
        let mut next = NF::zero();
        for term in &running.terms {
            next = add_nf(next, mul_trig_term(term, a));
        }
        running = next;
    }
    let carrier = NF::single(NTerm {
        coeff: t.coeff,
        factors: rest,
    });
    mul_nf(carrier, running)
}

fn trig_atom_nf(a: &TrigAtom) -> NF {
    let arg_nf = nf_of(&a.arg);
    if a.is_sin {
        norm_sin(arg_nf)
    } else {
        norm_cos(arg_nf)
    }
}

/// Multiply a term holding at most one trig factor by one more atom.
fn mul_trig_term(t: &NTerm, a: &TrigAtom) -> NF {
    let mut existing: Option<TrigAtom> = None;
    let mut rest: Vec<(Expr, Rat)> = Vec::new();
    for (base, exp) in &t.factors {
        match base {
            Expr::Sin(arg) if exp.is_one() => {
                existing = Some(TrigAtom {
                    is_sin: true,
                    arg: arg.as_ref().clone(),
                })
            }
            Expr::Cos(arg) if exp.is_one() => {
                existing = Some(TrigAtom {
                    is_sin: false,
                    arg: arg.as_ref().clone(),
                })
            }
            _ => rest.push((base.clone(), exp.clone())),
        }
    }
    let carrier = NF::single(NTerm {
        coeff: t.coeff.clone(),
        factors: rest,
    });
    let product = match existing {
        None => trig_atom_nf(a),
        Some(e) => {
            let x = nf_of(&e.arg);
            let y = nf_of(&a.arg);
            let sum = add_nf(x.clone(), y.clone());
            let dif = add_nf(x, scale_nf(y, &rat_i(-1)));
            let half = crate::rat::rat(1, 2);
            match (e.is_sin, a.is_sin) {
                (true, true) => {
                    // (cos(x-y) - cos(x+y))/2
                    let c1 = norm_cos(dif);
                    let c2 = norm_cos(sum);
                    scale_nf(add_nf(c1, scale_nf(c2, &rat_i(-1))), &half)
                }
                (false, false) => {
                    // (cos(x+y) + cos(x-y))/2
                    let c1 = norm_cos(sum);
                    let c2 = norm_cos(dif);
                    scale_nf(add_nf(c1, c2), &half)
                }
                (true, false) => {
                    // sin x cos y = (sin(x+y) + sin(x-y))/2
                    let s1 = norm_sin(sum);
                    let s2 = norm_sin(dif);
                    scale_nf(add_nf(s1, s2), &half)
                }
                (false, true) => {
                    // cos x sin y = (sin(x+y) - sin(x-y))/2
                    let s1 = norm_sin(sum);
                    let s2 = norm_sin(dif);
                    scale_nf(add_nf(s1, scale_nf(s2, &rat_i(-1))), &half)
                }
            }
        }
    };
    mul_nf(carrier, product)
}

pub(crate) fn nf_of(e: &Expr) -> NF {
    match e {
        Expr::Num(r) => NF::constant(r.clone()),
        Expr::Sym(s) => NF::single(NTerm {
            coeff: Rat::one(),
            factors: vec![(Expr::Sym(s.clone()), Rat::one())],
        }),
        Expr::Sum(es) => {
            let mut acc = NF::zero();
            for x in es {
                acc = add_nf(acc, nf_of(x));
            }
            acc
        }
        Expr::Prod(es) => {
            let mut acc = NF::one();
            for x in es {
                acc = mul_nf(acc, nf_of(x));
            }
            acc
        }
        Expr::Pow(b, q) => pow_nf(nf_of(b), q),
        Expr::Sin(a) => norm_sin(nf_of(a)),
        Expr::Cos(a) => norm_cos(nf_of(a)),
    }
}

pub(crate) fn to_expr(nf: NF) -> Expr {
    let mut items: Vec<Expr> = Vec::with_capacity(nf.terms.len());
    for t in nf.terms {
        items.push(term_to_expr(t));
    }
    match items.len() {
        0 => Expr::Num(Rat::zero()),
        1 => items.into_iter().next().unwrap(),
        _ => Expr::Sum(items),
    }
}

fn term_to_expr(t: NTerm) -> Expr {
    let mut parts: Vec<Expr> = Vec::new();
    if !t.coeff.is_one() || t.factors.is_empty() {
        parts.push(Expr::Num(t.coeff));
    }
    for (base, exp) in t.factors {
        if exp.is_one() {
            parts.push(base);
        } else {
            parts.push(Expr::Pow(Box::new(base), exp));
        }
    }
    match parts.len() {
        0 => Expr::Num(Rat::one()),
        1 => parts.into_iter().next().unwrap(),
        _ => Expr::Prod(parts),
    }
}

pub fn normalize(e: &Expr) -> Expr {
    to_expr(nf_of(e))
}

/// Normalized term decomposition: (coefficient, factors) per term.
pub(crate) fn terms_of(e: &Expr) -> Vec<(Rat, Vec<(Expr, Rat)>)> {
    nf_of(e)
        .terms
        .into_iter()
        .map(|t| (t.coeff, t.factors))
        .collect()
}
