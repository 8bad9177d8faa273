//! Exact vanishing analysis: which coefficient vectors make selected
//! leading-term functions vanish identically.
//!
//! Two independent exact methods guard against transcription error:
//! symbolic coefficient extraction from denominator-free forms, and the
//! rank of the leading terms sampled at rational chart points (rational
//! circle parametrizations keep trig values and radicals exact). The
//! symbolic kernel is always a subspace of the true kernel and the
//! sampled kernel always contains it, so agreement pins the answer.

use crate::charts::{self, ChartTag, Coeffs10, COEFF_NAMES};
use crate::expr::{prod_of, Binding, Expr};
use crate::rat::{rat_i, Rat};
use crate::rng::SplitMix64;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use num_traits::{One, Zero};

#[derive(Clone, Debug)]
pub struct KernelReport {
    pub chart: ChartTag,
    /// Selected leading-term indices, 0-based (0 => F1).
    pub selected: Vec<usize>,
    pub dimension: usize,
    pub basis: Vec<Coeffs10>,
    pub sampled_dimension: usize,
    pub methods_agree: bool,
}

/// Exact reduced row echelon form; returns pivot column indices.
fn rref(rows: &mut Vec<[Rat; 10]>) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0usize;
    for c in 0..10 {
        let Some(sel) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, sel);
        let inv = rows[r][c].clone().recip();
        for x in rows[r].iter_mut() {
            *x = x.clone() * &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for c2 in 0..10 {
                    let sub = &rows[r][c2] * &f;
                    rows[i][c2] = &rows[i][c2] - sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    pivots
}

/// Nullspace basis (canonical: each free column set to one).
fn nullspace(mut rows: Vec<[Rat; 10]>) -> Vec<Coeffs10> {
    let pivots = rref(&mut rows);
    let mut basis = Vec::new();
    for free in 0..10usize {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = Coeffs10::zero();
        v.0[free] = rat_i(1);
        for (ri, &pc) in pivots.iter().enumerate() {
            v.0[pc] = -rows[ri][free].clone();
        }
        basis.push(v);
    }
    basis
}

fn matrix_vector_is_zero(rows: &[[Rat; 10]], v: &Coeffs10) -> bool {
    rows.iter().all(|row| {
        let mut acc = Rat::zero();
        for c in 0..10 {
            acc += &row[c] * &v.0[c];
        }
        acc.is_zero()
    })
}

/// Symbolic rows: decompose each selected denominator-free leading term
/// into structural classes (monomial × radical/trig signature); every
/// class coefficient is a linear form in the ten constants.
fn symbolic_rows(chart: ChartTag, selected: &[usize]) -> Vec<[Rat; 10]> {
    let coeff = |i: usize| Expr::sym(COEFF_NAMES[i]);
    let cleared = charts::cleared_terms_with(chart, &coeff);
    let mut groups: BTreeMap<String, [Rat; 10]> = BTreeMap::new();
    for &j in selected {
        for (c, factors) in crate::expr::normal_terms(&cleared[j]) {
            let mut slot: Option<usize> = None;
            let mut rest: Vec<Expr> = Vec::new();
            for (base, exp) in factors {
                match &base {
                    Expr::Sym(s)
                        if COEFF_NAMES.contains(&s.as_str()) =>
                    {
                        assert!(exp.is_one() && slot.is_none(), "leading terms are linear");
                        slot = Some(
                            COEFF_NAMES
                                .iter()
                                .position(|n| *n == s.as_str())
                                .unwrap(),
                        );
                    }
                    _ => rest.push(Expr::Pow(alloc::boxed::Box::new(base), exp)),
                }
            }
            let slot = slot.expect("every term carries one coefficient");
            let key = format!("F{j}|{}", prod_of(rest.clone()).normalize());
            groups.entry(key).or_insert_with(|| {
                core::array::from_fn(|_| Rat::zero())
            })[slot] += c;
        }
    }
    groups.into_values().collect()
}

/// Exact rational sample points where all chart leading terms evaluate
/// exactly (unit-circle parametrizations for polar angles and elliptic
/// radicals).
fn sample_binding(chart: ChartTag, rng: &mut SplitMix64) -> Option<Binding> {
    let mut b = Binding::new();
    match chart {
        ChartTag::Cartesian => {
            b.set_exact("x1", rng.small_rat(9, 4));
            b.set_exact("x2", rng.small_rat(9, 4));
        }
        ChartTag::Polar => {
            let t = rng.small_rat(9, 4);
            let one = rat_i(1);
            let den = &one + &t * &t;
            let c = (&one - &t * &t) / den.clone();
            let s = rat_i(2) * &t / den;
            let mut r = rng.small_rat(9, 4);
            if r <= Rat::zero() {
                r = -r + rat_i(1);
            }
            b.set_exact("r", r);
            b.set_unit_circle("th", c, s);
        }
        ChartTag::Parabolic => {
            b.set_exact("xi", rng.small_rat(9, 4));
            b.set_exact("eta", rng.small_rat(9, 4));
        }
        ChartTag::Elliptic => {
            let t = rng.small_rat(7, 5);
            let one = rat_i(1);
            let uu = rat_i(2) * &t / (&one + &t * &t);
            let tv = rng.small_rat(7, 5);
            if tv.is_zero() {
                return None;
            }
            let vv = (&tv * &tv + &one) / (rat_i(2) * &tv);
            // interior points only: the radical weights vanish on the
            // boundary u = ±1, v = 1 and rows degenerate there
            if uu.is_zero() || &uu * &uu == one || vv <= one {
                return None;
            }
            b.set_exact("u", uu);
            b.set_exact("v", vv);
        }
    }
    Some(b)
}

fn sampled_rows(
    chart: ChartTag,
    selected: &[usize],
    points: usize,
    seed: u64,
) -> Vec<[Rat; 10]> {
    let coeff = |i: usize| Expr::sym(COEFF_NAMES[i]);
    let lt = charts::leading_terms_with(chart, &coeff);
    let mut rng = SplitMix64::new(seed);
    let mut rows = Vec::new();
    let mut collected = 0usize;
    let mut guard = 0usize;
    while collected < points && guard < points * 40 {
        guard += 1;
        let Some(mut b) = sample_binding(chart, &mut rng) else {
            continue;
        };
        let mut point_rows = Vec::with_capacity(selected.len());
        let mut ok = true;
        'outer: for &j in selected {
            let mut row: [Rat; 10] = core::array::from_fn(|_| Rat::zero());
            for i in 0..10usize {
                for (k, other) in COEFF_NAMES.iter().enumerate() {
                    b.set_exact(other, if k == i { rat_i(1) } else { rat_i(0) });
                }
                match lt.f[j].eval_exact(&b) {
                    Ok(v) => row[i] = v,
                    Err(_) => {
                        ok = false;
                        break 'outer;
                    }
                }
            }
            point_rows.push(row);
        }
        if ok {
            rows.extend(point_rows);
            collected += 1;
        }
    }
    rows
}

/// Exact kernel of the selected leading-term functions in the space of
/// the ten coefficients, by both symbolic extraction and sampled rank.
pub fn vanishing_kernel(chart: ChartTag, selected: &[usize]) -> KernelReport {
    assert!(
        !selected.is_empty() && selected.iter().all(|j| *j < 4),
        "select a nonempty subset of F1..F4"
    );
    let sym_rows = symbolic_rows(chart, selected);
    let basis = nullspace(sym_rows);

    let min_points = 12usize;
    let srows = sampled_rows(chart, selected, min_points, 0x5EED_0001);
    let sampled_basis = nullspace(srows.clone());
    let sampled_dimension = sampled_basis.len();

    let methods_agree = basis.len() == sampled_dimension
        && basis.iter().all(|v| matrix_vector_is_zero(&srows, v));

    KernelReport {
        chart,
        selected: selected.to_vec(),
        dimension: basis.len(),
        basis,
        sampled_dimension,
        methods_agree,
    }
}

/// Round-trip check: substituting a kernel vector kills the selected
/// leading terms symbolically.
pub fn kernel_annihilates(report: &KernelReport) -> bool {
    report.basis.iter().all(|v| {
        let lt = charts::leading_terms(report.chart, v);
        report.selected.iter().all(|&j| lt.f[j].is_zero())
    })
}
