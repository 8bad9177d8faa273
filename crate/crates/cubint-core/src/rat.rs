//! Exact rational arithmetic helpers on top of `num-rational`.

use alloc::string::{String, ToString};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;
pub type Int = BigInt;

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(Int::from(num), Int::from(den))
}

pub fn rat_i(n: i64) -> Rat {
    Rat::from_integer(Int::from(n))
}

pub fn rat_zero() -> Rat {
    Rat::zero()
}

pub fn rat_one() -> Rat {
    Rat::one()
}

pub fn is_integer(r: &Rat) -> bool {
    r.denom().is_one()
}

/// True when `r = m + 1/2` for some integer `m`.
pub fn is_half_integer(r: &Rat) -> bool {
    *r.denom() == Int::from(2)
}

pub fn to_i64(r: &Rat) -> Option<i64> {
    if is_integer(r) {
        r.numer().to_i64()
    } else {
        None
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `base^exp` for integer `exp`; errors only on `0^negative`.
pub fn pow_int(base: &Rat, exp: i64) -> Option<Rat> {
    if base.is_zero() && exp < 0 {
        return None;
    }
    if exp == 0 {
        return Some(rat_one());
    }
    let p = base.pow(exp.unsigned_abs().try_into().ok()?);
    Some(if exp < 0 { p.recip() } else { p })
}

/// Exact `d`-th root of a nonnegative rational, when it exists.
pub fn exact_root(r: &Rat, d: u32) -> Option<Rat> {
    if r.is_negative() {
        return None;
    }
    if r.is_zero() {
        return Some(rat_zero());
    }
    let rn = r.numer().nth_root(d);
    let rd = r.denom().nth_root(d);
    if &rn.clone().pow(d) == r.numer() && &rd.clone().pow(d) == r.denom() {
        Some(Rat::new(rn, rd))
    } else {
        None
    }
}

/// Exact `r^q` for rational `q`, when representable as a rational.
pub fn pow_exact(base: &Rat, q: &Rat) -> Option<Rat> {
    let d: u32 = q.denom().to_u32()?;
    let n = q.numer().to_i64()?;
    if d == 1 {
        return pow_int(base, n);
    }
    let root = exact_root(base, d)?;
    pow_int(&root, n)
}

/// gcd of two nonnegative rationals: gcd of numerators over lcm of denominators.
pub fn rat_gcd(a: &Rat, b: &Rat) -> Rat {
    use num_integer::Integer;
    if a.is_zero() {
        return b.abs();
    }
    if b.is_zero() {
        return a.abs();
    }
    let an = a.numer().abs();
    let bn = b.numer().abs();
    let num = an.gcd(&bn);
    let den = a.denom().lcm(b.denom());
    Rat::new(num, den)
}

/// Render as `p` or `p/q`.
pub fn format_rat(r: &Rat) -> String {
    if is_integer(r) {
        r.numer().to_string()
    } else {
        let mut s = r.numer().to_string();
        s.push('/');
        s.push_str(&r.denom().to_string());
        s
    }
}

/// Parse `p`, `-p/q`, or a plain decimal-free fraction string.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: Int = n.trim().parse().ok()?;
        let d: Int = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(Rat::new(n, d))
    } else {
        let n: Int = s.parse().ok()?;
        Some(Rat::from_integer(n))
    }
}
