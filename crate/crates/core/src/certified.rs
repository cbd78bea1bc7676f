//! Certified real arithmetic: closed rational enclosures `[lo, hi]` and
//! outward-rounded elementary functions.
//!
//! `ln`, `exp` and `sqrt` are evaluated in binary fixed point with explicit
//! ulp accounting, so every returned enclosure contains the true value.

use alloc::format;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rational::{self, Rational};
use crate::{Error, Result};

/// Default working precision in bits for formula evaluation.
pub const DEFAULT_BITS: u32 = 128;

/// Guard bits added on top of the requested precision.
const GUARD: u32 = 40;

/// A closed interval with rational endpoints known to contain a real value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Enclosure {
    lo: Rational,
    hi: Rational,
}

impl Enclosure {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "enclosure endpoints out of order");
        Enclosure { lo, hi }
    }

    pub fn point(x: Rational) -> Self {
        Enclosure { lo: x.clone(), hi: x }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / rational::int(2)
    }

    /// Half-width; an upper bound on `|midpoint − value|`.
    pub fn radius(&self) -> Rational {
        self.width() / rational::int(2)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    /// Ordering of the enclosed value relative to `x`, when decided.
    pub fn compare(&self, x: &Rational) -> Option<Ordering> {
        if self.hi < *x {
            Some(Ordering::Less)
        } else if self.lo > *x {
            Some(Ordering::Greater)
        } else if self.is_point() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// `⌊value⌋` when both endpoints share it.
    pub fn floor(&self) -> Option<BigInt> {
        let a = self.lo.floor().to_integer();
        let b = self.hi.floor().to_integer();
        (a == b).then_some(a)
    }

    pub fn add(&self, other: &Enclosure) -> Enclosure {
        Enclosure::new(&self.lo + &other.lo, &self.hi + &other.hi)
    }

    pub fn sub(&self, other: &Enclosure) -> Enclosure {
        Enclosure::new(&self.lo - &other.hi, &self.hi - &other.lo)
    }

    pub fn neg(&self) -> Enclosure {
        Enclosure::new(-&self.hi, -&self.lo)
    }

    pub fn add_rational(&self, x: &Rational) -> Enclosure {
        Enclosure::new(&self.lo + x, &self.hi + x)
    }

    pub fn scale(&self, k: &Rational) -> Enclosure {
        if k.is_negative() {
            Enclosure::new(&self.hi * k, &self.lo * k)
        } else {
            Enclosure::new(&self.lo * k, &self.hi * k)
        }
    }

    pub fn mul(&self, other: &Enclosure) -> Enclosure {
        let c = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = c.iter().min().cloned().unwrap_or_default();
        let hi = c.iter().max().cloned().unwrap_or_default();
        Enclosure::new(lo, hi)
    }

    pub fn recip(&self) -> Result<Enclosure> {
        if self.lo <= Rational::zero() && self.hi >= Rational::zero() {
            return Err(Error::domain("reciprocal of an enclosure containing 0"));
        }
        Ok(Enclosure::new(self.hi.recip(), self.lo.recip()))
    }

    pub fn powi(&self, n: i64) -> Result<Enclosure> {
        if self.lo.is_negative() {
            return Err(Error::domain("powi expects a nonnegative enclosure"));
        }
        let k = n.unsigned_abs() as usize;
        let e = Enclosure::new(num_traits::pow(self.lo.clone(), k), num_traits::pow(self.hi.clone(), k));
        if n < 0 {
            e.recip()
        } else {
            Ok(e)
        }
    }

    /// Widens both endpoints to multiples of `2^-bits`.
    pub fn round_out(&self, bits: u32) -> Enclosure {
        Enclosure::new(rational::round_down(&self.lo, bits), rational::round_up(&self.hi, bits))
    }

    /// Distance to the nearest integer, `‖x‖ ∈ [0, 1/2]`.
    pub fn nearest_int_distance(&self) -> Enclosure {
        let half = rational::half();
        let shift = self.lo.floor();
        let lo = &self.lo - &shift;
        let hi = &self.hi - &shift;
        let dist = |x: &Rational| -> Rational {
            let f = x - x.floor();
            let g = Rational::one() - &f;
            if f < g {
                f
            } else {
                g
            }
        };
        if hi >= rational::int(1) + &half {
            // spans at least one full half-period
            return Enclosure::new(Rational::zero(), half);
        }
        let (dlo, dhi) = (dist(&lo), dist(&hi));
        let mut min = if dlo < dhi { dlo.clone() } else { dhi.clone() };
        let mut max = if dlo > dhi { dlo } else { dhi };
        let one = rational::int(1);
        if lo <= half && half <= hi || lo <= &one + &half && &one + &half <= hi {
            max = half.clone();
        }
        if hi >= one {
            min = Rational::zero();
        }
        Enclosure::new(min, max)
    }
}

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits as usize
}

fn fixed_to_enclosure(value: &BigInt, err: u64, f: u32) -> Enclosure {
    let scale = pow2(f);
    let e = BigInt::from(err);
    Enclosure::new(
        Rational::new(value - &e, scale.clone()),
        Rational::new(value + &e, scale),
    )
}

/// `atanh(z)` for `0 ≤ z ≤ 1/3` at `f` fractional bits: (value, error in ulps).
fn atanh_fixed(z: &Rational, f: u32) -> (BigInt, u64) {
    let scale = pow2(f);
    let y = (z.numer() * &scale).div_floor(z.denom());
    let y2 = (&y * &y) >> f as usize;
    let mut p = y;
    let mut sum = BigInt::zero();
    let mut n: u64 = 0;
    while !p.is_zero() {
        sum += &p / BigInt::from(2 * n + 1);
        p = (&p * &y2) >> f as usize;
        n += 1;
    }
    (sum, 3 * n + 6)
}

/// Natural logarithm of a positive rational.
pub fn ln(x: &Rational, bits: u32) -> Result<Enclosure> {
    if !x.is_positive() {
        return Err(Error::domain(format!("ln of nonpositive {}", rational::to_num_den(x))));
    }
    let f = bits + GUARD + 8;
    // x = 2^k m with 1 ≤ m < 2
    let mut k = x.numer().bits() as i64 - x.denom().bits() as i64;
    let mut m = if k >= 0 { x / Rational::from_integer(pow2(k as u32)) } else { x * Rational::from_integer(pow2((-k) as u32)) };
    if m < rational::int(1) {
        m *= rational::int(2);
        k -= 1;
    } else if m >= rational::int(2) {
        m /= rational::int(2);
        k += 1;
    }
    let one = rational::int(1);
    let z = (&m - &one) / (&m + &one);
    let (sm, em) = atanh_fixed(&z, f);
    let mut value = sm * 2;
    let mut err = 2 * em;
    if k != 0 {
        let (s2, e2) = atanh_fixed(&rational::frac(1, 3), f);
        value += s2 * 2 * k;
        err += 2 * e2 * k.unsigned_abs();
    }
    Ok(fixed_to_enclosure(&value, err, f).round_out(bits + GUARD / 2))
}

/// Natural logarithm of every point of a positive enclosure.
pub fn ln_enclosure(x: &Enclosure, bits: u32) -> Result<Enclosure> {
    let a = ln(x.lo(), bits)?;
    let b = ln(x.hi(), bits)?;
    Ok(Enclosure::new(a.lo, b.hi))
}

/// `exp(x)` for any rational `x`.
pub fn exp(x: &Rational, bits: u32) -> Enclosure {
    if x.is_negative() {
        let e = exp(&-x, bits);
        return Enclosure::new(e.hi.recip(), e.lo.recip());
    }
    if x.is_zero() {
        return Enclosure::point(rational::int(1));
    }
    // y = x / 2^s ≤ 1/2
    let c = x.ceil().to_integer();
    let s = c.bits() as u32 + 1;
    let f = bits + GUARD + s;
    let scale = pow2(f);
    let y = (x.numer() * &scale).div_floor(&(x.denom() << s as usize));
    let mut t = scale.clone();
    let mut sum = BigInt::zero();
    let mut n: u64 = 0;
    while !t.is_zero() {
        sum += &t;
        n += 1;
        t = (&t * &y) / (&scale * BigInt::from(n));
    }
    let err = BigInt::from(2 * n + 6);
    let mut lo = &sum - &err;
    if lo < scale {
        lo = scale.clone();
    }
    let mut hi = sum + err;
    for _ in 0..s {
        lo = (&lo * &lo) >> f as usize;
        hi = (&hi * &hi + &scale - 1) >> f as usize;
    }
    Enclosure::new(Rational::new(lo, scale.clone()), Rational::new(hi, scale))
}

/// `exp` applied to every point of an enclosure.
pub fn exp_enclosure(x: &Enclosure, bits: u32) -> Enclosure {
    Enclosure::new(exp(x.lo(), bits).lo, exp(x.hi(), bits).hi)
}

/// Square root of a nonnegative rational.
pub fn sqrt(x: &Rational, bits: u32) -> Result<Enclosure> {
    if x.is_negative() {
        return Err(Error::domain("sqrt of a negative number"));
    }
    let scale = pow2(bits);
    let sq = &scale * &scale;
    let (q, r) = (x.numer() * &sq).div_rem(x.denom());
    let s = q.sqrt();
    let exact = r.is_zero() && &s * &s == q;
    let lo = Rational::new(s.clone(), scale.clone());
    let hi = if exact { lo.clone() } else { Rational::new(s + 1, scale) };
    Ok(Enclosure::new(lo, hi))
}

/// Enclosure of `e^j` tight to `bits`.
pub fn exp_int(j: u64, bits: u32) -> Enclosure {
    exp(&rational::uint(j), bits)
}

/// Decides `x` against the value produced by `f(bits)`, doubling precision
/// from `start` up to `cap` bits.
pub fn decide<F>(x: &Rational, start: u32, cap: u32, mut f: F, what: &str) -> Result<Ordering>
where
    F: FnMut(u32) -> Result<Enclosure>,
{
    let mut bits = start.max(16);
    loop {
        if let Some(o) = f(bits)?.compare(x) {
            // ordering of the value relative to x; flip to x relative to value
            return Ok(o.reverse());
        }
        if bits >= cap {
            return Err(Error::PrecisionExhausted { what: what.into(), bits });
        }
        bits = (bits * 2).min(cap);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    // Independent reference values (50 digits) for the transcendental constants.
    const LN2: &str = "0.69314718055994530941723212145817656807550013436025";
    const E1: &str = "2.71828182845904523536028747135266249775724709369995";
    const SQRT2: &str = "1.41421356237309504880168872420969807856967187537694";

    fn dec(s: &str) -> Rational {
        let (i, f) = s.split_once('.').unwrap();
        let den = num_traits::pow(BigInt::from(10), f.len());
        let num: BigInt = alloc::format!("{i}{f}").parse().unwrap();
        Rational::new(num, den)
    }

    fn close(e: &Enclosure, reference: &str, tol_bits: u32) {
        let r = dec(reference);
        let tol = frac(1, 1) / Rational::from_integer(pow2(tol_bits));
        assert!(e.width() < tol, "too wide");
        let d = (e.midpoint() - &r).abs();
        assert!(d < tol, "far from reference");
    }

    #[test]
    fn ln_two_and_e() {
        let l = ln(&int(2), 128).unwrap();
        close(&l, LN2, 120);
        let one = ln(&int(1), 64).unwrap();
        assert!(one.contains(&int(0)));
        let lh = ln(&frac(1, 2), 128).unwrap();
        assert!(lh.contains(&-dec(LN2)) || (lh.midpoint() + dec(LN2)).abs() < frac(1, 1 << 30));
    }

    #[test]
    fn ln_exp_consistency() {
        for x in [frac(3, 7), int(10), int(1000), frac(123456789, 1000)] {
            let l = ln(&x, 160).unwrap();
            let back = exp_enclosure(&l, 160);
            assert!(back.contains(&x));
        }
    }

    #[test]
    fn exp_values() {
        close(&exp(&int(1), 128), E1, 120);
        let e0 = exp(&int(0), 64);
        assert!(e0.is_point());
        let en = exp(&int(-3), 128);
        let ep = exp(&int(3), 128);
        assert!(en.mul(&ep).contains(&int(1)));
        let big = exp(&int(700), 64);
        assert!(big.lo() > &Rational::from_integer(num_traits::pow(BigInt::from(10), 303)));
        assert!(big.hi() < &Rational::from_integer(num_traits::pow(BigInt::from(10), 305)));
    }

    #[test]
    fn sqrt_values() {
        close(&sqrt(&int(2), 140).unwrap(), SQRT2, 130);
        assert!(sqrt(&frac(9, 4), 20).unwrap().is_point());
        assert!(sqrt(&int(-1), 20).is_err());
    }

    #[test]
    fn nearest_int_distance_enclosure() {
        let e = Enclosure::new(frac(23, 10), frac(24, 10));
        let d = e.nearest_int_distance();
        assert_eq!(d.lo(), &frac(3, 10));
        assert_eq!(d.hi(), &frac(4, 10));
        let e = Enclosure::new(frac(9, 10), frac(11, 10));
        let d = e.nearest_int_distance();
        assert_eq!(d.lo(), &int(0));
        assert_eq!(d.hi(), &frac(1, 10));
        let e = Enclosure::new(frac(4, 10), frac(6, 10));
        let d = e.nearest_int_distance();
        assert_eq!(d.lo(), &frac(4, 10));
        assert_eq!(d.hi(), &frac(1, 2));
    }

    #[test]
    fn decide_refines() {
        let o = decide(&frac(27, 10), 16, 4096, |b| Ok(exp(&int(1), b)), "e").unwrap();
        assert_eq!(o, Ordering::Less);
        let o = decide(&int(1), 16, 64, |_| Ok(Enclosure::point(int(1))), "one").unwrap();
        assert_eq!(o, Ordering::Equal);
        let err = decide(&int(1), 16, 64, |_| Ok(Enclosure::new(int(0), int(2))), "wide");
        assert!(matches!(err, Err(Error::PrecisionExhausted { .. })));
    }
}
