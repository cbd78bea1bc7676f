//! Exact rational scalars and their `num/den` text form.

use alloc::format;
use alloc::string::String;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms.
pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn uint(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `num / den`; panics on a zero denominator.
pub fn frac(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn half() -> Rational {
    frac(1, 2)
}

/// Formats as `num/den`, including `n/1` for integers.
pub fn to_num_den(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `num/den` or a bare integer. The result is reduced.
pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::domain(format!("not a rational number: {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::domain(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(num, den))
}

pub fn floor_u64(r: &Rational) -> Option<u64> {
    r.floor().to_integer().to_u64()
}

pub fn ceil_u64(r: &Rational) -> Option<u64> {
    r.ceil().to_integer().to_u64()
}

/// Rounds `r` down to a multiple of `2^-bits`.
pub fn round_down(r: &Rational, bits: u32) -> Rational {
    let scale = BigInt::one() << bits as usize;
    let n = (r.numer() * &scale).div_floor(r.denom());
    Rational::new(n, scale)
}

/// Rounds `r` up to a multiple of `2^-bits`.
pub fn round_up(r: &Rational, bits: u32) -> Rational {
    let scale = BigInt::one() << bits as usize;
    let n = (r.numer() * &scale).div_ceil(r.denom());
    Rational::new(n, scale)
}

/// Decimal expansion truncated toward zero after `digits` fractional digits.
pub fn to_decimal(r: &Rational, digits: usize) -> String {
    let neg = r.is_negative();
    let a = r.abs();
    let scale = num_traits::pow(BigInt::from(10u32), digits);
    let scaled = (a.numer() * &scale) / a.denom();
    let (ip, fp) = scaled.div_rem(&scale);
    let mut out = String::new();
    if neg && !scaled.is_zero() {
        out.push('-');
    }
    out.push_str(&format!("{ip}"));
    if digits > 0 {
        let f = format!("{fp}");
        out.push('.');
        for _ in f.len()..digits {
            out.push('0');
        }
        out.push_str(&f);
    }
    out
}

/// Lossy conversion for reporting and statistics.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn num_den_round_trip() {
        assert_eq!(to_num_den(&frac(6, 4)), "3/2");
        assert_eq!(to_num_den(&int(1)), "1/1");
        assert_eq!(parse("  -4/8 ").unwrap(), frac(-1, 2));
        assert_eq!(parse("7").unwrap(), int(7));
        assert!(parse("1/0").is_err());
        assert!(parse("x/2").is_err());
    }

    #[test]
    fn dyadic_rounding_brackets() {
        let r = frac(1, 3);
        let lo = round_down(&r, 10);
        let hi = round_up(&r, 10);
        assert!(lo < r && r < hi);
        assert_eq!(&hi - &lo, frac(1, 1024));
        assert_eq!(round_down(&frac(-1, 3), 2), frac(-1, 2));
    }

    #[test]
    fn decimal_expansion() {
        assert_eq!(to_decimal(&frac(1, 3), 5), "0.33333");
        assert_eq!(to_decimal(&frac(-5, 4), 3), "-1.250");
        assert_eq!(to_decimal(&frac(1, 20), 2), "0.05");
        assert_eq!(to_decimal(&int(3), 0), "3");
    }
}
