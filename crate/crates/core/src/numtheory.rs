//! Integer number theory: factorization, totients, valuations, prime sums and
//! coprime counting.
//!
//! Factorization consults a smallest-prime-factor table up to
//! [`DEFAULT_SIEVE_LIMIT`]; larger inputs (any `u64`) fall back to Pollard rho
//! with a deterministic Miller–Rabin test. The process-wide table is built
//! lazily on first use and is read-only afterwards.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use once_cell::race::OnceBox;

use crate::rational::{self, Rational};
use crate::{Error, Result};

pub const DEFAULT_SIEVE_LIMIT: u64 = 10_000_000;

/// Prime factorization `∏ p^e` with strictly increasing primes.
///
/// The empty factorization represents 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Factorization {
    entries: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn entries(&self) -> &[(u64, u32)] {
        &self.entries
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().map(|&(p, _)| p)
    }

    pub fn is_squarefree(&self) -> bool {
        self.entries.iter().all(|&(_, e)| e == 1)
    }

    /// Product of the distinct primes.
    pub fn radical(&self) -> u64 {
        self.primes().product()
    }

    pub fn value(&self) -> u128 {
        self.entries
            .iter()
            .map(|&(p, e)| (p as u128).pow(e))
            .product()
    }

    pub fn totient(&self) -> u64 {
        self.entries
            .iter()
            .map(|&(p, e)| (p - 1) * p.pow(e - 1))
            .product()
    }

    /// All divisors in increasing order.
    pub fn divisors(&self) -> Vec<u64> {
        let mut out = vec![1u64];
        for &(p, e) in &self.entries {
            let len = out.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    out.push(out[i] * pk);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Squarefree divisors `d | rad(n)` paired with `μ(d)`.
    pub fn squarefree_divisors(&self) -> Vec<(u64, i8)> {
        let mut out = vec![(1u64, 1i8)];
        for p in self.primes() {
            let len = out.len();
            for i in 0..len {
                let (d, mu) = out[i];
                out.push((d * p, -mu));
            }
        }
        out
    }
}

/// Smallest-prime-factor table over `[0, limit]`.
#[derive(Debug, Clone)]
pub struct Sieve {
    spf: Vec<u32>,
    primes: Vec<u32>,
}

impl Sieve {
    /// Linear sieve; `limit` is capped at `u32::MAX`.
    pub fn new(limit: u64) -> Self {
        let limit = limit.clamp(1, u32::MAX as u64) as usize;
        let mut spf = vec![0u32; limit + 1];
        let mut primes = Vec::new();
        for i in 2..=limit {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                let m = p as usize * i;
                if p > si || m > limit {
                    break;
                }
                spf[m] = p;
            }
        }
        Sieve { spf, primes }
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn is_prime(&self, n: u64) -> bool {
        if n <= self.limit() {
            n >= 2 && self.spf[n as usize] as u64 == n
        } else {
            is_prime_mr(n)
        }
    }

    pub fn factorize(&self, n: u64) -> Result<Factorization> {
        if n == 0 {
            return Err(Error::domain("cannot factor 0"));
        }
        let mut raw = Vec::new();
        let mut m = n;
        if m > self.limit() {
            for &p in &self.primes {
                let p = p as u64;
                if p > 1000 || m <= self.limit() {
                    break;
                }
                while m % p == 0 {
                    raw.push(p);
                    m /= p;
                }
            }
            if m > self.limit() {
                rho_split(m, &mut raw);
                m = 1;
            }
        }
        while m > 1 {
            let p = self.spf[m as usize] as u64;
            raw.push(p);
            m /= p;
        }
        Ok(collect_factors(raw))
    }
}

fn collect_factors(mut raw: Vec<u64>) -> Factorization {
    raw.sort_unstable();
    let mut entries: Vec<(u64, u32)> = Vec::new();
    for p in raw {
        match entries.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => entries.push((p, 1)),
        }
    }
    Factorization { entries }
}

static GLOBAL_SIEVE: OnceBox<Sieve> = OnceBox::new();

/// The shared sieve with limit [`DEFAULT_SIEVE_LIMIT`].
pub fn sieve() -> &'static Sieve {
    GLOBAL_SIEVE.get_or_init(|| Box::new(Sieve::new(DEFAULT_SIEVE_LIMIT)))
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for all `u64`.
fn is_prime_mr(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 325, 9375, 28178, 450775, 9780504, 1795265022] {
        let a = a % n;
        if a == 0 {
            continue;
        }
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Brent's variant of Pollard rho; returns a nontrivial factor of composite `n`.
fn rho_factor(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = x.abs_diff(y).gcd(&n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn rho_split(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime_mr(n) {
        out.push(n);
        return;
    }
    let d = rho_factor(n);
    rho_split(d, out);
    rho_split(n / d, out);
}

pub fn is_prime(n: u64) -> bool {
    sieve().is_prime(n)
}

pub fn factorize(n: u64) -> Result<Factorization> {
    sieve().factorize(n)
}

pub fn totient(n: u64) -> Result<u64> {
    Ok(factorize(n)?.totient())
}

pub fn is_squarefree(n: u64) -> Result<bool> {
    Ok(factorize(n)?.is_squarefree())
}

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

fn big_valuation(x: &BigInt, p: &BigInt) -> i64 {
    let mut k = 0;
    let mut m = x.abs();
    loop {
        let (q, r) = m.div_rem(p);
        if !r.is_zero() {
            return k;
        }
        m = q;
        k += 1;
    }
}

/// `ν_p(x)`: exponent of `p` in the numerator minus that in the denominator.
pub fn padic_valuation(x: &Rational, p: u64) -> Result<i64> {
    if x.is_zero() {
        return Err(Error::domain("valuation of 0 is undefined"));
    }
    if !is_prime(p) {
        return Err(Error::domain(format!("{p} is not prime")));
    }
    let pb = BigInt::from(p);
    Ok(big_valuation(x.numer(), &pb) - big_valuation(x.denom(), &pb))
}

/// Exact `∑ 1/p` over primes `y ≤ p ≤ x`.
///
/// The result's denominator is the product of all primes in range, so the
/// cost grows with the primorial; intended for ranges up to ~10⁵.
pub fn mertens_tail(y: &Rational, x: &Rational) -> Rational {
    let lo = rational::ceil_u64(y).unwrap_or(0).max(2);
    let Some(hi) = rational::floor_u64(x) else {
        return Rational::zero();
    };
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    let mut p = lo;
    while p <= hi {
        if is_prime(p) {
            let pb = BigInt::from(p);
            num = num * &pb + &den;
            den *= pb;
        }
        p += 1;
    }
    Rational::new(num, den)
}

/// Exact `∑ 1/p` over distinct primes `p | n` with `p ≥ t`.
pub fn prime_harmonic_of(n: u64, t: &Rational) -> Result<Rational> {
    let f = factorize(n)?;
    Ok(harmonic_of_primes(f.primes(), t))
}

pub(crate) fn harmonic_of_primes(primes: impl Iterator<Item = u64>, t: &Rational) -> Rational {
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    for p in primes {
        if rational::uint(p) >= *t {
            let pb = BigInt::from(p);
            num = num * &pb + &den;
            den *= pb;
        }
    }
    Rational::new(num, den)
}

/// `#{1 ≤ c ≤ x : gcd(c, n) = 1}` by Möbius inversion over `d | rad(n)`.
pub fn coprime_count(x: u64, n: u64) -> Result<u64> {
    let f = factorize(n)?;
    Ok(coprime_count_with(x, &f))
}

fn coprime_count_with(x: u64, n: &Factorization) -> u64 {
    let total: i128 = n
        .squarefree_divisors()
        .into_iter()
        .map(|(d, mu)| mu as i128 * (x / d) as i128)
        .sum();
    total as u64
}

/// `∑_{1≤c≤x, gcd(c,n)=1} ∏_{p | gcd(g,c)} (1 + 1/(p−1))`.
///
/// Writing the weight as `∑_{d | gcd(c, rad g)} ∏_{p|d} 1/(p−1)` turns the
/// sum into `∑_{d | rad g, gcd(d,n)=1} h(d) · coprime_count(⌊x/d⌋, n)`.
pub fn weighted_coprime_sum(x: u64, n: u64, g: u64) -> Result<Rational> {
    if g == 0 {
        return Err(Error::domain("weight modulus g must be positive"));
    }
    let nf = factorize(n)?;
    let gf = factorize(g)?;
    // primes of g coprime to n, with the common denominator H = ∏ (p − 1)
    let primes: Vec<u64> = gf.primes().filter(|p| n % p != 0).collect();
    let h: u128 = primes.iter().map(|p| (p - 1) as u128).product();
    // d runs over squarefree products of `primes`; `rest` is H / h(d)
    fn walk(x: u64, nf: &Factorization, primes: &[u64], d: u64, rest: u128) -> u128 {
        let mut num = coprime_count_with(x / d, nf) as u128 * rest;
        for (k, p) in primes.iter().enumerate() {
            if let Some(dp) = d.checked_mul(*p).filter(|dp| *dp <= x) {
                num += walk(x, nf, &primes[k + 1..], dp, rest / (p - 1) as u128);
            }
        }
        num
    }
    let num = walk(x, &nf, &primes, 1, h);
    let common = num.gcd(&h).max(1);
    Ok(Rational::new_raw(BigInt::from(num / common), BigInt::from(h / common)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn trial_division(mut n: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        let mut p = 2;
        while p * p <= n {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            if e > 0 {
                out.push((p, e));
            }
            p += 1;
        }
        if n > 1 {
            out.push((n, 1));
        }
        out
    }

    fn brute_totient(n: u64) -> u64 {
        (0..n).filter(|&a| a.gcd(&n) == 1).count() as u64
    }

    #[test]
    fn factorize_examples() {
        assert!(factorize(1).unwrap().entries().is_empty());
        assert_eq!(factorize(12).unwrap().entries(), &[(2, 2), (3, 1)]);
        assert_eq!(factorize(97).unwrap().entries(), &[(97, 1)]);
        assert!(factorize(0).is_err());
    }

    #[test]
    fn factorize_matches_trial_division() {
        for n in 1..5000u64 {
            assert_eq!(factorize(n).unwrap().entries(), trial_division(n).as_slice());
        }
    }

    #[test]
    fn factorize_beyond_sieve() {
        let small = Sieve::new(1000);
        for n in [1_000_003u64, 999_999_999_989, 600_851_475_143, 1 << 40, 18_446_744_073_709_551_557] {
            let f = small.factorize(n).unwrap();
            assert_eq!(f.value(), n as u128);
            assert!(f.primes().all(is_prime_mr));
        }
        let f = small.factorize(4_611_686_014_132_420_609).unwrap(); // (2^31-1)^2
        assert_eq!(f.entries(), &[(2_147_483_647, 2)]);
    }

    #[test]
    fn totient_examples() {
        assert_eq!(totient(1).unwrap(), 1);
        assert_eq!(totient(12).unwrap(), 4);
        assert_eq!(totient(97).unwrap(), 96);
        assert!(totient(0).is_err());
    }

    #[test]
    fn totient_matches_enumeration() {
        for n in 1..=2000u64 {
            assert_eq!(totient(n).unwrap(), brute_totient(n), "n = {n}");
        }
    }

    #[test]
    fn totient_divisor_sum() {
        for n in 1..=10_000u64 {
            let f = factorize(n).unwrap();
            let s: u64 = f.divisors().into_iter().map(|d| totient(d).unwrap()).sum();
            assert_eq!(s, n);
        }
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(padic_valuation(&int(12), 2).unwrap(), 2);
        assert_eq!(padic_valuation(&frac(4, 9), 3).unwrap(), -2);
        assert_eq!(padic_valuation(&int(1), 5).unwrap(), 0);
        assert!(padic_valuation(&int(0), 5).is_err());
        assert!(padic_valuation(&int(8), 4).is_err());
    }

    #[test]
    fn mertens_examples() {
        assert_eq!(mertens_tail(&int(2), &int(10)), frac(247, 210));
        assert_eq!(mertens_tail(&int(11), &int(10)), int(0));
        assert_eq!(mertens_tail(&int(3), &int(7)), frac(71, 105));
        assert_eq!(mertens_tail(&frac(5, 2), &frac(15, 2)), frac(71, 105));
    }

    #[test]
    fn mertens_monotone() {
        let mut prev = int(0);
        for x in 2..300 {
            let cur = mertens_tail(&int(2), &int(x));
            assert!(cur >= prev);
            prev = cur;
        }
    }

    #[test]
    fn harmonic_examples() {
        assert_eq!(prime_harmonic_of(1, &int(1)).unwrap(), int(0));
        assert_eq!(prime_harmonic_of(6, &int(1)).unwrap(), frac(5, 6));
        assert_eq!(prime_harmonic_of(30, &int(3)).unwrap(), frac(8, 15));
        assert_eq!(prime_harmonic_of(30, &frac(5, 2)).unwrap(), frac(8, 15));
    }

    #[test]
    fn coprime_examples() {
        assert_eq!(coprime_count(0, 6).unwrap(), 0);
        assert_eq!(coprime_count(10, 1).unwrap(), 10);
        assert_eq!(coprime_count(10, 6).unwrap(), 3);
    }

    #[test]
    fn weighted_examples() {
        assert_eq!(weighted_coprime_sum(10, 6, 1).unwrap(), int(3));
        assert_eq!(weighted_coprime_sum(6, 5, 2).unwrap(), int(8));
        assert_eq!(weighted_coprime_sum(1, 2, 3).unwrap(), int(1));
    }

    #[test]
    fn squarefree_divisors_carry_mobius() {
        let f = factorize(30).unwrap();
        let mut d = f.squarefree_divisors();
        d.sort();
        assert_eq!(
            d,
            vec![(1, 1), (2, -1), (3, -1), (5, -1), (6, 1), (10, 1), (15, 1), (30, -1)]
        );
    }
}
