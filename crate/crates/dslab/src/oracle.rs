//! Brute-force counterparts of the anatomy counts, by trial division and
//! direct gcd counting. Slow on purpose; they share no code with the core.

use num_traits::Zero;

use dslab_core::rational::{self, Rational};

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// `∑_{p | n, p ≥ t} 1/p`.
pub fn harmonic(n: u64, t: &Rational) -> Rational {
    let mut h = Rational::zero();
    for p in prime_divisors(n) {
        if rational::uint(p) >= *t {
            h += rational::frac(1, p as i64);
        }
    }
    h
}

pub fn totient(n: u64) -> u64 {
    (1..=n).filter(|k| gcd(*k, n) == 1).count() as u64
}

/// `flags[n] = (∑_{p | n, p ≥ t} 1/p ≥ c)` for `1 ≤ n ≤ x`; index 0 is false.
pub fn anatomy_flags(x: u64, t: &Rational, c: &Rational) -> Vec<bool> {
    (0..=x).map(|n| n > 0 && harmonic(n, t) >= *c).collect()
}

pub fn anatomy_count(x: u64, t: &Rational, c: &Rational) -> u64 {
    anatomy_flags(x, t, c).into_iter().filter(|b| *b).count() as u64
}

/// `∑_{d | M, H_t(d) ≥ c} φ(M/d)`.
pub fn divisor_anatomy_sum(m: u64, t: &Rational, c: &Rational) -> u64 {
    (1..=m)
        .filter(|d| m % d == 0 && harmonic(*d, t) >= *c)
        .map(|d| totient(m / d))
        .sum()
}
