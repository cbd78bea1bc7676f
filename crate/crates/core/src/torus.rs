//! Finite unions of closed intervals on the torus `ℝ/ℤ ≅ [0, 1)`.
//!
//! The canonical form stores sorted, pairwise separated intervals
//! `[left, right]` with `0 ≤ left < right ≤ 1`. Intervals crossing 0 are split
//! there, touching intervals merge, and zero-length pieces are dropped, so two
//! sets covering the same points up to measure zero at isolated points have
//! identical representations.

use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::numtheory;
use crate::rational::{self, Rational};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TorusIntervalSet {
    intervals: Vec<(Rational, Rational)>,
    /// The same endpoints as integers over one denominator, when it fits
    /// in a `u64`; lets intersection measures run in machine arithmetic.
    scaled: Option<Scaled>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
struct Scaled {
    den: u64,
    ends: Vec<(u64, u64)>,
}

impl Scaled {
    fn of(intervals: &[(Rational, Rational)]) -> Option<Self> {
        let mut den: u64 = 1;
        for (l, r) in intervals {
            for x in [l, r] {
                let d = x.denom().to_u64()?;
                den = den.checked_mul(d / den.gcd(&d))?;
            }
        }
        let lift = |x: &Rational| -> Option<u64> { (x.numer() * BigInt::from(den) / x.denom()).to_u64() };
        let ends = intervals.iter().map(|(l, r)| Some((lift(l)?, lift(r)?))).collect::<Option<Vec<_>>>()?;
        Some(Scaled { den, ends })
    }
}

impl TorusIntervalSet {
    pub fn empty() -> Self {
        Self::canonical(Vec::new())
    }

    pub fn full() -> Self {
        Self::canonical(alloc::vec![(Rational::zero(), Rational::one())])
    }

    /// Canonicalizes arbitrary closed intervals `[l, r]`, `l ≤ r`, read mod 1.
    pub fn from_intervals(raw: impl IntoIterator<Item = (Rational, Rational)>) -> Result<Self> {
        let one = Rational::one();
        let mut pieces = Vec::new();
        for (l, r) in raw {
            if r < l {
                return Err(Error::domain("interval with right < left"));
            }
            if &r - &l >= one {
                return Ok(Self::full());
            }
            let k = l.floor();
            let (l, r) = (l - &k, r - &k);
            if r > one {
                pieces.push((l, one.clone()));
                pieces.push((Rational::zero(), r - &one));
            } else {
                pieces.push((l, r));
            }
        }
        Ok(Self::from_pieces(pieces))
    }

    /// Sorts and merges pieces already inside `[0, 1]`.
    fn from_pieces(mut pieces: Vec<(Rational, Rational)>) -> Self {
        pieces.retain(|(l, r)| l < r);
        pieces.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(pieces.len());
        for (l, r) in pieces {
            match out.last_mut() {
                Some((_, cr)) if l <= *cr => {
                    if r > *cr {
                        *cr = r;
                    }
                }
                _ => out.push((l, r)),
            }
        }
        Self::canonical(out)
    }

    /// Wraps intervals already in canonical form.
    fn canonical(intervals: Vec<(Rational, Rational)>) -> Self {
        let scaled = Scaled::of(&intervals);
        TorusIntervalSet { intervals, scaled }
    }

    pub fn intervals(&self) -> &[(Rational, Rational)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    /// Exact Lebesgue measure.
    pub fn measure(&self) -> Rational {
        let mut total = Rational::zero();
        for (l, r) in &self.intervals {
            total += r - l;
        }
        total
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let (a, b) = (&self.intervals, &other.intervals);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            let lo = core::cmp::max(&a[i].0, &b[j].0);
            let hi = core::cmp::min(&a[i].1, &b[j].1);
            if lo < hi {
                out.push((lo.clone(), hi.clone()));
            }
            if a[i].1 < b[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::from_pieces(out)
    }

    /// `λ(self ∩ other)` without building the intersection.
    pub fn intersection_measure(&self, other: &Self) -> Rational {
        let (Some(a), Some(b)) = (&self.scaled, &other.scaled) else {
            return self.intersect(other).measure();
        };
        // compare x / a.den with y / b.den as x·b.den against y·a.den
        let (da, db) = (a.den as u128, b.den as u128);
        let (mut i, mut j) = (0, 0);
        let mut total: u128 = 0;
        while i < a.ends.len() && j < b.ends.len() {
            let (al, ar) = (a.ends[i].0 as u128 * db, a.ends[i].1 as u128 * db);
            let (bl, br) = (b.ends[j].0 as u128 * da, b.ends[j].1 as u128 * da);
            let lo = al.max(bl);
            let hi = ar.min(br);
            if lo < hi {
                total += hi - lo;
            }
            if ar < br {
                i += 1;
            } else {
                j += 1;
            }
        }
        Rational::new(BigInt::from(total), BigInt::from(da * db))
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut pieces = self.intervals.clone();
        pieces.extend(other.intervals.iter().cloned());
        Self::from_pieces(pieces)
    }

    /// Union of many sets with one sort, `O(n log n)` in the total piece count.
    pub fn union_all<'a>(sets: impl IntoIterator<Item = &'a TorusIntervalSet>) -> Self {
        let mut pieces = Vec::new();
        for s in sets {
            pieces.extend(s.intervals.iter().cloned());
        }
        Self::from_pieces(pieces)
    }

    /// Closure of the complement.
    pub fn complement(&self) -> Self {
        let mut out = Vec::new();
        let mut cur = Rational::zero();
        for (l, r) in &self.intervals {
            if *l > cur {
                out.push((cur.clone(), l.clone()));
            }
            cur = r.clone();
        }
        if cur < Rational::one() {
            out.push((cur, Rational::one()));
        }
        Self::canonical(out)
    }

    /// Membership of `x ∈ [0, 1)` with closed endpoints; 0 and 1 coincide.
    pub fn contains(&self, x: &Rational) -> bool {
        let idx = self.intervals.partition_point(|(l, _)| l <= x);
        if idx > 0 && *x <= self.intervals[idx - 1].1 {
            return true;
        }
        x.is_zero() && self.intervals.last().is_some_and(|(_, r)| r.is_one())
    }

    /// The image under `x ↦ x + c mod 1`.
    pub fn translate(&self, c: &Rational) -> Self {
        Self::from_intervals(self.intervals.iter().map(|(l, r)| (l + c, r + c)))
            .unwrap_or_default()
    }
}

/// Canonicalizes intervals given as integer numerators over a common
/// denominator `den`, already sorted by left endpoint up to wrap-around.
fn from_scaled(raw: Vec<(BigInt, BigInt)>, den: &BigInt) -> TorusIntervalSet {
    let mut pieces: Vec<(BigInt, BigInt)> = Vec::with_capacity(raw.len() + 1);
    for (l, r) in raw {
        if &r - &l >= *den {
            return TorusIntervalSet::full();
        }
        let k = l.div_floor(den) * den;
        let (l, r) = (l - &k, r - &k);
        if r > *den {
            pieces.push((l, den.clone()));
            pieces.push((BigInt::zero(), r - den));
        } else {
            pieces.push((l, r));
        }
    }
    pieces.retain(|(l, r)| l < r);
    pieces.sort_by(|a, b| a.0.cmp(&b.0));
    let mut merged: Vec<(BigInt, BigInt)> = Vec::with_capacity(pieces.len());
    for (l, r) in pieces {
        match merged.last_mut() {
            Some((_, cr)) if l <= *cr => {
                if r > *cr {
                    *cr = r;
                }
            }
            _ => merged.push((l, r)),
        }
    }
    TorusIntervalSet::canonical(
        merged
            .into_iter()
            .map(|(l, r)| (Rational::new(l, den.clone()), Rational::new(r, den.clone())))
            .collect(),
    )
}

/// `⋃_a [(a+γ)/q − ψ/q, (a+γ)/q + ψ/q] mod 1` over `0 ≤ a < q`, restricted to
/// `gcd(a, q) = 1` when `coprime_only`.
///
/// With `coprime_only` this is `A_q`; without it, `E_q` (all fractions
/// `p/q`). For `q = 1` the single residue `a = 0` counts as coprime.
pub fn build_aq(q: u64, psi: &Rational, coprime_only: bool, gamma: &Rational) -> Result<TorusIntervalSet> {
    if q == 0 {
        return Err(Error::domain("q must be positive"));
    }
    if psi.is_negative() {
        return Err(Error::domain("ψ(q) must be nonnegative"));
    }
    if gamma.is_negative() || *gamma >= Rational::one() {
        return Err(Error::domain("γ must lie in [0, 1)"));
    }
    if psi.is_zero() {
        return Ok(TorusIntervalSet::empty());
    }
    let (gn, gd) = (gamma.numer(), gamma.denom());
    let (pn, pd) = (psi.numer(), psi.denom());
    let den = BigInt::from(q) * gd * pd;
    let radius = pn * gd;
    let mut raw = Vec::new();
    for a in 0..q {
        if coprime_only && numtheory::gcd(a, q) != 1 {
            continue;
        }
        let c = (BigInt::from(a) * gd + gn) * pd;
        raw.push((&c - &radius, c + &radius));
    }
    Ok(from_scaled(raw, &den))
}

/// `λ(S_q)` without building the set, valid for `ψ ≤ 1/2`.
pub fn measure_formula(q: u64, psi: &Rational, coprime_only: bool) -> Result<Rational> {
    let count = if coprime_only { numtheory::totient(q)? } else { q };
    Ok(rational::int(2) * psi * rational::frac(count as i64, q as i64))
}

/// Orders the torus distance `|x − y| mod 1` against `delta`.
pub fn torus_distance_cmp(x: &Rational, y: &Rational, delta: &Rational) -> Ordering {
    let d = x - y;
    let f = &d - d.floor();
    let g = Rational::one() - &f;
    core::cmp::min(f, g).cmp(delta)
}
