//! Pair correlations of the sets `A_q`: overlap counts and bounds, variance
//! sums, quasi-independence ratios, the weighted GCD sum and the finite
//! Chung–Erdős inequality.

use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::approx::ApproxFunction;
use crate::certified::Enclosure;
use crate::numtheory;
use crate::rational::{self, Rational};
use crate::torus::{self, TorusIntervalSet};
use crate::{Error, Result};

/// `#{(a, b) ∈ (ℤ/q)^* × (ℤ/r)^* : ‖a/q − b/r‖ ≤ δ}` by enumeration.
pub fn pair_count_exact(q: u64, r: u64, delta: &Rational) -> Result<u64> {
    if q == r {
        return Err(Error::domain("pair counts need q ≠ r"));
    }
    if q == 0 || r == 0 {
        return Err(Error::domain("q and r must be positive"));
    }
    if delta.is_negative() {
        return Err(Error::domain("δ must be nonnegative"));
    }
    let m = q as u128 * r as u128;
    // ‖a/q − b/r‖ ≤ δ  ⟺  min(n, m − n) ≤ ⌊δ m⌋ with n = (ar − bq) mod m
    let limit = (delta * Rational::from_integer(BigInt::from(m))).floor().to_integer();
    let limit = limit.to_u128().unwrap_or(u128::MAX);
    let units = |n: u64| -> Vec<u64> {
        if n == 1 {
            return alloc::vec![0];
        }
        (1..n).filter(|a| numtheory::gcd(*a, n) == 1).collect()
    };
    let (ua, ub) = (units(q), units(r));
    let mut count = 0;
    for &a in &ua {
        let ar = a as u128 * r as u128;
        for &b in &ub {
            let bq = b as u128 * q as u128;
            let n = (ar + m - bq % m) % m;
            if n.min(m - n) <= limit {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// `2 (φ(g)²/g) · weighted_coprime_sum(⌊q ψ_r / g⌋, qr/g², g)`, `g = gcd(q, r)`.
///
/// The counting heuristic for [`pair_count_exact`] with `δ = ψ_r / r`; the
/// two are compared, not assumed equal.
pub fn pair_count_formula(q: u64, r: u64, psi_r: &Rational) -> Result<Rational> {
    if q == r {
        return Err(Error::domain("pair counts need q ≠ r"));
    }
    if q == 0 || r == 0 {
        return Err(Error::domain("q and r must be positive"));
    }
    if psi_r.is_negative() {
        return Err(Error::domain("ψ(r) must be nonnegative"));
    }
    let g = numtheory::gcd(q, r);
    let x = rational::floor_u64(&(rational::uint(q) * psi_r / rational::uint(g)))
        .ok_or_else(|| Error::domain("summation limit does not fit in u64"))?;
    let n = (q / g) * (r / g);
    let phi = numtheory::totient(g)?;
    let w = numtheory::weighted_coprime_sum(x, n, g)?;
    Ok(rational::int(2) * rational::frac((phi * phi) as i64, g as i64) * w)
}

/// `D(q, r) = max(q ψ(r), r ψ(q)) / gcd(q, r)`.
pub fn compute_d(q: u64, r: u64, psi: &ApproxFunction) -> Result<Rational> {
    if q == 0 || r == 0 {
        return Err(Error::domain("q and r must be positive"));
    }
    let a = rational::uint(q) * psi.eval(r)?;
    let b = rational::uint(r) * psi.eval(q)?;
    Ok(core::cmp::max(a, b) / rational::uint(numtheory::gcd(q, r)))
}

/// `∏ (1 + 1/p)` over primes `p | n` with `p > d`.
fn large_prime_product(n: u64, d: &Rational) -> Result<Rational> {
    let mut prod = Rational::one();
    for p in numtheory::factorize(n)?.primes() {
        if rational::uint(p) > *d {
            prod *= rational::frac(p as i64 + 1, p as i64);
        }
    }
    Ok(prod)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlapReport {
    pub q: u64,
    pub r: u64,
    pub measure_q: Rational,
    pub measure_r: Rational,
    /// `λ(A_q ∩ A_r)`
    pub exact_overlap: Rational,
    /// `λ(A_q) λ(A_r)`
    pub product_measure: Rational,
    pub d_value: Rational,
    /// `∏_{p | qr/gcd², p > D} (1 + 1/p)`
    pub bound_product: Rational,
    /// `exact_overlap / (product_measure · bound_product)`, 0 if that vanishes.
    pub ratio: Rational,
}

impl OverlapReport {
    pub fn bound(&self) -> Rational {
        &self.product_measure * &self.bound_product
    }
}

pub fn overlap_report(q: u64, r: u64, psi: &ApproxFunction) -> Result<OverlapReport> {
    if q == r {
        return Err(Error::domain("overlap report needs q ≠ r"));
    }
    let (pq, pr) = (psi.eval(q)?, psi.eval(r)?);
    if pq > rational::half() || pr > rational::half() {
        return Err(Error::domain(format!("ψ exceeds 1/2 at q = {q} or r = {r}")));
    }
    let zero = Rational::zero();
    let aq = torus::build_aq(q, &pq, true, &zero)?;
    let ar = torus::build_aq(r, &pr, true, &zero)?;
    let exact_overlap = aq.intersect(&ar).measure();
    let (measure_q, measure_r) = (aq.measure(), ar.measure());
    let product_measure = &measure_q * &measure_r;
    let d_value = compute_d(q, r, psi)?;
    let g = numtheory::gcd(q, r);
    let bound_product = large_prime_product((q / g) * (r / g), &d_value)?;
    let denom = &product_measure * &bound_product;
    let ratio = if denom.is_zero() { Rational::zero() } else { &exact_overlap / denom };
    Ok(OverlapReport {
        q,
        r,
        measure_q,
        measure_r,
        exact_overlap,
        product_measure,
        d_value,
        bound_product,
        ratio,
    })
}

/// The sets `S_q` (`A_q` or `E_q`) for `q ∈ [x, y]` with `ψ(q) > 0`.
pub fn build_sets(
    psi: &ApproxFunction,
    x: u64,
    y: u64,
    coprime_only: bool,
) -> Result<Vec<(u64, TorusIntervalSet)>> {
    if x == 0 || x > y {
        return Err(Error::domain("need 1 ≤ X ≤ Y"));
    }
    let zero = Rational::zero();
    let mut out = Vec::new();
    for (q, v) in psi.values_on(x, y)? {
        if v > rational::half() {
            return Err(Error::domain(format!("ψ({q}) = {} exceeds 1/2", rational::to_num_den(&v))));
        }
        if !v.is_zero() {
            out.push((q, torus::build_aq(q, &v, coprime_only, &zero)?));
        }
    }
    Ok(out)
}

/// `∑_{j > i} λ(S_i ∩ S_j)`; rows are independent and may run in parallel.
pub fn overlap_row(sets: &[(u64, TorusIntervalSet)], i: usize) -> Rational {
    let mut sum = Rational::zero();
    for (_, s) in &sets[i + 1..] {
        sum += sets[i].1.intersection_measure(s);
    }
    sum
}

/// `(∑∑ λ(S_q ∩ S_r), ∑ λ(S_q))` from precomputed sets and row sums.
pub fn variance_from_rows(sets: &[(u64, TorusIntervalSet)], rows: &[Rational]) -> (Rational, Rational) {
    let mut diag = Rational::zero();
    for (_, s) in sets {
        diag += s.measure();
    }
    let mut off = Rational::zero();
    for r in rows {
        off += r;
    }
    (&diag + rational::int(2) * off, diag)
}

/// `(∑_{X≤q,r≤Y} λ(S_q ∩ S_r), ∑_{X≤q≤Y} λ(S_q))`, diagonal included.
pub fn variance_sum(
    psi: &ApproxFunction,
    x: u64,
    y: u64,
    coprime_only: bool,
) -> Result<(Rational, Rational)> {
    let sets = build_sets(psi, x, y, coprime_only)?;
    let rows: Vec<Rational> = (0..sets.len()).map(|i| overlap_row(&sets, i)).collect();
    Ok(variance_from_rows(&sets, &rows))
}

/// `∑∑ λ(A_q ∩ A_r) / (∑ λ(A_q))²`.
pub fn quasi_independence_ratio(psi: &ApproxFunction, x: u64, y: u64) -> Result<Rational> {
    let (v, s) = variance_sum(psi, x, y, true)?;
    if s.is_zero() {
        return Err(Error::domain("total measure is zero"));
    }
    Ok(v / (&s * &s))
}

/// `∑_{q,r≤Q} w_q w_r gcd(q,r)/√(qr)` with `w_q = φ(q)ψ(q)/q`.
///
/// Uses `gcd(q, r) = ∑_{d | q, d | r} φ(d)`, so the double sum equals
/// `∑_d φ(d) (∑_{d|q} w_q/√q)²`. Each `w_q/√q` is bracketed in fixed point;
/// all terms are nonnegative, so the brackets propagate to the total.
pub fn gcd_sum(psi: &ApproxFunction, q_max: u64, bits: u32) -> Result<Enclosure> {
    if q_max == 0 {
        return Err(Error::domain("Q must be positive"));
    }
    let f = bits + 32 + (64 - q_max.leading_zeros());
    let scale = BigInt::one() << f as usize;
    let n = q_max as usize;
    let mut lo = alloc::vec![BigInt::zero(); n + 1];
    let mut hi = alloc::vec![BigInt::zero(); n + 1];
    let mut any = false;
    for (q, v) in psi.values_upto(q_max)? {
        let w = v * rational::frac(numtheory::totient(q)? as i64, q as i64);
        // √q ∈ [s, s + 1] / 2^f
        let s = (BigInt::from(q) << (2 * f) as usize).sqrt();
        let num = w.numer() * &scale * &scale;
        lo[q as usize] = num.div_floor(&(w.denom() * (&s + 1)));
        hi[q as usize] = num.div_ceil(&(w.denom() * &s));
        any = true;
    }
    if !any {
        return Ok(Enclosure::point(Rational::zero()));
    }
    let (mut tlo, mut thi) = (BigInt::zero(), BigInt::zero());
    for d in 1..=n {
        let (mut a, mut b) = (BigInt::zero(), BigInt::zero());
        let mut q = d;
        while q <= n {
            a += &lo[q];
            b += &hi[q];
            q += d;
        }
        if b.is_zero() {
            continue;
        }
        let phi = BigInt::from(numtheory::totient(d as u64)?);
        tlo += &phi * &a * &a;
        thi += &phi * &b * &b;
    }
    let den = &scale * &scale;
    Ok(Enclosure::new(Rational::new(tlo, den.clone()), Rational::new(thi, den)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChungErdos {
    /// `(∑ λ(A_q))² / ∑∑ λ(A_q ∩ A_r)`
    pub lower_bound: Rational,
    pub union_measure: Rational,
    pub holds: bool,
}

pub fn chung_erdos_from_sets(sets: &[(u64, TorusIntervalSet)], rows: &[Rational]) -> Result<ChungErdos> {
    let (v, s) = variance_from_rows(sets, rows);
    if v.is_zero() {
        return Err(Error::domain("double sum of overlaps is zero"));
    }
    let lower_bound = &s * &s / v;
    let union_measure = TorusIntervalSet::union_all(sets.iter().map(|(_, s)| s)).measure();
    let holds = union_measure >= lower_bound;
    Ok(ChungErdos { lower_bound, union_measure, holds })
}

/// `λ(⋃ A_q) ≥ (∑ λ(A_q))² / ∑∑ λ(A_q ∩ A_r)` over `q ∈ [X, Y]`.
pub fn chung_erdos_check(psi: &ApproxFunction, x: u64, y: u64) -> Result<ChungErdos> {
    let sets = build_sets(psi, x, y, true)?;
    let rows: Vec<Rational> = (0..sets.len()).map(|i| overlap_row(&sets, i)).collect();
    chung_erdos_from_sets(&sets, &rows)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollapseReport {
    pub sum_of_measures: Rational,
    pub union_measure: Rational,
    /// `union_measure / sum_of_measures`
    pub ratio: Rational,
}

/// Compares `∑ λ(E_q)` with `λ(⋃ E_q)` over a finite support.
pub fn overlap_collapse_report(psi: &ApproxFunction) -> Result<CollapseReport> {
    let support = psi
        .finite_support()
        .ok_or_else(|| Error::domain("overlap collapse needs a finite support"))?;
    if support.is_empty() {
        return Err(Error::domain("empty support"));
    }
    let zero = Rational::zero();
    let mut sets = Vec::with_capacity(support.len());
    let mut sum_of_measures = Rational::zero();
    for (q, v) in &support {
        let s = torus::build_aq(*q, v, false, &zero)?;
        sum_of_measures += s.measure();
        sets.push(s);
    }
    let union_measure = TorusIntervalSet::union_all(sets.iter()).measure();
    let ratio = &union_measure / &sum_of_measures;
    Ok(CollapseReport { sum_of_measures, union_measure, ratio })
}

/// Constant `ψ` on the first `K` primes whose weight `∑ φ(p)ψ(p)/p` equals
/// `weight`, with `K` the least count keeping `ψ ≤ 1/2`.
pub fn equal_weight_prime_family(weight: &Rational) -> Result<ApproxFunction> {
    if !weight.is_positive() {
        return Err(Error::domain("weight must be positive"));
    }
    let half = rational::half();
    let mut primes = Vec::new();
    let mut density = Rational::zero();
    let mut p = 1u64;
    loop {
        p += 1;
        if !numtheory::is_prime(p) {
            continue;
        }
        primes.push(p);
        density += rational::frac(p as i64 - 1, p as i64);
        let value = weight / &density;
        if value <= half {
            return ApproxFunction::from_pairs(primes.into_iter().map(|p| (p, value.clone())));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::{ds_chain_family, series_partial_sums};
    use crate::rational::{frac, int};

    fn half() -> ApproxFunction {
        ApproxFunction::constant(frac(1, 2)).unwrap()
    }

    #[test]
    fn pair_count_examples() {
        assert_eq!(pair_count_exact(2, 3, &frac(1, 6)).unwrap(), 2);
        assert_eq!(pair_count_exact(2, 3, &int(0)).unwrap(), 0);
        // |a/3 − b/5| = |5a − 3b|/15 for a ∈ {1,2}, b ∈ {1,2,3,4}
        let mut brute = 0;
        for a in 1..=2i64 {
            for b in 1..=4i64 {
                let n = (5 * a - 3 * b).rem_euclid(15);
                if n.min(15 - n) <= 1 {
                    brute += 1;
                }
            }
        }
        assert_eq!(pair_count_exact(3, 5, &frac(1, 15)).unwrap(), brute);
        assert!(pair_count_exact(4, 4, &frac(1, 2)).is_err());
    }

    #[test]
    fn pair_formula_examples() {
        assert_eq!(pair_count_formula(2, 3, &frac(1, 2)).unwrap(), int(2));
        assert_eq!(pair_count_formula(5, 7, &frac(1, 6)).unwrap(), int(0));
        assert!(pair_count_formula(3, 3, &frac(1, 2)).is_err());
    }

    #[test]
    fn d_examples() {
        assert_eq!(compute_d(6, 10, &ApproxFunction::zero()).unwrap(), int(0));
        assert_eq!(compute_d(6, 10, &half()).unwrap(), frac(5, 2));
        let psi = ApproxFunction::from_pairs([(2, frac(1, 4)), (3, frac(1, 6))]).unwrap();
        assert_eq!(compute_d(2, 3, &psi).unwrap(), frac(3, 4));
    }

    #[test]
    fn overlap_examples() {
        let rep = overlap_report(2, 3, &half()).unwrap();
        assert_eq!(rep.exact_overlap, frac(1, 2));
        assert_eq!(rep.d_value, frac(3, 2));
        assert_eq!(rep.bound_product, int(2));
        assert_eq!(rep.bound(), frac(2, 3));
        assert_eq!(rep.ratio, frac(3, 4));
        let psi = ApproxFunction::from_pairs([(3, frac(1, 4))]).unwrap();
        let rep = overlap_report(2, 3, &psi).unwrap();
        assert_eq!(rep.exact_overlap, int(0));
        assert_eq!(rep.ratio, int(0));
        let sym = overlap_report(3, 2, &half()).unwrap();
        assert_eq!(sym.exact_overlap, frac(1, 2));
        assert!(overlap_report(2, 2, &half()).is_err());
    }

    #[test]
    fn variance_examples() {
        assert_eq!(variance_sum(&half(), 2, 3, true).unwrap(), (frac(13, 6), frac(7, 6)));
        assert_eq!(variance_sum(&ApproxFunction::zero(), 2, 9, true).unwrap(), (int(0), int(0)));
        assert_eq!(variance_sum(&half(), 5, 5, true).unwrap(), (frac(4, 5), frac(4, 5)));
        assert_eq!(quasi_independence_ratio(&half(), 2, 3).unwrap(), frac(78, 49));
        assert_eq!(quasi_independence_ratio(&half(), 5, 5).unwrap(), frac(5, 4));
        assert!(quasi_independence_ratio(&ApproxFunction::zero(), 1, 3).is_err());
    }

    #[test]
    fn disjoint_family_ratio() {
        // A_2 = [3/8, 5/8] and A_3 = [1/3 ± 1/36] ∪ [2/3 ± 1/36] are disjoint
        let psi = ApproxFunction::from_pairs([(2, frac(1, 4)), (3, frac(1, 12))]).unwrap();
        let (v, s) = variance_sum(&psi, 2, 3, true).unwrap();
        assert_eq!(v, s);
        assert_eq!(quasi_independence_ratio(&psi, 2, 3).unwrap(), s.recip());
        let ce = chung_erdos_check(&psi, 2, 3).unwrap();
        assert_eq!(ce.lower_bound, ce.union_measure);
    }

    #[test]
    fn variance_matches_series() {
        let psi = crate::approx::khintchine_family(frac(1, 3), int(0)).unwrap();
        let (_, s) = variance_sum(&psi, 1, 40, true).unwrap();
        let (_, w) = series_partial_sums(&psi, 40).unwrap();
        assert_eq!(s, int(2) * w);
    }

    #[test]
    fn chung_erdos_examples() {
        let ce = chung_erdos_check(&half(), 2, 3).unwrap();
        assert_eq!(ce.lower_bound, frac(49, 78));
        assert_eq!(ce.union_measure, frac(2, 3));
        assert!(ce.holds);
        let ce = chung_erdos_check(&half(), 7, 7).unwrap();
        assert_eq!(ce.lower_bound, ce.union_measure);
        assert!(chung_erdos_check(&ApproxFunction::zero(), 1, 4).is_err());
    }

    fn gcd_sum_oracle(psi: &ApproxFunction, q_max: u64) -> f64 {
        let w: Vec<f64> = (1..=q_max)
            .map(|q| {
                let v = rational::to_f64(&psi.eval(q).unwrap());
                v * numtheory::totient(q).unwrap() as f64 / q as f64
            })
            .collect();
        let mut s = 0.0;
        for q in 1..=q_max {
            for r in 1..=q_max {
                let g = numtheory::gcd(q, r) as f64;
                s += w[q as usize - 1] * w[r as usize - 1] * g / ((q * r) as f64).sqrt();
            }
        }
        s
    }

    #[test]
    fn gcd_sum_examples() {
        let one = ApproxFunction::from_pairs([(1, frac(1, 3))]).unwrap();
        assert!(gcd_sum(&one, 1, 128).unwrap().contains(&frac(1, 9)));
        assert_eq!(gcd_sum(&ApproxFunction::zero(), 50, 128).unwrap(), Enclosure::point(int(0)));
        // Q = 2: w = (1/2, 1/4), total 1/4 + 1/16 + 2·(1/8)/√2
        let g = gcd_sum(&half(), 2, 128).unwrap();
        let exact = 0.25 + 0.0625 + 0.25 / core::f64::consts::SQRT_2;
        assert!((rational::to_f64(&g.midpoint()) - exact).abs() < 1e-15);
        assert!(g.width() < frac(1, 1 << 62));
        let psi = crate::approx::khintchine_family(frac(1, 2), int(0)).unwrap();
        let g = gcd_sum(&psi, 60, 128).unwrap();
        let o = gcd_sum_oracle(&psi, 60);
        assert!((rational::to_f64(&g.midpoint()) - o).abs() < 1e-12 * o);
        let diag: Rational = psi
            .values_upto(60)
            .unwrap()
            .into_iter()
            .map(|(q, v)| {
                let w = v * frac(numtheory::totient(q).unwrap() as i64, q as i64);
                &w * &w
            })
            .sum();
        assert!(*g.lo() >= diag);
    }

    #[test]
    fn collapse_examples() {
        let single = ApproxFunction::from_pairs([(7, frac(1, 3))]).unwrap();
        assert_eq!(overlap_collapse_report(&single).unwrap().ratio, int(1));
        let two = ApproxFunction::from_pairs([(2, frac(1, 2)), (3, frac(1, 2))]).unwrap();
        let rep = overlap_collapse_report(&two).unwrap();
        // E_2 = E_3 = torus up to endpoints
        assert_eq!(rep.sum_of_measures, int(2));
        assert_eq!(rep.union_measure, int(1));
        assert_eq!(rep.ratio, frac(1, 2));
        assert!(overlap_collapse_report(&ApproxFunction::zero()).is_err());
        assert!(overlap_collapse_report(&half()).is_err());
    }

    #[test]
    fn chain_collapses_below_primes() {
        let chain = ds_chain_family(2, 50, frac(1, 2)).unwrap();
        let (_, weight) = series_partial_sums(&chain, 100).unwrap();
        let primes = equal_weight_prime_family(&weight).unwrap();
        let support = primes.finite_support().unwrap();
        assert_eq!(series_partial_sums(&primes, *support.keys().last().unwrap()).unwrap().1, weight);
        let a = overlap_collapse_report(&chain).unwrap();
        let b = overlap_collapse_report(&primes).unwrap();
        assert!(a.ratio < b.ratio);
    }
}
