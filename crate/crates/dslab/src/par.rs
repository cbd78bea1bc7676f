//! Rayon drivers over the row-wise primitives of the core.
//!
//! Every driver collects per-item results in input order and reduces them
//! serially, so outputs do not depend on the thread count.

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use dslab_core::correlation::{self, ChungErdos, OverlapReport};
use dslab_core::orbit::{self, HitTester, MonteCarloEstimate, SchmidtReport};
use dslab_core::rational::{self, Rational};
use dslab_core::{ApproxFunction, Error, RealSample, Result, TorusIntervalSet};

const CHUNK: usize = 4096;

/// `∑_r λ(S_q ∩ S_r)` for every `q`, in order.
pub fn overlap_rows(sets: &[(u64, TorusIntervalSet)]) -> Vec<Rational> {
    (0..sets.len()).into_par_iter().map(|i| correlation::overlap_row(sets, i)).collect()
}

/// `(∑∑ λ(S_q ∩ S_r), ∑ λ(S_q))` over `[x, y]`.
pub fn variance_sum(psi: &ApproxFunction, x: u64, y: u64, coprime_only: bool) -> Result<(Rational, Rational)> {
    let sets = correlation::build_sets(psi, x, y, coprime_only)?;
    let rows = overlap_rows(&sets);
    Ok(correlation::variance_from_rows(&sets, &rows))
}

pub fn chung_erdos(psi: &ApproxFunction, x: u64, y: u64) -> Result<ChungErdos> {
    let sets = correlation::build_sets(psi, x, y, true)?;
    let rows = overlap_rows(&sets);
    correlation::chung_erdos_from_sets(&sets, &rows)
}

pub fn overlap_grid(psi: &ApproxFunction, pairs: &[(u64, u64)]) -> Result<Vec<OverlapReport>> {
    pairs.par_iter().map(|(q, r)| correlation::overlap_report(*q, *r, psi)).collect()
}

/// Parallel `hitting_count`.
pub fn hitting_count(
    alpha: &RealSample,
    psi: &ApproxFunction,
    q_max: u64,
    coprime_only: bool,
    gamma: &Rational,
) -> Result<u64> {
    let values = psi.values_upto(q_max)?;
    let tester = HitTester::new(alpha, gamma);
    let counts: Vec<u64> = values
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut n = 0;
            for (q, v) in chunk {
                if tester.hits(*q, v, coprime_only)? {
                    n += 1;
                }
            }
            Ok(n)
        })
        .collect::<Result<_>>()?;
    Ok(counts.into_iter().sum())
}

/// Parallel `schmidt_ratio`.
pub fn schmidt_ratio(alpha: &RealSample, psi: &ApproxFunction, q_max: u64, coprime_only: bool) -> Result<SchmidtReport> {
    let expected = orbit::expected_measure(psi, q_max, coprime_only, alpha.precision_bits())?;
    if !expected.enclosure.hi().is_positive() {
        return Err(Error::Domain("expected measure is zero".into()));
    }
    let hits = hitting_count(alpha, psi, q_max, coprime_only, &Rational::zero())?;
    let ratio = expected.enclosure.recip()?.scale(&rational::uint(hits));
    Ok(SchmidtReport { hits, expected, ratio })
}

/// Schmidt reports for several samples, one thread per sample.
pub fn schmidt_many(
    alphas: &[RealSample],
    psi: &ApproxFunction,
    q_max: u64,
    coprime_only: bool,
) -> Result<Vec<SchmidtReport>> {
    let expected = orbit::expected_measure(psi, q_max, coprime_only, alphas.first().map_or(256, |a| a.precision_bits()))?;
    alphas
        .par_iter()
        .map(|a| {
            let e = if a.precision_bits() == alphas[0].precision_bits() {
                expected.clone()
            } else {
                orbit::expected_measure(psi, q_max, coprime_only, a.precision_bits())?
            };
            if !e.enclosure.hi().is_positive() {
                return Err(Error::Domain("expected measure is zero".into()));
            }
            let hits = orbit::hitting_count(a, psi, q_max, coprime_only, &Rational::zero())?;
            let ratio = e.enclosure.recip()?.scale(&rational::uint(hits));
            Ok(SchmidtReport { hits, expected: e, ratio })
        })
        .collect()
}

/// Parallel `monte_carlo_union`; sample `i` always uses stream `(seed, i)`.
pub fn monte_carlo_union(
    psi: &ApproxFunction,
    x: u64,
    y: u64,
    samples: u64,
    seed: u64,
    bits: u32,
) -> Result<MonteCarloEstimate> {
    if samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let table = orbit::union_table(psi, x, y)?;
    let hits = (0..samples)
        .into_par_iter()
        .filter(|&i| orbit::union_sample_hits(&table, seed, i, bits))
        .count() as u64;
    Ok(MonteCarloEstimate::from_counts(hits, samples))
}

/// `λ(⋃ S_q)` by a parallel tree of unions.
pub fn union_measure(sets: &[(u64, TorusIntervalSet)]) -> Rational {
    let parts: Vec<TorusIntervalSet> = sets
        .par_chunks(64)
        .map(|c| TorusIntervalSet::union_all(c.iter().map(|(_, s)| s)))
        .collect();
    let m = TorusIntervalSet::union_all(parts.iter()).measure();
    debug_assert!(m <= Rational::one());
    m
}
