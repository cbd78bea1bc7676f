//! Per-point experiments: continued fractions, `‖qα‖`, hitting counts,
//! strong-law ratios and Monte Carlo estimates of finite unions.
//!
//! Irrational samples are evaluated through certified enclosures. A
//! membership test that cannot be decided doubles the precision, starting
//! at [`DEFAULT_BITS`], up to [`MAX_BITS`], and then fails loudly.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::approx::ApproxFunction;
use crate::certified::{self, Enclosure};
use crate::numtheory;
use crate::rational::{self, Rational};
use crate::torus;
use crate::{Error, Result};

pub const DEFAULT_BITS: u32 = 256;
pub const MAX_BITS: u32 = 4096;

/// Above this many terms, expected measures are summed in certified fixed
/// point instead of exactly (the exact denominator grows like `lcm(1..Q)`).
pub const EXACT_SUM_LIMIT: u64 = 20_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RealKind {
    Rational(Rational),
    /// `a + b √d`
    QuadraticSurd { a: Rational, b: Rational, d: u64 },
    /// Euler's number `e`.
    Euler,
}

/// A real number with a provenance tag, evaluated to any precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealSample {
    kind: RealKind,
    precision_bits: u32,
    tag: String,
}

impl RealSample {
    pub fn rational(x: Rational) -> Self {
        let tag = rational::to_num_den(&x);
        RealSample { kind: RealKind::Rational(x), precision_bits: DEFAULT_BITS, tag }
    }

    pub fn quadratic_surd(a: Rational, b: Rational, d: u64) -> Self {
        RealSample {
            kind: RealKind::QuadraticSurd { a, b, d },
            precision_bits: DEFAULT_BITS,
            tag: "quadratic-surd".into(),
        }
    }

    /// `Φ = (1 + √5) / 2`.
    pub fn golden_ratio() -> Self {
        let mut s = Self::quadratic_surd(rational::half(), rational::half(), 5);
        s.tag = "golden-ratio".into();
        s
    }

    pub fn sqrt(d: u64) -> Self {
        let mut s = Self::quadratic_surd(Rational::zero(), rational::int(1), d);
        s.tag = format!("sqrt({d})");
        s
    }

    pub fn euler() -> Self {
        RealSample { kind: RealKind::Euler, precision_bits: DEFAULT_BITS, tag: "e".into() }
    }

    /// Uniform dyadic rational `n / 2^bits` from the counter-based stream
    /// `(seed, index)`.
    pub fn seeded_random(seed: u64, index: u64, bits: u32) -> Self {
        let x = uniform_dyadic(seed, index, bits);
        RealSample {
            kind: RealKind::Rational(x),
            precision_bits: bits,
            tag: format!("seeded-random(seed={seed};index={index};bits={bits})"),
        }
    }

    pub fn with_precision(mut self, bits: u32) -> Self {
        self.precision_bits = bits.clamp(16, MAX_BITS);
        self
    }

    pub fn kind(&self) -> &RealKind {
        &self.kind
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match &self.kind {
            RealKind::Rational(x) => Some(x),
            _ => None,
        }
    }

    /// An enclosure of width at most about `2^-bits`.
    pub fn enclosure(&self, bits: u32) -> Enclosure {
        match &self.kind {
            RealKind::Rational(x) => Enclosure::point(x.clone()),
            RealKind::QuadraticSurd { a, b, d } => {
                let extra = b.numer().bits() as u32;
                let root = certified::sqrt(&rational::uint(*d), bits + extra + 2)
                    .unwrap_or_else(|_| Enclosure::point(Rational::zero()));
                root.scale(b).add_rational(a)
            }
            RealKind::Euler => certified::exp(&rational::int(1), bits),
        }
    }

    /// `‖qα‖` as a certified enclosure at the sample's precision.
    pub fn nearest_int_distance(&self, q: u64) -> Enclosure {
        let bits = self.precision_bits + 64 - q.leading_zeros();
        self.enclosure(bits).scale(&rational::uint(q)).nearest_int_distance()
    }

    /// `‖qα‖`, refined until it is separated from 0.
    pub(crate) fn nearest_int_distance_nonzero(&self, q: u64, start: u32) -> Result<Enclosure> {
        let mut bits = start.max(16);
        loop {
            let d = self.enclosure(bits + 64 - q.leading_zeros()).scale(&rational::uint(q)).nearest_int_distance();
            if d.lo().is_positive() {
                return Ok(d);
            }
            if d.is_point() {
                return Err(Error::Degenerate { q });
            }
            if bits >= MAX_BITS {
                return Err(Error::PrecisionExhausted { what: format!("||{q}*beta|| > 0"), bits });
            }
            bits = (bits * 2).min(MAX_BITS);
        }
    }
}

fn uniform_dyadic(seed: u64, index: u64, bits: u32) -> Rational {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let nbytes = bits.div_ceil(8) as usize;
    let mut buf = alloc::vec![0u8; nbytes];
    rng.fill_bytes(&mut buf);
    let mut n = BigInt::from_bytes_le(Sign::Plus, &buf);
    let excess = nbytes as u32 * 8 - bits;
    n >>= excess as usize;
    Rational::new(n, BigInt::one() << bits as usize)
}

/// Partial quotients `[a0; a1, …]` with convergents `p_k / q_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergentList {
    quotients: Vec<BigInt>,
    convergents: Vec<(BigInt, BigInt)>,
}

impl ConvergentList {
    fn from_quotients(quotients: Vec<BigInt>) -> Self {
        let mut convergents = Vec::with_capacity(quotients.len());
        let (mut p2, mut q2) = (BigInt::zero(), BigInt::one());
        let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
        for a in &quotients {
            let p = a * &p1 + &p2;
            let q = a * &q1 + &q2;
            p2 = core::mem::replace(&mut p1, p.clone());
            q2 = core::mem::replace(&mut q1, q.clone());
            convergents.push((p, q));
        }
        ConvergentList { quotients, convergents }
    }

    pub fn integer_part(&self) -> &BigInt {
        &self.quotients[0]
    }

    /// `a1, a2, …`
    pub fn partial_quotients(&self) -> &[BigInt] {
        &self.quotients[1..]
    }

    /// All terms including the integer part.
    pub fn terms(&self) -> &[BigInt] {
        &self.quotients
    }

    pub fn convergents(&self) -> &[(BigInt, BigInt)] {
        &self.convergents
    }

    /// Checks the three-term recurrence and `gcd(p_k, q_k) = 1`.
    pub fn verify_recurrence(&self) -> bool {
        let c = &self.convergents;
        for k in 0..c.len() {
            let (pm2, qm2, pm1, qm1) = match k {
                0 => (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero()),
                1 => (BigInt::one(), BigInt::zero(), c[0].0.clone(), c[0].1.clone()),
                _ => (c[k - 2].0.clone(), c[k - 2].1.clone(), c[k - 1].0.clone(), c[k - 1].1.clone()),
            };
            let a = &self.quotients[k];
            if c[k].0 != a * pm1 + pm2 || c[k].1 != a * qm1 + qm2 {
                return false;
            }
            if !c[k].0.gcd(&c[k].1).is_one() {
                return false;
            }
        }
        true
    }
}

/// `[a0; a1, …, an]`, shorter when `α` is rational and the expansion ends.
pub fn continued_fraction(alpha: &RealSample, n: usize) -> Result<ConvergentList> {
    if let Some(x) = alpha.as_rational() {
        let (mut num, mut den) = (x.numer().clone(), x.denom().clone());
        let mut quotients = Vec::new();
        while quotients.len() <= n && !den.is_zero() {
            let (a, r) = num.div_mod_floor(&den);
            quotients.push(a);
            num = core::mem::replace(&mut den, r);
        }
        return Ok(ConvergentList::from_quotients(quotients));
    }
    let mut bits = alpha.precision_bits.max(64);
    'precision: loop {
        let mut x = alpha.enclosure(bits);
        let mut quotients = Vec::with_capacity(n + 1);
        while quotients.len() <= n {
            let a = match x.floor() {
                Some(a) if Rational::from_integer(a.clone()) < *x.lo() => a,
                _ => {
                    if bits >= MAX_BITS {
                        return Err(Error::PrecisionExhausted {
                            what: format!("partial quotient {} of {}", quotients.len(), alpha.tag),
                            bits,
                        });
                    }
                    bits = (bits * 2).min(MAX_BITS);
                    continue 'precision;
                }
            };
            x = x.add_rational(&-Rational::from_integer(a.clone())).recip()?;
            quotients.push(a);
        }
        return Ok(ConvergentList::from_quotients(quotients));
    }
}

/// `‖qα‖` with a two-sided certified bound.
pub fn nearest_int_distance(q: u64, alpha: &RealSample) -> Enclosure {
    alpha.nearest_int_distance(q)
}

/// Exact membership test for rational `α`, reusing the scaled numerators.
struct RationalProbe {
    /// `α_num · γ_den`
    a: BigInt,
    /// `γ_num · α_den`
    g: BigInt,
    /// `α_den · γ_den`
    den: BigInt,
}

impl RationalProbe {
    fn new(alpha: &Rational, gamma: &Rational) -> Self {
        RationalProbe {
            a: alpha.numer() * gamma.denom(),
            g: gamma.numer() * alpha.denom(),
            den: alpha.denom() * gamma.denom(),
        }
    }

    /// Whether some admissible `a` has `|qα − γ − a| ≤ ψ`.
    fn hits(&self, q: u64, psi: &Rational, coprime_only: bool) -> bool {
        let x = BigInt::from(q) * &self.a - &self.g;
        let admissible = |a: &BigInt| -> bool {
            !coprime_only || a.mod_floor(&BigInt::from(q)).to_u64().is_some_and(|r| numtheory::gcd(r, q) == 1)
        };
        let within = |a: &BigInt| -> bool {
            let dist = (&x - a * &self.den).abs();
            dist * psi.denom() <= psi.numer() * &self.den
        };
        if *psi <= rational::half() {
            let fl = x.div_floor(&self.den);
            let ce = &fl + 1;
            return (admissible(&fl) && within(&fl)) || (admissible(&ce) && within(&ce));
        }
        let reach = psi.ceil().to_integer();
        let fl = x.div_floor(&self.den);
        let mut a = &fl - &reach;
        let end = &fl + &reach + 1;
        while a <= end {
            if admissible(&a) && within(&a) {
                return true;
            }
            a += 1;
        }
        false
    }
}

/// `frac(α) · 2^256` in little-endian limbs, for `α` with denominator
/// dividing `2^256`. Answers membership with word arithmetic when
/// `ψ ≤ 1/2` has a small numerator and denominator.
struct DyadicProbe {
    frac: [u64; 4],
}

impl DyadicProbe {
    fn new(alpha: &Rational) -> Option<Self> {
        let den = alpha.denom();
        let k = den.bits().checked_sub(1)?;
        if k > 256 || *den != BigInt::one() << k as usize {
            return None;
        }
        let f = alpha.numer().mod_floor(den) << (256 - k) as usize;
        let (_, digits) = f.to_u64_digits();
        let mut frac = [0u64; 4];
        frac[..digits.len()].copy_from_slice(&digits);
        Some(DyadicProbe { frac })
    }

    fn hits(&self, q: u64, psi: &Rational, coprime_only: bool) -> Option<bool> {
        let (pn, pd) = (psi.numer().to_u64()?, psi.denom().to_u64()?);
        if pn.checked_mul(2)? > pd {
            return None;
        }
        // q · frac = hi · 2^256 + t with hi = ⌊q frac(α)⌋
        let (t, hi) = mul_limbs(&self.frac, q);
        // within ψ of ⌊qα⌋ iff t · pd ≤ pn · 2^256; of ⌈qα⌉ iff (2^256 − t) · pd ≤ pn · 2^256
        let below = |x: &[u64; 4], top: u64| -> bool {
            let (low, high) = mul_limbs(x, pd);
            let high = high as u128 + top as u128 * pd as u128;
            high < pn as u128 || (high == pn as u128 && low == [0; 4])
        };
        let admissible = |a: u64| !coprime_only || numtheory::gcd(a % q, q) == 1;
        let (neg, top) = negate_limbs(&t);
        let hit = (admissible(hi) && below(&t, 0)) || (admissible((hi % q) + 1) && below(&neg, top));
        Some(hit)
    }
}

/// `x · m` as (low 256 bits, high word).
fn mul_limbs(x: &[u64; 4], m: u64) -> ([u64; 4], u64) {
    let mut out = [0u64; 4];
    let mut carry = 0u128;
    for i in 0..4 {
        let v = x[i] as u128 * m as u128 + carry;
        out[i] = v as u64;
        carry = v >> 64;
    }
    (out, carry as u64)
}

/// `2^256 − x` as (low 256 bits, bit 256).
fn negate_limbs(x: &[u64; 4]) -> ([u64; 4], u64) {
    if *x == [0; 4] {
        return ([0; 4], 1);
    }
    let mut out = [0u64; 4];
    let mut borrow = false;
    for i in 0..4 {
        let (v, b1) = 0u64.overflowing_sub(x[i]);
        let (v, b2) = v.overflowing_sub(borrow as u64);
        out[i] = v;
        borrow = b1 || b2;
    }
    (out, 0)
}

/// Membership of `α` in `S_q` for irrational samples via enclosures.
fn enclosure_hits(
    alpha: &RealSample,
    q: u64,
    psi: &Rational,
    coprime_only: bool,
    gamma: &Rational,
) -> Result<bool> {
    let mut bits = alpha.precision_bits.max(DEFAULT_BITS);
    loop {
        let x = alpha
            .enclosure(bits + 64 - q.leading_zeros())
            .scale(&rational::uint(q))
            .add_rational(&-gamma);
        let reach = psi.ceil().to_integer() + 1;
        let lo: BigInt = x.lo().floor().to_integer() - &reach;
        let hi = x.hi().ceil().to_integer() + &reach;
        let mut undecided = false;
        let mut a = lo;
        while a <= hi {
            let admissible = !coprime_only
                || a.mod_floor(&BigInt::from(q)).to_u64().is_some_and(|r| numtheory::gcd(r, q) == 1);
            if admissible {
                let d = x.add_rational(&-Rational::from_integer(a.clone()));
                let abs = if d.lo().is_negative() && d.hi().is_positive() {
                    let m = core::cmp::max(-d.lo(), d.hi().clone());
                    Enclosure::new(Rational::zero(), m)
                } else if d.hi().is_negative() || d.hi().is_zero() {
                    d.neg()
                } else {
                    d
                };
                match abs.compare(psi) {
                    Some(Ordering::Less) | Some(Ordering::Equal) => return Ok(true),
                    Some(Ordering::Greater) => {}
                    None => undecided = true,
                }
            }
            a += 1;
        }
        if !undecided {
            return Ok(false);
        }
        if bits >= MAX_BITS {
            return Err(Error::PrecisionExhausted {
                what: format!("membership of {} at q = {q}", alpha.tag),
                bits,
            });
        }
        bits = (bits * 2).min(MAX_BITS);
    }
}

/// Membership tester bound to one sample and shift.
pub struct HitTester<'a> {
    alpha: &'a RealSample,
    gamma: Rational,
    probe: Option<RationalProbe>,
    dyadic: Option<DyadicProbe>,
}

impl<'a> HitTester<'a> {
    pub fn new(alpha: &'a RealSample, gamma: &Rational) -> Self {
        let probe = alpha.as_rational().map(|x| RationalProbe::new(x, gamma));
        let dyadic = alpha.as_rational().filter(|_| gamma.is_zero()).and_then(DyadicProbe::new);
        HitTester { alpha, gamma: gamma.clone(), probe, dyadic }
    }

    /// `α ∈ S_q`, i.e. `|α − (a+γ)/q| ≤ ψ/q` for some admissible `a`.
    pub fn hits(&self, q: u64, psi: &Rational, coprime_only: bool) -> Result<bool> {
        if psi.is_negative() {
            return Err(Error::domain("ψ(q) must be nonnegative"));
        }
        if let Some(hit) = self.dyadic.as_ref().and_then(|d| d.hits(q, psi, coprime_only)) {
            return Ok(hit);
        }
        match &self.probe {
            Some(p) => Ok(p.hits(q, psi, coprime_only)),
            None => enclosure_hits(self.alpha, q, psi, coprime_only, &self.gamma),
        }
    }
}

/// `#{q ≤ Q : α ∈ S_q}` with `S_q = A_q` (coprime) or `E_q`, shifted by `γ`.
pub fn hitting_count(
    alpha: &RealSample,
    psi: &ApproxFunction,
    q_max: u64,
    coprime_only: bool,
    gamma: &Rational,
) -> Result<u64> {
    let tester = HitTester::new(alpha, gamma);
    let mut hits = 0;
    for (q, v) in psi.values_upto(q_max)? {
        if tester.hits(q, &v, coprime_only)? {
            hits += 1;
        }
    }
    Ok(hits)
}

/// `∑_{q≤Q} λ(S_q)`, exact when `Q ≤ EXACT_SUM_LIMIT`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedMeasure {
    pub exact: Option<Rational>,
    pub enclosure: Enclosure,
}

pub fn expected_measure(
    psi: &ApproxFunction,
    q_max: u64,
    coprime_only: bool,
    bits: u32,
) -> Result<ExpectedMeasure> {
    let exact_mode = q_max <= EXACT_SUM_LIMIT;
    let scale = BigInt::one() << bits as usize;
    let (mut lo, mut hi) = (BigInt::zero(), BigInt::zero());
    let mut exact = Rational::zero();
    for (q, v) in psi.values_upto(q_max)? {
        let m = if v <= rational::half() {
            torus::measure_formula(q, &v, coprime_only)?
        } else {
            torus::build_aq(q, &v, coprime_only, &Rational::zero())?.measure()
        };
        if exact_mode {
            exact += m;
        } else {
            let (n, d) = (m.numer() * &scale, m.denom());
            lo += n.div_floor(d);
            hi += n.div_ceil(d);
        }
    }
    if exact_mode {
        return Ok(ExpectedMeasure { enclosure: Enclosure::point(exact.clone()), exact: Some(exact) });
    }
    Ok(ExpectedMeasure {
        exact: None,
        enclosure: Enclosure::new(Rational::new(lo, scale.clone()), Rational::new(hi, scale)),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchmidtReport {
    pub hits: u64,
    pub expected: ExpectedMeasure,
    /// `hits / expected`
    pub ratio: Enclosure,
}

/// `∑_{q≤Q} 1_{S_q}(α) / ∑_{q≤Q} λ(S_q)`.
pub fn schmidt_ratio(
    alpha: &RealSample,
    psi: &ApproxFunction,
    q_max: u64,
    coprime_only: bool,
) -> Result<SchmidtReport> {
    let expected = expected_measure(psi, q_max, coprime_only, alpha.precision_bits)?;
    if !expected.enclosure.hi().is_positive() {
        return Err(Error::domain("expected measure is zero"));
    }
    let hits = hitting_count(alpha, psi, q_max, coprime_only, &Rational::zero())?;
    let ratio = expected.enclosure.recip()?.scale(&rational::uint(hits));
    Ok(SchmidtReport { hits, expected, ratio })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloEstimate {
    pub hits: u64,
    pub samples: u64,
    pub estimate: Rational,
    /// `√(p̂(1 − p̂) / samples)`
    pub stderr: f64,
}

impl MonteCarloEstimate {
    pub fn from_counts(hits: u64, samples: u64) -> Self {
        let p = hits as f64 / samples as f64;
        MonteCarloEstimate {
            hits,
            samples,
            estimate: rational::frac(hits as i64, samples as i64),
            stderr: num_traits::Float::sqrt(p * (1.0 - p) / samples as f64),
        }
    }
}

/// Union membership of sample `index` for [`monte_carlo_union`]; exposed so
/// drivers can split the sample range across threads.
pub fn union_sample_hits(
    table: &[(u64, Rational)],
    seed: u64,
    index: u64,
    bits: u32,
) -> bool {
    let x = uniform_dyadic(seed, index, bits);
    let probe = RationalProbe::new(&x, &Rational::zero());
    table.iter().any(|(q, v)| probe.hits(*q, v, true))
}

/// Fraction of seeded uniform samples landing in `⋃_{X≤q≤Y} A_q`.
pub fn monte_carlo_union(
    psi: &ApproxFunction,
    x: u64,
    y: u64,
    samples: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if samples == 0 {
        return Err(Error::domain("need at least one sample"));
    }
    let table = union_table(psi, x, y)?;
    let hits = (0..samples)
        .filter(|&i| union_sample_hits(&table, seed, i, DEFAULT_BITS))
        .count() as u64;
    Ok(MonteCarloEstimate::from_counts(hits, samples))
}

/// Nonzero `ψ(q)` for `q ∈ [x, y]`.
pub fn union_table(psi: &ApproxFunction, x: u64, y: u64) -> Result<Vec<(u64, Rational)>> {
    if x == 0 || x > y {
        return Err(Error::domain("need 1 ≤ X ≤ Y"));
    }
    Ok(psi.values_on(x, y)?.into_iter().filter(|(_, v)| !v.is_zero()).collect())
}
