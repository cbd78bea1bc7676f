//! Approximation functions `ψ: ℕ → ℚ≥0`.
//!
//! A function is either an explicit finite support or a formula family. The
//! non-monotone constructions (restricted denominators, the multiplicative
//! `ψ_β`, and chains of multiples that duplicate reduced fractions) are
//! provided next to the classical monotone family `c / (q (log q)^s)`.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::certified::{self, Enclosure};
use crate::numtheory;
use crate::orbit::RealSample;
use crate::rational::{self, Rational};
use crate::{Error, Result};

/// Denominator filters for [`restricted_denominators`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DenominatorSet {
    /// `{1, b, b², …}`
    PowersOf(u64),
    Primes,
    Squarefree,
    List(BTreeSet<u64>),
}

impl DenominatorSet {
    pub fn contains(&self, q: u64) -> bool {
        match self {
            DenominatorSet::PowersOf(b) => {
                if *b < 2 {
                    return q == 1;
                }
                let mut m = q;
                while m % b == 0 {
                    m /= b;
                }
                m == 1
            }
            DenominatorSet::Primes => numtheory::is_prime(q),
            DenominatorSet::Squarefree => numtheory::is_squarefree(q).unwrap_or(false),
            DenominatorSet::List(s) => s.contains(&q),
        }
    }
}

/// Formula-defined families.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Family {
    Constant { value: Rational },
    /// `ψ(1) = c`, `ψ(q) = c / (q (ln q)^s)` for `q ≥ 2`.
    Khintchine { c: Rational, s: Rational },
    /// `ψ(q) = θ(q)` on the set, 0 elsewhere.
    Restricted { set: DenominatorSet, theta: Box<ApproxFunction> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Kind {
    Explicit(BTreeMap<u64, Rational>),
    Family(Family),
}

/// An approximation function with optional cap and the `ψ ≤ 1/2` flag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApproxFunction {
    kind: Kind,
    clamp: Option<Rational>,
    standing_assumption: bool,
    precision_bits: u32,
}

impl ApproxFunction {
    fn from_kind(kind: Kind) -> Self {
        ApproxFunction {
            kind,
            clamp: None,
            standing_assumption: false,
            precision_bits: certified::DEFAULT_BITS,
        }
    }

    /// Finitely supported function; zero values are dropped from the support.
    pub fn explicit(support: BTreeMap<u64, Rational>) -> Result<Self> {
        for (q, v) in &support {
            if *q == 0 {
                return Err(Error::domain("support keys must be positive"));
            }
            if v.is_negative() {
                return Err(Error::domain(format!("negative value at q = {q}")));
            }
        }
        let support = support.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        Ok(Self::from_kind(Kind::Explicit(support)))
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, Rational)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (q, v) in pairs {
            if map.insert(q, v).is_some() {
                return Err(Error::domain(format!("duplicate support key {q}")));
            }
        }
        Self::explicit(map)
    }

    pub fn zero() -> Self {
        Self::from_kind(Kind::Explicit(BTreeMap::new()))
    }

    pub fn constant(value: Rational) -> Result<Self> {
        if value.is_negative() {
            return Err(Error::domain("constant must be nonnegative"));
        }
        Ok(Self::from_kind(Kind::Family(Family::Constant { value })))
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn clamp(&self) -> Option<&Rational> {
        self.clamp.as_ref()
    }

    pub fn standing_assumption(&self) -> bool {
        self.standing_assumption
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn with_clamp(mut self, cap: Option<Rational>) -> Result<Self> {
        if cap.as_ref().is_some_and(|c| c.is_negative()) {
            return Err(Error::domain("clamp must be nonnegative"));
        }
        self.clamp = cap;
        Ok(self)
    }

    pub fn with_precision(mut self, bits: u32) -> Self {
        self.precision_bits = bits.max(16);
        self
    }

    /// Sets the `ψ ≤ 1/2` flag; explicit supports are validated eagerly,
    /// formula families at evaluation.
    pub fn with_standing_assumption(mut self, on: bool) -> Result<Self> {
        self.standing_assumption = on;
        if on {
            if let Kind::Explicit(map) = &self.kind {
                for q in map.keys() {
                    self.eval(*q)?;
                }
            }
        }
        Ok(self)
    }

    /// `ψ(q)`.
    pub fn eval(&self, q: u64) -> Result<Rational> {
        if q == 0 {
            return Err(Error::domain("ψ is defined on positive integers"));
        }
        let raw = match &self.kind {
            Kind::Explicit(map) => map.get(&q).cloned().unwrap_or_else(Rational::zero),
            Kind::Family(f) => eval_family(f, q, self.precision_bits)?,
        };
        let v = match &self.clamp {
            Some(c) if raw > *c => c.clone(),
            _ => raw,
        };
        if self.standing_assumption && v > rational::half() {
            return Err(Error::domain(format!(
                "ψ({q}) = {} exceeds 1/2",
                rational::to_num_den(&v)
            )));
        }
        Ok(v)
    }

    /// The support with values, when it is finite and enumerable.
    pub fn finite_support(&self) -> Option<BTreeMap<u64, Rational>> {
        match &self.kind {
            Kind::Explicit(map) => {
                let mut out = BTreeMap::new();
                for q in map.keys() {
                    let v = self.eval(*q).ok()?;
                    if !v.is_zero() {
                        out.insert(*q, v);
                    }
                }
                Some(out)
            }
            Kind::Family(Family::Restricted { set: DenominatorSet::List(list), .. }) => {
                let mut out = BTreeMap::new();
                for q in list {
                    let v = self.eval(*q).ok()?;
                    if !v.is_zero() {
                        out.insert(*q, v);
                    }
                }
                Some(out)
            }
            Kind::Family(Family::Constant { value }) if value.is_zero() => Some(BTreeMap::new()),
            _ => None,
        }
    }

    /// Points `q ≤ q_max` where `ψ(q) > 0` together with the values.
    pub fn values_upto(&self, q_max: u64) -> Result<Vec<(u64, Rational)>> {
        if let Kind::Explicit(map) = &self.kind {
            let mut out = Vec::new();
            for q in map.range(..=q_max).map(|(q, _)| *q) {
                let v = self.eval(q)?;
                if !v.is_zero() {
                    out.push((q, v));
                }
            }
            return Ok(out);
        }
        let mut out = Vec::new();
        for q in 1..=q_max {
            let v = self.eval(q)?;
            if !v.is_zero() {
                out.push((q, v));
            }
        }
        Ok(out)
    }

    /// Values on the integer range `[x, y]`, zeros included.
    pub fn values_on(&self, x: u64, y: u64) -> Result<Vec<(u64, Rational)>> {
        (x..=y).map(|q| Ok((q, self.eval(q)?))).collect()
    }
}

fn eval_family(f: &Family, q: u64, bits: u32) -> Result<Rational> {
    match f {
        Family::Constant { value } => Ok(value.clone()),
        Family::Khintchine { c, s } => {
            if q == 1 || s.is_zero() {
                return Ok(c / rational::uint(q));
            }
            let l = certified::ln(&rational::uint(q), bits + 16)?;
            let ls = if s.is_integer() {
                let k: i64 = s
                    .to_integer()
                    .try_into()
                    .map_err(|_| Error::domain("exponent s too large"))?;
                l.powi(k)?
            } else {
                let ll = certified::ln_enclosure(&l, bits + 16)?;
                certified::exp_enclosure(&ll.scale(s), bits + 16)
            };
            let denom = ls.scale(&rational::uint(q));
            let v = denom.recip()?.scale(c);
            Ok(round_value(&v, bits))
        }
        Family::Restricted { set, theta } => {
            if set.contains(q) {
                theta.eval(q)
            } else {
                Ok(Rational::zero())
            }
        }
    }
}

/// Midpoint of `v` rounded down to a multiple of `2^-bits`, clipped at 0.
fn round_value(v: &Enclosure, bits: u32) -> Rational {
    let r = rational::round_down(&v.midpoint(), bits);
    if r.is_negative() {
        Rational::zero()
    } else {
        r
    }
}

/// `ψ(1) = c`, `ψ(q) = c / (q (ln q)^s)`.
pub fn khintchine_family(c: Rational, s: Rational) -> Result<ApproxFunction> {
    if c.is_negative() {
        return Err(Error::domain("khintchine family needs c ≥ 0"));
    }
    Ok(ApproxFunction::from_kind(Kind::Family(Family::Khintchine { c, s })))
}

/// `ψ(q) = 1[q ∈ set] · θ(q)`.
pub fn restricted_denominators(set: DenominatorSet, theta: ApproxFunction) -> ApproxFunction {
    let bits = theta.precision_bits;
    ApproxFunction::from_kind(Kind::Family(Family::Restricted {
        set,
        theta: Box::new(theta),
    }))
    .with_precision(bits)
}

/// `ψ_β(q) = θ(q) / (q ‖qβ‖)` tabulated on `[1, q_max]`.
///
/// `‖qβ‖` is refined from `bits` up to [`crate::orbit::MAX_BITS`]; a value that
/// cannot be separated from 0 is reported as [`Error::Degenerate`].
pub fn multiplicative_psi(
    beta: &RealSample,
    theta: &ApproxFunction,
    q_max: u64,
    bits: u32,
) -> Result<ApproxFunction> {
    let mut map = BTreeMap::new();
    for q in 1..=q_max {
        let t = theta.eval(q)?;
        if t.is_zero() {
            continue;
        }
        let d = match beta.nearest_int_distance_nonzero(q, bits) {
            Ok(d) => d,
            Err(Error::PrecisionExhausted { .. }) => return Err(Error::Degenerate { q }),
            Err(e) => return Err(e),
        };
        let v = d.scale(&rational::uint(q)).recip()?.scale(&t);
        map.insert(q, round_value(&v, bits));
    }
    Ok(ApproxFunction::explicit(map)?.with_precision(bits))
}

/// Chain of multiples `ψ(k q0) = scale · k / m` for `1 ≤ k ≤ m`.
///
/// Every interval around `a / (k q0)` then has radius `scale / (q0 m)`, so the
/// sets for different `k` pile up on fractions with denominator dividing
/// `m q0`.
pub fn ds_chain_family(q0: u64, m: u64, scale: Rational) -> Result<ApproxFunction> {
    if q0 == 0 || m == 0 {
        return Err(Error::domain("q0 and m must be positive"));
    }
    if !scale.is_positive() || scale > rational::half() {
        return Err(Error::domain("scale must lie in (0, 1/2]"));
    }
    let pairs = (1..=m).map(|k| (k * q0, &scale * rational::frac(k as i64, m as i64)));
    ApproxFunction::from_pairs(pairs)?.with_standing_assumption(true)
}

/// `(∑_{q≤Q} ψ(q), ∑_{q≤Q} φ(q)ψ(q)/q)`.
pub fn series_partial_sums(psi: &ApproxFunction, q_max: u64) -> Result<(Rational, Rational)> {
    let mut plain = Rational::zero();
    let mut weighted = Rational::zero();
    for (q, v) in psi.values_upto(q_max)? {
        weighted += &v * rational::frac(numtheory::totient(q)? as i64, q as i64);
        plain += v;
    }
    Ok((plain, weighted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    #[test]
    fn khintchine_examples() {
        let psi = khintchine_family(frac(1, 2), int(0)).unwrap();
        assert_eq!(psi.eval(10).unwrap(), frac(1, 20));
        assert_eq!(psi.eval(1).unwrap(), frac(1, 2));
        assert_eq!(series_partial_sums(&psi, 3).unwrap(), (frac(11, 12), frac(53, 72)));
        assert!(khintchine_family(frac(-1, 2), int(0)).is_err());
    }

    #[test]
    fn khintchine_log_family_is_monotone() {
        let psi = khintchine_family(frac(1, 2), int(1)).unwrap();
        let psi_half = khintchine_family(frac(1, 2), frac(1, 2)).unwrap();
        for f in [&psi, &psi_half] {
            let mut prev = f.eval(3).unwrap();
            for q in 4..200 {
                let v = f.eval(q).unwrap();
                assert!(v <= prev, "q = {q}");
                prev = v;
            }
        }
        // 1/(2 · 10 · ln 10) = 0.0217147240951625...
        let v = rational::to_f64(&psi.eval(10).unwrap());
        assert!((v - 0.021_714_724_095_162_59).abs() < 1e-15);
    }

    #[test]
    fn restricted_examples() {
        let theta = khintchine_family(frac(1, 2), int(0)).unwrap();
        let psi = restricted_denominators(DenominatorSet::PowersOf(2), theta);
        assert_eq!(psi.eval(8).unwrap(), frac(1, 16));
        assert_eq!(psi.eval(12).unwrap(), int(0));
        let primes = restricted_denominators(
            DenominatorSet::Primes,
            ApproxFunction::constant(frac(1, 2)).unwrap(),
        );
        assert_eq!(series_partial_sums(&primes, 10).unwrap().0, int(2));
    }

    #[test]
    fn restricted_is_pointwise_below_theta() {
        let theta = khintchine_family(frac(1, 3), int(0)).unwrap();
        for set in [DenominatorSet::Primes, DenominatorSet::Squarefree, DenominatorSet::PowersOf(3)] {
            let psi = restricted_denominators(set, theta.clone());
            for q in 1..300 {
                assert!(psi.eval(q).unwrap() <= theta.eval(q).unwrap());
            }
        }
    }

    #[test]
    fn ds_chain_examples() {
        let psi = ds_chain_family(1, 1, frac(1, 2)).unwrap();
        assert_eq!(psi.finite_support().unwrap().into_iter().collect::<Vec<_>>(), vec![(1, frac(1, 2))]);
        let psi = ds_chain_family(2, 3, frac(1, 2)).unwrap();
        let s: Vec<_> = psi.finite_support().unwrap().into_iter().collect();
        assert_eq!(s, vec![(2, frac(1, 6)), (4, frac(1, 3)), (6, frac(1, 2))]);
        assert_eq!(series_partial_sums(&psi, 6).unwrap(), (int(1), frac(5, 12)));
        assert!(ds_chain_family(2, 3, frac(3, 4)).is_err());
        assert_eq!(ds_chain_family(5, 17, frac(1, 3)).unwrap().finite_support().unwrap().len(), 17);
    }

    #[test]
    fn series_examples() {
        assert_eq!(series_partial_sums(&ApproxFunction::zero(), 50).unwrap(), (int(0), int(0)));
        let c = frac(2, 7);
        let psi = khintchine_family(c.clone(), int(0)).unwrap();
        let mut expected = Rational::zero();
        for q in 1..=40u64 {
            expected += frac(numtheory::totient(q).unwrap() as i64, (q * q) as i64);
        }
        assert_eq!(series_partial_sums(&psi, 40).unwrap().1, c * expected);
    }

    #[test]
    fn standing_assumption_and_clamp() {
        let psi = ApproxFunction::from_pairs([(3, frac(3, 4))]).unwrap();
        assert!(psi.clone().with_standing_assumption(true).is_err());
        let capped = psi.with_clamp(Some(frac(1, 2))).unwrap().with_standing_assumption(true).unwrap();
        assert_eq!(capped.eval(3).unwrap(), frac(1, 2));
        assert!(ApproxFunction::from_pairs([(1, int(1)), (1, int(0))]).is_err());
        assert!(ApproxFunction::from_pairs([(0, int(1))]).is_err());
    }

    #[test]
    fn multiplicative_examples() {
        let theta = ApproxFunction::constant(int(1)).unwrap();
        let golden = multiplicative_psi(&RealSample::golden_ratio(), &theta, 1, 128).unwrap();
        let v = rational::to_f64(&golden.eval(1).unwrap());
        assert!((v - 2.618_033_988_749_895).abs() < 1e-6);
        let sqrt2 = multiplicative_psi(&RealSample::sqrt(2), &theta, 2, 128).unwrap();
        let v = rational::to_f64(&sqrt2.eval(2).unwrap());
        assert!((v - 2.914_213_562_373_095).abs() < 1e-4);
        let third = RealSample::rational(frac(1, 3));
        assert_eq!(multiplicative_psi(&third, &theta, 3, 128), Err(Error::Degenerate { q: 3 }));
    }
}
