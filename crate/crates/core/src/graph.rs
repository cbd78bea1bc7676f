//! Weighted GCD graphs: edge sets `E^{t,C}_{ψ,θ}`, the `E_{e^j}` sums,
//! prime compression with its exact rescaling identities, the `N`-structure
//! factorization, and the two anatomy counts.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::approx::ApproxFunction;
use crate::certified::{self, Enclosure};
use crate::numtheory::{self, harmonic_of_primes};
use crate::rational::{self, Rational};
use crate::{Error, Result};

/// A finitely supported nonnegative weight function.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WeightedSupport {
    entries: BTreeMap<u64, Rational>,
    squarefree: bool,
}

impl WeightedSupport {
    /// Zero weights are dropped; with `squarefree` every key must be square-free.
    pub fn new(entries: BTreeMap<u64, Rational>, squarefree: bool) -> Result<Self> {
        let mut out = BTreeMap::new();
        for (q, w) in entries {
            if q == 0 {
                return Err(Error::domain("support keys must be positive"));
            }
            if w.is_negative() {
                return Err(Error::domain(format!("negative weight at {q}")));
            }
            if w.is_zero() {
                continue;
            }
            if squarefree && !numtheory::is_squarefree(q)? {
                return Err(Error::domain(format!("{q} is not square-free")));
            }
            out.insert(q, w);
        }
        Ok(WeightedSupport { entries: out, squarefree })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, Rational)>, squarefree: bool) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (q, w) in pairs {
            if map.insert(q, w).is_some() {
                return Err(Error::domain(format!("duplicate key {q}")));
            }
        }
        Self::new(map, squarefree)
    }

    pub fn from_psi(psi: &ApproxFunction, squarefree: bool) -> Result<Self> {
        let support = psi
            .finite_support()
            .ok_or_else(|| Error::domain("weighted supports need a finitely supported ψ"))?;
        Self::new(support, squarefree)
    }

    pub fn entries(&self) -> &BTreeMap<u64, Rational> {
        &self.entries
    }

    pub fn keys(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.keys().copied()
    }

    pub fn weight(&self, q: u64) -> Rational {
        self.entries.get(&q).cloned().unwrap_or_default()
    }

    pub fn is_squarefree_flagged(&self) -> bool {
        self.squarefree
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distinct primes dividing some key.
    pub fn primes(&self) -> Result<BTreeSet<u64>> {
        let mut out = BTreeSet::new();
        for q in self.keys() {
            out.extend(numtheory::factorize(q)?.primes());
        }
        Ok(out)
    }
}

/// `μ_ψ(v) = φ(v) ψ(v) / v`.
fn mu_point(v: u64, weight: &Rational) -> Result<Rational> {
    Ok(weight * rational::frac(numtheory::totient(v)? as i64, v as i64))
}

/// `∑ φ(v)ψ(v)/v` over `subset` (the whole support when `None`).
pub fn mu(support: &WeightedSupport, subset: Option<&[u64]>) -> Result<Rational> {
    let mut total = Rational::zero();
    match subset {
        None => {
            for (v, w) in &support.entries {
                total += mu_point(*v, w)?;
            }
        }
        Some(keys) => {
            for v in keys {
                let w = support
                    .entries
                    .get(v)
                    .ok_or_else(|| Error::domain(format!("{v} is not in the support")))?;
                total += mu_point(*v, w)?;
            }
        }
    }
    Ok(total)
}

/// `D_{ψ,θ}(v, w) = max(w ψ(v), v θ(w)) / gcd(v, w)`.
pub fn d_value(v: u64, psi_v: &Rational, w: u64, theta_w: &Rational) -> Rational {
    let a = rational::uint(w) * psi_v;
    let b = rational::uint(v) * theta_w;
    core::cmp::max(a, b) / rational::uint(numtheory::gcd(v, w))
}

/// `∑ 1/p` over primes `p | vw/gcd(v,w)²` with `p ≥ t`.
pub fn pair_harmonic(v: u64, w: u64, t: &Rational) -> Result<Rational> {
    let g = numtheory::gcd(v, w);
    let a = numtheory::factorize(v / g)?;
    let b = numtheory::factorize(w / g)?;
    let mut primes: Vec<u64> = a.primes().chain(b.primes()).collect();
    primes.sort_unstable();
    Ok(harmonic_of_primes(primes.into_iter(), t))
}

/// A bipartite graph `E ⊆ V × W` with its defining parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GcdGraph {
    v: WeightedSupport,
    w: WeightedSupport,
    t: Rational,
    c: Rational,
    edges: BTreeSet<(u64, u64)>,
}

impl GcdGraph {
    /// A graph with a given edge list; edges must join support points.
    pub fn with_edges(
        v: WeightedSupport,
        w: WeightedSupport,
        t: Rational,
        c: Rational,
        edges: BTreeSet<(u64, u64)>,
    ) -> Result<Self> {
        for (a, b) in &edges {
            if !v.entries.contains_key(a) || !w.entries.contains_key(b) {
                return Err(Error::domain(format!("edge ({a}, {b}) leaves the supports")));
            }
        }
        Ok(GcdGraph { v, w, t, c, edges })
    }

    pub fn v(&self) -> &WeightedSupport {
        &self.v
    }

    pub fn w(&self) -> &WeightedSupport {
        &self.w
    }

    pub fn t(&self) -> &Rational {
        &self.t
    }

    pub fn c(&self) -> &Rational {
        &self.c
    }

    pub fn edges(&self) -> &BTreeSet<(u64, u64)> {
        &self.edges
    }

    /// `μ_{ψ,θ}(E) = ∑_{(v,w)∈E} μ_ψ(v) μ_θ(w)`.
    pub fn edge_measure(&self) -> Result<Rational> {
        self.measure_of(self.edges.iter())
    }

    fn measure_of<'a>(&self, edges: impl Iterator<Item = &'a (u64, u64)>) -> Result<Rational> {
        let mut total = Rational::zero();
        for (a, b) in edges {
            total += mu_point(*a, &self.v.weight(*a))? * mu_point(*b, &self.w.weight(*b))?;
        }
        Ok(total)
    }

    /// `Γ_E(v)`
    pub fn neighbours(&self, v: u64) -> Vec<u64> {
        self.edges.range((v, 0)..=(v, u64::MAX)).map(|(_, b)| *b).collect()
    }

    /// `P_{ψ,θ}`: primes dividing `vw` for some `(v, w) ∈ V × W`.
    pub fn prime_set(&self) -> Result<BTreeSet<u64>> {
        if self.v.is_empty() || self.w.is_empty() {
            return Ok(BTreeSet::new());
        }
        let mut p = self.v.primes()?;
        p.extend(self.w.primes()?);
        Ok(p)
    }
}

/// `E^{t,C}_{ψ,θ}`: pairs with `D_{ψ,θ}(v,w) ≤ 1` and prime harmonic `≥ C`.
pub fn build_edges(v: &WeightedSupport, w: &WeightedSupport, t: &Rational, c: &Rational) -> Result<GcdGraph> {
    if *t < Rational::one() {
        return Err(Error::domain("t must be at least 1"));
    }
    let one = Rational::one();
    let mut edges = BTreeSet::new();
    for (a, pa) in &v.entries {
        for (b, tb) in &w.entries {
            if d_value(*a, pa, *b, tb) > one {
                continue;
            }
            if !c.is_positive() || pair_harmonic(*a, *b, t)? >= *c {
                edges.insert((*a, *b));
            }
        }
    }
    GcdGraph::with_edges(v.clone(), w.clone(), t.clone(), c.clone(), edges)
}

/// Certified `e^j` with its floor; `e^j` is irrational for `j ≥ 1`.
fn exp_j(j: u64) -> Result<(Enclosure, u64)> {
    if j == 0 {
        return Ok((Enclosure::point(Rational::one()), 1));
    }
    let mut bits = 64;
    loop {
        let e = certified::exp_int(j, bits);
        if let Some(f) = e.floor() {
            if Rational::from_integer(f.clone()) < *e.lo() {
                let f = f.to_u64().ok_or_else(|| Error::domain(format!("e^{j} does not fit in u64")))?;
                return Ok((e, f));
            }
        }
        if bits >= 4096 {
            return Err(Error::PrecisionExhausted { what: format!("floor(e^{j})"), bits });
        }
        bits *= 2;
    }
}

/// `D(v, w) ≤ e^j`, decided by refinement.
fn d_at_most_exp(d: &Rational, j: u64) -> Result<bool> {
    if j == 0 {
        return Ok(*d <= Rational::one());
    }
    let o = certified::decide(d, 64, 4096, |b| Ok(certified::exp_int(j, b)), "D(v,w) against e^j")?;
    Ok(o != Ordering::Greater)
}

/// `E_{e^j}` over `supp ψ × supp ψ` with `∑_{p ≥ e^j} 1/p ≥ threshold`
/// (the classical threshold is 10).
pub fn build_edges_ej(psi: &WeightedSupport, j: u64, threshold: &Rational) -> Result<BTreeSet<(u64, u64)>> {
    let (_, floor) = exp_j(j)?;
    // p ≥ e^j ⟺ p ≥ ⌈e^j⌉; for j = 0 this is every prime
    let t = if j == 0 { Rational::one() } else { rational::uint(floor + 1) };
    let mut edges = BTreeSet::new();
    for (a, pa) in &psi.entries {
        for (b, pb) in &psi.entries {
            let d = d_value(*a, pa, *b, pb);
            if !d_at_most_exp(&d, j)? {
                continue;
            }
            if !threshold.is_positive() || pair_harmonic(*a, *b, &t)? >= *threshold {
                edges.insert((*a, *b));
            }
        }
    }
    Ok(edges)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prop54Report {
    pub j: u64,
    pub threshold: Rational,
    pub edge_count: usize,
    /// `∑_{(v,w)∈E} μ_ψ(v) μ_ψ(w)`
    pub sum: Rational,
    pub exp_neg_j: Enclosure,
    /// `sum · e^j`
    pub scaled: Enclosure,
}

pub fn prop54_sum(psi: &WeightedSupport, j: u64, threshold: &Rational, bits: u32) -> Result<Prop54Report> {
    let edges = build_edges_ej(psi, j, threshold)?;
    let mut sum = Rational::zero();
    for (a, b) in &edges {
        sum += mu_point(*a, &psi.weight(*a))? * mu_point(*b, &psi.weight(*b))?;
    }
    let exp_neg_j = certified::exp(&-rational::uint(j), bits);
    let scaled = certified::exp_int(j, bits).scale(&sum);
    Ok(Prop54Report { j, threshold: threshold.clone(), edge_count: edges.len(), sum, exp_neg_j, scaled })
}

/// The largest `j ≥ 0` with `∑_{p | qr/gcd², p ≥ e^j} 1/p ≥ threshold`, or
/// `None` when even `j = 0` fails.
///
/// Pairs at level `j` with `D ≤ e^j` lie in `E_{e^j}`, and the tail beyond
/// `e^{j+1}` is below the threshold.
pub fn dyadic_level(q: u64, r: u64, threshold: &Rational) -> Result<Option<u64>> {
    if pair_harmonic(q, r, &Rational::one())? < *threshold {
        return Ok(None);
    }
    let mut j = 0;
    loop {
        let (_, floor) = exp_j(j + 1)?;
        if pair_harmonic(q, r, &rational::uint(floor + 1))? < *threshold {
            return Ok(Some(j));
        }
        j += 1;
    }
}

/// `m_p(i, j)`, `α_i`, `β_j` for one prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressionStep {
    pub p: u64,
    /// `m[i][j] = μ(E ∩ (V_i × W_j)) / μ(E)`
    pub m: [[Rational; 2]; 2],
    pub alpha: [Rational; 2],
    pub beta: [Rational; 2],
}

impl CompressionStep {
    pub fn total(&self) -> Rational {
        self.m.iter().flatten().sum()
    }
}

fn divides_flag(p: u64, n: u64) -> usize {
    usize::from(n % p == 0)
}

fn require_compressible(g: &GcdGraph, p: u64) -> Result<()> {
    if !g.v.squarefree || !g.w.squarefree {
        return Err(Error::Unsupported("prime compression needs square-free supports".into()));
    }
    if !numtheory::is_prime(p) {
        return Err(Error::domain(format!("{p} is not prime")));
    }
    Ok(())
}

pub fn partition_by_prime(g: &GcdGraph, p: u64) -> Result<CompressionStep> {
    require_compressible(g, p)?;
    let total = g.edge_measure()?;
    if total.is_zero() {
        return Err(Error::domain("edge measure is zero"));
    }
    let mut m: [[Rational; 2]; 2] = Default::default();
    for (a, b) in &g.edges {
        let x = mu_point(*a, &g.v.weight(*a))? * mu_point(*b, &g.w.weight(*b))?;
        m[divides_flag(p, *a)][divides_flag(p, *b)] += x;
    }
    for row in m.iter_mut() {
        for e in row.iter_mut() {
            *e = &*e / &total;
        }
    }
    let side = |s: &WeightedSupport| -> Result<[Rational; 2]> {
        let mut parts: [Rational; 2] = Default::default();
        for (k, wt) in &s.entries {
            parts[divides_flag(p, *k)] += mu_point(*k, wt)?;
        }
        let all = &parts[0] + &parts[1];
        if all.is_zero() {
            return Ok(parts);
        }
        Ok([&parts[0] / &all, &parts[1] / &all])
    };
    Ok(CompressionStep { p, m, alpha: side(&g.v)?, beta: side(&g.w)? })
}

/// Both sides of the rescaling identities for one `(p, i, j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityReport {
    /// `μ_ψ̃(Ṽ_i)` and `p^{j−min(i,j)} (p^i/φ(p^i)) μ_ψ(V_i)`
    pub v_sides: (Rational, Rational),
    /// `μ_θ̃(W̃_j)` and `p^{i−min(i,j)} (p^j/φ(p^j)) μ_θ(W_j)`
    pub w_sides: (Rational, Rational),
    /// `μ_{ψ,θ}(E ∩ (V_i × W_j))` and `(φ(p^i)φ(p^j)/p^{i+j}) p^{−|i−j|} μ_{ψ̃,θ̃}(Ẽ)`
    pub edge_sides: (Rational, Rational),
    /// Edges of `Ẽ` lying in `E^{t, C − 1[i≠j]/t}_{ψ̃,θ̃}`, out of `|Ẽ|`.
    pub reduced_edges: (usize, usize),
    /// `p ∉ P̃` and `P̃ ⊆ P \ {p}`.
    pub prime_removed: bool,
    /// `|P̃|` and `|P \ {p}|`.
    pub prime_counts: (usize, usize),
    /// `P̃ = P \ {p}`; reported, not required.
    pub prime_set_equal: bool,
}

impl IdentityReport {
    pub fn identity1(&self) -> bool {
        self.v_sides.0 == self.v_sides.1 && self.w_sides.0 == self.w_sides.1
    }

    pub fn identity2(&self) -> bool {
        self.edge_sides.0 == self.edge_sides.1
    }

    pub fn identity3(&self) -> bool {
        self.reduced_edges.0 == self.reduced_edges.1 && self.prime_removed
    }

    pub fn all_hold(&self) -> bool {
        self.identity1() && self.identity2() && self.identity3()
    }

    /// Audit rows `(label, lhs, rhs, equal)` in the order
    /// `1V, 1W, 2, 3E, 3P`.
    pub fn audit_rows(&self) -> Vec<(&'static str, Rational, Rational, bool)> {
        let count = |n: usize| rational::uint(n as u64);
        alloc::vec![
            ("1V", self.v_sides.0.clone(), self.v_sides.1.clone(), self.v_sides.0 == self.v_sides.1),
            ("1W", self.w_sides.0.clone(), self.w_sides.1.clone(), self.w_sides.0 == self.w_sides.1),
            ("2", self.edge_sides.0.clone(), self.edge_sides.1.clone(), self.identity2()),
            (
                "3E",
                count(self.reduced_edges.0),
                count(self.reduced_edges.1),
                self.reduced_edges.0 == self.reduced_edges.1,
            ),
            ("3P", count(self.prime_counts.0), count(self.prime_counts.1), self.prime_set_equal),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Compression {
    pub psi: WeightedSupport,
    pub theta: WeightedSupport,
    /// `Ẽ_{i,j}` on `Ṽ_i × W̃_j`, carrying `t` and `C − 1[i≠j]/t`.
    pub graph: GcdGraph,
    pub report: IdentityReport,
}

fn pow_p(p: u64, k: u64) -> Rational {
    if k == 0 {
        Rational::one()
    } else {
        rational::uint(p)
    }
}

/// `p^i / φ(p^i)` for `i ∈ {0, 1}`.
fn p_over_phi(p: u64, i: u64) -> Rational {
    if i == 0 {
        Rational::one()
    } else {
        rational::frac(p as i64, p as i64 - 1)
    }
}

/// Removes the prime `p` from the graph on the block `V_i × W_j`.
///
/// `ψ̃(v) = p^{j−min(i,j)} ψ(p^i v)` and `θ̃(w) = p^{i−min(i,j)} θ(p^j w)` for
/// `p ∤ v, w`; `Ẽ = {(v, w) : (p^i v, p^j w) ∈ E ∩ (V_i × W_j)}`.
pub fn compress(g: &GcdGraph, p: u64, i: u64, j: u64) -> Result<Compression> {
    require_compressible(g, p)?;
    if i > 1 || j > 1 {
        return Err(Error::domain("i and j must be 0 or 1"));
    }
    let lo = i.min(j);
    let (sv, sw) = (pow_p(p, j - lo), pow_p(p, i - lo));
    let (pi, pj) = (if i == 1 { p } else { 1 }, if j == 1 { p } else { 1 });
    let in_block = |n: u64, k: u64| (n % p == 0) == (k == 1);

    let mut psi_t = BTreeMap::new();
    let mut v_block = Vec::new();
    for (v, wt) in &g.v.entries {
        if in_block(*v, i) {
            v_block.push(*v);
            psi_t.insert(v / pi, &sv * wt);
        }
    }
    let mut theta_t = BTreeMap::new();
    let mut w_block = Vec::new();
    for (w, wt) in &g.w.entries {
        if in_block(*w, j) {
            w_block.push(*w);
            theta_t.insert(w / pj, &sw * wt);
        }
    }
    let psi = WeightedSupport::new(psi_t, true)?;
    let theta = WeightedSupport::new(theta_t, true)?;

    let block_edges: Vec<&(u64, u64)> =
        g.edges.iter().filter(|(a, b)| in_block(*a, i) && in_block(*b, j)).collect();
    let reduced: BTreeSet<(u64, u64)> = block_edges.iter().map(|(a, b)| (a / pi, b / pj)).collect();
    let c_new = if i != j { &g.c - g.t.recip() } else { g.c.clone() };
    let graph = GcdGraph::with_edges(psi.clone(), theta.clone(), g.t.clone(), c_new.clone(), reduced)?;

    // identity (1)
    let v_lhs = mu(&psi, None)?;
    let v_rhs = &sv * p_over_phi(p, i) * mu(&g.v, Some(&v_block))?;
    let w_lhs = mu(&theta, None)?;
    let w_rhs = &sw * p_over_phi(p, j) * mu(&g.w, Some(&w_block))?;

    // identity (2)
    let edge_lhs = g.measure_of(block_edges.iter().copied())?;
    let factor = p_over_phi(p, i).recip() * p_over_phi(p, j).recip()
        / pow_p(p, if i == j { 0 } else { 1 });
    let edge_rhs = factor * graph.edge_measure()?;

    // identity (3)
    let one = Rational::one();
    let mut inside = 0;
    for (a, b) in graph.edges() {
        let d = d_value(*a, &psi.weight(*a), *b, &theta.weight(*b));
        if d <= one && pair_harmonic(*a, *b, &g.t)? >= c_new {
            inside += 1;
        }
    }
    let parent: BTreeSet<u64> = g.prime_set()?.into_iter().filter(|q| *q != p).collect();
    let child = graph.prime_set()?;
    let prime_removed = !child.contains(&p) && child.is_subset(&parent);

    Ok(Compression {
        psi,
        theta,
        report: IdentityReport {
            v_sides: (v_lhs, v_rhs),
            w_sides: (w_lhs, w_rhs),
            edge_sides: (edge_lhs, edge_rhs),
            reduced_edges: (inside, graph.edges().len()),
            prime_removed,
            prime_counts: (child.len(), parent.len()),
            prime_set_equal: child == parent,
        },
        graph,
    })
}

/// Exponents `k_p` and `N = ∏ p^{k_p}` chosen from the `m_p` matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureWitness {
    /// `(p, k_p)` over the graph's prime set.
    pub exponents: Vec<(u64, u8)>,
    pub n: BigInt,
    /// `μ(E*) / μ(E)` with `E*` the edges satisfying the valuation condition.
    pub concentration: Rational,
}

/// `k_p = 1` iff `m_p(0,0) < m_p(1,1)`, i.e. `k_p` sits on the heavier
/// diagonal corner.
pub fn structure_witness(g: &GcdGraph) -> Result<StructureWitness> {
    let total = g.edge_measure()?;
    if total.is_zero() {
        return Err(Error::domain("edge measure is zero"));
    }
    let mut exponents = Vec::new();
    let mut n = BigInt::one();
    for p in g.prime_set()? {
        let step = partition_by_prime(g, p)?;
        let k = u8::from(step.m[0][0] < step.m[1][1]);
        if k == 1 {
            n *= p;
        }
        exponents.push((p, k));
    }
    let mut good = Rational::zero();
    for (a, b) in &g.edges {
        let ok = exponents.iter().all(|(p, k)| {
            let (va, vb) = (divides_flag(*p, *a) as i64, divides_flag(*p, *b) as i64);
            (va - *k as i64).abs() + (vb - *k as i64).abs() <= 1
        });
        if ok {
            good += mu_point(*a, &g.v.weight(*a))? * mu_point(*b, &g.w.weight(*b))?;
        }
    }
    Ok(StructureWitness { exponents, n, concentration: good / total })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Structure {
    Factored {
        v_minus: u64,
        v_plus: u64,
        w_minus: u64,
        w_plus: u64,
        /// Pairwise coprimality and the three product identities.
        identities_hold: bool,
    },
    Violation { primes: Vec<u64> },
}

/// `v⁻ = N/gcd(N,v)`, `v⁺ = v/gcd(N,v)` (likewise for `w`) when
/// `|ν_p(v/N)| + |ν_p(w/N)| ≤ 1` for every prime, else the offending primes.
pub fn structure_factorize(v: u64, w: u64, n: u64) -> Result<Structure> {
    if v == 0 || w == 0 || n == 0 {
        return Err(Error::domain("v, w, N must be positive"));
    }
    for x in [v, w, n] {
        if !numtheory::is_squarefree(x)? {
            return Err(Error::Unsupported(format!("{x} is not square-free")));
        }
    }
    let mut primes = BTreeSet::new();
    for x in [v, w, n] {
        primes.extend(numtheory::factorize(x)?.primes());
    }
    let nr = rational::uint(n);
    let mut bad = Vec::new();
    for p in primes {
        let a = numtheory::padic_valuation(&(rational::uint(v) / &nr), p)?;
        let b = numtheory::padic_valuation(&(rational::uint(w) / &nr), p)?;
        if a.abs() + b.abs() > 1 {
            bad.push(p);
        }
    }
    if !bad.is_empty() {
        return Ok(Structure::Violation { primes: bad });
    }
    let (gv, gw) = (n.gcd(&v), n.gcd(&w));
    let (vm, vp, wm, wp) = (n / gv, v / gv, n / gw, w / gw);
    let parts = [vm, vp, wm, wp];
    let coprime = (0..4).all(|a| (a + 1..4).all(|b| parts[a].gcd(&parts[b]) == 1));
    let big = |x: u64| BigInt::from(x);
    let g = v.gcd(&w);
    let identities_hold = coprime
        && big(v) * big(vm) == big(n) * big(vp)
        && big(w) * big(wm) == big(n) * big(wp)
        && big(v / g) * big(w / g) == big(vm) * big(vp) * big(wm) * big(wp);
    Ok(Structure::Factored { v_minus: vm, v_plus: vp, w_minus: wm, w_plus: wp, identities_hold })
}

/// Whether `num/den ≥ c` for `c > 0`.
fn at_least(num: u128, den: u128, c: &Rational) -> bool {
    Threshold::new(c).at_least(num, den)
}

/// `c` with a machine-word fast path for the comparison `num/den ≥ c`.
struct Threshold<'a> {
    c: &'a Rational,
    small: Option<(u128, u128)>,
}

impl<'a> Threshold<'a> {
    fn new(c: &'a Rational) -> Self {
        let small = c.numer().to_u128().zip(c.denom().to_u128());
        Threshold { c, small }
    }

    fn at_least(&self, num: u128, den: u128) -> bool {
        if let Some((cn, cd)) = self.small {
            if let (Some(l), Some(r)) = (num.checked_mul(cd), cn.checked_mul(den)) {
                return l >= r;
            }
        }
        BigInt::from(num) * self.c.denom() >= self.c.numer() * BigInt::from(den)
    }
}

/// Smallest integer prime bound equivalent to `p ≥ t`.
fn prime_floor(t: &Rational) -> u64 {
    rational::ceil_u64(t).unwrap_or(0)
}

/// `H_t(n) = ∑_{p ≥ t, p | n} 1/p` as `(num, den)` with `den = ∏ p`.
fn harmonic_parts(n: u64, tmin: u64) -> Result<(u128, u128)> {
    let (mut num, mut den) = (0u128, 1u128);
    for p in numtheory::factorize(n)?.primes() {
        if p >= tmin {
            num = num * p as u128 + den;
            den *= p as u128;
        }
    }
    Ok((num, den))
}

/// `flags[n]` for `1 ≤ n ≤ x`: `H_t(n) ≥ c` (index 0 unused).
pub fn anatomy_flags(x: u64, t: &Rational, c: &Rational) -> Result<Vec<bool>> {
    let n = x as usize;
    if !c.is_positive() {
        let mut v = alloc::vec![true; n + 1];
        v[0] = false;
        return Ok(v);
    }
    let tmin = prime_floor(t);
    // multiplicative sieve over primes ≥ tmin: accumulate (num, den)
    let mut num = alloc::vec![0u128; n + 1];
    let mut den = alloc::vec![1u128; n + 1];
    let primes = numtheory::Sieve::new(x.max(2));
    for &p in primes.primes() {
        let p = p as u64;
        if p > x {
            break;
        }
        if p < tmin {
            continue;
        }
        let mut m = p as usize;
        while m <= n {
            num[m] = num[m] * p as u128 + den[m];
            den[m] *= p as u128;
            m += p as usize;
        }
    }
    let c = Threshold::new(c);
    Ok((0..=n).map(|k| k > 0 && c.at_least(num[k], den[k])).collect())
}

/// `#{n ≤ x : ∑_{p ≥ t, p | n} 1/p ≥ c}`.
pub fn anatomy_count(x: u64, t: &Rational, c: &Rational) -> Result<u64> {
    if x == 0 {
        return Err(Error::domain("x must be positive"));
    }
    Ok(anatomy_flags(x, t, c)?.into_iter().filter(|b| *b).count() as u64)
}

/// `∑_{mn = M, H_t(m) ≥ c} φ(n)`.
pub fn divisor_anatomy_sum(m: u64, t: &Rational, c: &Rational) -> Result<u64> {
    if m == 0 {
        return Err(Error::domain("M must be positive"));
    }
    let f = numtheory::factorize(m)?;
    let tmin = prime_floor(t);
    let mut total = 0;
    for d in f.divisors() {
        let ok = if c.is_positive() {
            let (a, b) = harmonic_parts(d, tmin)?;
            at_least(a, b, c)
        } else {
            true
        };
        if ok {
            total += numtheory::totient(m / d)?;
        }
    }
    Ok(total)
}

/// Both sides of `μ(E) ≤ 1000^{P(ε)} (μ(V) μ(W) e^{−Ct})^{1/2+ε}` in
/// logarithmic form. Diagnostic only: `p0` is a free parameter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MainTheoremReport {
    pub edge_count: usize,
    pub edge_measure: Rational,
    pub mu_v: Rational,
    pub mu_w: Rational,
    pub prime_count: usize,
    pub p0: u64,
    /// `P(ε) = p0 + |P ∩ [1, p0]|`
    pub exponent: u64,
    pub ln_lhs: Option<Enclosure>,
    pub ln_rhs: Option<Enclosure>,
    /// `ln(lhs / rhs)` when both sides are positive.
    pub ln_ratio: Option<Enclosure>,
    pub holds: Option<bool>,
}

pub fn main_theorem_report(
    v: &WeightedSupport,
    w: &WeightedSupport,
    t: &Rational,
    c: &Rational,
    epsilon: &Rational,
    p0: u64,
    bits: u32,
) -> Result<MainTheoremReport> {
    if !epsilon.is_positive() || *epsilon > rational::frac(2, 5) {
        return Err(Error::domain("ε must lie in (0, 2/5]"));
    }
    let g = build_edges(v, w, t, c)?;
    let edge_measure = g.edge_measure()?;
    let (mu_v, mu_w) = (mu(v, None)?, mu(w, None)?);
    let primes = g.prime_set()?;
    let small = primes.iter().filter(|p| **p <= p0).count() as u64;
    let exponent = p0 + small;
    let ln_lhs = if edge_measure.is_positive() { Some(certified::ln(&edge_measure, bits)?) } else { None };
    let ln_rhs = if (&mu_v * &mu_w).is_positive() {
        let base = certified::ln(&(&mu_v * &mu_w), bits)?.add_rational(&-(c * t));
        let power = base.scale(&(rational::half() + epsilon));
        let k = certified::ln(&rational::uint(1000), bits)?.scale(&rational::uint(exponent));
        Some(power.add(&k))
    } else {
        None
    };
    let (ln_ratio, holds) = match (&ln_lhs, &ln_rhs) {
        (None, _) => (None, Some(true)),
        (Some(_), None) => (None, Some(false)),
        (Some(a), Some(b)) => {
            let r = a.sub(b);
            let h = match r.compare(&Rational::zero()) {
                Some(Ordering::Greater) => Some(false),
                Some(_) => Some(true),
                None => None,
            };
            (Some(r), h)
        }
    };
    Ok(MainTheoremReport {
        edge_count: g.edges().len(),
        edge_measure,
        mu_v,
        mu_w,
        prime_count: primes.len(),
        p0,
        exponent,
        ln_lhs,
        ln_rhs,
        ln_ratio,
        holds,
    })
}

/// `num/den` text of every weight, for dumps.
pub fn describe(s: &WeightedSupport) -> Vec<(u64, String)> {
    s.entries.iter().map(|(k, v)| (*k, rational::to_num_den(v))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn ws(pairs: &[(u64, Rational)]) -> WeightedSupport {
        WeightedSupport::from_pairs(pairs.iter().cloned(), true).unwrap()
    }

    fn sixth() -> WeightedSupport {
        ws(&[(2, frac(1, 6)), (3, frac(1, 6))])
    }

    #[test]
    fn mu_examples() {
        assert_eq!(mu(&WeightedSupport::default(), None).unwrap(), int(0));
        assert_eq!(mu(&ws(&[(1, frac(2, 7))]), None).unwrap(), frac(2, 7));
        assert_eq!(mu(&ws(&[(2, frac(1, 2)), (3, frac(1, 2))]), None).unwrap(), frac(7, 12));
        assert!(mu(&sixth(), Some(&[5])).is_err());
        assert!(WeightedSupport::from_pairs([(4, frac(1, 2))], true).is_err());
    }

    #[test]
    fn edge_examples() {
        let g = build_edges(&sixth(), &sixth(), &int(1), &frac(1, 2)).unwrap();
        let e: Vec<_> = g.edges().iter().copied().collect();
        assert_eq!(e, vec![(2, 3), (3, 2)]);
        assert_eq!(d_value(2, &frac(1, 6), 3, &frac(1, 6)), frac(1, 2));
        let g = build_edges(&sixth(), &sixth(), &int(1), &int(1)).unwrap();
        assert!(g.edges().is_empty());
        let g = build_edges(&sixth(), &sixth(), &int(1), &int(0)).unwrap();
        assert_eq!(g.edges().len(), 4);
        assert!(build_edges(&sixth(), &sixth(), &frac(1, 2), &int(0)).is_err());
    }

    #[test]
    fn ej_examples() {
        let s = sixth();
        let e = build_edges_ej(&s, 0, &frac(1, 2)).unwrap();
        assert_eq!(e.into_iter().collect::<Vec<_>>(), vec![(2, 3), (3, 2)]);
        assert!(build_edges_ej(&s, 0, &int(10)).unwrap().is_empty());
        assert!(build_edges_ej(&s, 5, &int(10)).unwrap().is_empty());
        let r = prop54_sum(&s, 0, &frac(1, 2), 128).unwrap();
        assert_eq!(r.sum, frac(1, 54));
        assert!(r.exp_neg_j.is_point());
        assert_eq!(prop54_sum(&s, 0, &int(10), 128).unwrap().sum, int(0));
        // e^1 ≈ 2.718: primes ≥ 3 only, so (2,3) has harmonic 1/3
        let e = build_edges_ej(&s, 1, &frac(1, 3)).unwrap();
        assert_eq!(e.len(), 2);
        assert!(build_edges_ej(&s, 1, &frac(1, 2)).unwrap().is_empty());
    }

    #[test]
    fn dyadic_levels() {
        // 2·3·5·7·11·13: harmonic over p ≥ 3 is 1/3+1/5+1/7+1/11+1/13
        let q = 30030;
        assert_eq!(dyadic_level(q, 1, &int(1)).unwrap(), Some(0));
        assert_eq!(dyadic_level(q, 1, &int(2)).unwrap(), None);
        // tail over p ≥ 8 is 1/11 + 1/13, over p ≥ 21 it is 0
        assert_eq!(dyadic_level(q, 1, &frac(1, 7)).unwrap(), Some(2));
    }

    #[test]
    fn partition_examples() {
        let s = ws(&[(2, frac(1, 2)), (3, frac(1, 2))]);
        let g = build_edges(&s, &s, &int(1), &int(-1)).unwrap();
        let all: BTreeSet<(u64, u64)> = [(2, 2), (2, 3), (3, 2), (3, 3)].into_iter().collect();
        let g = GcdGraph::with_edges(g.v().clone(), g.w().clone(), int(1), int(-1), all).unwrap();
        let step = partition_by_prime(&g, 2).unwrap();
        // μ(2) = 1/4, μ(3) = 1/3, μ(E) = (7/12)²
        let t = frac(49, 144);
        assert_eq!(step.m[1][1], frac(1, 16) / &t);
        assert_eq!(step.m[1][0], frac(1, 12) / &t);
        assert_eq!(step.m[0][0], frac(1, 9) / &t);
        assert_eq!(step.total(), int(1));
        assert_eq!(step.alpha, [frac(4, 7), frac(3, 7)]);
        let none = partition_by_prime(&g, 5).unwrap();
        assert_eq!(none.m[0][0], int(1));
        let twos = ws(&[(2, frac(1, 8)), (6, frac(1, 8))]);
        let g = build_edges(&twos, &twos, &int(1), &int(0)).unwrap();
        assert_eq!(partition_by_prime(&g, 2).unwrap().m[1][1], int(1));
    }

    #[test]
    fn compress_examples() {
        let v = ws(&[(2, frac(1, 2)), (6, frac(1, 2))]);
        let g = GcdGraph::with_edges(v.clone(), v.clone(), int(1), int(0), BTreeSet::new()).unwrap();
        let c = compress(&g, 2, 1, 1).unwrap();
        assert_eq!(c.psi.keys().collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(c.psi.weight(1), frac(1, 2));
        assert_eq!(c.psi.weight(3), frac(1, 2));
        assert_eq!(c.report.v_sides.0, int(2) * mu(&v, None).unwrap());
        assert!(c.report.all_hold());
        let s = sixth();
        let g = build_edges(&s, &s, &int(1), &frac(1, 2)).unwrap();
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let c = compress(&g, 2, i, j).unwrap();
            assert!(c.report.all_hold(), "({i},{j})");
        }
        let c = compress(&g, 5, 0, 0).unwrap();
        assert_eq!(c.psi, s);
        assert!(c.report.all_hold() && c.report.prime_set_equal);
        let nsf = WeightedSupport::from_pairs([(4, frac(1, 2))], false).unwrap();
        let g = build_edges(&nsf, &nsf, &int(1), &int(0)).unwrap();
        assert!(matches!(compress(&g, 2, 1, 1), Err(Error::Unsupported(_))));
    }

    #[test]
    fn prime_set_can_shrink_beyond_p() {
        // V = {2, 3}, W = {2}: compressing at p = 2 on (1, 1) keeps only V_1 = {2}
        let v = ws(&[(2, frac(1, 8)), (3, frac(1, 8))]);
        let w = ws(&[(2, frac(1, 8))]);
        let g = build_edges(&v, &w, &int(1), &int(0)).unwrap();
        let c = compress(&g, 2, 1, 1).unwrap();
        assert!(c.report.all_hold());
        assert!(!c.report.prime_set_equal);
        assert_eq!(c.report.prime_counts, (0, 1));
    }

    #[test]
    fn structure_examples() {
        assert_eq!(
            structure_factorize(6, 6, 6).unwrap(),
            Structure::Factored { v_minus: 1, v_plus: 1, w_minus: 1, w_plus: 1, identities_hold: true }
        );
        assert_eq!(
            structure_factorize(10, 3, 6).unwrap(),
            Structure::Factored { v_minus: 3, v_plus: 5, w_minus: 2, w_plus: 1, identities_hold: true }
        );
        // p = 5 offends, and so does p = 3: ν_3(5/6) = ν_3(10/6) = −1
        assert_eq!(structure_factorize(5, 10, 6).unwrap(), Structure::Violation { primes: vec![3, 5] });
        assert!(structure_factorize(4, 3, 6).is_err());
    }

    #[test]
    fn witness_on_small_graph() {
        let s = sixth();
        let g = build_edges(&s, &s, &int(1), &frac(1, 2)).unwrap();
        let wit = structure_witness(&g).unwrap();
        assert_eq!(wit.exponents.len(), 2);
        assert!(wit.concentration <= int(1));
    }

    fn brute_harmonic(n: u64, t: &Rational) -> Rational {
        let mut s = Rational::zero();
        for p in 2..=n {
            if n % p == 0 && (2..p).all(|d| p % d != 0) && rational::uint(p) >= *t {
                s += frac(1, p as i64);
            }
        }
        s
    }

    #[test]
    fn anatomy_examples() {
        assert_eq!(anatomy_count(10, &int(2), &int(0)).unwrap(), 10);
        assert_eq!(anatomy_count(10, &int(2), &frac(1, 2)).unwrap(), 5);
        assert_eq!(anatomy_count(10, &int(3), &frac(1, 2)).unwrap(), 0);
        assert_eq!(divisor_anatomy_sum(6, &int(2), &int(0)).unwrap(), 6);
        assert_eq!(divisor_anatomy_sum(6, &int(2), &frac(1, 2)).unwrap(), 3);
        assert_eq!(divisor_anatomy_sum(1, &int(5), &frac(1, 9)).unwrap(), 0);
    }

    #[test]
    fn anatomy_matches_brute_force() {
        for (t, c) in [(int(1), frac(1, 3)), (frac(5, 2), frac(1, 5)), (int(7), frac(1, 11))] {
            let flags = anatomy_flags(300, &t, &c).unwrap();
            for n in 1..=300u64 {
                assert_eq!(flags[n as usize], brute_harmonic(n, &t) >= c, "n={n}");
            }
            for m in 1..=300u64 {
                let brute: u64 = (1..=m)
                    .filter(|d| m % d == 0 && brute_harmonic(*d, &t) >= c)
                    .map(|d| numtheory::totient(m / d).unwrap())
                    .sum();
                assert_eq!(divisor_anatomy_sum(m, &t, &c).unwrap(), brute);
            }
        }
    }

    #[test]
    fn main_theorem_examples() {
        let s = sixth();
        let r = main_theorem_report(&s, &s, &int(1), &frac(1, 2), &frac(2, 5), 100, 128).unwrap();
        assert_eq!(r.edge_measure, frac(1, 54));
        assert_eq!(r.exponent, 102);
        assert_eq!(r.holds, Some(true));
        let r = main_theorem_report(&s, &s, &int(1), &int(50), &frac(2, 5), 100, 128).unwrap();
        assert_eq!(r.edge_measure, int(0));
        assert_eq!(r.holds, Some(true));
        assert!(main_theorem_report(&s, &s, &int(1), &int(0), &int(1), 100, 128).is_err());
    }

    #[test]
    fn edges_respect_gcd_bounds() {
        let v = ws(&[(6, frac(1, 30)), (10, frac(1, 40)), (15, frac(1, 50)), (21, frac(1, 60))]);
        let g = build_edges(&v, &v, &int(1), &int(0)).unwrap();
        assert!(!g.edges().is_empty());
        for (a, b) in g.edges() {
            let gg = rational::uint(numtheory::gcd(*a, *b));
            assert!(v.weight(*a) <= &gg / rational::uint(*b));
            assert!(v.weight(*b) <= &gg / rational::uint(*a));
        }
    }
}
