//! Subcommand execution. `execute` turns a config into a report; nothing
//! here touches stdout or the filesystem except through [`Report`].

use std::path::PathBuf;

use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use dslab_core::certified::Enclosure;
use dslab_core::correlation;
use dslab_core::graph;
use dslab_core::numtheory;
use dslab_core::orbit::{self, RealSample};
use dslab_core::rational::{self, Rational};
use dslab_core::torus;
use dslab_core::{GcdGraph, WeightedSupport};

use crate::config::{self, Format, RunConfig};
use crate::error::{CliError, CliResult};
use crate::format::{self, rat, Table};
use crate::{oracle, par};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fractional digits in decimal columns.
pub const DECIMAL_DIGITS: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// Normalized config; replaying it reproduces the report byte for byte.
    pub config: RunConfig,
    pub table: Table,
    /// Extra JSON results appended after the table rows.
    pub extra: Vec<Value>,
    /// Side files requested by the config (interval dumps, graph dumps).
    pub files: Vec<(PathBuf, String)>,
}

impl Report {
    pub fn render(&self) -> String {
        let format = self.config.format().unwrap_or(Format::Csv);
        match format {
            Format::Csv => {
                let mut out = format!("# config: {}\n# dslab {VERSION}\n", self.config.to_json());
                out.push_str(&self.table.to_csv());
                out
            }
            Format::Json => {
                let mut results = self.table.to_json_rows();
                results.extend(self.extra.iter().cloned());
                let envelope = json!({
                    "config": serde_json::to_value(&self.config).expect("config serializes"),
                    "results": results,
                    "version": VERSION,
                });
                let mut s = serde_json::to_string_pretty(&envelope).expect("report serializes");
                s.push('\n');
                s
            }
        }
    }
}

fn bool_cell(b: bool) -> String {
    if b { "true" } else { "false" }.to_string()
}

fn decimal(r: &Rational) -> String {
    rational::to_decimal(r, DECIMAL_DIGITS)
}

/// Runs one subcommand.
pub fn execute(raw: &RunConfig) -> CliResult<Report> {
    let cfg = raw.normalize()?;
    let mut report = Report { config: cfg.clone(), table: Table::default(), extra: Vec::new(), files: Vec::new() };
    match cfg.command.as_str() {
        "series" => series(&cfg, &mut report),
        "measure" => measure(&cfg, &mut report),
        "overlap" => overlap(&cfg, &mut report),
        "variance" => variance(&cfg, &mut report),
        "gcdsum" => gcdsum(&cfg, &mut report),
        "chung-erdos" => chung_erdos(&cfg, &mut report),
        "collapse" => collapse(&cfg, &mut report),
        "graph" => graph_cmd(&cfg, &mut report),
        "compress" => compress(&cfg, &mut report),
        "anatomy" => anatomy(&cfg, &mut report),
        "orbit" => orbit_cmd(&cfg, &mut report),
        "montecarlo" => montecarlo(&cfg, &mut report),
        other => Err(CliError::usage(format!("unknown command {other:?}"))),
    }?;
    Ok(report)
}

fn series(cfg: &RunConfig, out: &mut Report) -> CliResult<()> {
    let psi = cfg.build_psi()?;
    let q_max = cfg.q_max()?;
    let Some(step) = cfg.sweep else {
        let (plain, weighted) = dslab_core::approx::series_partial_sums(&psi, q_max)?;
        out.table = Table::new(&["sum_psi", "sum_weighted"]);
        out.table.push(vec![rat(&plain), rat(&weighted)]);
        return Ok(());
    };
    if step == 0 {
        return Err(CliError::usage("--sweep must be positive"));
    }
    out.table = Table::new(&["Q", "sum_psi", "sum_weighted"]);
    let values = psi.values_upto(q_max)?;
    let (mut plain, mut weighted) = (Rational::zero(), Rational::zero());
    let mut it = values.iter().peekable();
    let mut checkpoint = step.min(q_max);
    loop {
        while let Some((q, v)) = it.next_if(|(q, _)| *q <= checkpoint) {
            plain += v;
            weighted += v * rational::frac(numtheory::totient(*q)? as i64, *q as i64);
        }
        out.table.push(vec![checkpoint.to_string(), rat(&plain), rat(&weighted)]);
        if checkpoint == q_max {
            return Ok(());
        }
        checkpoint = checkpoint.saturating_add(step).min(q_max);
    }
}

fn gamma(cfg: &RunConfig) -> CliResult<Rational> {
    match &cfg.gamma {
        None => Ok(Rational::zero()),
        Some(g) => {
            let g = format::parse_rat(g, "gamma")?;
            if g.is_negative() || g >= rational::int(1) {
                return Err(CliError::usage("--gamma must lie in [0, 1)"));
            }
            Ok(g)
        }
    }
}

fn measure(cfg: &RunConfig, out: &mut Report) -> CliResult<()> {
    let psi = cfg.build_psi()?;
    let g = gamma(cfg)?;
    let coprime = !cfg.all_residues;
    let qs: Vec<u64> = match (cfg.q, cfg.x_min.is_some() || cfg.y_max.is_some()) {
        (Some(_), true) => return Err(CliError::usage("give either --q or --X/--Y, not both")),
        (Some(0), _) => return Err(CliError::usage("--q must be positive")),
        (Some(q), false) => vec![q],
        (None, _) => {
            let (x, y) = cfg.range()?;
            (x..=y).collect()
        }
    };
    if cfg.intervals.is_some() && qs.len() != 1 {
        return Err(CliError::usage("--intervals needs a single --q"));
    }
    out.table = Table::new(&["q", "measure"]);
    out.table.comment(format!(
        "residues={} gamma={}",
        if coprime { "coprime" } else { "all" },
        rat(&g)
    ));
    for q in qs {
        let set = torus::build_aq(q, &psi.eval(q)?, coprime, &g)?;
        out.table.push(vec![q.to_string(), rat(&set.measure())]);
        if let Some(path) = &cfg.intervals {
            out.files.push((path.clone(), format::intervals_csv(&set)));
        }
    }
    Ok(())
}

fn overlap(cfg: &RunConfig, out: &mut Report) -> CliResult<()> {
    let psi = cfg.build_psi()?;
    let sf = |n: u64| numtheory::is_squarefree(n).map_err(CliError::from);
    let pairs: Vec<(u64, u64)> = match (cfg.q, cfg.r) {
        (Some(q), Some(r)) => {
            if q == 0 || r == 0 || q == r {
                return Err(CliError::usage("--q and --r must be distinct positive integers"));
            }
            if cfg.squarefree {
                for n in [q, r] {
                    if !sf(n)? {
                        return Err(CliError::usage(format!("{n} is not square-free but --squarefree is set")));
                    }
                }
            }
            vec![(q, r)]
        }
        (None, None) => {
            let (x, y) = cfg.range()?;
            let mut keys = Vec::new();
            for q in x..=y {
                if !cfg.squarefree || sf(q)? {
                    keys.push(q);
                }
            }
            let mut pairs = Vec::new();
            for (i, q) in keys.iter().enumerate() {
                for r in &keys[i + 1..] {
                    pairs.push((*q, *r));
                }
            }
            if pairs.is_empty() {
                return Err(CliError::usage(format!("no pairs q < r in [{x}, {y}]")));
            }
            pairs
        }
        _ => return Err(CliError::usage("give both --q and --r, or neither")),
    };
    let reports = par::overlap_grid(&psi, &pairs)?;
    out.table = Table::new(&["q", "r", "exact_overlap", "bound", "ratio"]);
    for r in reports {
        out.table.push(vec![r.q.to_string(), r.r.to_string(), rat(&r.exact_overlap), rat(&r.bound()), rat(&r.ratio)]);
    }
    Ok(())
}

fn variance(cfg: &RunConfig, out: &mut Report) -> CliResult<()> {
    let psi = cfg.build_psi()?;
    let (x, y) = cfg.range()?;
    let (v, s) = par::variance_sum(&psi, x, y, !cfg.all_residues)?;
    if s.is_zero() {
        return Err(dslab_core::Error::Domain("sum of measures is zero".into()).into());
    }
    let ratio = &v / (&s * &s);
    out.table = Table::new(&["X", "Y", "sum_measures", "variance_sum", "ratio"]);
    out.table.comment(format!("residues={}", if cfg.all_residues { "all" } else { "coprime" }));
    out.table.push(vec![x.to_string(), y.to_string(), rat(&s), rat(&v), rat(&ratio)]);
    Ok(())
}

fn gcdsum(cfg: &RunConfig, out: &mut Report) -> CliResult<()> {
    let psi = cfg.build_psi()?;
    let q_max = cfg.q_max()?;
    let bits = cfg.precision_bits();
    let e = correlation::gcd_sum(&psi, q_max, bits)?;
    out.table = Table::new(&["Q", "lower", "upper", "decimal"]);
    out.table.comment(format!(
        "precision_bits={bits}; lower/upper enclose the sum; decimal = midpoint truncated to {DECIMAL_DIGITS} digits"
    ));
    out.table.push(vec![q_max.to_string(), rat(e.lo()), rat(e.hi()), decimal(&e.midpoint())]);
    Ok(())
}

fn chung_erdos(cfg: &RunConfig, out: &mut Report) -> CliResult<()> {
    let psi = cfg.build_psi()?;
    let (x, y) = cfg.range()?;
    let ce = par::chung_erdos(&psi, x, y)?;
    out.table = Table::new(&["X", "Y", "lower_bound", "union_measure", "holds"]);
    out.table.push(vec![x.to_string(), y.to_string(), rat(&ce.lower_bound), rat(&ce.union_measure), bool_cell(ce.holds)]);
    Ok(())
}

fn collapse(cfg: &RunConfig, out: &mut Report) -> CliResult<()> {
    let psi = cfg.build_psi()?;
    let rep = correlation::overlap_collapse_report(&psi)?;
    out.table = Table::new(&["family", "sum_of_measures", "union_measure", "ratio"]);
    out.table.comment("sets E_q (all residues); ratio = union_measure / sum_of_measures");
    out.table.push(vec!["input".into(), rat(&rep.sum_of_measures), rat(&rep.union_measure), rat(&rep.ratio)]);
    if cfg.compare_primes {
        let support = psi.finite_support().unwrap_or_default();
        let mut weight = Rational::zero();
        for (q, v) in &support {
            weight += v * rational::frac(numtheory::totient(*q)? as i64, *q as i64);
        }
        let primes = correlation::equal_weight_prime_family(&weight)?;
        let cmp = correlation::overlap_collapse_report(&primes)?;
        out.table.comment(format!("equal-weight-primes: constant ψ on the first primes with ∑φ(q)ψ(q)/q = {}", rat(&weight)));
        out.table.push(vec![
            "equal-weight-primes".into(),
            rat(&cmp.sum_of_measures),
            rat(&cmp.union_measure),
            rat(&cmp.ratio),
        ]);
    }
    Ok(())
}

fn supports(cfg: &RunConfig) -> CliResult<(WeightedSupport, WeightedSupport)> {
    let psi = cfg.build_psi()?;
    let v = WeightedSupport::from_psi(&psi, cfg.squarefree)?;
    let w = match cfg.build_theta()? {
        Some(theta) => WeightedSupport::from_psi(&theta, cfg.squarefree)?,
        None => v.clone(),
    };
    Ok((v, w))
}

fn build_graph(cfg: &RunConfig) -> CliResult<GcdGraph> {
    let (v, w) = supports(cfg)?;
    let t = cfg.rat_arg(&cfg.t, "t")?;
    let c = cfg.rat_arg(&cfg.c_edge, "C")?;
    Ok(graph::build_edges(&v, &w, &t, &c)?)
}

fn enclosure_rows(table: &mut Table, name: &str, e: &Enclosure) {
    table.push(vec![format!("{name}_lo"), rat(e.lo())]);
    table.push(vec![format!("{name}_hi"), rat(e.hi())]);
}

fn graph_cmd(cfg: &RunConfig, out: &mut Report) -> CliResult<()> {
    let g = build_graph(cfg)?;
    let bits = cfg.precision_bits();
    let mut t = Table::new(&["quantity", "value"]);
    t.comment(format!("precision_bits={bits}; *_lo/*_hi rows enclose a real quantity"));
    t.push(vec!["V_size".into(), g.v().len().to_string()]);
    t.push(vec!["W_size".into(), g.w().len().to_string()]);
    t.push(vec!["edge_count".into(), g.edges().len().to_string()]);
    let em = g.edge_measure()?;
    t.push(vec!["edge_measure".into(), rat(&em)]);
    t.push(vec!["mu_V".into(), rat(&graph::mu(g.v(), None)?)]);
    t.push(vec!["mu_W".into(), rat(&graph::mu(g.w(), None)?)]);
    t.push(vec!["prime_count".into(), g.prime_set()?.len().to_string()]);
    if em.is_positive() && g.v().is_squarefree_flagged() && g.w().is_squarefree_flagged() {
        let sw = graph::structure_witness(&g)?;
        t.push(vec!["structure_N".into(), sw.n.to_string()]);
        t.push(vec!["structure_concentration".into(), rat(&sw.concentration)]);
    }
    if let Some(j) = cfg.j {
        let threshold = cfg.rat_arg(&cfg.threshold, "threshold")?;
        let r = graph::prop54_sum(g.v(), j, &threshold, bits)?;
        t.push(vec!["prop54_j".into(), r.j.to_string()]);
        t.push(vec!["prop54_threshold".into(), rat(&r.threshold)]);
        t.push(vec!["prop54_edge_count".into(), r.edge_count.to_string()]);
        t.push(vec!["prop54_sum".into(), rat(&r.sum)]);
        enclosure_rows(&mut t, "prop54_scaled", &r.scaled);
    }
    if let Some(eps) = &cfg.epsilon {
        let eps = format::parse_rat(eps, "epsilon")?;
        let m = graph::main_theorem_report(g.v(), g.w(), g.t(), g.c(), &eps, cfg.p0.unwrap_or(0), bits)?;
        t.push(vec!["main_exponent".into(), m.exponent.to_string()]);
        for (name, e) in [("main_ln_lhs", &m.ln_lhs), ("main_ln_rhs", &m.ln_rhs), ("main_ln_ratio", &m.ln_ratio)] {
            match e {
                Some(e) => enclosure_rows(&mut t, name, e),
                None => t.push(vec![name.into(), "undefined".into()]),
            }
        }
        let holds = match m.holds {
            Some(b) => bool_cell(b),
            None => "undecided".into(),
        };
        t.push(vec!["main_holds".into(), holds]);
    }
    let dump = format::graph_json(&g);
    if let Some(path) = &cfg.dump {
        let mut text = serde_json::to_string_pretty(&dump).expect("graph serializes");
        text.push('\n');
        out.files.push((path.clone(), text));
    }
    out.extra.push(json!({ "graph": dump }));
    out.table = t;
    Ok(())
}

fn compress(cfg: &RunConfig, out: &mut Report) -> CliResult<()> {
    let g = build_graph(cfg)?;
    let primes: Vec<u64> = match cfg.p {
        Some(p) => vec![p],
        None => g.prime_set()?.into_iter().collect(),
    };
    let blocks = |fixed: Option<u64>| -> CliResult<Vec<u64>> {
        match fixed {
            None => Ok(vec![0, 1]),
            Some(b @ (0 | 1)) => Ok(vec![b]),
            Some(b) => Err(CliError::usage(format!("block index must be 0 or 1, got {b}"))),
        }
    };
    let (is, js) = (blocks(cfg.i)?, blocks(cfg.j)?);
    let mut t = Table::new(&["p", "i", "j", "lhs_num/den", "rhs_num/den", "equal"]);
    t.comment("five rows per (p,i,j), in order: 1V, 1W (weight rescaling), 2 (edge measure), 3E (edges kept vs compressed edges), 3P (|P~| vs |P minus p|, reported only)");
    for p in primes {
        for &i in &is {
            for &j in &js {
                let c = graph::compress(&g, p, i, j)?;
                for (_, lhs, rhs, eq) in c.report.audit_rows() {
                    t.push(vec![p.to_string(), i.to_string(), j.to_string(), rat(&lhs), rat(&rhs), bool_cell(eq)]);
                }
            }
        }
    }
    out.table = t;
    Ok(())
}

fn anatomy(cfg: &RunConfig, out: &mut Report) -> CliResult<()> {
    let t = cfg.rat_arg(&cfg.t, "t")?;
    let c = cfg.rat_arg(&cfg.c, "c")?;
    if cfg.x.is_none() && cfg.m_arg.is_none() {
        return Err(CliError::usage("anatomy needs --x, --M or both"));
    }
    let mut table = Table::new(&["op", "arg", "t", "c", "value", "oracle", "equal"]);
    if let Some(x) = cfg.x {
        let v = graph::anatomy_count(x, &t, &c)?;
        let o = oracle::anatomy_count(x, &t, &c);
        table.push(vec!["unweighted".into(), x.to_string(), rat(&t), rat(&c), v.to_string(), o.to_string(), bool_cell(v == o)]);
    }
    if let Some(m) = cfg.m_arg {
        let v = graph::divisor_anatomy_sum(m, &t, &c)?;
        let o = oracle::divisor_anatomy_sum(m, &t, &c);
        table.push(vec!["divisor".into(), m.to_string(), rat(&t), rat(&c), v.to_string(), o.to_string(), bool_cell(v == o)]);
    }
    out.table = table;
    Ok(())
}

fn alphas(cfg: &RunConfig) -> CliResult<Vec<RealSample>> {
    let bits = cfg.precision_bits();
    let spec = cfg.alpha.as_deref().ok_or_else(|| CliError::usage("missing --alpha"))?;
    if spec == "random" {
        let count = cfg.count.unwrap_or(1);
        if count == 0 {
            return Err(CliError::usage("--count must be positive"));
        }
        let seed = cfg.seed.ok_or_else(|| CliError::usage("--alpha random needs --seed"))?;
        return Ok((0..count).map(|i| RealSample::seeded_random(seed, i, bits)).collect());
    }
    if cfg.count.is_some() {
        return Err(CliError::usage("--count applies to --alpha random only"));
    }
    Ok(vec![config::parse_alpha(spec)?.with_precision(bits)])
}

fn orbit_cmd(cfg: &RunConfig, out: &mut Report) -> CliResult<()> {
    let samples = alphas(cfg)?;
    let bits = cfg.precision_bits();
    if let Some(n) = cfg.cf {
        let mut t = Table::new(&["alpha_id", "k", "a_k", "p_k", "q_k"]);
        for a in &samples {
            let cf = orbit::continued_fraction(a, n)?;
            for (k, (ak, (p, q))) in cf.terms().iter().zip(cf.convergents()).enumerate() {
                t.push(vec![a.tag().to_string(), k.to_string(), ak.to_string(), p.to_string(), q.to_string()]);
            }
        }
        out.table = t;
        return Ok(());
    }
    let psi = cfg.build_psi()?;
    let q_max = cfg.q_max()?;
    let coprime = !cfg.all_residues;
    let reports = if samples.len() == 1 {
        vec![par::schmidt_ratio(&samples[0], &psi, q_max, coprime)?]
    } else {
        par::schmidt_many(&samples, &psi, q_max, coprime)?
    };
    let mut t = Table::new(&["alpha_id", "Q", "hits", "expected_num/den", "ratio"]);
    t.comment(format!(
        "seed={} precision_bits={bits} residues={}",
        cfg.seed.map_or("none".to_string(), |s| s.to_string()),
        if coprime { "coprime" } else { "all" }
    ));
    t.comment(format!(
        "expected is exact for Q <= {}, else the midpoint of an enclosure of width <= 2^-{bits} per term; ratio = hits/expected as a decimal truncated to {DECIMAL_DIGITS} digits",
        orbit::EXACT_SUM_LIMIT
    ));
    for (a, r) in samples.iter().zip(reports) {
        let expected = r.expected.exact.clone().unwrap_or_else(|| r.expected.enclosure.midpoint());
        t.push(vec![
            a.tag().to_string(),
            q_max.to_string(),
            r.hits.to_string(),
            rat(&expected),
            decimal(&r.ratio.midpoint()),
        ]);
    }
    out.table = t;
    Ok(())
}

fn montecarlo(cfg: &RunConfig, out: &mut Report) -> CliResult<()> {
    let psi = cfg.build_psi()?;
    let (x, y) = cfg.range()?;
    let samples = cfg.samples.ok_or_else(|| CliError::usage("missing --samples"))?;
    if samples == 0 {
        return Err(CliError::usage("--samples must be positive"));
    }
    let seed = cfg.seed.ok_or_else(|| CliError::usage("missing --seed"))?;
    let bits = cfg.precision_bits();
    let est = par::monte_carlo_union(&psi, x, y, samples, seed, bits)?;
    let mut t = Table::new(&["X", "Y", "samples", "seed", "hits", "estimate", "stderr"]);
    t.comment(format!("precision_bits={bits}; stderr is a binary64 decimal, 6 significant digits"));
    t.push(vec![
        x.to_string(),
        y.to_string(),
        samples.to_string(),
        seed.to_string(),
        est.hits.to_string(),
        rat(&est.estimate),
        format!("{:.5e}", est.stderr),
    ]);
    out.table = t;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(cmd: &str) -> RunConfig {
        RunConfig { command: cmd.into(), precision: Some(128), ..Default::default() }
    }

    fn rows(r: &Report) -> Vec<String> {
        r.table.rows.iter().map(|row| row.join(",")).collect()
    }

    #[test]
    fn measure_example() {
        let mut c = cfg("measure");
        c.q = Some(5);
        c.psi_const = Some("1/4".into());
        assert_eq!(rows(&execute(&c).unwrap()), vec!["5,2/5"]);
    }

    #[test]
    fn series_example_and_sweep() {
        let mut c = cfg("series");
        c.family = Some("khintchine".into());
        c.c = Some("1/2".into());
        c.s = Some("0".into());
        c.q_max = Some(3);
        assert_eq!(rows(&execute(&c).unwrap()), vec!["11/12,53/72"]);
        c.sweep = Some(2);
        assert_eq!(rows(&execute(&c).unwrap()), vec!["2,3/4,5/8", "3,11/12,53/72"]);
    }

    #[test]
    fn variance_example() {
        let mut c = cfg("variance");
        c.psi_const = Some("1/2".into());
        c.x_min = Some(2);
        c.y_max = Some(3);
        assert_eq!(rows(&execute(&c).unwrap()), vec!["2,3,7/6,13/6,78/49"]);
    }

    #[test]
    fn overlap_squarefree_filter() {
        let mut c = cfg("overlap");
        c.psi_const = Some("1/4".into());
        c.q = Some(4);
        c.r = Some(2);
        assert!(execute(&c).is_ok());
        c.squarefree = true;
        assert_eq!(execute(&c).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn empty_range_is_usage_error() {
        let mut c = cfg("variance");
        c.psi_const = Some("1/2".into());
        c.x_min = Some(9);
        c.y_max = Some(3);
        assert_eq!(execute(&c).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn domain_error_exit_one() {
        let mut c = cfg("variance");
        c.psi_const = Some("3/4".into());
        c.x_min = Some(2);
        c.y_max = Some(3);
        assert_eq!(execute(&c).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn replay_is_identical() {
        let mut c = cfg("orbit");
        c.alpha = Some("random".into());
        c.seed = Some(3);
        c.count = Some(2);
        c.family = Some("khintchine".into());
        c.c = Some("1/2".into());
        c.q_max = Some(500);
        let first = execute(&c).unwrap().render();
        let again = execute(&RunConfig::from_text(&first).unwrap()).unwrap().render();
        assert_eq!(first, again);
        c.format = Some("json".into());
        let j = execute(&c).unwrap().render();
        let again = execute(&RunConfig::from_text(&j).unwrap()).unwrap().render();
        assert_eq!(j, again);
    }

    #[test]
    fn continued_fraction_rows() {
        let mut c = cfg("orbit");
        c.alpha = Some("22/7".into());
        c.cf = Some(5);
        assert_eq!(rows(&execute(&c).unwrap()), vec!["22/7,0,3,3,1", "22/7,1,7,22,7"]);
    }

    #[test]
    fn anatomy_against_oracle() {
        let mut c = cfg("anatomy");
        c.t = Some("2".into());
        c.c = Some("1/2".into());
        c.x = Some(200);
        c.m_arg = Some(360);
        let r = execute(&c).unwrap();
        assert!(r.table.rows.iter().all(|row| row[6] == "true"));
    }

    #[test]
    fn compress_audit_rows() {
        let mut c = cfg("compress");
        c.psi = Some(json!({"kind": "explicit", "support": [[2, "1/6"], [3, "1/6"], [6, "1/3"]]}));
        c.squarefree = true;
        c.t = Some("1".into());
        c.c_edge = Some("0".into());
        c.p = Some(2);
        let r = execute(&c).unwrap();
        assert_eq!(r.table.rows.len(), 4 * 5);
        for block in r.table.rows.chunks(5) {
            assert!(block[..4].iter().all(|row| row[5] == "true"), "{block:?}");
        }
    }
}
