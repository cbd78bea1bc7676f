//! File formats: ψ as JSON, interval endpoints and reports as CSV, graph dumps.
//!
//! Every rational crosses the boundary as a `"num/den"` string.

use std::collections::BTreeSet;

use serde_json::{json, Map, Value};

use dslab_core::approx::{self, Kind};
use dslab_core::rational::{self, Rational};
use dslab_core::{ApproxFunction, DenominatorSet, Family, GcdGraph, TorusIntervalSet, WeightedSupport};

use crate::error::{CliError, CliResult};

pub fn rat(r: &Rational) -> String {
    rational::to_num_den(r)
}

pub fn parse_rat(s: &str, what: &str) -> CliResult<Rational> {
    rational::parse(s).map_err(|_| CliError::usage(format!("{what}: expected num/den, got {s:?}")))
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::usage(format!("ψ JSON: {}", msg.into()))
}

/// Serializes `ψ` as `{"kind", "support", "family", ...}`.
pub fn psi_to_json(psi: &ApproxFunction) -> Value {
    let (kind, support, family) = match psi.kind() {
        Kind::Explicit(map) => {
            let support: Vec<Value> = map.iter().map(|(q, v)| json!([q, rat(v)])).collect();
            ("explicit", support, Value::Null)
        }
        Kind::Family(f) => ("family", Vec::new(), family_to_json(f)),
    };
    let mut obj = Map::new();
    obj.insert("kind".into(), json!(kind));
    obj.insert("support".into(), Value::Array(support));
    obj.insert("family".into(), family);
    obj.insert("clamp".into(), psi.clamp().map(|c| json!(rat(c))).unwrap_or(Value::Null));
    obj.insert("standing_assumption".into(), json!(psi.standing_assumption()));
    obj.insert("precision_bits".into(), json!(psi.precision_bits()));
    Value::Object(obj)
}

fn family_to_json(f: &Family) -> Value {
    match f {
        Family::Constant { value } => json!({"name": "constant", "value": rat(value)}),
        Family::Khintchine { c, s } => json!({"name": "khintchine", "c": rat(c), "s": rat(s)}),
        Family::Restricted { set, theta } => json!({
            "name": "restricted",
            "set": set_to_json(set),
            "theta": psi_to_json(theta),
        }),
    }
}

fn set_to_json(set: &DenominatorSet) -> Value {
    match set {
        DenominatorSet::Primes => json!("primes"),
        DenominatorSet::Squarefree => json!("squarefree"),
        DenominatorSet::PowersOf(b) => json!({"powers_of": b}),
        DenominatorSet::List(l) => json!({"list": l}),
    }
}

fn str_field<'a>(v: &'a Value, key: &str) -> CliResult<&'a str> {
    v.get(key).and_then(Value::as_str).ok_or_else(|| bad(format!("missing string field {key:?}")))
}

fn rat_field(v: &Value, key: &str) -> CliResult<Rational> {
    parse_rat(str_field(v, key)?, key)
}

/// Inverse of [`psi_to_json`]. Only `kind` is mandatory besides the data
/// it selects; flags default to off and precision to 128 bits.
pub fn psi_from_json(v: &Value) -> CliResult<ApproxFunction> {
    let obj = v.as_object().ok_or_else(|| bad("expected an object"))?;
    for key in obj.keys() {
        if !matches!(
            key.as_str(),
            "kind" | "support" | "family" | "clamp" | "standing_assumption" | "precision_bits"
        ) {
            return Err(bad(format!("unknown field {key:?}")));
        }
    }
    let base = match str_field(v, "kind")? {
        "explicit" => {
            let rows = v.get("support").and_then(Value::as_array).ok_or_else(|| bad("explicit ψ needs support"))?;
            let mut pairs = Vec::with_capacity(rows.len());
            for row in rows {
                let q = row.get(0).and_then(Value::as_u64).ok_or_else(|| bad("support rows are [q, \"num/den\"]"))?;
                let val = row.get(1).and_then(Value::as_str).ok_or_else(|| bad("support rows are [q, \"num/den\"]"))?;
                pairs.push((q, parse_rat(val, "support value")?));
            }
            ApproxFunction::from_pairs(pairs).map_err(|e| bad(e.to_string()))?
        }
        "family" => family_from_json(v.get("family").ok_or_else(|| bad("family ψ needs family"))?)?,
        other => return Err(bad(format!("unknown kind {other:?}"))),
    };
    let mut psi = base;
    if let Some(bits) = v.get("precision_bits").filter(|b| !b.is_null()) {
        let bits = bits.as_u64().filter(|b| *b <= 1 << 16).ok_or_else(|| bad("precision_bits must be an integer"))?;
        psi = psi.with_precision(bits as u32);
    }
    if let Some(c) = v.get("clamp").filter(|c| !c.is_null()) {
        let c = c.as_str().ok_or_else(|| bad("clamp must be \"num/den\""))?;
        psi = psi.with_clamp(Some(parse_rat(c, "clamp")?)).map_err(|e| bad(e.to_string()))?;
    }
    if v.get("standing_assumption").and_then(Value::as_bool).unwrap_or(false) {
        psi = psi.with_standing_assumption(true).map_err(|e| bad(e.to_string()))?;
    }
    Ok(psi)
}

fn family_from_json(f: &Value) -> CliResult<ApproxFunction> {
    let out = match str_field(f, "name")? {
        "constant" => ApproxFunction::constant(rat_field(f, "value")?),
        "khintchine" => approx::khintchine_family(rat_field(f, "c")?, rat_field(f, "s")?),
        "restricted" => {
            let set = set_from_json(f.get("set").ok_or_else(|| bad("restricted family needs set"))?)?;
            let theta = psi_from_json(f.get("theta").ok_or_else(|| bad("restricted family needs theta"))?)?;
            Ok(approx::restricted_denominators(set, theta))
        }
        other => return Err(bad(format!("unknown family {other:?}"))),
    };
    out.map_err(|e| bad(e.to_string()))
}

fn set_from_json(v: &Value) -> CliResult<DenominatorSet> {
    match v {
        Value::String(s) if s == "primes" => Ok(DenominatorSet::Primes),
        Value::String(s) if s == "squarefree" => Ok(DenominatorSet::Squarefree),
        Value::Object(o) if o.contains_key("powers_of") => {
            let b = o["powers_of"].as_u64().ok_or_else(|| bad("powers_of must be an integer"))?;
            Ok(DenominatorSet::PowersOf(b))
        }
        Value::Object(o) if o.contains_key("list") => {
            let items = o["list"].as_array().ok_or_else(|| bad("list must be an array"))?;
            let mut set = BTreeSet::new();
            for x in items {
                set.insert(x.as_u64().ok_or_else(|| bad("list entries must be integers"))?);
            }
            Ok(DenominatorSet::List(set))
        }
        _ => Err(bad(format!("unknown denominator set {v}"))),
    }
}

/// Parses the command-line form of a denominator set:
/// `primes`, `squarefree`, `powers:B` or `list:a,b,c`.
pub fn parse_denominator_set(s: &str) -> CliResult<DenominatorSet> {
    let err = || CliError::usage(format!("restrict: expected primes|squarefree|powers:B|list:a,b,..., got {s:?}"));
    match s {
        "primes" => Ok(DenominatorSet::Primes),
        "squarefree" => Ok(DenominatorSet::Squarefree),
        _ => {
            if let Some(b) = s.strip_prefix("powers:") {
                return b.parse().map(DenominatorSet::PowersOf).map_err(|_| err());
            }
            if let Some(list) = s.strip_prefix("list:") {
                let set: Result<BTreeSet<u64>, _> = list.split(',').map(|x| x.trim().parse()).collect();
                return set.map(DenominatorSet::List).map_err(|_| err());
            }
            Err(err())
        }
    }
}

/// Interval endpoints, one `left_num,left_den,right_num,right_den` row each.
pub fn intervals_csv(set: &TorusIntervalSet) -> String {
    let mut out = String::from("left_num,left_den,right_num,right_den\n");
    for (l, r) in set.intervals() {
        out.push_str(&format!("{},{},{},{}\n", l.numer(), l.denom(), r.numer(), r.denom()));
    }
    out
}

pub fn parse_intervals_csv(text: &str) -> CliResult<TorusIntervalSet> {
    let mut raw = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (n == 0 && line.starts_with("left_num")) {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 4 {
            return Err(CliError::usage(format!("interval CSV line {}: expected 4 cells", n + 1)));
        }
        let l = parse_rat(&format!("{}/{}", cells[0], cells[1]), "left endpoint")?;
        let r = parse_rat(&format!("{}/{}", cells[2], cells[3]), "right endpoint")?;
        raw.push((l, r));
    }
    TorusIntervalSet::from_intervals(raw).map_err(CliError::from)
}

fn support_json(s: &WeightedSupport) -> Value {
    Value::Array(s.entries().iter().map(|(k, v)| json!([k, rat(v)])).collect())
}

/// `{"V", "W", "squarefree", "t", "C", "edges"}`.
pub fn graph_json(g: &GcdGraph) -> Value {
    let edges: Vec<Value> = g.edges().iter().map(|(a, b)| json!([a, b])).collect();
    json!({
        "V": support_json(g.v()),
        "W": support_json(g.w()),
        "squarefree": g.v().is_squarefree_flagged() && g.w().is_squarefree_flagged(),
        "t": rat(g.t()),
        "C": rat(g.c()),
        "edges": edges,
    })
}

/// A table rendered either as CSV or as an array of JSON objects.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { comments: Vec::new(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn comment(&mut self, line: impl Into<String>) {
        self.comments.push(line.into());
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json_rows(&self) -> Vec<Value> {
        self.rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for (k, v) in self.header.iter().zip(row) {
                    m.insert(k.clone(), json!(v));
                }
                Value::Object(m)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dslab_core::rational::frac;
    use dslab_core::torus::build_aq;

    #[test]
    fn psi_round_trip() {
        let cases = vec![
            ApproxFunction::from_pairs([(2, frac(1, 6)), (3, frac(1, 4))]).unwrap(),
            ApproxFunction::constant(frac(1, 4)).unwrap().with_precision(200),
            approx::khintchine_family(frac(1, 2), frac(1, 1)).unwrap(),
            approx::restricted_denominators(
                DenominatorSet::PowersOf(2),
                approx::khintchine_family(frac(1, 3), frac(0, 1)).unwrap(),
            ),
            approx::restricted_denominators(
                DenominatorSet::List([3, 5, 7].into_iter().collect()),
                ApproxFunction::constant(frac(1, 2)).unwrap().with_clamp(Some(frac(1, 3))).unwrap(),
            ),
        ];
        for psi in cases {
            let j = psi_to_json(&psi);
            let text = j.to_string();
            let back = psi_from_json(&serde_json::from_str(&text).unwrap()).unwrap();
            assert_eq!(back, psi, "{text}");
        }
    }

    #[test]
    fn psi_json_shape() {
        let psi = ApproxFunction::from_pairs([(5, frac(1, 4))]).unwrap();
        let j = psi_to_json(&psi);
        assert_eq!(j["kind"], "explicit");
        assert_eq!(j["support"], json!([[5, "1/4"]]));
        assert!(j["family"].is_null());
        let bad_key = json!({"kind": "explicit", "support": [], "extra": 1});
        assert!(psi_from_json(&bad_key).is_err());
        let bad_val = json!({"kind": "explicit", "support": [[2, "0.5"]]});
        assert!(psi_from_json(&bad_val).is_err());
    }

    #[test]
    fn interval_csv_round_trip() {
        let set = build_aq(4, &frac(1, 4), true, &frac(0, 1)).unwrap();
        let text = intervals_csv(&set);
        assert_eq!(text, "left_num,left_den,right_num,right_den\n3,16,5,16\n11,16,13,16\n");
        assert_eq!(parse_intervals_csv(&text).unwrap(), set);
    }

    #[test]
    fn denominator_set_flags() {
        assert_eq!(parse_denominator_set("powers:3").unwrap(), DenominatorSet::PowersOf(3));
        assert_eq!(
            parse_denominator_set("list:2,3").unwrap(),
            DenominatorSet::List([2, 3].into_iter().collect())
        );
        assert!(parse_denominator_set("odd").is_err());
    }

    #[test]
    fn table_renders() {
        let mut t = Table::new(&["q", "measure"]);
        t.comment("seed=1");
        t.push(vec!["5".into(), "2/5".into()]);
        assert_eq!(t.to_csv(), "# seed=1\nq,measure\n5,2/5\n");
        assert_eq!(t.to_json_rows()[0]["measure"], "2/5");
    }
}
