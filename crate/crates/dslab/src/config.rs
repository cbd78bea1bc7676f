//! Run configuration. JSON keys are the command-line flag names.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use dslab_core::approx;
use dslab_core::orbit::RealSample;
use dslab_core::ApproxFunction;

use crate::error::{CliError, CliResult};
use crate::format::{self, parse_rat};

/// Environment variable holding the default working precision in bits.
pub const PRECISION_ENV: &str = "DSLAB_PRECISION";

pub const COMMANDS: &[&str] = &[
    "series",
    "measure",
    "overlap",
    "variance",
    "gcdsum",
    "chung-erdos",
    "collapse",
    "graph",
    "compress",
    "anatomy",
    "orbit",
    "montecarlo",
];

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,

    /// Inline ψ in its JSON file format; the other ψ sources normalize to it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi_file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi_const: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q0: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restrict: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clamp: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_file: Option<PathBuf>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<u64>,
    #[serde(rename = "X", skip_serializing_if = "Option::is_none")]
    pub x_min: Option<u64>,
    #[serde(rename = "Y", skip_serializing_if = "Option::is_none")]
    pub y_max: Option<u64>,
    #[serde(rename = "Q", skip_serializing_if = "Option::is_none")]
    pub q_max: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<u64>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub all_residues: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<String>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub squarefree: bool,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<String>,
    #[serde(rename = "C", skip_serializing_if = "Option::is_none")]
    pub c_edge: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p0: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i: Option<u64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<u64>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub m_arg: Option<u64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cf: Option<usize>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub compare_primes: bool,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,

    /// Output paths never enter the embedded config, so a replay written
    /// elsewhere stays byte-identical.
    #[serde(default, skip_serializing)]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing)]
    pub intervals: Option<PathBuf>,
    #[serde(default, skip_serializing)]
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl RunConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Reads a config from a JSON config file, a JSON report envelope or a
    /// CSV report whose first line is `# config: {...}`.
    pub fn from_text(text: &str) -> CliResult<Self> {
        let trimmed = text.trim_start();
        let json = if let Some(rest) = trimmed.strip_prefix("# config: ") {
            rest.lines().next().unwrap_or("").to_string()
        } else {
            trimmed.to_string()
        };
        let v: Value =
            serde_json::from_str(&json).map_err(|e| CliError::usage(format!("config is not valid JSON: {e}")))?;
        let v = match v.get("config") {
            Some(inner) if v.get("results").is_some() => inner.clone(),
            _ => v,
        };
        serde_json::from_value(v).map_err(|e| CliError::usage(format!("invalid config: {e}")))
    }

    pub fn format(&self) -> CliResult<Format> {
        match self.format.as_deref() {
            None | Some("csv") => Ok(Format::Csv),
            Some("json") => Ok(Format::Json),
            Some(other) => Err(CliError::usage(format!("unknown format {other:?}; use csv or json"))),
        }
    }

    fn has_psi_source(&self) -> bool {
        self.psi.is_some() || self.psi_file.is_some() || self.psi_const.is_some() || self.family.is_some()
    }

    /// Resolves the working precision and inlines every ψ source, so the
    /// returned config reproduces the run on its own.
    pub fn normalize(&self) -> CliResult<RunConfig> {
        if !COMMANDS.contains(&self.command.as_str()) {
            return Err(CliError::usage(format!("unknown command {:?}", self.command)));
        }
        self.format()?;
        let mut cfg = self.clone();
        cfg.precision = Some(self.resolved_precision()?);
        if self.has_psi_source() {
            let psi = self.build_psi()?;
            cfg.psi = Some(format::psi_to_json(&psi));
            cfg.psi_file = None;
            cfg.psi_const = None;
            cfg.family = None;
            cfg.s = None;
            cfg.q0 = None;
            cfg.m = None;
            cfg.scale = None;
            cfg.beta = None;
            cfg.restrict = None;
            cfg.clamp = None;
            // `c` doubles as the anatomy threshold
            if cfg.command != "anatomy" {
                cfg.c = None;
            }
        }
        if let Some(path) = &self.theta_file {
            cfg.theta = Some(read_json(path)?);
            cfg.theta_file = None;
        }
        Ok(cfg)
    }

    fn resolved_precision(&self) -> CliResult<u32> {
        let bits = match self.precision {
            Some(b) => b,
            None => match std::env::var(PRECISION_ENV) {
                Ok(s) => s
                    .trim()
                    .parse()
                    .map_err(|_| CliError::usage(format!("{PRECISION_ENV} must be a positive integer, got {s:?}")))?,
                Err(_) => match self.command.as_str() {
                    "orbit" | "montecarlo" => dslab_core::orbit::DEFAULT_BITS,
                    _ => dslab_core::certified::DEFAULT_BITS,
                },
            },
        };
        if !(16..=1 << 16).contains(&bits) {
            return Err(CliError::usage(format!("precision must lie in [16, 65536] bits, got {bits}")));
        }
        Ok(bits)
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision.unwrap_or(dslab_core::certified::DEFAULT_BITS)
    }

    /// Builds ψ from exactly one source, then applies `restrict` and `clamp`.
    pub fn build_psi(&self) -> CliResult<ApproxFunction> {
        let sources = [self.psi.is_some(), self.psi_file.is_some(), self.psi_const.is_some(), self.family.is_some()];
        match sources.iter().filter(|b| **b).count() {
            0 => return Err(CliError::usage("no ψ given; use --psi-file, --psi-const or --family")),
            1 => {}
            _ => return Err(CliError::usage("give exactly one of --psi-file, --psi-const, --family")),
        }
        let bits = self.resolved_precision()?;
        let mut psi = if let Some(v) = &self.psi {
            format::psi_from_json(v)?
        } else if let Some(path) = &self.psi_file {
            format::psi_from_json(&read_json(path)?)?
        } else if let Some(c) = &self.psi_const {
            ApproxFunction::constant(parse_rat(c, "psi-const")?)?.with_precision(bits)
        } else {
            self.build_family(bits)?.with_precision(bits)
        };
        if let Some(set) = &self.restrict {
            psi = approx::restricted_denominators(format::parse_denominator_set(set)?, psi);
        }
        if let Some(cap) = &self.clamp {
            psi = psi.with_clamp(Some(parse_rat(cap, "clamp")?))?;
        }
        Ok(psi)
    }

    fn build_family(&self, bits: u32) -> CliResult<ApproxFunction> {
        let need = |o: &Option<String>, flag: &str| -> CliResult<dslab_core::Rational> {
            let s = o.as_ref().ok_or_else(|| CliError::usage(format!("family needs --{flag}")))?;
            parse_rat(s, flag)
        };
        let zero = || "0".to_string();
        match self.family.as_deref().unwrap_or_default() {
            "khintchine" => {
                let s = parse_rat(self.s.as_ref().unwrap_or(&zero()), "s")?;
                Ok(approx::khintchine_family(need(&self.c, "c")?, s)?)
            }
            "constant" => Ok(ApproxFunction::constant(need(&self.c, "c")?)?),
            "chain" => {
                let q0 = self.q0.ok_or_else(|| CliError::usage("chain family needs --q0"))?;
                let m = self.m.ok_or_else(|| CliError::usage("chain family needs --m"))?;
                Ok(approx::ds_chain_family(q0, m, need(&self.scale, "scale")?)?)
            }
            "multiplicative" => {
                let beta = parse_alpha(self.beta.as_deref().ok_or_else(|| CliError::usage("multiplicative family needs --beta"))?)?;
                let s = parse_rat(self.s.as_ref().unwrap_or(&zero()), "s")?;
                let theta = approx::khintchine_family(need(&self.c, "c")?, s)?.with_precision(bits);
                let top = self.q_max.or(self.y_max).ok_or_else(|| CliError::usage("multiplicative family needs --Q or --Y"))?;
                Ok(approx::multiplicative_psi(&beta, &theta, top, bits)?)
            }
            other => Err(CliError::usage(format!(
                "unknown family {other:?}; use khintchine, constant, chain or multiplicative"
            ))),
        }
    }

    pub fn build_theta(&self) -> CliResult<Option<ApproxFunction>> {
        match (&self.theta, &self.theta_file) {
            (Some(v), _) => format::psi_from_json(v).map(Some),
            (None, Some(path)) => format::psi_from_json(&read_json(path)?).map(Some),
            (None, None) => Ok(None),
        }
    }

    /// `[X, Y]` with `1 ≤ X ≤ Y`.
    pub fn range(&self) -> CliResult<(u64, u64)> {
        let x = self.x_min.ok_or_else(|| CliError::usage("missing --X"))?;
        let y = self.y_max.ok_or_else(|| CliError::usage("missing --Y"))?;
        if x == 0 || x > y {
            return Err(CliError::usage(format!("empty range [{x}, {y}]")));
        }
        Ok((x, y))
    }

    pub fn q_max(&self) -> CliResult<u64> {
        match self.q_max {
            Some(0) => Err(CliError::usage("empty range: --Q must be positive")),
            Some(q) => Ok(q),
            None => Err(CliError::usage("missing --Q")),
        }
    }

    pub fn rat_arg(&self, value: &Option<String>, flag: &str) -> CliResult<dslab_core::Rational> {
        let s = value.as_ref().ok_or_else(|| CliError::usage(format!("missing --{flag}")))?;
        parse_rat(s, flag)
    }
}

fn read_json(path: &PathBuf) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: invalid JSON: {e}", path.display())))
}

/// `golden`, `e`, `sqrt:D`, `num/den`; seeded random samples are built by
/// the caller from `seed` and `count`.
pub fn parse_alpha(s: &str) -> CliResult<RealSample> {
    match s {
        "golden" => Ok(RealSample::golden_ratio()),
        "e" => Ok(RealSample::euler()),
        _ => {
            if let Some(d) = s.strip_prefix("sqrt:") {
                let d: u64 = d.parse().map_err(|_| CliError::usage(format!("bad sqrt argument in {s:?}")))?;
                let r = (d as f64).sqrt() as u64;
                if (r.saturating_sub(1)..=r + 1).any(|k| k * k == d) {
                    return Err(CliError::usage(format!("sqrt:{d} is rational; pass it as num/den")));
                }
                return Ok(RealSample::sqrt(d));
            }
            Ok(RealSample::rational(parse_rat(s, "alpha")?))
        }
    }
}
