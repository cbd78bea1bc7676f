use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dslab::config::RunConfig;
use dslab::{execute, CliError, CliResult};

/// Exact-arithmetic experiments in metric Diophantine approximation.
///
/// Rationals are written num/den everywhere. Reports start with a
/// `# config:` line (CSV) or a "config" field (JSON); pass the report back
/// with --config to regenerate it.
#[derive(Parser, Debug)]
#[command(name = "dslab", version, after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Replay a config file, JSON report or CSV report
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Write the report here instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    /// Report format
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,

    /// Cap on worker threads; output does not depend on it
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Working precision in bits
    #[arg(long, global = true)]
    precision: Option<u32>,
}

const AFTER_HELP: &str = "Exit status: 0 on success, 1 for computational errors, 2 for usage errors. \
Errors are written to stderr as one JSON record. The default precision comes from DSLAB_PRECISION when set.";

/// ψ sources: exactly one of --psi-file, --psi-const, --family.
#[derive(Args, Debug, Default)]
struct PsiArgs {
    /// ψ in its JSON file format
    #[arg(long, value_name = "PATH")]
    psi_file: Option<PathBuf>,
    /// Constant ψ
    #[arg(long, value_name = "R")]
    psi_const: Option<String>,
    /// Formula family
    #[arg(long, value_parser = ["khintchine", "constant", "chain", "multiplicative"])]
    family: Option<String>,
    /// Coefficient c of the khintchine, constant and multiplicative families
    #[arg(long, value_name = "R")]
    c: Option<String>,
    /// Log exponent s of the khintchine family (default 0)
    #[arg(long, value_name = "R")]
    s: Option<String>,
    /// Base q0 of the chain family
    #[arg(long)]
    q0: Option<u64>,
    /// Length m of the chain family
    #[arg(long)]
    m: Option<u64>,
    /// Scale of the chain family, in (0, 1/2]
    #[arg(long, value_name = "R")]
    scale: Option<String>,
    /// β of the multiplicative family: golden, e, sqrt:D or num/den
    #[arg(long)]
    beta: Option<String>,
    /// Keep only q in primes, squarefree, powers:B or list:a,b,...
    #[arg(long, value_name = "SET")]
    restrict: Option<String>,
    /// Cap ψ at this value
    #[arg(long, value_name = "R")]
    clamp: Option<String>,
}

#[derive(Args, Debug, Default)]
struct RangeArgs {
    /// Lower end of the range of q
    #[arg(long = "X")]
    x_min: Option<u64>,
    /// Upper end of the range of q
    #[arg(long = "Y")]
    y_max: Option<u64>,
}

#[derive(Args, Debug, Default)]
struct GraphArgs {
    /// Weights on the right-hand vertex set (default: the ψ weights)
    #[arg(long, value_name = "PATH")]
    theta_file: Option<PathBuf>,
    /// Require square-free supports
    #[arg(long)]
    squarefree: bool,
    /// Prime threshold t
    #[arg(long, value_name = "R")]
    t: Option<String>,
    /// Edge constant C
    #[arg(long = "C", value_name = "R")]
    c_edge: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Partial sums of ψ(q) and φ(q)ψ(q)/q up to Q
    Series {
        #[command(flatten)]
        psi: PsiArgs,
        /// Largest denominator
        #[arg(long = "Q")]
        q_max: Option<u64>,
        /// Emit a row every K denominators
        #[arg(long, value_name = "K")]
        sweep: Option<u64>,
    },
    /// Measure of A_q (or E_q) for one q or a range
    Measure {
        #[command(flatten)]
        psi: PsiArgs,
        /// Single denominator (otherwise the range [X, Y])
        #[arg(long)]
        q: Option<u64>,
        #[command(flatten)]
        range: RangeArgs,
        /// Use all residues (E_q) instead of coprime ones (A_q)
        #[arg(long)]
        all_residues: bool,
        /// Inhomogeneous shift in [0, 1)
        #[arg(long, value_name = "R")]
        gamma: Option<String>,
        /// Write interval endpoints of the single set as CSV
        #[arg(long, value_name = "PATH")]
        intervals: Option<PathBuf>,
    },
    /// Exact overlaps against the product bound, for one pair or all q < r in [X, Y]
    Overlap {
        #[command(flatten)]
        psi: PsiArgs,
        #[arg(long)]
        q: Option<u64>,
        #[arg(long)]
        r: Option<u64>,
        #[command(flatten)]
        range: RangeArgs,
        /// Reject (single pair) or skip (grid) non-square-free denominators
        #[arg(long)]
        squarefree: bool,
    },
    /// Double overlap sum and quasi-independence ratio over [X, Y]
    Variance {
        #[command(flatten)]
        psi: PsiArgs,
        #[command(flatten)]
        range: RangeArgs,
        /// Use all residues (E_q) instead of coprime ones (A_q)
        #[arg(long)]
        all_residues: bool,
    },
    /// Weighted GCD sum up to Q, as a certified enclosure
    Gcdsum {
        #[command(flatten)]
        psi: PsiArgs,
        /// Largest denominator
        #[arg(long = "Q")]
        q_max: Option<u64>,
    },
    /// Union measure against the second-moment lower bound over [X, Y]
    #[command(name = "chung-erdos")]
    ChungErdos {
        #[command(flatten)]
        psi: PsiArgs,
        #[command(flatten)]
        range: RangeArgs,
    },
    /// Union measure over sum of measures for a finitely supported ψ
    Collapse {
        #[command(flatten)]
        psi: PsiArgs,
        /// Add the constant-ψ prime family of equal weight
        #[arg(long)]
        compare_primes: bool,
    },
    /// Edge set, measures and diagnostic bounds of a GCD graph
    Graph {
        #[command(flatten)]
        psi: PsiArgs,
        #[command(flatten)]
        graph: GraphArgs,
        /// Level j for the sum over E_{e^j}
        #[arg(long)]
        j: Option<u64>,
        /// Prime-harmonic threshold used with --j
        #[arg(long, value_name = "R")]
        threshold: Option<String>,
        /// ε in (0, 2/5] for the edge-measure bound
        #[arg(long, value_name = "R")]
        epsilon: Option<String>,
        /// Small-prime cutoff p0 used with --epsilon
        #[arg(long)]
        p0: Option<u64>,
        /// Write the graph as JSON
        #[arg(long, value_name = "PATH")]
        dump: Option<PathBuf>,
    },
    /// Audit of the prime-compression identities
    Compress {
        #[command(flatten)]
        psi: PsiArgs,
        #[command(flatten)]
        graph: GraphArgs,
        /// Prime to remove (default: every prime of the graph)
        #[arg(long)]
        p: Option<u64>,
        /// Left block index, 0 or 1 (default: both)
        #[arg(long)]
        i: Option<u64>,
        /// Right block index, 0 or 1 (default: both)
        #[arg(long)]
        j: Option<u64>,
    },
    /// Anatomy counts against brute force
    Anatomy {
        /// Count n ≤ x
        #[arg(long)]
        x: Option<u64>,
        /// Divisor sum at M
        #[arg(long = "M")]
        m_arg: Option<u64>,
        /// Prime threshold t
        #[arg(long, value_name = "R")]
        t: Option<String>,
        /// Harmonic threshold c
        #[arg(long, value_name = "R")]
        c: Option<String>,
    },
    /// Continued fractions, hitting counts and Schmidt ratios
    Orbit {
        #[command(flatten)]
        psi: PsiArgs,
        /// golden, e, sqrt:D, num/den or random
        #[arg(long)]
        alpha: Option<String>,
        /// Number of random samples
        #[arg(long)]
        count: Option<u64>,
        /// Seed of the random samples
        #[arg(long)]
        seed: Option<u64>,
        /// Largest denominator
        #[arg(long = "Q")]
        q_max: Option<u64>,
        /// Print N partial quotients instead of hitting counts
        #[arg(long, value_name = "N")]
        cf: Option<usize>,
        /// Count hits in E_q instead of A_q
        #[arg(long)]
        all_residues: bool,
    },
    /// Monte Carlo estimate of the union measure over [X, Y]
    Montecarlo {
        #[command(flatten)]
        psi: PsiArgs,
        #[command(flatten)]
        range: RangeArgs,
        /// Number of uniform samples
        #[arg(long)]
        samples: Option<u64>,
        /// Seed of the sample stream
        #[arg(long)]
        seed: Option<u64>,
    },
}

impl PsiArgs {
    fn apply(self, cfg: &mut RunConfig) {
        cfg.psi_file = self.psi_file;
        cfg.psi_const = self.psi_const;
        cfg.family = self.family;
        cfg.c = self.c;
        cfg.s = self.s;
        cfg.q0 = self.q0;
        cfg.m = self.m;
        cfg.scale = self.scale;
        cfg.beta = self.beta;
        cfg.restrict = self.restrict;
        cfg.clamp = self.clamp;
    }
}

impl RangeArgs {
    fn apply(self, cfg: &mut RunConfig) {
        cfg.x_min = self.x_min;
        cfg.y_max = self.y_max;
    }
}

impl GraphArgs {
    fn apply(self, cfg: &mut RunConfig) {
        cfg.theta_file = self.theta_file;
        cfg.squarefree = self.squarefree;
        cfg.t = self.t;
        cfg.c_edge = self.c_edge;
    }
}

fn to_config(cmd: Command) -> RunConfig {
    let mut cfg = RunConfig::default();
    match cmd {
        Command::Series { psi, q_max, sweep } => {
            cfg.command = "series".into();
            psi.apply(&mut cfg);
            cfg.q_max = q_max;
            cfg.sweep = sweep;
        }
        Command::Measure { psi, q, range, all_residues, gamma, intervals } => {
            cfg.command = "measure".into();
            psi.apply(&mut cfg);
            range.apply(&mut cfg);
            cfg.q = q;
            cfg.all_residues = all_residues;
            cfg.gamma = gamma;
            cfg.intervals = intervals;
        }
        Command::Overlap { psi, q, r, range, squarefree } => {
            cfg.command = "overlap".into();
            psi.apply(&mut cfg);
            range.apply(&mut cfg);
            cfg.q = q;
            cfg.r = r;
            cfg.squarefree = squarefree;
        }
        Command::Variance { psi, range, all_residues } => {
            cfg.command = "variance".into();
            psi.apply(&mut cfg);
            range.apply(&mut cfg);
            cfg.all_residues = all_residues;
        }
        Command::Gcdsum { psi, q_max } => {
            cfg.command = "gcdsum".into();
            psi.apply(&mut cfg);
            cfg.q_max = q_max;
        }
        Command::ChungErdos { psi, range } => {
            cfg.command = "chung-erdos".into();
            psi.apply(&mut cfg);
            range.apply(&mut cfg);
        }
        Command::Collapse { psi, compare_primes } => {
            cfg.command = "collapse".into();
            psi.apply(&mut cfg);
            cfg.compare_primes = compare_primes;
        }
        Command::Graph { psi, graph, j, threshold, epsilon, p0, dump } => {
            cfg.command = "graph".into();
            psi.apply(&mut cfg);
            graph.apply(&mut cfg);
            cfg.j = j;
            cfg.threshold = threshold;
            cfg.epsilon = epsilon;
            cfg.p0 = p0;
            cfg.dump = dump;
        }
        Command::Compress { psi, graph, p, i, j } => {
            cfg.command = "compress".into();
            psi.apply(&mut cfg);
            graph.apply(&mut cfg);
            cfg.p = p;
            cfg.i = i;
            cfg.j = j;
        }
        Command::Anatomy { x, m_arg, t, c } => {
            cfg.command = "anatomy".into();
            cfg.x = x;
            cfg.m_arg = m_arg;
            cfg.t = t;
            cfg.c = c;
        }
        Command::Orbit { psi, alpha, count, seed, q_max, cf, all_residues } => {
            cfg.command = "orbit".into();
            psi.apply(&mut cfg);
            cfg.alpha = alpha;
            cfg.count = count;
            cfg.seed = seed;
            cfg.q_max = q_max;
            cfg.cf = cf;
            cfg.all_residues = all_residues;
        }
        Command::Montecarlo { psi, range, samples, seed } => {
            cfg.command = "montecarlo".into();
            psi.apply(&mut cfg);
            range.apply(&mut cfg);
            cfg.samples = samples;
            cfg.seed = seed;
        }
    }
    cfg
}

fn write_file(path: &PathBuf, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::usage("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::usage(format!("thread pool: {e}")))?;
    }
    let mut cfg = match (cli.config, cli.command) {
        (Some(_), Some(_)) => return Err(CliError::usage("give either --config or a subcommand, not both")),
        (None, None) => return Err(CliError::usage("no subcommand given; see --help")),
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
            RunConfig::from_text(&text)?
        }
        (None, Some(cmd)) => to_config(cmd),
    };
    if cli.format.is_some() {
        cfg.format = cli.format;
    }
    if cli.precision.is_some() {
        cfg.precision = cli.precision;
    }
    if cli.output.is_some() {
        cfg.output = cli.output;
    }
    let report = execute(&cfg)?;
    for (path, text) in &report.files {
        write_file(path, text)?;
    }
    let text = report.render();
    match &cfg.output {
        Some(path) => write_file(path, &text),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(format!("stdout: {e}"))),
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.record());
    ExitCode::from(e.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let msg = e.render().to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            return fail(&CliError::usage(first.to_string()));
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
