//! Command-line front end.
//!
//! Every subcommand reads one JSON chain file:
//!
//! ```json
//! {
//!   "states": ["a", "b"],
//!   "matrix": [[0.7, 0.4], [0.3, 0.6]],
//!   "initial": [0.5714285714285714, 0.42857142857142855],
//!   "generator": { "g": [[0.0, 0.0], [1.0, 1.0]], "h": [0.0, 0.0] },
//!   "second_chain": { "matrix": [[0.6, 0.3], [0.4, 0.7]], "initial": [0.5, 0.5] }
//! }
//! ```
//!
//! Matrices are column-stochastic: `matrix[i][j]` is the probability of
//! moving to `states[i]` from `states[j]`, so every column sums to one. In
//! the example, from `a` the chain stays in `a` with probability 0.7 and
//! moves to `b` with probability 0.3. `g[i][j]` is the increment collected
//! on that same move. `h` is optional. `second_chain` is only needed by `ht`.
//!
//! Failures print one line `error: <Code>: <message>` to stderr and exit
//! with status 1, or 2 when an enumeration budget is exceeded.

use std::collections::HashSet;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::chain::{classify, stationary, TransitionMatrix};
use crate::error::{Error, Result};
use crate::expfamily::{asymptotic_variance, GeneratorSpec, TiltedFamily};
use crate::oracle::{enumerate_family, exact_tail, sample, DEFAULT_BUDGET};
use crate::tail::{tail_bounds, Side, TailOptions};
use crate::testing::{build_ht, exact_beta, ht_bounds, Constraint, HTFamily};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorFile {
    pub g: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondChainFile {
    pub matrix: Vec<Vec<f64>>,
    pub initial: Vec<f64>,
}

/// On-disk description of a chain, its generator and an optional
/// alternative hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpecFile {
    pub states: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
    pub initial: Vec<f64>,
    pub generator: GeneratorFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_chain: Option<SecondChainFile>,
}

impl ChainSpecFile {
    pub fn parse(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("chain file: {e}")))?;
        spec.check_labels()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    fn check_labels(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for s in &self.states {
            if !seen.insert(s) {
                return Err(Error::InvalidInput(format!("duplicate state label {s:?}")));
            }
        }
        if self.states.len() != self.matrix.len() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.len(),
                got: self.states.len(),
            });
        }
        Ok(())
    }

    pub fn chain(&self) -> Result<TransitionMatrix> {
        TransitionMatrix::new(&self.matrix)
    }

    pub fn generator(&self) -> Result<GeneratorSpec> {
        GeneratorSpec::new(&self.generator.g, self.generator.h.clone(), "g")
    }

    pub fn family(&self) -> Result<TiltedFamily> {
        TiltedFamily::new(self.chain()?, self.generator()?, self.initial.clone())
    }

    pub fn ht(&self) -> Result<HTFamily> {
        let second = self
            .second_chain
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("chain file has no second_chain".into()))?;
        let w1 = TransitionMatrix::new(&second.matrix)?;
        build_ht(&self.chain()?, &self.initial, &w1, &second.initial)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "markov-bounds",
    version,
    about = "Finite-length tail and testing bounds for finite-state Markov chains"
)]
struct Cli {
    /// JSON chain file.
    #[arg(long, global = true, value_name = "FILE")]
    spec: Option<PathBuf>,

    /// Emit JSON instead of `key: value` lines.
    #[arg(long, global = true)]
    json: bool,

    /// Path-count cap for exact enumeration.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    budget: u128,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SideArg {
    Upper,
    Lower,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Self {
        match s {
            SideArg::Upper => Side::Upper,
            SideArg::Lower => Side::Lower,
        }
    }
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct HtConstraint {
    /// First-kind error exponent: P₁(S) ≤ e^{−nr}.
    #[arg(long)]
    r: Option<f64>,
    /// First-kind error level: P₁(S) ≤ ε.
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweepKind {
    Tail,
    Ht,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classification, stationary law and asymptotic variance.
    Inspect,
    /// Exact cumulant generating function and its bounds.
    Cgf { n: usize, theta: f64 },
    /// Tail bounds for the threshold `n·a`.
    Tail {
        n: usize,
        #[arg(allow_negative_numbers = true)]
        a: f64,
        #[arg(long, value_enum, default_value = "upper")]
        side: SideArg,
        /// Also enumerate the exact tail probability.
        #[arg(long)]
        with_oracle: bool,
        /// Coarser search grids.
        #[arg(long)]
        fast: bool,
    },
    /// Bounds on the optimal second-kind error.
    Ht {
        n: usize,
        #[command(flatten)]
        constraint: HtConstraint,
        /// Also compute the exact optimal test.
        #[arg(long)]
        with_oracle: bool,
        #[arg(long)]
        fast: bool,
    },
    /// Asymptotic variance and its finite-difference cross-check.
    Variance,
    /// Exact law of the additive functional by path enumeration.
    Oracle {
        n: usize,
        /// Print the atoms as CSV (`value,prob_w0`).
        #[arg(long)]
        csv: bool,
    },
    /// Seeded Monte Carlo summary.
    Mc {
        n: usize,
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-step thresholds for upper-tail frequencies.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        thresholds: Vec<f64>,
    },
    /// CSV of bounds over a grid of `n` and thresholds (`a` or `r`).
    Sweep {
        #[arg(value_enum)]
        kind: SweepKind,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// Thresholds `a` for `tail`, exponents `r` for `ht`.
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        x: Vec<f64>,
        #[arg(long, value_enum, default_value = "upper")]
        side: SideArg,
        #[arg(long)]
        with_oracle: bool,
    },
}

/// Ordered `key: value` output, rendered as text or JSON.
struct Report(Vec<(&'static str, Value)>);

fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::String(v.to_string())
    }
}

fn nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

fn text(v: &Value) -> String {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => format!("{f:.16e}"),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(text).collect::<Vec<_>>().join(" "),
        Value::Null => "none".into(),
        other => other.to_string(),
    }
}

impl Report {
    fn render(&self, as_json: bool, out: &mut dyn Write) -> std::io::Result<()> {
        if as_json {
            let obj: serde_json::Map<String, Value> =
                self.0.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
            writeln!(out, "{}", Value::Object(obj))
        } else {
            for (k, v) in &self.0 {
                writeln!(out, "{k}: {}", text(v))?;
            }
            Ok(())
        }
    }
}

fn opts(fast: bool) -> TailOptions {
    if fast {
        TailOptions::fast()
    } else {
        TailOptions::default()
    }
}

fn load(cli: &Cli) -> Result<ChainSpecFile> {
    let path = cli
        .spec
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("missing --spec FILE".into()))?;
    ChainSpecFile::load(path)
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let spec = load(cli)?;
    let io = |e: std::io::Error| Error::InvalidInput(format!("write failed: {e}"));
    let report = match &cli.command {
        Command::Inspect => {
            let w = spec.chain()?;
            let class = classify(&w);
            let mut r = vec![
                ("states", json!(spec.states)),
                ("irreducible", json!(class.irreducible)),
                ("ergodic", json!(class.ergodic)),
                ("period", json!(class.period)),
            ];
            if class.ergodic {
                r.push(("stationary", nums(&stationary(&w)?)));
                let gen = spec.generator()?;
                r.push(("asymptotic_variance", num(asymptotic_variance(&w, &gen)?)));
                let fam = TiltedFamily::new_allow_degenerate(w, gen, spec.initial.clone())?;
                r.push(("mean", num(fam.eta(0.0)?)));
                r.push(("degenerate", json!(fam.is_degenerate())));
            }
            Report(r)
        }
        Command::Cgf { n, theta } => {
            let fam = spec.family()?;
            let b = fam.cgf_bounds(*n, *theta)?;
            Report(vec![
                ("n", json!(n)),
                ("theta", num(*theta)),
                ("exact", num(fam.cgf_exact(*n, *theta)?)),
                ("lower", num(b.lower)),
                ("upper", num(b.upper)),
            ])
        }
        Command::Tail {
            n,
            a,
            side,
            with_oracle,
            fast,
        } => {
            let fam = spec.family()?;
            let side = Side::from(*side);
            let mut rep = tail_bounds(&fam, *n, *a, side, &opts(*fast))?;
            if *with_oracle {
                let dist = enumerate_family(&fam, *n, cli.budget)?;
                rep.exact_neg_log = Some(-exact_tail(&dist, *a, side).ln());
            }
            Report(vec![
                ("n", json!(rep.n)),
                ("a", num(rep.a)),
                ("side", json!(rep.side.to_string())),
                ("lower_bound_on_neg_log", num(rep.lower_bound_on_neg_log)),
                ("upper_bound_on_neg_log", num(rep.upper_bound_on_neg_log)),
                ("s_opt", num(rep.optimizer.s)),
                ("theta_opt", num(rep.optimizer.theta)),
                ("feasible", json!(rep.feasible)),
                ("exact_neg_log", rep.exact_neg_log.map_or(Value::Null, num)),
            ])
        }
        Command::Ht {
            n,
            constraint,
            with_oracle,
            fast,
        } => {
            let ht = spec.ht()?;
            let c = match (constraint.r, constraint.eps) {
                (Some(r), _) => Constraint::Exponent(r),
                (None, Some(e)) => Constraint::Level(e),
                (None, None) => unreachable!("clap enforces the group"),
            };
            let mut rep = ht_bounds(&ht, *n, c, &opts(*fast))?;
            if *with_oracle {
                let b = exact_beta(&ht, *n, c.level(*n), cli.budget, true)?;
                rep.exact_neg_log_beta = Some(-b.beta.ln());
            }
            Report(vec![
                ("n", json!(rep.n)),
                ("r", num(c.exponent(*n))),
                ("epsilon", num(c.level(*n))),
                ("lower_neg_log_beta", num(rep.lower_neg_log_beta)),
                ("upper_neg_log_beta", num(rep.upper_neg_log_beta)),
                ("s_opt", num(rep.optimizer.s)),
                ("theta_opt", num(rep.optimizer.theta)),
                ("feasible", json!(rep.feasible)),
                ("exact_neg_log_beta", rep.exact_neg_log_beta.map_or(Value::Null, num)),
            ])
        }
        Command::Variance => {
            let fam = spec.family()?;
            let v = asymptotic_variance(fam.base(), fam.generator())?;
            let fd = fam.fisher(0.0)?;
            Report(vec![
                ("asymptotic_variance", num(v)),
                ("finite_difference", num(fd)),
                ("relative_difference", num((v - fd).abs() / v.abs().max(f64::MIN_POSITIVE))),
            ])
        }
        Command::Oracle { n, csv } => {
            let fam = spec.family()?;
            let dist = enumerate_family(&fam, *n, cli.budget)?;
            if *csv {
                return dist.write_csv(out);
            }
            let mut r = vec![
                ("n", json!(n)),
                ("atoms", json!(dist.atoms.len())),
                ("total", num(dist.total_w0)),
                ("mean", num(dist.mean())),
                ("variance", num(dist.variance())),
            ];
            if cli.json {
                r.push((
                    "values",
                    nums(&dist.atoms.iter().map(|a| a.value).collect::<Vec<_>>()),
                ));
                r.push((
                    "probabilities",
                    nums(&dist.atoms.iter().map(|a| a.prob_w0).collect::<Vec<_>>()),
                ));
            }
            Report(r)
        }
        Command::Mc {
            n,
            count,
            seed,
            thresholds,
        } => {
            let fam = spec.family()?;
            let th: Vec<(f64, Side)> = thresholds.iter().map(|&a| (a, Side::Upper)).collect();
            let s = sample(&fam, *n, *count, *seed, &th)?;
            let freq: Vec<f64> = s.tail_estimates.iter().map(|t| t.frequency).collect();
            let lo: Vec<f64> = s.tail_estimates.iter().map(|t| t.interval.0).collect();
            let hi: Vec<f64> = s.tail_estimates.iter().map(|t| t.interval.1).collect();
            Report(vec![
                ("seed", json!(s.seed)),
                ("count", json!(s.count)),
                ("n", json!(s.n)),
                ("mean", num(s.mean)),
                ("variance", num(s.variance)),
                ("ks_vs_gaussian", num(s.ks_vs_gaussian)),
                ("thresholds", nums(thresholds)),
                ("frequencies", nums(&freq)),
                ("wilson_lower", nums(&lo)),
                ("wilson_upper", nums(&hi)),
            ])
        }
        Command::Sweep {
            kind,
            n,
            x,
            side,
            with_oracle,
        } => return sweep(&spec, cli.budget, *kind, n, x, (*side).into(), *with_oracle, out),
    };
    report.render(cli.json, out).map_err(io)
}

/// Column order of `sweep` output.
pub const SWEEP_COLUMNS: [&str; 8] = [
    "n",
    "r_or_a",
    "lower",
    "upper",
    "exact_if_available",
    "s_opt",
    "theta_opt",
    "feasible",
];

#[allow(clippy::too_many_arguments)]
fn sweep(
    spec: &ChainSpecFile,
    budget: u128,
    kind: SweepKind,
    ns: &[usize],
    xs: &[f64],
    side: Side,
    with_oracle: bool,
    out: &mut dyn Write,
) -> Result<()> {
    let csv_err = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(SWEEP_COLUMNS).map_err(csv_err)?;
    let opts = TailOptions::fast();
    let fam;
    let ht;
    match kind {
        SweepKind::Tail => {
            fam = Some(spec.family()?);
            ht = None;
        }
        SweepKind::Ht => {
            fam = None;
            ht = Some(spec.ht()?);
        }
    }
    for &n in ns {
        for &x in xs {
            let (lower, upper, opt, feasible, exact) = match (&fam, &ht) {
                (Some(fam), _) => {
                    let r = tail_bounds(fam, n, x, side, &opts)?;
                    let exact = if with_oracle {
                        match enumerate_family(fam, n, budget) {
                            Ok(d) => Some(-exact_tail(&d, x, side).ln()),
                            Err(Error::BudgetExceeded { .. }) => None,
                            Err(e) => return Err(e),
                        }
                    } else {
                        None
                    };
                    (r.lower_bound_on_neg_log, r.upper_bound_on_neg_log, r.optimizer, r.feasible, exact)
                }
                (_, Some(ht)) => {
                    let c = Constraint::Exponent(x);
                    let r = ht_bounds(ht, n, c, &opts)?;
                    let exact = if with_oracle {
                        match exact_beta(ht, n, c.level(n), budget, true) {
                            Ok(b) => Some(-b.beta.ln()),
                            Err(Error::BudgetExceeded { .. }) => None,
                            Err(e) => return Err(e),
                        }
                    } else {
                        None
                    };
                    (r.lower_neg_log_beta, r.upper_neg_log_beta, r.optimizer, r.feasible, exact)
                }
                _ => unreachable!(),
            };
            let cell = |v: f64| format!("{v:.16e}");
            wtr.write_record([
                n.to_string(),
                cell(x),
                cell(lower),
                cell(upper),
                exact.map(cell).unwrap_or_default(),
                cell(opt.s),
                cell(opt.theta),
                feasible.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    wtr.flush()
        .map_err(|e| Error::InvalidInput(format!("write failed: {e}")))
}

/// Runs the front end on `argv` (program name first), writing results to
/// `out` and diagnostics to `err`. Returns the process exit status.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let first = e.to_string();
            let line = first.lines().next().unwrap_or("invalid arguments");
            let line = line.trim_start_matches("error: ");
            let _ = writeln!(err, "error: Usage: {line}");
            return 1;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", e.code());
            match e {
                Error::BudgetExceeded { .. } => 2,
                _ => 1,
            }
        }
    }
}

/// [`run_with`] on the process's stdout and stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
