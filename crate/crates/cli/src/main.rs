mod output;

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use linkops::analysis::{converge_table, default_grid, grid_points, run_suite, ClosedForms, VerificationReport};
use linkops::basis::{squared_sum_bound, squared_sum_integral, squared_sum_series, tsallis_entropy};
use linkops::operators::{evaluate, evaluate_at, monomial_images};
use linkops::{BasisParams, Error, FunctionSpec, Interval, OperatorConfig, OperatorKind, Rho, Tolerances};

use output::{json, num, Csv};

#[derive(Parser)]
#[command(name = "linkops", version)]
#[command(about = "Evaluate and verify linking Baskakov-Durrmeyer type operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate an operator applied to a function on a grid
    Eval(EvalArgs),
    /// Closed-form and numeric images of e_0, e_1, e_2
    Moments(MomentsArgs),
    /// Run a verification suite and emit a JSON report
    Verify(VerifyArgs),
    /// Squared basis sums and their bounds
    Entropy(EntropyArgs),
    /// Distance to the rho = inf operator for a list of rho
    Converge(ConvergeArgs),
}

#[derive(Args, Clone)]
struct CfgArgs {
    #[arg(long, allow_hyphen_values = true)]
    c: f64,
    #[arg(long)]
    n: f64,
    /// Linking parameter; `inf` selects the limit operator
    #[arg(long, default_value = "1")]
    rho: Rho,
    #[arg(long, default_value_t = 0)]
    k: u32,
}

impl CfgArgs {
    fn config(&self) -> Result<OperatorConfig, Failure> {
        Ok(OperatorConfig::new(self.c, self.n, self.rho, self.k)?)
    }
}

#[derive(Args, Clone)]
struct Common {
    /// Grid `start:end:count`; defaults to 11 points on [0, 1] ∩ domain
    #[arg(long)]
    grid: Option<Grid>,
    /// `quad_rel` or `quad_rel,series_tail,check_slack`
    #[arg(long)]
    tol: Option<TolArg>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write to this file instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn tolerances(&self) -> Tolerances {
        self.tol.map_or_else(Tolerances::default, |t| t.0)
    }

    fn points(&self, domain: Interval) -> Result<Vec<f64>, Failure> {
        let xs = match self.grid {
            Some(g) => g.points()?,
            None => default_grid(domain),
        };
        if let Some(x) = xs.iter().find(|&&x| !domain.contains(x)) {
            return Err(Error::Domain(format!("grid point {x} outside [{}, {}]", domain.lower(), domain.upper())).into());
        }
        Ok(xs)
    }
}

#[derive(Args)]
struct FnArgs {
    /// Catalog entry such as `monomial(2)` or an expression in `t`
    #[arg(long = "f")]
    f: String,
    /// Declared sup |f''|
    #[arg(long)]
    d2sup: Option<f64>,
}

impl FnArgs {
    fn spec(&self, domain: Interval) -> Result<FunctionSpec, Failure> {
        let f = FunctionSpec::from_source(&self.f, domain)?;
        Ok(match self.d2sup {
            Some(d) if d >= 0.0 && d.is_finite() => f.with_d2_sup(d),
            Some(d) => return Err(Error::Config(format!("--d2sup must be finite and non-negative, got {d}")).into()),
            None => f,
        })
    }
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    cfg: CfgArgs,
    #[arg(long, default_value = "V_normalized")]
    kind: OperatorKind,
    #[command(flatten)]
    f: FnArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct MomentsArgs {
    #[command(flatten)]
    cfg: CfgArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite id or `all`
    suite: String,
    /// File of `c n rho k` lines; defaults to the built-in config grid
    #[arg(long, conflicts_with = "c")]
    params: Option<PathBuf>,
    /// Verify a single config instead of a grid (requires --n)
    #[arg(long, allow_hyphen_values = true, requires = "n")]
    c: Option<f64>,
    #[arg(long)]
    n: Option<f64>,
    #[arg(long, default_value = "1")]
    rho: Rho,
    #[arg(long, default_value_t = 0)]
    k: u32,
    #[arg(long)]
    tol: Option<TolArg>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Perturb the closed forms; used to check the harness catches errors
    #[arg(long, hide = true)]
    mutate: bool,
}

#[derive(Args)]
struct EntropyArgs {
    #[arg(long, allow_hyphen_values = true)]
    c: f64,
    #[arg(long)]
    n: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ConvergeArgs {
    #[arg(long, allow_hyphen_values = true)]
    c: f64,
    #[arg(long)]
    n: f64,
    #[arg(long, default_value_t = 0)]
    k: u32,
    /// Comma-separated finite rho values
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,64,128,256")]
    rhos: Vec<f64>,
    #[command(flatten)]
    f: FnArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy)]
struct Grid {
    start: f64,
    end: f64,
    count: usize,
}

impl Grid {
    fn points(&self) -> Result<Vec<f64>, Error> {
        grid_points(self.start, self.end, self.count)
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, end, count] = parts[..] else {
            return Err(format!("expected start:end:count, got `{s}`"));
        };
        let start: f64 = start.trim().parse().map_err(|_| format!("bad grid start `{start}`"))?;
        let end: f64 = end.trim().parse().map_err(|_| format!("bad grid end `{end}`"))?;
        let count: usize = count.trim().parse().map_err(|_| format!("bad grid count `{count}`"))?;
        let grid = Grid { start, end, count };
        grid.points().map_err(|e| e.to_string())?;
        Ok(grid)
    }
}

#[derive(Debug, Clone, Copy)]
struct TolArg(Tolerances);

impl FromStr for TolArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let values = s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad tolerance `{p}`")))
            .collect::<Result<Vec<_>, _>>()?;
        let d = Tolerances::default();
        let tol = match values[..] {
            [q] => Tolerances::new(q, d.series_tail, d.check_slack),
            [q, s, c] => Tolerances::new(q, s, c),
            _ => return Err(format!("expected 1 or 3 comma-separated values, got `{s}`")),
        };
        tol.map(TolArg).map_err(|e| e.to_string())
    }
}

/// A message plus the process exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn config(msg: impl Into<String>) -> Self {
        Self { code: 2, msg: msg.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            code: if e.is_config() { 2 } else { 3 },
            msg: e.to_string(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure {
            code: 3,
            msg: format!("cannot write {}: {e}", path.display()),
        }),
        None => {
            let mut stdout = io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()) {
                Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Failure {
                    code: 3,
                    msg: format!("cannot write to standard output: {e}"),
                }),
                _ => Ok(()),
            }
        }
    }
}

/// Batch evaluation; on a numeric failure, re-runs point by point to name the
/// failing x.
fn eval_points(kind: OperatorKind, cfg: &OperatorConfig, f: &FunctionSpec, xs: &[f64], tol: &Tolerances) -> Result<Vec<f64>, Failure> {
    match evaluate(kind, cfg, f, xs, tol) {
        Ok(v) => Ok(v),
        Err(e) if e.is_config() => Err(e.into()),
        Err(e) => {
            for &x in xs {
                if let Err(e) = evaluate_at(kind, cfg, f, x, tol) {
                    return Err(Failure {
                        code: 3,
                        msg: format!("{kind} at {cfg}, f={}, x={}: {e}", f.source(), num(x)),
                    });
                }
            }
            Err(e.into())
        }
    }
}

#[derive(Serialize)]
struct EvalBody<'a> {
    config: OperatorConfig,
    kind: OperatorKind,
    f: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    d2_sup: Option<f64>,
    tol: Tolerances,
    rows: Vec<XValue>,
}

#[derive(Serialize)]
struct XValue {
    x: f64,
    value: f64,
}

fn cmd_eval(a: &EvalArgs) -> Result<u8, Failure> {
    let cfg = a.cfg.config()?;
    a.kind.check(&cfg)?;
    let tol = a.common.tolerances();
    let xs = a.common.points(cfg.domain())?;
    let f = a.f.spec(cfg.domain())?;
    let values = eval_points(a.kind, &cfg, &f, &xs, &tol)?;
    let text = match a.common.format {
        Format::Csv => {
            let mut csv = Csv::new(&["x", "value"]);
            for (x, v) in xs.iter().zip(&values) {
                csv.nums(&[*x, *v]);
            }
            csv.finish()
        }
        Format::Json => json(
            "eval",
            &EvalBody {
                config: cfg,
                kind: a.kind,
                f: f.source(),
                d2_sup: f.d2_sup(),
                tol,
                rows: xs.iter().zip(values).map(|(&x, value)| XValue { x, value }).collect(),
            },
        ),
    };
    emit(a.common.out.as_deref(), &text)?;
    Ok(0)
}

fn cmd_moments(a: &MomentsArgs) -> Result<u8, Failure> {
    let cfg = a.cfg.config()?;
    let tol = a.common.tolerances();
    let xs = a.common.points(cfg.domain())?;
    let report = monomial_images(&cfg, &xs, &tol)?;
    let text = match a.common.format {
        Format::Csv => {
            let mut csv = Csv::new(&[
                "x", "e0_closed", "e0_numeric", "e0_residual", "e1_closed", "e1_numeric", "e1_residual", "e2_closed",
                "e2_numeric", "e2_residual",
            ]);
            for r in &report.rows {
                let mut cells = vec![r.x];
                for m in 0..3 {
                    cells.extend([r.closed[m], r.numeric[m], r.residual[m]]);
                }
                csv.nums(&cells);
            }
            csv.finish()
        }
        Format::Json => json("moments", &report),
    };
    emit(a.common.out.as_deref(), &text)?;
    Ok(0)
}

/// Parses `c n rho k` lines; blank lines and `#` comments are skipped.
fn parse_params(text: &str) -> Result<Vec<OperatorConfig>, Failure> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| Failure::config(format!("params line {}: {msg}", i + 1));
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [c, n, rho, k] = fields[..] else {
            return Err(bad(format!("expected `c n rho k`, got `{line}`")));
        };
        let c: f64 = c.parse().map_err(|_| bad(format!("bad c `{c}`")))?;
        let n: f64 = n.parse().map_err(|_| bad(format!("bad n `{n}`")))?;
        let rho: Rho = rho.parse().map_err(|e: Error| bad(e.to_string()))?;
        let k: u32 = k.parse().map_err(|_| bad(format!("bad k `{k}`")))?;
        out.push(OperatorConfig::new(c, n, rho, k).map_err(|e| bad(e.to_string()))?);
    }
    if out.is_empty() {
        return Err(Failure::config("params file lists no configs"));
    }
    Ok(out)
}

fn report_csv(report: &VerificationReport) -> String {
    let mut csv = Csv::new(&["label", "config", "x", "j", "relation", "lhs", "rhs", "slack", "outcome"]);
    for case in &report.cases {
        csv.row([
            case.label.clone(),
            case.cfg.map(|c| c.to_string()).unwrap_or_default(),
            case.x.map(num).unwrap_or_default(),
            case.j.map(|j| j.to_string()).unwrap_or_default(),
            serde_json::to_value(case.relation).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
            num(case.lhs),
            num(case.rhs),
            num(case.slack),
            serde_json::to_value(case.outcome).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
        ]);
    }
    csv.finish()
}

fn cmd_verify(a: &VerifyArgs) -> Result<u8, Failure> {
    let configs = match (&a.params, a.c, a.n) {
        (Some(path), _, _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
            parse_params(&text)?
        }
        (None, Some(c), Some(n)) => vec![OperatorConfig::new(c, n, a.rho, a.k)?],
        _ => Vec::new(),
    };
    let tol = a.tol.map_or_else(Tolerances::default, |t| t.0);
    let closed = if a.mutate { ClosedForms::corrupted() } else { ClosedForms::default() };
    let report = run_suite(&a.suite, &configs, &tol, &closed)?;
    let text = match a.format {
        Format::Json => json("verify", &report),
        Format::Csv => report_csv(&report),
    };
    emit(a.out.as_deref(), &text)?;
    eprintln!(
        "verify {}: {} passed, {} failed, {} inconclusive",
        report.suite, report.passed, report.failed, report.inconclusive
    );
    for case in report.failures().take(5) {
        eprintln!("  FAIL {}: lhs={} rhs={}", case.label, num(case.lhs), num(case.rhs));
    }
    Ok(if report.overall { 0 } else { 1 })
}

#[derive(Serialize)]
struct EntropyRow {
    x: f64,
    s_series: f64,
    s_integral: f64,
    s_bound: f64,
    tsallis: f64,
}

#[derive(Serialize)]
struct EntropyBody {
    c: f64,
    n: f64,
    rows: Vec<EntropyRow>,
}

fn cmd_entropy(a: &EntropyArgs) -> Result<u8, Failure> {
    let bp = BasisParams::new(a.c, a.n)?;
    let tol = a.common.tolerances();
    let xs = a.common.points(bp.domain())?;
    let rows = xs
        .iter()
        .map(|&x| {
            Ok(EntropyRow {
                x,
                s_series: squared_sum_series(&bp, x, &tol)?,
                s_integral: squared_sum_integral(&bp, x, &tol)?,
                s_bound: squared_sum_bound(&bp, x)?,
                tsallis: tsallis_entropy(&bp, x, &tol)?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let text = match a.common.format {
        Format::Csv => {
            let mut csv = Csv::new(&["x", "s_series", "s_integral", "s_bound", "tsallis"]);
            for r in &rows {
                csv.nums(&[r.x, r.s_series, r.s_integral, r.s_bound, r.tsallis]);
            }
            csv.finish()
        }
        Format::Json => json("entropy", &EntropyBody { c: a.c, n: a.n, rows }),
    };
    emit(a.common.out.as_deref(), &text)?;
    Ok(0)
}

#[derive(Serialize)]
struct ConvergeBody<'a> {
    c: f64,
    n: f64,
    k: u32,
    f: &'a str,
    rows: Vec<linkops::analysis::ConvergeRow>,
}

fn cmd_converge(a: &ConvergeArgs) -> Result<u8, Failure> {
    if a.rhos.is_empty() {
        return Err(Failure::config("--rhos is empty"));
    }
    let mut cfgs = Vec::with_capacity(a.rhos.len());
    for &rho in &a.rhos {
        cfgs.push(OperatorConfig::new(a.c, a.n, Rho::Finite(rho), a.k)?);
    }
    let cfg = cfgs[0];
    let tol = a.common.tolerances();
    let xs = a.common.points(cfg.domain())?;
    let f = a.f.spec(cfg.domain())?;
    let rows = converge_table(&cfg, &f, &a.rhos, &xs, &tol)?;
    let text = match a.common.format {
        Format::Csv => {
            let mut csv = Csv::new(&["rho", "distance"]);
            for r in &rows {
                csv.nums(&[r.rho, r.distance]);
            }
            csv.finish()
        }
        Format::Json => json(
            "converge",
            &ConvergeBody {
                c: a.c,
                n: a.n,
                k: a.k,
                f: f.source(),
                rows,
            },
        ),
    };
    emit(a.common.out.as_deref(), &text)?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Eval(a) => cmd_eval(a),
        Command::Moments(a) => cmd_moments(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Entropy(a) => cmd_entropy(a),
        Command::Converge(a) => cmd_converge(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_syntax() {
        let g: Grid = "0:1:11".parse().unwrap();
        assert_eq!(g.points().unwrap().len(), 11);
        assert!("0:1".parse::<Grid>().is_err());
        assert!("1:0:5".parse::<Grid>().is_err());
        assert!("0:1:1".parse::<Grid>().is_err());
    }

    #[test]
    fn tolerance_syntax() {
        assert_eq!("1e-8".parse::<TolArg>().unwrap().0.quad_rel, 1e-8);
        let t = "1e-8,1e-10,1e-7".parse::<TolArg>().unwrap().0;
        assert_eq!((t.series_tail, t.check_slack), (1e-10, 1e-7));
        assert!("1e-8,1e-9".parse::<TolArg>().is_err());
        assert!("0.5".parse::<TolArg>().is_err());
    }

    #[test]
    fn params_file() {
        let cfgs = parse_params("# c n rho k\n-1 5 2 1\n\n0 10 inf 2  # limit\n").unwrap();
        assert_eq!(cfgs.len(), 2);
        assert_eq!(cfgs[1].rho, Rho::Infinite);
        assert_eq!(parse_params("-1 5 2").unwrap_err().code, 2);
        assert_eq!(parse_params("-0.3 5 2 0").unwrap_err().code, 2);
        assert_eq!(parse_params("").unwrap_err().code, 2);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
