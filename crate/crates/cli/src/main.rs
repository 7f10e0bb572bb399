//! `spinq`: run verification suites on catalog entries or user-supplied
//! frame algebras and emit JSON reports.
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 on usage,
//! parse or I/O errors.

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};
use spinq::catalog::{self, CatalogEntry};
use spinq::check::Mode;
use spinq::expr::{parse, Expr};
use spinq::frame::json::import;
use spinq::frame::Point;
use spinq::verify::{self, RunOptions, Suite};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Parser)]
#[command(name = "spinq", version, about = "Verify G2 / Spin(7) torsion identities on moving frames")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List catalog entries with their suites.
    List {
        /// Print a JSON array instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Run verification suites on a catalog id or a frame-algebra JSON file.
    Run(RunArgs),
    /// Write a catalog entry in the frame-algebra JSON format.
    Export {
        id: String,
        /// Output file; stdout when omitted.
        path: Option<PathBuf>,
    },
    /// Evaluate a named quantity or form (or an expression) at a sample point.
    Eval(EvalArgs),
}

#[derive(Args)]
struct Sampling {
    /// Relative tolerance for sampled comparisons.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Number of random sample points.
    #[arg(long, default_value_t = 20)]
    points: usize,
    /// Seed for the sample points.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comparison mode. `auto` is exact whenever the coefficients allow it.
    #[arg(long, default_value = "auto", value_parser = parse_mode)]
    mode: Mode,
}

#[derive(Args)]
struct RunArgs {
    /// Catalog id, or path to a frame-algebra JSON document.
    target: String,
    /// Suite name, or `all` for every suite that applies.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    sampling: Sampling,
}

#[derive(Args)]
struct EvalArgs {
    /// Quantity or form name of the target, or an expression such as
    /// `(+ (* 2 x) (^ y 1/2))`.
    expr: String,
    /// Catalog id or JSON path.
    target: String,
    /// Index of the sample point drawn with `--seed`.
    #[arg(long, default_value_t = 0, conflicts_with = "at")]
    point: usize,
    /// Explicit generator values, e.g. `x=0.3,y=-0.1`; dependent generators
    /// are filled in.
    #[arg(long)]
    at: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

/// A usage-level failure: reported on stderr with exit status 2.
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

fn load_target(target: &str) -> Result<Arc<CatalogEntry>, Usage> {
    if catalog::IDS.contains(&target) {
        return Ok(catalog::load(target)?);
    }
    let path = Path::new(target);
    if !path.exists() {
        return Err(Usage(format!(
            "'{target}' is neither a catalog id nor a readable file (try `spinq list`)"
        )));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Usage(format!("{target}: {e}")))?;
    let doc = import(&text).map_err(|e| Usage(format!("{target}: {e}")))?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or(target);
    Ok(Arc::new(catalog::from_document(name, doc)?))
}

fn emit(text: &str, path: Option<&Path>) -> Result<(), Usage> {
    match path {
        Some(p) => std::fs::write(p, format!("{text}\n")).map_err(|e| Usage(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Usage::from(e)),
                _ => Ok(()),
            }
        }
    }
}

fn list(as_json: bool) -> Result<ExitCode, Usage> {
    let mut rows = Vec::new();
    for id in catalog::IDS {
        let e = catalog::load(id)?;
        let suites: Vec<&str> = verify::applicable_suites(&e).iter().map(|s| s.name()).collect();
        rows.push((id, e.summary.clone(), suites));
    }
    if as_json {
        let v: Vec<Value> = rows
            .iter()
            .map(|(id, summary, suites)| json!({"id": id, "summary": summary, "suites": suites}))
            .collect();
        emit(&serde_json::to_string_pretty(&v)?, None)?;
    } else {
        let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
        let text: Vec<String> = rows
            .iter()
            .map(|(id, summary, suites)| format!("{id:width$}  {summary}\n{:width$}  suites: {}", "", suites.join(", ")))
            .collect();
        emit(&text.join("\n"), None)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run(args: &RunArgs) -> Result<ExitCode, Usage> {
    let entry = load_target(&args.target)?;
    let suites: Option<Vec<Suite>> = match args.suite.as_str() {
        "all" => None,
        name => Some(vec![name.parse::<Suite>()?]),
    };
    let s = &args.sampling;
    let opts = RunOptions {
        mode: s.mode,
        tol: s.tol,
        points: s.points,
        seed: s.seed,
    };
    let report = verify::run(&entry, suites.as_deref(), &opts)?;
    for suite in &report.suites {
        let failed = suite.checks.iter().filter(|c| !c.pass).count();
        eprintln!(
            "{}: {} checks, {} failed ({:.0} ms)",
            suite.suite,
            suite.checks.len(),
            failed,
            suite.wall_time_ms
        );
        for c in suite.checks.iter().filter(|c| !c.pass) {
            eprintln!("  FAIL {} [{}] residual {:.3e}: {}", c.id, c.mode, c.residual, c.formula);
        }
    }
    emit(&report.to_json(), args.report.as_deref())?;
    Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn eval_point(entry: &CatalogEntry, args: &EvalArgs) -> Result<Point, Usage> {
    match &args.at {
        Some(spec) => {
            let mut p = Point::new();
            for pair in spec.split(',').filter(|s| !s.trim().is_empty()) {
                let (k, v) = pair
                    .split_once('=')
                    .ok_or_else(|| Usage(format!("expected name=value in --at, got '{pair}'")))?;
                let v: f64 = v.trim().parse().map_err(|e| Usage(format!("--at {k}: {e}")))?;
                p.set(k.trim(), v);
            }
            Ok(p.complete(&entry.alg)?)
        }
        None => {
            let pts = entry.alg.sample_points(args.point + 1, args.seed)?;
            Ok(pts.into_iter().nth(args.point).expect("sampled enough points"))
        }
    }
}

fn eval(args: &EvalArgs) -> Result<ExitCode, Usage> {
    let entry = load_target(&args.target)?;
    let p = eval_point(&entry, args)?;
    let value = if let Some(q) = entry.quantities.get(&args.expr) {
        json!(p.eval(q)?)
    } else if let Some(f) = entry.forms.get(&args.expr) {
        let labels = f.alg().labels();
        let mut comps = Map::new();
        for (m, v) in f.eval(&p)? {
            let name: Vec<&str> = (0..labels.len()).filter(|i| m & (1 << i) != 0).map(|i| labels[i].as_str()).collect();
            comps.insert(if name.is_empty() { "1".into() } else { name.join("^") }, json!(v));
        }
        Value::Object(comps)
    } else {
        let e: Expr = parse(&args.expr).map_err(|e| Usage(format!("'{}': {e}", args.expr)))?;
        json!(p.eval(&e)?)
    };
    emit(&serde_json::to_string_pretty(&value)?, None)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::List { json } => list(*json),
        Command::Run(args) => run(args),
        Command::Export { id, path } => load_target(id).and_then(|e| {
            emit(e.export().trim_end(), path.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }),
        Command::Eval(args) => eval(args),
    };
    result.unwrap_or_else(|Usage(msg)| {
        eprintln!("error: {msg}");
        ExitCode::from(2)
    })
}
