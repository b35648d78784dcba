//! The `aoi` command line. All logic lives here so it can be driven from
//! tests; `main` only forwards process arguments and the exit code.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::config::ConfigFile;
use crate::error::Error;
use crate::metrics::jain_index;
use crate::plot::{render_svg, Series};
use crate::policy::{average_aoi_pair, AnalyticMethod, PolicyId};
use crate::report::{emit_csv, format_real, to_csv_string};
use crate::shs::LoadPoint;
use crate::sim::{self, SimConfig};
use crate::sweep::{default_grid, run_sweep, LoadAxis, Method, SimSettings, SweepRow, SweepSpec, CI_SIGMAS};
use crate::validation::{run_validation, Backends};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

const DEFAULT_POINTS: usize = 19;

#[derive(Debug, Parser)]
#[command(name = "aoi", version, about = "Average age of information for two-source status-update queues")]
pub struct Cli {
    /// Flat `key = value` file; flags take precedence over its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form or SHS-engine average AoI at one load point.
    Analytic(AnalyticArgs),
    /// Monte Carlo estimate at one load point.
    Simulate(SimulateArgs),
    /// Evaluate policies over a grid of rho1 values.
    Sweep(SweepArgs),
    /// Achievable (delta1, delta2) pairs at fixed total load.
    Tradeoff(TradeoffArgs),
    /// Cross-check the engine against the closed forms.
    Validate,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    #[arg(long)]
    pub policy: Option<String>,
    #[arg(long)]
    pub rho1: Option<f64>,
    #[arg(long)]
    pub rho2: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AnalyticArgs {
    #[command(flatten)]
    pub point: PointArgs,
    /// closed-form or shs
    #[arg(long)]
    pub method: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    /// Events per replication.
    #[arg(long)]
    pub events: Option<u64>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fraction of simulated time discarded as warmup.
    #[arg(long)]
    pub warmup: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Write the result row as CSV.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Write one record per delivery.
    #[arg(long, value_name = "PATH")]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated policy names; defaults to all seven.
    #[arg(long)]
    pub policies: Option<String>,
    /// Method for p1-p3; baselines always simulate.
    #[arg(long)]
    pub method: Option<String>,
    /// Fixed total load, rho2 = rho - rho1.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Fixed rho2 instead of a fixed total; needs --grid.
    #[arg(long)]
    pub rho2: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    /// Number of default grid points over [0.01 rho, 0.99 rho].
    #[arg(long)]
    pub points: Option<usize>,
    /// Explicit comma-separated rho1 grid.
    #[arg(long)]
    pub grid: Option<String>,
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub plot: Option<PathBuf>,
    /// Column plotted against rho1: sum, jain, delta1 or delta2.
    #[arg(long)]
    pub metric: Option<String>,
}

#[derive(Debug, Args)]
pub struct TradeoffArgs {
    /// Comma-separated policy names; defaults to p1,p2,p3.
    #[arg(long)]
    pub policies: Option<String>,
    /// closed-form or shs
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub plot: Option<PathBuf>,
}

/// A failure with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::UnsupportedPolicy(_) | Error::Parse(_) | Error::InvalidSweep(_) | Error::EmptySweep => EXIT_USAGE,
            Error::Shs(_) | Error::Domain(_) | Error::Sim(_) | Error::Io { .. } => EXIT_FAILURE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult = Result<(), Failure>;

/// Flag value, else config value, else default.
struct Resolver {
    config: ConfigFile,
}

impl Resolver {
    fn value<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, Failure> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.config.get(key).map_err(Failure::from),
        }
    }

    fn or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, Failure> {
        Ok(self.value(flag, key)?.unwrap_or(default))
    }

    fn required<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T, Failure> {
        self.value(flag, key)?
            .ok_or_else(|| Failure::usage(format!("missing --{key}")))
    }

    fn path(&self, flag: Option<PathBuf>, key: &str) -> Option<PathBuf> {
        flag.or_else(|| self.config.raw(key).map(PathBuf::from))
    }
}

const CONFIG_KEYS: &[&str] = &[
    "policy", "policies", "method", "rho", "rho1", "rho2", "mu", "points", "grid", "events", "replications", "seed",
    "warmup", "output", "plot", "metric", "trace",
];

fn positive(name: &str, v: f64) -> Result<f64, Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Failure::usage(format!("--{name} must be positive and finite, got {v}")))
    }
}

fn parse_list<T: FromStr<Err = Error>>(s: &str) -> Result<Vec<T>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().map_err(Failure::from))
        .collect()
}

fn parse_grid(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().map_err(|_| Failure::usage(format!("bad grid value '{x}'"))))
        .collect()
}

fn sim_settings(r: &Resolver, args: &SimArgs) -> Result<SimSettings, Failure> {
    let d = SimSettings::default();
    let s = SimSettings {
        horizon_events: r.or(args.events, "events", d.horizon_events)?,
        replications: r.or(args.replications, "replications", d.replications)?,
        seed: r.or(args.seed, "seed", d.seed)?,
        warmup_fraction: r.or(args.warmup, "warmup", d.warmup_fraction)?,
    };
    if s.horizon_events < sim::MIN_HORIZON_EVENTS {
        return Err(Failure::usage(format!("--events must be at least {}", sim::MIN_HORIZON_EVENTS)));
    }
    if s.replications == 0 {
        return Err(Failure::usage("--replications must be at least 1"));
    }
    if !(0.0..1.0).contains(&s.warmup_fraction) {
        return Err(Failure::usage("--warmup must lie in [0, 1)"));
    }
    Ok(s)
}

struct Point {
    policy: PolicyId,
    rho1: f64,
    rho2: f64,
    mu: f64,
}

fn point(r: &Resolver, args: &PointArgs, allow_zero_rho2: bool) -> Result<Point, Failure> {
    let policy: String = r.required(args.policy.clone(), "policy")?;
    let policy = policy.parse()?;
    let rho1 = positive("rho1", r.required(args.rho1, "rho1")?)?;
    let rho2: f64 = r.required(args.rho2, "rho2")?;
    if !(rho2.is_finite() && (rho2 > 0.0 || (allow_zero_rho2 && rho2 == 0.0))) {
        return Err(Failure::usage(format!("--rho2 out of range: {rho2}")));
    }
    let mu = positive("mu", r.or(args.mu, "mu", 1.0)?)?;
    Ok(Point { policy, rho1, rho2, mu })
}

fn write_report(out: &mut dyn Write, fields: &[(&str, String)]) -> CliResult {
    for (k, v) in fields {
        writeln!(out, "{k:<8} {v}").map_err(|e| Failure::from(Error::io("<stdout>", e)))?;
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| Failure::from(Error::io(path, e)))
}

fn cmd_analytic(r: &Resolver, args: AnalyticArgs, out: &mut dyn Write) -> CliResult {
    let method: Method = r.or(args.method, "method", "closed-form".to_string())?.parse()?;
    let p = point(r, &args.point, method == Method::ClosedForm)?;
    if !p.policy.has_analytic_model() {
        return Err(Error::UnsupportedPolicy(p.policy).into());
    }
    let backend = match method {
        Method::ClosedForm => AnalyticMethod::ClosedForm,
        Method::Shs => AnalyticMethod::ShsEngine,
        Method::Simulate => return Err(Failure::usage("analytic takes --method closed-form or shs")),
    };
    let (d1, d2) = if p.rho2 == 0.0 {
        // Source 2 never sends, so its age is unbounded.
        let d1 = crate::policy::closed_form_aoi(p.policy, p.rho1, 0.0, p.mu)?;
        (d1, f64::INFINITY)
    } else {
        let loads = LoadPoint::from_loads(p.rho1, p.rho2, p.mu).map_err(Error::from)?;
        average_aoi_pair(p.policy, &loads, backend)?
    };
    let jain = if d2.is_finite() {
        format_real(jain_index(d1, d2).map_err(Error::from)?)
    } else {
        "n/a".to_string()
    };
    let real = |x: f64| if x.is_finite() { format_real(x) } else { "inf".to_string() };
    write_report(
        out,
        &[
            ("policy", p.policy.to_string()),
            ("method", method.to_string()),
            ("rho1", format_real(p.rho1)),
            ("rho2", format_real(p.rho2)),
            ("mu", format_real(p.mu)),
            ("delta1", real(d1)),
            ("delta2", real(d2)),
            ("sum", real(d1 + d2)),
            ("jain", jain),
        ],
    )
}

fn cmd_simulate(r: &Resolver, args: SimulateArgs, out: &mut dyn Write) -> CliResult {
    let p = point(r, &args.point, false)?;
    let settings = sim_settings(r, &args.sim)?;
    let output = r.path(args.output, "output");
    let trace = r.path(args.trace, "trace");
    let config = SimConfig {
        policy: p.policy,
        loads: LoadPoint::from_loads(p.rho1, p.rho2, p.mu).map_err(Error::from)?,
        horizon_events: settings.horizon_events,
        warmup_fraction: settings.warmup_fraction,
        seed: settings.seed,
        replications: settings.replications,
    };
    let result = match &trace {
        Some(path) => {
            let mut text = String::from("replication,policy,source,generated,delivered\n");
            let result = sim::simulate_traced(&config, |rep, d| {
                text.push_str(&format!(
                    "{rep},{},{},{},{}\n",
                    p.policy,
                    d.source,
                    format_real(d.generated),
                    format_real(d.delivered)
                ));
            })
            .map_err(Error::from)?;
            write_file(path, &text)?;
            result
        }
        None => sim::simulate(&config).map_err(Error::from)?,
    };
    let [d1, d2] = result.mean_aoi;
    let sum = result.sum_aoi();
    let half = CI_SIGMAS * result.sum_std_error;
    let jain = jain_index(d1, d2).map_err(Error::from)?;
    if let Some(path) = &output {
        let row = SweepRow {
            policy: p.policy,
            rho1: p.rho1,
            rho2: p.rho2,
            mu: p.mu,
            delta1: d1,
            delta2: d2,
            sum_aoi: d1 + d2,
            jain,
            method: Method::Simulate,
            ci_low: Some(sum - half),
            ci_high: Some(sum + half),
            seed: Some(settings.seed),
        };
        emit_csv(&[row], path)?;
    }
    write_report(
        out,
        &[
            ("policy", p.policy.to_string()),
            ("method", Method::Simulate.to_string()),
            ("rho1", format_real(p.rho1)),
            ("rho2", format_real(p.rho2)),
            ("mu", format_real(p.mu)),
            ("delta1", format!("{} +- {}", format_real(d1), format_real(result.std_error[0]))),
            ("delta2", format!("{} +- {}", format_real(d2), format_real(result.std_error[1]))),
            ("sum", format!("{} +- {}", format_real(sum), format_real(result.sum_std_error))),
            ("jain", format_real(jain)),
            ("reps", result.replications.to_string()),
            ("seed", settings.seed.to_string()),
        ],
    )
}

fn metric_of(name: &str) -> Result<fn(&SweepRow) -> f64, Failure> {
    Ok(match name {
        "sum" | "sum_aoi" => |r| r.sum_aoi,
        "jain" => |r| r.jain,
        "delta1" => |r| r.delta1,
        "delta2" => |r| r.delta2,
        other => return Err(Failure::usage(format!("unknown metric '{other}'"))),
    })
}

fn series_by_policy(rows: &[SweepRow], f: impl Fn(&SweepRow) -> (f64, f64)) -> Vec<Series> {
    let mut series: Vec<Series> = Vec::new();
    for row in rows {
        let label = format!("{} ({})", row.policy, row.method);
        match series.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.push(f(row)),
            None => series.push(Series::new(label, vec![f(row)])),
        }
    }
    series
}

fn emit_rows(rows: &[SweepRow], output: Option<&Path>, out: &mut dyn Write) -> CliResult {
    match output {
        Some(path) => {
            emit_csv(rows, path)?;
            writeln!(out, "wrote {} rows to {}", rows.len(), path.display())
                .map_err(|e| Failure::from(Error::io("<stdout>", e)))
        }
        None => out
            .write_all(to_csv_string(rows)?.as_bytes())
            .map_err(|e| Failure::from(Error::io("<stdout>", e))),
    }
}

fn cmd_sweep(r: &Resolver, args: SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let policies: Vec<PolicyId> = match r.value(args.policies, "policies")? {
        Some(s) => parse_list::<PolicyId>(&s)?,
        None => PolicyId::ALL.to_vec(),
    };
    let method: Option<Method> = r.value(args.method, "method")?.map(|s: String| s.parse()).transpose()?;
    let mu = positive("mu", r.or(args.mu, "mu", 1.0)?)?;
    let rho: Option<f64> = r.value(args.rho, "rho")?;
    let rho2: Option<f64> = r.value(args.rho2, "rho2")?;
    let grid: Option<String> = r.value(args.grid, "grid")?;
    let points: usize = r.or(args.points, "points", DEFAULT_POINTS)?;
    let metric = metric_of(&r.or(args.metric, "metric", "sum".to_string())?)?;
    let axis = match (rho, rho2) {
        (Some(rho), None) => LoadAxis::FixedTotal {
            rho: positive("rho", rho)?,
        },
        (None, Some(rho2)) => LoadAxis::FixedRho2 {
            rho2: positive("rho2", rho2)?,
        },
        (None, None) => LoadAxis::FixedTotal { rho: 1.0 },
        (Some(_), Some(_)) => return Err(Failure::usage("give either --rho or --rho2, not both")),
    };
    let rho1_grid = match (&grid, axis) {
        (Some(g), _) => parse_grid(g)?,
        (None, LoadAxis::FixedTotal { rho }) => default_grid(rho, points),
        (None, LoadAxis::FixedRho2 { .. }) => return Err(Failure::usage("--rho2 sweeps need an explicit --grid")),
    };
    let spec = SweepSpec {
        policies: policies
            .iter()
            .map(|&p| {
                let m = match method {
                    Some(m) if p.has_analytic_model() => m,
                    _ => Method::default_for(p),
                };
                (p, m)
            })
            .collect(),
        axis,
        rho1_grid,
        mu,
        sim: sim_settings(r, &args.sim)?,
    };
    let output = r.path(args.output, "output");
    let plot = r.path(args.plot, "plot");

    let report = run_sweep(&spec)?;
    for f in &report.failures {
        let _ = writeln!(err, "point failed: policy={} rho1={}: {}", f.policy, f.rho1, f.message);
    }
    if report.rows.is_empty() {
        return Err(Error::EmptySweep.into());
    }
    emit_rows(&report.rows, output.as_deref(), out)?;
    if let Some(path) = &plot {
        let series = series_by_policy(&report.rows, |row| (row.rho1, metric(row)));
        write_file(path, &render_svg("sweep", "rho1", "value", &series))?;
    }
    if report.failures.is_empty() {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_FAILURE,
            message: format!("{} sweep points failed", report.failures.len()),
        })
    }
}

fn cmd_tradeoff(r: &Resolver, args: TradeoffArgs, out: &mut dyn Write) -> CliResult {
    let policies: Vec<PolicyId> = match r.value(args.policies, "policies")? {
        Some(s) => parse_list::<PolicyId>(&s)?,
        None => PolicyId::SOURCE_AWARE.to_vec(),
    };
    let method: Method = r.or(args.method, "method", "closed-form".to_string())?.parse()?;
    if method == Method::Simulate {
        return Err(Failure::usage("tradeoff takes --method closed-form or shs"));
    }
    let rho = positive("rho", r.or(args.rho, "rho", 1.0)?)?;
    let mu = positive("mu", r.or(args.mu, "mu", 1.0)?)?;
    let points: usize = r.or(args.points, "points", 99)?;
    let spec = SweepSpec {
        policies: policies.iter().map(|&p| (p, method)).collect(),
        ..SweepSpec::fixed_total(&policies, rho, mu, points)
    };
    let report = run_sweep(&spec)?;
    if let Some(f) = report.failures.first() {
        return Err(Failure {
            code: EXIT_FAILURE,
            message: format!("policy={} rho1={}: {}", f.policy, f.rho1, f.message),
        });
    }
    emit_rows(&report.rows, r.path(args.output, "output").as_deref(), out)?;
    if let Some(path) = r.path(args.plot, "plot") {
        let series = series_by_policy(&report.rows, |row| (row.delta1, row.delta2));
        write_file(&path, &render_svg(&format!("trade-off at rho = {rho}"), "delta1", "delta2", &series))?;
    }
    Ok(())
}

fn cmd_validate(out: &mut dyn Write) -> CliResult {
    let report = run_validation(&Backends::default());
    writeln!(out, "{report}").map_err(|e| Failure::from(Error::io("<stdout>", e)))?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_FAILURE,
            message: "validation failed".into(),
        })
    }
}

/// Runs a parsed command.
pub fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let config = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let unknown = config.unknown_keys(CONFIG_KEYS);
    if !unknown.is_empty() {
        return Err(Failure::usage(format!("unknown config keys: {}", unknown.join(", "))));
    }
    let r = Resolver { config };
    match cli.command {
        Command::Analytic(a) => cmd_analytic(&r, a, out),
        Command::Simulate(a) => cmd_simulate(&r, a, out),
        Command::Sweep(a) => cmd_sweep(&r, a, out, err),
        Command::Tradeoff(a) => cmd_tradeoff(&r, a, out),
        Command::Validate => cmd_validate(out),
    }
}

/// Parses `args` (including the program name) and runs. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return if code == 0 { EXIT_OK } else { EXIT_USAGE };
        }
    };
    match execute(cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
