//! The `pvar` command line.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analytic::{self, DiagExampleParams};
use crate::error::{Error, Result};
use crate::io::{self, PresamplePolicy};
use crate::lrv::{ArOrder, Bandwidth, KernelKind, LrvOptions, Method};
use crate::mc::{self, Scenario};
use crate::report::{self, FitOptions};
use crate::sim::{self, NoiseKind, NoiseSpec};

#[derive(Debug, Parser)]
#[command(name = "pvar", version, about = "Periodic VAR estimation and robust inference")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a series from a model file and write it as CSV.
    Simulate(SimulateArgs),
    /// Least-squares fit with standard errors under each covariance estimator.
    Fit(FitArgs),
    /// Standard and modified Wald tests.
    Wald(WaldArgs),
    /// Run a Monte Carlo scenario.
    Mc(McArgs),
    /// Closed-form covariance tables for the two-season diagonal example.
    Analytic(AnalyticArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Number of cycles to keep.
    #[arg(long, default_value_t = 1000)]
    pub cycles: usize,
    #[arg(long, default_value_t = sim::DEFAULT_BURNIN_CYCLES)]
    pub burnin: usize,
    /// `strong`, `weak:M` or `zero`.
    #[arg(long, default_value = "strong")]
    pub noise: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV file, one row per time point.
    #[arg(long)]
    pub data: PathBuf,
    /// Period.
    #[arg(long)]
    pub s: usize,
    /// One order for all seasons, or a comma-separated list.
    #[arg(long, default_value = "1")]
    pub order: String,
    /// `none` or `first-cycles[:K]`.
    #[arg(long, default_value = "none")]
    pub presample: String,
    /// Subtract per-season sample means first.
    #[arg(long)]
    pub demean: bool,
    /// Comma-separated subset of `strong,sp,hac`.
    #[arg(long, default_value = "strong,sp,hac")]
    pub cov: String,
    /// `bartlett`, `rect`, `parzen` or `qs`.
    #[arg(long, default_value = "bartlett")]
    pub kernel: String,
    /// Rule name (`andrews`, `log`, `nw`, `quarter`, `sqrt`, `inverse-n`) or a value such as `1/21`.
    #[arg(long, default_value = "andrews")]
    pub bandwidth: String,
    /// `aic`, `aic:R` or a fixed order.
    #[arg(long, default_value = "aic")]
    pub ar_order: String,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct WaldArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Restriction such as `phi[3](2,2)=0`; repeat or join with `;`.
    #[arg(long = "restrict", required = true)]
    pub restrictions: Vec<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// Preset name or a scenario file (TOML or JSON).
    #[arg(long, default_value = "model-I")]
    pub scenario: String,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the number of cycles.
    #[arg(long)]
    pub cycles: Option<usize>,
    /// Print the built-in scenarios as JSON and exit.
    #[arg(long)]
    pub dump_scenarios: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AnalyticArgs {
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn parse_orders(text: &str, s: usize) -> Result<Vec<usize>> {
    let parts: Vec<usize> = text
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|_| config(format!("bad order '{p}'"))))
        .collect::<Result<_>>()?;
    match parts.len() {
        1 => Ok(vec![parts[0]; s]),
        n if n == s => Ok(parts),
        n => Err(config(format!("{n} orders given for s = {s}"))),
    }
}

fn parse_methods(text: &str) -> Result<Vec<Method>> {
    let mut out: Vec<Method> = text
        .split(',')
        .map(|m| Method::parse(m.trim()).ok_or_else(|| config(format!("unknown covariance method '{m}'"))))
        .collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

pub fn parse_noise(text: &str) -> Result<NoiseKind> {
    let t = text.trim().to_ascii_lowercase();
    match t.as_str() {
        "strong" => Ok(NoiseKind::StrongGaussian),
        "zero" => Ok(NoiseKind::Zero),
        _ => t
            .strip_prefix("weak")
            .map(|r| r.trim_start_matches([':', '=']))
            .and_then(|r| if r.is_empty() { Some(1) } else { r.parse().ok() })
            .map(|m| NoiseKind::WeakProduct { m })
            .ok_or_else(|| config(format!("unknown noise '{text}'"))),
    }
}

impl DataArgs {
    fn options(&self) -> Result<FitOptions> {
        let lrv = LrvOptions {
            kernel: KernelKind::parse(&self.kernel).ok_or_else(|| config(format!("unknown kernel '{}'", self.kernel)))?,
            bandwidth: Bandwidth::parse(&self.bandwidth)
                .ok_or_else(|| config(format!("unknown bandwidth '{}'", self.bandwidth)))?,
            ar_order: ArOrder::parse(&self.ar_order)
                .ok_or_else(|| config(format!("bad AR order '{}'", self.ar_order)))?,
        };
        Ok(FitOptions {
            orders: parse_orders(&self.order, self.s)?,
            demean: self.demean,
            methods: parse_methods(&self.cov)?,
            lrv,
        })
    }

    fn load(&self, warn: &mut dyn Write) -> Result<crate::model::PeriodicSeries> {
        let policy = PresamplePolicy::parse(&self.presample)
            .ok_or_else(|| config(format!("bad presample policy '{}'", self.presample)))?;
        let csv = io::read_csv(&self.data, self.s, policy)?;
        for w in &csv.warnings {
            let _ = writeln!(warn, "warning: {w}");
        }
        Ok(csv.series)
    }
}

fn emit(output: &OutputArgs, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match &output.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(Error::from),
    }
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn load_scenario(spec: &str) -> Result<Scenario> {
    if let Some(sc) = mc::preset(spec) {
        return Ok(sc);
    }
    let path = Path::new(spec);
    if !path.exists() {
        let names: Vec<String> = mc::presets().into_iter().map(|s| s.name).collect();
        return Err(config(format!("no preset or file named '{spec}' (presets: {})", names.join(", "))));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{spec}: {e}")))?;
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| config(format!("{spec}: {e}")))
    } else {
        toml::from_str(&text).map_err(|e| config(format!("{spec}: {e}")))
    }
}

/// Run one command, writing results to `stdout` and notes to `stderr`.
pub fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => {
            let model = io::read_model_file(&a.model)?;
            let spec = NoiseSpec {
                kind: parse_noise(&a.noise)?,
                sigma: None,
            };
            let series = sim::simulate(&model, &spec, a.cycles, a.burnin, a.seed)?;
            let mut buf = Vec::new();
            io::write_csv(&series, &mut buf)?;
            match a.out {
                Some(path) => std::fs::write(&path, buf).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
                None => stdout.write_all(&buf).map_err(Error::from),
            }
        }
        Command::Fit(a) => {
            let options = a.data.options()?;
            let series = a.data.load(stderr)?;
            let rep = report::fit_report(&series, &options)?;
            let text = match a.output.format {
                Format::Table => report::fit_table(&rep),
                Format::Csv => report::fit_csv(&rep),
                Format::Json => json(&rep),
            };
            emit(&a.output, &text, stdout)
        }
        Command::Wald(a) => {
            let options = a.data.options()?;
            for r in &a.restrictions {
                crate::infer::parse_restrictions(r)?;
            }
            let series = a.data.load(stderr)?;
            let rep = report::wald_report(&series, &options, &a.restrictions)?;
            let text = match a.output.format {
                Format::Table => report::wald_table(&rep),
                Format::Csv => report::wald_csv(&rep),
                Format::Json => json(&rep),
            };
            emit(&a.output, &text, stdout)
        }
        Command::Mc(a) => {
            if a.dump_scenarios {
                return emit(&a.output, mc::presets_json(), stdout);
            }
            let mut sc = load_scenario(&a.scenario)?;
            if let Some(r) = a.reps {
                sc.reps = r;
            }
            if let Some(s) = a.seed {
                sc.base_seed = s;
            }
            if let Some(n) = a.cycles {
                sc.n_cycles = n;
            }
            let rep = mc::run_scenario(&sc)?;
            let _ = writeln!(stderr, "{}: {:.2?}", sc.name, rep.wall_time);
            let text = match a.output.format {
                Format::Table => report::mc_table(&rep),
                Format::Csv => report::mc_csv(&rep),
                Format::Json => json(&rep),
            };
            emit(&a.output, &text, stdout)
        }
        Command::Analytic(a) => {
            let tables = analytic::analytic_tables(&DiagExampleParams::worked_example(a.m))?;
            let text = match a.output.format {
                Format::Table => analytic_table(&tables),
                Format::Csv => analytic_csv(&tables),
                Format::Json => json(&tables),
            };
            emit(&a.output, &text, stdout)
        }
    }
}

fn analytic_table(t: &analytic::AnalyticTables) -> String {
    let row = |v: &[f64]| v.iter().map(|x| format!("{x:8.4}")).collect::<Vec<_>>().join(" ");
    let mut out = format!("m = {}\n", t.m);
    for (name, pair) in [("Omega", &t.omega), ("Psi", &t.psi), ("Theta_S", &t.theta_s), ("Theta", &t.theta)] {
        for (v, diag) in pair.iter().enumerate() {
            out.push_str(&format!("{:<8} nu={}  diag: {}\n", name, v + 1, row(diag)));
        }
    }
    out
}

fn analytic_csv(t: &analytic::AnalyticTables) -> String {
    let mut out = String::from("m,quantity,season,index,value\n");
    for (name, pair) in [("omega", &t.omega), ("psi", &t.psi), ("theta_s", &t.theta_s), ("theta", &t.theta)] {
        for (v, diag) in pair.iter().enumerate() {
            for (i, x) in diag.iter().enumerate() {
                out.push_str(&format!("{},{name},{},{},{x}\n", t.m, v + 1, i + 1));
            }
        }
    }
    out
}

/// Parse arguments, run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let mut stdout = std::io::stdout().lock();
    let mut stderr = std::io::stderr();
    run_with(args, &mut stdout, &mut stderr)
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
                2
            } else {
                let _ = stdout.write_all(text.as_bytes());
                0
            };
        }
    };
    match execute(cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
