//! Command-line front end. The binary only calls [`main_with_args`].

use crate::closed_forms::exact_law_of;
use crate::error::{Error, Result};
use crate::levy_model::{kesten_report, solve_cramer, LevyModel};
use crate::path_sim::{sample_a_finite, sample_a_infinity, BatchFormat, Horizon, SampleBatch, DEFAULT_STEP, DEFAULT_TOL};
use crate::renewal_const::{estimate_constant, wald_ladder_check, ConstantEstimate};
use crate::tail_stats::{curve_csv, fit_tail, plateau_window, smoothed_cramer_curve};
use crate::validate::{validate_suite, SuiteConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

/// Environment variable that sets the worker thread count.
pub const THREADS_ENV: &str = "LEVY_CRAMER_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const CURVE_POINTS: usize = 200;

#[derive(Debug, Parser)]
#[command(name = "levy-cramer", version, about = "Cramér tail estimates for exponential functionals of Lévy processes")]
#[command(arg_required_else_help = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArg {
    /// Model spec, e.g. `bm:sigma=1.41421356,nu=-1`, `cpp:a=0.5,b=1`, `stable:alpha=0.5,a=2`.
    #[arg(long, value_parser = parse_model)]
    pub model: LevyModel,
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Number of replicates.
    #[arg(long)]
    pub n: Option<usize>,
    /// Grid step for models simulated on a grid.
    #[arg(long, default_value_t = DEFAULT_STEP)]
    pub step: f64,
    /// Truncation tolerance of the perpetuity sum.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Write output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the Cramér exponent.
    Exponent {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Sample the exponential functional.
    Sample {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        sim: SimArgs,
        /// `inf`, `exp` or a fixed time.
        #[arg(long, default_value = "inf", value_parser = parse_horizon)]
        horizon: Horizon,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Hill index and plateau constant from a sample file or a fresh sample.
    Tail {
        /// Batch file (CSV or JSON) written by `sample`.
        #[arg(long, conflicts_with = "model")]
        input: Option<PathBuf>,
        #[arg(long, value_parser = parse_model, required_unless_present = "input")]
        model: Option<LevyModel>,
        #[command(flatten)]
        sim: SimArgs,
        /// Order statistics for the Hill estimator; default `ceil(n^(2/3))`.
        #[arg(long)]
        k: Option<usize>,
        /// Index used for the plateau constant; default the model's root.
        #[arg(long)]
        chi: Option<f64>,
        /// Also write the smoothed Cramér curve as CSV here.
        #[arg(long)]
        curve: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Monte-Carlo estimate of the tail constant.
    Constant {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Check Kesten's conditions for the unit-time perpetuity.
    Kesten {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        sim: SimArgs,
        /// Moment margin; default `chi / 2`.
        #[arg(long)]
        eps: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Wald's identity at the first ladder epoch of the tilted skeleton.
    Wald {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long, default_value_t = 1_000_000)]
        max_steps: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run the closed-form validation suite.
    Validate {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Small samples and wide tolerances.
        #[arg(long)]
        smoke: bool,
        #[command(flatten)]
        out: OutArgs,
    },
}

fn parse_model(s: &str) -> Result<LevyModel> {
    s.parse()
}

fn parse_horizon(s: &str) -> Result<Horizon> {
    s.parse()
}

/// Resolved settings for a simulation command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: &'static str,
    pub model: LevyModel,
    pub seed: u64,
    pub n: usize,
    pub step: f64,
    pub tol: f64,
    pub epsilon: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

impl RunConfig {
    fn new(command: &'static str, model: &LevyModel, sim: &SimArgs, out: &OutArgs, default_n: usize) -> Result<Self> {
        let n = sim.n.unwrap_or(default_n);
        if n == 0 {
            return Err(Error::Domain("--n must be at least 1".into()));
        }
        Ok(RunConfig {
            command,
            model: *model,
            seed: sim.seed,
            n,
            step: sim.step,
            tol: sim.tol,
            epsilon: None,
            out: out.out.clone(),
            format: out.format,
        })
    }
}

/// Output of `exponent`.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentReport {
    pub model: String,
    pub chi: f64,
    pub phi_prime_at_chi: f64,
    pub tilt_mean_m: f64,
    pub bracket: (f64, f64),
    pub iterations: u32,
    /// The family's closed-form root, when it has one.
    pub closed_form_chi: Option<f64>,
    pub exact_tail_constant: Option<f64>,
}

/// Output of `constant`.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantReport {
    pub model: String,
    #[serde(flatten)]
    pub estimate: ConstantEstimate,
    pub exact_tail_constant: Option<f64>,
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn emit(out: &OutArgs, text: &str) -> Result<()> {
    match &out.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json_only(out: &OutArgs) -> Result<()> {
    match out.format {
        None | Some(OutputFormat::Json) => Ok(()),
        Some(f) => Err(Error::Format(format!("this command only writes json, not {f:?}"))),
    }
}

/// Executes a parsed command. Returns whether every reported check passed.
pub fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Exponent { model, out } => {
            json_only(&out)?;
            let m = model.model;
            let sol = solve_cramer(&m)?;
            let report = ExponentReport {
                model: m.to_string(),
                chi: sol.chi,
                phi_prime_at_chi: sol.phi_prime_at_chi,
                tilt_mean_m: sol.tilt_mean_m,
                bracket: sol.bracket,
                iterations: sol.iterations,
                closed_form_chi: m.closed_form_root(),
                exact_tail_constant: exact_law_of(&m).ok().map(|l| l.tail_constant()),
            };
            emit(&out, &to_json(&report))?;
            Ok(true)
        }
        Command::Sample { model, sim, horizon, out } => {
            let cfg = RunConfig::new("sample", &model.model, &sim, &out, 10_000)?;
            let mut text = match (horizon, out.format) {
                (_, Some(OutputFormat::Table)) => return Err(Error::Format("samples are written as csv or json".into())),
                (Horizon::Infinite, f) => {
                    let b = sample_a_infinity(&cfg.model, cfg.n, cfg.step, cfg.tol, cfg.seed)?;
                    b.render(if f == Some(OutputFormat::Csv) { BatchFormat::Csv } else { BatchFormat::Json })
                }
                (h, f) => {
                    let b = sample_a_finite(&cfg.model, h, cfg.n, cfg.step, cfg.seed)?;
                    if f == Some(OutputFormat::Csv) {
                        b.batch.to_csv()
                    } else {
                        b.to_json()
                    }
                }
            };
            if !text.ends_with('\n') {
                text.push('\n');
            }
            emit(&out, &text)?;
            Ok(true)
        }
        Command::Tail { input, model, sim, k, chi, curve, out } => {
            json_only(&out)?;
            let batch = match (input, model) {
                (Some(path), _) => SampleBatch::read(&path)?,
                (None, Some(m)) => {
                    let cfg = RunConfig::new("tail", &m, &sim, &out, 100_000)?;
                    sample_a_infinity(&cfg.model, cfg.n, cfg.step, cfg.tol, cfg.seed)?
                }
                (None, None) => unreachable!("clap requires --input or --model"),
            };
            let chi = chi.or_else(|| solve_cramer(&batch.model).ok().map(|c| c.chi));
            let fit = fit_tail(&batch.values, k, chi)?;
            if let Some(path) = curve {
                let (lo, hi) = plateau_window(&batch.values)?;
                let grid: Vec<f64> =
                    (0..CURVE_POINTS).map(|i| lo + (hi - lo) * i as f64 / (CURVE_POINTS - 1) as f64).collect();
                std::fs::write(path, curve_csv(&smoothed_cramer_curve(&batch.values, fit.chi_for_constant, &grid)?))?;
            }
            emit(&out, &to_json(&fit))?;
            Ok(true)
        }
        Command::Constant { model, sim, out } => {
            json_only(&out)?;
            let cfg = RunConfig::new("constant", &model.model, &sim, &out, 100_000)?;
            let sol = solve_cramer(&cfg.model)?;
            let est = estimate_constant(&cfg.model, &sol, cfg.n, cfg.step, cfg.tol, cfg.seed)?;
            let report = ConstantReport {
                model: cfg.model.to_string(),
                estimate: est,
                exact_tail_constant: exact_law_of(&cfg.model).ok().map(|l| l.tail_constant()),
            };
            emit(&out, &to_json(&report))?;
            Ok(true)
        }
        Command::Kesten { model, sim, eps, out } => {
            json_only(&out)?;
            let mut cfg = RunConfig::new("kesten", &model.model, &sim, &out, 100_000)?;
            let sol = solve_cramer(&cfg.model)?;
            cfg.epsilon = Some(eps.unwrap_or(sol.chi / 2.0));
            let report = kesten_report(&cfg.model, sol.chi, cfg.epsilon.unwrap(), cfg.n, cfg.step, cfg.seed)?;
            emit(&out, &to_json(&report))?;
            Ok(true)
        }
        Command::Wald { model, seed, n, step, max_steps, out } => {
            json_only(&out)?;
            let sol = solve_cramer(&model.model)?;
            let report = wald_ladder_check(&model.model, &sol, step, n, max_steps, seed)?;
            emit(&out, &to_json(&report))?;
            Ok(report.pass)
        }
        Command::Validate { seed, smoke, out } => {
            let report = validate_suite(SuiteConfig { seed, smoke });
            let text = match out.format {
                None | Some(OutputFormat::Table) => report.table(),
                Some(OutputFormat::Json) => to_json(&report),
                Some(OutputFormat::Csv) => return Err(Error::Format("validate writes a table or json".into())),
            };
            emit(&out, &text)?;
            Ok(report.all_pass)
        }
    }
}

fn init_threads() -> std::result::Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = raw.trim().parse().map_err(|_| format!("{THREADS_ENV} must be a positive integer, got `{raw}`"))?;
    if n == 0 {
        return Err(format!("{THREADS_ENV} must be a positive integer"));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

/// Parses `args`, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    if let Err(msg) = init_threads() {
        eprintln!("error: {msg}");
        return EXIT_USAGE;
    }
    match run(cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_NUMERICAL,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_NUMERICAL
        }
    }
}
