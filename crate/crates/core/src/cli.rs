//! `dcrm` command-line interface.
//!
//! Exit codes: 0 success, 1 invalid configuration or arguments, 2 I/O failure,
//! 3 a validation check failed.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{ConfigError, ScenarioConfig};
use crate::dcrm::{self, SimulationOptions};
use crate::error::Error;
use crate::output::{self, SummaryRow};
use crate::payd::{self, PaydPolicy};
use crate::processes::{intensity_integral, IntensityModel};
use crate::rng;
use crate::stats::Estimate;
use crate::validation::{self, ValidationOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "dcrm", version, about = "Discounted collective risk models and PAYD pricing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate Z_t and write per-path and summary CSVs.
    Simulate(RunArgs),
    /// Price a PAYD policy (net premium).
    Price(RunArgs),
    /// Run the statistical validation suite.
    Validate(ValidateArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Overrides the config's simulation.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's simulation.paths.
    #[arg(long)]
    paths: Option<usize>,
    /// Worker threads; never changes results.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Optional directory for `validation.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Test hook: scale every analytic mean reference by (1 + x).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    perturb_mean: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug)]
enum Failure {
    Invalid(String),
    Io(String),
    Checks,
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Invalid(_) => EXIT_INVALID,
            Failure::Io(_) => EXIT_IO,
            Failure::Checks => EXIT_CHECK_FAILED,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => Failure::Io(e.to_string()),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

/// Parses `args` (including the program name) and runs the command; returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let threads = match &cli.command {
        Command::Simulate(a) | Command::Price(a) => a.common.threads,
        Command::Validate(a) => a.common.threads,
    };
    let pool = match threads {
        Some(0) => {
            eprintln!("error: --threads must be >= 1");
            return EXIT_INVALID;
        }
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return EXIT_IO;
        }
    };
    let outcome = pool.install(|| match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Price(a) => cmd_price(&a),
        Command::Validate(a) => cmd_validate(&a),
    });
    match outcome {
        Ok(()) => EXIT_OK,
        Err(f) => {
            match &f {
                Failure::Invalid(m) => eprintln!("error: {m}"),
                Failure::Io(m) => eprintln!("I/O error: {m}"),
                Failure::Checks => eprintln!("validation failed"),
            }
            f.code()
        }
    }
}

fn load(args: &RunArgs) -> Result<ScenarioConfig, Failure> {
    let mut cfg = ScenarioConfig::load(&args.config)?;
    apply_overrides(&mut cfg, &args.common)?;
    Ok(cfg)
}

fn apply_overrides(cfg: &mut ScenarioConfig, common: &Common) -> Result<(), Failure> {
    if let Some(seed) = common.seed {
        cfg.simulation.seed = seed;
    }
    if let Some(paths) = common.paths {
        if paths == 0 {
            return Err(Failure::Invalid("--paths must be >= 1".into()));
        }
        cfg.simulation.paths = paths;
    }
    Ok(())
}

/// Writes every file or none: contents are fully rendered before the first
/// write, and each file lands via a rename.
fn write_outputs(dir: &Path, files: &[(&str, String)]) -> Result<(), Failure> {
    let io = |e: std::io::Error, p: &Path| Failure::Io(format!("{}: {e}", p.display()));
    fs::create_dir_all(dir).map_err(|e| io(e, dir))?;
    for (name, contents) in files {
        let target = dir.join(name);
        let tmp = dir.join(format!(".{name}.tmp"));
        fs::write(&tmp, contents).map_err(|e| io(e, &tmp))?;
        fs::rename(&tmp, &target).map_err(|e| io(e, &target))?;
    }
    Ok(())
}

fn cmd_simulate(args: &RunArgs) -> Result<(), Failure> {
    let cfg = load(args)?;
    let s = &cfg.scenario;
    let result = dcrm::simulate_zt(
        s,
        cfg.simulation.paths,
        cfg.simulation.seed,
        SimulationOptions {
            full_trace: cfg.simulation.full_trace,
        },
    )?;
    let summary = result.summary();
    let counts: Vec<f64> = result.counts.iter().map(|&c| c as f64).collect();
    let mut rows = vec![
        SummaryRow::new("mean", summary.mean_estimate()),
        SummaryRow::new("variance", summary.variance_estimate()),
        SummaryRow::new("mean_count", crate::stats::SampleSummary::from_slice(&counts).mean_estimate()),
        SummaryRow::new("paths", Estimate::exact(result.n_paths() as f64)),
    ];
    let (mu1, mu2) = (s.claim.mean(), s.claim.second_moment());
    let analytic = match &s.intensity {
        IntensityModel::Constant { .. } | IntensityModel::Tabulated(_) => Some((
            mu1 * intensity_integral(&s.intensity, s.delta, s.horizon)?,
            mu2 * intensity_integral(&s.intensity, 2.0 * s.delta, s.horizon)?,
        )),
        IntensityModel::MileageAffine(m) => match &s.mileage {
            Some(mileage) if mileage.is_deterministic() => {
                let path = mileage.realize_path(s.horizon, &mut rng::stream(0))?;
                let on_path = m.on_path(&path);
                Some((
                    mu1 * intensity_integral(&on_path, s.delta, s.horizon)?,
                    mu2 * intensity_integral(&on_path, 2.0 * s.delta, s.horizon)?,
                ))
            }
            _ => None,
        },
    };
    if let Some((mean, var)) = analytic {
        rows.push(SummaryRow::new("analytic_mean", Estimate::exact(mean)));
        rows.push(SummaryRow::new("analytic_variance", Estimate::exact(var)));
    }

    let mut files = vec![
        ("paths.csv", output::paths_csv(&result)),
        ("summary.csv", output::summary_csv(&rows)),
    ];
    if let Some(trace) = output::trace_csv(&result) {
        files.push(("trace.csv", trace));
    }
    if let Some(exposure) = output::exposure_csv(&result) {
        files.push(("exposure.csv", exposure));
    }
    write_outputs(&args.out, &files)
}

fn cmd_price(args: &RunArgs) -> Result<(), Failure> {
    let cfg = load(args)?;
    if cfg.scenario.mileage.is_none() {
        return Err(Failure::Invalid("invalid config field `mileage`: pricing needs a mileage section".into()));
    }
    let policy = PaydPolicy::from_scenario(&cfg.scenario).map_err(|e| match e {
        Error::InvalidParameter { name, reason } => Failure::Invalid(format!("invalid config field `{name}`: {reason}")),
        other => other.into(),
    })?;
    let quote = payd::price_payd(&policy, cfg.simulation.paths, cfg.simulation.seed)?;
    let text = output::quote_text(&quote);
    write_outputs(&args.out, &[("quote.csv", output::quote_csv(&quote)), ("quote.txt", text.clone())])?;
    print!("{text}");
    Ok(())
}

fn cmd_validate(args: &ValidateArgs) -> Result<(), Failure> {
    if !args.perturb_mean.is_finite() {
        return Err(Failure::Invalid("--perturb-mean must be finite".into()));
    }
    let mut opts = ValidationOptions {
        perturb_mean: args.perturb_mean,
        ..ValidationOptions::default()
    };
    let outcomes = match &args.config {
        Some(path) => {
            let mut cfg = ScenarioConfig::load(path)?;
            apply_overrides(&mut cfg, &args.common)?;
            opts.seed = cfg.simulation.seed;
            opts.paths = cfg.simulation.paths;
            validation::run_scenario_suite(&cfg, &opts)?
        }
        None => {
            if let Some(seed) = args.common.seed {
                opts.seed = seed;
            }
            if let Some(paths) = args.common.paths {
                if paths < payd::MIN_VALIDATION_PATHS {
                    return Err(Failure::Invalid(format!("--paths must be >= {}", payd::MIN_VALIDATION_PATHS)));
                }
                opts.paths = paths;
            }
            validation::run_default_suite(&opts)?
        }
    };
    if let Some(dir) = &args.out {
        write_outputs(dir, &[("validation.csv", validation::report_csv(&outcomes))])?;
    }
    print!("{}", validation::render_table(&outcomes));
    if validation::all_passed(&outcomes) {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}
