//! Command-line front end.
//!
//! Every option can also come from a `key=value` config file given with
//! `--config`; flags on the command line take precedence.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::design::{design_asymmetric_pi, design_symmetric_pi, DesignError, Family};
use crate::functionals::{error_budget, DEFAULT_ZERO_TOLERANCE};
use crate::operator::{parse_matrix_blocks, Involution};
use crate::pulse::{parse_pulse_description, write_designed_pulse, DesignedPulse};
use crate::report::{budget_csv, deviation_csv, scaling_csv, scaling_gnuplot, ClassificationTable};
use crate::simulate::{
    delta_pulse_scaling, deviation_report, leading_order_agreement, relative_agreement, SimError,
    SystemModel, DEFAULT_MAX_FIT_RESIDUAL,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFICATION: i32 = 2;

/// Unitarity residual above which `simulate` reports a verification failure.
const UNITARITY_LIMIT: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Input { path: PathBuf, reason: String },
    #[error("design failed: {0}")]
    Design(DesignError),
    #[error(transparent)]
    Simulation(#[from] SimError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Design(DesignError::ConditionsNotMet(_)) => EXIT_VERIFICATION,
            _ => EXIT_USAGE,
        }
    }
}

impl From<DesignError> for CliError {
    fn from(e: DesignError) -> Self {
        CliError::Design(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Design,
    Budget,
    Simulate,
    Scaling,
    Table1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum SweepKind {
    /// `‖δP_Ω − η‖` under a joint shrink of τp and ε.
    #[default]
    LeadingOrder,
    /// `‖δP_Ω − η‖ / ‖δP_Ω‖` under a joint shrink.
    Relative,
    /// `‖U − target‖` with only τp shrinking.
    DeltaPulse,
}

#[derive(Debug, Parser)]
#[command(
    name = "shapedpulse",
    version,
    about = "Error budgets, design and verification of shaped control pulses"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Design a first-order pi pulse and write it in the pulse file format.
    Design(Options),
    /// Write the ten error functionals as CSV.
    Budget(Options),
    /// Simulate one pulse and write deviation norms.
    Simulate(Options),
    /// Run a scaling sweep and write the series as CSV.
    Scaling(Options),
    /// Classify the functionals of the designed symmetric and asymmetric pulses.
    Table1(Options),
}

#[derive(Debug, Args, Default, Clone)]
pub struct Options {
    /// Pulse file (mutually exclusive with --family).
    #[arg(long)]
    pub pulse: Option<PathBuf>,
    /// Built-in pulse family.
    #[arg(long, value_parser = parse_family)]
    pub family: Option<Family>,
    /// Asymmetric family index.
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long = "tau-p")]
    pub tau_p: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `default` or a file with three matrix blocks: H, Omega, Omega'.
    #[arg(long)]
    pub model: Option<String>,
    /// Shrink factor per sweep step.
    #[arg(long)]
    pub shrink: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, value_enum)]
    pub sweep: Option<SweepKind>,
    /// Emit a gnuplot script instead of CSV (scaling only).
    #[arg(long)]
    pub gnuplot: bool,
    /// key=value file supplying defaults for any of the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse()
}

#[derive(Debug, Clone, PartialEq)]
pub enum PulseSource {
    File(PathBuf),
    Builtin { family: Family, n: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSelector {
    Default,
    File(PathBuf),
}

/// Fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub pulse: PulseSource,
    pub tau_p: Option<f64>,
    pub epsilon: Option<f64>,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub model: ModelSelector,
    pub shrink: f64,
    pub steps: usize,
    pub sweep: SweepKind,
    pub gnuplot: bool,
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses `key = value` lines; `#` comments and blank lines are skipped.
/// Keys are normalized to use `-`.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value", i + 1))?;
        out.insert(key.trim().replace('_', "-"), value.trim().to_string());
    }
    Ok(out)
}

fn merge_config(
    mut opts: Options,
    config: &BTreeMap<String, String>,
    path: &Path,
) -> Result<Options, CliError> {
    fn value<T: std::str::FromStr>(
        map: &BTreeMap<String, String>,
        key: &str,
        path: &Path,
    ) -> Result<Option<T>, CliError> {
        map.get(key)
            .map(|v| {
                v.parse().map_err(|_| CliError::Input {
                    path: path.to_path_buf(),
                    reason: format!("invalid value {v:?} for {key}"),
                })
            })
            .transpose()
    }
    const KNOWN: [&str; 11] = [
        "pulse", "family", "n", "tau-p", "epsilon", "tol", "out", "model", "shrink", "steps",
        "sweep",
    ];
    if let Some(unknown) = config
        .keys()
        .find(|k| !KNOWN.contains(&k.as_str()) && *k != "gnuplot")
    {
        return Err(CliError::Input {
            path: path.to_path_buf(),
            reason: format!("unknown key {unknown:?}"),
        });
    }
    opts.pulse = opts.pulse.or(value(config, "pulse", path)?);
    opts.family = opts.family.or(value(config, "family", path)?);
    opts.n = opts.n.or(value(config, "n", path)?);
    opts.tau_p = opts.tau_p.or(value(config, "tau-p", path)?);
    opts.epsilon = opts.epsilon.or(value(config, "epsilon", path)?);
    opts.tol = opts.tol.or(value(config, "tol", path)?);
    opts.out = opts.out.or(value(config, "out", path)?);
    opts.model = opts.model.or(value(config, "model", path)?);
    opts.shrink = opts.shrink.or(value(config, "shrink", path)?);
    opts.steps = opts.steps.or(value(config, "steps", path)?);
    if opts.sweep.is_none() {
        if let Some(v) = config.get("sweep") {
            opts.sweep = Some(
                SweepKind::from_str(v, true).map_err(|reason| CliError::Input {
                    path: path.to_path_buf(),
                    reason,
                })?,
            );
        }
    }
    opts.gnuplot = opts.gnuplot || value::<bool>(config, "gnuplot", path)?.unwrap_or(false);
    Ok(opts)
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let (command, opts) = match cli.command {
            CommandArgs::Design(o) => (Command::Design, o),
            CommandArgs::Budget(o) => (Command::Budget, o),
            CommandArgs::Simulate(o) => (Command::Simulate, o),
            CommandArgs::Scaling(o) => (Command::Scaling, o),
            CommandArgs::Table1(o) => (Command::Table1, o),
        };
        let opts = match opts.config.clone() {
            Some(path) => {
                let text = read_text(&path)?;
                let map = parse_config_file(&text).map_err(|reason| CliError::Input {
                    path: path.clone(),
                    reason,
                })?;
                merge_config(opts, &map, &path)?
            }
            None => opts,
        };
        Self::from_options(command, opts)
    }

    pub fn from_options(command: Command, opts: Options) -> Result<Self, CliError> {
        let pulse = match (opts.pulse, opts.family) {
            (Some(_), Some(_)) => {
                return Err(CliError::Usage(
                    "--pulse and --family are mutually exclusive".into(),
                ));
            }
            (Some(path), None) => PulseSource::File(path),
            (None, family) => PulseSource::Builtin {
                family: family.unwrap_or(Family::Symmetric),
                n: opts.n.unwrap_or(1),
            },
        };
        if command == Command::Design && matches!(pulse, PulseSource::File(_)) {
            return Err(CliError::Usage("design takes --family, not --pulse".into()));
        }
        let tol = opts.tol.unwrap_or(DEFAULT_ZERO_TOLERANCE);
        if !(tol > 0.0) {
            return Err(CliError::Usage(format!(
                "--tol must be positive, got {tol}"
            )));
        }
        if let Some(t) = opts.tau_p {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Usage(format!(
                    "--tau-p must be positive, got {t}"
                )));
            }
        }
        if opts.n == Some(0) {
            return Err(CliError::Usage("--n must be >= 1".into()));
        }
        let model = match opts.model.as_deref() {
            None | Some("default") => ModelSelector::Default,
            Some(path) => ModelSelector::File(PathBuf::from(path)),
        };
        Ok(Self {
            command,
            pulse,
            tau_p: opts.tau_p,
            epsilon: opts.epsilon,
            tol,
            out: opts.out,
            model,
            shrink: opts.shrink.unwrap_or(0.5),
            steps: opts.steps.unwrap_or(6),
            sweep: opts.sweep.unwrap_or_default(),
            gnuplot: opts.gnuplot,
        })
    }

    /// ε for this run: 1 for analytic subcommands, 10⁻³ for simulations.
    pub fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or(match self.command {
            Command::Simulate | Command::Scaling => 1e-3,
            _ => 1.0,
        })
    }
}

/// Result of a run that completed; `failure` carries a verification message.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub failure: Option<String>,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self {
            text,
            failure: None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.failure.is_some() {
            EXIT_VERIFICATION
        } else {
            EXIT_OK
        }
    }
}

pub fn load_model(selector: &ModelSelector, epsilon: f64) -> Result<SystemModel, CliError> {
    match selector {
        ModelSelector::Default => Ok(SystemModel::default_model(epsilon)),
        ModelSelector::File(path) => {
            let text = read_text(path)?;
            let input_err = |reason: String| CliError::Input {
                path: path.clone(),
                reason,
            };
            let mut blocks = parse_matrix_blocks(&text).map_err(|e| input_err(e.to_string()))?;
            if blocks.len() != 3 {
                return Err(input_err(format!(
                    "model file needs three matrices (H, Omega, Omega'), found {}",
                    blocks.len()
                )));
            }
            let omega_prime = blocks.pop().expect("three blocks");
            let omega = Involution::new(blocks.pop().expect("three blocks"))
                .map_err(|e| input_err(e.to_string()))?;
            let h = blocks.pop().expect("three blocks");
            SystemModel::new(h, omega, omega_prime, epsilon).map_err(|e| input_err(e.to_string()))
        }
    }
}

fn builtin_pulse(family: Family, n: u32, tau_p: f64) -> Result<DesignedPulse, CliError> {
    Ok(match family {
        Family::Symmetric => design_symmetric_pi(tau_p)?,
        Family::Asymmetric => design_asymmetric_pi(tau_p, n)?,
    })
}

fn resolve_pulse(config: &RunConfig, default_tau_p: f64) -> Result<DesignedPulse, CliError> {
    match &config.pulse {
        PulseSource::File(path) => {
            let text = read_text(path)?;
            parse_pulse_description(&text)
                .and_then(|d| d.into_designed())
                .map_err(|e| CliError::Input {
                    path: path.clone(),
                    reason: e.to_string(),
                })
        }
        PulseSource::Builtin { family, n } => {
            builtin_pulse(*family, *n, config.tau_p.unwrap_or(default_tau_p))
        }
    }
}

/// Executes one resolved invocation and returns the text to emit.
pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    let eps = config.epsilon();
    match config.command {
        Command::Design => {
            let pulse = resolve_pulse(config, 1.0)?;
            Ok(Outcome::ok(write_designed_pulse(&pulse)))
        }
        Command::Budget => {
            let pulse = resolve_pulse(config, 1.0)?;
            Ok(Outcome::ok(budget_csv(&[error_budget(&pulse, eps)])))
        }
        Command::Simulate => {
            let model = load_model(&config.model, eps)?;
            let pulse = resolve_pulse(config, model.default_tau_p())?;
            let report = deviation_report(&model, &pulse)?;
            let failure = (report.unitarity_residual > UNITARITY_LIMIT).then(|| {
                format!(
                    "unitarity residual {:e} exceeds {UNITARITY_LIMIT:e}",
                    report.unitarity_residual
                )
            });
            Ok(Outcome {
                text: deviation_csv(&report),
                failure,
            })
        }
        Command::Scaling => {
            let model = load_model(&config.model, eps)?;
            let pulse = resolve_pulse(config, model.default_tau_p())?;
            let (series, label) = match config.sweep {
                SweepKind::LeadingOrder => (
                    leading_order_agreement(&model, &pulse, config.shrink, config.steps)?,
                    "|dP - eta|",
                ),
                SweepKind::Relative => (
                    relative_agreement(&model, &pulse, config.shrink, config.steps)?,
                    "|dP - eta| / |dP|",
                ),
                SweepKind::DeltaPulse => (
                    delta_pulse_scaling(&model, &pulse, config.shrink, config.steps)?,
                    "|U - target|",
                ),
            };
            let failure = series
                .check_residual(DEFAULT_MAX_FIT_RESIDUAL)
                .err()
                .map(|e| e.to_string());
            let text = if config.gnuplot {
                scaling_gnuplot(&series, label)
            } else {
                scaling_csv(&series)
            };
            Ok(Outcome { text, failure })
        }
        Command::Table1 => {
            let tau_p = config.tau_p.unwrap_or(1.0);
            let n = match config.pulse {
                PulseSource::Builtin { n, .. } => n,
                PulseSource::File(_) => {
                    return Err(CliError::Usage(
                        "table1 uses the built-in designs; drop --pulse".into(),
                    ));
                }
            };
            let table = ClassificationTable::build(
                &design_symmetric_pi(tau_p)?,
                &design_asymmetric_pi(tau_p, n)?,
                eps,
                config.tol,
            );
            let failure = (!table.matches_expected()).then(|| {
                let names: Vec<&str> = table.mismatches().iter().map(|f| f.name()).collect();
                format!(
                    "classification differs from the expected pattern for: {}",
                    names.join(", ")
                )
            });
            Ok(Outcome {
                text: table.render(),
                failure,
            })
        }
    }
}

/// Parses arguments, runs, writes output, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = RunConfig::from_cli(cli).and_then(|config| {
        let outcome = run(&config)?;
        match &config.out {
            Some(path) => fs::write(path, &outcome.text).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?,
            None => print!("{}", outcome.text),
        }
        Ok(outcome)
    });
    match outcome {
        Ok(outcome) => {
            if let Some(msg) = &outcome.failure {
                eprintln!("verification failed: {msg}");
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
