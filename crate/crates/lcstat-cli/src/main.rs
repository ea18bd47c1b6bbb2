//! `lcstat` command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use table::Format;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numeric(String),
    #[error(transparent)]
    Model(#[from] lcstat::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Model(e) if e.is_input() => "config",
            CliError::Numeric(_) | CliError::Model(_) => "numeric",
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => "io",
        }
    }

    /// 2 for configuration errors, 3 for everything else.
    fn exit_code(&self) -> u8 {
        if self.kind() == "config" {
            2
        } else {
            3
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lcstat", version, about = "Hard-rod liquid-crystal statics", args_override_self = true)]
struct Cli {
    /// `key = value` file; keys are long flag names, command-line flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write every table (and plot scripts) here instead of the primary table to stdout.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analytic excluded-volume moments, optionally against Monte Carlo.
    Moments(MomentsArgs),
    /// Uniaxial Bingham closure table r <-> S2 <-> S4.
    Bingham(BinghamArgs),
    /// Homogeneous isotropic and nematic branches against alpha.
    Equilibrium(EquilibriumArgs),
    /// Frank constants over an eta x alpha grid.
    Frank(FrankArgs),
    /// Smectic profile minimization at one concentration.
    Smectic(SmecticArgs),
    /// Phase sweep of the 1-D smectic model.
    PhaseDiagram(PhaseArgs),
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[arg(long)]
    pub eta: f64,
    /// Angles between the rod axes (comma list or start:stop:step).
    #[arg(long, default_value = "1.5707963267948966")]
    pub gamma: String,
    /// Monte Carlo samples per angle; 0 skips sampling.
    #[arg(long, default_value_t = 0)]
    pub mc_samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BinghamArgs {
    #[arg(long, default_value = "-20:100:1", allow_hyphen_values = true)]
    pub r: String,
    /// Tabulate at these S2 values instead of an r grid.
    #[arg(long, allow_hyphen_values = true)]
    pub s2: Option<String>,
}

#[derive(Debug, Args)]
pub struct EquilibriumArgs {
    #[arg(long, default_value = "1:60:0.5")]
    pub alpha: String,
}

#[derive(Debug, Args)]
pub struct FrankArgs {
    #[arg(long, default_value = "0.1,0.3,0.6,1.0")]
    pub eta: String,
    #[arg(long, default_value = "14:60:0.5")]
    pub alpha: String,
    /// Volume fraction; with `--D-angstrom` and `--T` each eta runs at
    /// alpha = 4 phi / eta and dimensional columns are added.
    #[arg(long)]
    pub phi: Option<f64>,
    #[arg(long = "D-angstrom")]
    pub d_angstrom: Option<f64>,
    #[arg(long = "T")]
    pub temperature: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum N3Preset {
    /// N31 = N32 = 0.00089
    Tuned,
    /// The printed eta polynomials.
    Printed,
}

#[derive(Debug, Args)]
pub struct SmecticModel {
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    #[arg(long, value_enum, default_value_t = N3Preset::Tuned)]
    pub n3_preset: N3Preset,
    #[arg(long)]
    pub n31: Option<f64>,
    #[arg(long)]
    pub n32: Option<f64>,
    #[arg(long, default_value = "8,8,8")]
    pub modes: String,
    #[arg(long, default_value_t = 1.0)]
    pub d_min: f64,
    #[arg(long, default_value_t = 2.5)]
    pub d_max: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub d_tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SmecticArgs {
    #[arg(long)]
    pub alpha: f64,
    /// Profile samples over one period.
    #[arg(long, default_value_t = 256)]
    pub points: usize,
    #[command(flatten)]
    pub model: SmecticModel,
}

#[derive(Debug, Args)]
pub struct PhaseArgs {
    #[arg(long, default_value = "10:40:1")]
    pub alpha: String,
    /// Bisect phase boundaries to this width; 0 disables.
    #[arg(long, default_value_t = 1e-4)]
    pub refine: f64,
    #[command(flatten)]
    pub model: SmecticModel,
}

fn report(err: &CliError, command: &str) -> ExitCode {
    let record = serde_json::json!({
        "status": "error",
        "kind": err.kind(),
        "exit_code": err.exit_code(),
        "command": command,
        "message": err.to_string(),
    });
    eprintln!("{record}");
    ExitCode::from(err.exit_code())
}

fn set_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("LCSTAT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("LCSTAT_THREADS = `{raw}` is not a positive count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    let args = match config::inject_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => return report(&e, ""),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            return report(&CliError::Config(first), "");
        }
    };
    let name = match &cli.command {
        Command::Moments(_) => "moments",
        Command::Bingham(_) => "bingham",
        Command::Equilibrium(_) => "equilibrium",
        Command::Frank(_) => "frank",
        Command::Smectic(_) => "smectic",
        Command::PhaseDiagram(_) => "phase-diagram",
    };
    let result = set_threads().and_then(|_| {
        let out = match &cli.command {
            Command::Moments(a) => commands::moments(a),
            Command::Bingham(a) => commands::bingham(a),
            Command::Equilibrium(a) => commands::equilibrium(a),
            Command::Frank(a) => commands::frank(a),
            Command::Smectic(a) => commands::smectic(a),
            Command::PhaseDiagram(a) => commands::phase_diagram(a),
        }?;
        table::emit(&out, cli.format, cli.out_dir.as_deref())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e, name),
    }
}
