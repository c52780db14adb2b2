use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use decay_core::expcli::{self, config::parse_config_text, ExperimentConfig};
use decay_core::DecayError;

/// Survival, history decomposition and detector experiments for exactly
/// solvable quantum decay models. Tables are written as CSV.
#[derive(Parser)]
#[command(name = "decay", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Survival amplitude and probability on a time grid
    Survival(Settings),
    /// [PP], interference and [QQ] terms of S(T) over intermediate times
    Decompose(Settings),
    /// History decomposition of the nonescape probability (delta model)
    Nonescape(Settings),
    /// Crossover time and fitted decay rate for several absorber strengths
    DetectorSweep(Settings),
    /// Resonance poles and localized states
    Poles(Settings),
    /// Invariant and cross-check suite with measured residuals
    Validate(Settings),
}

/// Flags override values read from `--config`.
#[derive(Args)]
struct Settings {
    /// Flat `key = value` configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// resonance, delta, detector or oracle
    #[arg(long)]
    model: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    eta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    v0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pole_re: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pole_im: Option<String>,
    /// Final time
    #[arg(long = "T", allow_hyphen_values = true)]
    final_time: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t_min: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t_max: Option<String>,
    #[arg(long)]
    t_points: Option<String>,
    /// Logarithmic time spacing
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    t_log: Option<String>,
    #[arg(long)]
    basis_size: Option<String>,
    /// Comma-separated absorber strengths for detector-sweep
    #[arg(long)]
    v0_values: Option<String>,
    #[arg(long)]
    pole_count: Option<String>,
    #[arg(long)]
    nonescape_tolerance: Option<String>,
    #[arg(long)]
    grid_spacing: Option<String>,
    #[arg(long)]
    grid_length: Option<String>,
    #[arg(long)]
    time_step: Option<String>,
    #[arg(long)]
    absorbing_layer: Option<String>,
    /// Tolerance override for a validate check, as `name=value`
    #[arg(long = "tol")]
    tolerances: Vec<String>,
    /// Output file (standard output when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Settings {
    fn flag_pairs(&self) -> Result<Vec<(String, String)>, DecayError> {
        let mut pairs = Vec::new();
        let fields = [
            ("model", &self.model),
            ("eta", &self.eta),
            ("v0", &self.v0),
            ("pole_re", &self.pole_re),
            ("pole_im", &self.pole_im),
            ("T", &self.final_time),
            ("t_min", &self.t_min),
            ("t_max", &self.t_max),
            ("t_points", &self.t_points),
            ("t_log", &self.t_log),
            ("basis_size", &self.basis_size),
            ("v0_values", &self.v0_values),
            ("pole_count", &self.pole_count),
            ("nonescape_tolerance", &self.nonescape_tolerance),
            ("grid_spacing", &self.grid_spacing),
            ("grid_length", &self.grid_length),
            ("time_step", &self.time_step),
            ("absorbing_layer", &self.absorbing_layer),
        ];
        for (key, value) in fields {
            if let Some(v) = value {
                pairs.push((key.to_string(), v.clone()));
            }
        }
        for t in &self.tolerances {
            let Some((name, value)) = t.split_once('=') else {
                return Err(DecayError::Configuration(format!("--tol expects name=value, got '{t}'")));
            };
            pairs.push((format!("tol.{}", name.trim()), value.to_string()));
        }
        if let Some(out) = &self.out {
            pairs.push(("out".to_string(), out.display().to_string()));
        }
        Ok(pairs)
    }

    fn resolve(&self) -> Result<ExperimentConfig, DecayError> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| DecayError::Configuration(format!("cannot read config {}: {e}", path.display())))?;
                parse_config_text(&text)?
            }
            None => Vec::new(),
        };
        let flags = self.flag_pairs()?;
        ExperimentConfig::from_layers([file.as_slice(), flags.as_slice()])
    }
}

fn open_output(cfg: &ExperimentConfig) -> Result<Box<dyn Write>, DecayError> {
    Ok(match &cfg.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| DecayError::Configuration(format!("cannot create {}: {e}", path.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Runs one command; `Ok(false)` means a validation check failed.
fn run(command: &Command) -> Result<bool, DecayError> {
    let settings = match command {
        Command::Survival(s)
        | Command::Decompose(s)
        | Command::Nonescape(s)
        | Command::DetectorSweep(s)
        | Command::Poles(s)
        | Command::Validate(s) => s,
    };
    let cfg = settings.resolve()?;
    let mut passed = true;
    let mut out = open_output(&cfg)?;
    match command {
        Command::Survival(_) => expcli::write_survival(&expcli::run_survival(&cfg)?, &mut out)?,
        Command::Decompose(_) => expcli::write_decomposition(&expcli::run_decomposition(&cfg)?, &mut out)?,
        Command::Nonescape(_) => expcli::write_nonescape(&expcli::run_nonescape(&cfg)?, &mut out)?,
        Command::DetectorSweep(_) => expcli::write_sweep(&expcli::run_detector_sweep(&cfg)?, &mut out)?,
        Command::Poles(_) => expcli::write_poles(&expcli::run_poles(&cfg)?, &mut out)?,
        Command::Validate(_) => {
            let checks = expcli::run_validate(&cfg)?;
            passed = checks.iter().all(|c| c.passed());
            expcli::write_report(&checks, &mut out)?;
            for c in checks.iter().filter(|c| !c.passed()) {
                eprintln!("decay: check {} failed (residual {:e}, tolerance {:e})", c.name, c.residual, c.tolerance);
            }
        }
    }
    out.flush()?;
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("decay: {e}");
            match e {
                DecayError::Configuration(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
