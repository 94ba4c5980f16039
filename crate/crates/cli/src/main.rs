//! Command-line front end: laser traces, transmitter sweeps, and one-shot
//! key-rate evaluation from detection tallies. All tables are CSV with a
//! header row; `--out` defaults to stdout.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wtqkd::harness::{self, ExperimentConfig, Fidelity, SweepRow};
use wtqkd::keyrate::skr_from_tally;
use wtqkd::{DetectionTally, Result};

#[derive(Parser)]
#[command(name = "wtqkd", version, about = "Tunable QKD transmitter simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// TOML experiment config; defaults are used when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Override the config fidelity.
    #[arg(long, value_enum, value_name = "MODE")]
    fidelity: Option<FidelityArg>,
    /// Output path; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FidelityArg {
    Analytic,
    Mc,
}

impl From<FidelityArg> for Fidelity {
    fn from(arg: FidelityArg) -> Self {
        match arg {
            FidelityArg::Analytic => Fidelity::Analytic,
            FidelityArg::Mc => Fidelity::MonteCarlo,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the gain-switched laser and write the field trace.
    SimulateLaser {
        #[command(flatten)]
        common: CommonOpts,
        /// Injection power in microwatts.
        #[arg(long, value_name = "UW")]
        injection_uw: Option<f64>,
        /// Injection wavelength in nanometres.
        #[arg(long, value_name = "NM")]
        wavelength_nm: Option<f64>,
    },
    /// Sweep injection power at fixed attenuation.
    SweepInjection {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Sweep channel attenuation at the optimized operating point.
    SweepAttenuation {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Sweep wavelength, re-locking the transmitter at each channel.
    SweepWavelength {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Evaluate the secure key rate from a detection tally CSV.
    Skr {
        #[command(flatten)]
        common: CommonOpts,
        /// Tally CSV with columns class,basis,sent,detected,errors.
        #[arg(value_name = "TALLY_CSV")]
        tally: PathBuf,
    },
}

fn load(common: &CommonOpts) -> Result<ExperimentConfig<f64>> {
    let mut config = match &common.config {
        Some(path) => harness::load_config::<f64>(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(fidelity) = common.fidelity {
        config.fidelity = fidelity.into();
    }
    config.validate()?;
    Ok(config)
}

fn with_output<F>(out: &Option<PathBuf>, write: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| {
                wtqkd::Error::config(path.display().to_string(), e.to_string())
            })?;
            let mut w = BufWriter::new(file);
            write(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write(&mut w)
        }
    }
}

fn emit_rows(common: &CommonOpts, variable: &str, rows: &[SweepRow<f64>]) -> Result<()> {
    with_output(&common.out, |w| harness::emit_csv(variable, rows, w))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::SimulateLaser {
            common,
            injection_uw,
            wavelength_nm,
        } => {
            let config = load(&common)?;
            let power = injection_uw.unwrap_or(config.injection.power_uw);
            let wavelength = wavelength_nm.unwrap_or(config.injection.wavelength_nm);
            let trace =
                harness::bridge_trace(&config, power, wavelength, config.sim.trace_periods)?;
            with_output(&common.out, |w| trace.write_csv(w))
        }
        Command::SweepInjection { common } => {
            let config = load(&common)?;
            let rows = harness::run_injection_sweep(&config)?;
            emit_rows(&common, "injection_uw", &rows)
        }
        Command::SweepAttenuation { common } => {
            let config = load(&common)?;
            let rows = harness::run_attenuation_sweep(&config)?;
            emit_rows(&common, "attenuation_db", &rows)
        }
        Command::SweepWavelength { common } => {
            let config = load(&common)?;
            let rows = harness::run_wavelength_sweep(&config)?;
            emit_rows(&common, "wavelength_nm", &rows)
        }
        Command::Skr { common, tally } => {
            let config = load(&common)?;
            let file = File::open(&tally).map_err(|e| {
                wtqkd::Error::config(tally.display().to_string(), e.to_string())
            })?;
            let tally = DetectionTally::read_csv(file)?;
            let result = skr_from_tally(
                &tally,
                &config.protocol,
                config.protocol.symbol_rate_ghz,
                config.keyrate.ec_efficiency,
            )?;
            with_output(&common.out, |w| result.write_key_value(w))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
