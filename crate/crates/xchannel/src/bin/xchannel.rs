//! Command-line simulator for Latin-square interference alignment on the
//! K x 3 MIMO X channel.
//!
//! Exit codes: 0 on success, 1 on validation failure, 2 on config errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use xchannel::channel::draw_channel;
use xchannel::latin::enumerate_fixed_first_row;
use xchannel::select::Objective;
use xchannel::sim::{
    correlation_csv, dump_channel_csv, run_correlation, run_ser, run_sumrate, run_validate,
    ser_csv, sumrate_csv, write_csv, SchemeScope, SimConfig, SimError, StrategyKind,
};

#[derive(Parser)]
#[command(name = "xchannel", version, about = "Latin-square interference alignment simulator for the K x 3 MIMO X channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Optimal,
    Cn,
    Ocn,
    Random,
}

impl From<StrategyArg> for StrategyKind {
    fn from(a: StrategyArg) -> Self {
        match a {
            StrategyArg::Optimal => StrategyKind::Optimal,
            StrategyArg::Cn => StrategyKind::Cn,
            StrategyArg::Ocn => StrategyKind::Ocn,
            StrategyArg::Random => StrategyKind::Random,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Minmax,
    Sumrate,
}

impl From<ObjectiveArg> for Objective {
    fn from(a: ObjectiveArg) -> Self {
        match a {
            ObjectiveArg::Minmax => Objective::MinMaxSnr,
            ObjectiveArg::Sumrate => Objective::SumRate,
        }
    }
}

fn parse_schemes(s: &str) -> Result<SchemeScope, String> {
    match s {
        "first" => Ok(SchemeScope::First),
        "all" => Ok(SchemeScope::All),
        n => n
            .parse::<usize>()
            .map(SchemeScope::Count)
            .map_err(|_| format!("expected first, all, or a count, got '{n}'")),
    }
}

/// Flags shared by every simulation subcommand.
#[derive(Args)]
struct SimArgs {
    /// Number of transmitters (3..=6)
    #[arg(long)]
    k: usize,
    /// Base RNG seed; all randomness is keyed off it
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Independent channel draws
    #[arg(long, default_value_t = 100)]
    trials: u64,
    /// QPSK symbol periods per draw per SNR point
    #[arg(long, default_value_t = 1000)]
    symbols: u64,
    /// SNR grid start, total per-transmitter power in dB over unit noise
    #[arg(long, default_value_t = 0.0)]
    snr_start: f64,
    /// SNR grid stop (inclusive)
    #[arg(long, default_value_t = 30.0)]
    snr_stop: f64,
    /// SNR grid step
    #[arg(long, default_value_t = 5.0)]
    snr_step: f64,
    /// Selection strategy
    #[arg(long, value_enum, default_value_t = StrategyArg::Optimal)]
    strategy: StrategyArg,
    /// Selection objective
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Minmax)]
    objective: ObjectiveArg,
    /// Shortlist / random sample size (cn, ocn, random strategies)
    #[arg(long, default_value_t = 0)]
    u: u64,
    /// Scheme scope: first, all, or a count
    #[arg(long, value_parser = parse_schemes, default_value = "first")]
    schemes: SchemeScope,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the seed's first channel realization as CSV
    #[arg(long)]
    dump_channel: Option<PathBuf>,
    /// Allow exhaustive search at K >= 5
    #[arg(long)]
    force_exhaustive: bool,
    /// Disable noise injection (exactness debugging)
    #[arg(long)]
    no_noise: bool,
}

impl SimArgs {
    fn config(&self) -> SimConfig {
        SimConfig {
            k: self.k,
            seed: self.seed,
            snr_db_start: self.snr_start,
            snr_db_stop: self.snr_stop,
            snr_db_step: self.snr_step,
            trials: self.trials,
            symbols: self.symbols,
            strategy: self.strategy.into(),
            objective: self.objective.into(),
            u: self.u,
            schemes: self.schemes,
            noise: !self.no_noise,
            force_exhaustive: self.force_exhaustive,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Construct beamformer sets and check the alignment conditions
    Validate {
        #[command(flatten)]
        sim: SimArgs,
        /// Corrupt one beamformer per set; the checker must flag every set
        #[arg(long)]
        inject_corruption: bool,
    },
    /// Symbol-error-rate sweep over the SNR grid
    Ser {
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Ergodic sum-rate sweep over the SNR grid
    Sumrate {
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Per-set surrogate-vs-true correlation study on a single draw
    Correlate {
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Count Latin squares with fixed first row
    EnumerateLatin {
        #[arg(long)]
        k: usize,
        /// Print one square per line as comma-separated symbol rows
        #[arg(long)]
        dump: bool,
    },
}

fn emit(out: &Option<PathBuf>, contents: &str) -> Result<(), SimError> {
    match out {
        Some(path) => write_csv(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn maybe_dump_channel(sim: &SimArgs) -> Result<(), SimError> {
    if let Some(path) = &sim.dump_channel {
        let ch = draw_channel(sim.k, sim.seed, 0);
        write_csv(path, &dump_channel_csv(&ch))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, SimError> {
    match cli.command {
        Command::Validate {
            sim,
            inject_corruption,
        } => {
            // validation needs no selection strategy; accept the default
            let cfg = SimConfig { u: 1, ..sim.config() };
            maybe_dump_channel(&sim)?;
            let summary = run_validate(&cfg, inject_corruption)?;
            println!(
                "checked {} sets over {} draws ({} skipped): {} failures, max residual {:.3e}{}",
                summary.sets_checked,
                summary.draws,
                summary.skipped_draws,
                summary.failures,
                summary.max_residual,
                if summary.injected { " [corruption injected]" } else { "" },
            );
            if summary.pass() {
                println!("validation PASS");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("validation FAIL");
                Ok(ExitCode::from(1))
            }
        }
        Command::Ser { sim } => {
            let cfg = sim.config();
            maybe_dump_channel(&sim)?;
            let out = run_ser(&cfg)?;
            if out.skipped_draws > 0 {
                eprintln!("warning: {} draws skipped", out.skipped_draws);
            }
            emit(&sim.out, &ser_csv(&cfg, &out))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sumrate { sim } => {
            let cfg = sim.config();
            maybe_dump_channel(&sim)?;
            let out = run_sumrate(&cfg)?;
            if out.skipped_draws > 0 {
                eprintln!("warning: {} draws skipped", out.skipped_draws);
            }
            emit(&sim.out, &sumrate_csv(&cfg, &out))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Correlate { sim } => {
            let cfg = sim.config();
            maybe_dump_channel(&sim)?;
            let out = run_correlation(&cfg)?;
            emit(&sim.out, &correlation_csv(&cfg, &out))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::EnumerateLatin { k, dump } => {
            let squares = enumerate_fixed_first_row(k).map_err(SimError::Latin)?;
            println!("{}", squares.len());
            if dump {
                for s in &squares {
                    println!("{}", s.csv_row());
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
