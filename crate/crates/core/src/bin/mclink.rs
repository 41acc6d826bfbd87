//! Command-line front end for the link-level simulator.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime numerical error,
//! 1 anything else (I/O and friends).

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use mclink::error::Error;
use mclink::metrics::oob_ratio;
use mclink::sim::{
    run_complexity, run_link, run_papr, run_psd, sweep, ResolvedConfig, SimConfig, SweepAxis,
};

#[derive(Parser)]
#[command(
    name = "mclink",
    version,
    about = "Multi-carrier waveform link-level simulator (OFDM, SC-FDMA, GFDM, FBMC)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSVs, resolved config, and manifest.
    #[arg(long)]
    out: PathBuf,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's trial count.
    #[arg(long)]
    trials: Option<u64>,
    /// Worker threads (0 = auto).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    Snr,
    Antennas,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo error-rate run over the configured SNR grid.
    Simulate(CommonArgs),
    /// PAPR CCDF at the transmit side.
    Papr(CommonArgs),
    /// Welch PSD with out-of-band leakage ratio.
    Psd(CommonArgs),
    /// Analytic complex-multiplication counts.
    Complexity(CommonArgs),
    /// Sweep over SNR points or antenna counts.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum)]
        axis: Axis,
    },
}

fn load(common: &CommonArgs) -> Result<ResolvedConfig, Error> {
    let mut cfg = SimConfig::from_path(&common.config)?.resolve()?;
    if let Some(seed) = common.seed {
        cfg = cfg.with_seed(seed);
    }
    if let Some(trials) = common.trials {
        cfg = cfg.with_trials(trials);
    }
    Ok(cfg)
}

fn in_pool<T>(threads: usize, f: impl FnOnce() -> Result<T, Error> + Send) -> Result<T, Error>
where
    T: Send,
{
    if threads == 0 {
        f()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
        pool.install(f)
    }
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Simulate(common) => {
            let cfg = load(&common)?;
            let points = in_pool(common.threads, || run_link(&cfg, &common.out))?;
            for p in &points {
                println!(
                    "{} B={} snr={} dB: ser={:.4e} ber={:.4e} fer={:.4e}",
                    p.waveform,
                    p.b,
                    p.snr_db,
                    p.counters.ser(),
                    p.counters.ber(),
                    p.counters.fer()
                );
            }
        }
        Command::Papr(common) => {
            let cfg = load(&common)?;
            let rec = in_pool(common.threads, || run_papr(&cfg, &common.out))?;
            println!(
                "{}: {} frames, PAPR at CCDF 1e-3: {:.2} dB",
                cfg.waveform,
                rec.frame_count(),
                rec.threshold_at(1e-3)?
            );
        }
        Command::Psd(common) => {
            let cfg = load(&common)?;
            let rec = in_pool(common.threads, || run_psd(&cfg, &common.out))?;
            println!("{}: OOB ratio {:.2} dB", cfg.waveform, oob_ratio(&rec)?);
        }
        Command::Complexity(common) => {
            let cfg = load(&common)?;
            run_complexity(&cfg, &common.out)?;
            println!("complexity.csv written to {}", common.out.display());
        }
        Command::Sweep { common, axis } => {
            let cfg = load(&common)?;
            let axis = match axis {
                Axis::Snr => SweepAxis::Snr,
                Axis::Antennas => SweepAxis::Antennas,
            };
            let points = in_pool(common.threads, || sweep(&cfg, &common.out, axis))?;
            for p in &points {
                println!(
                    "{} B={} snr={} dB: ser={:.4e} ber={:.4e} fer={:.4e}",
                    p.waveform,
                    p.b,
                    p.snr_db,
                    p.counters.ser(),
                    p.counters.ber(),
                    p.counters.fer()
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::Config(_) | Error::InvalidArgument(_)) {
                ExitCode::from(2)
            } else if e.is_numerical() {
                ExitCode::from(3)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
