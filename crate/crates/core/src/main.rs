use std::fs::File;
use std::io::{self, BufWriter, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use smsmx::cli::{self, Overrides, RunSpec};
use smsmx::montecarlo::{run_sweep_with_progress, Progress};
use smsmx::{Detector, DEFAULT_ENUMERATION_CAP};

/// SM-SMX MIMO link simulator.
#[derive(Debug, Parser)]
#[command(name = "smsmx", version)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a BER sweep and write CSV results.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// SNR grid in dB, start:step:stop.
        #[arg(long, allow_hyphen_values = true)]
        snr: Option<String>,
        #[arg(long, value_parser = parse_detector)]
        detector: Option<Detector>,
    },
    /// Print the bit-to-transmit-vector mapping table.
    Table {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check a configuration file without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn parse_detector(s: &str) -> Result<Detector, String> {
    s.parse().map_err(|e: smsmx::Error| e.to_string())
}

fn load(path: &Path, overrides: &Overrides) -> Result<RunSpec, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    cli::parse_config_with_overrides(&text, overrides).map_err(|e| format!("{}: {e}", path.display()))
}

fn thread_pool() -> Result<rayon::ThreadPool, String> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("SMSMX_THREADS") {
        let threads: usize = v
            .trim()
            .parse()
            .map_err(|_| format!("SMSMX_THREADS must be a positive integer, got '{v}'"))?;
        if threads == 0 {
            return Err("SMSMX_THREADS must be a positive integer".into());
        }
        builder = builder.num_threads(threads);
    }
    builder.build().map_err(|e| e.to_string())
}

fn run(spec: RunSpec) -> Result<(), String> {
    let points = spec.points();
    let mut sink: Box<dyn Write> = match &spec.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| format!("{}: {e}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };

    let show = io::stderr().is_terminal();
    let hook = |p: &Progress| {
        if show {
            eprintln!(
                "[point {}] snr {} dB: {} frames, {} bit errors",
                p.point_index, p.snr_db, p.frames, p.bit_errors
            );
        }
    };
    let outcome = thread_pool()?.install(|| run_sweep_with_progress(&points, Some(&hook)));

    let (records, failure) = match outcome {
        Ok(records) => (records, None),
        Err(e) => (e.completed.clone(), Some(e.to_string())),
    };
    let rows: Vec<_> = points.into_iter().zip(records).collect();
    cli::emit_csv(&rows, &mut sink).map_err(|e| e.to_string())?;
    sink.flush().map_err(|e| e.to_string())?;
    failure.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = match args.command {
        Command::Run {
            config,
            seed,
            out,
            snr,
            detector,
        } => load(
            &config,
            &Overrides {
                seed,
                out,
                snr,
                detector,
            },
        )
        .and_then(run),
        Command::Table { config } => load(&config, &Overrides::default()).and_then(|spec| {
            let cfg = spec.config;
            let mut out = BufWriter::new(io::stdout().lock());
            cli::dump_mapping_table(&cfg, &cfg.constellation(), &mut out, DEFAULT_ENUMERATION_CAP)
                .and_then(|_| out.flush().map_err(Into::into))
                .map_err(|e| e.to_string())
        }),
        Command::Validate { config } => load(&config, &Overrides::default()).map(|spec| {
            let c = &spec.config;
            println!(
                "ok: {} n={} k={} m={} nr={} eta={} detector={} snr points={}",
                c.scheme(),
                c.n(),
                c.k(),
                c.m(),
                c.nr(),
                c.bits_per_frame(),
                spec.detector,
                spec.snr.points().len()
            );
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
