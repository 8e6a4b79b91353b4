//! `tdes`: encrypt/decrypt files with 3DES in ECB mode, print key
//! schedules, run the bit-level kernel simulator with trace export, run the
//! self-test suite, or benchmark the engines.

use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use tdes::engine::{EngineKind, PaddingPolicy};
use tdes_cli::bench::{self, BenchOptions};
use tdes_cli::commands::{decrypt_file, encrypt_file, keygen_lines, simulate_file, CryptOptions};
use tdes_cli::keys::parse_key_triple;
use tdes_cli::selftest;

#[derive(Parser)]
#[command(
    name = "tdes",
    about = "3DES toolkit: reference, simulated, and block-parallel ECB engines",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encrypt a file block by block in ECB mode.
    Encrypt(CryptArgs),
    /// Decrypt a file block by block in ECB mode.
    Decrypt(CryptArgs),
    /// Print the 48 subkeys (16 per base key) as 12-hex-digit lines.
    Keygen(KeyArgs),
    /// Run the simulated kernels over a file and export the access trace.
    Simulate(SimulateArgs),
    /// Run the built-in verification suite; exits nonzero on any failure.
    Selftest,
    /// Benchmark the engines over exponentially growing payloads.
    Bench(BenchArgs),
}

#[derive(Args)]
struct KeyArgs {
    /// First base key, 16 hex digits.
    #[arg(long)]
    key1: String,
    /// Second base key, 16 hex digits.
    #[arg(long)]
    key2: String,
    /// Third base key, 16 hex digits.
    #[arg(long)]
    key3: String,
}

#[derive(Args)]
struct CryptArgs {
    #[command(flatten)]
    keys: KeyArgs,
    /// Input path.
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Output path.
    #[arg(long = "out", value_name = "PATH")]
    output: PathBuf,
    #[arg(long, value_enum, default_value_t = PaddingChoice::Pkcs7)]
    padding: PaddingChoice,
    #[arg(long, value_enum, default_value_t = EngineChoice::Parallel)]
    engine: EngineChoice,
    /// Worker threads for the parallel engine (default: available cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Blocks per work unit.
    #[arg(long = "chunk-blocks", default_value_t = 1024)]
    chunk_blocks: usize,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    keys: KeyArgs,
    /// Input path; must be a whole number of 8-byte blocks.
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Ciphertext output path.
    #[arg(long = "out", value_name = "PATH")]
    output: PathBuf,
    /// Trace output path (one line per access).
    #[arg(long, value_name = "PATH")]
    trace: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Block-count exponents: a range like 2..17 or a list like 4,8,12.
    #[arg(long, default_value = "2..17")]
    sizes: String,
    /// Timed repetitions per measurement (at least 3).
    #[arg(long, default_value_t = 5)]
    repeats: u32,
    /// Unmeasured warmup runs per measurement.
    #[arg(long, default_value_t = 1)]
    warmup: u32,
    /// Engines to measure, comma-separated.
    #[arg(long, default_value = "reference,parallel")]
    engines: String,
    /// Worker threads for the parallel engine (default: available cores).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long = "chunk-blocks", default_value_t = 1024)]
    chunk_blocks: usize,
    /// Write the CSV here instead of stdout.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PaddingChoice {
    Strict,
    Pkcs7,
}

impl From<PaddingChoice> for PaddingPolicy {
    fn from(c: PaddingChoice) -> Self {
        match c {
            PaddingChoice::Strict => PaddingPolicy::Strict,
            PaddingChoice::Pkcs7 => PaddingPolicy::Pkcs7,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineChoice {
    Reference,
    Simulated,
    Parallel,
}

impl From<EngineChoice> for EngineKind {
    fn from(c: EngineChoice) -> Self {
        match c {
            EngineChoice::Reference => EngineKind::Reference,
            EngineChoice::Simulated => EngineKind::Simulated,
            EngineChoice::Parallel => EngineKind::Parallel,
        }
    }
}

fn crypt_options(args: &CryptArgs) -> anyhow::Result<CryptOptions> {
    let keys = parse_key_triple(&args.keys.key1, &args.keys.key2, &args.keys.key3)?;
    let workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    anyhow::ensure!(workers >= 1, "--workers must be at least 1");
    anyhow::ensure!(args.chunk_blocks >= 1, "--chunk-blocks must be at least 1");
    Ok(CryptOptions {
        keys,
        padding: args.padding.into(),
        engine: args.engine.into(),
        workers,
        chunk_blocks: args.chunk_blocks,
    })
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Encrypt(args) => {
            let opts = crypt_options(&args)?;
            encrypt_file(&args.input, &args.output, &opts).context("encrypt failed")?;
        }
        Command::Decrypt(args) => {
            let opts = crypt_options(&args)?;
            decrypt_file(&args.input, &args.output, &opts).context("decrypt failed")?;
        }
        Command::Keygen(args) => {
            let keys = parse_key_triple(&args.key1, &args.key2, &args.key3)?;
            for line in keygen_lines(&keys) {
                println!("{line}");
            }
        }
        Command::Simulate(args) => {
            let keys = parse_key_triple(&args.keys.key1, &args.keys.key2, &args.keys.key3)?;
            simulate_file(&args.input, &args.output, &args.trace, &keys)
                .context("simulate failed")?;
        }
        Command::Selftest => {
            let checks = selftest::run_selftest();
            for check in &checks {
                if check.passed {
                    println!("PASS  {}", check.name);
                } else {
                    println!("FAIL  {} ({})", check.name, check.detail);
                }
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                anyhow::bail!("{failed} of {} checks failed", checks.len());
            }
            println!("all {} checks passed", checks.len());
        }
        Command::Bench(args) => {
            let opts = BenchOptions {
                size_exponents: bench::parse_sizes(&args.sizes).map_err(anyhow::Error::msg)?,
                repeats: args.repeats,
                warmup: args.warmup,
                engines: bench::parse_engines(&args.engines).map_err(anyhow::Error::msg)?,
                workers: args
                    .workers
                    .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
                chunk_blocks: args.chunk_blocks,
            };
            let records = bench::run_bench(&opts)?;
            let csv = bench::to_csv(&records);
            match args.csv {
                Some(path) => {
                    fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
                    eprintln!("wrote {} records to {}", records.len(), path.display());
                }
                None => print!("{csv}"),
            }
        }
    }
    Ok(())
}
