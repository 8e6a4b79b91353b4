//! Benchmark harness: exponentially increasing ECB payloads, warmup plus
//! repeated timed runs, medians, CSV output.
//!
//! Payloads and keys come from a fixed, documented seed so runs are
//! comparable across machines. Timing covers the full three-pass block
//! processing; the key schedule is computed once outside the timed region.

use std::fmt::Write as _;
use std::num::{ParseFloatError, ParseIntError};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tdes::bits::bytes_to_bits;
use tdes::des::{triple_schedule, Direction, TripleSchedule};
use tdes::engine::{ecb_process, EngineConfig, EngineError, EngineKind, PaddingPolicy, Payload};
use tdes::KeyTriple;

/// Seed for benchmark payload and key generation.
pub const PAYLOAD_SEED: u64 = 0x1334_5779_9BBC_DFF1;

pub const CSV_HEADER: &str = "engine,blocks,bytes,repeats,median_ms,throughput_mb_s";

/// One benchmark measurement row.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub engine: String,
    pub blocks: u64,
    pub bytes: u64,
    pub repeats: u32,
    pub median_ms: f64,
    pub throughput_mb_s: f64,
}

impl BenchRecord {
    pub fn new(engine: &str, blocks: u64, repeats: u32, median_ms: f64) -> Self {
        let bytes = blocks * 8;
        let throughput_mb_s = if median_ms > 0.0 {
            (bytes as f64 / (1024.0 * 1024.0)) / (median_ms / 1000.0)
        } else {
            f64::INFINITY
        };
        Self {
            engine: engine.to_string(),
            blocks,
            bytes,
            repeats,
            median_ms,
            throughput_mb_s,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.engine,
            self.blocks,
            self.bytes,
            self.repeats,
            self.median_ms,
            self.throughput_mb_s
        )
    }

    pub fn parse_csv_row(row: &str) -> Result<Self, RecordParseError> {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 6 {
            return Err(RecordParseError::FieldCount(fields.len()));
        }
        Ok(Self {
            engine: fields[0].to_string(),
            blocks: fields[1].parse()?,
            bytes: fields[2].parse()?,
            repeats: fields[3].parse()?,
            median_ms: fields[4].parse()?,
            throughput_mb_s: fields[5].parse()?,
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RecordParseError {
    #[error("expected 6 comma-separated fields, got {0}")]
    FieldCount(usize),
    #[error("bad integer field: {0}")]
    Int(#[from] ParseIntError),
    #[error("bad float field: {0}")]
    Float(#[from] ParseFloatError),
}

/// Renders records as CSV with the standard header.
pub fn to_csv(records: &[BenchRecord]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for record in records {
        let _ = writeln!(out, "{}", record.csv_row());
    }
    out
}

/// Parses CSV produced by [`to_csv`] back into records.
pub fn from_csv(text: &str) -> Result<Vec<BenchRecord>, RecordParseError> {
    text.lines()
        .skip_while(|l| *l == CSV_HEADER)
        .filter(|l| !l.is_empty())
        .map(BenchRecord::parse_csv_row)
        .collect()
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    /// Block-count exponents: a value `e` benchmarks `2^e` blocks.
    pub size_exponents: Vec<u32>,
    pub repeats: u32,
    pub warmup: u32,
    pub engines: Vec<EngineKind>,
    pub workers: usize,
    pub chunk_blocks: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            size_exponents: (2..=17).collect(),
            repeats: 5,
            warmup: 1,
            engines: vec![EngineKind::Reference, EngineKind::Parallel],
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            chunk_blocks: 1024,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid benchmark options: {0}")]
    InvalidOptions(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Deterministic benchmark keys, derived from the fixed seed.
pub fn bench_keys() -> KeyTriple {
    let mut rng = ChaCha8Rng::seed_from_u64(PAYLOAD_SEED);
    KeyTriple::new(
        bytes_to_bits(&rng.random::<[u8; 8]>()),
        bytes_to_bits(&rng.random::<[u8; 8]>()),
        bytes_to_bits(&rng.random::<[u8; 8]>()),
    )
}

/// Deterministic payload of `blocks` 64-bit blocks.
pub fn bench_payload(blocks: u64) -> Payload {
    let mut rng = ChaCha8Rng::seed_from_u64(PAYLOAD_SEED ^ blocks);
    let mut data = vec![0u8; (blocks * 8) as usize];
    rng.fill(&mut data[..]);
    Payload::from_aligned(data).expect("whole blocks by construction")
}

fn median(times_ms: &mut [f64]) -> f64 {
    times_ms.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
    let n = times_ms.len();
    if n % 2 == 1 {
        times_ms[n / 2]
    } else {
        (times_ms[n / 2 - 1] + times_ms[n / 2]) / 2.0
    }
}

/// Times one engine on one payload: `warmup` unmeasured runs, then
/// `repeats` measured ones.
pub fn measure(
    payload: &Payload,
    ts: &TripleSchedule,
    cfg: &EngineConfig,
    repeats: u32,
    warmup: u32,
) -> Result<f64, EngineError> {
    for _ in 0..warmup {
        let out = ecb_process(payload, ts, Direction::Encrypt, cfg)?;
        std::hint::black_box(out);
    }
    let mut times = Vec::with_capacity(repeats as usize);
    for _ in 0..repeats {
        let start = Instant::now();
        let out = ecb_process(payload, ts, Direction::Encrypt, cfg)?;
        std::hint::black_box(out);
        times.push(start.elapsed().as_secs_f64() * 1000.0);
    }
    Ok(median(&mut times))
}

/// Runs the full sweep: for each engine and size, a fresh deterministic
/// payload, warmup, timed repeats, one record per (engine, size) in stable
/// order.
pub fn run_bench(opts: &BenchOptions) -> Result<Vec<BenchRecord>, BenchError> {
    if opts.size_exponents.is_empty() {
        return Err(BenchError::InvalidOptions(
            "at least one size exponent".into(),
        ));
    }
    if opts.repeats < 3 {
        return Err(BenchError::InvalidOptions(format!(
            "repeats must be at least 3, got {}",
            opts.repeats
        )));
    }
    if opts.engines.is_empty() {
        return Err(BenchError::InvalidOptions("at least one engine".into()));
    }

    let ts = triple_schedule(&bench_keys());
    let mut records = Vec::with_capacity(opts.engines.len() * opts.size_exponents.len());
    for &engine in &opts.engines {
        let workers = if engine == EngineKind::Parallel {
            opts.workers
        } else {
            1
        };
        let cfg = EngineConfig::new(workers, opts.chunk_blocks, engine, PaddingPolicy::Strict);
        for &exponent in &opts.size_exponents {
            let blocks = 1u64 << exponent;
            let payload = bench_payload(blocks);
            let median_ms = measure(&payload, &ts, &cfg, opts.repeats, opts.warmup)?;
            records.push(BenchRecord::new(
                engine.label(),
                blocks,
                opts.repeats,
                median_ms,
            ));
        }
    }
    Ok(records)
}

/// Parses a sizes argument: either an inclusive exponent range `a..b` or a
/// comma-separated list of exponents.
pub fn parse_sizes(text: &str) -> Result<Vec<u32>, String> {
    let parse_one = |s: &str| -> Result<u32, String> {
        s.trim()
            .parse::<u32>()
            .map_err(|e| format!("bad exponent {s:?}: {e}"))
    };
    if let Some((lo, hi)) = text.split_once("..") {
        let lo = parse_one(lo)?;
        let hi = parse_one(hi)?;
        if lo > hi {
            return Err(format!("empty range {text:?}"));
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',').map(parse_one).collect()
}

/// Parses an engines argument: comma-separated engine names.
pub fn parse_engines(text: &str) -> Result<Vec<EngineKind>, String> {
    text.split(',')
        .map(|s| match s.trim() {
            "reference" => Ok(EngineKind::Reference),
            "simulated" => Ok(EngineKind::Simulated),
            "parallel" => Ok(EngineKind::Parallel),
            other => Err(format!("unknown engine {other:?}")),
        })
        .collect()
}
