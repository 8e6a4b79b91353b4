//! Block-parallel ECB processing over independent 64-bit blocks, plus
//! padding.
//!
//! Work is split into chunks of whole blocks and dealt round-robin to a
//! fixed set of workers. Schedules are computed once and shared read-only;
//! each chunk writes a disjoint output region, so the result is a pure
//! function of the inputs no matter how the work is distributed.

use crate::bits::{bits_to_bytes, bytes_to_bits, BitVector};
use crate::des::{tdes_decrypt_block, tdes_encrypt_block, Direction, TripleSchedule};
use crate::sim::{sim_tdes, SimError, TraceMode};

/// Which block-processing backend does the work.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineKind {
    /// Scalar reference loop on the calling thread.
    Reference,
    /// The kernel simulator, one launch trio per chunk, traces dropped.
    Simulated,
    /// Scalar core fanned out across worker threads.
    Parallel,
}

impl EngineKind {
    pub fn label(self) -> &'static str {
        match self {
            EngineKind::Reference => "reference",
            EngineKind::Simulated => "simulated",
            EngineKind::Parallel => "parallel",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PaddingPolicy {
    /// Input must already be a whole number of blocks.
    Strict,
    /// PKCS#7: pad with k bytes of value k; aligned input gains a full
    /// block so unpadding is unambiguous.
    Pkcs7,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PadError {
    #[error("strict padding requires a multiple of 8 bytes, got {len}")]
    StrictAlignmentFault { len: usize },
    #[error("malformed PKCS#7 tail: {reason}")]
    PaddingFault { reason: String },
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// How [`ecb_process`] runs: worker count, blocks per work unit, backend,
/// and the padding policy the surrounding pipeline uses.
#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub workers: usize,
    pub chunk_blocks: usize,
    pub engine: EngineKind,
    pub padding: PaddingPolicy,
}

impl EngineConfig {
    pub fn new(
        workers: usize,
        chunk_blocks: usize,
        engine: EngineKind,
        padding: PaddingPolicy,
    ) -> Self {
        assert!(workers >= 1, "at least one worker");
        assert!(chunk_blocks >= 1, "at least one block per chunk");
        Self {
            workers,
            chunk_blocks,
            engine,
            padding,
        }
    }
}

impl Default for EngineConfig {
    fn default() -> Self {
        let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        Self {
            workers,
            chunk_blocks: 1024,
            engine: EngineKind::Parallel,
            padding: PaddingPolicy::Pkcs7,
        }
    }
}

/// A byte sequence that is guaranteed to be a whole number of 64-bit
/// blocks. Produced by [`pad`] or from already-aligned bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Payload {
    data: Vec<u8>,
}

impl Payload {
    pub fn from_aligned(data: Vec<u8>) -> Result<Self, PadError> {
        if !data.len().is_multiple_of(8) {
            return Err(PadError::StrictAlignmentFault { len: data.len() });
        }
        Ok(Self { data })
    }

    pub fn block_count(&self) -> usize {
        self.data.len() / 8
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.data
    }
}

/// Pads raw bytes up to a whole number of blocks.
pub fn pad(data: &[u8], policy: PaddingPolicy) -> Result<Payload, PadError> {
    match policy {
        PaddingPolicy::Strict => Payload::from_aligned(data.to_vec()),
        PaddingPolicy::Pkcs7 => {
            let fill = 8 - (data.len() % 8);
            let mut padded = Vec::with_capacity(data.len() + fill);
            padded.extend_from_slice(data);
            padded.resize(data.len() + fill, fill as u8);
            Ok(Payload { data: padded })
        }
    }
}

/// Inverse of [`pad`]: strips and checks the PKCS#7 tail, or is the
/// identity under [`PaddingPolicy::Strict`].
pub fn unpad(data: &[u8], policy: PaddingPolicy) -> Result<Vec<u8>, PadError> {
    if !data.len().is_multiple_of(8) {
        return Err(PadError::PaddingFault {
            reason: format!("length {} is not a multiple of 8", data.len()),
        });
    }
    match policy {
        PaddingPolicy::Strict => Ok(data.to_vec()),
        PaddingPolicy::Pkcs7 => {
            let Some(&last) = data.last() else {
                return Err(PadError::PaddingFault {
                    reason: "empty input".into(),
                });
            };
            let fill = last as usize;
            if !(1..=8).contains(&fill) {
                return Err(PadError::PaddingFault {
                    reason: format!("fill byte {last:#04x} out of range"),
                });
            }
            let tail = &data[data.len() - fill..];
            if tail.iter().any(|&b| b != last) {
                return Err(PadError::PaddingFault {
                    reason: format!("tail bytes do not all equal {last:#04x}"),
                });
            }
            Ok(data[..data.len() - fill].to_vec())
        }
    }
}

/// Encrypts or decrypts every block of the payload under ECB.
///
/// Block `i` of the output is always the 3DES transform of block `i` of
/// the input, independent of worker count, chunk size, or backend.
pub fn ecb_process(
    payload: &Payload,
    ts: &TripleSchedule,
    mode: Direction,
    cfg: &EngineConfig,
) -> Result<Vec<u8>, EngineError> {
    assert!(
        cfg.workers >= 1 && cfg.chunk_blocks >= 1,
        "invalid engine config"
    );
    let input = payload.as_bytes();
    let mut output = vec![0u8; input.len()];
    if input.is_empty() {
        return Ok(output);
    }

    let chunk_bytes = cfg.chunk_blocks * 8;
    match cfg.engine {
        EngineKind::Reference => {
            for (src, dst) in input.chunks(8).zip(output.chunks_mut(8)) {
                process_block_scalar(src, dst, ts, mode);
            }
        }
        EngineKind::Simulated => {
            for (src, dst) in input
                .chunks(chunk_bytes)
                .zip(output.chunks_mut(chunk_bytes))
            {
                let blocks: Vec<BitVector> = src
                    .chunks(8)
                    .map(|b| bytes_to_bits(b.try_into().expect("aligned payload")))
                    .collect();
                let (out_blocks, _) = sim_tdes(&blocks, ts, mode, TraceMode::StatsOnly)?;
                for (block, slot) in out_blocks.iter().zip(dst.chunks_mut(8)) {
                    slot.copy_from_slice(&bits_to_bytes(block));
                }
            }
        }
        EngineKind::Parallel => {
            // Static round-robin assignment of chunks to workers; each
            // chunk owns a disjoint slice of the output.
            let tasks: Vec<(usize, &[u8], &mut [u8])> = input
                .chunks(chunk_bytes)
                .zip(output.chunks_mut(chunk_bytes))
                .enumerate()
                .map(|(i, (src, dst))| (i, src, dst))
                .collect();
            let workers = cfg.workers.min(tasks.len());
            let mut queues: Vec<Vec<(&[u8], &mut [u8])>> =
                (0..workers).map(|_| Vec::new()).collect();
            for (i, src, dst) in tasks {
                queues[i % workers].push((src, dst));
            }
            std::thread::scope(|scope| {
                for queue in queues {
                    scope.spawn(move || {
                        for (src, dst) in queue {
                            for (block_in, block_out) in src.chunks(8).zip(dst.chunks_mut(8)) {
                                process_block_scalar(block_in, block_out, ts, mode);
                            }
                        }
                    });
                }
            });
        }
    }
    Ok(output)
}

fn process_block_scalar(src: &[u8], dst: &mut [u8], ts: &TripleSchedule, mode: Direction) {
    let block = bytes_to_bits(src.try_into().expect("aligned payload"));
    let out = match mode {
        Direction::Encrypt => tdes_encrypt_block(&block, ts),
        Direction::Decrypt => tdes_decrypt_block(&block, ts),
    };
    dst.copy_from_slice(&bits_to_bytes(&out));
}
