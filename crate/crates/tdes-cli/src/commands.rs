//! File-driven commands: encrypt, decrypt, key-schedule printing, and
//! kernel simulation with trace export.
//!
//! Ciphertext files are raw binary with no header; keys never touch the
//! output. All multi-byte interpretation is big-endian, as fixed by the
//! bit numbering of the cipher core.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use tdes::bits::{bits_to_bytes, bytes_to_bits};
use tdes::des::{triple_schedule, Direction};
use tdes::engine::{
    ecb_process, pad, unpad, EngineConfig, EngineError, EngineKind, PadError, PaddingPolicy,
    Payload,
};
use tdes::sim::{sim_tdes, write_trace, SimError, TraceMode};
use tdes::{BitVector, KeyTriple};

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Pad(#[from] PadError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

fn read_file(path: &Path) -> Result<Vec<u8>, CommandError> {
    fs::read(path).map_err(|source| CommandError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write_file(path: &Path, data: &[u8]) -> Result<(), CommandError> {
    fs::write(path, data).map_err(|source| CommandError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Settings shared by the encrypt and decrypt commands.
#[derive(Debug, Clone)]
pub struct CryptOptions {
    pub keys: KeyTriple,
    pub padding: PaddingPolicy,
    pub engine: EngineKind,
    pub workers: usize,
    pub chunk_blocks: usize,
}

impl CryptOptions {
    fn engine_config(&self) -> EngineConfig {
        EngineConfig::new(self.workers, self.chunk_blocks, self.engine, self.padding)
    }
}

/// Pads the input per policy, encrypts every block, writes the raw
/// ciphertext byte-exact.
pub fn encrypt_file(input: &Path, output: &Path, opts: &CryptOptions) -> Result<(), CommandError> {
    let data = read_file(input)?;
    let payload = pad(&data, opts.padding)?;
    let ts = triple_schedule(&opts.keys);
    let ciphertext = ecb_process(&payload, &ts, Direction::Encrypt, &opts.engine_config())?;
    write_file(output, &ciphertext)
}

/// Decrypts every block and strips the padding per policy.
pub fn decrypt_file(input: &Path, output: &Path, opts: &CryptOptions) -> Result<(), CommandError> {
    let data = read_file(input)?;
    let payload = Payload::from_aligned(data)?;
    let ts = triple_schedule(&opts.keys);
    let plaintext = ecb_process(&payload, &ts, Direction::Decrypt, &opts.engine_config())?;
    let stripped = unpad(&plaintext, opts.padding)?;
    write_file(output, &stripped)
}

/// The 48 subkeys (16 per base key, schedule order) as 12-hex-digit lines.
pub fn keygen_lines(keys: &KeyTriple) -> Vec<String> {
    let ts = triple_schedule(keys);
    let mut lines = Vec::with_capacity(48);
    for i in 0..3 {
        for subkey in ts.schedule(i).subkeys() {
            lines.push(subkey.to_hex());
        }
    }
    lines
}

/// Runs the simulated kernels (key generation, then three encryption
/// launches) over the input file, writing the ciphertext and the full
/// access trace. The input must already be a whole number of blocks.
pub fn simulate_file(
    input: &Path,
    output: &Path,
    trace_path: &Path,
    keys: &KeyTriple,
) -> Result<(), CommandError> {
    let data = read_file(input)?;
    let payload = Payload::from_aligned(data)?;
    let blocks: Vec<BitVector> = payload
        .as_bytes()
        .chunks(8)
        .map(|b| bytes_to_bits(b.try_into().expect("aligned payload")))
        .collect();

    let (schedule, keygen_trace) = tdes::sim::sim_keygen(keys, TraceMode::Full)?;
    let (out_blocks, crypt_trace) =
        sim_tdes(&blocks, &schedule, Direction::Encrypt, TraceMode::Full)?;

    let mut ciphertext = Vec::with_capacity(payload.as_bytes().len());
    for block in &out_blocks {
        ciphertext.extend_from_slice(&bits_to_bytes(block));
    }
    write_file(output, &ciphertext)?;

    let file = fs::File::create(trace_path).map_err(|source| CommandError::Io {
        path: trace_path.to_owned(),
        source,
    })?;
    let mut writer = BufWriter::new(file);
    write_trace(&keygen_trace, &mut writer)
        .and_then(|()| write_trace(&crypt_trace, &mut writer))
        .and_then(|()| writer.flush())
        .map_err(|source| CommandError::Io {
            path: trace_path.to_owned(),
            source,
        })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keys::parse_key_triple;

    fn options(padding: PaddingPolicy) -> CryptOptions {
        CryptOptions {
            keys: parse_key_triple("133457799BBCDFF1", "133457799BBCDFF1", "133457799BBCDFF1")
                .unwrap(),
            padding,
            engine: EngineKind::Parallel,
            workers: 2,
            chunk_blocks: 16,
        }
    }

    #[test]
    fn keygen_first_line_is_the_walkthrough_subkey() {
        let keys =
            parse_key_triple("133457799BBCDFF1", "0123456789ABCDEF", "FEDCBA9876543210").unwrap();
        let lines = keygen_lines(&keys);
        assert_eq!(lines.len(), 48);
        assert_eq!(lines[0], "1B02EFFC7072");
        assert!(lines.iter().all(|l| l.len() == 12));
    }

    #[test]
    fn encrypt_decrypt_file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("plain.bin");
        let cipher = dir.path().join("cipher.bin");
        let restored = dir.path().join("restored.bin");

        let data: Vec<u8> = (0..1021).map(|i| (i % 251) as u8).collect();
        fs::write(&input, &data).unwrap();

        let opts = options(PaddingPolicy::Pkcs7);
        encrypt_file(&input, &cipher, &opts).unwrap();
        let ct = fs::read(&cipher).unwrap();
        assert_eq!(ct.len(), 1024); // padded up to the next whole block
        decrypt_file(&cipher, &restored, &opts).unwrap();
        assert_eq!(fs::read(&restored).unwrap(), data);
    }

    #[test]
    fn strict_padding_rejects_misaligned_files() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("odd.bin");
        fs::write(&input, [0u8; 13]).unwrap();
        let err = encrypt_file(
            &input,
            &dir.path().join("out.bin"),
            &options(PaddingPolicy::Strict),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            CommandError::Pad(PadError::StrictAlignmentFault { len: 13 })
        ));
    }

    #[test]
    fn simulate_writes_ciphertext_and_trace() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("blocks.bin");
        let output = dir.path().join("ct.bin");
        let trace = dir.path().join("trace.txt");

        fs::write(&input, [0x01, 0x23, 0x45, 0x67, 0x89, 0xAB, 0xCD, 0xEF]).unwrap();
        let keys =
            parse_key_triple("133457799BBCDFF1", "133457799BBCDFF1", "133457799BBCDFF1").unwrap();
        simulate_file(&input, &output, &trace, &keys).unwrap();

        assert_eq!(
            fs::read(&output).unwrap(),
            [0x85, 0xE8, 0x13, 0x54, 0x0F, 0x0A, 0xB4, 0x05]
        );
        let text = fs::read_to_string(&trace).unwrap();
        assert!(text.lines().count() > 1000);
        assert!(text.lines().all(|l| l.split(',').count() == 7));
        assert!(text.starts_with("pc1,0,0,0,read_only_tables,0,read"));
    }
}
