//! The `selftest` command: table validation, known-answer vectors,
//! roundtrips, simulator/reference equivalence, race-freedom, and engine
//! worker invariance, each reported as one named pass/fail line.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tdes::bits::bytes_to_bits;
use tdes::des::{
    des_block, key_schedule, tdes_decrypt_block, tdes_encrypt_block, triple_schedule, Direction,
};
use tdes::engine::{ecb_process, pad, unpad, EngineConfig, EngineKind, PaddingPolicy, Payload};
use tdes::sim::{check_race_freedom, sim_keygen, sim_tdes, TraceMode};
use tdes::tables::{load_tables, validate_tables};
use tdes::{BitVector, KeyTriple};

#[derive(Debug, Clone)]
pub struct SelfCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl SelfCheck {
    fn ok(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: true,
            detail: String::new(),
        }
    }

    fn result(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: if passed { String::new() } else { detail.into() },
        }
    }
}

pub fn all_passed(checks: &[SelfCheck]) -> bool {
    checks.iter().all(|c| c.passed)
}

fn random_triple(rng: &mut ChaCha8Rng) -> KeyTriple {
    KeyTriple::new(
        bytes_to_bits(&rng.random::<[u8; 8]>()),
        bytes_to_bits(&rng.random::<[u8; 8]>()),
        bytes_to_bits(&rng.random::<[u8; 8]>()),
    )
}

/// Runs the whole suite. Deterministic: seeded generators, fixed case
/// counts, stable check order.
pub fn run_selftest() -> Vec<SelfCheck> {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x7E57_C0DE);

    // Structural table checks, one line each.
    for check in validate_tables(load_tables()).checks {
        checks.push(SelfCheck::result(
            format!("tables: {}", check.name),
            check.passed,
            check.detail.unwrap_or_default(),
        ));
    }

    // Known answers.
    let walk_key = BitVector::from_hex("133457799BBCDFF1");
    let walk_pt = BitVector::from_hex("0123456789ABCDEF");
    let single = des_block(&walk_pt, &key_schedule(&walk_key), Direction::Encrypt);
    checks.push(SelfCheck::result(
        "known answer: single DES walkthrough vector",
        single.to_hex() == "85E813540F0AB405",
        format!("got {}", single.to_hex()),
    ));

    let equal_ts = triple_schedule(&KeyTriple::new(
        walk_key.clone(),
        walk_key.clone(),
        walk_key.clone(),
    ));
    let tdes_ct = tdes_encrypt_block(&walk_pt, &equal_ts);
    checks.push(SelfCheck::result(
        "known answer: 3DES with equal keys behaves like DES",
        tdes_ct == single,
        format!("got {}", tdes_ct.to_hex()),
    ));

    let three_key_ts = triple_schedule(&KeyTriple::new(
        BitVector::from_hex("0123456789ABCDEF"),
        BitVector::from_hex("23456789ABCDEF01"),
        BitVector::from_hex("456789ABCDEF0123"),
    ));
    let three_key_ct = tdes_encrypt_block(&BitVector::from_hex("6BC1BEE22E409F96"), &three_key_ts);
    checks.push(SelfCheck::result(
        "known answer: published three-key ECB vector",
        three_key_ct.to_hex() == "714772F339841D34",
        format!("got {}", three_key_ct.to_hex()),
    ));

    // Reference roundtrip and backward compatibility.
    let mut roundtrip_ok = true;
    let mut compat_ok = true;
    for _ in 0..200 {
        let keys = random_triple(&mut rng);
        let ts = triple_schedule(&keys);
        let block = bytes_to_bits(&rng.random::<[u8; 8]>());
        roundtrip_ok &= tdes_decrypt_block(&tdes_encrypt_block(&block, &ts), &ts) == block;

        let equal = triple_schedule(&KeyTriple::new(
            keys.k1.clone(),
            keys.k1.clone(),
            keys.k1.clone(),
        ));
        compat_ok &= tdes_encrypt_block(&block, &equal)
            == des_block(&block, &key_schedule(&keys.k1), Direction::Encrypt);
    }
    checks.push(SelfCheck::result(
        "reference: decrypt(encrypt(p)) = p on 200 random cases",
        roundtrip_ok,
        "mismatch",
    ));
    checks.push(SelfCheck::result(
        "reference: equal-key 3DES matches single DES on 200 random cases",
        compat_ok,
        "mismatch",
    ));

    // Simulator equivalence and race-freedom.
    let mut keygen_ok = true;
    for _ in 0..50 {
        let keys = random_triple(&mut rng);
        match sim_keygen(&keys, TraceMode::Full) {
            Ok((schedule, trace)) => {
                keygen_ok &= schedule == triple_schedule(&keys);
                keygen_ok &= check_race_freedom(&trace).is_empty();
            }
            Err(_) => keygen_ok = false,
        }
    }
    checks.push(SelfCheck::result(
        "simulator: keygen kernel matches the reference schedule, race-free",
        keygen_ok,
        "mismatch or race",
    ));

    let mut crypt_ok = true;
    for _ in 0..25 {
        let keys = random_triple(&mut rng);
        let ts = triple_schedule(&keys);
        let block_count = rng.random_range(1..=3);
        let blocks: Vec<BitVector> = (0..block_count)
            .map(|_| bytes_to_bits(&rng.random::<[u8; 8]>()))
            .collect();
        match sim_tdes(&blocks, &ts, Direction::Encrypt, TraceMode::Full) {
            Ok((out, trace)) => {
                for (block, simulated) in blocks.iter().zip(&out) {
                    crypt_ok &= simulated == &tdes_encrypt_block(block, &ts);
                }
                crypt_ok &= check_race_freedom(&trace).is_empty();
            }
            Err(_) => crypt_ok = false,
        }
    }
    checks.push(SelfCheck::result(
        "simulator: crypt kernel matches the reference cipher, race-free",
        crypt_ok,
        "mismatch or race",
    ));

    // Engine invariance.
    let keys = random_triple(&mut rng);
    let ts = triple_schedule(&keys);
    let mut data = vec![0u8; 8 * 96];
    rng.fill(&mut data[..]);
    let payload = Payload::from_aligned(data).expect("aligned");
    let reference = ecb_process(
        &payload,
        &ts,
        Direction::Encrypt,
        &EngineConfig::new(1, 16, EngineKind::Reference, PaddingPolicy::Strict),
    );
    let mut invariant_ok = reference.is_ok();
    if let Ok(reference) = &reference {
        for workers in [1, 2, 4] {
            for chunk_blocks in [1, 16] {
                let cfg = EngineConfig::new(
                    workers,
                    chunk_blocks,
                    EngineKind::Parallel,
                    PaddingPolicy::Strict,
                );
                invariant_ok &= ecb_process(&payload, &ts, Direction::Encrypt, &cfg)
                    .ok()
                    .as_ref()
                    == Some(reference);
            }
        }
        let sim_cfg = EngineConfig::new(1, 16, EngineKind::Simulated, PaddingPolicy::Strict);
        invariant_ok &= ecb_process(&payload, &ts, Direction::Encrypt, &sim_cfg)
            .ok()
            .as_ref()
            == Some(reference);
    }
    checks.push(SelfCheck::result(
        "engine: output invariant across workers, chunk sizes, and backends",
        invariant_ok,
        "outputs diverged",
    ));

    // Padding pipeline.
    let mut padding_ok = true;
    for len in 0..=32usize {
        let data: Vec<u8> = (0..len).map(|i| i as u8).collect();
        let padded = pad(&data, PaddingPolicy::Pkcs7).expect("pkcs7 never fails");
        padding_ok &= unpad(padded.as_bytes(), PaddingPolicy::Pkcs7).as_deref() == Ok(&data[..]);
    }
    checks.push(SelfCheck::result(
        "padding: PKCS#7 pad/unpad roundtrip for lengths 0..=32",
        padding_ok,
        "roundtrip failed",
    ));

    checks.push(SelfCheck::ok("selftest: suite completed"));
    checks
}
