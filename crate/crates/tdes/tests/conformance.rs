//! Cross-module conformance checks: the simulator against the scalar
//! reference, grid and lane discipline, and trace well-formedness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use tdes::bits::bytes_to_bits;
use tdes::des::{des_block, triple_schedule, Direction};
use tdes::sim::{
    check_race_freedom, sim_des_pass, sim_keygen, sim_tdes, AccessKind, KernelTrace, MemorySpace,
    MemoryStats, TraceMode,
};
use tdes::{BitVector, KeyTriple};

fn random_key_triple(rng: &mut ChaCha8Rng) -> KeyTriple {
    KeyTriple::new(
        bytes_to_bits(&rng.random::<[u8; 8]>()),
        bytes_to_bits(&rng.random::<[u8; 8]>()),
        bytes_to_bits(&rng.random::<[u8; 8]>()),
    )
}

fn random_blocks(rng: &mut ChaCha8Rng, n: usize) -> Vec<BitVector> {
    (0..n)
        .map(|_| bytes_to_bits(&rng.random::<[u8; 8]>()))
        .collect()
}

/// Most lanes a phase may use, by phase name.
fn lane_limit(phase: &str) -> usize {
    match phase {
        "load" | "ip" | "fp" => 64,
        "pc1" => 56,
        "expand" | "key_xor" | "pc2" => 48,
        "sbox" | "pperm" | "left_xor" | "swap" => 32,
        "shift" => 2,
        "split" | "combine" => 1,
        other => panic!("unknown phase {other}"),
    }
}

fn assert_trace_well_formed(trace: &KernelTrace) {
    let (blocks, width) = trace.grid;
    assert_eq!(MemoryStats::fold_phases(&trace.phases), trace.stats);

    for phase in &trace.phases {
        let limit = lane_limit(phase.name);
        for access in &phase.accesses {
            assert!(
                access.thread.lane < limit,
                "phase {} uses lane {} beyond its limit {}",
                phase.name,
                access.thread.lane,
                limit
            );
            assert!(access.thread.lane < width);
            assert!(access.thread.block_index < blocks);
            assert_eq!(access.thread.block_index, phase.block);
        }
    }

    // Every shared cell that is read was written in an earlier phase of the
    // same block within the same launch.
    let mut written: HashSet<(usize, usize, usize)> = HashSet::new();
    for phase in &trace.phases {
        for access in &phase.accesses {
            if access.space == MemorySpace::SharedBlock && access.kind == AccessKind::Read {
                assert!(
                    written.contains(&(phase.launch, phase.block, access.cell)),
                    "phase {} reads uninitialized shared cell {} (block {})",
                    phase.name,
                    access.cell,
                    phase.block
                );
            }
        }
        for access in &phase.accesses {
            if access.space == MemorySpace::SharedBlock && access.kind == AccessKind::Write {
                written.insert((phase.launch, phase.block, access.cell));
            }
        }
    }

    assert_eq!(trace.stats.get(MemorySpace::ReadOnlyTables).writes, 0);
    assert_eq!(trace.stats.get(MemorySpace::ConstantShift).writes, 0);
    assert_eq!(trace.stats.get(MemorySpace::GlobalIn).writes, 0);
    assert_eq!(trace.stats.get(MemorySpace::GlobalOut).reads, 0);
    assert!(check_race_freedom(trace).is_empty());
}

#[test]
fn keygen_matches_reference_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0001);
    for _ in 0..200 {
        let keys = random_key_triple(&mut rng);
        let (schedule, trace) = sim_keygen(&keys, TraceMode::Full).unwrap();
        assert_eq!(schedule, triple_schedule(&keys));
        assert_eq!(trace.grid, (3, 56));
        assert_eq!(trace.launches, 1);
    }
}

#[test]
fn keygen_trace_is_well_formed() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0002);
    let keys = random_key_triple(&mut rng);
    let (_, trace) = sim_keygen(&keys, TraceMode::Full).unwrap();
    assert_trace_well_formed(&trace);
    assert_eq!(trace.phases.len(), 3 * (2 + 16 * 2));
}

#[test]
fn des_pass_matches_reference_in_both_directions() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0003);
    for _ in 0..100 {
        let key = bytes_to_bits(&rng.random::<[u8; 8]>());
        let ks = tdes::des::key_schedule(&key);
        let count = rng.random_range(1..=4);
        let blocks = random_blocks(&mut rng, count);
        for dir in [Direction::Encrypt, Direction::Decrypt] {
            let (out, trace) = sim_des_pass(&blocks, &ks, dir, TraceMode::Full).unwrap();
            for (block, simulated) in blocks.iter().zip(&out) {
                assert_eq!(simulated, &des_block(block, &ks, dir));
            }
            assert_eq!(trace.grid, (blocks.len(), 64));
            assert_eq!(
                trace.stats.get(MemorySpace::GlobalOut).writes,
                (blocks.len() * 64) as u64
            );
        }
    }
}

#[test]
fn crypt_trace_is_well_formed_across_rounds_and_directions() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0004);
    let keys = random_key_triple(&mut rng);
    let ts = triple_schedule(&keys);
    let blocks = random_blocks(&mut rng, 3);
    for dir in [Direction::Encrypt, Direction::Decrypt] {
        let (_, trace) = sim_tdes(&blocks, &ts, dir, TraceMode::Full).unwrap();
        assert_eq!(trace.launches, 3);
        assert_trace_well_formed(&trace);
    }
}

#[test]
fn tdes_roundtrips_through_the_simulator() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0005);
    for _ in 0..50 {
        let keys = random_key_triple(&mut rng);
        let ts = triple_schedule(&keys);
        let count = rng.random_range(1..=3);
        let blocks = random_blocks(&mut rng, count);
        let (ct, _) = sim_tdes(&blocks, &ts, Direction::Encrypt, TraceMode::StatsOnly).unwrap();
        let (pt, _) = sim_tdes(&ct, &ts, Direction::Decrypt, TraceMode::StatsOnly).unwrap();
        assert_eq!(pt, blocks);
    }
}

#[test]
fn sbox_table_reads_are_eight_per_block_per_round() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0006);
    let keys = random_key_triple(&mut rng);
    let ts = triple_schedule(&keys);
    let blocks = random_blocks(&mut rng, 2);
    let (_, trace) = sim_tdes(&blocks, &ts, Direction::Encrypt, TraceMode::Full).unwrap();

    let sbox_phases: Vec<_> = trace.phases.iter().filter(|p| p.name == "sbox").collect();
    assert_eq!(sbox_phases.len(), 3 * 2 * 16); // launches x blocks x rounds
    for phase in sbox_phases {
        let table_reads = phase
            .accesses
            .iter()
            .filter(|a| {
                a.kind == AccessKind::Read
                    && a.space == MemorySpace::ReadOnlyTables
                    && tdes::sim::rotab::is_sbox_cell(a.cell)
            })
            .count();
        assert_eq!(
            table_reads, 8,
            "phase round {} block {}",
            phase.round, phase.block
        );
    }
}
