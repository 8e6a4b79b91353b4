//! The key-generation kernel: 3 blocks (one per base key) of 56 threads.
//!
//! Per block: a bitwise PC-1 phase, a split phase (lane 0 partitions the
//! permuted key into two 28-bit halves in place), then 16 rounds of a shift
//! phase (lanes 0 and 1 rotate one half each) followed by a bitwise PC-2
//! phase that writes the round's subkey to global output.

use super::{
    rotab, KernelTrace, LaunchMem, MemorySpace, PhaseEngine, SimError, ThreadId, TraceMode, Tracer,
    KEYGEN_BLOCK_WIDTH,
};
use crate::bits::BitVector;
use crate::des::{KeyTriple, SubkeySchedule, TripleSchedule};

const KEY_BLOCKS: usize = 3;
const HALF: usize = 28;
const SUBKEY_BITS: usize = 48;
const ROUNDS: usize = 16;
/// Output cells per block: 16 rounds x 48 subkey bits.
const OUT_PER_BLOCK: usize = ROUNDS * SUBKEY_BITS;

/// Runs the key-generation kernel over three base keys.
///
/// Returns the derived schedule (bit-identical to
/// [`crate::des::triple_schedule`]) together with the execution trace.
pub fn sim_keygen(
    keys: &KeyTriple,
    mode: TraceMode,
) -> Result<(TripleSchedule, KernelTrace), SimError> {
    let mut global_keys = Vec::with_capacity(KEY_BLOCKS * 64);
    for i in 0..KEY_BLOCKS {
        global_keys.extend_from_slice(keys.key(i).as_cells());
    }

    let mut tracer = Tracer::new(mode, (KEY_BLOCKS, KEYGEN_BLOCK_WIDTH));
    let mem = LaunchMem::new(
        Vec::new(),
        global_keys,
        KEY_BLOCKS * OUT_PER_BLOCK,
        KEYGEN_BLOCK_WIDTH,
    );
    let mut engine = PhaseEngine::new(mem, &mut tracer);

    for block in 0..KEY_BLOCKS {
        engine.mem().reset_shared();
        run_block(&mut engine, block)?;
    }

    let out = engine.into_mem().into_output();
    let mut schedules = Vec::with_capacity(KEY_BLOCKS);
    for block in 0..KEY_BLOCKS {
        let subkeys = (0..ROUNDS)
            .map(|r| {
                let base = block * OUT_PER_BLOCK + r * SUBKEY_BITS;
                BitVector::from_cells(&out[base..base + SUBKEY_BITS])
            })
            .collect();
        schedules.push(SubkeySchedule::new(subkeys));
    }
    let schedules: [SubkeySchedule; 3] = schedules.try_into().expect("three schedules");
    Ok((TripleSchedule::new(schedules), tracer.finish()))
}

fn run_block(engine: &mut PhaseEngine<'_>, block: usize) -> Result<(), SimError> {
    // PC-1: each of the 56 lanes selects one base-key bit.
    engine.begin("pc1", 0, block);
    for lane in 0..KEYGEN_BLOCK_WIDTH {
        let t = ThreadId {
            block_index: block,
            lane,
        };
        let entry = engine.read(t, MemorySpace::ReadOnlyTables, rotab::PC1 + lane)? as usize;
        let bit = engine.read(t, MemorySpace::GlobalKeys, block * 64 + entry - 1)?;
        engine.write(t, MemorySpace::SharedBlock, lane, bit)?;
    }
    engine.end();

    // Split: lane 0 establishes the C/D views over the permuted key
    // (cells 0..28 and 28..56). No data moves.
    engine.begin("split", 0, block);
    engine.end();

    for round in 1..=ROUNDS {
        // Two lanes rotate one 28-bit half each by the round's shift amount.
        engine.begin("shift", round as u8, block);
        for (lane, base) in [(0, 0), (1, HALF)] {
            let t = ThreadId {
                block_index: block,
                lane,
            };
            let amount = engine.read(t, MemorySpace::ConstantShift, round - 1)? as usize;
            let mut half = [0u8; HALF];
            for (i, cell) in half.iter_mut().enumerate() {
                *cell = engine.read(t, MemorySpace::SharedBlock, base + i)?;
            }
            for i in 0..HALF {
                engine.write(
                    t,
                    MemorySpace::SharedBlock,
                    base + i,
                    half[(i + amount) % HALF],
                )?;
            }
        }
        engine.end();

        // PC-2: 48 lanes compress the rotated halves into the round key.
        engine.begin("pc2", round as u8, block);
        for lane in 0..SUBKEY_BITS {
            let t = ThreadId {
                block_index: block,
                lane,
            };
            let entry = engine.read(t, MemorySpace::ReadOnlyTables, rotab::PC2 + lane)? as usize;
            let bit = engine.read(t, MemorySpace::SharedBlock, entry - 1)?;
            let out_cell = block * OUT_PER_BLOCK + (round - 1) * SUBKEY_BITS + lane;
            engine.write(t, MemorySpace::GlobalOut, out_cell, bit)?;
        }
        engine.end();
    }

    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::des::triple_schedule;

    fn triple(k1: &str, k2: &str, k3: &str) -> KeyTriple {
        KeyTriple::new(
            BitVector::from_hex(k1),
            BitVector::from_hex(k2),
            BitVector::from_hex(k3),
        )
    }

    #[test]
    fn matches_reference_schedule_on_walkthrough_key() {
        let keys = triple("133457799BBCDFF1", "0123456789ABCDEF", "FEDCBA9876543210");
        let (schedule, trace) = sim_keygen(&keys, TraceMode::Full).unwrap();
        assert_eq!(schedule, triple_schedule(&keys));
        assert_eq!(schedule.schedule(0).subkeys()[0].to_hex(), "1B02EFFC7072");
        assert_eq!(trace.grid, (3, 56));
        assert_eq!(trace.launches, 1);
    }

    #[test]
    fn zero_keys_still_produce_full_phase_structure() {
        let keys = triple("0000000000000000", "0000000000000000", "0000000000000000");
        let (schedule, trace) = sim_keygen(&keys, TraceMode::Full).unwrap();
        for i in 0..3 {
            assert!(schedule
                .schedule(i)
                .subkeys()
                .iter()
                .all(|k| k.count_ones() == 0));
        }
        // 3 blocks x (pc1 + split + 16 x (shift + pc2)).
        assert_eq!(trace.phases.len(), 3 * (2 + 16 * 2));
    }

    #[test]
    fn constant_shift_reads_are_two_per_round_per_block() {
        let keys = triple("133457799BBCDFF1", "23456789ABCDEF01", "456789ABCDEF0123");
        let (_, trace) = sim_keygen(&keys, TraceMode::Full).unwrap();
        let shift = trace.stats.get(MemorySpace::ConstantShift);
        assert_eq!(shift.reads, 3 * 16 * 2);
        assert_eq!(shift.writes, 0);
    }

    #[test]
    fn table_reads_cover_pc1_and_every_pc2_round() {
        let keys = triple("133457799BBCDFF1", "23456789ABCDEF01", "456789ABCDEF0123");
        let (_, trace) = sim_keygen(&keys, TraceMode::Full).unwrap();
        let tables = trace.stats.get(MemorySpace::ReadOnlyTables);
        assert_eq!(tables.reads, 3 * (56 + 16 * 48));
        assert_eq!(trace.stats.get(MemorySpace::GlobalOut).writes, 3 * 16 * 48);
        assert_eq!(trace.stats.get(MemorySpace::GlobalKeys).reads, 3 * 56);
    }

    #[test]
    fn stats_only_mode_drops_phases_but_keeps_counts() {
        let keys = triple("133457799BBCDFF1", "23456789ABCDEF01", "456789ABCDEF0123");
        let (full_sched, full) = sim_keygen(&keys, TraceMode::Full).unwrap();
        let (lean_sched, lean) = sim_keygen(&keys, TraceMode::StatsOnly).unwrap();
        assert_eq!(full_sched, lean_sched);
        assert!(lean.phases.is_empty());
        assert_eq!(full.stats, lean.stats);
    }
}
