//! The encryption/decryption kernel: one kernel block per 64-bit text
//! block, 64 threads per block, one thread per bit.
//!
//! The kernel is direction-agnostic. Decryption reverses the round-key
//! order on the host side before the launch, exactly once, when the
//! global key cells are laid out.

use super::{
    rotab, KernelTrace, LaunchMem, MemorySpace, PhaseEngine, SimError, ThreadId, TraceMode, Tracer,
    CRYPT_BLOCK_WIDTH,
};
use crate::bits::BitVector;
use crate::des::{Direction, SubkeySchedule, TripleSchedule};

const ROUNDS: usize = 16;

/// Shared-memory cell layout for one crypt block. `TEXT` holds the loaded
/// block, is permuted in place, and receives the combined pre-output;
/// `SUB` holds the S-box output, the straight permutation, and the
/// left-XOR result in turn.
mod shared {
    pub const TEXT: usize = 0;
    pub const LEFT: usize = 64;
    pub const RIGHT: usize = 96;
    pub const EXPAND: usize = 128;
    pub const SUB: usize = 176;
    pub const SIZE: usize = 208;
}

/// Runs one DES pass over every input block.
///
/// Output blocks are bit-identical to [`crate::des::des_block`] applied
/// per block.
pub fn sim_des_pass(
    blocks: &[BitVector],
    ks: &SubkeySchedule,
    dir: Direction,
    mode: TraceMode,
) -> Result<(Vec<BitVector>, KernelTrace), SimError> {
    let mut tracer = Tracer::new(mode, (blocks.len(), CRYPT_BLOCK_WIDTH));
    let out = launch_pass(blocks, ks, dir, &mut tracer)?;
    Ok((out, tracer.finish()))
}

/// Runs the crypt kernel three times for 3DES: E-D-E under keys 1, 2, 3
/// for encryption, D-E-D under keys 3, 2, 1 for decryption. The combined
/// trace concatenates the three launch traces.
pub fn sim_tdes(
    blocks: &[BitVector],
    ts: &TripleSchedule,
    dir: Direction,
    mode: TraceMode,
) -> Result<(Vec<BitVector>, KernelTrace), SimError> {
    let passes: [(usize, Direction); 3] = match dir {
        Direction::Encrypt => [
            (0, Direction::Encrypt),
            (1, Direction::Decrypt),
            (2, Direction::Encrypt),
        ],
        Direction::Decrypt => [
            (2, Direction::Decrypt),
            (1, Direction::Encrypt),
            (0, Direction::Decrypt),
        ],
    };

    let mut tracer = Tracer::new(mode, (blocks.len(), CRYPT_BLOCK_WIDTH));
    let mut current = blocks.to_vec();
    for (key_index, pass_dir) in passes {
        current = launch_pass(&current, ts.schedule(key_index), pass_dir, &mut tracer)?;
    }
    Ok((current, tracer.finish()))
}

/// One kernel launch: sets up global memory, runs every block, collects
/// the outputs.
fn launch_pass(
    blocks: &[BitVector],
    ks: &SubkeySchedule,
    dir: Direction,
    tracer: &mut Tracer,
) -> Result<Vec<BitVector>, SimError> {
    assert!(!blocks.is_empty(), "at least one input block is required");
    assert!(
        blocks.iter().all(|b| b.width() == 64),
        "text blocks are 64 bits wide"
    );

    let mut global_in = Vec::with_capacity(blocks.len() * 64);
    for block in blocks {
        global_in.extend_from_slice(block.as_cells());
    }

    // Host-side key layout; for Decrypt this reverses the round order.
    let mut global_keys = Vec::with_capacity(ROUNDS * 48);
    for round in 1..=ROUNDS {
        global_keys.extend_from_slice(ks.round_key(round, dir).as_cells());
    }

    let out_cells = blocks.len() * 64;
    let mem = LaunchMem::new(global_in, global_keys, out_cells, shared::SIZE);
    let mut engine = PhaseEngine::new(mem, tracer);

    for block in 0..blocks.len() {
        engine.mem().reset_shared();
        run_block(&mut engine, block)?;
    }

    let out = engine.into_mem().into_output();
    Ok(out.chunks(64).map(BitVector::from_cells).collect())
}

fn run_block(engine: &mut PhaseEngine<'_>, block: usize) -> Result<(), SimError> {
    let lane_id = |lane: usize| ThreadId {
        block_index: block,
        lane,
    };

    // Every lane copies its bit of the text block into shared memory.
    engine.begin("load", 0, block);
    for lane in 0..64 {
        let t = lane_id(lane);
        let bit = engine.read(t, MemorySpace::GlobalIn, block * 64 + lane)?;
        engine.write(t, MemorySpace::SharedBlock, shared::TEXT + lane, bit)?;
    }
    engine.end();

    // Bitwise initial permutation, in place under phase semantics.
    engine.begin("ip", 0, block);
    for lane in 0..64 {
        let t = lane_id(lane);
        let entry = engine.read(t, MemorySpace::ReadOnlyTables, rotab::IP + lane)? as usize;
        let bit = engine.read(t, MemorySpace::SharedBlock, shared::TEXT + entry - 1)?;
        engine.write(t, MemorySpace::SharedBlock, shared::TEXT + lane, bit)?;
    }
    engine.end();

    // Lane 0 splits the permuted text into the two 32-bit halves.
    engine.begin("split", 0, block);
    {
        let t = lane_id(0);
        for i in 0..32 {
            let bit = engine.read(t, MemorySpace::SharedBlock, shared::TEXT + i)?;
            engine.write(t, MemorySpace::SharedBlock, shared::LEFT + i, bit)?;
        }
        for i in 0..32 {
            let bit = engine.read(t, MemorySpace::SharedBlock, shared::TEXT + 32 + i)?;
            engine.write(t, MemorySpace::SharedBlock, shared::RIGHT + i, bit)?;
        }
    }
    engine.end();

    for round in 1..=ROUNDS {
        let round_u8 = round as u8;

        // 48 lanes expand the right half.
        engine.begin("expand", round_u8, block);
        for lane in 0..48 {
            let t = lane_id(lane);
            let entry = engine.read(t, MemorySpace::ReadOnlyTables, rotab::EXPD + lane)? as usize;
            let bit = engine.read(t, MemorySpace::SharedBlock, shared::RIGHT + entry - 1)?;
            engine.write(t, MemorySpace::SharedBlock, shared::EXPAND + lane, bit)?;
        }
        engine.end();

        // 48 lanes mix in the round key.
        engine.begin("key_xor", round_u8, block);
        for lane in 0..48 {
            let t = lane_id(lane);
            let bit = engine.read(t, MemorySpace::SharedBlock, shared::EXPAND + lane)?;
            let key_bit = engine.read(t, MemorySpace::GlobalKeys, (round - 1) * 48 + lane)?;
            engine.write(
                t,
                MemorySpace::SharedBlock,
                shared::EXPAND + lane,
                bit ^ key_bit,
            )?;
        }
        engine.end();

        // Eight groups of four lanes; the lowest lane of each group reads
        // the box value, all four write one output bit each.
        engine.begin("sbox", round_u8, block);
        for group in 0..8 {
            let reader = lane_id(4 * group);
            let mut bits = [0u8; 6];
            for (i, bit) in bits.iter_mut().enumerate() {
                *bit = engine.read(
                    reader,
                    MemorySpace::SharedBlock,
                    shared::EXPAND + 6 * group + i,
                )?;
            }
            let row = (2 * bits[0] + bits[5]) as usize;
            let col = (8 * bits[1] + 4 * bits[2] + 2 * bits[3] + bits[4]) as usize;
            let value = engine.read(
                reader,
                MemorySpace::ReadOnlyTables,
                rotab::sbox_cell(group, row, col),
            )?;
            for j in 0..4 {
                let t = lane_id(4 * group + j);
                let bit = (value >> (3 - j)) & 1;
                engine.write(
                    t,
                    MemorySpace::SharedBlock,
                    shared::SUB + 4 * group + j,
                    bit,
                )?;
            }
        }
        engine.end();

        // 32 lanes apply the straight permutation, in place.
        engine.begin("pperm", round_u8, block);
        for lane in 0..32 {
            let t = lane_id(lane);
            let entry = engine.read(t, MemorySpace::ReadOnlyTables, rotab::PER + lane)? as usize;
            let bit = engine.read(t, MemorySpace::SharedBlock, shared::SUB + entry - 1)?;
            engine.write(t, MemorySpace::SharedBlock, shared::SUB + lane, bit)?;
        }
        engine.end();

        // 32 lanes XOR the left half into the round-function output.
        engine.begin("left_xor", round_u8, block);
        for lane in 0..32 {
            let t = lane_id(lane);
            let f_bit = engine.read(t, MemorySpace::SharedBlock, shared::SUB + lane)?;
            let l_bit = engine.read(t, MemorySpace::SharedBlock, shared::LEFT + lane)?;
            engine.write(
                t,
                MemorySpace::SharedBlock,
                shared::SUB + lane,
                f_bit ^ l_bit,
            )?;
        }
        engine.end();

        // 32 lanes advance the Feistel state: the old right half becomes
        // the new left, the XOR result becomes the new right.
        engine.begin("swap", round_u8, block);
        for lane in 0..32 {
            let t = lane_id(lane);
            let r_bit = engine.read(t, MemorySpace::SharedBlock, shared::RIGHT + lane)?;
            engine.write(t, MemorySpace::SharedBlock, shared::LEFT + lane, r_bit)?;
            let x_bit = engine.read(t, MemorySpace::SharedBlock, shared::SUB + lane)?;
            engine.write(t, MemorySpace::SharedBlock, shared::RIGHT + lane, x_bit)?;
        }
        engine.end();
    }

    // Lane 0 assembles the pre-output R16 || L16.
    engine.begin("combine", 0, block);
    {
        let t = lane_id(0);
        for i in 0..32 {
            let bit = engine.read(t, MemorySpace::SharedBlock, shared::RIGHT + i)?;
            engine.write(t, MemorySpace::SharedBlock, shared::TEXT + i, bit)?;
        }
        for i in 0..32 {
            let bit = engine.read(t, MemorySpace::SharedBlock, shared::LEFT + i)?;
            engine.write(t, MemorySpace::SharedBlock, shared::TEXT + 32 + i, bit)?;
        }
    }
    engine.end();

    // Bitwise final permutation straight to global output.
    engine.begin("fp", 0, block);
    for lane in 0..64 {
        let t = lane_id(lane);
        let entry = engine.read(t, MemorySpace::ReadOnlyTables, rotab::FP + lane)? as usize;
        let bit = engine.read(t, MemorySpace::SharedBlock, shared::TEXT + entry - 1)?;
        engine.write(t, MemorySpace::GlobalOut, block * 64 + lane, bit)?;
    }
    engine.end();

    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::AccessKind;
    use super::*;
    use crate::des::{des_block, key_schedule, tdes_encrypt_block, KeyTriple};

    fn hex(s: &str) -> BitVector {
        BitVector::from_hex(s)
    }

    #[test]
    fn single_block_matches_reference_known_answer() {
        let ks = key_schedule(&hex("133457799BBCDFF1"));
        let block = hex("0123456789ABCDEF");
        let (out, trace) = sim_des_pass(
            std::slice::from_ref(&block),
            &ks,
            Direction::Encrypt,
            TraceMode::Full,
        )
        .unwrap();
        assert_eq!(out[0].to_hex(), "85E813540F0AB405");
        assert_eq!(out[0], des_block(&block, &ks, Direction::Encrypt));
        assert_eq!(trace.grid, (1, 64));
        assert_eq!(trace.launches, 1);
        // load, ip, split, 16 x 6 round phases, combine, fp.
        assert_eq!(trace.phases.len(), 5 + 16 * 6);
    }

    #[test]
    fn identical_input_blocks_give_identical_outputs_and_slices() {
        let ks = key_schedule(&hex("0123456789ABCDEF"));
        let blocks = vec![hex("DEADBEEF01020304"); 3];
        let (out, trace) = sim_des_pass(&blocks, &ks, Direction::Encrypt, TraceMode::Full).unwrap();
        assert_eq!(out[0], out[1]);
        assert_eq!(out[1], out[2]);

        // Per-block phase slices are identical up to the block index.
        let per_block = trace.phases.len() / 3;
        for (a, b) in trace.phases[..per_block]
            .iter()
            .zip(&trace.phases[per_block..2 * per_block])
        {
            assert_eq!(a.name, b.name);
            assert_eq!(a.round, b.round);
            assert_eq!(a.accesses.len(), b.accesses.len());
            for (x, y) in a.accesses.iter().zip(&b.accesses) {
                assert_eq!(x.thread.lane, y.thread.lane);
                assert_eq!(x.kind, y.kind);
                assert_eq!(x.space, y.space);
            }
        }
    }

    #[test]
    fn tdes_launch_structure_and_oracle_agreement() {
        let ts = crate::des::triple_schedule(&KeyTriple::new(
            hex("0123456789ABCDEF"),
            hex("23456789ABCDEF01"),
            hex("456789ABCDEF0123"),
        ));
        let blocks = vec![hex("6BC1BEE22E409F96"), hex("E93D7E117393172A")];
        let (out, trace) = sim_tdes(&blocks, &ts, Direction::Encrypt, TraceMode::Full).unwrap();
        assert_eq!(out[0].to_hex(), "714772F339841D34");
        assert_eq!(out[1].to_hex(), "267FCC4BD2949CC3");
        for (block, ct) in blocks.iter().zip(&out) {
            assert_eq!(ct, &tdes_encrypt_block(block, &ts));
        }

        assert_eq!(trace.launches, 3);
        assert_eq!(trace.grid, (2, 64));
        for launch in 0..3 {
            let phases = trace.phases.iter().filter(|p| p.launch == launch).count();
            assert_eq!(phases, 2 * (5 + 16 * 6));
        }

        let (back, _) = sim_tdes(&out, &ts, Direction::Decrypt, TraceMode::StatsOnly).unwrap();
        assert_eq!(back, blocks);
    }

    #[test]
    fn reruns_are_bit_and_trace_identical() {
        let ts = crate::des::triple_schedule(&KeyTriple::new(
            hex("2EC20E32FDFD3D69"),
            hex("B2B662C635B54FA1"),
            hex("14598E86D66B236C"),
        ));
        let blocks = vec![hex("6CA77CFBB6B97A6E"), hex("0000000000000000")];
        let first = sim_tdes(&blocks, &ts, Direction::Encrypt, TraceMode::Full).unwrap();
        let second = sim_tdes(&blocks, &ts, Direction::Encrypt, TraceMode::Full).unwrap();
        assert_eq!(first.0, second.0);
        assert_eq!(first.1, second.1);
    }

    #[test]
    fn sbox_reads_are_one_per_group() {
        let ks = key_schedule(&hex("133457799BBCDFF1"));
        let blocks = vec![hex("0123456789ABCDEF")];
        let (_, trace) = sim_des_pass(&blocks, &ks, Direction::Encrypt, TraceMode::Full).unwrap();
        for phase in trace.phases.iter().filter(|p| p.name == "sbox") {
            let table_reads = phase
                .accesses
                .iter()
                .filter(|a| {
                    a.kind == AccessKind::Read
                        && a.space == MemorySpace::ReadOnlyTables
                        && rotab::is_sbox_cell(a.cell)
                })
                .count();
            assert_eq!(table_reads, 8);
        }
    }
}
