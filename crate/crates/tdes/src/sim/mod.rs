//! Deterministic, phase-synchronous simulator of the bit-level kernel
//! decomposition: a 3-block x 56-thread key-generation kernel and an
//! N-block x 64-thread encryption/decryption kernel.
//!
//! Execution is sequential but models one thread per bit. Within a phase
//! every read observes the state left by the previous phase and every write
//! commits when the phase ends, which gives barrier semantics and makes
//! intra-phase write conflicts well defined. Each memory access is tagged
//! with the space it touches so traces can be audited against the intended
//! memory design (constant tables in the read-only cache, the shift table
//! in constant memory, per-block text in shared memory).

mod crypt;
mod keygen;
mod report;

pub use crypt::{sim_des_pass, sim_tdes};
pub use keygen::sim_keygen;
pub use report::{check_race_freedom, memory_stats, write_trace, RaceFinding};

use crate::tables::{load_tables, TableSet};
use std::fmt;

/// Lanes per key-generation kernel block (one per selected key bit).
pub const KEYGEN_BLOCK_WIDTH: usize = 56;
/// Lanes per encryption/decryption kernel block (one per text bit).
pub const CRYPT_BLOCK_WIDTH: usize = 64;

/// A simulated thread: which kernel block it belongs to and its lane inside
/// that block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ThreadId {
    pub block_index: usize,
    pub lane: usize,
}

/// The memory space an access touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MemorySpace {
    /// Permutation and S-box tables (read-only cache).
    ReadOnlyTables,
    /// The 16-entry shift table (constant memory).
    ConstantShift,
    /// Per-block working cells, one cell per bit (shared memory).
    SharedBlock,
    /// Input text blocks.
    GlobalIn,
    /// Output cells (cipher text, or subkeys for the keygen kernel).
    GlobalOut,
    /// Key material: base keys for keygen, round keys for the crypt kernel.
    GlobalKeys,
}

impl MemorySpace {
    pub const ALL: [MemorySpace; 6] = [
        MemorySpace::ReadOnlyTables,
        MemorySpace::ConstantShift,
        MemorySpace::SharedBlock,
        MemorySpace::GlobalIn,
        MemorySpace::GlobalOut,
        MemorySpace::GlobalKeys,
    ];

    pub fn label(self) -> &'static str {
        match self {
            MemorySpace::ReadOnlyTables => "read_only_tables",
            MemorySpace::ConstantShift => "constant_shift",
            MemorySpace::SharedBlock => "shared_block",
            MemorySpace::GlobalIn => "global_in",
            MemorySpace::GlobalOut => "global_out",
            MemorySpace::GlobalKeys => "global_keys",
        }
    }

    fn index(self) -> usize {
        match self {
            MemorySpace::ReadOnlyTables => 0,
            MemorySpace::ConstantShift => 1,
            MemorySpace::SharedBlock => 2,
            MemorySpace::GlobalIn => 3,
            MemorySpace::GlobalOut => 4,
            MemorySpace::GlobalKeys => 5,
        }
    }
}

impl fmt::Display for MemorySpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AccessKind {
    Read,
    Write,
}

impl AccessKind {
    pub fn label(self) -> &'static str {
        match self {
            AccessKind::Read => "read",
            AccessKind::Write => "write",
        }
    }
}

/// One recorded memory access.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Access {
    pub thread: ThreadId,
    pub space: MemorySpace,
    pub cell: usize,
    pub kind: AccessKind,
}

/// Everything one phase of one block did, in flowchart order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseRecord {
    /// Kernel launch this phase belongs to (0 for single launches, 0..=2
    /// for the three 3DES passes).
    pub launch: usize,
    pub name: &'static str,
    /// Round 1..=16 inside the round loop, 0 outside it.
    pub round: u8,
    pub block: usize,
    pub accesses: Vec<Access>,
}

/// Read/write tallies for one memory space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SpaceCounts {
    pub reads: u64,
    pub writes: u64,
}

/// Per-space access tallies for a whole trace.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MemoryStats {
    counts: [SpaceCounts; 6],
}

impl MemoryStats {
    pub fn get(&self, space: MemorySpace) -> SpaceCounts {
        self.counts[space.index()]
    }

    pub fn total_reads(&self) -> u64 {
        self.counts.iter().map(|c| c.reads).sum()
    }

    pub fn total_writes(&self) -> u64 {
        self.counts.iter().map(|c| c.writes).sum()
    }

    fn bump(&mut self, space: MemorySpace, kind: AccessKind) {
        let c = &mut self.counts[space.index()];
        match kind {
            AccessKind::Read => c.reads += 1,
            AccessKind::Write => c.writes += 1,
        }
    }

    /// Re-derives the tallies from recorded phases. For a full trace this
    /// must equal the incrementally maintained stats.
    pub fn fold_phases(phases: &[PhaseRecord]) -> MemoryStats {
        let mut stats = MemoryStats::default();
        for phase in phases {
            for access in &phase.accesses {
                stats.bump(access.space, access.kind);
            }
        }
        stats
    }
}

/// Whether a run keeps per-access records or only the per-space tallies.
/// Large benchmark runs drop the access lists; the race detector needs
/// full traces only at test scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceMode {
    Full,
    StatsOnly,
}

/// The record of one simulated kernel run (or, for 3DES, three consecutive
/// launches merged in order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelTrace {
    /// (block count, lanes per block).
    pub grid: (usize, usize),
    /// Number of kernel launches folded into this trace.
    pub launches: usize,
    pub mode: TraceMode,
    /// Per-block phases in flowchart order; empty in [`TraceMode::StatsOnly`].
    pub phases: Vec<PhaseRecord>,
    pub stats: MemoryStats,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error(
        "write race in phase {phase} (round {round}, block {block}): \
         {space} cell {cell} written by lane {first_lane} and lane {second_lane}"
    )]
    RaceFault {
        phase: &'static str,
        round: u8,
        block: usize,
        space: MemorySpace,
        cell: usize,
        first_lane: usize,
        second_lane: usize,
    },
    #[error("out-of-range access in phase {phase}: {space} cell {cell}, space size {size}")]
    IndexFault {
        phase: &'static str,
        space: MemorySpace,
        cell: usize,
        size: usize,
    },
}

/// Cell layout of the read-only table space, part of the trace format:
/// each printed table gets a contiguous window; S-box cells are addressed
/// box-major, then row, then column.
pub mod rotab {
    pub const PC1: usize = 0;
    pub const PC2: usize = PC1 + 56;
    pub const IP: usize = PC2 + 48;
    pub const EXPD: usize = IP + 64;
    pub const PER: usize = EXPD + 48;
    pub const FP: usize = PER + 32;
    pub const SBOX: usize = FP + 64;
    pub const SIZE: usize = SBOX + 8 * 64;

    pub fn sbox_cell(box_index: usize, row: usize, col: usize) -> usize {
        SBOX + box_index * 64 + row * 16 + col
    }

    /// True if the cell addresses an S-box value.
    pub fn is_sbox_cell(cell: usize) -> bool {
        (SBOX..SIZE).contains(&cell)
    }
}

const NO_THREAD: ThreadId = ThreadId {
    block_index: usize::MAX,
    lane: usize::MAX,
};

/// Backing storage for one kernel launch plus the per-phase write tracking
/// used for race detection.
pub(crate) struct LaunchMem {
    tables: &'static TableSet,
    global_in: Vec<u8>,
    global_out: Vec<u8>,
    global_keys: Vec<u8>,
    shared: Vec<u8>,
    shared_stamp: Vec<u32>,
    shared_writer: Vec<ThreadId>,
    out_stamp: Vec<u32>,
    out_writer: Vec<ThreadId>,
    phase_seq: u32,
}

impl LaunchMem {
    pub(crate) fn new(
        global_in: Vec<u8>,
        global_keys: Vec<u8>,
        out_cells: usize,
        shared_cells: usize,
    ) -> Self {
        Self {
            tables: load_tables(),
            global_in,
            global_out: vec![0; out_cells],
            global_keys,
            shared: vec![0; shared_cells],
            shared_stamp: vec![0; shared_cells],
            shared_writer: vec![NO_THREAD; shared_cells],
            out_stamp: vec![0; out_cells],
            out_writer: vec![NO_THREAD; out_cells],
            phase_seq: 0,
        }
    }

    pub(crate) fn reset_shared(&mut self) {
        self.shared.fill(0);
    }

    pub(crate) fn into_output(self) -> Vec<u8> {
        self.global_out
    }

    fn space_len(&self, space: MemorySpace) -> usize {
        match space {
            MemorySpace::ReadOnlyTables => rotab::SIZE,
            MemorySpace::ConstantShift => 16,
            MemorySpace::SharedBlock => self.shared.len(),
            MemorySpace::GlobalIn => self.global_in.len(),
            MemorySpace::GlobalOut => self.global_out.len(),
            MemorySpace::GlobalKeys => self.global_keys.len(),
        }
    }

    fn value(&self, space: MemorySpace, cell: usize) -> u8 {
        match space {
            MemorySpace::ReadOnlyTables => self.table_value(cell),
            MemorySpace::ConstantShift => self.tables.shift_schedule.amounts[cell],
            MemorySpace::SharedBlock => self.shared[cell],
            MemorySpace::GlobalIn => self.global_in[cell],
            MemorySpace::GlobalOut => self.global_out[cell],
            MemorySpace::GlobalKeys => self.global_keys[cell],
        }
    }

    fn table_value(&self, cell: usize) -> u8 {
        let t = self.tables;
        match cell {
            c if c < rotab::PC2 => t.pc_1.entries[c - rotab::PC1] as u8,
            c if c < rotab::IP => t.pc_2.entries[c - rotab::PC2] as u8,
            c if c < rotab::EXPD => t.initial_perm.entries[c - rotab::IP] as u8,
            c if c < rotab::PER => t.exp_d.entries[c - rotab::EXPD] as u8,
            c if c < rotab::FP => t.per.entries[c - rotab::PER] as u8,
            c if c < rotab::SBOX => t.final_perm.entries[c - rotab::FP] as u8,
            c => {
                let i = c - rotab::SBOX;
                t.sboxes.value(i / 64, (i % 64) / 16, i % 16)
            }
        }
    }

    fn store(&mut self, space: MemorySpace, cell: usize, value: u8) {
        match space {
            MemorySpace::SharedBlock => self.shared[cell] = value,
            MemorySpace::GlobalOut => self.global_out[cell] = value,
            _ => unreachable!("kernels never write {space}"),
        }
    }
}

/// Collects phases and stats for one or more launches.
pub(crate) struct Tracer {
    mode: TraceMode,
    grid: (usize, usize),
    launches: usize,
    phases: Vec<PhaseRecord>,
    stats: MemoryStats,
}

impl Tracer {
    pub(crate) fn new(mode: TraceMode, grid: (usize, usize)) -> Self {
        Self {
            mode,
            grid,
            launches: 0,
            phases: Vec::new(),
            stats: MemoryStats::default(),
        }
    }

    pub(crate) fn begin_launch(&mut self) -> usize {
        self.launches += 1;
        self.launches - 1
    }

    pub(crate) fn finish(self) -> KernelTrace {
        KernelTrace {
            grid: self.grid,
            launches: self.launches,
            mode: self.mode,
            phases: self.phases,
            stats: self.stats,
        }
    }
}

/// Executes the phases of one launch. Writes are buffered and commit when
/// the phase ends, so every read inside a phase sees the pre-phase state.
pub(crate) struct PhaseEngine<'t> {
    mem: LaunchMem,
    tracer: &'t mut Tracer,
    launch: usize,
    name: &'static str,
    round: u8,
    block: usize,
    accesses: Vec<Access>,
    writes: Vec<(MemorySpace, usize, u8)>,
}

impl<'t> PhaseEngine<'t> {
    pub(crate) fn new(mem: LaunchMem, tracer: &'t mut Tracer) -> Self {
        let launch = tracer.begin_launch();
        Self {
            mem,
            tracer,
            launch,
            name: "",
            round: 0,
            block: 0,
            accesses: Vec::new(),
            writes: Vec::new(),
        }
    }

    pub(crate) fn mem(&mut self) -> &mut LaunchMem {
        &mut self.mem
    }

    pub(crate) fn into_mem(self) -> LaunchMem {
        debug_assert!(self.writes.is_empty(), "phase left uncommitted writes");
        self.mem
    }

    pub(crate) fn begin(&mut self, name: &'static str, round: u8, block: usize) {
        debug_assert!(self.writes.is_empty(), "previous phase was not ended");
        self.name = name;
        self.round = round;
        self.block = block;
        self.mem.phase_seq += 1;
    }

    pub(crate) fn read(
        &mut self,
        thread: ThreadId,
        space: MemorySpace,
        cell: usize,
    ) -> Result<u8, SimError> {
        let size = self.mem.space_len(space);
        if cell >= size {
            return Err(SimError::IndexFault {
                phase: self.name,
                space,
                cell,
                size,
            });
        }
        self.tracer.stats.bump(space, AccessKind::Read);
        if self.tracer.mode == TraceMode::Full {
            self.accesses.push(Access {
                thread,
                space,
                cell,
                kind: AccessKind::Read,
            });
        }
        Ok(self.mem.value(space, cell))
    }

    pub(crate) fn write(
        &mut self,
        thread: ThreadId,
        space: MemorySpace,
        cell: usize,
        value: u8,
    ) -> Result<(), SimError> {
        let size = self.mem.space_len(space);
        if cell >= size {
            return Err(SimError::IndexFault {
                phase: self.name,
                space,
                cell,
                size,
            });
        }
        let (stamp, writer) = match space {
            MemorySpace::SharedBlock => (&mut self.mem.shared_stamp, &mut self.mem.shared_writer),
            MemorySpace::GlobalOut => (&mut self.mem.out_stamp, &mut self.mem.out_writer),
            _ => unreachable!("kernels never write {space}"),
        };
        if stamp[cell] == self.mem.phase_seq && writer[cell] != thread {
            return Err(SimError::RaceFault {
                phase: self.name,
                round: self.round,
                block: self.block,
                space,
                cell,
                first_lane: writer[cell].lane,
                second_lane: thread.lane,
            });
        }
        stamp[cell] = self.mem.phase_seq;
        writer[cell] = thread;
        self.tracer.stats.bump(space, AccessKind::Write);
        if self.tracer.mode == TraceMode::Full {
            self.accesses.push(Access {
                thread,
                space,
                cell,
                kind: AccessKind::Write,
            });
        }
        self.writes.push((space, cell, value));
        Ok(())
    }

    /// Commits the buffered writes and seals the phase record.
    pub(crate) fn end(&mut self) {
        for (space, cell, value) in self.writes.drain(..) {
            self.mem.store(space, cell, value);
        }
        if self.tracer.mode == TraceMode::Full {
            self.tracer.phases.push(PhaseRecord {
                launch: self.launch,
                name: self.name,
                round: self.round,
                block: self.block,
                accesses: std::mem::take(&mut self.accesses),
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lane(n: usize) -> ThreadId {
        ThreadId {
            block_index: 0,
            lane: n,
        }
    }

    #[test]
    fn reads_see_pre_phase_state_until_commit() {
        let mut tracer = Tracer::new(TraceMode::Full, (1, 2));
        let mut engine = PhaseEngine::new(LaunchMem::new(vec![], vec![], 0, 4), &mut tracer);

        engine.begin("setup", 0, 0);
        engine
            .write(lane(0), MemorySpace::SharedBlock, 0, 1)
            .unwrap();
        assert_eq!(
            engine.read(lane(1), MemorySpace::SharedBlock, 0).unwrap(),
            0
        );
        engine.end();
        engine.begin("after", 0, 0);
        assert_eq!(
            engine.read(lane(1), MemorySpace::SharedBlock, 0).unwrap(),
            1
        );
        engine.end();
    }

    #[test]
    fn conflicting_writers_raise_race_fault() {
        let mut tracer = Tracer::new(TraceMode::Full, (1, 2));
        let mut engine = PhaseEngine::new(LaunchMem::new(vec![], vec![], 0, 4), &mut tracer);

        engine.begin("clash", 3, 0);
        engine
            .write(lane(0), MemorySpace::SharedBlock, 2, 1)
            .unwrap();
        // The same lane may overwrite its own cell.
        engine
            .write(lane(0), MemorySpace::SharedBlock, 2, 0)
            .unwrap();
        let err = engine
            .write(lane(1), MemorySpace::SharedBlock, 2, 1)
            .unwrap_err();
        match err {
            SimError::RaceFault {
                phase,
                round,
                cell,
                first_lane,
                second_lane,
                ..
            } => {
                assert_eq!(phase, "clash");
                assert_eq!(round, 3);
                assert_eq!(cell, 2);
                assert_eq!((first_lane, second_lane), (0, 1));
            }
            other => panic!("expected a race fault, got {other:?}"),
        }
    }

    #[test]
    fn same_cell_in_different_phases_is_fine() {
        let mut tracer = Tracer::new(TraceMode::Full, (1, 2));
        let mut engine = PhaseEngine::new(LaunchMem::new(vec![], vec![], 0, 4), &mut tracer);

        engine.begin("first", 0, 0);
        engine
            .write(lane(0), MemorySpace::SharedBlock, 1, 1)
            .unwrap();
        engine.end();
        engine.begin("second", 0, 0);
        engine
            .write(lane(1), MemorySpace::SharedBlock, 1, 0)
            .unwrap();
        engine.end();
        assert_eq!(tracer.phases.len(), 2);
    }

    #[test]
    fn out_of_range_cell_raises_index_fault() {
        let mut tracer = Tracer::new(TraceMode::Full, (1, 2));
        let mut engine = PhaseEngine::new(LaunchMem::new(vec![0; 8], vec![], 0, 4), &mut tracer);

        engine.begin("oob", 0, 0);
        let err = engine.read(lane(0), MemorySpace::GlobalIn, 8).unwrap_err();
        assert_eq!(
            err,
            SimError::IndexFault {
                phase: "oob",
                space: MemorySpace::GlobalIn,
                cell: 8,
                size: 8
            }
        );
        let err = engine
            .write(lane(0), MemorySpace::SharedBlock, 4, 1)
            .unwrap_err();
        assert!(matches!(err, SimError::IndexFault { .. }));
    }

    #[test]
    fn table_space_serves_every_window() {
        let t = load_tables();
        let mem = LaunchMem::new(vec![], vec![], 0, 0);
        assert_eq!(mem.value(MemorySpace::ReadOnlyTables, rotab::PC1), 57);
        assert_eq!(mem.value(MemorySpace::ReadOnlyTables, rotab::IP), 58);
        assert_eq!(mem.value(MemorySpace::ReadOnlyTables, rotab::EXPD), 32);
        assert_eq!(mem.value(MemorySpace::ReadOnlyTables, rotab::PER), 16);
        assert_eq!(mem.value(MemorySpace::ReadOnlyTables, rotab::FP), 40);
        assert_eq!(
            mem.value(MemorySpace::ReadOnlyTables, rotab::sbox_cell(0, 0, 0)),
            14
        );
        assert_eq!(
            mem.value(MemorySpace::ReadOnlyTables, rotab::sbox_cell(7, 3, 15)),
            11
        );
        assert_eq!(
            mem.value(MemorySpace::ConstantShift, 2),
            t.shift_schedule.amounts[2]
        );
    }
}
