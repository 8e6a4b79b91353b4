//! Post-hoc trace analysis: the race detector, access accounting, and the
//! line-oriented trace export.

use super::{AccessKind, KernelTrace, MemorySpace, MemoryStats, ThreadId};
use std::collections::HashMap;
use std::io::{self, Write};

/// One cell written by two or more distinct threads within a single phase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RaceFinding {
    pub launch: usize,
    pub phase: &'static str,
    pub round: u8,
    pub block: usize,
    pub space: MemorySpace,
    pub cell: usize,
    pub writers: Vec<ThreadId>,
}

/// Scans every recorded phase for cells written by more than one thread.
/// An empty report means the trace is race-free. Only meaningful for
/// [`super::TraceMode::Full`] traces; stats-only traces have no phases to
/// scan.
pub fn check_race_freedom(trace: &KernelTrace) -> Vec<RaceFinding> {
    let mut findings = Vec::new();
    let mut writers: HashMap<(MemorySpace, usize), Vec<ThreadId>> = HashMap::new();
    for phase in &trace.phases {
        writers.clear();
        for access in &phase.accesses {
            if access.kind == AccessKind::Write {
                writers
                    .entry((access.space, access.cell))
                    .or_default()
                    .push(access.thread);
            }
        }
        let mut conflicts: Vec<RaceFinding> = Vec::new();
        for (&(space, cell), threads) in &writers {
            let mut distinct: Vec<ThreadId> = Vec::new();
            for &t in threads {
                if !distinct.contains(&t) {
                    distinct.push(t);
                }
            }
            if distinct.len() > 1 {
                conflicts.push(RaceFinding {
                    launch: phase.launch,
                    phase: phase.name,
                    round: phase.round,
                    block: phase.block,
                    space,
                    cell,
                    writers: distinct,
                });
            }
        }
        conflicts.sort_by_key(|f| (f.space, f.cell));
        findings.extend(conflicts);
    }
    findings
}

/// Per-space read/write totals for the trace.
pub fn memory_stats(trace: &KernelTrace) -> MemoryStats {
    trace.stats.clone()
}

/// Writes the trace as line-oriented text, one line per access:
/// `phase,round,block,lane,space,cell,op`.
pub fn write_trace<W: Write>(trace: &KernelTrace, mut w: W) -> io::Result<()> {
    for phase in &trace.phases {
        for a in &phase.accesses {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                phase.name,
                phase.round,
                a.thread.block_index,
                a.thread.lane,
                a.space.label(),
                a.cell,
                a.kind.label()
            )?;
        }
    }
    Ok(())
}
