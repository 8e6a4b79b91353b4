//! The eight DES constant arrays and their structural validation.
//!
//! All permutation tables use 1-based source-bit indexing, exactly as they
//! are conventionally printed, so they can be audited entry by entry. The
//! only place that converts to 0-based indexing is [`crate::des::permute`].

use std::sync::OnceLock;

/// Permuted choice 1: selects 56 of 64 key bits, dropping the 8 parity bits.
#[rustfmt::skip]
const PC_1: [u8; 56] = [
    57, 49, 41, 33, 25, 17,  9,
     1, 58, 50, 42, 34, 26, 18,
    10,  2, 59, 51, 43, 35, 27,
    19, 11,  3, 60, 52, 44, 36,
    63, 55, 47, 39, 31, 23, 15,
     7, 62, 54, 46, 38, 30, 22,
    14,  6, 61, 53, 45, 37, 29,
    21, 13,  5, 28, 20, 12,  4,
];

/// Per-round left-rotation amounts for the two 28-bit key halves.
#[rustfmt::skip]
const SHIFT_KEYS: [u8; 16] = [
    1, 1, 2, 2,
    2, 2, 2, 2,
    1, 2, 2, 2,
    2, 2, 2, 1,
];

/// Permuted choice 2: compresses the rotated 56-bit halves to a 48-bit subkey.
#[rustfmt::skip]
const PC_2: [u8; 48] = [
    14, 17, 11, 24,  1,  5,
     3, 28, 15,  6, 21, 10,
    23, 19, 12,  4, 26,  8,
    16,  7, 27, 20, 13,  2,
    41, 52, 31, 37, 47, 55,
    30, 40, 51, 45, 33, 48,
    44, 49, 39, 56, 34, 53,
    46, 42, 50, 36, 29, 32,
];

/// Initial permutation of the 64-bit block.
#[rustfmt::skip]
const INITIAL_PERM: [u8; 64] = [
    58, 50, 42, 34, 26, 18, 10,  2,
    60, 52, 44, 36, 28, 20, 12,  4,
    62, 54, 46, 38, 30, 22, 14,  6,
    64, 56, 48, 40, 32, 24, 16,  8,
    57, 49, 41, 33, 25, 17,  9,  1,
    59, 51, 43, 35, 27, 19, 11,  3,
    61, 53, 45, 37, 29, 21, 13,  5,
    63, 55, 47, 39, 31, 23, 15,  7,
];

/// Expansion D-box: expands the 32-bit right half to 48 bits.
#[rustfmt::skip]
const EXP_D: [u8; 48] = [
    32,  1,  2,  3,  4,  5,  4,  5,
     6,  7,  8,  9,  8,  9, 10, 11,
    12, 13, 12, 13, 14, 15, 16, 17,
    16, 17, 18, 19, 20, 21, 20, 21,
    22, 23, 24, 25, 24, 25, 26, 27,
    28, 29, 28, 29, 30, 31, 32,  1,
];

/// The eight S-boxes, each 4 rows of 16 four-bit values.
#[rustfmt::skip]
const SBOXES: [[[u8; 16]; 4]; 8] = [
    [
        [14,  4, 13,  1,  2, 15, 11,  8,  3, 10,  6, 12,  5,  9,  0,  7],
        [ 0, 15,  7,  4, 14,  2, 13,  1, 10,  6, 12, 11,  9,  5,  3,  8],
        [ 4,  1, 14,  8, 13,  6,  2, 11, 15, 12,  9,  7,  3, 10,  5,  0],
        [15, 12,  8,  2,  4,  9,  1,  7,  5, 11,  3, 14, 10,  0,  6, 13],
    ],
    [
        [15,  1,  8, 14,  6, 11,  3,  4,  9,  7,  2, 13, 12,  0,  5, 10],
        [ 3, 13,  4,  7, 15,  2,  8, 14, 12,  0,  1, 10,  6,  9, 11,  5],
        [ 0, 14,  7, 11, 10,  4, 13,  1,  5,  8, 12,  6,  9,  3,  2, 15],
        [13,  8, 10,  1,  3, 15,  4,  2, 11,  6,  7, 12,  0,  5, 14,  9],
    ],
    [
        [10,  0,  9, 14,  6,  3, 15,  5,  1, 13, 12,  7, 11,  4,  2,  8],
        [13,  7,  0,  9,  3,  4,  6, 10,  2,  8,  5, 14, 12, 11, 15,  1],
        [13,  6,  4,  9,  8, 15,  3,  0, 11,  1,  2, 12,  5, 10, 14,  7],
        [ 1, 10, 13,  0,  6,  9,  8,  7,  4, 15, 14,  3, 11,  5,  2, 12],
    ],
    [
        [ 7, 13, 14,  3,  0,  6,  9, 10,  1,  2,  8,  5, 11, 12,  4, 15],
        [13,  8, 11,  5,  6, 15,  0,  3,  4,  7,  2, 12,  1, 10, 14,  9],
        [10,  6,  9,  0, 12, 11,  7, 13, 15,  1,  3, 14,  5,  2,  8,  4],
        [ 3, 15,  0,  6, 10,  1, 13,  8,  9,  4,  5, 11, 12,  7,  2, 14],
    ],
    [
        [ 2, 12,  4,  1,  7, 10, 11,  6,  8,  5,  3, 15, 13,  0, 14,  9],
        [14, 11,  2, 12,  4,  7, 13,  1,  5,  0, 15, 10,  3,  9,  8,  6],
        [ 4,  2,  1, 11, 10, 13,  7,  8, 15,  9, 12,  5,  6,  3,  0, 14],
        [11,  8, 12,  7,  1, 14,  2, 13,  6, 15,  0,  9, 10,  4,  5,  3],
    ],
    [
        [12,  1, 10, 15,  9,  2,  6,  8,  0, 13,  3,  4, 14,  7,  5, 11],
        [10, 15,  4,  2,  7, 12,  9,  5,  6,  1, 13, 14,  0, 11,  3,  8],
        [ 9, 14, 15,  5,  2,  8, 12,  3,  7,  0,  4, 10,  1, 13, 11,  6],
        [ 4,  3,  2, 12,  9,  5, 15, 10, 11, 14,  1,  7,  6,  0,  8, 13],
    ],
    [
        [ 4, 11,  2, 14, 15,  0,  8, 13,  3, 12,  9,  7,  5, 10,  6,  1],
        [13,  0, 11,  7,  4,  9,  1, 10, 14,  3,  5, 12,  2, 15,  8,  6],
        [ 1,  4, 11, 13, 12,  3,  7, 14, 10, 15,  6,  8,  0,  5,  9,  2],
        [ 6, 11, 13,  8,  1,  4, 10,  7,  9,  5,  0, 15, 14,  2,  3, 12],
    ],
    [
        [13,  2,  8,  4,  6, 15, 11,  1, 10,  9,  3, 14,  5,  0, 12,  7],
        [ 1, 15, 13,  8, 10,  3,  7,  4, 12,  5,  6, 11,  0, 14,  9,  2],
        [ 7, 11,  4,  1,  9, 12, 14,  2,  0,  6, 10, 13, 15,  3,  5,  8],
        [ 2,  1, 14,  7,  4, 10,  8, 13, 15, 12,  9,  0,  3,  5,  6, 11],
    ],
];

/// Straight permutation applied to the 32-bit S-box output.
#[rustfmt::skip]
const PER: [u8; 32] = [
    16,  7, 20, 21,
    29, 12, 28, 17,
     1, 15, 23, 26,
     5, 18, 31, 10,
     2,  8, 24, 14,
    32, 27,  3,  9,
    19, 13, 30,  6,
    22, 11,  4, 25,
];

/// Final permutation, the inverse of [`INITIAL_PERM`].
#[rustfmt::skip]
const FINAL_PERM: [u8; 64] = [
    40,  8, 48, 16, 56, 24, 64, 32,
    39,  7, 47, 15, 55, 23, 63, 31,
    38,  6, 46, 14, 54, 22, 62, 30,
    37,  5, 45, 13, 53, 21, 61, 29,
    36,  4, 44, 12, 52, 20, 60, 28,
    35,  3, 43, 11, 51, 19, 59, 27,
    34,  2, 42, 10, 50, 18, 58, 26,
    33,  1, 41,  9, 49, 17, 57, 25,
];

/// A bit-selection table: output bit `i` comes from input bit `entries[i-1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationTable {
    pub name: &'static str,
    /// 1-based source-bit indices.
    pub entries: Vec<usize>,
    pub in_width: usize,
}

impl PermutationTable {
    pub fn new(name: &'static str, entries: Vec<usize>, in_width: usize) -> Self {
        Self {
            name,
            entries,
            in_width,
        }
    }

    pub fn out_width(&self) -> usize {
        self.entries.len()
    }

    /// 1-based lookup, matching the printed table convention.
    pub fn entry(&self, pos: usize) -> usize {
        self.entries[pos - 1]
    }
}

/// The 16 per-round rotation amounts for the key-schedule halves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftSchedule {
    pub amounts: [u8; 16],
}

impl ShiftSchedule {
    /// Rotation amount for `round` in 1..=16.
    pub fn amount(&self, round: usize) -> u8 {
        self.amounts[round - 1]
    }

    pub fn total(&self) -> u32 {
        self.amounts.iter().map(|&a| u32::from(a)).sum()
    }
}

/// The eight 4x16 substitution boxes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SboxSet {
    pub boxes: [[[u8; 16]; 4]; 8],
}

impl SboxSet {
    pub fn value(&self, box_index: usize, row: usize, col: usize) -> u8 {
        self.boxes[box_index][row][col]
    }
}

/// All eight constant arrays, loaded once and immutable thereafter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableSet {
    pub pc_1: PermutationTable,
    pub pc_2: PermutationTable,
    pub initial_perm: PermutationTable,
    pub exp_d: PermutationTable,
    pub per: PermutationTable,
    pub final_perm: PermutationTable,
    pub shift_schedule: ShiftSchedule,
    pub sboxes: SboxSet,
}

fn table(name: &'static str, raw: &[u8], in_width: usize) -> PermutationTable {
    PermutationTable::new(name, raw.iter().map(|&e| e as usize).collect(), in_width)
}

static TABLES: OnceLock<TableSet> = OnceLock::new();

/// Returns the compiled-in table set.
pub fn load_tables() -> &'static TableSet {
    TABLES.get_or_init(|| TableSet {
        pc_1: table("pc_1", &PC_1, 64),
        pc_2: table("pc_2", &PC_2, 56),
        initial_perm: table("initial_perm", &INITIAL_PERM, 64),
        exp_d: table("exp_d", &EXP_D, 32),
        per: table("per", &PER, 32),
        final_perm: table("final_perm", &FINAL_PERM, 64),
        shift_schedule: ShiftSchedule {
            amounts: SHIFT_KEYS,
        },
        sboxes: SboxSet { boxes: SBOXES },
    })
}

/// One named structural check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: Option<String>,
}

impl Check {
    fn pass(name: &'static str) -> Self {
        Self {
            name,
            passed: true,
            detail: None,
        }
    }

    fn fail(name: &'static str, detail: String) -> Self {
        Self {
            name,
            passed: false,
            detail: Some(detail),
        }
    }
}

/// Outcome of [`validate_tables`]: one entry per structural invariant.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn check(&mut self, name: &'static str, ok: bool, detail: impl FnOnce() -> String) {
        self.checks.push(if ok {
            Check::pass(name)
        } else {
            Check::fail(name, detail())
        });
    }
}

fn is_permutation_of(entries: &[usize], lo: usize, hi: usize) -> bool {
    let mut seen = vec![false; hi + 1];
    if entries.len() != hi - lo + 1 {
        return false;
    }
    for &e in entries {
        if e < lo || e > hi || seen[e] {
            return false;
        }
        seen[e] = true;
    }
    true
}

fn distinct_in_range(entries: &[usize], count: usize, lo: usize, hi: usize) -> bool {
    let mut seen = vec![false; hi + 1];
    if entries.len() != count {
        return false;
    }
    for &e in entries {
        if e < lo || e > hi || seen[e] {
            return false;
        }
        seen[e] = true;
    }
    true
}

/// Scans every table against its structural invariants. Failures come back as
/// report entries, not errors.
pub fn validate_tables(t: &TableSet) -> ValidationReport {
    let mut report = ValidationReport::default();

    report.check(
        "pc_1 has 56 distinct entries in 1..=64",
        distinct_in_range(&t.pc_1.entries, 56, 1, 64),
        || format!("entries: {:?}", t.pc_1.entries),
    );
    report.check(
        "pc_1 excludes parity positions",
        t.pc_1.entries.iter().all(|&e| e % 8 != 0),
        || {
            let bad: Vec<_> = t.pc_1.entries.iter().filter(|&&e| e % 8 == 0).collect();
            format!("parity positions present: {bad:?}")
        },
    );
    report.check(
        "pc_2 has 48 distinct entries in 1..=56",
        distinct_in_range(&t.pc_2.entries, 48, 1, 56),
        || format!("entries: {:?}", t.pc_2.entries),
    );
    report.check(
        "initial_perm is a permutation of 1..=64",
        is_permutation_of(&t.initial_perm.entries, 1, 64),
        || format!("entries: {:?}", t.initial_perm.entries),
    );
    report.check(
        "final_perm is a permutation of 1..=64",
        is_permutation_of(&t.final_perm.entries, 1, 64),
        || format!("entries: {:?}", t.final_perm.entries),
    );

    // IP/FP mutual inverse: selecting through IP then FP must be the identity,
    // which for tables reads final_perm[initial_perm[i]] = i.
    let mutual_inverse = t.initial_perm.entries.len() == 64
        && t.final_perm.entries.len() == 64
        && (1..=64).all(|i| {
            let via = t.initial_perm.entry(i);
            (1..=64).contains(&via) && t.final_perm.entry(via) == i
        });
    report.check("IP/FP mutual inverse", mutual_inverse, || {
        "final_perm[initial_perm[i]] != i for some i".to_string()
    });

    report.check(
        "per is a permutation of 1..=32",
        is_permutation_of(&t.per.entries, 1, 32),
        || format!("entries: {:?}", t.per.entries),
    );
    report.check(
        "exp_d has 48 entries in 1..=32",
        t.exp_d.entries.len() == 48 && t.exp_d.entries.iter().all(|&e| (1..=32).contains(&e)),
        || format!("entries: {:?}", t.exp_d.entries),
    );
    let mut uses = [0usize; 33];
    for &e in &t.exp_d.entries {
        if (1..=32).contains(&e) {
            uses[e] += 1;
        }
    }
    let doubled = uses[1..].iter().filter(|&&n| n == 2).count();
    report.check(
        "exp_d covers 1..=32 with exactly 16 doubled values",
        uses[1..].iter().all(|&n| n >= 1) && doubled == 16,
        || format!("use counts: {:?}", &uses[1..]),
    );

    report.check(
        "shift amounts are all 1 or 2",
        t.shift_schedule.amounts.iter().all(|&a| a == 1 || a == 2),
        || format!("amounts: {:?}", t.shift_schedule.amounts),
    );
    report.check(
        "shift amounts sum to 28",
        t.shift_schedule.total() == 28,
        || format!("sum = {}", t.shift_schedule.total()),
    );

    report.check(
        "s-box values lie in 0..=15",
        t.sboxes.boxes.iter().flatten().flatten().all(|&v| v <= 15),
        || "value out of range".to_string(),
    );
    let rows_ok = t.sboxes.boxes.iter().all(|b| {
        b.iter().all(|row| {
            let mut seen = [false; 16];
            row.iter().all(|&v| {
                let v = v as usize;
                v < 16 && !std::mem::replace(&mut seen[v], true)
            })
        })
    });
    report.check("each s-box row is a permutation of 0..=15", rows_ok, || {
        "some row repeats or omits a value".to_string()
    });

    report
}
