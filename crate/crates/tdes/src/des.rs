//! Reference scalar DES and 3DES: key schedule, Feistel rounds, and the
//! encrypt-decrypt-encrypt composition.
//!
//! This is the oracle the other engines are checked against, so it stays
//! close to the textbook formulation: explicit bit vectors, explicit
//! permutation tables, no packing tricks.

use crate::bits::BitVector;
use crate::tables::{load_tables, PermutationTable};

/// Whether a block pass runs the round keys forward or reversed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Encrypt,
    Decrypt,
}

/// Three 64-bit base keys. Parity bits are carried but ignored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyTriple {
    pub k1: BitVector,
    pub k2: BitVector,
    pub k3: BitVector,
}

impl KeyTriple {
    pub fn new(k1: BitVector, k2: BitVector, k3: BitVector) -> Self {
        assert!(
            k1.width() == 64 && k2.width() == 64 && k3.width() == 64,
            "base keys must be 64 bits wide"
        );
        Self { k1, k2, k3 }
    }

    pub fn key(&self, index: usize) -> &BitVector {
        match index {
            0 => &self.k1,
            1 => &self.k2,
            2 => &self.k3,
            _ => panic!("key index out of range: {index}"),
        }
    }
}

/// The 16 48-bit round keys derived from one base key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubkeySchedule {
    subkeys: Vec<BitVector>,
}

impl SubkeySchedule {
    pub fn new(subkeys: Vec<BitVector>) -> Self {
        assert_eq!(subkeys.len(), 16, "a schedule holds exactly 16 subkeys");
        assert!(
            subkeys.iter().all(|k| k.width() == 48),
            "subkeys are 48 bits wide"
        );
        Self { subkeys }
    }

    pub fn subkeys(&self) -> &[BitVector] {
        &self.subkeys
    }

    /// The key material used in `round` (1..=16) for the given direction.
    /// Decryption walks the encryption sequence backwards.
    pub fn round_key(&self, round: usize, dir: Direction) -> &BitVector {
        debug_assert!((1..=16).contains(&round));
        match dir {
            Direction::Encrypt => &self.subkeys[round - 1],
            Direction::Decrypt => &self.subkeys[16 - round],
        }
    }
}

/// One schedule per base key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleSchedule {
    schedules: [SubkeySchedule; 3],
}

impl TripleSchedule {
    pub fn new(schedules: [SubkeySchedule; 3]) -> Self {
        Self { schedules }
    }

    /// Schedule for base key `index` in 0..=2.
    pub fn schedule(&self, index: usize) -> &SubkeySchedule {
        &self.schedules[index]
    }
}

/// Applies a bit-selection table: output bit `i` is `v[t.entries[i]]`.
///
/// This is the single place where the 1-based printed tables meet the
/// 0-based cell storage.
pub fn permute(v: &BitVector, t: &PermutationTable) -> BitVector {
    assert_eq!(
        v.width(),
        t.in_width,
        "{}: input is {} bits, table expects {}",
        t.name,
        v.width(),
        t.in_width
    );
    let cells = v.as_cells();
    let mut out = [0u8; 64];
    for (slot, &e) in out.iter_mut().zip(&t.entries) {
        *slot = cells[e - 1];
    }
    BitVector::from_cells(&out[..t.out_width()])
}

/// Circular left rotation of a 28-bit key half by 1 or 2 positions.
pub fn rotate_left28(half: &BitVector, amount: u8) -> BitVector {
    assert_eq!(half.width(), 28, "key halves are 28 bits wide");
    assert!(amount == 1 || amount == 2, "rotation amount must be 1 or 2");
    let cells = half.as_cells();
    let amount = amount as usize;
    let mut out = [0u8; 28];
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = cells[(i + amount) % 28];
    }
    BitVector::from_cells(&out)
}

/// Derives the 16 round keys: PC-1, then per round a cumulative rotation of
/// both halves followed by PC-2.
pub fn key_schedule(key: &BitVector) -> SubkeySchedule {
    let t = load_tables();
    let permuted = permute(key, &t.pc_1);
    let mut c = permuted.slice(1, 28);
    let mut d = permuted.slice(29, 56);
    let mut subkeys = Vec::with_capacity(16);
    for round in 1..=16 {
        let amount = t.shift_schedule.amount(round);
        c = rotate_left28(&c, amount);
        d = rotate_left28(&d, amount);
        subkeys.push(permute(&c.concat(&d), &t.pc_2));
    }
    SubkeySchedule::new(subkeys)
}

/// Runs the key schedule once per base key.
pub fn triple_schedule(keys: &KeyTriple) -> TripleSchedule {
    TripleSchedule::new([
        key_schedule(&keys.k1),
        key_schedule(&keys.k2),
        key_schedule(&keys.k3),
    ])
}

/// Substitutes eight 6-bit groups down to eight 4-bit values.
///
/// For group bits b1..b6, the row is `2*b1 + b6` and the column is the
/// middle four bits read as a number.
pub fn sbox_substitute(v: &BitVector) -> BitVector {
    assert_eq!(v.width(), 48, "s-box input is 48 bits wide");
    let boxes = &load_tables().sboxes;
    let cells = v.as_cells();
    let mut out = [0u8; 32];
    for (g, group) in cells.chunks(6).enumerate() {
        let row = (2 * group[0] + group[5]) as usize;
        let col = (8 * group[1] + 4 * group[2] + 2 * group[3] + group[4]) as usize;
        let value = boxes.value(g, row, col);
        for i in 0..4 {
            out[4 * g + i] = (value >> (3 - i)) & 1;
        }
    }
    BitVector::from_cells(&out)
}

/// The round function: expand, mix in the subkey, substitute, permute.
pub fn feistel_f(right: &BitVector, subkey: &BitVector) -> BitVector {
    assert_eq!(right.width(), 32);
    assert_eq!(subkey.width(), 48);
    let t = load_tables();
    let mixed = permute(right, &t.exp_d).xor(subkey);
    permute(&sbox_substitute(&mixed), &t.per)
}

/// One full DES pass over a 64-bit block.
///
/// Initial permutation, 16 Feistel rounds (`L_r = R_{r-1}`,
/// `R_r = L_{r-1} ^ f(R_{r-1}, k_r)`), pre-output `R16 || L16`, final
/// permutation. Decryption uses the same structure with the round keys
/// reversed.
pub fn des_block(block: &BitVector, ks: &SubkeySchedule, dir: Direction) -> BitVector {
    assert_eq!(block.width(), 64, "blocks are 64 bits wide");
    let t = load_tables();
    let permuted = permute(block, &t.initial_perm);
    let mut left = permuted.slice(1, 32);
    let mut right = permuted.slice(33, 64);
    for round in 1..=16 {
        let next_right = left.xor(&feistel_f(&right, ks.round_key(round, dir)));
        left = right;
        right = next_right;
    }
    permute(&right.concat(&left), &t.final_perm)
}

/// 3DES encryption: `E_k3(D_k2(E_k1(block)))`.
pub fn tdes_encrypt_block(block: &BitVector, ts: &TripleSchedule) -> BitVector {
    let first = des_block(block, ts.schedule(0), Direction::Encrypt);
    let second = des_block(&first, ts.schedule(1), Direction::Decrypt);
    des_block(&second, ts.schedule(2), Direction::Encrypt)
}

/// 3DES decryption: `D_k1(E_k2(D_k3(block)))`.
pub fn tdes_decrypt_block(block: &BitVector, ts: &TripleSchedule) -> BitVector {
    let first = des_block(block, ts.schedule(2), Direction::Decrypt);
    let second = des_block(&first, ts.schedule(1), Direction::Encrypt);
    des_block(&second, ts.schedule(0), Direction::Decrypt)
}
