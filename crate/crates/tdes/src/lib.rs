//! Triple DES toolkit built around three equivalence-checked execution
//! engines:
//!
//! - [`des`]: a scalar reference implementation of the key schedule, the
//!   Feistel rounds, and the EDE/DED composition. This is the oracle.
//! - [`sim`]: a deterministic, phase-synchronous simulator of the bit-level
//!   kernel decomposition (one thread per bit, explicit memory spaces),
//!   with race detection and access accounting.
//! - [`engine`]: a multi-worker block-parallel ECB engine with PKCS#7
//!   padding.
//!
//! [`tables`] owns the constant arrays everything else consumes and proves
//! their structural integrity.

pub mod bits;
pub mod des;
pub mod engine;
pub mod sim;
pub mod tables;

pub use bits::{bits_to_bytes, bytes_to_bits, BitVector};
pub use des::{Direction, KeyTriple, SubkeySchedule, TripleSchedule};
