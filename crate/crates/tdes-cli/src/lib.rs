//! Library side of the `tdes` command-line tool: key parsing, the file
//! commands, the self-test suite, and the benchmark harness.

pub mod bench;
pub mod commands;
pub mod keys;
pub mod selftest;

pub use keys::{parse_key, parse_key_triple, KeyFormatError};
