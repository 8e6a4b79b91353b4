//! Hex key parsing.

use tdes::bits::bytes_to_bits;
use tdes::{BitVector, KeyTriple};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KeyFormatError {
    #[error("key must be exactly 16 hex digits, got {0}")]
    WrongLength(usize),
    #[error("key contains a non-hex character: {0:?}")]
    BadDigit(char),
}

/// Parses a 16-hex-digit key, case-insensitive, big-endian: the first hex
/// pair becomes the first octet, so bit 1 is its most significant bit.
pub fn parse_key(hex: &str) -> Result<BitVector, KeyFormatError> {
    let len = hex.chars().count();
    if len != 16 {
        return Err(KeyFormatError::WrongLength(len));
    }
    if let Some(bad) = hex.chars().find(|c| !c.is_ascii_hexdigit()) {
        return Err(KeyFormatError::BadDigit(bad));
    }
    let value = u64::from_str_radix(hex, 16).expect("validated hex digits");
    Ok(bytes_to_bits(&value.to_be_bytes()))
}

pub fn parse_key_triple(k1: &str, k2: &str, k3: &str) -> Result<KeyTriple, KeyFormatError> {
    Ok(KeyTriple::new(
        parse_key(k1)?,
        parse_key(k2)?,
        parse_key(k3)?,
    ))
}
