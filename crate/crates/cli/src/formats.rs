//! On-disk formats.
//!
//! Codeword file: `"DAC1"`, `n_symbols: u32 BE`, `n_bits: u32 BE`, then the
//! bits packed MSB-first and zero-padded to a byte boundary.
//!
//! Sequence file: either text (`'0'`/`'1'` characters, whitespace ignored)
//! or binary (`"SEQ1"`, `length: u32 BE`, packed bits MSB-first). Readers
//! detect the binary form by its magic.

use std::fs;
use std::path::Path;

use bitvec::prelude::*;
use dac_core::Codeword;
use thiserror::Error;

pub const CODEWORD_MAGIC: &[u8; 4] = b"DAC1";
pub const SEQUENCE_MAGIC: &[u8; 4] = b"SEQ1";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("bad magic: expected {expected:?}")]
    BadMagic { expected: &'static str },
    #[error("truncated file: header declares {declared} bits, payload holds {available}")]
    Truncated { declared: usize, available: usize },
    #[error("trailing bytes after {expected} payload bytes")]
    TrailingBytes { expected: usize },
    #[error("invalid character {ch:?} at byte {offset}")]
    BadCharacter { ch: char, offset: usize },
    #[error("value {0} does not fit a 32-bit length field")]
    TooLong(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SequenceFormat {
    Text,
    Binary,
}

fn read_file(path: &Path) -> Result<Vec<u8>, FormatError> {
    fs::read(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), FormatError> {
    fs::write(path, bytes).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn be32(v: usize) -> Result<[u8; 4], FormatError> {
    u32::try_from(v).map(u32::to_be_bytes).map_err(|_| FormatError::TooLong(v))
}

fn header_field(bytes: &[u8], at: usize) -> Result<usize, FormatError> {
    let field = bytes.get(at..at + 4).ok_or(FormatError::Truncated {
        declared: 0,
        available: 0,
    })?;
    Ok(u32::from_be_bytes(field.try_into().unwrap()) as usize)
}

fn unpack(payload: &[u8], n_bits: usize) -> Result<BitVec<u8, Msb0>, FormatError> {
    let expected = n_bits.div_ceil(8);
    if payload.len() < expected {
        return Err(FormatError::Truncated {
            declared: n_bits,
            available: payload.len() * 8,
        });
    }
    if payload.len() > expected {
        return Err(FormatError::TrailingBytes { expected });
    }
    let mut bits = BitVec::<u8, Msb0>::from_slice(payload);
    bits.truncate(n_bits);
    Ok(bits)
}

fn pack(bits: &BitSlice<u8, Msb0>) -> Vec<u8> {
    let mut owned = bits.to_bitvec();
    owned.set_uninitialized(false);
    owned.into_vec()
}

pub fn encode_codeword(cw: &Codeword) -> Result<Vec<u8>, FormatError> {
    let mut out = Vec::with_capacity(12 + cw.bits.len().div_ceil(8));
    out.extend_from_slice(CODEWORD_MAGIC);
    out.extend_from_slice(&be32(cw.n_symbols)?);
    out.extend_from_slice(&be32(cw.bits.len())?);
    out.extend_from_slice(&pack(&cw.bits));
    Ok(out)
}

pub fn decode_codeword(bytes: &[u8]) -> Result<Codeword, FormatError> {
    if bytes.len() < 12 || &bytes[..4] != CODEWORD_MAGIC {
        return Err(FormatError::BadMagic { expected: "DAC1" });
    }
    let n_symbols = header_field(bytes, 4)?;
    let n_bits = header_field(bytes, 8)?;
    Ok(Codeword {
        bits: unpack(&bytes[12..], n_bits)?,
        n_symbols,
    })
}

pub fn encode_sequence(seq: &[u8], format: SequenceFormat) -> Result<Vec<u8>, FormatError> {
    match format {
        SequenceFormat::Text => {
            let mut text: Vec<u8> = Vec::with_capacity(seq.len() + seq.len() / 64 + 1);
            for line in seq.chunks(64) {
                text.extend(line.iter().map(|&b| b'0' + b));
                text.push(b'\n');
            }
            Ok(text)
        }
        SequenceFormat::Binary => {
            let bits: BitVec<u8, Msb0> = seq.iter().map(|&b| b == 1).collect();
            let mut out = Vec::with_capacity(8 + seq.len().div_ceil(8));
            out.extend_from_slice(SEQUENCE_MAGIC);
            out.extend_from_slice(&be32(seq.len())?);
            out.extend_from_slice(&pack(&bits));
            Ok(out)
        }
    }
}

pub fn decode_sequence(bytes: &[u8]) -> Result<Vec<u8>, FormatError> {
    if bytes.starts_with(SEQUENCE_MAGIC) {
        let len = header_field(bytes, 4)?;
        let bits = unpack(&bytes[8..], len)?;
        return Ok(bits.iter().map(|b| u8::from(*b)).collect());
    }
    let mut seq = Vec::with_capacity(bytes.len());
    for (offset, &c) in bytes.iter().enumerate() {
        match c {
            b'0' | b'1' => seq.push(c - b'0'),
            c if c.is_ascii_whitespace() => {}
            c => {
                return Err(FormatError::BadCharacter {
                    ch: c as char,
                    offset,
                })
            }
        }
    }
    Ok(seq)
}

pub fn read_codeword(path: &Path) -> Result<Codeword, FormatError> {
    decode_codeword(&read_file(path)?)
}

pub fn write_codeword(path: &Path, cw: &Codeword) -> Result<(), FormatError> {
    write_file(path, &encode_codeword(cw)?)
}

pub fn read_sequence(path: &Path) -> Result<Vec<u8>, FormatError> {
    decode_sequence(&read_file(path)?)
}

pub fn write_sequence(path: &Path, seq: &[u8], format: SequenceFormat) -> Result<(), FormatError> {
    write_file(path, &encode_sequence(seq, format)?)
}
