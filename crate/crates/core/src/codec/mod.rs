//! Distributed arithmetic codec for binary sources.
//!
//! The encoder maps each symbol onto overlapped intervals of widths
//! `(1-p)^gamma` and `p^gamma`, except for the last `T` symbols which use the
//! plain `(1-p, p)` partition. The decoder in [`decoder`] resolves the
//! resulting ambiguity with side information.

use bitvec::prelude::*;

use crate::arith::{scaled_widths, CoderRegisters, ScaledWidths, DEFAULT_PRECISION};
use crate::error::{Error, Result};

pub mod decoder;

pub use decoder::{decide, decode, decode_without_side_info, prune, Branch, DecodeOutput, Decoder, TernaryDecision};

/// Codec parameters `{p, gamma, M, T}` plus register precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DacParams {
    /// `P(x = 1)`.
    pub p: f64,
    /// Overlap factor; 1 disables overlap.
    pub gamma: f64,
    /// Maximum number of decoder hypotheses kept after each symbol.
    pub max_branches: usize,
    /// Number of trailing symbols coded without overlap.
    pub tail: usize,
    /// Register width in bits.
    pub precision: u32,
}

impl DacParams {
    pub fn new(p: f64, gamma: f64, max_branches: usize, tail: usize) -> Result<Self> {
        let params = DacParams {
            p,
            gamma,
            max_branches,
            tail,
            precision: DEFAULT_PRECISION,
        };
        params.validate()?;
        Ok(params)
    }

    /// `p = 0.5`, `M = 2048`, `T = 15` on 16-bit registers.
    pub fn reference(gamma: f64) -> Result<Self> {
        Self::new(0.5, gamma, 2048, 15)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        self.gamma = gamma;
        self.validate()?;
        Ok(self)
    }

    pub fn with_precision(mut self, precision: u32) -> Result<Self> {
        self.precision = precision;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_branches == 0 {
            return Err(Error::InvalidParameter("M must be at least 1".into()));
        }
        // Range checks on p, gamma and W live in one place.
        scaled_widths(self.p, self.gamma, self.precision).map(|_| ())
    }

    pub(crate) fn widths(&self) -> Result<(ScaledWidths, ScaledWidths)> {
        Ok((
            scaled_widths(self.p, self.gamma, self.precision)?,
            scaled_widths(self.p, 1.0, self.precision)?,
        ))
    }

    pub(crate) fn check_length(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::InvalidParameter("sequence must be non-empty".into()));
        }
        if self.tail > n {
            return Err(Error::InvalidParameter(format!(
                "tail length {} exceeds sequence length {n}",
                self.tail
            )));
        }
        Ok(())
    }
}

/// Encoded bits (MSB-first) and the number of source symbols they carry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codeword {
    pub bits: BitVec<u8, Msb0>,
    pub n_symbols: usize,
}

impl Codeword {
    pub fn n_bits(&self) -> usize {
        self.bits.len()
    }

    /// Codeword bits per source symbol.
    pub fn rate(&self) -> f64 {
        self.bits.len() as f64 / self.n_symbols as f64
    }
}

pub(crate) fn check_binary(what: &str, seq: &[u8]) -> Result<()> {
    match seq.iter().position(|&s| s > 1) {
        Some(i) => Err(Error::InvalidParameter(format!(
            "{what}[{i}] = {} is not binary",
            seq[i]
        ))),
        None => Ok(()),
    }
}

pub fn encode(x: &[u8], params: &DacParams) -> Result<Codeword> {
    params.validate()?;
    params.check_length(x.len())?;
    check_binary("x", x)?;

    let (overlapped, exact) = params.widths()?;
    let split_at = x.len() - params.tail;
    let mut regs = CoderRegisters::new(params.precision)?;
    let mut bits = BitVec::<u8, Msb0>::with_capacity(x.len() + 2 * params.precision as usize);
    for (t, &symbol) in x.iter().enumerate() {
        let widths = if t < split_at { &overlapped } else { &exact };
        let (i0, i1) = regs.split(widths);
        regs.select(if symbol == 0 { i0 } else { i1 });
        regs.renormalize(&mut bits);
    }
    regs.terminate(&mut bits);
    Ok(Codeword {
        bits,
        n_symbols: x.len(),
    })
}
