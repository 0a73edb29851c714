//! Distributed arithmetic coding (DAC) for binary sources whose side
//! information differs from the source by a hidden Markov residual.
//!
//! * [`arith`]: fixed-precision interval arithmetic with overlapped splits.
//! * [`codec`]: the encoder and the M-algorithm joint decoder.
//! * [`hmm`]: hidden Markov models, the normalized forward algorithm,
//!   sampling and entropy-rate estimation.
//! * [`experiments`]: the gamma-ladder rate experiment and its reports.

// Parameter checks are written as `!(lo < x && x < hi)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arith;
pub mod codec;
pub mod error;
pub mod experiments;
pub mod hmm;
pub mod par;

pub use codec::{decode, encode, Codeword, DacParams, Decoder};
pub use error::{Error, Result};
pub use hmm::HmmModel;
pub use par::Execution;
