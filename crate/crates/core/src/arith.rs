//! Fixed-precision binary arithmetic coding engine.
//!
//! Registers hold a half-open interval `[low, high)` scaled to `2^W`. Symbol
//! intervals are produced by [`CoderRegisters::split`] from a pair of
//! [`ScaledWidths`]; when the widths sum to more than `2^W` the two intervals
//! overlap, which is what makes the code distributed. Renormalization is the
//! usual E1/E2/E3 scheme with pending (underflow) bits, so emitted bits are
//! never rewritten.

use bitvec::prelude::*;

use crate::error::{Error, Result};

pub const DEFAULT_PRECISION: u32 = 16;
pub const MIN_PRECISION: u32 = 4;
pub const MAX_PRECISION: u32 = 31;

/// Destination for emitted code bits, MSB-first.
pub trait BitSink {
    fn put(&mut self, bit: bool);
}

impl BitSink for BitVec<u8, Msb0> {
    fn put(&mut self, bit: bool) {
        self.push(bit);
    }
}

impl BitSink for Vec<bool> {
    fn put(&mut self, bit: bool) {
        self.push(bit);
    }
}

pub(crate) fn check_precision(precision: u32) -> Result<()> {
    if (MIN_PRECISION..=MAX_PRECISION).contains(&precision) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "register precision {precision} outside [{MIN_PRECISION}, {MAX_PRECISION}]"
        )))
    }
}

/// Fixed-point images of the (possibly overlapped) symbol widths.
///
/// `q0` is the width of the interval for symbol 0, `q1` for symbol 1, both in
/// units of `2^-W`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScaledWidths {
    pub q0: u32,
    pub q1: u32,
    pub precision: u32,
}

impl ScaledWidths {
    pub fn overlaps(&self) -> bool {
        u64::from(self.q0) + u64::from(self.q1) > 1u64 << self.precision
    }
}

/// Quantizes `(1-p)^gamma` and `p^gamma` to `W` bits with round-to-nearest.
///
/// At `gamma == 1` the pair is forced to partition `2^W` exactly so the coder
/// degenerates to classic arithmetic coding.
pub fn scaled_widths(p: f64, gamma: f64, precision: u32) -> Result<ScaledWidths> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p} outside (0, 1)")));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma = {gamma} outside (0, 1]"
        )));
    }
    check_precision(precision)?;

    let whole = (1u64 << precision) as f64;
    let max = 1u64 << precision;
    let quantize = |w: f64| ((w * whole).round() as u64).clamp(1, max);

    let q1 = quantize(p.powf(gamma));
    let mut q0 = quantize((1.0 - p).powf(gamma));
    if gamma == 1.0 || q0 + q1 < max {
        q0 = (max - q1).max(1);
    }
    Ok(ScaledWidths {
        q0: q0 as u32,
        q1: q1 as u32,
        precision,
    })
}

/// A half-open sub-interval `[low, high)` in register coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    pub low: u32,
    pub high: u32,
}

impl Interval {
    pub fn contains(&self, value: u32) -> bool {
        self.low <= value && value < self.high
    }
}

/// The termination tag: the shortest binary fraction inside the final
/// interval, as its top `len` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tag {
    pub bits: u32,
    pub len: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoderRegisters {
    pub low: u32,
    pub high: u32,
    pub pending: u32,
    precision: u32,
}

impl CoderRegisters {
    pub fn new(precision: u32) -> Result<Self> {
        check_precision(precision)?;
        Ok(Self {
            low: 0,
            high: 1 << precision,
            pending: 0,
            precision,
        })
    }

    /// Builds registers from raw values. Panics if `low >= high` or `high > 2^W`.
    pub fn from_parts(low: u32, high: u32, pending: u32, precision: u32) -> Self {
        assert!(low < high && u64::from(high) <= 1u64 << precision);
        Self {
            low,
            high,
            pending,
            precision,
        }
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn range(&self) -> u32 {
        self.high - self.low
    }

    fn half(&self) -> u32 {
        1 << (self.precision - 1)
    }

    fn quarter(&self) -> u32 {
        1 << (self.precision - 2)
    }

    /// Sub-intervals for symbols 0 and 1.
    ///
    /// Symbol 0 takes `[low, low + floor(range*q0/2^W))`, symbol 1 takes
    /// `[low + floor(range*(2^W-q1)/2^W), high)`. Symbol 0 is widened to one
    /// unit if its scaled width floors to zero.
    pub fn split(&self, widths: &ScaledWidths) -> (Interval, Interval) {
        debug_assert_eq!(widths.precision, self.precision);
        let range = u64::from(self.range());
        let w = self.precision;
        let whole = 1u64 << w;
        let len0 = ((range * u64::from(widths.q0)) >> w).max(1) as u32;
        let start1 = ((range * (whole - u64::from(widths.q1))) >> w) as u32;
        (
            Interval {
                low: self.low,
                high: self.low + len0,
            },
            Interval {
                low: self.low + start1,
                high: self.high,
            },
        )
    }

    pub fn select(&mut self, interval: Interval) {
        debug_assert!(self.low <= interval.low && interval.high <= self.high);
        self.low = interval.low;
        self.high = interval.high;
    }

    /// Encoder-side renormalization. Leaves `range > 2^(W-2)`.
    pub fn renormalize<S: BitSink + ?Sized>(&mut self, sink: &mut S) {
        let half = self.half();
        let quarter = self.quarter();
        loop {
            if self.high <= half {
                self.emit(false, sink);
            } else if self.low >= half {
                self.emit(true, sink);
                self.low -= half;
                self.high -= half;
            } else if self.low >= quarter && self.high <= half + quarter {
                self.pending += 1;
                self.low -= quarter;
                self.high -= quarter;
            } else {
                break;
            }
            self.low <<= 1;
            self.high <<= 1;
        }
    }

    /// Decoder-side renormalization: mirrors [`renormalize`](Self::renormalize)
    /// on the registers and shifts `next_bit()` into `value`. The pending
    /// count is tracked exactly as the encoder would. Returns the number of
    /// shifts performed.
    pub fn renormalize_with_value(
        &mut self,
        value: &mut u32,
        mut next_bit: impl FnMut() -> bool,
    ) -> u32 {
        let half = self.half();
        let quarter = self.quarter();
        let mut shifts = 0;
        loop {
            if self.high <= half {
                self.pending = 0;
            } else if self.low >= half {
                self.pending = 0;
                self.low -= half;
                self.high -= half;
                *value -= half;
            } else if self.low >= quarter && self.high <= half + quarter {
                self.pending += 1;
                self.low -= quarter;
                self.high -= quarter;
                *value -= quarter;
            } else {
                break;
            }
            self.low <<= 1;
            self.high <<= 1;
            *value = (*value << 1) | u32::from(next_bit());
            shifts += 1;
        }
        shifts
    }

    fn emit<S: BitSink + ?Sized>(&mut self, bit: bool, sink: &mut S) {
        sink.put(bit);
        for _ in 0..self.pending {
            sink.put(!bit);
        }
        self.pending = 0;
    }

    /// Shortest binary fraction `c` with `low <= c < high`, at least one bit
    /// long so that any pending bits are resolved.
    pub fn tag(&self) -> Tag {
        let w = self.precision;
        for len in 1..=w {
            let step = 1u64 << (w - len);
            let c = u64::from(self.low).div_ceil(step) * step;
            if c < u64::from(self.high) {
                return Tag {
                    bits: (c >> (w - len)) as u32,
                    len,
                };
            }
        }
        unreachable!("low itself is a W-bit fraction inside [low, high)")
    }

    /// Emits the termination tag (with pending bits folded in after its first
    /// bit). A decoder reading zeros past the end recovers a value inside
    /// `[low, high)`.
    pub fn terminate<S: BitSink + ?Sized>(&mut self, sink: &mut S) {
        let tag = self.tag();
        for i in (0..tag.len).rev() {
            let bit = (tag.bits >> i) & 1 == 1;
            if i == tag.len - 1 {
                self.emit(bit, sink);
            } else {
                sink.put(bit);
            }
        }
    }

    /// The bits [`terminate`](Self::terminate) would emit, without mutating.
    pub fn termination_bits(&self) -> Vec<bool> {
        let mut out = Vec::with_capacity((self.pending + self.precision) as usize);
        self.clone().terminate(&mut out);
        out
    }
}
