//! Joint decoder: ternary decisions, branching on ambiguity, M-algorithm
//! pruning, and the HMM forward likelihood as branch metric.
//!
//! Every hypothesis carries its own coder registers, value register and bit
//! cursor because renormalization timing depends on the path. The codeword
//! itself is shared read-only. Decoded prefixes are not copied per branch;
//! each surviving branch records `(parent, symbol)` in a per-level traceback
//! table and the winning path is read back at the end.

use smallvec::SmallVec;

use super::{check_binary, Codeword, DacParams};
use crate::arith::{CoderRegisters, ScaledWidths};
use crate::error::{Error, Result};
use crate::hmm::{self, HmmModel, StateVec};
use crate::par::Execution;

/// Outcome of comparing the value register with the two symbol intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TernaryDecision {
    Zero,
    Ambiguous,
    One,
}

impl TernaryDecision {
    fn candidates(self) -> &'static [u8] {
        match self {
            TernaryDecision::Zero => &[0],
            TernaryDecision::One => &[1],
            TernaryDecision::Ambiguous => &[0, 1],
        }
    }
}

/// Classifies `value` against the split of `regs`. `value` must lie in
/// `[low, high)`.
pub fn decide(value: u32, regs: &CoderRegisters, widths: &ScaledWidths) -> TernaryDecision {
    let (i0, i1) = regs.split(widths);
    match (i0.contains(value), i1.contains(value)) {
        (true, true) => TernaryDecision::Ambiguous,
        (true, false) => TernaryDecision::Zero,
        (false, true) => TernaryDecision::One,
        (false, false) => unreachable!("value {value} outside [{}, {})", regs.low, regs.high),
    }
}

/// One decoder hypothesis.
#[derive(Debug, Clone)]
pub struct Branch {
    pub regs: CoderRegisters,
    /// W-bit window onto the codeword, always inside `[regs.low, regs.high)`.
    pub value: u32,
    /// Index of the next codeword bit to shift in.
    pub cursor: usize,
    /// Normalized forward vector after the last decoded symbol.
    pub alpha: StateVec,
    /// `sum(log2 delta_t)` over the decoded prefix.
    pub metric: f64,
    /// Index of the parent among the previous level's survivors.
    pub parent: u32,
    pub symbol: u8,
}

/// Keeps the `m` best-metric branches, preserving creation order among the
/// survivors. Ties go to the earlier-created branch.
pub fn prune(mut branches: Vec<Branch>, m: usize) -> Vec<Branch> {
    let keep = survivors(&branches, m);
    if keep.len() < branches.len() {
        let mut flags = keep.into_iter().peekable();
        let mut i = 0;
        branches.retain(|_| {
            let hit = flags.peek() == Some(&i);
            if hit {
                flags.next();
            }
            i += 1;
            hit
        });
    }
    branches
}

/// Indices (ascending) of the `m` branches ranked first by
/// `(metric descending, index ascending)`.
fn survivors(branches: &[Branch], m: usize) -> Vec<usize> {
    let n = branches.len();
    if n <= m {
        return (0..n).collect();
    }
    let rank = |a: &(f64, usize), b: &(f64, usize)| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1));
    let mut keys: Vec<(f64, usize)> = branches.iter().map(|b| b.metric).zip(0..).collect();
    let threshold = *keys.select_nth_unstable_by(m - 1, rank).1;
    (0..n)
        .filter(|&i| rank(&(branches[i].metric, i), &threshold).is_le())
        .collect()
}

/// Result of a full decode.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutput {
    pub symbols: Vec<u8>,
    /// `log2 P(z | model)` of the returned hypothesis.
    pub metric: f64,
    /// Whether re-terminating the returned hypothesis reproduces the codeword
    /// tail exactly. `false` means every surviving hypothesis was
    /// inconsistent and the best one was returned anyway.
    pub consistent: bool,
    /// Largest number of branches alive before pruning.
    pub peak_branches: usize,
}

pub struct Decoder<'a> {
    model: &'a HmmModel,
    params: DacParams,
    execution: Execution,
}

impl<'a> Decoder<'a> {
    pub fn new(model: &'a HmmModel, params: DacParams) -> Result<Self> {
        params.validate()?;
        if model.outputs() != 2 {
            return Err(Error::InvalidModel(format!(
                "residual model must have 2 outputs, has {}",
                model.outputs()
            )));
        }
        Ok(Self {
            model,
            params,
            execution: Execution::default(),
        })
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn decode(&self, cw: &Codeword, y: &[u8]) -> Result<DecodeOutput> {
        Ok(self.run(cw, y, None)?.expect("no reference path to lose"))
    }

    /// Whether decoding returns exactly `reference`.
    ///
    /// Gives the same answer as comparing [`decode`](Self::decode) against
    /// `reference`, but stops as soon as the reference path is pruned.
    pub fn recovers(&self, cw: &Codeword, y: &[u8], reference: &[u8]) -> Result<bool> {
        if reference.len() != cw.n_symbols {
            return Err(Error::LengthMismatch {
                expected: cw.n_symbols,
                actual: reference.len(),
            });
        }
        match self.run(cw, y, Some(reference)) {
            Ok(Some(out)) => Ok(out.symbols == reference),
            Ok(None) | Err(Error::DecodeExhausted { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    }

    fn run(&self, cw: &Codeword, y: &[u8], reference: Option<&[u8]>) -> Result<Option<DecodeOutput>> {
        let n = cw.n_symbols;
        if y.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: y.len(),
            });
        }
        self.params.check_length(n)?;
        check_binary("y", y)?;

        let w = self.params.precision as usize;
        let bits: Vec<bool> = cw.bits.iter().map(|b| *b).collect();
        let n_bits = bits.len();
        let (overlapped, exact) = self.params.widths()?;
        let split_at = n - self.params.tail;

        let value = (0..w).fold(0u32, |v, i| (v << 1) | u32::from(bits.get(i).copied().unwrap_or(false)));
        let mut level = vec![Branch {
            regs: CoderRegisters::new(self.params.precision)?,
            value,
            cursor: w,
            alpha: StateVec::new(),
            metric: 0.0,
            parent: 0,
            symbol: 0,
        }];
        let mut traceback: Vec<Vec<u32>> = Vec::with_capacity(n);
        let mut peak = 1;
        let mut on_reference = 0u32;
        let mut spare: Vec<Branch> = Vec::new();

        for (t, &y_t) in y.iter().enumerate() {
            let step = Step {
                model: self.model,
                widths: if t < split_at { &overlapped } else { &exact },
                first: t == 0,
                y_t,
                bits: &bits,
                shift_limit: n_bits + w,
            };
            let mut children = std::mem::take(&mut spare);
            children.clear();
            if self.execution.is_parallel() {
                let groups = self.execution.map(&level, |i, b| {
                    let mut out = SmallVec::<[Branch; 2]>::new();
                    step.extend(i as u32, b, &mut out);
                    out
                });
                children.extend(groups.into_iter().flatten());
            } else {
                for (i, b) in level.iter().enumerate() {
                    step.extend(i as u32, b, &mut children);
                }
            }
            if children.is_empty() {
                return Err(Error::DecodeExhausted { n_bits });
            }
            peak = peak.max(children.len());
            spare = std::mem::replace(&mut level, prune(children, self.params.max_branches));
            if let Some(r) = reference {
                match level.iter().position(|b| b.parent == on_reference && b.symbol == r[t]) {
                    Some(i) => on_reference = i as u32,
                    None => return Ok(None),
                }
            }
            traceback.push(level.iter().map(|b| (b.parent << 1) | u32::from(b.symbol)).collect());
        }

        let consistent: Vec<bool> = level.iter().map(|b| terminates_like(b, &bits, w)).collect();
        let pick = |only_consistent: bool| {
            level
                .iter()
                .enumerate()
                .filter(|(i, _)| !only_consistent || consistent[*i])
                .fold(None::<usize>, |best, (i, b)| match best {
                    Some(j) if level[j].metric >= b.metric => Some(j),
                    _ => Some(i),
                })
        };
        let (best, ok) = match pick(true) {
            Some(i) => (i, true),
            None => (pick(false).expect("level is non-empty"), false),
        };

        let mut symbols = vec![0u8; n];
        let mut idx = best as u32;
        for t in (0..n).rev() {
            let entry = traceback[t][idx as usize];
            symbols[t] = (entry & 1) as u8;
            idx = entry >> 1;
        }
        Ok(Some(DecodeOutput {
            symbols,
            metric: level[best].metric,
            consistent: ok,
            peak_branches: peak,
        }))
    }
}

/// Per-symbol context shared by every branch extension.
struct Step<'s> {
    model: &'s HmmModel,
    widths: &'s ScaledWidths,
    first: bool,
    y_t: u8,
    bits: &'s [bool],
    /// Cursor bound: a hypothesis whose encoder would have emitted every
    /// codeword bit before termination cannot match the codeword.
    shift_limit: usize,
}

impl Step<'_> {
    fn extend<E: Extend<Branch>>(&self, parent: u32, branch: &Branch, out: &mut E) {
        let mut predicted = StateVec::new();
        if self.first {
            predicted.extend_from_slice(self.model.initial());
        } else {
            hmm::predict(self.model, &branch.alpha, &mut predicted);
        }
        let (i0, i1) = branch.regs.split(self.widths);
        for &symbol in decide(branch.value, &branch.regs, self.widths).candidates() {
            let z = usize::from(symbol ^ self.y_t);
            let mut alpha = StateVec::new();
            let delta = hmm::observe(self.model, &predicted, z, &mut alpha);
            if !(delta > 0.0) {
                continue;
            }
            let mut child = Branch {
                regs: branch.regs,
                value: branch.value,
                cursor: branch.cursor,
                alpha,
                metric: branch.metric + delta.log2(),
                parent,
                symbol,
            };
            child.regs.select(if symbol == 0 { i0 } else { i1 });
            let bits = self.bits;
            let mut cursor = child.cursor;
            child.regs.renormalize_with_value(&mut child.value, || {
                let b = bits.get(cursor).copied().unwrap_or(false);
                cursor += 1;
                b
            });
            child.cursor = cursor;
            if child.cursor < self.shift_limit {
                out.extend(std::iter::once(child));
            }
        }
    }
}

/// Whether the encoder's termination from this branch's state reproduces
/// the codeword exactly (same length, same trailing bits).
fn terminates_like(branch: &Branch, bits: &[bool], precision: usize) -> bool {
    let resolved = branch.cursor - precision - branch.regs.pending as usize;
    let tail = branch.regs.termination_bits();
    resolved + tail.len() == bits.len() && bits[resolved..] == tail[..]
}

pub fn decode(cw: &Codeword, y: &[u8], model: &HmmModel, params: &DacParams) -> Result<Vec<u8>> {
    Ok(Decoder::new(model, *params)?.decode(cw, y)?.symbols)
}

/// Decodes with an uninformative model and all-zero side information. Only
/// meaningful when no ambiguity arises, i.e. at `gamma = 1`.
pub fn decode_without_side_info(cw: &Codeword, params: &DacParams) -> Result<Vec<u8>> {
    let y = vec![0u8; cw.n_symbols];
    decode(cw, &y, &HmmModel::uninformative(), params)
}
