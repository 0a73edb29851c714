//! Discrete hidden Markov models and the normalized forward algorithm.
//!
//! Likelihoods are accumulated as `sum(log2 delta_t)` where `delta_t` is the
//! per-step normalizer of the forward vector, so sequences of any length stay
//! representable.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smallvec::SmallVec;

use crate::error::{Error, Result};

const STOCHASTIC_TOL: f64 = 1e-12;
const STATIONARY_TOL: f64 = 1e-10;

/// Forward vectors of up to four states live inline.
pub type StateVec = SmallVec<[f64; 4]>;

/// `lambda = (A, B, pi)` over `K` states and `L` output symbols.
///
/// `a[j][i] = P(s_t = i | s_{t-1} = j)`, `b[i][k] = P(z_t = k | s_t = i)`,
/// `pi[i] = P(s_1 = i)`. Matrices are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HmmModel {
    states: usize,
    outputs: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    pi: Vec<f64>,
}

fn check_distribution(what: &str, row: &[f64]) -> Result<()> {
    if row.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidModel(format!(
            "{what} has a negative or non-finite entry: {row:?}"
        )));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::InvalidModel(format!("{what} sums to {sum}, not 1")));
    }
    Ok(())
}

impl HmmModel {
    /// Builds a model from row-stochastic matrices. When `pi` is `None` the
    /// stationary distribution of `a` is used.
    pub fn new(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>, pi: Option<Vec<f64>>) -> Result<Self> {
        let states = a.len();
        if states == 0 {
            return Err(Error::InvalidModel("no states".into()));
        }
        if b.len() != states {
            return Err(Error::InvalidModel(format!(
                "B has {} rows for {states} states",
                b.len()
            )));
        }
        let outputs = b[0].len();
        if outputs == 0 {
            return Err(Error::InvalidModel("empty output alphabet".into()));
        }
        for (j, row) in a.iter().enumerate() {
            if row.len() != states {
                return Err(Error::InvalidModel(format!("A row {j} is not length {states}")));
            }
            check_distribution(&format!("A row {j}"), row)?;
        }
        for (i, row) in b.iter().enumerate() {
            if row.len() != outputs {
                return Err(Error::InvalidModel(format!("B row {i} is not length {outputs}")));
            }
            check_distribution(&format!("B row {i}"), row)?;
        }

        let mut model = HmmModel {
            states,
            outputs,
            a: a.into_iter().flatten().collect(),
            b: b.into_iter().flatten().collect(),
            pi: vec![1.0 / states as f64; states],
        };
        model.pi = match pi {
            Some(pi) => {
                if pi.len() != states {
                    return Err(Error::InvalidModel(format!("pi is not length {states}")));
                }
                check_distribution("pi", &pi)?;
                pi
            }
            None => model.stationary()?,
        };
        Ok(model)
    }

    /// The two-state, two-output parameterization `{a00, a11, b0(0), b1(1)}`
    /// with row-stochastic completion and stationary initial distribution.
    pub fn two_state(a00: f64, a11: f64, b00: f64, b11: f64) -> Result<Self> {
        Self::new(
            vec![vec![a00, 1.0 - a00], vec![1.0 - a11, a11]],
            vec![vec![b00, 1.0 - b00], vec![1.0 - b11, b11]],
            None,
        )
    }

    /// A single-state binary model with `P(z = 1) = 0.5`: carries no
    /// information, so every hypothesis scores the same.
    pub fn uninformative() -> Self {
        HmmModel {
            states: 1,
            outputs: 2,
            a: vec![1.0],
            b: vec![0.5, 0.5],
            pi: vec![1.0],
        }
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn transition(&self, from: usize, to: usize) -> f64 {
        self.a[from * self.states + to]
    }

    pub fn emission(&self, state: usize, output: usize) -> f64 {
        self.b[state * self.outputs + output]
    }

    pub fn initial(&self) -> &[f64] {
        &self.pi
    }

    pub fn with_initial(mut self, pi: Vec<f64>) -> Result<Self> {
        if pi.len() != self.states {
            return Err(Error::InvalidModel(format!("pi is not length {}", self.states)));
        }
        check_distribution("pi", &pi)?;
        self.pi = pi;
        Ok(self)
    }

    /// Stationary distribution `v` with `vA = v`, from the linear system
    /// `(A^T - I) v = 0` with one equation replaced by `sum(v) = 1`.
    pub fn stationary(&self) -> Result<Vec<f64>> {
        let k = self.states;
        let mut m = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                m[(i, j)] = self.transition(j, i) - if i == j { 1.0 } else { 0.0 };
            }
        }
        for j in 0..k {
            m[(k - 1, j)] = 1.0;
        }
        let mut rhs = DVector::<f64>::zeros(k);
        rhs[k - 1] = 1.0;

        let v = m.lu().solve(&rhs).ok_or(Error::NonErgodicChain)?;
        if v.iter().any(|x| !x.is_finite() || *x < -STATIONARY_TOL) {
            return Err(Error::NonErgodicChain);
        }
        let v: Vec<f64> = v.iter().map(|x| x.max(0.0)).collect();
        for i in 0..k {
            let vi: f64 = (0..k).map(|j| v[j] * self.transition(j, i)).sum();
            if (vi - v[i]).abs() > STATIONARY_TOL {
                return Err(Error::NonErgodicChain);
            }
        }
        Ok(v)
    }

    fn check_observation(&self, position: usize, observation: usize) -> Result<()> {
        if observation >= self.outputs {
            Err(Error::InvalidParameter(format!(
                "observation {observation} at position {position} outside alphabet of {}",
                self.outputs
            )))
        } else {
            Ok(())
        }
    }
}

/// Normalized forward vector plus the accumulated `log2 P(z_1..z_t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardState {
    pub alpha: StateVec,
    pub loglik: f64,
    pub t: usize,
}

/// `out[i] = sum_j alpha[j] * a[j][i]`.
#[inline]
pub(crate) fn predict(model: &HmmModel, alpha: &[f64], out: &mut StateVec) {
    let k = model.states;
    out.clear();
    out.resize(k, 0.0);
    for (j, &aj) in alpha.iter().enumerate() {
        let row = &model.a[j * k..(j + 1) * k];
        for (o, &t) in out.iter_mut().zip(row) {
            *o += aj * t;
        }
    }
}

/// Weights `predicted` by the emission probabilities of `z` into `out`,
/// normalizes, and returns the normalizer `delta`.
#[inline]
pub(crate) fn observe(model: &HmmModel, predicted: &[f64], z: usize, out: &mut StateVec) -> f64 {
    out.clear();
    let mut delta = 0.0;
    for (i, &p) in predicted.iter().enumerate() {
        let v = p * model.b[i * model.outputs + z];
        delta += v;
        out.push(v);
    }
    if delta > 0.0 {
        for v in out.iter_mut() {
            *v /= delta;
        }
    }
    delta
}

pub fn forward_init(model: &HmmModel, z1: usize) -> Result<ForwardState> {
    model.check_observation(0, z1)?;
    let mut alpha = StateVec::new();
    let delta = observe(model, &model.pi, z1, &mut alpha);
    if !(delta > 0.0) {
        return Err(Error::DegenerateObservation {
            position: 0,
            observation: z1,
        });
    }
    Ok(ForwardState {
        alpha,
        loglik: delta.log2(),
        t: 1,
    })
}

pub fn forward_step(state: &ForwardState, model: &HmmModel, zt: usize) -> Result<ForwardState> {
    model.check_observation(state.t, zt)?;
    let mut predicted = StateVec::new();
    predict(model, &state.alpha, &mut predicted);
    let mut alpha = StateVec::new();
    let delta = observe(model, &predicted, zt, &mut alpha);
    if !(delta > 0.0) {
        return Err(Error::DegenerateObservation {
            position: state.t,
            observation: zt,
        });
    }
    Ok(ForwardState {
        alpha,
        loglik: state.loglik + delta.log2(),
        t: state.t + 1,
    })
}

/// `log2 P(z_1..z_n | lambda)`.
pub fn loglik(model: &HmmModel, z: &[usize]) -> Result<f64> {
    let (&first, rest) = z
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("empty observation sequence".into()))?;
    let mut state = forward_init(model, first)?;
    for &zt in rest {
        state = forward_step(&state, model, zt)?;
    }
    Ok(state.loglik)
}

fn draw(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    // Rounding left u above the last partial sum; fall back to the last
    // symbol with non-zero weight.
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Draws `(states, observations)` of length `n`. Deterministic in `seed`.
pub fn sample(model: &HmmModel, n: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = model.states;
    let l = model.outputs;
    let mut states = Vec::with_capacity(n);
    let mut obs = Vec::with_capacity(n);
    let mut s = 0;
    for t in 0..n {
        s = if t == 0 {
            draw(&mut rng, &model.pi)
        } else {
            draw(&mut rng, &model.a[s * k..(s + 1) * k])
        };
        states.push(s);
        obs.push(draw(&mut rng, &model.b[s * l..(s + 1) * l]));
    }
    (states, obs)
}

/// Monte-Carlo entropy rate in bits/symbol: `-loglik(z) / n` for one sampled
/// `z` of length `n`.
pub fn entropy_rate(model: &HmmModel, n: usize, seed: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample length must be positive".into()));
    }
    let (_, z) = sample(model, n, seed);
    Ok(-loglik(model, &z)? / n as f64)
}
