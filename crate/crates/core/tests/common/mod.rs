//! Independent reference implementations used by the integration and
//! acceptance tests. Nothing here goes through the decoder or the forward
//! recursion under test.

#![allow(dead_code)]

use dac_core::{encode, Codeword, DacParams, HmmModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_distribution(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    // Bounded away from zero so every observation stays possible.
    let raw: Vec<f64> = (0..len).map(|_| rng.gen_range(0.05..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    let mut v: Vec<f64> = raw.iter().map(|x| x / sum).collect();
    // Make the row sum to one to the last bit.
    let rest: f64 = v[1..].iter().sum();
    v[0] = 1.0 - rest;
    v
}

/// A random model with `states` states and `outputs` symbols, random `pi`.
pub fn random_model(rng: &mut ChaCha8Rng, states: usize, outputs: usize) -> HmmModel {
    let a = (0..states).map(|_| random_distribution(rng, states)).collect();
    let b = (0..states).map(|_| random_distribution(rng, outputs)).collect();
    let pi = random_distribution(rng, states);
    HmmModel::new(a, b, Some(pi)).unwrap()
}

/// `P(z | model)` by summing over all `K^N` state paths.
pub fn path_enumeration_probability(model: &HmmModel, z: &[usize]) -> f64 {
    let k = model.states();
    let n = z.len();
    let mut total = 0.0;
    let mut path = vec![0usize; n];
    loop {
        let mut p = model.initial()[path[0]] * model.emission(path[0], z[0]);
        for t in 1..n {
            p *= model.transition(path[t - 1], path[t]) * model.emission(path[t], z[t]);
        }
        total += p;
        // Odometer increment.
        let mut t = 0;
        loop {
            if t == n {
                return total;
            }
            path[t] += 1;
            if path[t] < k {
                break;
            }
            path[t] = 0;
            t += 1;
        }
    }
}

/// Unnormalized forward recursion, `sum_i alpha_t(i)` without scaling.
pub fn unnormalized_forward(model: &HmmModel, z: &[usize]) -> f64 {
    let k = model.states();
    let mut alpha: Vec<f64> = (0..k).map(|i| model.initial()[i] * model.emission(i, z[0])).collect();
    for &zt in &z[1..] {
        alpha = (0..k)
            .map(|i| (0..k).map(|j| alpha[j] * model.transition(j, i)).sum::<f64>() * model.emission(i, zt))
            .collect();
    }
    alpha.iter().sum()
}

/// The maximum-likelihood sequence among all `2^N` sequences whose encoding
/// equals `cw` bit for bit, ranked by the forward log-likelihood (itself
/// checked against path enumeration). Exact ties go to the lexicographically
/// smallest sequence (first symbol most significant). `None` if nothing
/// matches.
pub fn brute_force_decode(cw: &Codeword, y: &[u8], model: &HmmModel, params: &DacParams) -> Option<Vec<u8>> {
    let n = cw.n_symbols;
    assert!(n <= 20, "brute force over 2^{n} sequences");
    let mut best: Option<(f64, Vec<u8>)> = None;
    for code in 0u32..(1 << n) {
        let x: Vec<u8> = (0..n).map(|t| ((code >> (n - 1 - t)) & 1) as u8).collect();
        if encode(&x, params).unwrap() != *cw {
            continue;
        }
        let z: Vec<usize> = x.iter().zip(y).map(|(a, b)| usize::from(a ^ b)).collect();
        let p = dac_core::hmm::loglik(model, &z).unwrap();
        if best.as_ref().is_none_or(|(bp, _)| p > *bp) {
            best = Some((p, x));
        }
    }
    best.map(|(_, x)| x)
}

pub fn binary_entropy(p: f64) -> f64 {
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}
