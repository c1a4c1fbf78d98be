//! Shared test helpers: an exhaustive path-enumeration oracle kept
//! deliberately independent of the scaled recursions it checks, plus
//! small random-model generators.

#![allow(dead_code)]

use tacticmine::corpus::{ActionAlphabet, Sequence};
use tacticmine::hmm::HmmModel;

/// Everything the oracle can say about one (model, sequence) pair,
/// computed by summing over all M^N hidden paths.
pub struct Enumerated {
    pub log_likelihood: f64,
    pub gamma: Vec<Vec<f64>>,
    pub xi: Vec<Vec<Vec<f64>>>,
    /// Highest-probability path, lexicographically smallest on ties.
    pub best_path: Vec<usize>,
    pub best_path_log_prob: f64,
}

fn path_probability(model: &HmmModel, path: &[usize], obs: &[usize]) -> f64 {
    let mut p = model.prior()[path[0]] * model.emission()[path[0]][obs[0]];
    for t in 1..path.len() {
        p *= model.transition()[path[t - 1]][path[t]] * model.emission()[path[t]][obs[t]];
    }
    p
}

/// Iterate over all state paths of length `n` in lexicographic order.
fn for_each_path(m: usize, n: usize, mut f: impl FnMut(&[usize])) {
    let mut path = vec![0usize; n];
    loop {
        f(&path);
        // Odometer increment.
        let mut pos = n;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            path[pos] += 1;
            if path[pos] < m {
                break;
            }
            path[pos] = 0;
        }
    }
}

pub fn enumerate(model: &HmmModel, seq: &Sequence) -> Enumerated {
    let m = model.num_states();
    let n = seq.len();
    let obs = &seq.observations;

    let mut total = 0.0;
    let mut gamma = vec![vec![0.0; m]; n];
    let mut xi = vec![vec![vec![0.0; m]; m]; n.saturating_sub(1)];
    let mut best_prob = -1.0;
    let mut best_path = vec![0usize; n];

    for_each_path(m, n, |path| {
        let p = path_probability(model, path, obs);
        total += p;
        for (t, &s) in path.iter().enumerate() {
            gamma[t][s] += p;
        }
        for t in 0..n - 1 {
            xi[t][path[t]][path[t + 1]] += p;
        }
        if p > best_prob {
            best_prob = p;
            best_path.copy_from_slice(path);
        }
    });

    for row in &mut gamma {
        for v in row.iter_mut() {
            *v /= total;
        }
    }
    for slice in &mut xi {
        for row in slice {
            for v in row.iter_mut() {
                *v /= total;
            }
        }
    }

    Enumerated {
        log_likelihood: total.ln(),
        gamma,
        xi,
        best_path,
        best_path_log_prob: best_prob.ln(),
    }
}

/// Unscaled forward probability, usable while N is short enough that the
/// product does not underflow.
pub fn naive_forward_probability(model: &HmmModel, seq: &Sequence) -> f64 {
    let m = model.num_states();
    let obs = &seq.observations;
    let mut alpha: Vec<f64> = (0..m)
        .map(|i| model.prior()[i] * model.emission()[i][obs[0]])
        .collect();
    for &o in &obs[1..] {
        let next: Vec<f64> = (0..m)
            .map(|j| {
                let inflow: f64 = (0..m).map(|i| alpha[i] * model.transition()[i][j]).sum();
                inflow * model.emission()[j][o]
            })
            .collect();
        alpha = next;
    }
    alpha.iter().sum()
}

/// Alphabet of `t` single-letter symbols.
pub fn test_alphabet(t: usize) -> ActionAlphabet {
    let letters = ["a", "b", "c", "d", "e", "f"];
    ActionAlphabet::new(letters[..t].iter().copied()).unwrap()
}

/// Seeded random model via the library's Dirichlet initializer.
pub fn random_model(m: usize, t: usize, seed: u64) -> HmmModel {
    tacticmine::hmm::random_model(&test_alphabet(t), m, seed).unwrap()
}

/// Seeded random observation sequence.
pub fn random_sequence(t: usize, n: usize, seed: u64) -> Sequence {
    // Tiny deterministic LCG; independent of the crate's RNG choices.
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut obs = Vec::with_capacity(n);
    for _ in 0..n {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        obs.push(((state >> 33) as usize) % t);
    }
    Sequence::new(format!("seq-{seed}"), obs).unwrap()
}
