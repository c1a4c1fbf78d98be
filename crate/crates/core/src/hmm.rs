//! Discrete-observation hidden Markov models: scaled forward-backward,
//! multi-sequence Baum-Welch training, and Viterbi decoding.
//!
//! All recursions use Rabiner-style per-step scaling coefficients rather
//! than log-space arithmetic; the sequence log-likelihood is recovered
//! from the scales as `-sum(ln c_t)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{ActionAlphabet, EncodedCorpus, Sequence};
use crate::error::{Error, Result};

/// Probability rows must sum to 1 within this tolerance.
pub const ROW_SUM_TOL: f64 = 1e-9;

/// Floor applied to emission probabilities inside E-step denominators only.
const EMISSION_FLOOR: f64 = 1e-12;

/// A discrete HMM over a named action alphabet: `M` hidden tactics, prior
/// over the initial tactic, row-stochastic `M x M` transition matrix, and
/// row-stochastic `M x T` emission matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HmmModel {
    alphabet: ActionAlphabet,
    prior: Vec<f64>,
    transition: Vec<Vec<f64>>,
    emission: Vec<Vec<f64>>,
}

fn check_row(row: &[f64], what: &str) -> Result<()> {
    let mut sum = 0.0;
    for &p in row {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "{what} entry {p} outside [0, 1]"
            )));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > ROW_SUM_TOL {
        return Err(Error::InvalidArgument(format!(
            "{what} sums to {sum}, expected 1 within {ROW_SUM_TOL}"
        )));
    }
    Ok(())
}

impl HmmModel {
    pub fn new(
        alphabet: ActionAlphabet,
        prior: Vec<f64>,
        transition: Vec<Vec<f64>>,
        emission: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let m = prior.len();
        if m == 0 {
            return Err(Error::InvalidArgument("model must have at least one state".into()));
        }
        if transition.len() != m || emission.len() != m {
            return Err(Error::InvalidArgument(format!(
                "prior has {m} states but transition has {} rows and emission {} rows",
                transition.len(),
                emission.len()
            )));
        }
        check_row(&prior, "prior")?;
        for (i, row) in transition.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidArgument(format!(
                    "transition row {i} has {} entries, expected {m}",
                    row.len()
                )));
            }
            check_row(row, &format!("transition row {i}"))?;
        }
        let t = alphabet.size();
        for (i, row) in emission.iter().enumerate() {
            if row.len() != t {
                return Err(Error::InvalidArgument(format!(
                    "emission row {i} has {} entries, expected {t}",
                    row.len()
                )));
            }
            check_row(row, &format!("emission row {i}"))?;
        }
        Ok(Self {
            alphabet,
            prior,
            transition,
            emission,
        })
    }

    /// Number of hidden tactics (`M`).
    pub fn num_states(&self) -> usize {
        self.prior.len()
    }

    pub fn alphabet(&self) -> &ActionAlphabet {
        &self.alphabet
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn emission(&self) -> &[Vec<f64>] {
        &self.emission
    }

    /// Relabel hidden states: state `i` of the result is state `perm[i]`
    /// of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let m = self.num_states();
        let mut seen = vec![false; m];
        if perm.len() != m {
            return Err(Error::InvalidArgument(format!(
                "permutation has {} entries, expected {m}",
                perm.len()
            )));
        }
        for &p in perm {
            if p >= m || seen[p] {
                return Err(Error::InvalidArgument(format!(
                    "invalid permutation {perm:?} of {m} states"
                )));
            }
            seen[p] = true;
        }
        let prior = perm.iter().map(|&i| self.prior[i]).collect();
        let transition = perm
            .iter()
            .map(|&i| perm.iter().map(|&j| self.transition[i][j]).collect())
            .collect();
        let emission = perm.iter().map(|&i| self.emission[i].clone()).collect();
        Self::new(self.alphabet.clone(), prior, transition, emission)
    }

    fn check_sequence(&self, seq: &Sequence) -> Result<()> {
        let t = self.alphabet.size();
        for (pos, &obs) in seq.observations.iter().enumerate() {
            if obs >= t {
                return Err(Error::Encoding(format!(
                    "sequence {:?} position {pos}: symbol index {obs} outside alphabet of size {t}",
                    seq.session_id
                )));
            }
        }
        Ok(())
    }

    /// Emission matrix with entries floored at `EMISSION_FLOOR`, used only
    /// inside the E-step so zero-probability observations cannot produce a
    /// degenerate trellis mid-training. Returns `None` when no entry needs
    /// flooring.
    fn floored(&self) -> Option<Self> {
        let needs = self
            .emission
            .iter()
            .any(|row| row.iter().any(|&p| p < EMISSION_FLOOR));
        if !needs {
            return None;
        }
        let mut floored = self.clone();
        for row in &mut floored.emission {
            for p in row {
                *p = p.max(EMISSION_FLOOR);
            }
        }
        Some(floored)
    }

    /// Scaled forward pass. Fills the forward half of the trellis and the
    /// sequence log-likelihood; the backward half is left empty.
    ///
    /// A sequence with zero probability under the model is reported with
    /// `log_likelihood = -inf` and the `degenerate` flag, not an error.
    pub fn forward(&self, seq: &Sequence) -> Result<Trellis> {
        self.check_sequence(seq)?;
        let n = seq.len();
        let m = self.num_states();
        let mut scaled_forward = vec![vec![0.0; m]; n];
        let mut scales = Vec::with_capacity(n);
        let mut log_likelihood = 0.0;

        for t in 0..n {
            let obs = seq.observations[t];
            if t == 0 {
                for i in 0..m {
                    scaled_forward[0][i] = self.prior[i] * self.emission[i][obs];
                }
            } else {
                let (prev, cur) = scaled_forward.split_at_mut(t);
                let prev = &prev[t - 1];
                let row = &mut cur[0];
                for j in 0..m {
                    let mut acc = 0.0;
                    for i in 0..m {
                        acc += prev[i] * self.transition[i][j];
                    }
                    row[j] = acc * self.emission[j][obs];
                }
            }
            let sum: f64 = scaled_forward[t].iter().sum();
            if sum <= 0.0 {
                return Ok(Trellis {
                    scaled_forward,
                    scaled_backward: Vec::new(),
                    scales,
                    log_likelihood: f64::NEG_INFINITY,
                    degenerate: true,
                });
            }
            let c = 1.0 / sum;
            for v in &mut scaled_forward[t] {
                *v *= c;
            }
            scales.push(c);
            log_likelihood -= c.ln();
        }

        Ok(Trellis {
            scaled_forward,
            scaled_backward: Vec::new(),
            scales,
            log_likelihood,
            degenerate: false,
        })
    }

    /// Scaled backward pass using the scaling coefficients produced by
    /// [`forward`](Self::forward) on the same `(model, seq)` pair.
    pub fn backward(&self, seq: &Sequence, scales: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_sequence(seq)?;
        let n = seq.len();
        if scales.len() != n {
            return Err(Error::Contract(format!(
                "{} scales for a sequence of length {n}",
                scales.len()
            )));
        }
        let m = self.num_states();
        let mut beta = vec![vec![0.0; m]; n];
        beta[n - 1].fill(1.0);
        for t in (0..n - 1).rev() {
            let obs = seq.observations[t + 1];
            let c = scales[t + 1];
            let (cur, next) = beta.split_at_mut(t + 1);
            let next = &next[0];
            for i in 0..m {
                let mut acc = 0.0;
                for j in 0..m {
                    acc += self.transition[i][j] * self.emission[j][obs] * next[j];
                }
                cur[t][i] = c * acc;
            }
        }
        Ok(beta)
    }

    /// State and transition posteriors: `gamma[t][i] = P(state_t = i | seq)`
    /// and `xi[t][i][j] = P(state_t = i, state_{t+1} = j | seq)`.
    ///
    /// For a length-1 sequence `xi` is empty while `gamma` is still defined.
    pub fn posteriors(&self, seq: &Sequence) -> Result<Posteriors> {
        let trellis = self.forward(seq)?;
        if trellis.degenerate {
            return Err(Error::Degenerate(format!(
                "sequence {:?} has zero probability under the model",
                seq.session_id
            )));
        }
        let beta = self.backward(seq, &trellis.scales)?;
        let n = seq.len();
        let m = self.num_states();

        let mut gamma = vec![vec![0.0; m]; n];
        for t in 0..n {
            for i in 0..m {
                gamma[t][i] = trellis.scaled_forward[t][i] * beta[t][i];
            }
        }

        let mut xi = Vec::with_capacity(n.saturating_sub(1));
        for t in 0..n - 1 {
            let obs = seq.observations[t + 1];
            let c = trellis.scales[t + 1];
            let mut slice = vec![vec![0.0; m]; m];
            for i in 0..m {
                for j in 0..m {
                    slice[i][j] = trellis.scaled_forward[t][i]
                        * self.transition[i][j]
                        * self.emission[j][obs]
                        * beta[t + 1][j]
                        * c;
                }
            }
            xi.push(slice);
        }

        Ok(Posteriors {
            gamma,
            xi,
            log_likelihood: trellis.log_likelihood,
        })
    }

    /// Most probable hidden path and its joint log-probability with the
    /// observations. Ties break toward the lower state index at every
    /// backtrack step.
    pub fn viterbi(&self, seq: &Sequence) -> Result<(Vec<usize>, f64)> {
        self.check_sequence(seq)?;
        let n = seq.len();
        let m = self.num_states();
        let mut delta = vec![vec![f64::NEG_INFINITY; m]; n];
        let mut psi = vec![vec![0usize; m]; n];

        let obs0 = seq.observations[0];
        for i in 0..m {
            delta[0][i] = self.prior[i].ln() + self.emission[i][obs0].ln();
        }
        for t in 1..n {
            let obs = seq.observations[t];
            for j in 0..m {
                let mut best = f64::NEG_INFINITY;
                let mut arg = 0;
                for i in 0..m {
                    let v = delta[t - 1][i] + self.transition[i][j].ln();
                    if v > best {
                        best = v;
                        arg = i;
                    }
                }
                delta[t][j] = best + self.emission[j][obs].ln();
                psi[t][j] = arg;
            }
        }

        let mut best = f64::NEG_INFINITY;
        let mut last = 0;
        for i in 0..m {
            if delta[n - 1][i] > best {
                best = delta[n - 1][i];
                last = i;
            }
        }
        if best == f64::NEG_INFINITY {
            return Err(Error::Degenerate(format!(
                "sequence {:?}: every hidden path has probability zero",
                seq.session_id
            )));
        }

        let mut path = vec![0usize; n];
        path[n - 1] = last;
        for t in (1..n).rev() {
            path[t - 1] = psi[t][path[t]];
        }
        Ok((path, best))
    }
}

/// Per-sequence scaled trellis. `scales[t]` is the Rabiner coefficient
/// `c_t` (reciprocal of the unscaled forward row sum), so
/// `log_likelihood = -sum(ln c_t)`.
#[derive(Debug, Clone)]
pub struct Trellis {
    pub scaled_forward: Vec<Vec<f64>>,
    pub scaled_backward: Vec<Vec<f64>>,
    pub scales: Vec<f64>,
    pub log_likelihood: f64,
    pub degenerate: bool,
}

/// E-step output for one sequence.
#[derive(Debug, Clone)]
pub struct Posteriors {
    pub gamma: Vec<Vec<f64>>,
    pub xi: Vec<Vec<Vec<f64>>>,
    pub log_likelihood: f64,
}

/// Training knobs. All randomness flows from `seed`; identical configs
/// reproduce bit-identical results.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iters: 500,
            tol: 1e-6,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.restarts < 1 {
            return Err(Error::InvalidArgument("restarts must be >= 1".into()));
        }
        if self.max_iters < 1 {
            return Err(Error::InvalidArgument("max_iters must be >= 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tol must be > 0".into()));
        }
        Ok(())
    }
}

/// Result of one Baum-Welch re-estimation step.
#[derive(Debug, Clone)]
pub struct BaumWelchStep {
    pub model: HmmModel,
    /// Total corpus log-likelihood under the *input* model.
    pub log_likelihood: f64,
    /// States whose rows were re-initialized to uniform because they
    /// received zero expected occupancy.
    pub reinitialized_states: Vec<usize>,
}

/// Result of a full training run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: HmmModel,
    pub log_likelihood: f64,
    pub iterations: usize,
}

/// Splittable seed derivation (splitmix64 finalizer over the pair), so
/// restarts and sweep candidates draw from independent streams.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn dirichlet_row(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    // Symmetric Dirichlet(1.0): normalized Exp(1) draws.
    let mut row: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let sum: f64 = row.iter().sum();
    for v in &mut row {
        *v /= sum;
    }
    row
}

/// Random model with Dirichlet(1.0) rows, for restart initialization.
pub fn random_model(alphabet: &ActionAlphabet, m: usize, seed: u64) -> Result<HmmModel> {
    if m < 1 {
        return Err(Error::InvalidArgument("M must be >= 1".into()));
    }
    let t = alphabet.size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prior = dirichlet_row(&mut rng, m);
    let transition = (0..m).map(|_| dirichlet_row(&mut rng, m)).collect();
    let emission = (0..m).map(|_| dirichlet_row(&mut rng, t)).collect();
    HmmModel::new(alphabet.clone(), prior, transition, emission)
}

/// Total log-likelihood of a corpus, summed over sequences.
pub fn corpus_log_likelihood(model: &HmmModel, corpus: &EncodedCorpus) -> Result<f64> {
    let mut total = 0.0;
    for seq in &corpus.sequences {
        total += model.forward(seq)?.log_likelihood;
    }
    Ok(total)
}

/// One EM iteration: expected counts are pooled across all sequences, and
/// the prior is re-estimated from the initial-state posteriors averaged
/// over sequences.
pub fn baum_welch_step(model: &HmmModel, corpus: &EncodedCorpus) -> Result<BaumWelchStep> {
    if corpus.alphabet != *model.alphabet() {
        return Err(Error::InvalidArgument(
            "corpus alphabet does not match model alphabet".into(),
        ));
    }
    let m = model.num_states();
    let t = model.alphabet().size();

    let floored = model.floored();
    let work = floored.as_ref().unwrap_or(model);

    let mut prior_acc = vec![0.0; m];
    let mut trans_num = vec![vec![0.0; m]; m];
    let mut emis_num = vec![vec![0.0; t]; m];
    let mut emis_den = vec![0.0; m];
    let mut total_ll = 0.0;

    for seq in &corpus.sequences {
        let post = work.posteriors(seq)?;
        total_ll += post.log_likelihood;
        for (i, &g) in post.gamma[0].iter().enumerate() {
            prior_acc[i] += g;
        }
        for slice in &post.xi {
            for i in 0..m {
                for j in 0..m {
                    trans_num[i][j] += slice[i][j];
                }
            }
        }
        for (tpos, &obs) in seq.observations.iter().enumerate() {
            for i in 0..m {
                let g = post.gamma[tpos][i];
                emis_num[i][obs] += g;
                emis_den[i] += g;
            }
        }
    }

    // Flooring changes the reported likelihood only when the input model
    // had hard zeros; recompute under the unfloored model in that case.
    if floored.is_some() {
        total_ll = corpus_log_likelihood(model, corpus)?;
    }

    let mut reinitialized = Vec::new();

    let n_seqs = corpus.sequences.len() as f64;
    let mut prior: Vec<f64> = prior_acc.iter().map(|&p| p / n_seqs).collect();
    let prior_sum: f64 = prior.iter().sum();
    for p in &mut prior {
        *p /= prior_sum;
    }

    let mut transition = vec![vec![0.0; m]; m];
    let mut emission = vec![vec![0.0; t]; m];
    for i in 0..m {
        let trans_den: f64 = trans_num[i].iter().sum();
        let mut starved = false;
        if trans_den > 0.0 {
            for j in 0..m {
                transition[i][j] = trans_num[i][j] / trans_den;
            }
        } else {
            transition[i].fill(1.0 / m as f64);
            starved = true;
        }
        if emis_den[i] > 0.0 {
            for k in 0..t {
                emission[i][k] = emis_num[i][k] / emis_den[i];
            }
        } else {
            emission[i].fill(1.0 / t as f64);
            starved = true;
        }
        // Absorb float drift so row-sum invariants hold exactly enough.
        let ts: f64 = transition[i].iter().sum();
        for v in &mut transition[i] {
            *v /= ts;
        }
        let es: f64 = emission[i].iter().sum();
        for v in &mut emission[i] {
            *v /= es;
        }
        if starved {
            reinitialized.push(i);
        }
    }

    Ok(BaumWelchStep {
        model: HmmModel::new(model.alphabet().clone(), prior, transition, emission)?,
        log_likelihood: total_ll,
        reinitialized_states: reinitialized,
    })
}

fn train_single(
    corpus: &EncodedCorpus,
    m: usize,
    config: &TrainConfig,
    restart_seed: u64,
) -> Result<TrainOutcome> {
    let mut model = random_model(&corpus.alphabet, m, restart_seed)?;
    let mut prev_ll = f64::NEG_INFINITY;
    let mut iterations = 0;
    for _ in 0..config.max_iters {
        let step = baum_welch_step(&model, corpus)?;
        iterations += 1;
        let ll = step.log_likelihood;
        model = step.model;
        let improvement = ll - prev_ll;
        prev_ll = ll;
        if improvement < config.tol {
            break;
        }
    }
    let log_likelihood = corpus_log_likelihood(&model, corpus)?;
    Ok(TrainOutcome {
        model,
        log_likelihood,
        iterations,
    })
}

/// Train an `M`-state model: `restarts` independent EM runs from seeded
/// Dirichlet initializations; the run with the highest final
/// log-likelihood wins, ties broken toward the lower restart index.
pub fn train(corpus: &EncodedCorpus, m: usize, config: &TrainConfig) -> Result<TrainOutcome> {
    if m < 1 {
        return Err(Error::InvalidArgument("M must be >= 1".into()));
    }
    config.validate()?;

    let runs: Vec<Result<TrainOutcome>> = (0..config.restarts)
        .into_par_iter()
        .map(|r| train_single(corpus, m, config, derive_seed(config.seed, r as u64)))
        .collect();

    let mut best: Option<TrainOutcome> = None;
    for run in runs {
        let run = run?;
        let better = match &best {
            None => true,
            Some(b) => run.log_likelihood > b.log_likelihood,
        };
        if better {
            best = Some(run);
        }
    }
    Ok(best.expect("restarts >= 1"))
}
