//! Seed-deterministic sampling of synthetic corpora from a known model,
//! plus the built-in five-tactic reference model used as the planted
//! ground truth in recovery and selection tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{ActionAlphabet, EncodedCorpus, Sequence};
use crate::error::{Error, Result};
use crate::hmm::HmmModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthDistribution {
    Fixed(usize),
    /// Inclusive bounds.
    Uniform(usize, usize),
}

/// Specification of a synthetic corpus: the generating model, how many
/// sequences, how long, and the seed that fully determines the draw.
#[derive(Debug, Clone)]
pub struct PlantedSpec {
    pub model: HmmModel,
    pub n_sequences: usize,
    pub lengths: LengthDistribution,
    pub seed: u64,
}

impl PlantedSpec {
    fn validate(&self) -> Result<()> {
        if self.n_sequences < 1 {
            return Err(Error::InvalidArgument("n_sequences must be >= 1".into()));
        }
        match self.lengths {
            LengthDistribution::Fixed(l) if l < 1 => {
                Err(Error::InvalidArgument("sequence length must be >= 1".into()))
            }
            LengthDistribution::Uniform(a, b) if a < 1 || a > b => Err(Error::InvalidArgument(
                format!("invalid length range [{a}, {b}]"),
            )),
            _ => Ok(()),
        }
    }
}

fn draw_categorical(rng: &mut ChaCha8Rng, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    probs.len() - 1
}

/// Sample a corpus: initial state from the prior, successive states from
/// transition rows, one observation per state from its emission row. The
/// hidden paths are returned alongside for oracle checks.
pub fn sample(spec: &PlantedSpec) -> Result<(EncodedCorpus, Vec<Vec<usize>>)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let model = &spec.model;

    let mut sequences = Vec::with_capacity(spec.n_sequences);
    let mut hidden_paths = Vec::with_capacity(spec.n_sequences);
    for s in 0..spec.n_sequences {
        let len = match spec.lengths {
            LengthDistribution::Fixed(l) => l,
            LengthDistribution::Uniform(a, b) => rng.random_range(a..=b),
        };
        let mut states = Vec::with_capacity(len);
        let mut observations = Vec::with_capacity(len);
        let mut state = draw_categorical(&mut rng, model.prior());
        for t in 0..len {
            if t > 0 {
                state = draw_categorical(&mut rng, &model.transition()[state]);
            }
            states.push(state);
            observations.push(draw_categorical(&mut rng, &model.emission()[state]));
        }
        sequences.push(Sequence::new(format!("s{}", s + 1), observations)?);
        hidden_paths.push(states);
    }

    let corpus = EncodedCorpus::new(model.alphabet().clone(), sequences)?;
    Ok((corpus, hidden_paths))
}

/// The built-in five-tactic reference model over the Q/V/S/W/T action
/// alphabet. Reported emission peaks sit on their published cells with
/// the residual row mass spread uniformly over the remaining symbols;
/// the prior and transition matrix are artifact constants chosen so the
/// greedy argmax walk from the highest-prior tactic visits
/// S5 -> S1 -> S2 -> S3 -> S4, with S4 self-dominant.
pub fn paper_planted_model() -> HmmModel {
    let alphabet = ActionAlphabet::new(["Q", "V", "S", "W", "T"]).unwrap();

    // Symbol order: Q, V, S, W, T. Rows are S1..S5.
    let f3 = 0.02 / 3.0; // S1 residual over V, S, W
    let emission = vec![
        vec![0.92, f3, f3, f3, 0.06],
        vec![0.0075, 0.97, 0.0075, 0.0075, 0.0075],
        vec![0.005, 0.98, 0.005, 0.005, 0.005],
        vec![0.0075, 0.0075, 0.0075, 0.97, 0.0075],
        vec![0.01 / 3.0, 0.01 / 3.0, 0.01 / 3.0, 0.67, 0.32],
    ];
    let transition = vec![
        vec![0.15, 0.55, 0.10, 0.05, 0.15], // S1 -> S2
        vec![0.10, 0.20, 0.50, 0.10, 0.10], // S2 -> S3
        vec![0.05, 0.10, 0.20, 0.55, 0.10], // S3 -> S4
        vec![0.10, 0.05, 0.05, 0.70, 0.10], // S4 self-dominant
        vec![0.60, 0.05, 0.05, 0.10, 0.20], // S5 -> S1
    ];
    let prior = vec![0.10, 0.05, 0.05, 0.05, 0.75];

    HmmModel::new(alphabet, prior, transition, emission).unwrap()
}
