//! BIC model selection: free-parameter counting and the sweep over
//! candidate hidden-state counts. Smaller BIC is preferred.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::corpus::EncodedCorpus;
use crate::error::{Error, Result};
use crate::hmm::{self, TrainConfig};

/// How the BIC sample size `S` is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleSizeMode {
    /// Total action events across the corpus (default).
    Events,
    /// Number of sessions.
    Sequences,
}

impl SampleSizeMode {
    pub fn sample_size(self, corpus: &EncodedCorpus) -> usize {
        match self {
            SampleSizeMode::Events => corpus.total_events(),
            SampleSizeMode::Sequences => corpus.sequences.len(),
        }
    }
}

impl std::str::FromStr for SampleSizeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "events" => Ok(SampleSizeMode::Events),
            "sequences" => Ok(SampleSizeMode::Sequences),
            other => Err(Error::InvalidArgument(format!(
                "unknown sample-size mode {other:?}, expected events|sequences"
            ))),
        }
    }
}

/// One candidate state count with its likelihood, parameter count, and BIC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BicPoint {
    pub m: usize,
    pub log_likelihood: f64,
    pub np: usize,
    pub sample_size: usize,
    pub bic: f64,
}

/// Sweep result ordered by `m`; `best_m` attains the minimal BIC with
/// ties broken toward the smaller state count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BicCurve {
    pub points: Vec<BicPoint>,
    pub best_m: usize,
}

/// Free parameters of an `M`-state HMM over `T` symbols:
/// `M(M-1)` transition + `M(T-1)` emission + `M-1` prior.
pub fn num_parameters(m: usize, t: usize) -> Result<usize> {
    if m < 1 || t < 1 {
        return Err(Error::InvalidArgument(format!(
            "num_parameters requires M >= 1 and T >= 1, got M={m}, T={t}"
        )));
    }
    Ok(m * (m - 1) + m * (t - 1) + (m - 1))
}

/// `BIC = -2 ln(L) + ln(S) * NP`, natural log throughout.
pub fn bic(log_likelihood: f64, sample_size: usize, np: usize) -> Result<f64> {
    if sample_size < 1 {
        return Err(Error::InvalidArgument(format!(
            "sample size must be >= 1, got {sample_size}"
        )));
    }
    Ok(-2.0 * log_likelihood + (sample_size as f64).ln() * np as f64)
}

/// Train one model per candidate `M` and collect the BIC curve. Restart
/// seeds for each candidate derive from `(config.seed, M)` so candidates
/// are independent and the sweep is reproducible. A degenerate fit
/// records `bic = +inf` instead of aborting the sweep.
pub fn sweep(
    corpus: &EncodedCorpus,
    m_range: RangeInclusive<usize>,
    config: &TrainConfig,
    mode: SampleSizeMode,
) -> Result<BicCurve> {
    let (lo, hi) = (*m_range.start(), *m_range.end());
    if lo < 1 || lo > hi {
        return Err(Error::InvalidArgument(format!(
            "invalid state-count range {lo}..={hi}"
        )));
    }
    let t = corpus.alphabet.size();
    let s = mode.sample_size(corpus);

    let mut points = Vec::with_capacity(hi - lo + 1);
    for m in lo..=hi {
        let per_m = TrainConfig {
            seed: hmm::derive_seed(config.seed, m as u64),
            ..*config
        };
        let outcome = hmm::train(corpus, m, &per_m)?;
        let np = num_parameters(m, t)?;
        let value = if outcome.log_likelihood.is_finite() {
            bic(outcome.log_likelihood, s, np)?
        } else {
            f64::INFINITY
        };
        points.push(BicPoint {
            m,
            log_likelihood: outcome.log_likelihood,
            np,
            sample_size: s,
            bic: value,
        });
    }

    let best_m = argmin_m(&points).expect("range validated non-empty");
    Ok(BicCurve { points, best_m })
}

/// Index of the minimal BIC; strict comparison keeps the smaller `M` on ties.
fn argmin_m(points: &[BicPoint]) -> Option<usize> {
    points
        .iter()
        .fold(None::<&BicPoint>, |best, p| match best {
            Some(b) if p.bic < b.bic => Some(p),
            None => Some(p),
            keep => keep,
        })
        .map(|p| p.m)
}

impl BicCurve {
    /// Two-column plain-text table `(M, BIC)`.
    pub fn to_table(&self) -> String {
        let mut out = String::from("M\tBIC\n");
        for p in &self.points {
            out.push_str(&format!("{}\t{:.6}\n", p.m, p.bic));
        }
        out
    }
}
