//! Action alphabets, integer-encoded sequences, and corpora.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered set of distinct action names. Its size is the `T` of the
/// emission matrix (the number of observable action types).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionAlphabet {
    symbols: Vec<String>,
}

impl ActionAlphabet {
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::InvalidArgument(
                "alphabet must contain at least one symbol".into(),
            ));
        }
        let mut seen = HashMap::new();
        for (k, s) in symbols.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "alphabet symbol {k} is empty"
                )));
            }
            if let Some(prev) = seen.insert(s.clone(), k) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate alphabet symbol {s:?} at positions {prev} and {k}"
                )));
            }
        }
        Ok(Self { symbols })
    }

    /// Number of action types (`T`).
    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, index: usize) -> Option<&str> {
        self.symbols.get(index).map(String::as_str)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == name)
    }
}

/// One session's integer-encoded action sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sequence {
    pub session_id: String,
    pub observations: Vec<usize>,
}

impl Sequence {
    pub fn new(session_id: impl Into<String>, observations: Vec<usize>) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::InvalidArgument(
                "sequence must contain at least one observation".into(),
            ));
        }
        Ok(Self {
            session_id: session_id.into(),
            observations,
        })
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}

/// A set of encoded sessions together with the alphabet that encoded them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedCorpus {
    pub alphabet: ActionAlphabet,
    pub sequences: Vec<Sequence>,
}

impl EncodedCorpus {
    pub fn new(alphabet: ActionAlphabet, sequences: Vec<Sequence>) -> Result<Self> {
        if sequences.is_empty() {
            return Err(Error::InvalidArgument(
                "corpus must contain at least one sequence".into(),
            ));
        }
        let t = alphabet.size();
        for seq in &sequences {
            for (pos, &obs) in seq.observations.iter().enumerate() {
                if obs >= t {
                    return Err(Error::Encoding(format!(
                        "sequence {:?} position {pos}: symbol index {obs} outside alphabet of size {t}",
                        seq.session_id
                    )));
                }
            }
        }
        Ok(Self {
            alphabet,
            sequences,
        })
    }

    /// Total observation count across all sequences.
    pub fn total_events(&self) -> usize {
        self.sequences.iter().map(Sequence::len).sum()
    }

    /// Decode one sequence back to its action-name list.
    pub fn decode(&self, seq: &Sequence) -> Vec<&str> {
        seq.observations
            .iter()
            .map(|&k| self.alphabet.symbol(k).expect("index validated on construction"))
            .collect()
    }
}
