//! Latent search-tactic discovery from session action logs.
//!
//! Sessions are sequences of named actions (for example Q/V/S/W/T:
//! query, view, save, workspace, topic). A discrete-observation hidden
//! Markov model is trained over them with multi-sequence Baum-Welch; the
//! number of hidden tactics is chosen by BIC; and the trained model is
//! summarized as a pruned emission table, a transition heatmap, and the
//! dominant tactic path.
//!
//! Modules:
//! - [`corpus`]: action alphabets and integer-encoded session corpora
//! - [`hmm`]: scaled forward-backward, Baum-Welch training, Viterbi
//! - [`selection`]: parameter counting, BIC, and the state-count sweep
//! - [`ingest`]: CSV/JSONL session log parsing and encoding
//! - [`simulate`]: seeded sampling from a known model (planted oracles)
//! - [`report`]: emission pruning, heatmaps, dominant path, alignment
//! - [`model_file`]: JSON model persistence

pub mod corpus;
pub mod error;
pub mod hmm;
pub mod ingest;
pub mod model_file;
pub mod report;
pub mod selection;
pub mod simulate;

pub use corpus::{ActionAlphabet, EncodedCorpus, Sequence};
pub use error::{Error, Result};
pub use hmm::{HmmModel, TrainConfig, Trellis};
pub use selection::{BicCurve, BicPoint, SampleSizeMode};
