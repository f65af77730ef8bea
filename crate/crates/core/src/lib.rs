//! Keystroke-pause auxiliary labels for shallow syntactic parsing.
//!
//! The crate covers the whole pipeline:
//!
//! * [`keylog`] parses raw key press/release logs and reconstructs the typed
//!   tokens together with the pause that preceded each of them.
//! * [`labels`] turns per-user pause distributions (median and median absolute
//!   deviation) into BIO-encoded pause-bin labels, and computes the
//!   exploratory statistics used to inspect keystroke data.
//! * [`corpus`] reads and writes CoNLL-style column corpora and builds the
//!   shared vocabulary.
//! * [`nnet`] is a small reverse-mode differentiation tape with LSTM building
//!   blocks, softmax cross-entropy and plain SGD.
//! * [`tagger`] assembles the hierarchical multi-task bi-LSTM, trains it and
//!   persists checkpoints.
//! * [`eval`] implements conlleval-compatible chunk scoring, tag accuracy and
//!   the approximate randomization significance test.
//! * [`synth`] generates toy corpora for demos and tests.
//! * [`cli`] wires everything into the `keytag` executable.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod keylog;
pub mod labels;
pub mod nnet;
pub mod rng;
pub mod synth;
pub mod tagger;

pub use error::{Error, Result};
