//! Evaluation: conlleval-compatible chunk F1, tag accuracy, per-label
//! tables and the approximate randomization significance test.

mod chunks;
mod sigtest;

pub use chunks::{
    chunk_f1, extract_chunks, format_report, sentence_chunk_counts, tag_accuracy,
    token_label_counts, Chunk, ChunkScore, Counts,
};
pub use sigtest::{approx_randomization, p_value, Metric, SigResult};
