//! Reverse-mode differentiation with the pieces a hierarchical bi-LSTM
//! tagger needs: embeddings, LSTM cells, bidirectional layers, softmax
//! cross-entropy, Gaussian input noise and plain SGD. Everything runs in
//! 64-bit floating point.

mod graph;
mod lstm;
mod params;

pub use graph::{log_sum_exp, sigmoid, softmax, Graph, Mode, Var};
pub use lstm::{
    bilstm_layer, char_encode, lstm_sequence, lstm_step, LstmParams, GATE_CANDIDATE, GATE_FORGET,
    GATE_INPUT, GATE_OUTPUT,
};
pub use params::{Init, Param, ParamId, ParamStore};
