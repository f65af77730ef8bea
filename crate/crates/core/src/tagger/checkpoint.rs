//! Model checkpoints.
//!
//! A checkpoint is one JSON document:
//!
//! ```text
//! {
//!   "format":  "keytag-checkpoint",
//!   "version": 1,
//!   "config":  { ...ModelConfig fields... },
//!   "vocab":   { "words": [..], "chars": [..], "labels": [[task, [..]], ..] },
//!   "tensors": [ { "name": "emb.word", "rows": R, "cols": C, "data": [..] }, .. ]
//! }
//! ```
//!
//! Tensor data is row-major and written with round-trip float formatting,
//! so a loaded model reproduces the saved one bit for bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use super::model::Model;
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

pub const FORMAT: &str = "keytag-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Tensor {
    name: String,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    version: u32,
    config: ModelConfig,
    vocab: Vocabulary,
    tensors: Vec<Tensor>,
}

pub fn to_json(model: &Model) -> Result<String> {
    let checkpoint = Checkpoint {
        format: FORMAT.to_string(),
        version: VERSION,
        config: model.config.clone(),
        vocab: model.vocab.clone(),
        tensors: model
            .store
            .iter()
            .map(|(_, p)| Tensor {
                name: p.name.clone(),
                rows: p.rows,
                cols: p.cols,
                data: p.data.clone(),
            })
            .collect(),
    };
    Ok(serde_json::to_string(&checkpoint)?)
}

pub fn from_json(text: &str) -> Result<Model> {
    #[derive(Deserialize)]
    struct Header {
        format: String,
        version: u32,
    }
    let header: Header = serde_json::from_str(text)?;
    if header.format != FORMAT {
        return Err(Error::Checkpoint(format!(
            "not a checkpoint (format {:?})",
            header.format
        )));
    }
    if header.version != VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported version {} (expected {VERSION})",
            header.version
        )));
    }
    let checkpoint: Checkpoint = serde_json::from_str(text)?;
    let mut model = Model::new(checkpoint.vocab, checkpoint.config)?;
    for t in &checkpoint.tensors {
        let id = model
            .store
            .id(&t.name)
            .ok_or_else(|| Error::Checkpoint(format!("unexpected tensor {}", t.name)))?;
        let p = model.store.get(id);
        if (p.rows, p.cols) != (t.rows, t.cols) {
            return Err(Error::Checkpoint(format!(
                "{} is {}x{}, checkpoint has {}x{}",
                t.name, p.rows, p.cols, t.rows, t.cols
            )));
        }
    }
    model.load_params(
        checkpoint
            .tensors
            .into_iter()
            .map(|t| (t.name, t.data))
            .collect(),
    )?;
    Ok(model)
}

pub fn save(model: &Model, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(to_json(model)?.as_bytes())?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Model> {
    let mut text = String::new();
    std::io::Read::read_to_string(&mut BufReader::new(File::open(path)?), &mut text)?;
    from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TaggedSentence;
    use crate::tagger::train;

    fn s(tokens: &str, labels: &str, task: &str) -> TaggedSentence {
        TaggedSentence {
            tokens: tokens.split(' ').map(String::from).collect(),
            labels: labels.split(' ').map(String::from).collect(),
            task_id: task.into(),
        }
    }

    fn trained() -> Model {
        let config = ModelConfig {
            d_word: 4,
            d_char: 3,
            d_hidden: 5,
            n_layers: 2,
            aux_output_layer: 2,
            epochs: 2,
            ..ModelConfig::default()
        };
        let main = vec![s("the dog runs", "B-NP I-NP B-VP", "chunk")];
        let aux = vec![s("a cat sat .", "B-<m I-<m B->m1 O", "keystroke")];
        let corpora: [(&str, &[TaggedSentence]); 2] = [("chunk", &main), ("keystroke", &aux)];
        let mut m = Model::for_corpora(config, &corpora).unwrap();
        train(&mut m, &corpora).unwrap();
        m
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let model = trained();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save(&model, &path).unwrap();
        let loaded = load(&path).unwrap();
        for (id, p) in model.store.iter() {
            let q = loaded.store.get(id);
            assert_eq!(p.name, q.name);
            let a: Vec<u64> = p.data.iter().map(|v| v.to_bits()).collect();
            let b: Vec<u64> = q.data.iter().map(|v| v.to_bits()).collect();
            assert_eq!(a, b, "{}", p.name);
        }
        let tokens: Vec<String> = ["the", "cat", "zz"].iter().map(|s| s.to_string()).collect();
        assert_eq!(
            model.scores(&tokens, "keystroke").unwrap(),
            loaded.scores(&tokens, "keystroke").unwrap()
        );
    }

    #[test]
    fn wrong_version_is_rejected() {
        let text = to_json(&trained())
            .unwrap()
            .replace("\"version\":1", "\"version\":7");
        let err = from_json(&text).unwrap_err();
        assert!(err.to_string().contains("unsupported version 7"), "{err}");
        assert!(from_json("{\"format\":\"other\",\"version\":1}").is_err());
    }

    #[test]
    fn missing_tensor_is_rejected() {
        let model = trained();
        let mut value: serde_json::Value = serde_json::from_str(&to_json(&model).unwrap()).unwrap();
        value["tensors"].as_array_mut().unwrap().pop();
        assert!(from_json(&value.to_string()).is_err());
    }
}
