//! Train briefly, save a checkpoint, load it back and compare predictions.
//!
//! Run with `cargo run --release --example checkpoint_roundtrip`.

use keytag::corpus::TaggedSentence;
use keytag::synth::chunk_corpus;
use keytag::tagger::{checkpoint, train, Model, ModelConfig};

pub fn run_example(dir: &std::path::Path) -> keytag::Result<usize> {
    let config = ModelConfig {
        d_word: 16,
        d_char: 8,
        d_hidden: 16,
        n_layers: 2,
        aux_output_layer: 2,
        epochs: 3,
        ..ModelConfig::default()
    };
    let main = chunk_corpus(20, 3, "chunk");
    let corpora: [(&str, &[TaggedSentence]); 1] = [("chunk", &main)];
    let mut model = Model::for_corpora(config, &corpora)?;
    let log = train(&mut model, &corpora)?;
    println!("chunk loss by epoch: {:?}", log.task_losses("chunk"));

    let path = dir.join("model.json");
    checkpoint::save(&model, &path)?;
    let loaded = checkpoint::load(&path)?;
    println!(
        "saved {} bytes to {}",
        std::fs::metadata(&path)?.len(),
        path.display()
    );

    let mut identical = 0;
    for s in chunk_corpus(10, 99, "chunk") {
        let before = model.scores(&s.tokens, "chunk")?;
        let after = loaded.scores(&s.tokens, "chunk")?;
        let same = before
            .iter()
            .flatten()
            .zip(after.iter().flatten())
            .all(|(a, b)| a.to_bits() == b.to_bits());
        identical += usize::from(same);
    }
    println!("{identical}/10 sentences scored bit-identically after reload");
    Ok(identical)
}

#[allow(dead_code)]
fn main() -> keytag::Result<()> {
    let dir = std::env::temp_dir().join(format!("keytag-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let result = run_example(&dir);
    std::fs::remove_dir_all(&dir)?;
    result.map(|_| ())
}
