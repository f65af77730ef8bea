//! Multi-task training on toy data: a chunking main task plus an auxiliary
//! pause-bin task, compared against single-task training.
//!
//! Run with `cargo run --release --example train_multitask`.

use std::time::Instant;

use keytag::corpus::TaggedSentence;
use keytag::eval::tag_accuracy;
use keytag::labels::KEYSTROKE_TASK;
use keytag::synth::{chunk_corpus, pause_corpus};
use keytag::tagger::{train, Model, ModelConfig};

pub struct Outcome {
    pub single_main_acc: f64,
    pub multi_main_acc: f64,
    pub multi_aux_acc: f64,
}

fn accuracy(model: &Model, corpus: &[TaggedSentence], task: &str) -> keytag::Result<f64> {
    let gold: Vec<Vec<String>> = corpus.iter().map(|s| s.labels.clone()).collect();
    let pred = corpus
        .iter()
        .map(|s| model.predict(&s.tokens, task))
        .collect::<keytag::Result<Vec<_>>>()?;
    tag_accuracy(&gold, &pred)
}

/// Share of words whose pause bin is drawn at random instead of following
/// the chunk boundaries.
pub const AUX_NOISE: f64 = 0.02;

pub fn run_example(n: usize, epochs: usize) -> keytag::Result<Outcome> {
    let config = ModelConfig {
        epochs,
        ..ModelConfig::default()
    };
    let main = chunk_corpus(n, 11, "chunk");
    let aux = pause_corpus(n, 12, AUX_NOISE);

    let t = Instant::now();
    let single: [(&str, &[TaggedSentence]); 1] = [("chunk", &main)];
    let mut model = Model::for_corpora(config.clone(), &single)?;
    train(&mut model, &single)?;
    let single_main_acc = accuracy(&model, &main, "chunk")?;
    println!(
        "single-task: chunk accuracy {single_main_acc:.2}% ({:.1}s)",
        t.elapsed().as_secs_f64()
    );

    let t = Instant::now();
    let multi: [(&str, &[TaggedSentence]); 2] = [("chunk", &main), (KEYSTROKE_TASK, &aux)];
    let mut model = Model::for_corpora(config, &multi)?;
    let log = train(&mut model, &multi)?;
    let multi_main_acc = accuracy(&model, &main, "chunk")?;
    let multi_aux_acc = accuracy(&model, &aux, KEYSTROKE_TASK)?;
    println!(
        "multi-task:  chunk accuracy {multi_main_acc:.2}%, pause accuracy {multi_aux_acc:.2}% ({:.1}s)",
        t.elapsed().as_secs_f64()
    );
    let last = log.task_losses("chunk");
    println!(
        "final chunk loss {:.4}",
        last.last().copied().unwrap_or(f64::NAN)
    );
    Ok(Outcome {
        single_main_acc,
        multi_main_acc,
        multi_aux_acc,
    })
}

#[allow(dead_code)]
fn main() -> keytag::Result<()> {
    let args: Vec<usize> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("number"))
        .collect();
    run_example(
        args.first().copied().unwrap_or(50),
        args.get(1).copied().unwrap_or(30),
    )?;
    Ok(())
}
