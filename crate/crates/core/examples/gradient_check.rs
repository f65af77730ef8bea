//! Checks the tagger's analytic gradients against central finite differences.
//!
//! A tiny two-task model is built and, for every parameter value, the
//! derivative of the per-sentence loss is estimated as
//! `(L(θ + h) - L(θ - h)) / 2h` and compared with backpropagation.
//!
//! Run with `cargo run --release --example gradient_check`.

use keytag::corpus::TaggedSentence;
use keytag::nnet::{Graph, Mode};
use keytag::rng::SeedTree;
use keytag::tagger::{Model, ModelConfig};

fn sentence(tokens: &str, labels: &str, task: &str) -> TaggedSentence {
    TaggedSentence {
        tokens: tokens.split(' ').map(String::from).collect(),
        labels: labels.split(' ').map(String::from).collect(),
        task_id: task.into(),
    }
}

fn loss(model: &Model, s: &TaggedSentence) -> keytag::Result<f64> {
    let mut rng = SeedTree::new(0).stream("unused");
    let mut g = Graph::new();
    let l = model.sentence_loss(&mut g, s, Mode::Infer, &mut rng)?;
    Ok(g.scalar(l))
}

/// Largest relative error over all parameters for one sentence.
pub fn max_relative_error(model: &mut Model, s: &TaggedSentence, h: f64) -> keytag::Result<f64> {
    let mut rng = SeedTree::new(0).stream("unused");
    let mut g = Graph::new();
    let l = model.sentence_loss(&mut g, s, Mode::Infer, &mut rng)?;
    g.backward(l, &mut model.store);
    let ids: Vec<_> = model.store.iter().map(|(id, _)| id).collect();
    let mut worst: f64 = 0.0;
    for id in ids {
        let analytic = model.store.get(id).grad.clone();
        for (k, &a) in analytic.iter().enumerate() {
            let orig = model.store.get(id).data[k];
            model.store.get_mut(id).data[k] = orig + h;
            let up = loss(model, s)?;
            model.store.get_mut(id).data[k] = orig - h;
            let down = loss(model, s)?;
            model.store.get_mut(id).data[k] = orig;
            let numeric = (up - down) / (2.0 * h);
            worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6));
        }
    }
    model.store.zero_grad();
    Ok(worst)
}

pub fn run_example() -> keytag::Result<f64> {
    let config = ModelConfig {
        d_word: 3,
        d_char: 2,
        d_hidden: 4,
        n_layers: 3,
        aux_output_layer: 3,
        ..ModelConfig::default()
    };
    let main = [sentence("the old dog", "B-NP I-NP I-NP", "chunk")];
    let aux = [sentence("it sat down", "B-<m B->m1 I->m1", "keystroke")];
    let mut model = Model::for_corpora(config, &[("chunk", &main), ("keystroke", &aux)])?;
    println!("{} parameter values", model.store.n_values());
    let mut worst: f64 = 0.0;
    for s in [&main[0], &aux[0]] {
        let e = max_relative_error(&mut model, s, 1e-4)?;
        println!("task {:<9} max relative error {e:.2e}", s.task_id);
        worst = worst.max(e);
    }
    Ok(worst)
}

#[allow(dead_code)]
fn main() -> keytag::Result<()> {
    run_example().map(|_| ())
}
