//! Approximate randomization test between two chunkers.
//!
//! Two simulated systems corrupt the gold labels of a toy corpus at
//! different rates; the test asks whether their chunk-F1 difference could
//! have arisen by chance.
//!
//! Run with `cargo run --release --example significance_test`.

use keytag::eval::{approx_randomization, chunk_f1, Metric, SigResult};
use keytag::rng::{Rng, SeedTree};
use keytag::synth::chunk_corpus;
use rand::Rng as _;

const TAGS: [&str; 7] = ["B-NP", "I-NP", "B-VP", "I-VP", "B-PP", "I-PP", "O"];

fn corrupt(gold: &[Vec<String>], rate: f64, rng: &mut Rng) -> Vec<Vec<String>> {
    gold.iter()
        .map(|s| {
            s.iter()
                .map(|l| {
                    if rng.random_bool(rate) {
                        TAGS[rng.random_range(0..TAGS.len())].to_string()
                    } else {
                        l.clone()
                    }
                })
                .collect()
        })
        .collect()
}

pub fn run_example(iterations: usize) -> keytag::Result<(SigResult, SigResult)> {
    let gold: Vec<Vec<String>> = chunk_corpus(100, 4, "chunk")
        .into_iter()
        .map(|s| s.labels)
        .collect();
    let seeds = SeedTree::new(9);
    let a = corrupt(&gold, 0.05, &mut seeds.stream("system a"));
    let b = corrupt(&gold, 0.15, &mut seeds.stream("system b"));
    println!("system A F1 {:.2}", chunk_f1(&gold, &a)?.f1());
    println!("system B F1 {:.2}", chunk_f1(&gold, &b)?.f1());

    let ab = approx_randomization(&gold, &a, &b, Metric::ChunkF1, iterations, 1)?;
    println!(
        "A vs B: |diff| {:.2}, p = {:.4} ({} of {} shuffles reached it)",
        ab.observed, ab.p_value, ab.exceed, ab.iterations
    );
    let aa = approx_randomization(&gold, &a, &a, Metric::ChunkF1, iterations, 1)?;
    println!("A vs A: p = {}", aa.p_value);
    Ok((ab, aa))
}

#[allow(dead_code)]
fn main() -> keytag::Result<()> {
    run_example(10_000).map(|_| ())
}
