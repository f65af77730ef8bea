//! conlleval-style chunk scoring of a three-column file (token, gold, guess).
//!
//! Run with `cargo run --example evaluate_chunks [FILE]`; without an argument
//! the bundled 20-sentence test fixture is scored.

use keytag::eval::{chunk_f1, format_report, tag_accuracy, ChunkScore};

const FIXTURE: &str = include_str!("../tests/fixtures/conlleval_20.txt");

/// Splits `token gold guess` lines into gold and guessed label sequences.
pub fn columns(text: &str) -> (Vec<Vec<String>>, Vec<Vec<String>>) {
    let (mut gold, mut pred) = (vec![Vec::new()], vec![Vec::new()]);
    for line in text.lines() {
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.is_empty() {
            if !gold.last().expect("non-empty").is_empty() {
                gold.push(Vec::new());
                pred.push(Vec::new());
            }
            continue;
        }
        gold.last_mut()
            .expect("non-empty")
            .push(cols[cols.len() - 2].to_string());
        pred.last_mut()
            .expect("non-empty")
            .push(cols[cols.len() - 1].to_string());
    }
    if gold.last().is_some_and(Vec::is_empty) {
        gold.pop();
        pred.pop();
    }
    (gold, pred)
}

pub fn run_example(text: &str) -> keytag::Result<ChunkScore> {
    let (gold, pred) = columns(text);
    let score = chunk_f1(&gold, &pred)?;
    print!("{}", format_report(&score));
    println!("token accuracy {:.2}%", tag_accuracy(&gold, &pred)?);
    Ok(score)
}

#[allow(dead_code)]
fn main() -> keytag::Result<()> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => FIXTURE.to_string(),
    };
    run_example(&text).map(|_| ())
}
