//! Exploratory pause statistics for two simulated typists.
//!
//! Each user types toy sentences; pre-word pauses are log-normal, longer
//! before a chunk starts, and scaled by a per-user speed. The example prints
//! per-user median/MAD, a log-bucketed pause histogram and the correlation
//! between word length and pause.
//!
//! Run with `cargo run --example pause_stats`.

use keytag::keylog::{parse_keylog, tokenize_sessions, PauseMode, PausedToken, TokenizerConfig};
use keytag::labels::{pause_distribution, pause_word_length_corr, stats_by_user, HistogramSpec};
use keytag::rng::SeedTree;
use keytag::synth::chunk_corpus;
use rand_distr::{Distribution, LogNormal};

/// A keystroke log for `user` typing `n` toy sentences.
pub fn simulated_log(user: &str, speed: f64, n: usize, seed: u64) -> String {
    let mut rng = SeedTree::new(seed).stream("pauses");
    let inside = LogNormal::new((150.0 * speed).ln(), 0.5).expect("valid");
    let boundary = LogNormal::new((600.0 * speed).ln(), 0.6).expect("valid");
    let mut log = String::new();
    let mut t = 0u64;
    for s in chunk_corpus(n, seed, "chunk") {
        for (i, (word, label)) in s.tokens.iter().zip(&s.labels).enumerate() {
            let dist = if label.starts_with("B-") {
                &boundary
            } else {
                &inside
            };
            if i > 0 && word != "." {
                log += &format!("{user}\ts1\tSPACE\t{t}\t{}\n", t + 30);
                t += 30;
            }
            t += dist.sample(&mut rng).round() as u64;
            for c in word.chars() {
                log += &format!("{user}\ts1\t{c}\t{t}\t{}\n", t + 40);
                t += (60.0 * speed) as u64;
            }
        }
        log += &format!("{user}\ts1\tSPACE\t{t}\t{}\n", t + 30);
        t += 2000;
    }
    log
}

pub struct Outcome {
    pub medians: Vec<(String, f64)>,
    pub correlation: f64,
    pub histogram_rows: usize,
}

pub fn run_example() -> keytag::Result<Outcome> {
    let log = simulated_log("fast", 0.6, 40, 1) + &simulated_log("slow", 1.5, 40, 2);
    let sessions = parse_keylog(log.as_bytes())?;
    let sentences = tokenize_sessions(
        &sessions,
        PauseMode::ReleaseToPress,
        &TokenizerConfig::default(),
    );
    let stats = stats_by_user(&sentences)?;
    for s in &stats {
        println!(
            "{:<5} median {:>6.1} ms  MAD {:>6.1} ms  ({} pauses)",
            s.user_id, s.median_ms, s.mad_ms, s.n_pauses
        );
    }

    let words: Vec<PausedToken> = sentences
        .iter()
        .flat_map(|s| s.tokens.iter().filter(|t| !t.is_punct).cloned())
        .collect();
    let users: Vec<String> = sentences
        .iter()
        .flat_map(|s| {
            s.tokens
                .iter()
                .filter(|t| !t.is_punct)
                .map(|_| s.user_id.clone())
        })
        .collect();
    let spec = HistogramSpec::covering(&words);
    let rows = pause_distribution(&words, Some(&users), &spec)?;
    println!("\nuser   bucket (ms)          count");
    for r in &rows {
        println!(
            "{:<6} {:>7.0}-{:<7.0}  {}",
            r.group,
            r.lower_ms,
            r.upper_ms,
            "#".repeat(r.count.div_ceil(2))
        );
    }
    let correlation = pause_word_length_corr(&words)?;
    println!("\nword length vs pause: Pearson r = {correlation:.3}");
    Ok(Outcome {
        medians: stats
            .iter()
            .map(|s| (s.user_id.clone(), s.median_ms))
            .collect(),
        correlation,
        histogram_rows: rows.len(),
    })
}

#[allow(dead_code)]
fn main() -> keytag::Result<()> {
    run_example().map(|_| ())
}
