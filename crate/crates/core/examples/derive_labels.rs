//! From raw key events to auxiliary pause labels.
//!
//! Builds the keystroke log of one typed sentence whose pre-word pauses are
//! those of the "Coefficient of determination" example, then derives the
//! user's pause statistics, the BIO pause-bin labels and a 500 ms
//! segmentation.
//!
//! Run with `cargo run --example derive_labels`.

use keylog_text::table1_log;
use keytag::keylog::{parse_keylog, tokenize_sessions, PauseMode, TokenizerConfig};
use keytag::labels::{bracketed, derive_labels, stats_by_user, threshold_segment};

mod keylog_text {
    pub const WORDS: [(&str, u64); 11] = [
        ("Coefficient", 0),
        ("of", 96),
        ("determination", 496),
        ("is", 30769),
        ("a", 96),
        ("measure", 2144),
        ("used", 96),
        ("in", 80),
        ("statisitcal", 2975),
        ("model", 240),
        ("analysis", 680),
    ];

    /// Tab-separated events: each character is held 50 ms, and the first key
    /// of a word is pressed `pause` ms after the preceding space is released.
    pub fn table1_log() -> String {
        let mut log = String::from("# user_id\tsession_id\tkey\tpress_ms\trelease_ms\n");
        let mut t = 1000;
        for (i, (word, pause)) in WORDS.iter().enumerate() {
            if i > 0 {
                log += &format!("33\ts1\tSPACE\t{t}\t{}\n", t + 40);
                t += 40 + pause;
            }
            for c in word.chars() {
                log += &format!("33\ts1\t{c}\t{t}\t{}\n", t + 50);
                t += 70;
            }
            t -= 10;
        }
        log
    }
}

pub struct Outcome {
    pub median_ms: f64,
    pub mad_ms: f64,
    pub labels: Vec<String>,
    pub bracketed: String,
}

pub fn run_example() -> keytag::Result<Outcome> {
    let log = table1_log();
    let sessions = parse_keylog(log.as_bytes())?;
    let sentences = tokenize_sessions(
        &sessions,
        PauseMode::ReleaseToPress,
        &TokenizerConfig::default(),
    );
    let stats = stats_by_user(&sentences)?;
    let user = &stats[0];
    println!(
        "user {}: median {} ms, MAD {} ms",
        user.user_id, user.median_ms, user.mad_ms
    );

    let tagged = derive_labels(&sentences, user)?;
    for (token, (word, label)) in sentences[0]
        .tokens
        .iter()
        .zip(tagged[0].tokens.iter().zip(&tagged[0].labels))
    {
        println!("{word:<14} {:>6} ms  {label}", token.pre_pause_ms);
    }
    let spans = threshold_segment(&sentences[0], 500);
    let text = bracketed(&sentences[0], &spans);
    println!("500 ms segmentation: {text}");
    Ok(Outcome {
        median_ms: user.median_ms,
        mad_ms: user.mad_ms,
        labels: tagged[0].labels.clone(),
        bracketed: text,
    })
}

#[allow(dead_code)]
fn main() -> keytag::Result<()> {
    run_example().map(|_| ())
}
