//! Toy data generators for demos and tests.
//!
//! [`chunk_corpus`] samples sentences from a small grammar over NP, VP and
//! PP chunks in which every word belongs to exactly one part of speech, so
//! chunk labels are a deterministic function of the sentence.
//! [`pause_corpus`] pairs such sentences with pause-bin labels that follow
//! chunk boundaries up to a configurable amount of noise.

use rand::seq::IndexedRandom;
use rand::Rng as _;

use crate::corpus::TaggedSentence;
use crate::labels::{bio_encode, PauseBin, KEYSTROKE_TASK};
use crate::rng::SeedTree;

const DET: &[&str] = &["the", "a", "every", "this"];
const ADJ: &[&str] = &["small", "red", "quiet", "old", "bright"];
const NOUN: &[&str] = &[
    "dog", "house", "river", "teacher", "idea", "garden", "letter",
];
const MODAL: &[&str] = &["will", "can", "must"];
const VERB: &[&str] = &["see", "carry", "follow", "paint", "find"];
const PREP: &[&str] = &["in", "near", "under", "with"];

/// One token with its chunk label.
type Tagged = (&'static str, String);

fn np(rng: &mut crate::rng::Rng, out: &mut Vec<Tagged>) {
    let mut first = true;
    let mut push = |w: &'static str, out: &mut Vec<Tagged>| {
        out.push((w, if first { "B-NP" } else { "I-NP" }.to_string()));
        first = false;
    };
    if rng.random_bool(0.7) {
        push(DET.choose(rng).expect("non-empty"), out);
    }
    for _ in 0..rng.random_range(0..=2) {
        push(ADJ.choose(rng).expect("non-empty"), out);
    }
    push(NOUN.choose(rng).expect("non-empty"), out);
}

fn vp(rng: &mut crate::rng::Rng, out: &mut Vec<Tagged>) {
    if rng.random_bool(0.4) {
        out.push((MODAL.choose(rng).expect("non-empty"), "B-VP".into()));
        out.push((VERB.choose(rng).expect("non-empty"), "I-VP".into()));
    } else {
        out.push((VERB.choose(rng).expect("non-empty"), "B-VP".into()));
    }
}

fn sentence(rng: &mut crate::rng::Rng) -> Vec<Tagged> {
    let mut out = Vec::new();
    np(rng, &mut out);
    vp(rng, &mut out);
    np(rng, &mut out);
    for _ in 0..rng.random_range(0..=2) {
        out.push((PREP.choose(rng).expect("non-empty"), "B-PP".into()));
        np(rng, &mut out);
    }
    out.push((".", "O".into()));
    out
}

/// `n` chunk-labelled sentences for task `task`.
pub fn chunk_corpus(n: usize, seed: u64, task: &str) -> Vec<TaggedSentence> {
    let mut rng = SeedTree::new(seed).stream("synth.chunk");
    (0..n)
        .map(|_| {
            let (tokens, labels) = sentence(&mut rng)
                .into_iter()
                .map(|(w, l)| (w.to_string(), l))
                .unzip();
            TaggedSentence {
                tokens,
                labels,
                task_id: task.to_string(),
            }
        })
        .collect()
}

/// Pause bins for one chunk-labelled sentence: `>m1` before a chunk start,
/// `<m` inside a chunk, `O` for punctuation; with probability `noise` a word
/// gets a uniformly drawn bin instead.
pub fn noisy_bins(chunk_labels: &[String], noise: f64, rng: &mut crate::rng::Rng) -> Vec<PauseBin> {
    const WORD_BINS: [PauseBin; 4] = [
        PauseBin::LtM,
        PauseBin::LtMHalf,
        PauseBin::LtM1,
        PauseBin::GtM1,
    ];
    chunk_labels
        .iter()
        .map(|l| {
            if l == "O" {
                PauseBin::O
            } else if rng.random_bool(noise) {
                *WORD_BINS.choose(rng).expect("non-empty")
            } else if l.starts_with("B-") {
                PauseBin::GtM1
            } else {
                PauseBin::LtM
            }
        })
        .collect()
}

/// `n` sentences labelled with BIO-encoded pause bins (task `keystroke`).
pub fn pause_corpus(n: usize, seed: u64, noise: f64) -> Vec<TaggedSentence> {
    let mut rng = SeedTree::new(seed).stream("synth.pause");
    chunk_corpus(n, seed.wrapping_add(1), KEYSTROKE_TASK)
        .into_iter()
        .map(|s| {
            let bins = noisy_bins(&s.labels, noise, &mut rng);
            TaggedSentence {
                labels: bio_encode(&bins).iter().map(ToString::to_string).collect(),
                ..s
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::extract_chunks;

    #[test]
    fn chunk_labels_are_well_formed() {
        for s in chunk_corpus(200, 5, "chunk") {
            assert_eq!(s.tokens.len(), s.labels.len());
            assert!(s.labels[0].starts_with("B-"));
            let chunks = extract_chunks(&s.labels);
            let kinds: Vec<&str> = chunks.iter().map(|c| c.kind.as_str()).collect();
            assert_eq!(kinds[..2], ["NP", "VP"]);
        }
    }

    #[test]
    fn noiseless_pauses_follow_boundaries() {
        let c = chunk_corpus(1, 3, "chunk");
        let p = pause_corpus(1, 2, 0.0);
        assert_eq!(c[0].tokens, p[0].tokens);
        for (pause, chunk) in p[0].labels.iter().zip(&c[0].labels) {
            match chunk.as_str() {
                "O" => assert_eq!(pause, "O"),
                l if l.starts_with("B-") => assert!(pause.ends_with(">m1")),
                _ => assert!(pause.ends_with("<m")),
            }
        }
    }

    #[test]
    fn deterministic_in_seed() {
        assert_eq!(chunk_corpus(10, 1, "chunk"), chunk_corpus(10, 1, "chunk"));
        assert_ne!(chunk_corpus(10, 1, "chunk"), chunk_corpus(10, 2, "chunk"));
    }
}
