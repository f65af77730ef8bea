//! Chunk extraction and scoring with conlleval semantics.
//!
//! Labels are split at the first `-` into a tag (`B`, `I`, `E`, `S`, `O`,
//! ...) and a type (`NP`, `VP`, ...). Ill-formed sequences are handled the
//! way conlleval does: an `I-X` after `O`, after a chunk of another type, or
//! at sentence start opens a new chunk.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Chunk {
    pub kind: String,
    /// First token, inclusive.
    pub start: usize,
    /// Last token, inclusive.
    pub end: usize,
}

const OUTSIDE: &str = "O";

pub(crate) fn split_label(label: &str) -> (&str, &str) {
    label.split_once('-').unwrap_or((label, ""))
}

fn end_of_chunk(prev_tag: &str, tag: &str, prev_type: &str, kind: &str) -> bool {
    matches!(prev_tag, "E" | "S" | "[" | "]")
        || (matches!(prev_tag, "B" | "I") && matches!(tag, "B" | "S" | OUTSIDE))
        || (prev_tag != OUTSIDE && prev_tag != "." && prev_type != kind)
}

fn start_of_chunk(prev_tag: &str, tag: &str, prev_type: &str, kind: &str) -> bool {
    matches!(tag, "B" | "S" | "[" | "]")
        || (matches!(prev_tag, "E" | "S" | OUTSIDE) && matches!(tag, "E" | "I"))
        || (tag != OUTSIDE && tag != "." && prev_type != kind)
}

/// Chunks of one sentence, ordered by position.
pub fn extract_chunks<S: AsRef<str>>(labels: &[S]) -> Vec<Chunk> {
    let mut chunks = Vec::new();
    let mut open: Option<(usize, &str)> = None;
    let (mut prev_tag, mut prev_type) = (OUTSIDE, "");
    let sentinel = [OUTSIDE];
    let all = labels.iter().map(AsRef::as_ref).chain(sentinel);
    for (i, label) in all.enumerate() {
        let (tag, kind) = split_label(label);
        let starts = i < labels.len() && start_of_chunk(prev_tag, tag, prev_type, kind);
        if i == labels.len() || starts || end_of_chunk(prev_tag, tag, prev_type, kind) {
            if let Some((start, kind)) = open.take() {
                chunks.push(Chunk {
                    kind: kind.to_string(),
                    start,
                    end: i - 1,
                });
            }
        }
        if starts {
            open = Some((i, kind));
        }
        prev_tag = tag;
        prev_type = kind;
    }
    chunks
}

/// Gold, predicted and correct counts for one label or chunk type.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub gold: usize,
    pub pred: usize,
    pub correct: usize,
}

impl Counts {
    pub fn precision(&self) -> f64 {
        if self.pred == 0 {
            0.0
        } else {
            100.0 * self.correct as f64 / self.pred as f64
        }
    }

    pub fn recall(&self) -> f64 {
        if self.gold == 0 {
            0.0
        } else {
            100.0 * self.correct as f64 / self.gold as f64
        }
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    pub(crate) fn add(&mut self, other: Counts) {
        self.gold += other.gold;
        self.pred += other.pred;
        self.correct += other.correct;
    }
}

/// Overall and per-type chunk counts.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChunkScore {
    pub overall: Counts,
    pub per_type: BTreeMap<String, Counts>,
}

impl ChunkScore {
    pub fn precision(&self) -> f64 {
        self.overall.precision()
    }

    pub fn recall(&self) -> f64 {
        self.overall.recall()
    }

    pub fn f1(&self) -> f64 {
        self.overall.f1()
    }
}

pub(crate) fn check_aligned<S: AsRef<str>>(gold: &[Vec<S>], pred: &[Vec<S>]) -> Result<()> {
    if gold.len() != pred.len() {
        return Err(Error::Misaligned(format!(
            "{} gold sentences, {} predicted",
            gold.len(),
            pred.len()
        )));
    }
    for (i, (g, p)) in gold.iter().zip(pred).enumerate() {
        if g.len() != p.len() {
            return Err(Error::Misaligned(format!(
                "sentence {}: {} gold tokens, {} predicted",
                i + 1,
                g.len(),
                p.len()
            )));
        }
    }
    Ok(())
}

/// Chunk counts of one sentence.
pub fn sentence_chunk_counts<S: AsRef<str>>(gold: &[S], pred: &[S]) -> ChunkScore {
    let gold_chunks = extract_chunks(gold);
    let pred_chunks = extract_chunks(pred);
    let mut score = ChunkScore::default();
    for c in &gold_chunks {
        score.per_type.entry(c.kind.clone()).or_default().gold += 1;
    }
    for c in &pred_chunks {
        let entry = score.per_type.entry(c.kind.clone()).or_default();
        entry.pred += 1;
        // both lists are sorted by start
        if gold_chunks
            .binary_search_by(|g| g.start.cmp(&c.start))
            .is_ok_and(|i| gold_chunks[i] == *c)
        {
            entry.correct += 1;
        }
    }
    score.overall = Counts {
        gold: gold_chunks.len(),
        pred: pred_chunks.len(),
        correct: score.per_type.values().map(|c| c.correct).sum(),
    };
    score
}

/// Corpus-level chunk precision, recall and F1.
pub fn chunk_f1<S: AsRef<str>>(gold: &[Vec<S>], pred: &[Vec<S>]) -> Result<ChunkScore> {
    check_aligned(gold, pred)?;
    let mut total = ChunkScore::default();
    for (g, p) in gold.iter().zip(pred) {
        let s = sentence_chunk_counts(g, p);
        total.overall.add(s.overall);
        for (kind, counts) in s.per_type {
            total.per_type.entry(kind).or_default().add(counts);
        }
    }
    Ok(total)
}

/// Exact-match token accuracy in percent.
pub fn tag_accuracy<S: AsRef<str>>(gold: &[Vec<S>], pred: &[Vec<S>]) -> Result<f64> {
    check_aligned(gold, pred)?;
    let total: usize = gold.iter().map(Vec::len).sum();
    if total == 0 {
        return Err(Error::Empty("corpus"));
    }
    let correct: usize = gold
        .iter()
        .zip(pred)
        .map(|(g, p)| {
            g.iter()
                .zip(p)
                .filter(|(a, b)| a.as_ref() == b.as_ref())
                .count()
        })
        .sum();
    Ok(100.0 * correct as f64 / total as f64)
}

/// Token-level per-label counts: for label `L`, gold and predicted are the
/// tokens carrying `L` on each side and correct those carrying it on both.
pub fn token_label_counts<S: AsRef<str>>(gold: &[Vec<S>], pred: &[Vec<S>]) -> Result<ChunkScore> {
    check_aligned(gold, pred)?;
    let mut score = ChunkScore::default();
    for (g, p) in gold.iter().zip(pred) {
        for (a, b) in g.iter().zip(p) {
            let (a, b) = (a.as_ref(), b.as_ref());
            score.per_type.entry(a.to_string()).or_default().gold += 1;
            score.per_type.entry(b.to_string()).or_default().pred += 1;
            score.overall.gold += 1;
            score.overall.pred += 1;
            if a == b {
                score.per_type.get_mut(a).expect("inserted").correct += 1;
                score.overall.correct += 1;
            }
        }
    }
    Ok(score)
}

/// Tab-separated per-label table followed by an `overall` line. Fields:
/// label, precision, recall, F1, gold_count, pred_count, correct_count.
pub fn format_report(score: &ChunkScore) -> String {
    let mut out =
        String::from("label\tprecision\trecall\tf1\tgold_count\tpred_count\tcorrect_count\n");
    let rows = score
        .per_type
        .iter()
        .map(|(k, c)| (k.as_str(), c))
        .chain([("overall", &score.overall)]);
    for (label, c) in rows {
        out.push_str(&format!(
            "{label}\t{:.2}\t{:.2}\t{:.2}\t{}\t{}\t{}\n",
            c.precision(),
            c.recall(),
            c.f1(),
            c.gold,
            c.pred,
            c.correct
        ));
    }
    out
}
