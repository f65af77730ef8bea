//! Approximate randomization test for paired system outputs.
//!
//! For every iteration, each sentence's outputs of system A and system B
//! are swapped with probability ½ and the metric difference is recomputed.
//! The p-value is `(r + 1) / (i + 1)`, where `r` counts the iterations whose
//! absolute difference reaches the observed one.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use rayon::prelude::*;

use super::chunks::{check_aligned, sentence_chunk_counts, Counts};
use crate::error::{Error, Result};
use crate::rng::SeedTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    ChunkF1,
    Accuracy,
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chunk" | "chunk_f1" | "f1" => Ok(Metric::ChunkF1),
            "acc" | "accuracy" => Ok(Metric::Accuracy),
            _ => Err(Error::Config(format!(
                "unknown metric {s:?} (expected chunk or acc)"
            ))),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::ChunkF1 => "chunk",
            Metric::Accuracy => "acc",
        })
    }
}

impl Metric {
    fn sentence_counts(self, gold: &[String], pred: &[String]) -> Counts {
        match self {
            Metric::ChunkF1 => sentence_chunk_counts(gold, pred).overall,
            Metric::Accuracy => Counts {
                gold: gold.len(),
                pred: pred.len(),
                correct: gold.iter().zip(pred).filter(|(a, b)| a == b).count(),
            },
        }
    }

    fn score(self, c: &Counts) -> f64 {
        match self {
            Metric::ChunkF1 => c.f1(),
            Metric::Accuracy => c.recall(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigResult {
    pub observed: f64,
    pub iterations: usize,
    pub exceed: usize,
    pub p_value: f64,
}

/// `(r + 1) / (i + 1)` where `r` is how many of `shuffled` reach `observed`.
pub fn p_value(observed: f64, shuffled: &[f64]) -> (usize, f64) {
    let exceed = shuffled.iter().filter(|&&d| d >= observed).count();
    (exceed, (exceed + 1) as f64 / (shuffled.len() + 1) as f64)
}

/// Absolute metric differences of `iterations` random sentence-level swaps.
fn shuffled_differences(
    metric: Metric,
    a: &[Counts],
    b: &[Counts],
    iterations: usize,
    seed: u64,
) -> Vec<f64> {
    let seeds = SeedTree::new(seed);
    (0..iterations)
        .into_par_iter()
        .map(|k| {
            let mut rng = seeds.stream(&format!("randomization/{k}"));
            let (mut sa, mut sb) = (Counts::default(), Counts::default());
            for (ca, cb) in a.iter().zip(b) {
                if rng.random_bool(0.5) {
                    sa.add(*cb);
                    sb.add(*ca);
                } else {
                    sa.add(*ca);
                    sb.add(*cb);
                }
            }
            (metric.score(&sa) - metric.score(&sb)).abs()
        })
        .collect()
}

pub fn approx_randomization(
    gold: &[Vec<String>],
    sys_a: &[Vec<String>],
    sys_b: &[Vec<String>],
    metric: Metric,
    iterations: usize,
    seed: u64,
) -> Result<SigResult> {
    check_aligned(gold, sys_a)?;
    check_aligned(gold, sys_b)?;
    let a: Vec<Counts> = gold
        .iter()
        .zip(sys_a)
        .map(|(g, p)| metric.sentence_counts(g, p))
        .collect();
    let b: Vec<Counts> = gold
        .iter()
        .zip(sys_b)
        .map(|(g, p)| metric.sentence_counts(g, p))
        .collect();
    let total = |cs: &[Counts]| {
        let mut t = Counts::default();
        cs.iter().for_each(|c| t.add(*c));
        t
    };
    let observed = (metric.score(&total(&a)) - metric.score(&total(&b))).abs();
    let diffs = shuffled_differences(metric, &a, &b, iterations, seed);
    let (exceed, p_value) = p_value(observed, &diffs);
    Ok(SigResult {
        observed,
        iterations,
        exceed,
        p_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(n: usize, label: &str) -> Vec<Vec<String>> {
        (0..n)
            .map(|_| {
                vec![
                    format!("B-{label}"),
                    format!("I-{label}"),
                    "B-VP".to_string(),
                ]
            })
            .collect()
    }

    #[test]
    fn identical_systems_give_p_one() {
        let gold = corpus(20, "NP");
        let sys = corpus(20, "PP");
        let r = approx_randomization(&gold, &sys, &sys, Metric::ChunkF1, 200, 3).unwrap();
        assert_eq!(r.observed, 0.0);
        assert_eq!(r.exceed, 200);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn perfect_against_wrong_is_significant() {
        let gold = corpus(100, "NP");
        let wrong: Vec<Vec<String>> = (0..100).map(|_| vec!["O".to_string(); 3]).collect();
        for metric in [Metric::ChunkF1, Metric::Accuracy] {
            let r = approx_randomization(&gold, &gold, &wrong, metric, 1000, 1).unwrap();
            assert!(r.p_value <= 0.01, "{metric}: {r:?}");
        }
    }

    #[test]
    fn symmetric_in_systems() {
        let gold = corpus(30, "NP");
        let mut a = corpus(30, "NP");
        let b = corpus(30, "PP");
        a[3][1] = "B-NP".into();
        let ab = approx_randomization(&gold, &a, &b, Metric::ChunkF1, 300, 9).unwrap();
        let ba = approx_randomization(&gold, &b, &a, Metric::ChunkF1, 300, 9).unwrap();
        assert_eq!(ab, ba);
    }

    #[test]
    fn p_value_bounds_and_monotonicity() {
        let diffs = [0.5, 1.0, 2.0, 2.0, 3.5];
        let mut last = 1.0;
        for observed in [0.0, 0.5, 1.5, 2.0, 3.0, 4.0] {
            let (_, p) = p_value(observed, &diffs);
            assert!(p > 0.0 && p <= 1.0);
            assert!(p <= last);
            last = p;
        }
        assert_eq!(p_value(10.0, &diffs).1, 1.0 / 6.0);
    }

    #[test]
    fn misalignment_is_an_error() {
        let gold = corpus(3, "NP");
        assert!(
            approx_randomization(&gold, &corpus(2, "NP"), &gold, Metric::ChunkF1, 10, 0).is_err()
        );
    }
}
