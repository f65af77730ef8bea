//! Auxiliary pause labels and exploratory pause statistics.
//!
//! Each user's pauses are summarised by their median and median absolute
//! deviation (MAD). A token's pause is then placed in one of four bins
//! relative to those statistics and BIO-encoded, giving labels such as
//! `B-<m` or `I->m1`. Punctuation tokens are always `O`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::corpus::TaggedSentence;
use crate::error::{Error, Result};
use crate::keylog::{PausedSentence, PausedToken};

/// Task id used for derived keystroke corpora.
pub const KEYSTROKE_TASK: &str = "keystroke";

#[derive(Debug, Clone, PartialEq)]
pub struct UserPauseStats {
    pub user_id: String,
    pub median_ms: f64,
    pub mad_ms: f64,
    pub n_pauses: usize,
}

/// Median of a non-empty slice (mean of the two middle values for even length).
fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Median and raw (unscaled) median absolute deviation of `pauses`.
pub fn user_stats(user_id: &str, pauses: &[u64]) -> Result<UserPauseStats> {
    if pauses.is_empty() {
        return Err(Error::NoPauses(user_id.to_string()));
    }
    let mut values: Vec<f64> = pauses.iter().map(|&p| p as f64).collect();
    let med = median(&mut values);
    let mut deviations: Vec<f64> = values.iter().map(|v| (v - med).abs()).collect();
    let mad = median(&mut deviations);
    Ok(UserPauseStats {
        user_id: user_id.to_string(),
        median_ms: med,
        mad_ms: mad,
        n_pauses: pauses.len(),
    })
}

/// Pools the pauses of all non-punctuation tokens per user and computes
/// their statistics. Output is sorted by user id.
pub fn stats_by_user(sentences: &[PausedSentence]) -> Result<Vec<UserPauseStats>> {
    let mut pools: BTreeMap<&str, Vec<u64>> = BTreeMap::new();
    for sentence in sentences {
        let pool = pools.entry(&sentence.user_id).or_default();
        pool.extend(
            sentence
                .tokens
                .iter()
                .filter(|t| !t.is_punct)
                .map(|t| t.pre_pause_ms),
        );
    }
    pools
        .into_iter()
        .map(|(user, pauses)| user_stats(user, &pauses))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PauseBin {
    /// `<m`: shorter than the median.
    LtM,
    /// `<m+.5`: below median + 0.5 MAD.
    LtMHalf,
    /// `<m+1`: below median + 1 MAD.
    LtM1,
    /// `>m1`: everything longer.
    GtM1,
    /// Punctuation.
    O,
}

impl PauseBin {
    pub const ALL: [PauseBin; 5] = [
        PauseBin::LtM,
        PauseBin::LtMHalf,
        PauseBin::LtM1,
        PauseBin::GtM1,
        PauseBin::O,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PauseBin::LtM => "<m",
            PauseBin::LtMHalf => "<m+.5",
            PauseBin::LtM1 => "<m+1",
            PauseBin::GtM1 => ">m1",
            PauseBin::O => "O",
        }
    }
}

impl fmt::Display for PauseBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PauseBin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PauseBin::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown pause bin {s:?}")))
    }
}

pub fn bin_pause(pause_ms: u64, stats: &UserPauseStats, is_punct: bool) -> PauseBin {
    if is_punct {
        return PauseBin::O;
    }
    let p = pause_ms as f64;
    if p < stats.median_ms {
        PauseBin::LtM
    } else if p < stats.median_ms + 0.5 * stats.mad_ms {
        PauseBin::LtMHalf
    } else if p < stats.median_ms + stats.mad_ms {
        PauseBin::LtM1
    } else {
        PauseBin::GtM1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AuxLabel {
    Begin(PauseBin),
    Inside(PauseBin),
    Outside,
}

impl AuxLabel {
    pub fn bin(self) -> PauseBin {
        match self {
            AuxLabel::Begin(b) | AuxLabel::Inside(b) => b,
            AuxLabel::Outside => PauseBin::O,
        }
    }
}

impl fmt::Display for AuxLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AuxLabel::Begin(b) => write!(f, "B-{b}"),
            AuxLabel::Inside(b) => write!(f, "I-{b}"),
            AuxLabel::Outside => f.write_str("O"),
        }
    }
}

impl FromStr for AuxLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let label = match s.split_once('-') {
            None if s == "O" => AuxLabel::Outside,
            Some(("B", bin)) => AuxLabel::Begin(bin.parse()?),
            Some(("I", bin)) => AuxLabel::Inside(bin.parse()?),
            _ => return Err(Error::Config(format!("unknown auxiliary label {s:?}"))),
        };
        match label {
            AuxLabel::Begin(PauseBin::O) | AuxLabel::Inside(PauseBin::O) => {
                Err(Error::Config(format!("O takes no prefix: {s:?}")))
            }
            l => Ok(l),
        }
    }
}

/// BIO-encodes a bin sequence: a run of identical non-O bins forms one
/// segment, and a segment restarts after every `O` or bin change.
pub fn bio_encode(bins: &[PauseBin]) -> Vec<AuxLabel> {
    let mut prev = PauseBin::O;
    bins.iter()
        .map(|&bin| {
            let label = match bin {
                PauseBin::O => AuxLabel::Outside,
                b if b == prev => AuxLabel::Inside(b),
                b => AuxLabel::Begin(b),
            };
            prev = bin;
            label
        })
        .collect()
}

/// Labels every token of `sentences` with its BIO pause bin.
pub fn derive_labels(
    sentences: &[PausedSentence],
    stats: &UserPauseStats,
) -> Result<Vec<TaggedSentence>> {
    sentences
        .iter()
        .map(|sentence| {
            if sentence.user_id != stats.user_id {
                return Err(Error::UserMismatch {
                    expected: stats.user_id.clone(),
                    found: sentence.user_id.clone(),
                });
            }
            let bins: Vec<PauseBin> = sentence
                .tokens
                .iter()
                .map(|t| bin_pause(t.pre_pause_ms, stats, t.is_punct))
                .collect();
            Ok(TaggedSentence {
                tokens: sentence.tokens.iter().map(|t| t.text.clone()).collect(),
                labels: bio_encode(&bins).iter().map(ToString::to_string).collect(),
                task_id: KEYSTROKE_TASK.to_string(),
            })
        })
        .collect()
}

/// Splits a sentence wherever the pause before a token reaches `threshold_ms`.
pub fn threshold_segment(sentence: &PausedSentence, threshold_ms: u64) -> Vec<Range<usize>> {
    let mut spans = Vec::new();
    let mut start = 0;
    for (i, token) in sentence.tokens.iter().enumerate().skip(1) {
        if token.pre_pause_ms >= threshold_ms {
            spans.push(start..i);
            start = i;
        }
    }
    if !sentence.tokens.is_empty() {
        spans.push(start..sentence.tokens.len());
    }
    spans
}

/// Renders a segmentation as `[a b][c]`.
pub fn bracketed(sentence: &PausedSentence, spans: &[Range<usize>]) -> String {
    spans
        .iter()
        .map(|span| {
            let words: Vec<&str> = sentence.tokens[span.clone()]
                .iter()
                .map(|t| t.text.as_str())
                .collect();
            format!("[{}]", words.join(" "))
        })
        .collect()
}

/// Pearson correlation between token length in characters and pause.
pub fn pause_word_length_corr(tokens: &[PausedToken]) -> Result<f64> {
    if tokens.len() < 2 {
        return Err(Error::UndefinedCorrelation("fewer than two tokens"));
    }
    let xs: Vec<f64> = tokens
        .iter()
        .map(|t| t.text.chars().count() as f64)
        .collect();
    let ys: Vec<f64> = tokens.iter().map(|t| t.pre_pause_ms as f64).collect();
    let n = tokens.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance"));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Bucket layout for pause histograms: a dedicated zero bucket plus
/// `log_buckets` log-spaced buckets over `[1, max_ms]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramSpec {
    pub log_buckets: usize,
    pub max_ms: u64,
}

impl HistogramSpec {
    pub const DEFAULT_BUCKETS: usize = 20;

    /// Default spec sized to the largest pause in `tokens`.
    pub fn covering(tokens: &[PausedToken]) -> Self {
        HistogramSpec {
            log_buckets: Self::DEFAULT_BUCKETS,
            max_ms: tokens
                .iter()
                .map(|t| t.pre_pause_ms)
                .max()
                .unwrap_or(1)
                .max(1),
        }
    }

    /// Bucket index: 0 for a zero pause, 1..=log_buckets otherwise.
    pub fn bucket(&self, pause_ms: u64) -> usize {
        if pause_ms == 0 {
            return 0;
        }
        let n = self.log_buckets.max(1);
        if self.max_ms <= 1 {
            return 1;
        }
        let frac = (pause_ms as f64).ln() / (self.max_ms as f64).ln();
        1 + ((frac * n as f64).floor() as usize).min(n - 1)
    }

    /// Lower and upper edge (ms) of a bucket.
    pub fn edges(&self, bucket: usize) -> (f64, f64) {
        if bucket == 0 {
            return (0.0, 1.0);
        }
        let n = self.log_buckets.max(1) as f64;
        let max = self.max_ms.max(1) as f64;
        let k = (bucket - 1) as f64;
        (max.powf(k / n), max.powf((k + 1.0) / n))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramRow {
    pub group: String,
    pub bucket: usize,
    pub lower_ms: f64,
    pub upper_ms: f64,
    pub count: usize,
}

/// Pause histogram, optionally grouped by a per-token tag (e.g. POS).
///
/// Only non-empty buckets are emitted; rows are sorted by group then bucket.
pub fn pause_distribution(
    tokens: &[PausedToken],
    groups: Option<&[String]>,
    spec: &HistogramSpec,
) -> Result<Vec<HistogramRow>> {
    if let Some(groups) = groups {
        if groups.len() != tokens.len() {
            return Err(Error::Misaligned(format!(
                "{} group tags for {} tokens",
                groups.len(),
                tokens.len()
            )));
        }
    }
    let mut counts: BTreeMap<(&str, usize), usize> = BTreeMap::new();
    for (i, token) in tokens.iter().enumerate() {
        let group = groups.map_or("all", |g| g[i].as_str());
        *counts
            .entry((group, spec.bucket(token.pre_pause_ms)))
            .or_default() += 1;
    }
    Ok(counts
        .into_iter()
        .map(|((group, bucket), count)| {
            let (lower_ms, upper_ms) = spec.edges(bucket);
            HistogramRow {
                group: group.to_string(),
                bucket,
                lower_ms,
                upper_ms,
                count,
            }
        })
        .collect())
}
