//! The `keytag` command line.
//!
//! Subcommands:
//!
//! * `derive`  keystroke log -> per-user auxiliary corpora (`<user>.aux`)
//!   and `user_stats.tsv`
//! * `stats`   keystroke log -> `histogram.tsv`, `correlation.tsv`,
//!   `segments.tsv`, `user_stats.tsv`
//! * `train`   main-task corpus (+ auxiliary corpora) -> checkpoints, loss
//!   logs, scores
//! * `predict` checkpoint + token file -> `token<TAB>label` corpus
//! * `eval`    gold and predicted corpora -> chunk F1 or accuracy
//! * `sigtest` gold and two system outputs -> approximate randomization p
//!
//! Column corpora are read with the token in the first column and the label
//! in the last. Every artifact-producing command also writes `manifest.txt`.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::corpus::{read_rows, read_tokens, write_column_corpus, TaggedSentence};
use crate::error::{Error, Result};
use crate::eval::{
    approx_randomization, chunk_f1, format_report, tag_accuracy, token_label_counts, Metric,
};
use crate::keylog::{
    parse_keylog, tokenize_sessions, PauseMode, PausedSentence, PausedToken, TokenizerConfig,
};
use crate::labels::{
    bracketed, derive_labels, pause_distribution, pause_word_length_corr, stats_by_user,
    threshold_segment, HistogramSpec, UserPauseStats, KEYSTROKE_TASK,
};
use crate::tagger::{checkpoint, train_with, Model, ModelConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(
    name = "keytag",
    version,
    about = "Keystroke-pause auxiliary labels and a multi-task bi-LSTM tagger"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derive per-user auxiliary pause-label corpora from a keystroke log.
    Derive(DeriveArgs),
    /// Pause histograms, pause/word-length correlation and threshold segmentation.
    Stats(StatsArgs),
    /// Train a tagger, optionally with auxiliary keystroke corpora.
    Train(TrainArgs),
    /// Tag a token file with a trained model.
    Predict(PredictArgs),
    /// Score predictions against gold labels.
    Eval(EvalArgs),
    /// Approximate randomization test between two systems.
    Sigtest(SigtestArgs),
}

#[derive(Debug, Args)]
pub struct KeylogArgs {
    /// Tab-separated event log: user_id, session_id, key, press_ms, release_ms.
    #[arg(long)]
    pub keylog: PathBuf,
    /// How the pause before a token is measured.
    #[arg(long, default_value = "release-to-press")]
    pub pause_mode: PauseMode,
    /// Characters that end a sentence.
    #[arg(long, default_value = ".!?")]
    pub boundary_punct: String,
}

#[derive(Debug, Args)]
pub struct DeriveArgs {
    #[command(flatten)]
    pub input: KeylogArgs,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub input: KeylogArgs,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Column file (token, tag) aligned with the log's tokens; groups the histogram by tag.
    #[arg(long)]
    pub pos: Option<PathBuf>,
    /// Pause threshold for the segmentation dump.
    #[arg(long, default_value_t = 500)]
    pub threshold_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MainTask {
    Chunk,
    Ccg,
}

impl MainTask {
    pub fn id(self) -> &'static str {
        match self {
            MainTask::Chunk => "chunk",
            MainTask::Ccg => "ccg",
        }
    }

    pub fn metric(self) -> Metric {
        match self {
            MainTask::Chunk => Metric::ChunkF1,
            MainTask::Ccg => Metric::Accuracy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrainMode {
    /// One model per auxiliary corpus; the mean score is reported.
    PerUser,
    /// One model on all auxiliary corpora at once.
    Pooled,
    /// Main task only.
    None,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub main_task: MainTask,
    /// Main-task training corpus.
    #[arg(long)]
    pub train: PathBuf,
    /// Directory of `<user>.aux` corpora written by `derive`.
    #[arg(long)]
    pub aux_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "none")]
    pub mode: TrainMode,
    /// Flat `key = value` hyperparameter file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides one config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Evaluated after every epoch into dev_log.tsv.
    #[arg(long)]
    pub dev: Option<PathBuf>,
    /// Evaluated after training; predictions go to test.pred.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Column file; tokens are read from the first column.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub task: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long)]
    pub pred: PathBuf,
    /// `chunk` for conlleval chunk F1, `acc` for token accuracy.
    #[arg(long, default_value = "chunk")]
    pub metric: Metric,
    /// Print the per-label table.
    #[arg(long)]
    pub per_label: bool,
}

#[derive(Debug, Args)]
pub struct SigtestArgs {
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    /// Number of shuffles.
    #[arg(long = "i", default_value_t = 10_000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "chunk")]
    pub metric: Metric,
}

/// What produced an output directory.
#[derive(Debug, Clone, Default)]
pub struct RunManifest {
    pub command: String,
    pub config: Option<ModelConfig>,
    pub inputs: Vec<(String, PathBuf, String)>,
    pub seed: Option<u64>,
    pub timings: Vec<(String, f64)>,
}

impl RunManifest {
    fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            ..Default::default()
        }
    }

    fn input(&mut self, role: &str, path: &Path) -> Result<()> {
        let digest = sha256_file(path)?;
        self.inputs
            .push((role.to_string(), path.to_path_buf(), digest));
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut s = format!("tool\tkeytag {VERSION}\ncommand\t{}\n", self.command);
        if let Some(seed) = self.seed {
            s += &format!("seed\t{seed}\n");
        }
        for (role, path, digest) in &self.inputs {
            s += &format!("input\t{role}\t{}\tsha256:{digest}\n", path.display());
        }
        if let Some(config) = &self.config {
            for line in config.to_text().lines() {
                s += &format!("config\t{line}\n");
            }
        }
        for (what, secs) in &self.timings {
            s += &format!("timing\t{what}\t{secs:.3}s\n");
        }
        s
    }

    fn write(&self, dir: &Path) -> Result<()> {
        write_file(&dir.join("manifest.txt"), self.render().as_bytes())
    }
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::from(e).in_file(path))?;
    Ok(Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::from(e).in_file(path))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::from(e).in_file(path))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::from(e).in_file(dir))
}

/// Reads a column corpus taking the label from the last column.
pub fn read_labeled(path: &Path, task: &str) -> Result<Vec<TaggedSentence>> {
    read_labeled_from(open(path)?, task).map_err(|e| e.in_file(path))
}

fn read_labeled_from<R: BufRead>(reader: R, task: &str) -> Result<Vec<TaggedSentence>> {
    let rows = read_rows(reader)?;
    if rows[0][0].len() < 2 {
        return Err(Error::parse(
            1,
            "expected at least a token and a label column",
        ));
    }
    Ok(rows
        .into_iter()
        .map(|sentence| {
            let (tokens, labels) = sentence
                .into_iter()
                .map(|mut row| {
                    let label = row.pop().expect("width checked");
                    (row.swap_remove(0), label)
                })
                .unzip();
            TaggedSentence {
                tokens,
                labels,
                task_id: task.to_string(),
            }
        })
        .collect())
}

fn labels_of(corpus: &[TaggedSentence]) -> Vec<Vec<String>> {
    corpus.iter().map(|s| s.labels.clone()).collect()
}

fn load_keylog(args: &KeylogArgs) -> Result<Vec<PausedSentence>> {
    let sessions = parse_keylog(open(&args.keylog)?).map_err(|e| e.in_file(&args.keylog))?;
    if sessions.is_empty() {
        return Err(Error::Empty("keystroke log").in_file(&args.keylog));
    }
    let config = TokenizerConfig::with_boundary_punct(&args.boundary_punct);
    Ok(tokenize_sessions(&sessions, args.pause_mode, &config))
}

fn stats_table(stats: &[UserPauseStats]) -> String {
    let mut s = String::from("user_id\tmedian_ms\tmad_ms\tn_pauses\n");
    for st in stats {
        s += &format!(
            "{}\t{}\t{}\t{}\n",
            st.user_id, st.median_ms, st.mad_ms, st.n_pauses
        );
    }
    s
}

fn check_user_id(user: &str) -> Result<()> {
    if user.is_empty() || user.starts_with('.') || user.contains(['/', '\\']) {
        return Err(Error::Config(format!(
            "user id {user:?} cannot be used as a file name"
        )));
    }
    Ok(())
}

pub fn cmd_derive(args: &DeriveArgs, stdout: &mut dyn Write) -> Result<()> {
    let start = Instant::now();
    let sentences = load_keylog(&args.input)?;
    let stats = stats_by_user(&sentences)?;
    create_dir(&args.out)?;
    for st in &stats {
        check_user_id(&st.user_id)?;
        let own: Vec<PausedSentence> = sentences
            .iter()
            .filter(|s| s.user_id == st.user_id)
            .cloned()
            .collect();
        let tagged = derive_labels(&own, st)?;
        let path = args.out.join(format!("{}.aux", st.user_id));
        let mut buf = Vec::new();
        write_column_corpus(&tagged, &mut buf)?;
        write_file(&path, &buf)?;
        writeln!(stdout, "{}\t{} sentences", path.display(), tagged.len())?;
    }
    write_file(
        &args.out.join("user_stats.tsv"),
        stats_table(&stats).as_bytes(),
    )?;
    let mut manifest = RunManifest::new("derive");
    manifest.input("keylog", &args.input.keylog)?;
    manifest
        .timings
        .push(("total".into(), start.elapsed().as_secs_f64()));
    manifest.write(&args.out)
}

/// Tags from a (token, tag) column file, flattened and checked against `sentences`.
fn aligned_tags(path: &Path, sentences: &[PausedSentence]) -> Result<Vec<String>> {
    let tagged = read_labeled(path, "pos")?;
    let tokens = sentences.iter().flat_map(|s| &s.tokens);
    let tags = tagged.iter().flat_map(|s| s.tokens.iter().zip(&s.labels));
    let mut out = Vec::new();
    for (i, pair) in tokens.zip_longest_checked(tags).enumerate() {
        match pair {
            (Some(t), Some((word, tag))) if &t.text == word => out.push(tag.clone()),
            (Some(t), Some((word, _))) => {
                return Err(Error::Misaligned(format!(
                    "token {}: log has {:?}, tag file has {word:?}",
                    i + 1,
                    t.text
                ))
                .in_file(path))
            }
            _ => {
                return Err(
                    Error::Misaligned("tag file and log differ in token count".into())
                        .in_file(path),
                )
            }
        }
    }
    Ok(out)
}

trait ZipLongest: Iterator + Sized {
    fn zip_longest_checked<J: Iterator>(self, other: J) -> ZipBoth<Self, J> {
        ZipBoth { a: self, b: other }
    }
}

impl<I: Iterator> ZipLongest for I {}

struct ZipBoth<A, B> {
    a: A,
    b: B,
}

impl<A: Iterator, B: Iterator> Iterator for ZipBoth<A, B> {
    type Item = (Option<A::Item>, Option<B::Item>);

    fn next(&mut self) -> Option<Self::Item> {
        match (self.a.next(), self.b.next()) {
            (None, None) => None,
            pair => Some(pair),
        }
    }
}

fn corr_cell(tokens: &[PausedToken]) -> String {
    pause_word_length_corr(tokens).map_or_else(|_| "NA".to_string(), |r| format!("{r:.6}"))
}

pub fn cmd_stats(args: &StatsArgs, stdout: &mut dyn Write) -> Result<()> {
    let start = Instant::now();
    let sentences = load_keylog(&args.input)?;
    let tags = args
        .pos
        .as_deref()
        .map(|p| aligned_tags(p, &sentences))
        .transpose()?;
    let stats = stats_by_user(&sentences)?;
    create_dir(&args.out)?;

    // per-user word tokens (punctuation excluded) with their tags
    let mut users: Vec<(&str, Vec<PausedToken>, Vec<String>)> = Vec::new();
    let mut k = 0;
    for s in &sentences {
        if users.last().is_none_or(|(u, _, _)| *u != s.user_id) {
            users.push((&s.user_id, Vec::new(), Vec::new()));
        }
        let entry = users.last_mut().expect("pushed");
        for t in &s.tokens {
            if !t.is_punct {
                entry.1.push(t.clone());
                if let Some(tags) = &tags {
                    entry.2.push(tags[k].clone());
                }
            }
            k += 1;
        }
    }
    let all: Vec<PausedToken> = users
        .iter()
        .flat_map(|(_, t, _)| t.iter().cloned())
        .collect();
    let spec = HistogramSpec::covering(&all);

    let mut hist = String::from("user_id\tgroup\tbucket\tlower_ms\tupper_ms\tcount\n");
    let mut corr = String::from("user_id\tn_tokens\tpearson_r\n");
    for (user, tokens, groups) in &users {
        let groups = tags.as_ref().map(|_| groups.as_slice());
        for row in pause_distribution(tokens, groups, &spec)? {
            hist += &format!(
                "{user}\t{}\t{}\t{:.1}\t{:.1}\t{}\n",
                row.group, row.bucket, row.lower_ms, row.upper_ms, row.count
            );
        }
        corr += &format!("{user}\t{}\t{}\n", tokens.len(), corr_cell(tokens));
    }
    corr += &format!("all\t{}\t{}\n", all.len(), corr_cell(&all));

    let mut segments = String::from("user_id\tsession_id\tsentence\tsegments\n");
    let mut last_session: Option<(&str, &str)> = None;
    let mut index = 0;
    for s in &sentences {
        let key = (s.user_id.as_str(), s.session_id.as_str());
        index = if last_session == Some(key) {
            index + 1
        } else {
            1
        };
        last_session = Some(key);
        let spans = threshold_segment(s, args.threshold_ms);
        segments += &format!(
            "{}\t{}\t{index}\t{}\n",
            s.user_id,
            s.session_id,
            bracketed(s, &spans)
        );
    }

    write_file(&args.out.join("histogram.tsv"), hist.as_bytes())?;
    write_file(&args.out.join("correlation.tsv"), corr.as_bytes())?;
    write_file(&args.out.join("segments.tsv"), segments.as_bytes())?;
    write_file(
        &args.out.join("user_stats.tsv"),
        stats_table(&stats).as_bytes(),
    )?;
    let mut manifest = RunManifest::new("stats");
    manifest.input("keylog", &args.input.keylog)?;
    if let Some(pos) = &args.pos {
        manifest.input("pos", pos)?;
    }
    manifest
        .timings
        .push(("total".into(), start.elapsed().as_secs_f64()));
    manifest.write(&args.out)?;
    write!(stdout, "{corr}")?;
    Ok(())
}

fn resolve_config(args: &TrainArgs) -> Result<ModelConfig> {
    let mut config = ModelConfig::default();
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
        config.apply_text(&text).map_err(|e| e.in_file(path))?;
    }
    for kv in &args.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        config.set(k.trim(), v.trim())?;
    }
    config.main_task = args.main_task.id().to_string();
    config.validate()?;
    Ok(config)
}

/// `<user>.aux` corpora of a directory, sorted by user id.
pub fn read_aux_dir(dir: &Path) -> Result<Vec<(String, Vec<TaggedSentence>)>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::from(e).in_file(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "aux"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Empty("auxiliary corpus directory (no *.aux files)").in_file(dir));
    }
    paths
        .iter()
        .map(|p| {
            let user = p
                .file_stem()
                .expect("has extension")
                .to_string_lossy()
                .into_owned();
            Ok((user, read_labeled(p, KEYSTROKE_TASK)?))
        })
        .collect()
}

fn score(metric: Metric, gold: &[TaggedSentence], pred: &[Vec<String>]) -> Result<f64> {
    let gold = labels_of(gold);
    match metric {
        Metric::ChunkF1 => Ok(chunk_f1(&gold, pred)?.f1()),
        Metric::Accuracy => tag_accuracy(&gold, pred),
    }
}

fn predict_all(
    model: &Model,
    sentences: &[TaggedSentence],
    task: &str,
) -> Result<Vec<Vec<String>>> {
    sentences
        .par_iter()
        .map(|s| model.predict(&s.tokens, task))
        .collect()
}

struct Evaluation<'a> {
    metric: Metric,
    dev: Option<&'a [TaggedSentence]>,
    test: Option<&'a [TaggedSentence]>,
}

struct RunOutcome {
    name: String,
    score: Option<f64>,
    test_pred: Vec<Vec<String>>,
}

/// Trains one model into `dir`.
fn train_one(
    name: &str,
    config: ModelConfig,
    main: &[TaggedSentence],
    aux: &[TaggedSentence],
    eval: &Evaluation<'_>,
    dir: &Path,
) -> Result<RunOutcome> {
    create_dir(dir)?;
    let task = config.main_task.clone();
    let mut corpora: Vec<(&str, &[TaggedSentence])> = vec![(task.as_str(), main)];
    if !aux.is_empty() {
        corpora.push((KEYSTROKE_TASK, aux));
    }
    let mut model = Model::for_corpora(config, &corpora)?;
    let mut dev_log = String::from("epoch\tscore\n");
    let log = train_with(&mut model, &corpora, |epoch, m| {
        if let Some(dev) = eval.dev {
            let pred = predict_all(m, dev, &task)?;
            dev_log += &format!("{epoch}\t{:.2}\n", score(eval.metric, dev, &pred)?);
        }
        Ok(())
    })?;
    let mut loss = Vec::new();
    log.write_tsv(&mut loss)?;
    write_file(&dir.join("loss_log.tsv"), &loss)?;
    if eval.dev.is_some() {
        write_file(&dir.join("dev_log.tsv"), dev_log.as_bytes())?;
    }
    let path = dir.join("model.json");
    checkpoint::save(&model, &path).map_err(|e| e.in_file(&path))?;
    let (score, test_pred) = match eval.test {
        Some(test) => {
            let pred = predict_all(&model, test, &task)?;
            (Some(score(eval.metric, test, &pred)?), pred)
        }
        None => (None, Vec::new()),
    };
    Ok(RunOutcome {
        name: name.to_string(),
        score,
        test_pred,
    })
}

fn write_predictions(
    path: &Path,
    sentences: &[TaggedSentence],
    pred: &[Vec<String>],
) -> Result<()> {
    let out: Vec<TaggedSentence> = sentences
        .iter()
        .zip(pred)
        .map(|(s, p)| TaggedSentence {
            tokens: s.tokens.clone(),
            labels: p.clone(),
            task_id: s.task_id.clone(),
        })
        .collect();
    let mut buf = Vec::new();
    write_column_corpus(&out, &mut buf)?;
    write_file(path, &buf)
}

pub fn cmd_train(args: &TrainArgs, stdout: &mut dyn Write) -> Result<()> {
    let start = Instant::now();
    let config = resolve_config(args)?;
    let task = args.main_task.id();
    let main = read_labeled(&args.train, task)?;
    let aux_users = match (args.mode, &args.aux_dir) {
        (TrainMode::None, _) => Vec::new(),
        (_, Some(dir)) => read_aux_dir(dir)?,
        (_, None) => {
            return Err(Error::Config(
                "--aux-dir is required unless --mode none".into(),
            ))
        }
    };
    let dev = args
        .dev
        .as_deref()
        .map(|p| read_labeled(p, task))
        .transpose()?;
    let test = args
        .test
        .as_deref()
        .map(|p| read_labeled(p, task))
        .transpose()?;
    let eval = Evaluation {
        metric: args.main_task.metric(),
        dev: dev.as_deref(),
        test: test.as_deref(),
    };
    create_dir(&args.out)?;

    let outcomes = match args.mode {
        TrainMode::None => vec![train_one(
            "model",
            config.clone(),
            &main,
            &[],
            &eval,
            &args.out,
        )?],
        TrainMode::Pooled => {
            let pooled: Vec<TaggedSentence> = aux_users
                .iter()
                .flat_map(|(_, c)| c.iter().cloned())
                .collect();
            vec![train_one(
                "pooled",
                config.clone(),
                &main,
                &pooled,
                &eval,
                &args.out,
            )?]
        }
        TrainMode::PerUser => aux_users
            .par_iter()
            .enumerate()
            .map(|(i, (user, aux))| {
                check_user_id(user)?;
                let mut cfg = config.clone();
                cfg.seed = config.seed.wrapping_add(i as u64);
                train_one(
                    user,
                    cfg,
                    &main,
                    aux,
                    &eval,
                    &args.out.join("users").join(user),
                )
            })
            .collect::<Result<Vec<_>>>()?,
    };

    if let Some(test) = &test {
        let concatenated: Vec<Vec<String>> = outcomes
            .iter()
            .flat_map(|o| o.test_pred.iter().cloned())
            .collect();
        let repeated: Vec<TaggedSentence> =
            outcomes.iter().flat_map(|_| test.iter().cloned()).collect();
        write_predictions(&args.out.join("test.pred"), &repeated, &concatenated)?;
        let metric = args.main_task.metric();
        let mut table = String::from("model\tmetric\tscore\n");
        for o in &outcomes {
            table += &format!(
                "{}\t{metric}\t{:.2}\n",
                o.name,
                o.score.expect("test given")
            );
        }
        let mean = outcomes.iter().filter_map(|o| o.score).sum::<f64>() / outcomes.len() as f64;
        table += &format!("mean\t{metric}\t{mean:.2}\n");
        write_file(&args.out.join("scores.tsv"), table.as_bytes())?;
        write!(stdout, "{table}")?;
    } else {
        for o in &outcomes {
            writeln!(stdout, "trained {}", o.name)?;
        }
    }

    let mut manifest = RunManifest::new("train");
    manifest.seed = Some(config.seed);
    manifest.input("train", &args.train)?;
    if let Some(dir) = &args.aux_dir {
        if args.mode != TrainMode::None {
            for (user, _) in &aux_users {
                manifest.input("aux", &dir.join(format!("{user}.aux")))?;
            }
        }
    }
    for (role, path) in [("dev", &args.dev), ("test", &args.test)] {
        if let Some(p) = path {
            manifest.input(role, p)?;
        }
    }
    manifest.command = format!("train --main-task {task} --mode {:?}", args.mode).to_lowercase();
    manifest.config = Some(config);
    manifest
        .timings
        .push(("total".into(), start.elapsed().as_secs_f64()));
    manifest.write(&args.out)
}

pub fn cmd_predict(args: &PredictArgs, stdout: &mut dyn Write) -> Result<()> {
    let model = checkpoint::load(&args.model).map_err(|e| e.in_file(&args.model))?;
    model.head(&args.task)?;
    let tokens = read_tokens(open(&args.input)?, 0).map_err(|e| e.in_file(&args.input))?;
    let sentences: Vec<TaggedSentence> = tokens
        .into_iter()
        .map(|tokens| TaggedSentence {
            labels: Vec::new(),
            tokens,
            task_id: args.task.clone(),
        })
        .collect();
    let pred = predict_all(&model, &sentences, &args.task)?;
    write_predictions(&args.out, &sentences, &pred)?;
    writeln!(
        stdout,
        "{}\t{} sentences",
        args.out.display(),
        sentences.len()
    )?;
    Ok(())
}

fn read_label_columns(path: &Path) -> Result<Vec<Vec<String>>> {
    Ok(labels_of(&read_labeled(path, "eval")?))
}

pub fn cmd_eval(args: &EvalArgs, stdout: &mut dyn Write) -> Result<()> {
    let gold = read_label_columns(&args.gold)?;
    let pred = read_label_columns(&args.pred)?;
    match (args.metric, args.per_label) {
        (Metric::ChunkF1, true) => write!(stdout, "{}", format_report(&chunk_f1(&gold, &pred)?))?,
        (Metric::Accuracy, true) => write!(
            stdout,
            "{}",
            format_report(&token_label_counts(&gold, &pred)?)
        )?,
        (Metric::ChunkF1, false) => {
            let s = chunk_f1(&gold, &pred)?;
            writeln!(
                stdout,
                "precision\t{:.2}\nrecall\t{:.2}\nf1\t{:.2}",
                s.precision(),
                s.recall(),
                s.f1()
            )?
        }
        (Metric::Accuracy, false) => {
            writeln!(stdout, "accuracy\t{:.2}", tag_accuracy(&gold, &pred)?)?
        }
    }
    Ok(())
}

pub fn cmd_sigtest(args: &SigtestArgs, stdout: &mut dyn Write) -> Result<()> {
    let gold = read_label_columns(&args.gold)?;
    let a = read_label_columns(&args.a)?;
    let b = read_label_columns(&args.b)?;
    let r = approx_randomization(&gold, &a, &b, args.metric, args.iterations, args.seed)?;
    writeln!(
        stdout,
        "metric\t{}\nobserved_diff\t{:.4}\niterations\t{}\nexceed\t{}\np_value\t{}",
        args.metric, r.observed, r.iterations, r.exceed, r.p_value
    )?;
    Ok(())
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Derive(a) => cmd_derive(a, stdout),
        Command::Stats(a) => cmd_stats(a, stdout),
        Command::Train(a) => cmd_train(a, stdout),
        Command::Predict(a) => cmd_predict(a, stdout),
        Command::Eval(a) => cmd_eval(a, stdout),
        Command::Sigtest(a) => cmd_sigtest(a, stdout),
    }
}

/// Entry point of the binary: one-line diagnostics, nonzero exit on error.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let first: Vec<&str> = rendered
                .lines()
                .take_while(|l| !l.trim().is_empty())
                .map(str::trim)
                .collect();
            eprintln!("{}", first.join(" "));
            return ExitCode::from(2);
        }
    };
    let stdout = std::io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = execute(&cli, &mut out).and_then(|()| out.flush().map_err(Error::from));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
