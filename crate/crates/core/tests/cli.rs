//! End-to-end runs of the `keytag` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use keytag::corpus::{write_column_corpus, TaggedSentence};
use keytag::synth::{chunk_corpus, pause_corpus};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn keytag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_keytag"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = keytag(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Fails with a single-line diagnostic.
fn fails(args: &[&str]) -> String {
    let out = keytag(args);
    assert!(!out.status.success(), "{args:?} succeeded");
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    err
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_corpus(path: &Path, sentences: &[TaggedSentence]) {
    let mut buf = Vec::new();
    write_column_corpus(sentences, &mut buf).unwrap();
    fs::write(path, buf).unwrap();
}

#[test]
fn derive_writes_one_corpus_per_user() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("aux");
    ok(&[
        "derive",
        "--keylog",
        p(&fixture("table1.keylog")),
        "--out",
        p(&out),
    ]);
    let u33 = fs::read_to_string(out.join("33.aux")).unwrap();
    let labels: Vec<&str> = u33
        .lines()
        .filter(|l| !l.is_empty())
        .map(|l| l.split('\t').nth(1).unwrap())
        .collect();
    assert_eq!(
        labels,
        [
            "B-<m", "I-<m", "B->m1", "I->m1", "B-<m", "B->m1", "B-<m", "I-<m", "B->m1", "B-<m+.5",
            "B->m1"
        ]
    );
    assert!(out.join("41.aux").exists());
    let stats = fs::read_to_string(out.join("user_stats.tsv")).unwrap();
    assert_eq!(stats.lines().count(), 3);
    assert!(stats.contains("33\t240\t240\t11\n"));
    assert!(fs::read_to_string(out.join("manifest.txt"))
        .unwrap()
        .contains("sha256:"));
}

#[test]
fn malformed_inputs_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.log");
    fs::write(&empty, "# nothing\n").unwrap();
    let err = fails(&[
        "derive",
        "--keylog",
        p(&empty),
        "--out",
        p(&dir.path().join("o")),
    ]);
    assert!(err.contains("empty"), "{err}");

    let bad = dir.path().join("bad.log");
    fs::write(&bad, "u\ts\ta\t10\t5\n").unwrap();
    let err = fails(&[
        "derive",
        "--keylog",
        p(&bad),
        "--out",
        p(&dir.path().join("o")),
    ]);
    assert!(err.contains("release before press at line 1"), "{err}");

    fails(&["eval", "--gold", p(&bad)]);
    fails(&["eval", "--gold", "/nonexistent", "--pred", "/nonexistent"]);
    fails(&[
        "train",
        "--main-task",
        "chunk",
        "--train",
        p(&bad),
        "--mode",
        "pooled",
        "--out",
        p(dir.path()),
    ]);
    fails(&["bogus"]);
}

#[test]
fn stats_are_byte_identical_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        ok(&[
            "stats",
            "--keylog",
            p(&fixture("table1.keylog")),
            "--out",
            p(out),
        ]);
    }
    for name in [
        "histogram.tsv",
        "correlation.tsv",
        "segments.tsv",
        "user_stats.tsv",
    ] {
        let x = fs::read(a.join(name)).unwrap();
        assert_eq!(x, fs::read(b.join(name)).unwrap(), "{name}");
        let text = String::from_utf8(x).unwrap();
        let width = text.lines().next().unwrap().split('\t').count();
        assert!(
            text.lines().all(|l| l.split('\t').count() == width),
            "{name}"
        );
    }
    let segments = fs::read_to_string(a.join("segments.tsv")).unwrap();
    assert!(segments.contains(
        "[Coefficient of determination][is a][measure used in][statisitcal model][analysis]"
    ));
}

#[test]
fn stats_group_by_tag_file() {
    let dir = tempfile::tempdir().unwrap();
    let words = "Coefficient of determination is a measure used in statisitcal model analysis";
    let mut pos: String = words.split(' ').map(|w| format!("{w}\tX\n")).collect();
    pos += "\n";
    for w in ["the", "cat", "sat", "."] {
        pos += &format!("{w}\tY\n");
    }
    pos += "\n";
    for w in ["It", "purred", "!"] {
        pos += &format!("{w}\tZ\n");
    }
    let pos_path = dir.path().join("pos.txt");
    fs::write(&pos_path, &pos).unwrap();
    let out = dir.path().join("s");
    ok(&[
        "stats",
        "--keylog",
        p(&fixture("table1.keylog")),
        "--out",
        p(&out),
        "--pos",
        p(&pos_path),
    ]);
    let hist = fs::read_to_string(out.join("histogram.tsv")).unwrap();
    assert!(hist
        .lines()
        .skip(1)
        .all(|l| ["\tX\t", "\tY\t", "\tZ\t"].iter().any(|t| l.contains(t))));

    fs::write(&pos_path, pos.replace("cat\tY", "dog\tY")).unwrap();
    let err = fails(&[
        "stats",
        "--keylog",
        p(&fixture("table1.keylog")),
        "--out",
        p(&out),
        "--pos",
        p(&pos_path),
    ]);
    assert!(err.contains("misaligned"), "{err}");
}

const SMALL: [&str; 10] = [
    "--set",
    "d_word=8",
    "--set",
    "d_char=4",
    "--set",
    "d_hidden=8",
    "--set",
    "epochs=2",
    "--set",
    "layers=2",
];

fn train_args<'a>(train: &'a str, out: &'a str, mode: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut args = vec![
        "train",
        "--main-task",
        "chunk",
        "--train",
        train,
        "--mode",
        mode,
        "--out",
        out,
    ];
    args.extend_from_slice(&SMALL);
    args.extend_from_slice(extra);
    args
}

#[test]
fn train_predict_eval_sigtest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_corpus(&d.join("train.txt"), &chunk_corpus(12, 1, "chunk"));
    write_corpus(&d.join("test.txt"), &chunk_corpus(6, 2, "chunk"));
    let aux = d.join("aux");
    fs::create_dir(&aux).unwrap();
    for (i, user) in ["u1", "u2", "u3"].iter().enumerate() {
        write_corpus(
            &aux.join(format!("{user}.aux")),
            &pause_corpus(4, i as u64, 0.1),
        );
    }
    let config = d.join("model.cfg");
    fs::write(&config, "# small model\nsigma = 0.1\nseed = 5\n").unwrap();
    let (train, test) = (d.join("train.txt"), d.join("test.txt"));
    let common = [
        "--test",
        p(&test),
        "--dev",
        p(&test),
        "--config",
        p(&config),
    ];

    // baseline
    let base = d.join("base");
    ok(&train_args(p(&train), p(&base), "none", &common));
    assert!(base.join("model.json").exists());
    let scores = fs::read_to_string(base.join("scores.tsv")).unwrap();
    assert!(scores.starts_with("model\tmetric\tscore\nmodel\tchunk\t"));
    assert_eq!(
        fs::read_to_string(base.join("dev_log.tsv"))
            .unwrap()
            .lines()
            .count(),
        3
    );
    let manifest = fs::read_to_string(base.join("manifest.txt")).unwrap();
    assert!(manifest.contains("seed\t5\n") && manifest.contains("config\tsigma = 0.1\n"));
    assert!(manifest.contains("config\tn_layers = 2\n"));

    // same seed, same loss log
    let again = d.join("again");
    ok(&train_args(p(&train), p(&again), "none", &common));
    assert_eq!(
        fs::read(base.join("loss_log.tsv")).unwrap(),
        fs::read(again.join("loss_log.tsv")).unwrap()
    );
    assert_eq!(
        fs::read(base.join("test.pred")).unwrap(),
        fs::read(again.join("test.pred")).unwrap()
    );

    // per-user: one checkpoint per user plus a mean row
    let per_user = d.join("per_user");
    let mut args = train_args(p(&train), p(&per_user), "per-user", &common);
    args.extend(["--aux-dir", p(&aux)]);
    ok(&args);
    for user in ["u1", "u2", "u3"] {
        assert!(per_user
            .join("users")
            .join(user)
            .join("model.json")
            .exists());
        let log =
            fs::read_to_string(per_user.join("users").join(user).join("loss_log.tsv")).unwrap();
        assert!(log.contains("\tkeystroke\t"));
    }
    let scores = fs::read_to_string(per_user.join("scores.tsv")).unwrap();
    assert_eq!(scores.lines().count(), 5);
    assert!(scores.lines().last().unwrap().starts_with("mean\tchunk\t"));

    // pooled
    let pooled = d.join("pooled");
    let mut args = train_args(p(&train), p(&pooled), "pooled", &[]);
    args.extend(["--aux-dir", p(&aux)]);
    ok(&args);
    assert!(pooled.join("model.json").exists());

    // predict -> eval round trip
    let pred = d.join("pred.txt");
    ok(&[
        "predict",
        "--model",
        p(&base.join("model.json")),
        "--input",
        p(&test),
        "--task",
        "chunk",
        "--out",
        p(&pred),
    ]);
    assert!(pred.metadata().unwrap().len() > 0);
    let report = ok(&[
        "eval",
        "--gold",
        p(&test),
        "--pred",
        p(&pred),
        "--per-label",
    ]);
    assert!(
        report.starts_with("label\tprecision\trecall\tf1\tgold_count\tpred_count\tcorrect_count\n")
    );
    assert!(report.lines().last().unwrap().starts_with("overall\t"));
    let predicted = fs::read_to_string(&pred).unwrap();
    assert_eq!(
        predicted,
        fs::read_to_string(base.join("test.pred")).unwrap()
    );

    // identical files
    assert!(ok(&["eval", "--gold", p(&test), "--pred", p(&test)]).contains("f1\t100.00"));
    assert_eq!(
        ok(&[
            "eval",
            "--gold",
            p(&test),
            "--pred",
            p(&test),
            "--metric",
            "acc"
        ]),
        "accuracy\t100.00\n"
    );
    let sig = ok(&[
        "sigtest",
        "--gold",
        p(&test),
        "--a",
        p(&pred),
        "--b",
        p(&pred),
        "--i",
        "200",
        "--seed",
        "3",
    ]);
    assert!(sig.contains("p_value\t1\n"), "{sig}");
    fails(&[
        "predict",
        "--model",
        p(&base.join("model.json")),
        "--input",
        p(&test),
        "--task",
        "pos",
        "--out",
        p(&pred),
    ]);
}
