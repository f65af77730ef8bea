//! Runs every example's `run_example` and checks what it reports.

#[path = "../examples/checkpoint_roundtrip.rs"]
mod checkpoint_roundtrip;
#[path = "../examples/derive_labels.rs"]
mod derive_labels;
#[path = "../examples/evaluate_chunks.rs"]
mod evaluate_chunks;
#[path = "../examples/gradient_check.rs"]
mod gradient_check;
#[path = "../examples/pause_stats.rs"]
mod pause_stats;
#[path = "../examples/significance_test.rs"]
mod significance_test;
#[path = "../examples/train_multitask.rs"]
mod train_multitask;

#[test]
fn derive_labels_reproduces_table1() {
    let out = derive_labels::run_example().unwrap();
    assert_eq!((out.median_ms, out.mad_ms), (240.0, 240.0));
    assert_eq!(
        out.labels,
        [
            "B-<m", "I-<m", "B->m1", "I->m1", "B-<m", "B->m1", "B-<m", "I-<m", "B->m1", "B-<m+.5",
            "B->m1"
        ]
    );
    assert_eq!(
        out.bracketed,
        "[Coefficient of determination][is a][measure used in][statisitcal model][analysis]"
    );
}

#[test]
fn pause_stats_separates_the_typists() {
    let out = pause_stats::run_example().unwrap();
    let median = |u: &str| out.medians.iter().find(|(id, _)| id == u).unwrap().1;
    assert!(median("slow") > 1.5 * median("fast"));
    assert!(out.correlation.abs() < 1.0);
    assert!(out.histogram_rows > 10);
}

#[test]
fn train_multitask_runs() {
    let out = train_multitask::run_example(6, 2).unwrap();
    for acc in [out.single_main_acc, out.multi_main_acc, out.multi_aux_acc] {
        assert!((0.0..=100.0).contains(&acc));
    }
}

#[test]
fn evaluate_chunks_scores_the_fixture() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/fixtures/conlleval_20.txt"
    ))
    .unwrap();
    let score = evaluate_chunks::run_example(&text).unwrap();
    assert_eq!(
        (
            score.overall.gold,
            score.overall.pred,
            score.overall.correct
        ),
        (80, 90, 49)
    );
}

#[test]
fn significance_test_separates_systems() {
    let (ab, aa) = significance_test::run_example(2000).unwrap();
    assert!(ab.p_value < 0.01);
    assert_eq!(aa.p_value, 1.0);
}

#[test]
fn gradient_check_passes() {
    assert!(gradient_check::run_example().unwrap() < 1e-4);
}

#[test]
fn checkpoint_roundtrip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(checkpoint_roundtrip::run_example(dir.path()).unwrap(), 10);
}
