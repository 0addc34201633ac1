//! End-to-end library flows: files in, selection out.

use std::io::Write;

use diffset::{
    select, Dataset, Error, JointDistribution, SelectionConfig, Termination, VariableId,
};

fn var(i: usize) -> VariableId {
    VariableId::new(i)
}

#[test]
fn sampled_dataset_round_trips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("case.csv");
    let sample = JointDistribution::case_study().sample(50, 7).unwrap();
    sample.write(&path, b',').unwrap();
    let loaded = Dataset::load(&path, "class", b',').unwrap();
    assert_eq!(loaded.n_variables(), 5);
    assert_eq!(loaded.m(), 50);
    assert_eq!(loaded.class_labels(), sample.class_labels());
}

#[test]
fn class_column_may_sit_anywhere_and_labels_may_be_strings() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mixed.csv");
    std::fs::write(
        &path,
        "color,class,size\nred,0,big\nblue,1,small\nred,1,big\ngreen,0,small\n",
    )
    .unwrap();
    let d = Dataset::load(&path, "class", b',').unwrap();
    assert_eq!(d.variable_names(), ["color", "size"]);
    let color = d.variable_named("color").unwrap();
    // First-appearance coding: red=0, blue=1, green=2.
    assert_eq!(d.column(color), &[0, 1, 0, 2]);
    assert_eq!(d.category_label(color, 2), "green");
    assert_eq!(d.class_labels(), &[0, 1, 1, 0]);

    // Labels survive a write/load cycle; class moves to the last column.
    let out = dir.path().join("mixed_out.csv");
    d.write(&out, b',').unwrap();
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("color,size,class\nred,big,0\n"));
    let reloaded = Dataset::load(&out, "class", b',').unwrap();
    assert_eq!(reloaded.column(color), d.column(color));
}

#[test]
fn tab_delimited_files_work() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("case.tsv");
    let sample = JointDistribution::case_study().sample(20, 3).unwrap();
    sample.write(&path, b'\t').unwrap();
    let loaded = Dataset::load(&path, "class", b'\t').unwrap();
    assert_eq!(loaded.class_labels(), sample.class_labels());
}

#[test]
fn loader_rejects_bad_class_and_ragged_rows() {
    let dir = tempfile::tempdir().unwrap();

    let bad_class = dir.path().join("bad_class.csv");
    std::fs::write(&bad_class, "x1,class\n0,0\n1,2\n").unwrap();
    match Dataset::load(&bad_class, "class", b',') {
        Err(Error::InvalidClassValue { row, value, .. }) => {
            assert_eq!(row, 2);
            assert_eq!(value, "2");
        }
        other => panic!("expected InvalidClassValue, got {other:?}"),
    }

    let ragged = dir.path().join("ragged.csv");
    std::fs::write(&ragged, "x1,x2,class\n0,0,0\n1,1\n").unwrap();
    assert!(matches!(Dataset::load(&ragged, "class", b','), Err(Error::Delimited { .. })));

    let empty_field = dir.path().join("empty_field.csv");
    std::fs::write(&empty_field, "x1,class\n0,0\n,1\n").unwrap();
    assert!(matches!(
        Dataset::load(&empty_field, "class", b','),
        Err(Error::EmptyField { row: 2, .. })
    ));

    let missing = dir.path().join("nope.csv");
    assert!(matches!(Dataset::load(&missing, "class", b','), Err(Error::Io { .. })));
}

#[test]
fn degenerate_single_class_file_loads_and_estimates_to_zero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.csv");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "x1,x2,class").unwrap();
    for row in 0..4 {
        writeln!(f, "{},{},0", row % 2, row / 2).unwrap();
    }
    drop(f);
    let d = Dataset::load(&path, "class", b',').unwrap();
    assert_eq!(d.m(), 4);
    let all: Vec<VariableId> = d.variables().collect();
    let view = d.project(&all).unwrap();
    assert_eq!(diffset::conditional_entropy_once(&view, diffset::Correction::None), 0.0);
}

#[test]
fn distribution_loads_from_rational_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dist.csv");
    std::fs::write(
        &path,
        "x1,x2,class,p\n0,0,0,23/96\n0,0,1,1/96\n0,1,0,3/32\n0,1,1,5/32\n1,0,0,1/24\n1,0,1,5/24\n1,1,1,1/4\n",
    )
    .unwrap();
    let j = JointDistribution::load(&path, "class", b',').unwrap();
    assert_eq!(j.n_variables(), 2);
    assert_eq!(j.prob(&[1, 1], 0), 0.0);
    let h1 = j.conditional_entropy(&[var(0)]).unwrap();
    assert!((h1 - 0.6660563421790616).abs() < 1e-12);
}

#[test]
fn unnormalized_distribution_file_reports_total() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "x1,class,p\n0,0,0.4\n1,1,0.4\n").unwrap();
    match JointDistribution::load(&path, "class", b',') {
        Err(Error::NotNormalized { total, .. }) => assert!((total - 0.8).abs() < 1e-12),
        other => panic!("expected NotNormalized, got {other:?}"),
    }
}

/// At large m the first two selections recover the true pair in order for
/// nearly every seed.
#[test]
fn large_samples_select_the_true_pair_in_order() {
    let j = JointDistribution::case_study();
    let mut hits = 0;
    let seeds = 20;
    for seed in 0..seeds {
        let sample = j.sample(2000, 1000 + seed).unwrap();
        let cfg = SelectionConfig {
            estimator: diffset::EstimatorConfig { seed: 5000 + seed, ..Default::default() },
            ..Default::default()
        };
        let trace = select(&sample, &cfg).unwrap();
        let chosen = trace.chosen();
        if chosen.len() >= 2 && chosen[0] == var(0) && chosen[1] == var(1) {
            hits += 1;
        }
    }
    assert!(hits >= seeds - 1, "true pair found first in only {hits}/{seeds} runs");
}

/// The bound recorded at each accepted step implies the chosen entropy
/// dropped by at least k_min times the combined spread.
#[test]
fn accepted_steps_respect_the_threshold_bound() {
    let j = JointDistribution::case_study();
    for seed in 0..10 {
        let sample = j.sample(60, seed).unwrap();
        let cfg = SelectionConfig::default();
        let trace = select(&sample, &cfg).unwrap();
        for pair in trace.steps.windows(2) {
            let prev = &pair[0].chosen_estimate;
            let step = &pair[1];
            let combined = prev.sigma_est + step.chosen_estimate.sigma_est;
            assert!(
                step.chosen_estimate.h_est <= prev.h_est - cfg.k_min * combined + 1e-12,
                "seed {seed}, iteration {}: bound violated",
                step.iteration
            );
        }
    }
}

#[test]
fn f_min_above_reachable_confidence_stops_first() {
    // At m=50 the first-iteration k sits near 3, confidence near 0.9: a
    // 0.999999 floor always rejects the step before anything is recorded.
    let sample = JointDistribution::case_study().sample(50, 4).unwrap();
    let cfg = SelectionConfig {
        f_min: 0.999999,
        k_min: 0.0,
        ..Default::default()
    };
    let trace = select(&sample, &cfg).unwrap();
    assert!(trace.steps.is_empty());
    assert_eq!(trace.termination, Termination::BelowFMin);
}

#[test]
fn zero_thresholds_run_to_exhaustion_or_zero_gain() {
    let exhaustive_cfg = SelectionConfig {
        k_min: 0.0,
        f_min: 0.0,
        ..Default::default()
    };
    let sample = JointDistribution::case_study().sample(200, 9).unwrap();
    let trace = select(&sample, &exhaustive_cfg).unwrap();
    match trace.termination {
        Termination::ExhaustedVariables => assert_eq!(trace.steps.len(), 5),
        Termination::NoPositiveK => assert!(trace.steps.len() < 5),
        other => panic!("unexpected termination {other:?}"),
    }
}
