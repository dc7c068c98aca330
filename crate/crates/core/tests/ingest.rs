use std::io::Cursor;

use interpnn::evaluation::{run_real_experiment, RealSpec};
use interpnn::ingest::{
    load_csv, parse_csv, split, standardize, write_csv, written_spec, Binarization, Column, IngestSpec, LabelValue,
};
use interpnn::{Dataset, Error, Task};
use proptest::prelude::*;

fn spec(features: Vec<Column>, label: Column) -> IngestSpec {
    IngestSpec::new("unused.csv", features, label)
}

fn named(cols: &[&str], label: &str) -> IngestSpec {
    spec(cols.iter().map(|c| Column::Name(c.to_string())).collect(), Column::Name(label.into()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn write_then_load_round_trips(
        d in 1usize..5,
        rows in prop::collection::vec((prop::collection::vec(-1e6f64..1e6, 5), any::<bool>()), 1..60),
    ) {
        let points: Vec<f64> = rows.iter().flat_map(|(x, _)| x[..d].to_vec()).collect();
        let labels: Vec<f64> = rows.iter().map(|(_, y)| f64::from(*y)).collect();
        let ds = Dataset::new(points, d, labels, Task::Classification).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        write_csv(&ds, &path).unwrap();
        let back = load_csv(&written_spec(&path, d)).unwrap();
        prop_assert_eq!(back.points(), ds.points());
        prop_assert_eq!(back.responses(), ds.responses());
    }
}

#[test]
fn abalone_threshold_rule() {
    let text = "sex,length,rings\nM,0.5,15\nF,0.4,10\nI,0.3,11\n";
    let mut s = named(&["length"], "rings");
    s.binarization = Binarization::ThresholdGreaterThan { value: 10.0 };
    let ds = parse_csv(Cursor::new(text), &s).unwrap();
    assert_eq!(ds.responses(), &[1.0, 0.0, 1.0]);
    assert_eq!(ds.points(), &[0.5, 0.4, 0.3]);
}

#[test]
fn class_set_rule_with_numbers_and_text() {
    let text = "0.1,3,a\n0.2,7,b\n0.3,5,c\n";
    let mut s = spec(vec![Column::Index(0)], Column::Index(1));
    s.has_header = false;
    s.binarization = Binarization::ClassSetMapsTo1 {
        classes: (5..=9).map(|c| LabelValue::Number(f64::from(c))).collect(),
    };
    assert_eq!(parse_csv(Cursor::new(text), &s).unwrap().responses(), &[0.0, 1.0, 1.0]);
    s.label_column = Column::Index(2);
    s.binarization = Binarization::ClassSetMapsTo1 {
        classes: vec![LabelValue::Text("b".into())],
    };
    assert_eq!(parse_csv(Cursor::new(text), &s).unwrap().responses(), &[0.0, 1.0, 0.0]);
}

#[test]
fn errors_name_row_and_column() {
    let s = named(&["a", "b"], "y");
    match parse_csv(Cursor::new("a,b,y\n1,2,0\n3,x,1\n"), &s) {
        Err(Error::NonNumericFeature { row, column, value }) => assert_eq!((row, column, value.as_str()), (3, 2, "x")),
        other => panic!("{other:?}"),
    }
    match parse_csv(Cursor::new("a,b,y\n1,2,0\n3,4,7\n"), &s) {
        Err(Error::UnknownLabel { row, value }) => assert_eq!((row, value.as_str()), (3, "7")),
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse_csv(Cursor::new("a,b,y\n1,2\n"), &s), Err(Error::Parse { row: 2, .. })));
    assert!(matches!(parse_csv(Cursor::new("a,b,y\n"), &s), Err(Error::Parse { .. })));
    assert!(matches!(parse_csv(Cursor::new("a,y\n1,0\n"), &s), Err(Error::Config(_))));
}

#[test]
fn split_is_a_seeded_partition() {
    let n = 101;
    let ds = Dataset::new((0..n).map(f64::from).collect(), 1, vec![0.0; n as usize], Task::Classification).unwrap();
    let (train, test) = split(&ds, 0.25, 9).unwrap();
    assert_eq!((train.n(), test.n()), (25, 76));
    let mut all: Vec<f64> = train.points().iter().chain(test.points()).copied().collect();
    all.sort_by(f64::total_cmp);
    assert_eq!(all, (0..n).map(f64::from).collect::<Vec<_>>());
    assert_eq!(split(&ds, 0.25, 9).unwrap().0.points(), train.points());
    assert_ne!(split(&ds, 0.25, 10).unwrap().0.points(), train.points());
    assert!(matches!(split(&ds, 0.001, 1), Err(Error::DegenerateSplit { .. })));
}

#[test]
fn standardization_uses_training_statistics() {
    let train = Dataset::new(vec![1.0, 10.0, 3.0, 10.0, 5.0, 10.0], 2, vec![0.0, 1.0, 0.0], Task::Classification).unwrap();
    let test = Dataset::new(vec![3.0, 11.0], 2, vec![1.0], Task::Classification).unwrap();
    let (a, b, st) = standardize(&train, &test).unwrap();
    assert_eq!(st.mean, vec![3.0, 10.0]);
    assert_eq!(st.sd[1], 1.0);
    // Population sd, so the standardized training column has variance exactly one.
    assert!((st.sd[0] - (8.0f64 / 3.0).sqrt()).abs() < 1e-15);
    let col: Vec<f64> = (0..3).map(|i| a.point(i)[0]).collect();
    assert!(col.iter().sum::<f64>().abs() < 1e-12);
    assert!((col.iter().map(|v| v * v).sum::<f64>() / 3.0 - 1.0).abs() < 1e-12);
    assert_eq!(b.point(0), &[0.0, 1.0]);
}

#[test]
fn single_class_data_gives_zero_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.csv");
    let mut text = String::from("x,y\n");
    for i in 0..40 {
        text.push_str(&format!("{},0\n", i as f64 * 0.37));
    }
    std::fs::write(&path, text).unwrap();
    let ingest = IngestSpec::new(&path, vec![Column::Name("x".into())], Column::Name("y".into()));
    let data = load_csv(&ingest).unwrap();
    let mut real = RealSpec::new(ingest);
    real.k_grid = vec![1, 3, 5];
    real.repeats = 5;
    let res = run_real_experiment(&data, &real).unwrap();
    assert!(res.rows.iter().all(|r| r.test_error_mean == 0.0 && r.test_error_sd == 0.0));
}

#[test]
fn bundled_sample_runs_end_to_end() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/abalone_mini.csv");
    let features = ["length", "diameter", "height", "whole_weight", "shucked_weight", "viscera_weight", "shell_weight"];
    let mut ingest = IngestSpec::new(
        path,
        features.iter().map(|c| Column::Name(c.to_string())).collect(),
        Column::Name("rings".into()),
    );
    ingest.binarization = Binarization::ThresholdGreaterThan { value: 10.0 };
    ingest.split_seed = 4;
    let data = load_csv(&ingest).unwrap();
    assert_eq!((data.n(), data.d()), (300, 7));
    let mut real = RealSpec::new(ingest);
    real.repeats = 8;
    let a = run_real_experiment(&data, &real).unwrap();
    let b = run_real_experiment(&data, &real).unwrap();
    assert_eq!(a, b);
    let s = a.summary.unwrap();
    assert!(s.best_gamma_over_d > 0.0);
    assert!(s.baseline_error > 0.0 && s.baseline_error < 0.5);
}
