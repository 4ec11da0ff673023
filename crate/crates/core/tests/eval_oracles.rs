mod common;

use common::random_task;
use spatiocv_core::eval::{nested_resample, resample, Learner, Measure};
use spatiocv_core::partition::{random_cv, spcv_coords, sptcv_cstf};
use spatiocv_core::synth::{make_classification_task, sample_grf};
use spatiocv_core::{Error, MethodSpec, Response, TaskBuilder};

#[test]
fn featureless_error_is_the_rate_of_the_training_minority_in_test() {
    for seed in 0..10 {
        let task = random_task(90, seed);
        let labels = task.binary_labels().unwrap();
        let plan = random_cv(&task, 5, seed).unwrap();
        let r = resample(&task, &Learner::Featureless, &plan, Measure::Misclassification).unwrap();
        for (f, score) in plan.folds.iter().zip(&r.per_fold) {
            let pos = f.train.iter().filter(|&&i| labels[i]).count();
            let predict_pos = 2 * pos >= f.train.len();
            let wrong = f.test.iter().filter(|&&i| labels[i] != predict_pos).count();
            assert_eq!(score.value.unwrap(), wrong as f64 / f.test.len() as f64);
        }
        let mean = r.per_fold.iter().map(|f| f.value.unwrap()).sum::<f64>() / r.per_fold.len() as f64;
        assert!((r.aggregate - mean).abs() < 1e-12);
    }
}

#[test]
fn knn_resubstitution_is_perfect() {
    let task = random_task(60, 3);
    let all: Vec<usize> = (0..60).collect();
    let model = spatiocv_core::eval::train(&Learner::knn(1), &task, &all).unwrap();
    let scores = spatiocv_core::eval::predict(&model, &task, &all).unwrap();
    let labels = task.binary_labels().unwrap();
    for (s, l) in scores.iter().zip(labels) {
        assert_eq!(*s, if l { 1.0 } else { 0.0 });
    }
}

#[test]
fn results_are_deterministic() {
    let task = random_task(120, 9);
    let plan = spcv_coords(&task, 4, 9).unwrap();
    let a = resample(&task, &Learner::knn(3), &plan, Measure::Auroc).unwrap();
    let b = resample(&task, &Learner::knn(3), &plan, Measure::Auroc).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}

#[test]
fn single_point_grid_equals_plain_resampling() {
    let task = random_task(100, 4);
    let outer = random_cv(&task, 4, 4).unwrap();
    let nested = nested_resample(&task, &[Learner::knn(5)], &MethodSpec::RandomCv { folds: 3 }, &outer, Measure::Auroc).unwrap();
    let plain = resample(&task, &Learner::knn(5), &outer, Measure::Auroc).unwrap();
    assert_eq!(nested.outer, plain);
}

#[test]
fn smooth_field_prefers_many_neighbours() {
    let mut fifteen = 0;
    let mut total = 0;
    for seed in 0..10 {
        let field = sample_grf(300, 1.0, 0.1, 0.0, seed).unwrap();
        let task = make_classification_task(&field, 2, seed + 100).unwrap();
        let outer = spcv_coords(&task, 4, seed).unwrap();
        let r = nested_resample(
            &task,
            &[Learner::knn(1), Learner::knn(15)],
            &MethodSpec::Coords { folds: 3 },
            &outer,
            Measure::Auroc,
        )
        .unwrap();
        for c in &r.choices {
            total += 1;
            if c.learner == Learner::knn(15) {
                fifteen += 1;
            }
        }
    }
    assert!(2 * fifteen > total, "k = 15 chosen in {fifteen} of {total} outer folds");
}

#[test]
fn inner_method_needing_more_locations_than_available_fails() {
    let n = 30;
    let task = TaskBuilder::new(
        "t",
        "y",
        Response::Categorical((0..n).map(|i| (i % 2).to_string()).collect()),
        (0..n).map(|i| [i as f64, 0.0]).collect(),
    )
    .positive_label("1")
    .feature("f", (0..n).map(|i| (i * 7 % 11) as f64).collect())
    .location("station", (0..n).map(|i| format!("s{}", i % 3)).collect())
    .build()
    .unwrap();
    let outer = sptcv_cstf(&task, 3, Some("station"), None, 1).unwrap();
    let inner = MethodSpec::Cstf {
        folds: 3,
        space_var: Some("station".into()),
        time_var: None,
    };
    let err = nested_resample(&task, &[Learner::knn(1)], &inner, &outer, Measure::Auroc).unwrap_err();
    assert!(matches!(err, Error::InvalidParameter(_) | Error::Partition(_)), "{err}");
}
