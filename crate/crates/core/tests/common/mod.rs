#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spatiocv_core::partition::{BlockSpec, Selection, SpDataType, TileSpec};
use spatiocv_core::{MethodSpec, ResamplingPlan, Response, Task, TaskBuilder};

/// Random task with group, location and time roles plus a free `zone` factor.
/// Every (location, time) pair occurs at least once.
pub fn random_task(n: usize, seed: u64) -> Task {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_loc = rng.random_range(2..=4);
    let n_time = rng.random_range(2..=4);
    let n_group = rng.random_range(2..=8);
    let n_zone = rng.random_range(2..=5);
    let coords: Vec<[f64; 2]> = (0..n)
        .map(|_| [rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)])
        .collect();
    let mut labels: Vec<String> = (0..n).map(|i| if i % 2 == 0 { "1" } else { "0" }.to_string()).collect();
    labels.shuffle(&mut rng);
    let levels = |k: usize, rng: &mut ChaCha8Rng| -> Vec<usize> {
        let mut v: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.random_range(0..k) }).collect();
        v.shuffle(rng);
        v
    };
    let group = levels(n_group, &mut rng);
    let zone = levels(n_zone, &mut rng);
    let mut loc_time: Vec<(usize, usize)> = (0..n)
        .map(|i| {
            if i < n_loc * n_time {
                (i % n_loc, i / n_loc)
            } else {
                (rng.random_range(0..n_loc), rng.random_range(0..n_time))
            }
        })
        .collect();
    loc_time.shuffle(&mut rng);
    let f1: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let f2: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    TaskBuilder::new("random", "label", Response::Categorical(labels), coords)
        .positive_label("1")
        .feature("f1", f1)
        .feature("f2", f2)
        .group("site", group.iter().map(|g| format!("g{g}")).collect())
        .location("station", loc_time.iter().map(|(l, _)| format!("s{l}")).collect())
        .time("year", loc_time.iter().map(|&(_, t)| 2000 + t as i64).collect())
        .extra("zone", zone.iter().map(|z| format!("z{z}")).collect())
        .build()
        .expect("generated task is valid")
}

/// One parameterization of each of the ten methods, valid for any `random_task`.
pub fn method_specs(task: &Task, seed: u64) -> Vec<MethodSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let groups = task.group().unwrap().levels().len();
    let locs = task.location().unwrap().levels().len();
    let mut times = task.time().unwrap().keys.clone();
    times.sort_unstable();
    times.dedup();
    let k = rng.random_range(2..=5);
    let (space_var, time_var) = match rng.random_range(0..3) {
        0 => (Some("station".to_string()), None),
        1 => (None, Some("year".to_string())),
        _ => (Some("station".to_string()), Some("year".to_string())),
    };
    let cstf_k = match (&space_var, &time_var) {
        (Some(_), None) => k.min(locs),
        (None, Some(_)) => k.min(times.len()),
        _ => k.min(locs).min(times.len()),
    };
    vec![
        MethodSpec::RandomCv { folds: k },
        MethodSpec::GroupedCv { folds: k.min(groups) },
        MethodSpec::Buffer {
            the_range: rng.random_range(5.0..30.0),
            sp_data_type: if rng.random_bool(0.7) { SpDataType::PA } else { SpDataType::PB },
            add_bg: rng.random_bool(0.5),
        },
        MethodSpec::Disc {
            folds: Some(rng.random_range(1..=8)),
            radius: rng.random_range(0.0..15.0),
            buffer: rng.random_range(0.0..15.0),
            replace: rng.random_bool(0.3),
        },
        MethodSpec::Coords { folds: k },
        MethodSpec::Tiles(TileSpec {
            rotation: rng.random_range(-45.0..45.0),
            ..TileSpec::nsplit(rng.random_range(2..=4), rng.random_range(2..=4))
        }),
        MethodSpec::Custom { column: "zone".into() },
        MethodSpec::Block(BlockSpec {
            range: None,
            rows_cols: Some((rng.random_range(3..=5), rng.random_range(3..=5))),
            folds: rng.random_range(2..=4),
            selection: [Selection::Random, Selection::Systematic, Selection::Checkerboard][rng.random_range(0..3)],
        }),
        MethodSpec::Env {
            features: vec!["f1".into(), "f2".into()],
            folds: k,
        },
        MethodSpec::Cstf {
            folds: cstf_k,
            space_var,
            time_var,
        },
    ]
}

/// Role-level invariant violations of every fold of `plan` over `n` observations.
pub fn fold_violations(plan: &ResamplingPlan, n: usize) -> Vec<String> {
    let mut out = Vec::new();
    for f in &plan.folds {
        let mut seen = vec![0u8; n];
        for set in [&f.test, &f.train, &f.omitted] {
            for &i in set.iter() {
                if i >= n {
                    out.push(format!("fold {}: index {i} out of range", f.id));
                    continue;
                }
                seen[i] += 1;
            }
        }
        if f.test.is_empty() {
            out.push(format!("fold {}: empty test set", f.id));
        }
        if let Some(i) = seen.iter().position(|&c| c != 1) {
            out.push(format!("fold {}: observation {} appears {} times", f.id, i + 1, seen[i]));
        }
    }
    out
}
