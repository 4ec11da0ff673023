use super::{partition, MethodSpec, Split};
use crate::clustering::{kmeans, standardize, KMeansConfig};
use crate::error::{Error, Result};
use crate::plan::{BlockSet, Fold, Provenance, ResamplingPlan};
use crate::task::Task;

fn clusters_to_split(n: usize, assignment: Vec<usize>, k: usize) -> Split {
    let mut tests = vec![Vec::new(); k];
    for (i, &a) in assignment.iter().enumerate() {
        tests[a - 1].push(i);
    }
    Split {
        folds: tests.into_iter().map(|t| Fold::from_test(n, t, Vec::new())).collect(),
        blocks: Some(BlockSet {
            block_of: assignment,
            n_z: k,
            provenance: Provenance::Clustered,
            geometry: None,
        }),
        overlapping: false,
    }
}

fn check_folds(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("folds must be at least 2, got {k}")));
    }
    Ok(())
}

pub(super) fn coords_split(task: &Task, k: usize, seed: u64) -> Result<Split> {
    check_folds(k)?;
    let points: Vec<Vec<f64>> = task.coords().iter().map(|c| c.to_vec()).collect();
    let res = kmeans(&points, k, seed, &KMeansConfig::default()).map_err(|e| match e {
        Error::TooManyClusters { k, distinct } => {
            Error::Partition(format!("{k} folds exceed {distinct} distinct coordinate locations"))
        }
        e => e,
    })?;
    Ok(clusters_to_split(task.n(), res.assignment, k))
}

pub(super) fn env_split(task: &Task, features: &[String], k: usize, seed: u64) -> Result<Split> {
    check_folds(k)?;
    if features.is_empty() {
        return Err(Error::InvalidParameter("spcv_env needs at least one feature".into()));
    }
    let cols: Vec<&[f64]> = features
        .iter()
        .map(|f| {
            task.feature(f).ok_or_else(|| Error::MissingColumn {
                role: "feature",
                column: f.clone(),
            })
        })
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<f64>> = (0..task.n()).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    let std = standardize(&rows).map_err(|e| match e {
        Error::ConstantColumn(j) => {
            let j: usize = j.parse().unwrap_or(0);
            Error::ConstantColumn(features[j].clone())
        }
        e => e,
    })?;
    let res = kmeans(&std.data, k, seed, &KMeansConfig::default()).map_err(|e| match e {
        Error::TooManyClusters { k, distinct } => {
            Error::Partition(format!("{k} folds exceed {distinct} distinct feature vectors"))
        }
        e => e,
    })?;
    Ok(clusters_to_split(task.n(), res.assignment, k))
}

/// Spatial CV with k-means clusters of the coordinates as folds.
pub fn spcv_coords(task: &Task, k: usize, seed: u64) -> Result<ResamplingPlan> {
    partition(task, &MethodSpec::Coords { folds: k }, seed)
}

/// Environmental blocking: k-means clusters of standardized features as folds.
pub fn spcv_env(task: &Task, features: &[String], k: usize, seed: u64) -> Result<ResamplingPlan> {
    partition(
        task,
        &MethodSpec::Env {
            features: features.to_vec(),
            folds: k,
        },
        seed,
    )
}
