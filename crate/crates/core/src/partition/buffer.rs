//! Distance-buffered methods: buffered leave-one-out and leave-one-disc-out.
//!
//! Boundary rule: a row at distance `<= threshold` from the test location is inside the
//! buffer and never used for training. Presence/background data without added background
//! keeps rows at distance `>= the_range` for training.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{partition, MethodSpec, Split};
use crate::error::{Error, Result};
use crate::geom::dist;
use crate::plan::{Fold, ResamplingPlan};
use crate::rng::rng_from;
use crate::task::Task;

/// Presence/absence or presence/background data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpDataType {
    PA,
    PB,
}

impl SpDataType {
    pub fn as_str(self) -> &'static str {
        match self {
            SpDataType::PA => "PA",
            SpDataType::PB => "PB",
        }
    }
}

pub(super) fn buffer_split(task: &Task, the_range: f64, data_type: SpDataType, add_bg: bool) -> Result<Split> {
    if !(the_range > 0.0) || !the_range.is_finite() {
        return Err(Error::InvalidParameter(format!("the_range must be positive, got {the_range}")));
    }
    let coords = task.coords();
    let n = task.n();
    let mut folds = Vec::new();
    match data_type {
        SpDataType::PA => {
            for i in 0..n {
                let role: Vec<u8> = (0..n)
                    .map(|j| match j {
                        _ if j == i => 1,
                        _ if dist(coords[i], coords[j]) > the_range => 0,
                        _ => 2,
                    })
                    .collect();
                folds.push(Fold::from_roles(&role));
            }
        }
        SpDataType::PB => {
            let presence = task
                .binary_labels()
                .map_err(|_| Error::InvalidTask("PB buffering needs a categorical response with a positive label".into()))?;
            for i in (0..n).filter(|&i| presence[i]) {
                let role: Vec<u8> = (0..n)
                    .map(|j| {
                        let d = dist(coords[i], coords[j]);
                        if j == i {
                            1
                        } else if add_bg {
                            match (d <= the_range, presence[j]) {
                                (false, _) => 0,
                                (true, false) => 1,
                                (true, true) => 2,
                            }
                        } else if d >= the_range {
                            0
                        } else {
                            2
                        }
                    })
                    .collect();
                folds.push(Fold::from_roles(&role));
            }
            if folds.is_empty() {
                return Err(Error::Partition("no presence observations".into()));
            }
        }
    }
    Ok(Split {
        folds,
        blocks: None,
        overlapping: data_type == SpDataType::PB && add_bg,
    })
}

pub(super) fn disc_split(task: &Task, folds: usize, radius: f64, buffer: f64, replace: bool, seed: u64) -> Result<Split> {
    let n = task.n();
    if !(radius >= 0.0) || !(buffer >= 0.0) || !radius.is_finite() || !buffer.is_finite() {
        return Err(Error::InvalidParameter("radius and buffer must be finite and non-negative".into()));
    }
    if folds == 0 {
        return Err(Error::InvalidParameter("folds must be at least 1".into()));
    }
    if !replace && folds > n {
        return Err(Error::Partition(format!("{folds} discs exceed {n} observations without replacement")));
    }
    let mut rng = rng_from(seed);
    let centers: Vec<usize> = if replace {
        (0..folds).map(|_| rng.random_range(0..n)).collect()
    } else {
        rand::seq::index::sample(&mut rng, n, folds).into_vec()
    };
    let coords = task.coords();
    let out = centers
        .into_iter()
        .map(|c| {
            let role: Vec<u8> = (0..n)
                .map(|j| {
                    let d = dist(coords[c], coords[j]);
                    if d <= radius {
                        1
                    } else if d <= radius + buffer {
                        2
                    } else {
                        0
                    }
                })
                .collect();
            Fold::from_roles(&role)
        })
        .collect();
    Ok(Split {
        folds: out,
        blocks: None,
        overlapping: true,
    })
}

/// Buffered leave-one-out: one fold per observation (PA) or per presence (PB).
pub fn spcv_buffer(task: &Task, the_range: f64, sp_data_type: SpDataType, add_bg: bool) -> Result<ResamplingPlan> {
    partition(
        task,
        &MethodSpec::Buffer {
            the_range,
            sp_data_type,
            add_bg,
        },
        0,
    )
}

/// Leave-one-disc-out with an optional buffer ring; `folds = None` uses one disc per observation.
pub fn spcv_disc(
    task: &Task,
    folds: Option<usize>,
    radius: f64,
    buffer: f64,
    replace: bool,
    seed: u64,
) -> Result<ResamplingPlan> {
    partition(
        task,
        &MethodSpec::Disc {
            folds,
            radius,
            buffer,
            replace,
        },
        seed,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::validate_plan;
    use crate::task::{Response, TaskBuilder};

    fn line(xs: &[f64], labels: Option<&[&str]>) -> Task {
        let resp = match labels {
            Some(l) => Response::Categorical(l.iter().map(|s| s.to_string()).collect()),
            None => Response::Numeric(vec![0.0; xs.len()]),
        };
        let mut b = TaskBuilder::new("t", "y", resp, xs.iter().map(|&x| [x, 0.0]).collect());
        if labels.is_some() {
            b = b.positive_label("1");
        }
        b.build().unwrap()
    }

    #[test]
    fn pa_boundary_enumeration() {
        let t = line(&[0.0, 500.0, 1000.0, 1500.0, 2000.0, 5000.0], None);
        let p = spcv_buffer(&t, 1000.0, SpDataType::PA, true).unwrap();
        assert_eq!(p.folds.len(), 6);
        let f = &p.folds[0];
        assert_eq!(f.test, vec![0]);
        assert_eq!(f.train, vec![3, 4, 5]);
        assert_eq!(f.omitted, vec![1, 2]);
        assert!(validate_plan(&p, &t).pass);
    }

    #[test]
    fn pb_without_background_tests_single_presences() {
        let t = line(&[0.0, 500.0, 1000.0, 1500.0, 3000.0], Some(&["1", "0", "0", "1", "0"]));
        let p = spcv_buffer(&t, 1000.0, SpDataType::PB, false).unwrap();
        assert_eq!(p.folds.len(), 2);
        assert!(p.folds.iter().all(|f| f.test.len() == 1));
        // Rows at exactly the_range stay in training.
        assert_eq!(p.folds[0].train, vec![2, 3, 4]);
        assert!(!p.overlapping);
    }

    #[test]
    fn pb_with_background_adds_nearby_absences() {
        let t = line(&[0.0, 500.0, 900.0, 1500.0, 3000.0], Some(&["1", "0", "1", "0", "0"]));
        let p = spcv_buffer(&t, 1000.0, SpDataType::PB, true).unwrap();
        let f = &p.folds[0];
        assert_eq!(f.test, vec![0, 1]);
        assert_eq!(f.omitted, vec![2]);
        assert_eq!(f.train, vec![3, 4]);
        assert!(p.overlapping);
    }

    #[test]
    fn buffer_errors() {
        let t = line(&[0.0, 1.0, 2.0], None);
        assert!(spcv_buffer(&t, 0.0, SpDataType::PA, true).is_err());
        assert!(spcv_buffer(&t, 1.0, SpDataType::PB, true).is_err());
    }

    #[test]
    fn zero_radius_disc_is_loo() {
        let t = line(&[0.0, 1.0, 2.0, 3.0], None);
        let p = spcv_disc(&t, None, 0.0, 0.0, false, 4).unwrap();
        assert_eq!(p.folds.len(), 4);
        assert!(p.folds.iter().all(|f| f.test.len() == 1 && f.omitted.is_empty()));
        let mut tested: Vec<usize> = p.folds.iter().map(|f| f.test[0]).collect();
        tested.sort();
        assert_eq!(tested, vec![0, 1, 2, 3]);
    }

    #[test]
    fn coincident_points_share_zero_radius_disc() {
        let t = line(&[5.0, 5.0, 9.0], None);
        let p = spcv_disc(&t, Some(2), 0.0, 0.0, false, 1).unwrap();
        for f in &p.folds {
            if f.test.contains(&0) || f.test.contains(&1) {
                assert_eq!(f.test, vec![0, 1]);
            }
        }
    }

    #[test]
    fn disc_errors() {
        let t = line(&[0.0, 1.0, 2.0], None);
        assert!(spcv_disc(&t, Some(4), 0.0, 0.0, false, 0).is_err());
        assert!(spcv_disc(&t, Some(4), 0.0, 0.0, true, 0).is_ok());
    }
}
