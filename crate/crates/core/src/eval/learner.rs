use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::task::{Response, Task};

/// Learner family and hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "lowercase")]
pub enum Learner {
    /// k-nearest neighbours with Euclidean distance on the task features.
    Knn { k_neighbors: usize },
    /// L2-penalized logistic regression fitted by full-batch gradient descent
    /// on internally standardized features.
    Logistic {
        lambda: f64,
        epochs: usize,
        learning_rate: f64,
    },
    /// Constant prediction: training positive rate (classification) or mean (regression).
    Featureless,
}

impl Learner {
    pub fn knn(k: usize) -> Learner {
        Learner::Knn { k_neighbors: k }
    }

    pub fn logistic() -> Learner {
        Learner::Logistic {
            lambda: 1e-4,
            epochs: 200,
            learning_rate: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Target {
    Binary(Vec<bool>),
    Numeric(Vec<f64>),
}

impl Target {
    fn of(task: &Task, rows: &[usize]) -> Result<Target> {
        match task.response() {
            Response::Categorical(_) => {
                let labels = task.binary_labels()?;
                Ok(Target::Binary(rows.iter().map(|&i| labels[i]).collect()))
            }
            Response::Numeric(v) => Ok(Target::Numeric(rows.iter().map(|&i| v[i]).collect())),
        }
    }

    fn value(&self, i: usize) -> f64 {
        match self {
            Target::Binary(b) => f64::from(u8::from(b[i])),
            Target::Numeric(v) => v[i],
        }
    }

    fn len(&self) -> usize {
        match self {
            Target::Binary(b) => b.len(),
            Target::Numeric(v) => v.len(),
        }
    }
}

/// A fitted model. Holds copies of the training rows it needs and nothing else.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Knn {
        k: usize,
        rows: Vec<Vec<f64>>,
        target: Vec<f64>,
    },
    Logistic {
        weights: Vec<f64>,
        bias: f64,
        means: Vec<f64>,
        sds: Vec<f64>,
    },
    Featureless {
        p: usize,
        value: f64,
    },
}

fn rows_of(task: &Task, idx: &[usize]) -> Vec<Vec<f64>> {
    idx.iter().map(|&i| task.feature_row(i)).collect()
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Fits `learner` on the given training rows of `task`.
pub fn train(learner: &Learner, task: &Task, train_idx: &[usize]) -> Result<Model> {
    if train_idx.is_empty() {
        return Err(Error::Learner("empty training set".into()));
    }
    let target = Target::of(task, train_idx)?;
    match learner {
        Learner::Knn { k_neighbors } => {
            if *k_neighbors == 0 {
                return Err(Error::Learner("k_neighbors must be at least 1".into()));
            }
            if *k_neighbors > train_idx.len() {
                return Err(Error::Learner(format!(
                    "k_neighbors = {k_neighbors} exceeds {} training rows",
                    train_idx.len()
                )));
            }
            Ok(Model::Knn {
                k: *k_neighbors,
                rows: rows_of(task, train_idx),
                target: (0..target.len()).map(|i| target.value(i)).collect(),
            })
        }
        Learner::Logistic {
            lambda,
            epochs,
            learning_rate,
        } => {
            let Target::Binary(y) = &target else {
                return Err(Error::Learner("logistic regression needs a categorical response".into()));
            };
            if y.iter().all(|&b| b) || y.iter().all(|&b| !b) {
                return Err(Error::Learner("single-class training set".into()));
            }
            let x = rows_of(task, train_idx);
            let (n, p) = (x.len(), task.p());
            let means: Vec<f64> = (0..p).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
            let sds: Vec<f64> = (0..p)
                .map(|j| {
                    let v = x.iter().map(|r| (r[j] - means[j]).powi(2)).sum::<f64>() / n as f64;
                    if v > 0.0 {
                        v.sqrt()
                    } else {
                        1.0
                    }
                })
                .collect();
            let z: Vec<Vec<f64>> = x
                .iter()
                .map(|r| (0..p).map(|j| (r[j] - means[j]) / sds[j]).collect())
                .collect();
            let mut w = vec![0.0; p];
            let mut b = 0.0;
            for _ in 0..*epochs {
                let mut gw = vec![0.0; p];
                let mut gb = 0.0;
                for (row, &yi) in z.iter().zip(y) {
                    let pred = sigmoid(b + row.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>());
                    let err = pred - f64::from(u8::from(yi));
                    gb += err;
                    for (g, a) in gw.iter_mut().zip(row) {
                        *g += err * a;
                    }
                }
                for (wj, g) in w.iter_mut().zip(&gw) {
                    *wj -= learning_rate * (g / n as f64 + lambda * *wj);
                }
                b -= learning_rate * gb / n as f64;
            }
            Ok(Model::Logistic {
                weights: w,
                bias: b,
                means,
                sds,
            })
        }
        Learner::Featureless => {
            let m = (0..target.len()).map(|i| target.value(i)).sum::<f64>() / target.len() as f64;
            Ok(Model::Featureless { p: task.p(), value: m })
        }
    }
}

impl Model {
    fn n_features(&self) -> usize {
        match self {
            Model::Knn { rows, .. } => rows.first().map_or(0, Vec::len),
            Model::Logistic { weights, .. } => weights.len(),
            Model::Featureless { p, .. } => *p,
        }
    }
}

/// Positive-class probability (classification) or predicted value (regression) per test row.
pub fn predict(model: &Model, task: &Task, test_idx: &[usize]) -> Result<Vec<f64>> {
    if model.n_features() != task.p() {
        return Err(Error::Learner(format!(
            "model expects {} features, task has {}",
            model.n_features(),
            task.p()
        )));
    }
    let out = match model {
        Model::Knn { k, rows, target } => test_idx
            .iter()
            .map(|&i| {
                let x = task.feature_row(i);
                let mut d: Vec<(f64, usize)> = rows
                    .iter()
                    .enumerate()
                    .map(|(j, r)| (r.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), j))
                    .collect();
                if *k < d.len() {
                    d.select_nth_unstable_by(*k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                    d.truncate(*k);
                }
                d.iter().map(|&(_, j)| target[j]).sum::<f64>() / *k as f64
            })
            .collect(),
        Model::Logistic {
            weights,
            bias,
            means,
            sds,
        } => test_idx
            .iter()
            .map(|&i| {
                let x = task.feature_row(i);
                let z: f64 = (0..weights.len()).map(|j| weights[j] * (x[j] - means[j]) / sds[j]).sum();
                sigmoid(bias + z)
            })
            .collect(),
        Model::Featureless { value, .. } => vec![*value; test_idx.len()],
    };
    Ok(out)
}
