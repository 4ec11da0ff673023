use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::task::{Response, Task};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Auroc,
    Misclassification,
    Rmse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Maximize,
    Minimize,
}

impl Measure {
    pub fn id(self) -> &'static str {
        match self {
            Measure::Auroc => "auroc",
            Measure::Misclassification => "misclassification",
            Measure::Rmse => "rmse",
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            Measure::Auroc => Direction::Maximize,
            _ => Direction::Minimize,
        }
    }

    /// True if `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self.direction() {
            Direction::Maximize => a > b,
            Direction::Minimize => a < b,
        }
    }

    /// Scores predictions for the given rows. `Ok(None)` marks an undefined value
    /// (AUROC on a single-class test set).
    pub fn score(self, task: &Task, rows: &[usize], predictions: &[f64]) -> Result<Option<f64>> {
        if rows.len() != predictions.len() {
            return Err(Error::Measure("prediction count differs from row count".into()));
        }
        match self {
            Measure::Auroc => {
                let labels = task.binary_labels()?;
                let y: Vec<bool> = rows.iter().map(|&i| labels[i]).collect();
                if y.iter().all(|&b| b) || y.iter().all(|&b| !b) {
                    return Ok(None);
                }
                auroc(predictions, &y).map(Some)
            }
            Measure::Misclassification => {
                let labels = task.binary_labels()?;
                if rows.is_empty() {
                    return Ok(None);
                }
                let wrong = rows
                    .iter()
                    .zip(predictions)
                    .filter(|(&i, &p)| (p >= 0.5) != labels[i])
                    .count();
                Ok(Some(wrong as f64 / rows.len() as f64))
            }
            Measure::Rmse => {
                let Response::Numeric(y) = task.response() else {
                    return Err(Error::Measure("rmse needs a numeric response".into()));
                };
                if rows.is_empty() {
                    return Ok(None);
                }
                let mse = rows.iter().zip(predictions).map(|(&i, p)| (y[i] - p).powi(2)).sum::<f64>() / rows.len() as f64;
                Ok(Some(mse.sqrt()))
            }
        }
    }
}

impl std::str::FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auroc" | "auc" | "classif.auc" => Ok(Measure::Auroc),
            "misclassification" | "ce" | "classif.ce" => Ok(Measure::Misclassification),
            "rmse" | "regr.rmse" => Ok(Measure::Rmse),
            o => Err(Error::InvalidParameter(format!("unknown measure `{o}`"))),
        }
    }
}

/// Area under the ROC curve via the Mann-Whitney statistic with mid-ranks for ties:
/// the fraction of (positive, negative) pairs ordered correctly, ties counting one half.
pub fn auroc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Measure("scores and labels differ in length".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Measure("NaN score".into()));
    }
    let n_pos = labels.iter().filter(|&&b| b).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Measure("AUROC needs both classes".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Twice the rank sum of positives, to keep mid-ranks integral.
    let mut twice_rank_sum: u128 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && scores[order[end + 1]] == scores[order[start]] {
            end += 1;
        }
        let twice_mid = (start + 1 + end + 1) as u128;
        let pos_in_tie = order[start..=end].iter().filter(|&&i| labels[i]).count() as u128;
        twice_rank_sum += twice_mid * pos_in_tie;
        start = end + 1;
    }
    let (np, nn) = (n_pos as u128, n_neg as u128);
    let twice_u = twice_rank_sum - np * (np + 1);
    Ok(twice_u as f64 / (2 * np * nn) as f64)
}
