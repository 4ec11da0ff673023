use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::learner::{predict, train, Learner};
use super::measure::Measure;
use crate::error::{Error, Result};
use crate::partition::{partition, MethodSpec};
use crate::plan::{validate_plan, Fold, Params, ResamplingPlan};
use crate::rng::derive_seed;
use crate::task::Task;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldScore {
    pub repeat: usize,
    pub fold: usize,
    /// `None` when the measure is undefined on this fold.
    pub value: Option<f64>,
    pub n_test: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResult {
    pub measure: String,
    /// Mean over folds with a defined value; NaN if there are none.
    pub aggregate: f64,
    /// Number of folds excluded from the aggregate.
    pub warnings: usize,
    pub per_fold: Vec<FoldScore>,
    pub method: String,
    pub params: Params,
    pub seed: u64,
}

impl EvaluationResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<EvaluationResult> {
        Ok(serde_json::from_str(s)?)
    }

    /// Per-fold values of one repeat, undefined folds skipped.
    pub fn values_of_repeat(&self, repeat: usize) -> Vec<f64> {
        self.per_fold
            .iter()
            .filter(|f| f.repeat == repeat)
            .filter_map(|f| f.value)
            .collect()
    }
}

fn check_leakage(fold: &Fold, n: usize) -> Result<()> {
    let mut in_test = vec![false; n];
    for &i in &fold.test {
        if i < n {
            in_test[i] = true;
        }
    }
    match fold.train.iter().find(|&&i| i < n && in_test[i]) {
        Some(&i) => Err(Error::Leakage {
            fold: fold.id,
            index: i + 1,
        }),
        None => Ok(()),
    }
}

/// Errors unless `plan` fits `task` and every fold is well formed.
pub fn check_plan(plan: &ResamplingPlan, task: &Task) -> Result<()> {
    if plan.n != task.n() {
        return Err(Error::PlanTaskMismatch(format!(
            "plan covers {} observations, task has {}",
            plan.n,
            task.n()
        )));
    }
    for fold in &plan.folds {
        check_leakage(fold, plan.n)?;
    }
    let report = validate_plan(plan, task);
    if let Some(v) = report.violations.first() {
        return Err(Error::InvalidPlan(format!(
            "repeat {}, fold {}: {}",
            v.repeat, v.fold, v.message
        )));
    }
    Ok(())
}

fn score_fold(task: &Task, learner: &Learner, fold: &Fold, measure: Measure) -> Result<FoldScore> {
    let model = train(learner, task, &fold.train)?;
    let pred = predict(&model, task, &fold.test)?;
    Ok(FoldScore {
        repeat: fold.repeat,
        fold: fold.id,
        value: measure.score(task, &fold.test, &pred)?,
        n_test: fold.test.len(),
    })
}

fn summarize(measure: Measure, per_fold: Vec<FoldScore>, plan: &ResamplingPlan) -> EvaluationResult {
    let defined: Vec<f64> = per_fold.iter().filter_map(|f| f.value).collect();
    let aggregate = if defined.is_empty() {
        f64::NAN
    } else {
        defined.iter().sum::<f64>() / defined.len() as f64
    };
    EvaluationResult {
        measure: measure.id().to_string(),
        aggregate,
        warnings: per_fold.len() - defined.len(),
        per_fold,
        method: plan.method.clone(),
        params: plan.params.clone(),
        seed: plan.seed,
    }
}

/// Trains on each fold's training rows and scores on its test rows.
pub fn resample(task: &Task, learner: &Learner, plan: &ResamplingPlan, measure: Measure) -> Result<EvaluationResult> {
    check_plan(plan, task)?;
    let per_fold = plan
        .folds
        .par_iter()
        .map(|f| score_fold(task, learner, f, measure))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(measure, per_fold, plan))
}

/// Learner picked on one outer fold together with its inner-loop scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningChoice {
    pub repeat: usize,
    pub fold: usize,
    pub learner: Learner,
    pub inner_scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedResult {
    pub outer: EvaluationResult,
    pub choices: Vec<TuningChoice>,
}

/// Nested resampling: for each outer fold, partitions the outer training rows with
/// `inner`, picks the best learner of `grid` (first wins ties), refits it on the whole
/// outer training set and scores it on the outer test rows.
pub fn nested_resample(
    task: &Task,
    grid: &[Learner],
    inner: &MethodSpec,
    outer: &ResamplingPlan,
    measure: Measure,
) -> Result<NestedResult> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty learner grid".into()));
    }
    check_plan(outer, task)?;
    let results = outer
        .folds
        .par_iter()
        .map(|fold| {
            let sub = task.subset(&fold.train);
            let seed = derive_seed(derive_seed(outer.seed, fold.repeat as u64), fold.id as u64);
            let inner_plan = partition(&sub, inner, seed)?;
            let mut inner_scores = Vec::with_capacity(grid.len());
            for learner in grid {
                inner_scores.push(resample(&sub, learner, &inner_plan, measure)?.aggregate);
            }
            let mut best = None::<usize>;
            for (i, &s) in inner_scores.iter().enumerate() {
                if s.is_nan() {
                    continue;
                }
                if best.is_none_or(|b| measure.better(s, inner_scores[b])) {
                    best = Some(i);
                }
            }
            let best = best.ok_or_else(|| {
                Error::Measure(format!(
                    "no learner has a defined inner score on outer fold {} of repeat {}",
                    fold.id, fold.repeat
                ))
            })?;
            let learner = grid[best].clone();
            let score = score_fold(task, &learner, fold, measure)?;
            Ok((
                score,
                TuningChoice {
                    repeat: fold.repeat,
                    fold: fold.id,
                    learner,
                    inner_scores,
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let (per_fold, choices): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    Ok(NestedResult {
        outer: summarize(measure, per_fold, outer),
        choices,
    })
}
