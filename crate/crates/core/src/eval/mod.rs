//! Learners, performance measures and (nested) resampling.

mod learner;
mod measure;
mod resample;

pub use learner::{predict, train, Learner, Model};
pub use measure::{auroc, Direction, Measure};
pub use resample::{check_plan, nested_resample, resample, EvaluationResult, FoldScore, NestedResult, TuningChoice};
