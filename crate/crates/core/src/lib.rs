//! Spatial and spatiotemporal cross-validation.
//!
//! Tasks carry observations with planar coordinates and optional group, time and
//! location roles. Partitioners turn a task into a [`ResamplingPlan`] of folds, each
//! splitting the observations into test, train and omitted rows. The evaluation
//! harness fits learners on those folds and aggregates a performance measure.

pub mod clustering;
pub mod error;
pub mod eval;
pub mod geom;
pub mod io;
pub mod partition;
pub mod plan;
pub mod rng;
pub mod synth;
pub mod task;
pub mod variogram;

pub use error::{Error, Result};
pub use eval::{auroc, nested_resample, resample, EvaluationResult, Learner, Measure};
pub use partition::{partition, repeat_plan, MethodSpec, METHOD_IDS};
pub use plan::{validate_plan, BlockSet, Fold, Params, ResamplingPlan, ValidationReport};
pub use task::{build_task, RecordTable, Response, Role, Task, TaskBuilder, TaskSchema};
