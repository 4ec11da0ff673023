//! Resampling plans: folds of disjoint test / train / omitted index sets.
//!
//! Indices are 0-based in memory and 1-based in every serialized artifact.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::task::Task;

/// One train/test split. `omitted` holds rows used by neither side (buffer zones, exclusions).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    /// Repeat this fold belongs to, starting at 1.
    pub repeat: usize,
    /// Fold number within its repeat, starting at 1.
    pub id: usize,
    pub test: Vec<usize>,
    pub train: Vec<usize>,
    pub omitted: Vec<usize>,
}

impl Fold {
    /// Builds a fold from test and omitted rows; train is everything else.
    pub(crate) fn from_test(n: usize, test: Vec<usize>, omitted: Vec<usize>) -> Fold {
        let mut role = vec![0u8; n];
        for &i in &test {
            role[i] = 1;
        }
        for &i in &omitted {
            role[i] = 2;
        }
        Fold::from_roles(&role)
    }

    /// Builds a fold from a per-row role code: 0 = train, 1 = test, 2 = omitted.
    pub(crate) fn from_roles(role: &[u8]) -> Fold {
        let mut f = Fold {
            repeat: 1,
            id: 1,
            test: Vec::new(),
            train: Vec::new(),
            omitted: Vec::new(),
        };
        for (i, r) in role.iter().enumerate() {
            match r {
                0 => f.train.push(i),
                1 => f.test.push(i),
                _ => f.omitted.push(i),
            }
        }
        f
    }
}

/// How the blocks of a [`BlockSet`] were formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Geometric,
    Clustered,
    Custom,
    Temporal,
    Locational,
}

/// One rectangular cell of a block, as four corners in coordinate space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockOutline {
    pub block: usize,
    pub corners: [[f64; 2]; 4],
}

/// Observations grouped into blocks `1..=n_z` ahead of fold assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSet {
    pub block_of: Vec<usize>,
    pub n_z: usize,
    pub provenance: Provenance,
    /// Cell outlines for geometric blocks; a merged block may own several cells.
    pub geometry: Option<Vec<BlockOutline>>,
}

impl BlockSet {
    /// Relabels arbitrary keys to contiguous block labels in order of the given keys.
    pub(crate) fn from_keys<K: Ord + Clone>(keys: &[K], provenance: Provenance) -> BlockSet {
        let mut order: BTreeMap<K, usize> = keys.iter().map(|k| (k.clone(), 0)).collect();
        for (label, v) in order.values_mut().enumerate() {
            *v = label + 1;
        }
        BlockSet {
            block_of: keys.iter().map(|k| order[k]).collect(),
            n_z: order.len(),
            provenance,
            geometry: None,
        }
    }

    /// Members of each block, sorted ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_z];
        for (i, &b) in self.block_of.iter().enumerate() {
            out[b - 1].push(i);
        }
        out
    }
}

/// Flat parameter record that instantiated a plan.
pub type Params = BTreeMap<String, serde_json::Value>;

/// An instantiated resampling: folds grouped by repeat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "PlanWire", try_from = "PlanWire")]
pub struct ResamplingPlan {
    pub method: String,
    pub params: Params,
    pub seed: u64,
    pub repeats: usize,
    pub k_per_repeat: usize,
    pub n: usize,
    /// Test sets of one repeat may intersect (disc, presence/background buffering).
    pub overlapping: bool,
    pub folds: Vec<Fold>,
    /// Block structure of the first repeat, when the method forms blocks. Not serialized.
    pub blocks: Option<BlockSet>,
}

impl ResamplingPlan {
    pub fn folds_of_repeat(&self, repeat: usize) -> impl Iterator<Item = &Fold> {
        self.folds.iter().filter(move |f| f.repeat == repeat)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<ResamplingPlan> {
        Ok(serde_json::from_str(s)?)
    }

    /// True when some fold omits rows.
    pub fn has_omissions(&self) -> bool {
        self.folds.iter().any(|f| !f.omitted.is_empty())
    }
}

#[derive(Serialize, Deserialize)]
struct FoldWire {
    repeat: usize,
    id: usize,
    test: Vec<usize>,
    train: Vec<usize>,
    omitted: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct PlanWire {
    method: String,
    params: Params,
    seed: u64,
    repeats: usize,
    k_per_repeat: usize,
    n: usize,
    #[serde(default)]
    overlapping: bool,
    folds: Vec<FoldWire>,
}

impl From<ResamplingPlan> for PlanWire {
    fn from(p: ResamplingPlan) -> Self {
        let one = |v: Vec<usize>| v.into_iter().map(|i| i + 1).collect();
        PlanWire {
            method: p.method,
            params: p.params,
            seed: p.seed,
            repeats: p.repeats,
            k_per_repeat: p.k_per_repeat,
            n: p.n,
            overlapping: p.overlapping,
            folds: p
                .folds
                .into_iter()
                .map(|f| FoldWire {
                    repeat: f.repeat,
                    id: f.id,
                    test: one(f.test),
                    train: one(f.train),
                    omitted: one(f.omitted),
                })
                .collect(),
        }
    }
}

impl TryFrom<PlanWire> for ResamplingPlan {
    type Error = Error;

    fn try_from(w: PlanWire) -> Result<Self> {
        let zero = |v: Vec<usize>, fold: usize| -> Result<Vec<usize>> {
            v.into_iter()
                .map(|i| {
                    i.checked_sub(1)
                        .ok_or_else(|| Error::InvalidPlan(format!("fold {fold}: index 0 (indices are 1-based)")))
                })
                .collect()
        };
        let folds = w
            .folds
            .into_iter()
            .map(|f| {
                Ok(Fold {
                    repeat: f.repeat,
                    id: f.id,
                    test: zero(f.test, f.id)?,
                    train: zero(f.train, f.id)?,
                    omitted: zero(f.omitted, f.id)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ResamplingPlan {
            method: w.method,
            params: w.params,
            seed: w.seed,
            repeats: w.repeats,
            k_per_repeat: w.k_per_repeat,
            n: w.n,
            overlapping: w.overlapping,
            folds,
            blocks: None,
        })
    }
}

/// One failed check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub repeat: usize,
    pub fold: usize,
    pub message: String,
}

/// Result of [`validate_plan`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub pass: bool,
    pub folds_checked: usize,
    pub violations: Vec<Violation>,
}

/// Checks every structural invariant of `plan` against `task`.
pub fn validate_plan(plan: &ResamplingPlan, task: &Task) -> ValidationReport {
    let n = task.n();
    let mut violations = Vec::new();
    let mut push = |repeat: usize, fold: usize, message: String| {
        violations.push(Violation { repeat, fold, message });
    };
    if plan.n != n {
        push(0, 0, format!("plan/task mismatch: plan has n = {}, task has n = {n}", plan.n));
    }
    if plan.repeats == 0 {
        push(0, 0, "repeats must be at least 1".into());
    }

    for f in &plan.folds {
        let (r, id) = (f.repeat, f.id);
        let mut seen = vec![0u8; n];
        for (name, set, bit) in [("test", &f.test, 1u8), ("train", &f.train, 2), ("omitted", &f.omitted, 4)] {
            if !set.windows(2).all(|w| w[0] < w[1]) {
                push(r, id, format!("{name} set is not sorted and duplicate-free"));
            }
            for &i in set {
                if i >= n {
                    push(r, id, format!("index out of range: {} in {name} (n = {n})", i + 1));
                    continue;
                }
                if seen[i] != 0 {
                    push(r, id, format!("index {} appears in {name} and another set", i + 1));
                }
                seen[i] |= bit;
            }
        }
        if f.test.is_empty() {
            push(r, id, "empty test set".into());
        }
        if f.train.is_empty() {
            push(r, id, "empty train set".into());
        }
        let missing = seen.iter().filter(|&&s| s == 0).count();
        if missing > 0 {
            push(r, id, format!("{missing} observations in none of test/train/omitted"));
        }
    }

    for repeat in 1..=plan.repeats {
        let folds: Vec<&Fold> = plan.folds_of_repeat(repeat).collect();
        if folds.len() != plan.k_per_repeat {
            push(
                repeat,
                0,
                format!("repeat has {} folds, expected {}", folds.len(), plan.k_per_repeat),
            );
        }
        if plan.overlapping {
            continue;
        }
        let mut owner = vec![0usize; n];
        for f in &folds {
            for &i in f.test.iter().filter(|&&i| i < n) {
                if owner[i] != 0 {
                    push(repeat, f.id, format!("index {} is tested in folds {} and {}", i + 1, owner[i], f.id));
                }
                owner[i] = f.id;
            }
        }
        let omitting = folds.iter().any(|f| !f.omitted.is_empty());
        if !omitting {
            let uncovered = owner.iter().filter(|&&o| o == 0).count();
            if uncovered > 0 {
                push(repeat, 0, format!("{uncovered} observations never tested"));
            }
        }
    }

    ValidationReport {
        pass: violations.is_empty(),
        folds_checked: plan.folds.len(),
        violations,
    }
}
