//! Resampling methods. Every method is a pure function of (task, parameters, seed)
//! and is addressable by a string identifier with a flat parameter record.

mod buffer;
mod cluster;
mod grid;
mod level;

pub use buffer::{spcv_buffer, spcv_disc, SpDataType};
pub use cluster::{spcv_coords, spcv_env};
pub use grid::{block_grid, spcv_block, spcv_tiles, tile_blocks, BlockSpec, Selection, TileSpec};
pub use level::{custom_cv, grouped_cv, random_cv, sptcv_cstf};


use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::plan::{BlockSet, Fold, Params, ResamplingPlan};
use crate::rng::derive_seed;
use crate::task::Task;

/// One instantiation of a method: folds of a single repeat plus optional blocks.
#[derive(Debug, Clone)]
pub(crate) struct Split {
    pub folds: Vec<Fold>,
    pub blocks: Option<BlockSet>,
    pub overlapping: bool,
}

/// A resampling method together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum MethodSpec {
    /// Uniform random k-fold CV (`cv`).
    RandomCv { folds: usize },
    /// k-fold CV over the task's group role (`cv` with `grouped = true`).
    GroupedCv { folds: usize },
    Buffer {
        the_range: f64,
        sp_data_type: SpDataType,
        add_bg: bool,
    },
    Disc {
        /// Number of discs; defaults to n.
        folds: Option<usize>,
        radius: f64,
        buffer: f64,
        replace: bool,
    },
    Coords { folds: usize },
    Tiles(TileSpec),
    /// Leave-one-level-out over the named column.
    Custom { column: String },
    Block(BlockSpec),
    Env { features: Vec<String>, folds: usize },
    Cstf {
        folds: usize,
        space_var: Option<String>,
        time_var: Option<String>,
    },
}

pub const METHOD_IDS: [&str; 9] = [
    "cv",
    "spcv_buffer",
    "spcv_disc",
    "spcv_coords",
    "spcv_tiles",
    "custom_cv",
    "spcv_block",
    "spcv_env",
    "sptcv_cstf",
];

impl MethodSpec {
    pub fn id(&self) -> &'static str {
        match self {
            MethodSpec::RandomCv { .. } | MethodSpec::GroupedCv { .. } => "cv",
            MethodSpec::Buffer { .. } => "spcv_buffer",
            MethodSpec::Disc { .. } => "spcv_disc",
            MethodSpec::Coords { .. } => "spcv_coords",
            MethodSpec::Tiles(_) => "spcv_tiles",
            MethodSpec::Custom { .. } => "custom_cv",
            MethodSpec::Block(_) => "spcv_block",
            MethodSpec::Env { .. } => "spcv_env",
            MethodSpec::Cstf { .. } => "sptcv_cstf",
        }
    }

    /// Whether the method draws random numbers, i.e. whether repeating it is meaningful.
    pub fn is_random(&self) -> bool {
        match self {
            MethodSpec::Buffer { .. } | MethodSpec::Tiles(_) | MethodSpec::Custom { .. } => false,
            MethodSpec::Block(b) => b.selection == Selection::Random,
            _ => true,
        }
    }

    pub fn params(&self) -> Params {
        let mut p = Params::new();
        let mut put = |k: &str, v: Value| {
            p.insert(k.to_string(), v);
        };
        match self {
            MethodSpec::RandomCv { folds } => {
                put("folds", json!(folds));
                put("grouped", json!(false));
            }
            MethodSpec::GroupedCv { folds } => {
                put("folds", json!(folds));
                put("grouped", json!(true));
            }
            MethodSpec::Buffer {
                the_range,
                sp_data_type,
                add_bg,
            } => {
                put("the_range", json!(the_range));
                put("sp_data_type", json!(sp_data_type.as_str()));
                put("add_bg", json!(add_bg));
            }
            MethodSpec::Disc {
                folds,
                radius,
                buffer,
                replace,
            } => {
                if let Some(f) = folds {
                    put("folds", json!(f));
                }
                put("radius", json!(radius));
                put("buffer", json!(buffer));
                put("replace", json!(replace));
            }
            MethodSpec::Coords { folds } => put("folds", json!(folds)),
            MethodSpec::Tiles(t) => {
                if let Some((r, c)) = t.nsplit {
                    put("nsplit", json!([r, c]));
                }
                if let Some((dx, dy)) = t.dsplit {
                    put("dsplit", json!([dx, dy]));
                }
                put("rotation", json!(t.rotation));
                if let Some(m) = t.min_n {
                    put("min_n", json!(m));
                }
                if let Some(m) = t.min_frac {
                    put("min_frac", json!(m));
                }
            }
            MethodSpec::Custom { column } => put("column", json!(column)),
            MethodSpec::Block(b) => {
                if let Some(r) = b.range {
                    put("range", json!(r));
                }
                if let Some((r, c)) = b.rows_cols {
                    put("rows_cols", json!([r, c]));
                }
                put("folds", json!(b.folds));
                put("selection", json!(b.selection.as_str()));
            }
            MethodSpec::Env { features, folds } => {
                put("features", json!(features));
                put("folds", json!(folds));
            }
            MethodSpec::Cstf {
                folds,
                space_var,
                time_var,
            } => {
                put("folds", json!(folds));
                if let Some(s) = space_var {
                    put("space_var", json!(s));
                }
                if let Some(t) = time_var {
                    put("time_var", json!(t));
                }
            }
        }
        p
    }

    /// Parses a method identifier and its flat parameter record.
    pub fn from_params(method: &str, params: &Params) -> Result<MethodSpec> {
        let r = ParamReader::new(params);
        let spec = match method {
            "cv" | "repeated_cv" => {
                let folds = r.usize("folds")?.unwrap_or(10);
                if r.bool("grouped")?.unwrap_or(false) {
                    MethodSpec::GroupedCv { folds }
                } else {
                    MethodSpec::RandomCv { folds }
                }
            }
            "spcv_buffer" => MethodSpec::Buffer {
                the_range: r.required_f64("the_range")?,
                sp_data_type: match r.str("sp_data_type")?.as_deref() {
                    None | Some("PA") => SpDataType::PA,
                    Some("PB") => SpDataType::PB,
                    Some(o) => return Err(Error::InvalidParameter(format!("sp_data_type `{o}`"))),
                },
                add_bg: r.bool("add_bg")?.unwrap_or(true),
            },
            "spcv_disc" => MethodSpec::Disc {
                folds: r.usize("folds")?,
                radius: r.required_f64("radius")?,
                buffer: r.f64("buffer")?.unwrap_or(0.0),
                replace: r.bool("replace")?.unwrap_or(false),
            },
            "spcv_coords" | "repeated_spcv_coords" => MethodSpec::Coords {
                folds: r.usize("folds")?.unwrap_or(10),
            },
            "spcv_tiles" => MethodSpec::Tiles(TileSpec {
                nsplit: r.usize_pair("nsplit")?,
                dsplit: r.f64_pair("dsplit")?,
                rotation: r.f64("rotation")?.unwrap_or(0.0),
                min_n: r.usize("min_n")?,
                min_frac: r.f64("min_frac")?,
            }),
            "custom_cv" => MethodSpec::Custom {
                column: r.str("column")?.ok_or_else(|| missing("column"))?,
            },
            "spcv_block" => MethodSpec::Block(BlockSpec {
                range: r.f64("range")?,
                rows_cols: r.usize_pair("rows_cols")?,
                folds: r.usize("folds")?.unwrap_or(10),
                selection: match r.str("selection")?.as_deref() {
                    None => Selection::Random,
                    Some(s) => s.parse()?,
                },
            }),
            "spcv_env" => MethodSpec::Env {
                features: r.str_list("features")?.ok_or_else(|| missing("features"))?,
                folds: r.usize("folds")?.unwrap_or(10),
            },
            "sptcv_cstf" => MethodSpec::Cstf {
                folds: r.usize("folds")?.unwrap_or(10),
                space_var: r.str("space_var")?,
                time_var: r.str("time_var")?,
            },
            other => return Err(Error::InvalidParameter(format!("unknown method `{other}`"))),
        };
        r.finish(method)?;
        Ok(spec)
    }

    fn instantiate(&self, task: &Task, seed: u64) -> Result<Split> {
        match self {
            MethodSpec::RandomCv { folds } => level::random_split(task, *folds, seed),
            MethodSpec::GroupedCv { folds } => level::grouped_split(task, *folds, seed),
            MethodSpec::Buffer {
                the_range,
                sp_data_type,
                add_bg,
            } => buffer::buffer_split(task, *the_range, *sp_data_type, *add_bg),
            MethodSpec::Disc {
                folds,
                radius,
                buffer,
                replace,
            } => buffer::disc_split(task, folds.unwrap_or(task.n()), *radius, *buffer, *replace, seed),
            MethodSpec::Coords { folds } => cluster::coords_split(task, *folds, seed),
            MethodSpec::Tiles(spec) => grid::tiles_split(task, spec),
            MethodSpec::Custom { column } => {
                let factor = task
                    .column_text(column)
                    .ok_or_else(|| Error::MissingColumn {
                        role: "custom factor",
                        column: column.clone(),
                    })?;
                level::custom_split(task, &factor)
            }
            MethodSpec::Block(spec) => grid::block_split(task, spec, seed),
            MethodSpec::Env { features, folds } => cluster::env_split(task, features, *folds, seed),
            MethodSpec::Cstf {
                folds,
                space_var,
                time_var,
            } => level::cstf_split(task, *folds, space_var.as_deref(), time_var.as_deref(), seed),
        }
    }
}

fn missing(key: &str) -> Error {
    Error::InvalidParameter(format!("missing parameter `{key}`"))
}

/// Typed access to a flat parameter record; rejects unknown keys on `finish`.
struct ParamReader<'a> {
    params: &'a Params,
    used: std::cell::RefCell<Vec<&'static str>>,
}

impl<'a> ParamReader<'a> {
    fn new(params: &'a Params) -> Self {
        ParamReader {
            params,
            used: Default::default(),
        }
    }

    fn get(&self, key: &'static str) -> Option<&'a Value> {
        self.used.borrow_mut().push(key);
        self.params.get(key).filter(|v| !v.is_null())
    }

    fn bad(key: &str, v: &Value, what: &str) -> Error {
        Error::InvalidParameter(format!("`{key}` = {v} is not {what}"))
    }

    fn f64(&self, key: &'static str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| match v {
                Value::Number(n) => n.as_f64().ok_or_else(|| Self::bad(key, v, "a number")),
                Value::String(s) => s.parse().map_err(|_| Self::bad(key, v, "a number")),
                _ => Err(Self::bad(key, v, "a number")),
            })
            .transpose()
    }

    fn required_f64(&self, key: &'static str) -> Result<f64> {
        self.f64(key)?.ok_or_else(|| missing(key))
    }

    fn usize(&self, key: &'static str) -> Result<Option<usize>> {
        self.get(key)
            .map(|v| match v {
                Value::Number(n) => n
                    .as_u64()
                    .map(|u| u as usize)
                    .ok_or_else(|| Self::bad(key, v, "a non-negative integer")),
                Value::String(s) => s.parse().map_err(|_| Self::bad(key, v, "a non-negative integer")),
                _ => Err(Self::bad(key, v, "a non-negative integer")),
            })
            .transpose()
    }

    fn bool(&self, key: &'static str) -> Result<Option<bool>> {
        self.get(key)
            .map(|v| match v {
                Value::Bool(b) => Ok(*b),
                Value::String(s) => match s.as_str() {
                    "true" | "TRUE" => Ok(true),
                    "false" | "FALSE" => Ok(false),
                    _ => Err(Self::bad(key, v, "a boolean")),
                },
                _ => Err(Self::bad(key, v, "a boolean")),
            })
            .transpose()
    }

    fn str(&self, key: &'static str) -> Result<Option<String>> {
        self.get(key)
            .map(|v| match v {
                Value::String(s) => Ok(s.clone()),
                Value::Number(n) => Ok(n.to_string()),
                _ => Err(Self::bad(key, v, "a string")),
            })
            .transpose()
    }

    fn str_list(&self, key: &'static str) -> Result<Option<Vec<String>>> {
        self.get(key)
            .map(|v| match v {
                Value::String(s) => Ok(s.split(',').map(|p| p.trim().to_string()).collect()),
                Value::Array(items) => items
                    .iter()
                    .map(|i| i.as_str().map(String::from).ok_or_else(|| Self::bad(key, v, "a list of strings")))
                    .collect(),
                _ => Err(Self::bad(key, v, "a list of strings")),
            })
            .transpose()
    }

    fn pair(&self, key: &'static str) -> Result<Option<(Value, Value)>> {
        self.get(key)
            .map(|v| {
                let parts: Vec<Value> = match v {
                    Value::Array(a) => a.clone(),
                    Value::String(s) => s.split([',', 'x']).map(|p| Value::String(p.trim().into())).collect(),
                    _ => vec![],
                };
                match <[Value; 2]>::try_from(parts) {
                    Ok([a, b]) => Ok((a, b)),
                    Err(_) => Err(Self::bad(key, v, "a pair")),
                }
            })
            .transpose()
    }

    fn usize_pair(&self, key: &'static str) -> Result<Option<(usize, usize)>> {
        self.pair(key)?
            .map(|(a, b)| {
                let conv = |x: &Value| -> Result<usize> {
                    match x {
                        Value::Number(n) => n.as_u64().map(|u| u as usize),
                        Value::String(s) => s.parse().ok(),
                        _ => None,
                    }
                    .ok_or_else(|| Self::bad(key, x, "a non-negative integer"))
                };
                Ok((conv(&a)?, conv(&b)?))
            })
            .transpose()
    }

    fn f64_pair(&self, key: &'static str) -> Result<Option<(f64, f64)>> {
        self.pair(key)?
            .map(|(a, b)| {
                let conv = |x: &Value| -> Result<f64> {
                    match x {
                        Value::Number(n) => n.as_f64(),
                        Value::String(s) => s.parse().ok(),
                        _ => None,
                    }
                    .ok_or_else(|| Self::bad(key, x, "a number"))
                };
                Ok((conv(&a)?, conv(&b)?))
            })
            .transpose()
    }

    fn finish(&self, method: &str) -> Result<()> {
        let used = self.used.borrow();
        match self.params.keys().find(|k| !used.contains(&k.as_str())) {
            Some(k) => Err(Error::InvalidParameter(format!("`{k}` is not a parameter of `{method}`"))),
            None => Ok(()),
        }
    }
}

/// Instantiates a single (one-repeat) plan.
pub fn partition(task: &Task, spec: &MethodSpec, seed: u64) -> Result<ResamplingPlan> {
    repeat_plan(task, spec, 1, seed)
}

/// Instantiates `repeats` independent plans with per-repeat seeds derived from `seed`.
pub fn repeat_plan(task: &Task, spec: &MethodSpec, repeats: usize, seed: u64) -> Result<ResamplingPlan> {
    if repeats == 0 {
        return Err(Error::InvalidParameter("repeats must be at least 1".into()));
    }
    if repeats > 1 && !spec.is_random() {
        return Err(Error::DeterministicMethod(spec.id().to_string()));
    }
    let splits: Vec<Split> = (0..repeats)
        .into_par_iter()
        .map(|r| spec.instantiate(task, derive_seed(seed, r as u64)))
        .collect::<Result<_>>()?;

    let k = splits[0].folds.len();
    let overlapping = splits[0].overlapping;
    let mut blocks = None;
    let mut folds = Vec::with_capacity(k * repeats);
    for (r, split) in splits.into_iter().enumerate() {
        if split.folds.len() != k {
            return Err(Error::Partition(format!(
                "repeat {} produced {} folds, expected {k}",
                r + 1,
                split.folds.len()
            )));
        }
        if r == 0 {
            blocks = split.blocks;
        }
        for (j, mut f) in split.folds.into_iter().enumerate() {
            f.repeat = r + 1;
            f.id = j + 1;
            if f.test.is_empty() {
                return Err(Error::Partition(format!("fold {} has an empty test set", f.id)));
            }
            if f.train.is_empty() {
                return Err(Error::Partition(format!("fold {} has an empty training set", f.id)));
            }
            folds.push(f);
        }
    }
    Ok(ResamplingPlan {
        method: spec.id().to_string(),
        params: spec.params(),
        seed,
        repeats,
        k_per_repeat: k,
        n: task.n(),
        overlapping,
        folds,
        blocks,
    })
}

/// Block structure of a plan, recomputed from the task (deterministic for geometric methods).
pub fn plan_blocks(task: &Task, spec: &MethodSpec, seed: u64) -> Result<Option<BlockSet>> {
    Ok(spec.instantiate(task, seed)?.blocks)
}
