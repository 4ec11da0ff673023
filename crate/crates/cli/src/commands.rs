use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};
use spatiocv_core::eval::{nested_resample, resample, Learner, Measure};
use spatiocv_core::geom::BBox;
use spatiocv_core::io::{load_task_csv, load_task_geojson, write_task_csv, PlotSpec};
use spatiocv_core::partition::plan_blocks;
use spatiocv_core::synth::{make_classification_task, sample_grf};
use spatiocv_core::task::ResponseKind;
use spatiocv_core::variogram::estimate_autocorrelation_range;
use spatiocv_core::{repeat_plan, validate_plan, MethodSpec, Params, ResamplingPlan, Response, Task, TaskSchema};

use crate::args::*;
use crate::UsageError;

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn load_task(a: &TaskArgs) -> Result<Task> {
    let schema = TaskSchema {
        id: a
            .input
            .file_stem()
            .map_or_else(|| "task".to_string(), |s| s.to_string_lossy().into_owned()),
        response: Some(a.response.clone()),
        response_kind: match a.response_kind.as_str() {
            "auto" => ResponseKind::Auto,
            "categorical" => ResponseKind::Categorical,
            "numeric" => ResponseKind::Numeric,
            o => return Err(usage(format!("unknown response kind `{o}`"))),
        },
        coords: (a.x.clone(), a.y.clone()),
        time: a.time.clone(),
        location: a.location.clone(),
        group: a.group.clone(),
        coords_as_features: a.coords_as_features,
        positive_label: a.positive.clone(),
        features: a.features.clone(),
    };
    let ext = a.input.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    let task = if ext == "geojson" || ext == "json" {
        load_task_geojson(&a.input, &schema)
    } else {
        load_task_csv(&a.input, &schema)
    };
    task.with_context(|| format!("reading task from {}", a.input.display()))
}

fn load_plan(path: &Path) -> Result<ResamplingPlan> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading plan {}", path.display()))?;
    ResamplingPlan::from_json(&text).with_context(|| format!("parsing plan {}", path.display()))
}

/// Writes `body` to `--out`, or to stdout when no path is given.
fn emit(common: &Common, body: &str, summary: Value) -> Result<()> {
    match &common.out {
        Some(path) => {
            std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))?;
            if common.json {
                println!("{}", serde_json::to_string(&summary)?);
            }
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn key_value(raw: &str) -> Result<(String, Value)> {
    let (k, v) = raw
        .split_once('=')
        .ok_or_else(|| usage(format!("expected KEY=VALUE, got `{raw}`")))?;
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.trim().to_string(), value))
}

fn method_params(a: &MethodArgs) -> Result<Params> {
    let mut p = Params::new();
    let mut put = |k: &str, v: Value| {
        p.insert(k.to_string(), v);
    };
    if let Some(v) = a.folds {
        put("folds", json!(v));
    }
    if a.grouped {
        put("grouped", json!(true));
    }
    if let Some(v) = a.the_range {
        put("the_range", json!(v));
    }
    if let Some(v) = &a.sp_data_type {
        put("sp_data_type", json!(v));
    }
    if let Some(v) = a.add_bg {
        put("add_bg", json!(v));
    }
    if let Some(v) = a.radius {
        put("radius", json!(v));
    }
    if let Some(v) = a.buffer {
        put("buffer", json!(v));
    }
    if a.replace {
        put("replace", json!(true));
    }
    if let Some(v) = &a.nsplit {
        put("nsplit", json!(v));
    }
    if let Some(v) = &a.dsplit {
        put("dsplit", json!(v));
    }
    if let Some(v) = a.rotation {
        put("rotation", json!(v));
    }
    if let Some(v) = a.min_n {
        put("min_n", json!(v));
    }
    if let Some(v) = a.min_frac {
        put("min_frac", json!(v));
    }
    if let Some(v) = &a.column {
        put("column", json!(v));
    }
    if let Some(v) = a.range {
        put("range", json!(v));
    }
    if let Some(v) = &a.rows_cols {
        put("rows_cols", json!(v));
    }
    if let Some(v) = &a.selection {
        put("selection", json!(v));
    }
    if let Some(v) = &a.env_features {
        put("features", json!(v));
    }
    if let Some(v) = &a.space_var {
        put("space_var", json!(v));
    }
    if let Some(v) = &a.time_var {
        put("time_var", json!(v));
    }
    for raw in &a.params {
        let (k, v) = key_value(raw)?;
        p.insert(k, v);
    }
    Ok(p)
}

fn method_spec(method: &str, params: &Params) -> Result<MethodSpec> {
    MethodSpec::from_params(method, params).map_err(|e| usage(e.to_string()))
}

pub fn partition(a: &PartitionArgs) -> Result<()> {
    let spec = method_spec(&a.method, &method_params(&a.method_args)?)?;
    let task = load_task(&a.task)?;
    let plan = repeat_plan(&task, &spec, a.repeats, a.common.seed)?;
    let body = plan.to_json()? + "\n";
    let summary = json!({
        "method": plan.method,
        "seed": plan.seed,
        "repeats": plan.repeats,
        "k_per_repeat": plan.k_per_repeat,
        "n": plan.n,
        "out": a.common.out.as_ref().map(|p| p.display().to_string()),
    });
    emit(&a.common, &body, summary)
}

fn learner(a: &LearnerArgs) -> Result<Learner> {
    Ok(match a.learner.as_str() {
        "knn" => Learner::knn(a.k_neighbors),
        "logistic" => Learner::Logistic {
            lambda: a.lambda,
            epochs: a.epochs,
            learning_rate: a.learning_rate,
        },
        "featureless" => Learner::Featureless,
        o => return Err(usage(format!("unknown learner `{o}`"))),
    })
}

fn measure(s: &str) -> Result<Measure> {
    s.parse().map_err(|e: spatiocv_core::Error| usage(e.to_string()))
}

pub fn resample_cmd(a: &ResampleArgs) -> Result<()> {
    let learner = learner(&a.learner)?;
    let measure = measure(&a.learner.measure)?;
    let task = load_task(&a.task)?;
    let plan = load_plan(&a.plan)?;
    let result = resample(&task, &learner, &plan, measure)?;
    let summary = json!({
        "measure": result.measure,
        "aggregate": result.aggregate,
        "warnings": result.warnings,
        "folds": result.per_fold.len(),
    });
    emit(&a.common, &(result.to_json()? + "\n"), summary)
}

pub fn nested(a: &NestedArgs) -> Result<()> {
    let measure = measure(&a.measure)?;
    let mut inner_params = Params::new();
    for raw in &a.inner_params {
        let (k, v) = key_value(raw)?;
        inner_params.insert(k, v);
    }
    let inner = method_spec(&a.inner_method, &inner_params)?;
    let grid: Vec<Learner> = a.grid.iter().map(|&k| Learner::knn(k)).collect();
    let task = load_task(&a.task)?;
    let outer = load_plan(&a.plan)?;
    let result = nested_resample(&task, &grid, &inner, &outer, measure)?;
    let summary = json!({
        "measure": result.outer.measure,
        "aggregate": result.outer.aggregate,
        "chosen": result.choices.iter().map(|c| serde_json::to_value(&c.learner).unwrap()).collect::<Vec<_>>(),
    });
    emit(&a.common, &(serde_json::to_string_pretty(&result)? + "\n"), summary)
}

pub fn synth(a: &SynthArgs) -> Result<()> {
    let field = sample_grf(a.n, a.sigma2, a.rho, a.nugget, a.common.seed)?;
    let task = make_classification_task(&field, a.noise_features, a.common.seed.wrapping_add(1))?;
    match &a.common.out {
        Some(path) => {
            write_task_csv(&task, path).with_context(|| format!("writing {}", path.display()))?;
            if a.common.json {
                println!(
                    "{}",
                    json!({"n": task.n(), "features": task.feature_names(), "out": path.display().to_string()})
                );
            }
        }
        None => print!("{}", spatiocv_core::io::task_to_csv(&task)?),
    }
    Ok(())
}

pub fn validate(a: &ValidateArgs) -> Result<bool> {
    let task = load_task(&a.task)?;
    let plan = load_plan(&a.plan)?;
    let report = validate_plan(&plan, &task);
    let body = serde_json::to_string_pretty(&report)? + "\n";
    if a.common.json || a.common.out.is_some() {
        emit(&a.common, &body, json!({"pass": report.pass, "violations": report.violations.len()}))?;
    } else if report.pass {
        println!("ok: {} folds checked", report.folds_checked);
    } else {
        for v in &report.violations {
            println!("repeat {}, fold {}: {}", v.repeat, v.fold, v.message);
        }
    }
    Ok(report.pass)
}

pub fn plot(a: &PlotArgs) -> Result<()> {
    let task = load_task(&a.task)?;
    let mut plan = load_plan(&a.plan)?;
    if a.show_blocks && plan.blocks.is_none() && plan.method != "custom_cv" {
        let spec = MethodSpec::from_params(&plan.method, &plan.params)?;
        plan.blocks = plan_blocks(&task, &spec, plan.seed)?;
    }
    let spec = PlotSpec {
        repeat: a.repeat,
        folds: a.fold_ids.clone(),
        point_size: a.point_size,
        show_blocks: a.show_blocks,
        facet_by_time: a.facet_by_time,
        ..PlotSpec::default()
    };
    let svg = spatiocv_core::io::render_partition_svg(&task, &plan, &spec)?;
    emit(&a.common, &svg, json!({"out": a.common.out.as_ref().map(|p| p.display().to_string())}))
}

pub fn range(a: &RangeArgs) -> Result<()> {
    let task = load_task(&a.task)?;
    let values: Vec<f64> = match task.feature(&a.variable) {
        Some(v) => v.to_vec(),
        None if a.variable == task.response_name() => match task.response() {
            Response::Numeric(v) => v.clone(),
            Response::Categorical(_) => task
                .binary_labels()?
                .iter()
                .map(|&b| f64::from(u8::from(b)))
                .collect(),
        },
        None => bail!("`{}` is not a numeric feature or the response", a.variable),
    };
    let cutoff = a.cutoff.unwrap_or_else(|| {
        let b = BBox::of(task.coords());
        0.6 * b.width().max(b.height())
    });
    let est = estimate_autocorrelation_range(&values, task.coords(), a.n_lags, cutoff)?;
    if a.common.json || a.common.out.is_some() {
        let body = serde_json::to_string_pretty(&est)? + "\n";
        emit(&a.common, &body, json!({"range": est.range, "sill": est.sill}))
    } else {
        println!("range {} (sill {}, cutoff {cutoff}, {} lags)", est.range, est.sill, a.n_lags);
        Ok(())
    }
}
