use std::path::Path;

use serde_json::Value;

use super::table::format_f64;
use crate::error::{Error, Result};
use crate::task::{build_task, RecordTable, Task, TaskSchema};

fn cell(v: &Value) -> Result<String> {
    Ok(match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(x) => match (x.as_i64(), x.as_f64()) {
            (Some(i), _) => i.to_string(),
            (None, Some(f)) => format_f64(f),
            _ => x.to_string(),
        },
        Value::String(s) => s.clone(),
        _ => return Err(Error::GeoJson("nested property values are not supported".into())),
    })
}

/// Flattens a FeatureCollection of Points into records. Coordinates become the
/// columns named by `coord_names`; properties follow in the first feature's key order.
pub fn records_from_geojson(text: &str, coord_names: (&str, &str)) -> Result<RecordTable> {
    let doc: Value = serde_json::from_str(text)?;
    if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(Error::GeoJson("expected a FeatureCollection".into()));
    }
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::GeoJson("missing features array".into()))?;
    let mut keys: Option<Vec<String>> = None;
    let mut rows = Vec::with_capacity(features.len());
    for (i, f) in features.iter().enumerate() {
        let geom = f.get("geometry").ok_or_else(|| Error::GeoJson(format!("feature {}: no geometry", i + 1)))?;
        let kind = geom.get("type").and_then(Value::as_str).unwrap_or("");
        if kind != "Point" {
            return Err(Error::GeoJson(format!(
                "feature {}: points only, found {}",
                i + 1,
                if kind.is_empty() { "no geometry type" } else { kind }
            )));
        }
        let xy = geom
            .get("coordinates")
            .and_then(Value::as_array)
            .filter(|c| c.len() >= 2)
            .and_then(|c| Some([c[0].as_f64()?, c[1].as_f64()?]))
            .ok_or_else(|| Error::GeoJson(format!("feature {}: bad point coordinates", i + 1)))?;
        let empty = serde_json::Map::new();
        let props = match f.get("properties") {
            None | Some(Value::Null) => &empty,
            Some(Value::Object(m)) => m,
            Some(_) => return Err(Error::GeoJson(format!("feature {}: properties must be an object", i + 1))),
        };
        let names: Vec<String> = props.keys().cloned().collect();
        match &keys {
            None => keys = Some(names),
            Some(k) => {
                let mut a = k.clone();
                let mut b = names;
                a.sort();
                b.sort();
                if a != b {
                    return Err(Error::GeoJson(format!(
                        "feature {}: mixed property schemas",
                        i + 1
                    )));
                }
            }
        }
        let mut row = vec![format_f64(xy[0]), format_f64(xy[1])];
        for k in keys.as_ref().expect("set above") {
            row.push(cell(&props[k])?);
        }
        rows.push(row);
    }
    let mut headers = vec![coord_names.0.to_string(), coord_names.1.to_string()];
    let keys = keys.unwrap_or_default();
    if let Some(k) = keys.iter().find(|k| *k == coord_names.0 || *k == coord_names.1) {
        return Err(Error::GeoJson(format!("property `{k}` clashes with a coordinate column")));
    }
    headers.extend(keys);
    Ok(RecordTable { headers, rows })
}

pub fn read_records_geojson(path: impl AsRef<Path>, coord_names: (&str, &str)) -> Result<RecordTable> {
    records_from_geojson(&std::fs::read_to_string(path)?, coord_names)
}

pub fn load_task_geojson(path: impl AsRef<Path>, schema: &TaskSchema) -> Result<Task> {
    let records = read_records_geojson(path, (&schema.coords.0, &schema.coords.1))?;
    build_task(&records, schema)
}
