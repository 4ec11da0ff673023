use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::task::{build_task, RecordTable, Response, ResponseKind, Task, TaskSchema};

/// Shortest decimal text that parses back to the identical double.
pub fn format_f64(v: f64) -> String {
    format!("{v}")
}

/// Parses CSV text with a header row into raw records.
pub fn records_from_csv<R: Read>(reader: R) -> Result<RecordTable> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::Headers).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(i + 2, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok(RecordTable { headers, rows })
}

pub fn read_records_csv(path: impl AsRef<Path>) -> Result<RecordTable> {
    records_from_csv(std::fs::File::open(path)?)
}

pub fn load_task_csv(path: impl AsRef<Path>, schema: &TaskSchema) -> Result<Task> {
    build_task(&read_records_csv(path)?, schema)
}

/// Flattens a task into records: response, coordinates, role columns, features, extras.
pub fn task_to_records(task: &Task) -> RecordTable {
    let n = task.n();
    let [xn, yn] = task.coord_names().clone();
    let mut headers = vec![task.response_name().to_string(), xn.clone(), yn.clone()];
    let mut cols: Vec<Vec<String>> = vec![
        (0..n).map(|i| task.response().text(i)).collect(),
        task.coords().iter().map(|c| format_f64(c[0])).collect(),
        task.coords().iter().map(|c| format_f64(c[1])).collect(),
    ];
    if let Some(t) = task.time() {
        headers.push(t.name.clone());
        cols.push((0..n).map(|i| t.format(i)).collect());
    }
    for c in [task.location(), task.group()].into_iter().flatten() {
        headers.push(c.name.clone());
        cols.push(c.labels.clone());
    }
    for (name, col) in task.feature_names().iter().zip(task.feature_columns()) {
        if *name == xn || *name == yn {
            continue;
        }
        headers.push(name.clone());
        cols.push(col.iter().map(|&v| format_f64(v)).collect());
    }
    for c in task.extra_columns() {
        headers.push(c.name.clone());
        cols.push(c.labels.clone());
    }
    let rows = (0..n).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect();
    RecordTable { headers, rows }
}

/// A schema that rebuilds `task` from the output of [`task_to_records`].
pub fn schema_for(task: &Task) -> TaskSchema {
    let [xn, yn] = task.coord_names().clone();
    TaskSchema {
        id: task.id().to_string(),
        response: Some(task.response_name().to_string()),
        response_kind: match task.response() {
            Response::Categorical(_) => ResponseKind::Categorical,
            Response::Numeric(_) => ResponseKind::Numeric,
        },
        time: task.time().map(|t| t.name.clone()),
        location: task.location().map(|c| c.name.clone()),
        group: task.group().map(|c| c.name.clone()),
        coords_as_features: task.coords_as_features(),
        positive_label: task.positive_label().map(str::to_string),
        features: Some(
            task.feature_names()
                .iter()
                .filter(|f| **f != xn && **f != yn)
                .cloned()
                .collect(),
        ),
        coords: (xn, yn),
    }
}

pub fn task_to_csv(task: &Task) -> Result<String> {
    let records = task_to_records(task);
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(&records.headers)?;
    for r in &records.rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output of UTF-8 input is UTF-8"))
}

pub fn write_task_csv(task: &Task, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, task_to_csv(task)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::task::TaskBuilder;

    #[test]
    fn parse_error_reports_line() {
        let err = records_from_csv("a,b\n1,2\n3\n".as_bytes()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn awkward_doubles_survive_a_round_trip() {
        let vals = vec![0.1 + 0.2, 1e-300, -0.0, 123456789.123456789, f64::MIN_POSITIVE, 5e-324];
        let t = TaskBuilder::new(
            "t",
            "z",
            Response::Numeric(vals.clone()),
            vals.iter().map(|&v| [v, -v]).collect(),
        )
        .feature("f", vals.iter().map(|v| v * 3.0).collect())
        .build()
        .unwrap();
        let text = task_to_csv(&t).unwrap();
        let back = build_task(&records_from_csv(text.as_bytes()).unwrap(), &schema_for(&t)).unwrap();
        assert_eq!(back, t);
        for (a, b) in back.feature("f").unwrap().iter().zip(t.feature("f").unwrap()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(task_to_csv(&back).unwrap(), text);
    }

    #[test]
    fn missing_coordinate_column() {
        let recs = records_from_csv("y,lon,lat\n1,0,0\n0,1,1\n".as_bytes()).unwrap();
        let err = build_task(&recs, &TaskSchema::new("y")).unwrap_err();
        assert!(matches!(err, Error::MissingColumn { .. }));
    }
}
