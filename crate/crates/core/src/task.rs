//! Task data model: response, features, planar coordinates and the optional
//! time / location / group roles used by the spatiotemporal partitioners.

use std::collections::BTreeSet;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Target variable of a task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Response {
    Categorical(Vec<String>),
    Numeric(Vec<f64>),
}

impl Response {
    pub fn len(&self) -> usize {
        match self {
            Response::Categorical(v) => v.len(),
            Response::Numeric(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Value of row `i` rendered as text.
    pub fn text(&self, i: usize) -> String {
        match self {
            Response::Categorical(v) => v[i].clone(),
            Response::Numeric(v) => v[i].to_string(),
        }
    }

    fn subset(&self, idx: &[usize]) -> Response {
        match self {
            Response::Categorical(v) => Response::Categorical(idx.iter().map(|&i| v[i].clone()).collect()),
            Response::Numeric(v) => Response::Numeric(idx.iter().map(|&i| v[i]).collect()),
        }
    }
}

/// Column roles that can be attached after construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Group,
    Time,
    Location,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Group => "group",
            Role::Time => "time",
            Role::Location => "location",
        }
    }
}

impl std::str::FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "group" => Ok(Role::Group),
            "time" => Ok(Role::Time),
            "location" | "space" => Ok(Role::Location),
            other => Err(Error::InvalidParameter(format!("unknown role `{other}`"))),
        }
    }
}

/// Time column normalized to integer keys. Dates become days since 1970-01-01.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeColumn {
    pub name: String,
    pub keys: Vec<i64>,
    pub is_date: bool,
}

impl TimeColumn {
    /// Parses integer or ISO-8601 (`YYYY-MM-DD`) time values. Mixing the two is an error.
    pub fn parse(name: &str, raw: &[String]) -> Result<TimeColumn> {
        let mut keys = Vec::with_capacity(raw.len());
        let mut kinds = BTreeSet::new();
        for (row, s) in raw.iter().enumerate() {
            let (key, is_date) = parse_time_key(s).ok_or_else(|| Error::BadValue {
                column: name.to_string(),
                row: row + 1,
                message: format!("`{s}` is neither an integer nor an ISO-8601 date"),
            })?;
            kinds.insert(is_date);
            keys.push(key);
        }
        if kinds.len() > 1 {
            return Err(Error::BadValue {
                column: name.to_string(),
                row: 1,
                message: "mixes integer and date time values".into(),
            });
        }
        Ok(TimeColumn {
            name: name.to_string(),
            keys,
            is_date: kinds.contains(&true),
        })
    }

    pub fn format(&self, i: usize) -> String {
        if self.is_date {
            let epoch = NaiveDate::from_ymd_opt(1970, 1, 1).expect("epoch");
            (epoch + chrono::Duration::days(self.keys[i])).format("%Y-%m-%d").to_string()
        } else {
            self.keys[i].to_string()
        }
    }
}

fn parse_time_key(s: &str) -> Option<(i64, bool)> {
    let s = s.trim();
    if let Ok(v) = s.parse::<i64>() {
        return Some((v, false));
    }
    if let Ok(v) = s.parse::<f64>() {
        if v.is_finite() && v.fract() == 0.0 && v.abs() < 9.0e15 {
            return Some((v as i64, false));
        }
        return None;
    }
    let date_part = s.split(['T', ' ']).next()?;
    let d = NaiveDate::parse_from_str(date_part, "%Y-%m-%d").ok()?;
    let epoch = NaiveDate::from_ymd_opt(1970, 1, 1)?;
    Some(((d - epoch).num_days(), true))
}

/// A categorical per-observation identifier (group or location id).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelColumn {
    pub name: String,
    pub labels: Vec<String>,
}

impl LabelColumn {
    /// Distinct labels in lexicographic order.
    pub fn levels(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.labels.iter().collect();
        set.into_iter().cloned().collect()
    }
}

/// Observations with response, features, planar coordinates and optional roles.
///
/// Immutable once built; use [`TaskBuilder`] or [`build_task`] to construct one.
#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    id: String,
    response_name: String,
    response: Response,
    positive_label: Option<String>,
    feature_names: Vec<String>,
    feature_cols: Vec<Vec<f64>>,
    coord_names: [String; 2],
    coords: Vec<[f64; 2]>,
    coords_as_features: bool,
    time: Option<TimeColumn>,
    location: Option<LabelColumn>,
    group: Option<LabelColumn>,
    extra: Vec<LabelColumn>,
}

impl Task {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    /// Number of model features.
    pub fn p(&self) -> usize {
        self.feature_names.len()
    }

    pub fn response_name(&self) -> &str {
        &self.response_name
    }

    pub fn response(&self) -> &Response {
        &self.response
    }

    pub fn positive_label(&self) -> Option<&str> {
        self.positive_label.as_deref()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature(&self, name: &str) -> Option<&[f64]> {
        self.feature_names
            .iter()
            .position(|f| f == name)
            .map(|j| self.feature_cols[j].as_slice())
    }

    pub fn feature_columns(&self) -> &[Vec<f64>] {
        &self.feature_cols
    }

    pub fn feature_row(&self, i: usize) -> Vec<f64> {
        self.feature_cols.iter().map(|c| c[i]).collect()
    }

    pub fn coord_names(&self) -> &[String; 2] {
        &self.coord_names
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn coords_as_features(&self) -> bool {
        self.coords_as_features
    }

    pub fn time(&self) -> Option<&TimeColumn> {
        self.time.as_ref()
    }

    pub fn location(&self) -> Option<&LabelColumn> {
        self.location.as_ref()
    }

    pub fn group(&self) -> Option<&LabelColumn> {
        self.group.as_ref()
    }

    /// Non-numeric columns that carry no role and are not model features.
    pub fn extra_columns(&self) -> &[LabelColumn] {
        &self.extra
    }

    /// Looks a column up by name among every column the task holds and
    /// returns its values as text.
    pub fn column_text(&self, name: &str) -> Option<Vec<String>> {
        if name == self.response_name {
            return Some((0..self.n()).map(|i| self.response.text(i)).collect());
        }
        if let Some(col) = self.feature(name) {
            return Some(col.iter().map(|v| v.to_string()).collect());
        }
        if let Some(t) = self.time.as_ref().filter(|t| t.name == name) {
            return Some((0..self.n()).map(|i| t.format(i)).collect());
        }
        for c in [&self.location, &self.group].into_iter().flatten() {
            if c.name == name {
                return Some(c.labels.clone());
            }
        }
        for (j, cname) in self.coord_names.iter().enumerate() {
            if cname == name {
                return Some(self.coords.iter().map(|c| c[j].to_string()).collect());
            }
        }
        self.extra.iter().find(|c| c.name == name).map(|c| c.labels.clone())
    }

    /// Binary labels (true = positive class); errors unless the response is
    /// categorical with a positive label.
    pub fn binary_labels(&self) -> Result<Vec<bool>> {
        match (&self.response, &self.positive_label) {
            (Response::Categorical(v), Some(pos)) => Ok(v.iter().map(|l| l == pos).collect()),
            (Response::Categorical(_), None) => {
                Err(Error::InvalidTask("classification requires a positive label".into()))
            }
            (Response::Numeric(_), _) => Err(Error::InvalidTask("response is not categorical".into())),
        }
    }

    /// Assigns `role` to an existing column and removes that column from the model features.
    pub fn set_role(&self, column: &str, role: Role) -> Result<Task> {
        let already = match role {
            Role::Group => self.group.is_some(),
            Role::Time => self.time.is_some(),
            Role::Location => self.location.is_some(),
        };
        if already {
            return Err(Error::RoleAlreadySet(role.name()));
        }
        if column == self.response_name || self.coord_names.iter().any(|c| c == column) {
            return Err(Error::DuplicateRole(column.to_string(), "response/coordinate"));
        }
        let taken = [
            (self.time.as_ref().map(|t| t.name.as_str()), "time"),
            (self.location.as_ref().map(|t| t.name.as_str()), "location"),
            (self.group.as_ref().map(|t| t.name.as_str()), "group"),
        ];
        for (name, r) in taken {
            if name == Some(column) {
                return Err(Error::DuplicateRole(column.to_string(), r));
            }
        }

        let mut out = self.clone();
        let raw: Vec<String> = if let Some(j) = out.feature_names.iter().position(|f| f == column) {
            out.feature_names.remove(j);
            let col = out.feature_cols.remove(j);
            if role != Role::Time {
                if let Some(row) = col.iter().position(|v| v.fract() != 0.0) {
                    return Err(Error::BadValue {
                        column: column.to_string(),
                        row: row + 1,
                        message: "categorical role needs integer or text identifiers".into(),
                    });
                }
            }
            col.iter().map(|v| v.to_string()).collect()
        } else if let Some(j) = out.extra.iter().position(|c| c.name == column) {
            out.extra.remove(j).labels
        } else {
            return Err(Error::MissingColumn {
                role: role.name(),
                column: column.to_string(),
            });
        };

        match role {
            Role::Time => out.time = Some(TimeColumn::parse(column, &raw)?),
            Role::Location => {
                out.location = Some(LabelColumn {
                    name: column.to_string(),
                    labels: raw,
                })
            }
            Role::Group => {
                out.group = Some(LabelColumn {
                    name: column.to_string(),
                    labels: raw,
                })
            }
        }
        Ok(out)
    }

    /// Restricts the task to the given rows (in the given order).
    pub fn subset(&self, idx: &[usize]) -> Task {
        let pick_s = |v: &[String]| idx.iter().map(|&i| v[i].clone()).collect::<Vec<_>>();
        Task {
            id: format!("{}[subset]", self.id),
            response_name: self.response_name.clone(),
            response: self.response.subset(idx),
            positive_label: self.positive_label.clone(),
            feature_names: self.feature_names.clone(),
            feature_cols: self
                .feature_cols
                .iter()
                .map(|c| idx.iter().map(|&i| c[i]).collect())
                .collect(),
            coord_names: self.coord_names.clone(),
            coords: idx.iter().map(|&i| self.coords[i]).collect(),
            coords_as_features: self.coords_as_features,
            time: self.time.as_ref().map(|t| TimeColumn {
                name: t.name.clone(),
                keys: idx.iter().map(|&i| t.keys[i]).collect(),
                is_date: t.is_date,
            }),
            location: self.location.as_ref().map(|c| LabelColumn {
                name: c.name.clone(),
                labels: pick_s(&c.labels),
            }),
            group: self.group.as_ref().map(|c| LabelColumn {
                name: c.name.clone(),
                labels: pick_s(&c.labels),
            }),
            extra: self
                .extra
                .iter()
                .map(|c| LabelColumn {
                    name: c.name.clone(),
                    labels: pick_s(&c.labels),
                })
                .collect(),
        }
    }
}

/// Programmatic task construction with validation on [`TaskBuilder::build`].
#[derive(Debug, Clone)]
pub struct TaskBuilder {
    id: String,
    response_name: String,
    response: Response,
    positive_label: Option<String>,
    feature_names: Vec<String>,
    feature_cols: Vec<Vec<f64>>,
    coord_names: [String; 2],
    coords: Vec<[f64; 2]>,
    coords_as_features: bool,
    time: Option<TimeColumn>,
    location: Option<LabelColumn>,
    group: Option<LabelColumn>,
    extra: Vec<LabelColumn>,
}

impl TaskBuilder {
    pub fn new(id: impl Into<String>, response_name: impl Into<String>, response: Response, coords: Vec<[f64; 2]>) -> Self {
        TaskBuilder {
            id: id.into(),
            response_name: response_name.into(),
            response,
            positive_label: None,
            feature_names: Vec::new(),
            feature_cols: Vec::new(),
            coord_names: ["x".into(), "y".into()],
            coords,
            coords_as_features: false,
            time: None,
            location: None,
            group: None,
            extra: Vec::new(),
        }
    }

    pub fn coord_names(mut self, x: impl Into<String>, y: impl Into<String>) -> Self {
        self.coord_names = [x.into(), y.into()];
        self
    }

    pub fn feature(mut self, name: impl Into<String>, values: Vec<f64>) -> Self {
        self.feature_names.push(name.into());
        self.feature_cols.push(values);
        self
    }

    pub fn positive_label(mut self, label: impl Into<String>) -> Self {
        self.positive_label = Some(label.into());
        self
    }

    pub fn coords_as_features(mut self, yes: bool) -> Self {
        self.coords_as_features = yes;
        self
    }

    pub fn time(mut self, name: impl Into<String>, keys: Vec<i64>) -> Self {
        self.time = Some(TimeColumn {
            name: name.into(),
            keys,
            is_date: false,
        });
        self
    }

    pub fn time_column(mut self, col: TimeColumn) -> Self {
        self.time = Some(col);
        self
    }

    pub fn location(mut self, name: impl Into<String>, labels: Vec<String>) -> Self {
        self.location = Some(LabelColumn {
            name: name.into(),
            labels,
        });
        self
    }

    pub fn group(mut self, name: impl Into<String>, labels: Vec<String>) -> Self {
        self.group = Some(LabelColumn {
            name: name.into(),
            labels,
        });
        self
    }

    pub fn extra(mut self, name: impl Into<String>, labels: Vec<String>) -> Self {
        self.extra.push(LabelColumn {
            name: name.into(),
            labels,
        });
        self
    }

    pub fn build(mut self) -> Result<Task> {
        let n = self.coords.len();
        if n < 2 {
            return Err(Error::TooFewObservations(n));
        }
        if self.response.len() != n {
            return Err(Error::InvalidTask(format!(
                "response has {} values for {n} observations",
                self.response.len()
            )));
        }
        if let Some(i) = self.coords.iter().position(|c| !c[0].is_finite() || !c[1].is_finite()) {
            return Err(Error::NonFinite(format!("coordinates of row {}", i + 1)));
        }
        if let Response::Numeric(v) = &self.response {
            if let Some(i) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!("response of row {}", i + 1)));
            }
        }

        let has_coord_features = self.coord_names.iter().any(|c| self.feature_names.contains(c));
        if self.coords_as_features && !has_coord_features {
            for j in [1, 0] {
                self.feature_names.insert(0, self.coord_names[j].clone());
                self.feature_cols.insert(0, self.coords.iter().map(|c| c[j]).collect());
            }
        } else if !self.coords_as_features && has_coord_features {
            return Err(Error::InvalidTask(
                "coordinates are features but coords_as_features is false".into(),
            ));
        }

        let mut seen = BTreeSet::new();
        for (name, col) in self.feature_names.iter().zip(&self.feature_cols) {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidTask(format!("duplicate feature `{name}`")));
            }
            if col.len() != n {
                return Err(Error::InvalidTask(format!("feature `{name}` has {} values", col.len())));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::BadValue {
                    column: name.clone(),
                    row: i + 1,
                    message: "missing or non-finite feature value".into(),
                });
            }
        }
        if let Some(t) = &self.time {
            if t.keys.len() != n {
                return Err(Error::InvalidTask("time column length mismatch".into()));
            }
        }
        for c in [&self.location, &self.group].into_iter().flatten().chain(&self.extra) {
            if c.labels.len() != n {
                return Err(Error::InvalidTask(format!("column `{}` length mismatch", c.name)));
            }
        }
        if let Some(pos) = &self.positive_label {
            match &self.response {
                Response::Categorical(v) if v.contains(pos) => {}
                Response::Categorical(_) => {
                    return Err(Error::InvalidTask(format!("positive label `{pos}` does not occur in response")))
                }
                Response::Numeric(_) => {
                    return Err(Error::InvalidTask("positive label set on a numeric response".into()))
                }
            }
        }

        Ok(Task {
            id: self.id,
            response_name: self.response_name,
            response: self.response,
            positive_label: self.positive_label,
            feature_names: self.feature_names,
            feature_cols: self.feature_cols,
            coord_names: self.coord_names,
            coords: self.coords,
            coords_as_features: self.coords_as_features,
            time: self.time,
            location: self.location,
            group: self.group,
            extra: self.extra,
        })
    }
}

/// Raw tabular input: header plus rows of text cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RecordTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RecordTable {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    fn column(&self, j: usize) -> Vec<String> {
        self.rows.iter().map(|r| r[j].clone()).collect()
    }
}

/// How the response column should be interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResponseKind {
    /// Categorical when a positive label is given or any value is non-numeric.
    #[default]
    Auto,
    Categorical,
    Numeric,
}

/// Maps table columns onto task roles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSchema {
    pub id: String,
    pub response: Option<String>,
    #[serde(default)]
    pub response_kind: ResponseKind,
    pub coords: (String, String),
    #[serde(default)]
    pub time: Option<String>,
    #[serde(default)]
    pub location: Option<String>,
    #[serde(default)]
    pub group: Option<String>,
    #[serde(default)]
    pub coords_as_features: bool,
    #[serde(default)]
    pub positive_label: Option<String>,
    /// Explicit feature list; defaults to every remaining numeric column.
    #[serde(default)]
    pub features: Option<Vec<String>>,
}

impl TaskSchema {
    pub fn new(response: impl Into<String>) -> Self {
        TaskSchema {
            id: "task".into(),
            response: Some(response.into()),
            response_kind: ResponseKind::Auto,
            coords: ("x".into(), "y".into()),
            time: None,
            location: None,
            group: None,
            coords_as_features: false,
            positive_label: None,
            features: None,
        }
    }
}

fn parse_numeric(column: &str, raw: &[String]) -> Result<Vec<f64>> {
    raw.iter()
        .enumerate()
        .map(|(row, s)| {
            let s = s.trim();
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::BadValue {
                    column: column.to_string(),
                    row: row + 1,
                    message: if s.is_empty() {
                        "missing value".into()
                    } else {
                        format!("`{s}` is not a finite number")
                    },
                }),
            }
        })
        .collect()
}

fn all_numeric(raw: &[String]) -> bool {
    raw.iter()
        .all(|s| s.trim().parse::<f64>().map(f64::is_finite).unwrap_or(false))
}

/// Builds a validated [`Task`] from raw records and a role schema.
pub fn build_task(records: &RecordTable, schema: &TaskSchema) -> Result<Task> {
    if let Some(i) = records.rows.iter().position(|r| r.len() != records.headers.len()) {
        return Err(Error::Parse {
            line: i + 2,
            message: format!("expected {} fields", records.headers.len()),
        });
    }
    let response = schema.response.as_ref().ok_or(Error::MissingResponse)?;
    let find = |role: &'static str, name: &str| {
        records.column_index(name).ok_or_else(|| Error::MissingColumn {
            role,
            column: name.to_string(),
        })
    };
    let resp_j = find("response", response)?;
    let x_j = find("coordinate", &schema.coords.0)?;
    let y_j = find("coordinate", &schema.coords.1)?;
    let xs = parse_numeric(&schema.coords.0, &records.column(x_j))?;
    let ys = parse_numeric(&schema.coords.1, &records.column(y_j))?;
    let coords: Vec<[f64; 2]> = xs.into_iter().zip(ys).map(|(x, y)| [x, y]).collect();

    let raw_resp = records.column(resp_j);
    let categorical = match schema.response_kind {
        ResponseKind::Categorical => true,
        ResponseKind::Numeric => false,
        ResponseKind::Auto => schema.positive_label.is_some() || !all_numeric(&raw_resp),
    };
    let resp = if categorical {
        Response::Categorical(raw_resp.iter().map(|s| s.trim().to_string()).collect())
    } else {
        Response::Numeric(parse_numeric(response, &raw_resp)?)
    };

    let mut b = TaskBuilder::new(schema.id.clone(), response.clone(), resp, coords)
        .coord_names(schema.coords.0.clone(), schema.coords.1.clone());
    if let Some(pos) = &schema.positive_label {
        b = b.positive_label(pos.clone());
    }

    let mut role_cols: Vec<&str> = vec![response, &schema.coords.0, &schema.coords.1];
    if let Some(t) = &schema.time {
        let j = find("time", t)?;
        b = b.time_column(TimeColumn::parse(t, &records.column(j))?);
        role_cols.push(t);
    }
    if let Some(l) = &schema.location {
        let j = find("location", l)?;
        b = b.location(l.clone(), records.column(j));
        role_cols.push(l);
    }
    if let Some(g) = &schema.group {
        let j = find("group", g)?;
        b = b.group(g.clone(), records.column(j));
        role_cols.push(g);
    }
    let mut dedup = BTreeSet::new();
    for c in &role_cols {
        if !dedup.insert(*c) {
            return Err(Error::DuplicateRole(c.to_string(), "multiple"));
        }
    }

    let explicit: Option<BTreeSet<&str>> = schema
        .features
        .as_ref()
        .map(|f| f.iter().map(String::as_str).collect());
    if let Some(list) = &schema.features {
        for f in list {
            find("feature", f)?;
            if role_cols.contains(&f.as_str()) {
                return Err(Error::DuplicateRole(f.clone(), "feature"));
            }
        }
    }

    for (j, name) in records.headers.iter().enumerate() {
        let is_coord = j == x_j || j == y_j;
        if is_coord {
            if schema.coords_as_features {
                b = b.feature(name.clone(), parse_numeric(name, &records.column(j))?);
            }
            continue;
        }
        if role_cols.contains(&name.as_str()) {
            continue;
        }
        let raw = records.column(j);
        match &explicit {
            Some(set) if set.contains(name.as_str()) => b = b.feature(name.clone(), parse_numeric(name, &raw)?),
            Some(_) => b = b.extra(name.clone(), raw),
            None if all_numeric(&raw) => b = b.feature(name.clone(), parse_numeric(name, &raw)?),
            None => b = b.extra(name.clone(), raw),
        }
    }
    b.coords_as_features(schema.coords_as_features).build()
}
