use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::BBox;
use crate::plan::{Fold, ResamplingPlan};
use crate::task::Task;

#[derive(Debug, Clone, PartialEq)]
pub struct RoleColors {
    pub test: String,
    pub train: String,
    pub omitted: String,
}

impl Default for RoleColors {
    fn default() -> Self {
        RoleColors {
            test: "#d7301f".into(),
            train: "#2b8cbe".into(),
            omitted: "#bdbdbd".into(),
        }
    }
}

/// What to draw. Empty `folds` means every fold of `repeat`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub repeat: usize,
    pub folds: Vec<usize>,
    pub point_size: f64,
    pub colors: RoleColors,
    pub show_blocks: bool,
    /// One panel per (fold, time key) instead of per fold.
    pub facet_by_time: bool,
}

impl Default for PlotSpec {
    fn default() -> Self {
        PlotSpec {
            repeat: 1,
            folds: Vec::new(),
            point_size: 3.0,
            colors: RoleColors::default(),
            show_blocks: false,
            facet_by_time: false,
        }
    }
}

const PANEL: f64 = 320.0;
const MARGIN: f64 = 24.0;
const TITLE: f64 = 20.0;
const LEGEND: f64 = 28.0;

struct Panel<'a> {
    fold: &'a Fold,
    title: String,
    rows: Vec<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum RoleOf {
    Train,
    Omitted,
    Test,
}

impl RoleOf {
    fn class(self) -> &'static str {
        match self {
            RoleOf::Test => "test",
            RoleOf::Train => "train",
            RoleOf::Omitted => "omitted",
        }
    }
}

fn roles(fold: &Fold, n: usize) -> Vec<RoleOf> {
    let mut r = vec![RoleOf::Omitted; n];
    for &i in &fold.train {
        r[i] = RoleOf::Train;
    }
    for &i in &fold.test {
        r[i] = RoleOf::Test;
    }
    r
}

/// Renders the selected folds as small multiples with a shared legend.
pub fn render_partition_svg(task: &Task, plan: &ResamplingPlan, spec: &PlotSpec) -> Result<String> {
    if plan.n != task.n() {
        return Err(Error::PlanTaskMismatch(format!(
            "plan covers {} observations, task has {}",
            plan.n,
            task.n()
        )));
    }
    let in_repeat: Vec<&Fold> = plan.folds_of_repeat(spec.repeat).collect();
    if in_repeat.is_empty() {
        return Err(Error::InvalidParameter(format!("plan has no repeat {}", spec.repeat)));
    }
    let chosen: Vec<&Fold> = if spec.folds.is_empty() {
        in_repeat
    } else {
        spec.folds
            .iter()
            .map(|&id| {
                in_repeat
                    .iter()
                    .find(|f| f.id == id)
                    .copied()
                    .ok_or_else(|| Error::InvalidParameter(format!("fold {id} not in repeat {}", spec.repeat)))
            })
            .collect::<Result<_>>()?
    };

    let all: Vec<usize> = (0..task.n()).collect();
    let mut panels = Vec::new();
    for fold in &chosen {
        match (spec.facet_by_time, task.time()) {
            (true, Some(t)) => {
                let mut keys: Vec<i64> = t.keys.clone();
                keys.sort_unstable();
                keys.dedup();
                for k in keys {
                    let rows: Vec<usize> = all.iter().copied().filter(|&i| t.keys[i] == k).collect();
                    let label = t.format(rows[0]);
                    panels.push(Panel {
                        fold,
                        title: format!("Fold {}, {} {}", fold.id, t.name, label),
                        rows,
                    });
                }
            }
            _ => panels.push(Panel {
                fold,
                title: format!("Fold {}", fold.id),
                rows: all.clone(),
            }),
        }
    }

    let bbox = BBox::of(task.coords());
    let (w, h) = (bbox.width().max(f64::EPSILON), bbox.height().max(f64::EPSILON));
    let scale = (PANEL - 2.0 * MARGIN) / w.max(h);
    let (pw, ph) = (w * scale + 2.0 * MARGIN, h * scale + 2.0 * MARGIN + TITLE);
    let ncol = (panels.len() as f64).sqrt().ceil() as usize;
    let nrow = panels.len().div_ceil(ncol);
    let width = pw * ncol as f64;
    let height = ph * nrow as f64 + LEGEND;

    let mut present = [false; 3];
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.1}" height="{height:.1}" viewBox="0 0 {width:.1} {height:.1}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    for (p, panel) in panels.iter().enumerate() {
        let ox = (p % ncol) as f64 * pw;
        let oy = (p / ncol) as f64 * ph;
        let to_px = |c: [f64; 2]| {
            (
                ox + MARGIN + (c[0] - bbox.min[0]) * scale,
                oy + TITLE + MARGIN + (bbox.max[1] - c[1]) * scale,
            )
        };
        writeln!(out, r#"<g class="panel" id="panel-{}">"#, p + 1).unwrap();
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13">{}</text>"#,
            ox + MARGIN,
            oy + TITLE,
            escape(&panel.title)
        )
        .unwrap();
        if spec.show_blocks {
            if let Some(outlines) = plan.blocks.as_ref().and_then(|b| b.geometry.as_ref()) {
                for o in outlines {
                    let pts: Vec<String> = o
                        .corners
                        .iter()
                        .map(|&c| {
                            let (x, y) = to_px(c);
                            format!("{x:.2},{y:.2}")
                        })
                        .collect();
                    writeln!(
                        out,
                        r#"<polygon class="block" data-block="{}" points="{}" fill="none" stroke="black" stroke-width="0.8"/>"#,
                        o.block,
                        pts.join(" ")
                    )
                    .unwrap();
                }
            }
        }
        let role = roles(panel.fold, task.n());
        let mut rows = panel.rows.clone();
        // Draw test points last so they stay visible.
        rows.sort_by_key(|&i| (role[i], i));
        for i in rows {
            let r = role[i];
            present[r as usize] = true;
            let color = match r {
                RoleOf::Test => &spec.colors.test,
                RoleOf::Train => &spec.colors.train,
                RoleOf::Omitted => &spec.colors.omitted,
            };
            let (x, y) = to_px(task.coords()[i]);
            writeln!(
                out,
                r#"<circle class="{}" cx="{x:.2}" cy="{y:.2}" r="{:.2}" fill="{}"/>"#,
                r.class(),
                spec.point_size,
                escape(color)
            )
            .unwrap();
        }
        writeln!(out, "</g>").unwrap();
    }

    writeln!(out, r#"<g class="legend">"#).unwrap();
    let mut lx = MARGIN;
    let ly = height - LEGEND / 2.0;
    for (r, color) in [
        (RoleOf::Test, &spec.colors.test),
        (RoleOf::Train, &spec.colors.train),
        (RoleOf::Omitted, &spec.colors.omitted),
    ] {
        if !present[r as usize] {
            continue;
        }
        writeln!(
            out,
            r#"<g class="legend-entry"><circle cx="{lx:.2}" cy="{ly:.2}" r="5" fill="{}"/><text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{}</text></g>"#,
            escape(color),
            lx + 9.0,
            ly + 4.0,
            r.class()
        )
        .unwrap();
        lx += 90.0;
    }
    writeln!(out, "</g>").unwrap();
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn write_partition_svg(task: &Task, plan: &ResamplingPlan, spec: &PlotSpec, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, render_partition_svg(task, plan, spec)?)?;
    Ok(())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
