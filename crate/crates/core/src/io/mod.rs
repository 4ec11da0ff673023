//! Task ingestion and export (CSV, GeoJSON) and SVG rendering of partitions.

mod geojson;
mod svg;
mod table;

pub use geojson::{load_task_geojson, read_records_geojson, records_from_geojson};
pub use svg::{render_partition_svg, write_partition_svg, PlotSpec, RoleColors};
pub use table::{
    format_f64, load_task_csv, read_records_csv, records_from_csv, schema_for, task_to_csv, task_to_records,
    write_task_csv,
};
