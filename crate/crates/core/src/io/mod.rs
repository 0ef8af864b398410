//! Files in and out: run configuration, CSV snapshots and tables, SVG
//! plots, and the JSON run manifest.

pub mod config;
pub mod manifest;
pub mod snapshot;
pub mod svg;

pub use config::{parse_config, parse_config_str, RunConfig};
pub use manifest::{file_sha256, sha256_hex, OutputFile, RunManifest};
pub use snapshot::{csv_shape, read_snapshots, read_table, write_snapshot, write_snapshots, write_table, SnapshotRows, Table};
pub use svg::{render_svg, svg_document, PlotKind, Series};
