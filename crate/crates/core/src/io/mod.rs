//! Scenario files, run archives and reports.

pub mod report;
pub mod schema;
pub mod series;

pub use report::{compare, report, CompareRow, Report};
pub use schema::{echo_scenario, fingerprint, parse_scenario, preset_names, preset_scenario};
pub use series::{emit_series, load_series, RunArchive};
