//! Time series on disk: one CSV row per node and snapshot, plus a JSON summary.
//!
//! CSV columns are `t, x, u, omega_mid, slope`. `omega_mid` and `slope` belong
//! to the cell to the right of the node; the last node repeats the last cell.
//! Floats are written in shortest round-trip form, so loading is exact.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::io::schema::{echo_scenario, fingerprint, parse_scenario};
use crate::scenario::{Method, Scenario};
use crate::solver::{ConvergenceReport, Diagnostics, FluxField, RunOutput, Snapshot, TimeSeries};

pub const FORMAT: &str = "monoflow-series";
pub const FORMAT_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const SERIES_CSV: &str = "series.csv";
pub const SERIES_JSON: &str = "series.json";
pub const SCENARIO_TOML: &str = "scenario.toml";
pub const RUN_JSON: &str = "run.json";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct SnapshotMeta {
    t: f64,
    energy: f64,
    bv: f64,
    min_second_difference: f64,
    max_abs_flux: f64,
    flux_flagged: bool,
    flux_max_violation: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct SeriesSummary {
    format: String,
    version: u32,
    tool_version: String,
    method: String,
    epsilon: Option<f64>,
    dt: f64,
    nodes: usize,
    rows: usize,
    csv_bytes: u64,
    snapshots: Vec<SnapshotMeta>,
}

#[derive(Debug, Serialize)]
struct CsvRow {
    t: f64,
    x: f64,
    u: f64,
    omega_mid: f64,
    slope: f64,
}

fn csv_bytes(series: &TimeSeries) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for s in &series.snapshots {
        let slopes = s.u.slopes();
        let n = s.u.len();
        for (i, &u) in s.u.values().iter().enumerate() {
            let j = i.min(n - 2);
            w.serialize(CsvRow {
                t: s.t,
                x: s.u.x(i),
                u,
                omega_mid: s.flux.values[j],
                slope: slopes[j],
            })?;
        }
    }
    w.into_inner()
        .map_err(|e| Error::Archive(format!("flushing CSV: {e}")))
}

/// Writes `series.csv` and `series.json` into `dir` (created if needed).
pub fn emit_series(series: &TimeSeries, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let bytes = csv_bytes(series)?;
    let summary = SeriesSummary {
        format: FORMAT.into(),
        version: FORMAT_VERSION,
        tool_version: TOOL_VERSION.into(),
        method: series.method.as_str().into(),
        epsilon: series.epsilon,
        dt: series.dt,
        nodes: series.nodes(),
        rows: series.len() * series.nodes(),
        csv_bytes: bytes.len() as u64,
        snapshots: series
            .snapshots
            .iter()
            .map(|s| SnapshotMeta {
                t: s.t,
                energy: s.diagnostics.energy,
                bv: s.diagnostics.bv,
                min_second_difference: s.diagnostics.min_second_difference,
                max_abs_flux: s.diagnostics.max_abs_flux,
                flux_flagged: s.flux.flagged,
                flux_max_violation: s.flux.max_violation,
            })
            .collect(),
    };
    fs::write(dir.join(SERIES_CSV), &bytes)?;
    fs::write(dir.join(SERIES_JSON), serde_json::to_string_pretty(&summary)?)?;
    Ok(())
}

fn method_named(s: &str) -> Result<Method> {
    match s {
        "prox" => Ok(Method::Prox),
        "regularized" => Ok(Method::Regularized),
        _ => Err(Error::Archive(format!("unknown method `{s}` in summary"))),
    }
}

/// Reads a series written by [`emit_series`].
pub fn load_series(dir: &Path) -> Result<TimeSeries> {
    let summary: SeriesSummary = serde_json::from_str(&fs::read_to_string(dir.join(SERIES_JSON))?)?;
    if summary.format != FORMAT || summary.version != FORMAT_VERSION {
        return Err(Error::Archive(format!(
            "unsupported series format {} v{} (this build reads {FORMAT} v{FORMAT_VERSION})",
            summary.format, summary.version
        )));
    }
    let csv_path = dir.join(SERIES_CSV);
    let bytes = fs::read(&csv_path)?;
    let truncated = |offset: u64| Error::Truncated {
        path: csv_path.display().to_string(),
        offset,
    };
    if (bytes.len() as u64) < summary.csv_bytes {
        return Err(truncated(bytes.len() as u64));
    }
    let n = summary.nodes;
    if n < 3 {
        return Err(Error::Archive(format!("summary lists {n} nodes")));
    }
    let mut reader = csv::Reader::from_reader(bytes.as_slice());
    let mut rows: Vec<[f64; 5]> = Vec::with_capacity(summary.rows);
    let mut record = csv::StringRecord::new();
    loop {
        let at = reader.position().byte();
        match reader.read_record(&mut record) {
            Ok(true) => {}
            Ok(false) => break,
            Err(_) => return Err(truncated(at)),
        }
        let mut row = [0.0; 5];
        for (k, field) in record.iter().enumerate().take(5) {
            row[k] = field
                .parse()
                .map_err(|_| Error::Archive(format!("bad number `{field}` at byte {at}")))?;
        }
        if record.len() != 5 {
            return Err(truncated(at));
        }
        rows.push(row);
    }
    if rows.len() != summary.rows || rows.len() != n * summary.snapshots.len() {
        return Err(truncated(reader.position().byte()));
    }
    let mut series = TimeSeries::new(method_named(&summary.method)?, summary.epsilon, summary.dt);
    for (chunk, meta) in rows.chunks(n).zip(&summary.snapshots) {
        let u = GridFunction::new(chunk.iter().map(|r| r[2]).collect())?;
        let flux = FluxField {
            values: chunk[..n - 1].iter().map(|r| r[3]).collect(),
            flagged: meta.flux_flagged,
            max_violation: meta.flux_max_violation,
        };
        series.push(Snapshot {
            t: chunk[0][0],
            u,
            flux,
            diagnostics: Diagnostics {
                energy: meta.energy,
                bv: meta.bv,
                min_second_difference: meta.min_second_difference,
                max_abs_flux: meta.max_abs_flux,
                flux_flagged: meta.flux_flagged,
            },
        })?;
    }
    Ok(series)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct RunMeta {
    tool_version: String,
    fingerprint: String,
    created_unix: u64,
    wall_seconds: f64,
    convergence: Option<Vec<(f64, f64)>>,
    fitted_order: Option<f64>,
}

/// A self-contained run: resolved scenario, series and run metadata.
#[derive(Debug, Clone)]
pub struct RunArchive {
    pub scenario: Scenario,
    pub series: TimeSeries,
    pub convergence: Option<ConvergenceReport>,
    pub fingerprint: String,
    pub wall_seconds: f64,
    pub created_unix: u64,
}

impl RunArchive {
    pub fn new(scenario: Scenario, output: RunOutput, wall_seconds: f64) -> Self {
        let created_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        RunArchive {
            fingerprint: fingerprint(&scenario),
            scenario,
            series: output.series,
            convergence: output.convergence,
            wall_seconds,
            created_unix,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(SCENARIO_TOML), echo_scenario(&self.scenario))?;
        emit_series(&self.series, dir)?;
        let meta = RunMeta {
            tool_version: TOOL_VERSION.into(),
            fingerprint: self.fingerprint.clone(),
            created_unix: self.created_unix,
            wall_seconds: self.wall_seconds,
            convergence: self.convergence.as_ref().map(|c| c.entries.clone()),
            fitted_order: self.convergence.as_ref().and_then(|c| c.fitted_order()),
        };
        fs::write(dir.join(RUN_JSON), serde_json::to_string_pretty(&meta)?)?;
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let text = fs::read_to_string(dir.join(SCENARIO_TOML))?;
        let scenario = parse_scenario(&text)?;
        let meta: RunMeta = serde_json::from_str(&fs::read_to_string(dir.join(RUN_JSON))?)?;
        if meta.fingerprint != fingerprint(&scenario) {
            return Err(Error::Archive(format!(
                "{} does not match the recorded fingerprint",
                dir.join(SCENARIO_TOML).display()
            )));
        }
        Ok(RunArchive {
            series: load_series(dir)?,
            convergence: meta.convergence.map(|entries| ConvergenceReport { entries }),
            fingerprint: meta.fingerprint,
            wall_seconds: meta.wall_seconds,
            created_unix: meta.created_unix,
            scenario,
        })
    }
}

/// `dir/series.csv`.
pub fn csv_path(dir: &Path) -> PathBuf {
    dir.join(SERIES_CSV)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::schema::preset_scenario;
    use crate::solver::run;

    fn small(name: &str) -> Scenario {
        let mut s = preset_scenario(name).unwrap();
        s.n = 21;
        s.dt = 1e-3;
        s.t_final = 5e-3;
        s
    }

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["heat", "tv_vee", "two_jump"] {
            let s = small(name);
            let out = run(&s).unwrap();
            let d = dir.path().join(name);
            emit_series(&out.series, &d).unwrap();
            let back = load_series(&d).unwrap();
            assert_eq!(back, out.series);
        }
    }

    #[test]
    fn csv_columns() {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&small("heat")).unwrap();
        emit_series(&out.series, dir.path()).unwrap();
        let text = fs::read_to_string(csv_path(dir.path())).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,x,u,omega_mid,slope"));
        for l in lines {
            assert!(l.split(',').all(|v| v.parse::<f64>().unwrap().is_finite()));
        }
    }

    #[test]
    fn truncation_reports_the_offset() {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&small("tv_vee")).unwrap();
        emit_series(&out.series, dir.path()).unwrap();
        let p = csv_path(dir.path());
        let bytes = fs::read(&p).unwrap();
        fs::write(&p, &bytes[..bytes.len() - 37]).unwrap();
        match load_series(dir.path()) {
            Err(Error::Truncated { offset, .. }) => assert_eq!(offset, (bytes.len() - 37) as u64),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&small("heat")).unwrap();
        emit_series(&out.series, dir.path()).unwrap();
        let p = dir.path().join(SERIES_JSON);
        let text = fs::read_to_string(&p).unwrap().replace("\"version\": 1", "\"version\": 9");
        fs::write(&p, text).unwrap();
        assert!(matches!(load_series(dir.path()), Err(Error::Archive(_))));
    }

    #[test]
    fn archive_reproduces_the_run() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = small("tv_vee");
        s.method = Method::Regularized;
        s.epsilon_schedule = vec![0.1, 0.05];
        let out = run(&s).unwrap();
        let a = RunArchive::new(s, out, 0.0);
        a.write(dir.path()).unwrap();
        let b = RunArchive::read(dir.path()).unwrap();
        assert_eq!(b.series, a.series);
        assert_eq!(b.convergence, a.convergence);
        let again = run(&b.scenario).unwrap();
        assert_eq!(again.series, a.series);
    }
}
