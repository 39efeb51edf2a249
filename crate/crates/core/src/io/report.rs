//! Comparison tables and plain columnar plot data.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::facets::{facet_trajectory, FacetTrajectoryRow};
use crate::graph::MonotoneGraph;
use crate::oracles::{OracleSolution, Provenance};
use crate::solver::TimeSeries;
use crate::verify::InvariantReport;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRow {
    pub t: f64,
    pub l2_error: Option<f64>,
    pub linf_error: Option<f64>,
    pub energy: f64,
    pub bv: f64,
    pub min_second_difference: f64,
    pub max_abs_flux: f64,
    /// Measured minus predicted facet width, facet-law oracle only.
    pub facet_width_error: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub facets: Vec<FacetTrajectoryRow>,
    pub invariants: Vec<InvariantReport>,
    pub oracle: Option<Provenance>,
}

/// Per-snapshot diagnostics, errors against `oracle` when given, and the facet
/// trajectory when every snapshot is convex.
pub fn report(
    series: &TimeSeries,
    graph: &MonotoneGraph,
    oracle: Option<&OracleSolution>,
    invariants: Vec<InvariantReport>,
) -> Result<Report> {
    let facets = if graph.jump_points().is_empty() {
        Vec::new()
    } else {
        facet_trajectory(series, graph, None).unwrap_or_default()
    };
    let n = series.nodes();
    let mut rows = Vec::with_capacity(series.len());
    for s in &series.snapshots {
        let (mut l2, mut linf, mut width) = (None, None, None);
        if let Some(o) = oracle {
            let exact = o.sample(n, s.t)?;
            l2 = Some(s.u.l2_distance(&exact));
            linf = Some(s.u.max_distance(&exact));
            if let Some((lo, hi)) = o.facet(s.t) {
                let c = 0.5 * (lo + hi);
                width = facets
                    .iter()
                    .find(|f| f.t == s.t && f.xi_minus <= c && f.xi_plus >= c)
                    .map(|f| (f.xi_plus - f.xi_minus) - (hi - lo));
            }
        }
        rows.push(ReportRow {
            t: s.t,
            l2_error: l2,
            linf_error: linf,
            energy: s.diagnostics.energy,
            bv: s.diagnostics.bv,
            min_second_difference: s.diagnostics.min_second_difference,
            max_abs_flux: s.diagnostics.max_abs_flux,
            facet_width_error: width,
        });
    }
    Ok(Report { rows, facets, invariants, oracle: oracle.map(|o| o.provenance()) })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.6e}"))
}

impl Report {
    /// Human-readable table; at most `max_rows` evenly spaced snapshots.
    pub fn to_text(&self, max_rows: usize) -> String {
        let mut out = String::new();
        if let Some(p) = self.oracle {
            let _ = writeln!(out, "oracle: {}", p.as_str());
        }
        let _ = writeln!(
            out,
            "{:>12} {:>14} {:>14} {:>14} {:>14} {:>14} {:>14} {:>14}",
            "t", "l2_err", "linf_err", "energy", "bv", "min_d2u", "max|omega|", "width_err"
        );
        let stride = self.rows.len().div_ceil(max_rows.max(1)).max(1);
        for (i, r) in self.rows.iter().enumerate() {
            if i % stride != 0 && i + 1 != self.rows.len() {
                continue;
            }
            let _ = writeln!(
                out,
                "{:>12.6} {:>14} {:>14} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e} {:>14}",
                r.t,
                opt(r.l2_error),
                opt(r.linf_error),
                r.energy,
                r.bv,
                r.min_second_difference,
                r.max_abs_flux,
                opt(r.facet_width_error),
            );
        }
        if !self.invariants.is_empty() {
            let _ = writeln!(out);
            out.push_str(&invariant_table(&self.invariants));
        }
        out
    }

    /// `diagnostics.dat` and, when facets exist, `facets.dat` in `dir`.
    pub fn write_plot_data(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut d = String::from("# t l2_err linf_err energy bv min_d2u max_abs_omega width_err\n");
        for r in &self.rows {
            let _ = writeln!(
                d,
                "{} {} {} {} {} {} {} {}",
                r.t,
                r.l2_error.unwrap_or(f64::NAN),
                r.linf_error.unwrap_or(f64::NAN),
                r.energy,
                r.bv,
                r.min_second_difference,
                r.max_abs_flux,
                r.facet_width_error.unwrap_or(f64::NAN)
            );
        }
        fs::write(dir.join("diagnostics.dat"), d)?;
        if !self.facets.is_empty() {
            fs::write(dir.join("facets.dat"), facet_table(&self.facets, ' '))?;
        }
        Ok(())
    }
}

/// Facet trajectory with columns
/// `t theta xi_minus xi_plus a b speed_predicted speed_measured`.
pub fn facet_table(rows: &[FacetTrajectoryRow], sep: char) -> String {
    let mut out = ["t", "theta", "xi_minus", "xi_plus", "a", "b", "speed_predicted", "speed_measured"]
        .join(&sep.to_string());
    out.push('\n');
    for r in rows {
        let fields = [
            r.t,
            r.theta,
            r.xi_minus,
            r.xi_plus,
            r.a,
            r.b,
            r.speed_predicted,
            r.speed_measured.unwrap_or(f64::NAN),
        ];
        let line: Vec<String> = fields.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(&sep.to_string()));
        out.push('\n');
    }
    out
}

pub fn invariant_table(reports: &[InvariantReport]) -> String {
    let mut out = format!("{:<12} {:>8} {:>14} {:>10}\n", "invariant", "status", "worst", "tol");
    for r in reports {
        let status = match &r.verdict {
            crate::verify::Verdict::Pass => "pass",
            crate::verify::Verdict::Fail => "FAIL",
            crate::verify::Verdict::HypothesisViolated(_) => "n/a",
        };
        let _ = writeln!(out, "{:<12} {:>8} {:>14.6e} {:>10.1e}", r.name, status, r.worst, r.tolerance);
        if let crate::verify::Verdict::HypothesisViolated(why) = &r.verdict {
            let _ = writeln!(out, "    hypothesis not met: {why}");
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareRow {
    pub t: f64,
    pub l2: f64,
    pub linf: f64,
}

/// Difference norms of two runs on the same grid, at their common times.
pub fn compare(a: &TimeSeries, b: &TimeSeries) -> Result<Vec<CompareRow>> {
    if a.nodes() != b.nodes() {
        return Err(Error::GridMismatch(format!(
            "runs have {} and {} nodes",
            a.nodes(),
            b.nodes()
        )));
    }
    let tol = 1e-9 * a.dt.min(b.dt);
    let rows: Vec<CompareRow> = a
        .snapshots
        .iter()
        .filter_map(|p| {
            let q = b.at(p.t);
            ((q.t - p.t).abs() <= tol).then(|| CompareRow {
                t: p.t,
                l2: p.u.l2_distance(&q.u),
                linf: p.u.max_distance(&q.u),
            })
        })
        .collect();
    if rows.is_empty() {
        return Err(Error::GridMismatch("runs share no snapshot times".into()));
    }
    Ok(rows)
}

pub fn compare_table(rows: &[CompareRow]) -> String {
    let mut out = format!("{:>12} {:>14} {:>14}\n", "t", "l2", "linf");
    for r in rows {
        let _ = writeln!(out, "{:>12.6} {:>14.6e} {:>14.6e}", r.t, r.l2, r.linf);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::schema::preset_scenario;
    use crate::oracles::tv_vee_facet;
    use crate::solver::run;

    #[test]
    fn vee_report_has_a_width_column() {
        let mut s = preset_scenario("tv_vee").unwrap();
        s.t_final = 0.01;
        let out = run(&s).unwrap();
        let o = tv_vee_facet(0.5).unwrap();
        let r = report(&out.series, &s.graph, Some(&o), Vec::new()).unwrap();
        let last = r.rows.last().unwrap();
        assert!(last.facet_width_error.unwrap().abs() < 0.01);
        assert!(last.l2_error.unwrap() < 0.01);
        assert!(r.to_text(10).contains("width_err"));
        let dir = tempfile::tempdir().unwrap();
        r.write_plot_data(dir.path()).unwrap();
        assert!(dir.path().join("facets.dat").exists());
    }

    #[test]
    fn report_without_oracle() {
        let mut s = preset_scenario("heat").unwrap();
        s.t_final = 0.001;
        let out = run(&s).unwrap();
        let r = report(&out.series, &s.graph, None, Vec::new()).unwrap();
        assert!(r.rows.iter().all(|x| x.l2_error.is_none()));
        assert!(r.facets.is_empty());
    }

    #[test]
    fn compare_needs_matching_grids() {
        let mut s = preset_scenario("tv_vee").unwrap();
        s.t_final = 0.002;
        let a = run(&s).unwrap().series;
        let rows = compare(&a, &a).unwrap();
        assert!(rows.iter().all(|r| r.l2 == 0.0));
        s.n = 51;
        let b = run(&s).unwrap().series;
        assert!(compare(&a, &b).is_err());
    }
}
