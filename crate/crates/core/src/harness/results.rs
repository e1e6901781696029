//! Experiment outputs: metric rows and trajectory points, with CSV
//! persistence.
//!
//! Rows carry their sweep coordinates by name, so a results file alone is
//! enough to regenerate a figure.  Float formatting uses the shortest
//! round-trippable decimal form, which is deterministic and loss-free.

use crate::error::{Error, Result};
use std::io::Write;
use std::path::Path;

/// One aggregated metric at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    /// Experiment identifier (e.g. `ber`).
    pub experiment: String,
    /// Named sweep coordinates, e.g. `[("ebn0_db", 11.0), ("c_thres", 0.92)]`.
    pub sweep: Vec<(String, f64)>,
    /// Metric name (e.g. `ber`, `pd_analytic`, `rmse_m`).
    pub metric: String,
    /// Metric value.
    pub value: f64,
    /// Standard error of the value; zero for analytic (noise-free) rows.
    pub stderr: f64,
    /// Monte-Carlo sample count behind the value; zero for analytic rows.
    pub trials: u64,
}

impl ResultRow {
    /// An analytic (noise-free) row: no standard error, no trial count.
    pub fn analytic(
        experiment: &str,
        sweep: &[(&str, f64)],
        metric: &str,
        value: f64,
    ) -> Self {
        Self::measured(experiment, sweep, metric, value, 0.0, 0)
    }

    /// A Monte-Carlo row.
    pub fn measured(
        experiment: &str,
        sweep: &[(&str, f64)],
        metric: &str,
        value: f64,
        stderr: f64,
        trials: u64,
    ) -> Self {
        ResultRow {
            experiment: experiment.to_string(),
            sweep: sweep.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            metric: metric.to_string(),
            value,
            stderr,
            trials,
        }
    }
}

/// Formats a float for CSV output (shortest round-trippable form).
fn fmt(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v}")
    }
}

/// Renders rows as CSV text with the header
/// `experiment,<sweep columns>,metric,value,stderr,trials`.
///
/// All rows must share one sweep-column set (they describe one experiment).
pub fn render_results(rows: &[ResultRow]) -> Result<String> {
    let Some(first) = rows.first() else {
        return Err(Error::InvalidArgument(
            "no result rows to write".to_string(),
        ));
    };
    let columns: Vec<&str> = first.sweep.iter().map(|(k, _)| k.as_str()).collect();
    let mut out = String::new();
    out.push_str("experiment");
    for c in &columns {
        out.push(',');
        out.push_str(c);
    }
    out.push_str(",metric,value,stderr,trials\n");
    for row in rows {
        let row_cols: Vec<&str> = row.sweep.iter().map(|(k, _)| k.as_str()).collect();
        if row_cols != columns {
            return Err(Error::InvalidArgument(format!(
                "row sweep columns {row_cols:?} differ from header {columns:?}"
            )));
        }
        out.push_str(&row.experiment);
        for (_, v) in &row.sweep {
            out.push(',');
            out.push_str(&fmt(*v));
        }
        out.push(',');
        out.push_str(&row.metric);
        out.push(',');
        out.push_str(&fmt(row.value));
        out.push(',');
        out.push_str(&fmt(row.stderr));
        out.push(',');
        out.push_str(&row.trials.to_string());
        out.push('\n');
    }
    Ok(out)
}

/// Writes rows to a CSV file, creating parent directories as needed.
pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let text = render_results(rows)?;
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

/// One epoch of a tracked trajectory: truth and estimate in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub epoch: u64,
    pub true_x: f64,
    pub true_y: f64,
    pub est_x: f64,
    pub est_y: f64,
}

/// Renders a trajectory as CSV with header `epoch,true_x,true_y,est_x,est_y`.
pub fn render_trajectory(points: &[TrajectoryPoint]) -> String {
    let mut out = String::from("epoch,true_x,true_y,est_x,est_y\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            p.epoch,
            fmt(p.true_x),
            fmt(p.true_y),
            fmt(p.est_x),
            fmt(p.est_y)
        ));
    }
    out
}

/// Writes a trajectory CSV, creating parent directories as needed.
pub fn write_trajectory(path: &Path, points: &[TrajectoryPoint]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(render_trajectory(points).as_bytes())?;
    Ok(())
}
