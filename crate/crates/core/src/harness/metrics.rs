use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::sim::Point;

use super::eval::EvalReport;

pub const METRICS_HEADER: [&str; 5] = ["approach", "distance_m", "time_s", "error_rate_pct", "obstacles_hit"];

/// Length of the polyline through `points`.
pub fn polyline_length(points: &[Point]) -> f64 {
    points.windows(2).map(|w| w[0].distance(w[1])).sum()
}

/// Writes `metrics.csv` (one row per approach) into `dir`, plus one
/// trajectory file per run under `dir/trajectories/`. Returns the CSV path.
pub fn write_metrics(reports: &[EvalReport], dir: &Path) -> Result<PathBuf> {
    if reports.is_empty() {
        return Err(Error::InvalidArgument("no evaluation results to write".into()));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv_path = dir.join("metrics.csv");
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(METRICS_HEADER)?;
    for r in reports {
        let s = &r.summary;
        w.write_record([
            s.approach.clone(),
            s.mean_distance.to_string(),
            s.mean_time.to_string(),
            s.error_rate.to_string(),
            s.obstacles_hit.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&csv_path, e))?;

    let traj_dir = dir.join("trajectories");
    fs::create_dir_all(&traj_dir).map_err(|e| Error::io(&traj_dir, e))?;
    for r in reports {
        for run in &r.runs {
            let name = format!(
                "{}_goal{:02}_attempt{:02}.csv",
                sanitize(&run.approach),
                run.goal_index,
                run.attempt
            );
            let path = traj_dir.join(name);
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["x", "y"])?;
            for p in &run.trajectory {
                w.write_record([p.x.to_string(), p.y.to_string()])?;
            }
            w.flush().map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(csv_path)
}

fn sanitize(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if s.is_empty() {
        "approach".into()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polyline_of_square() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        assert_eq!(polyline_length(&pts), 3.0);
        assert_eq!(polyline_length(&pts[..1]), 0.0);
    }

    #[test]
    fn sanitized_names() {
        assert_eq!(sanitize("dqn semantic/v1"), "dqn_semantic_v1");
        assert_eq!(sanitize(""), "approach");
    }
}
