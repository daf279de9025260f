//! Artifact writers. CSV numbers carry 17 significant digits; JSON uses the
//! shortest representation that round-trips.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::classify::{category_of, Bracket, Category, ClassifierTolerances, SweepTable};
use crate::error::Result;
use crate::evolve::{Chart, EventKind, Trajectory};
use crate::geometry::ProblemParams;

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// `t,x,y` rows of one snapshot.
pub fn snapshot_csv(t: f64, curve: &crate::geometry::SampledCurve<f64>) -> String {
    let mut s = String::from("t,x,y\n");
    let t = num(t);
    for p in curve.points() {
        writeln!(s, "{t},{},{}", num(p[0]), num(p[1])).expect("write to String");
    }
    s
}

pub const DIAGNOSTICS_HEADER: &str =
    "t,L,S,lyapunov,Z,sgn_word,kappa_dev_P,tangent_y_P,chart,E,dissipation,kappa_dev_Q,min_y,dist_lower,dist_upper";

pub fn diagnostics_csv(traj: &Trajectory<f64>) -> String {
    let mut s = String::from(DIAGNOSTICS_HEADER);
    s.push('\n');
    for d in &traj.diagnostics {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            num(d.t),
            num(d.length),
            num(d.area),
            opt(d.lyapunov),
            d.z.map(|z| z.to_string()).unwrap_or_default(),
            d.sgn.as_ref().map(|w| w.to_string()).unwrap_or_default(),
            num(d.kappa_dev_p),
            num(d.tangent_y_p),
            d.chart,
            num(d.energy),
            num(d.dissipation),
            num(d.kappa_dev_q),
            num(d.min_y),
            num(d.dist_lower),
            opt(d.dist_upper),
        )
        .expect("write to String");
    }
    s
}

/// Contents of `summary.json`. Contains nothing run-time dependent, so equal
/// configurations give byte-identical files.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub force: f64,
    pub half_span: f64,
    pub grid_n: usize,
    pub sigma: f64,
    pub category: Category,
    pub undetermined: bool,
    pub blowup: bool,
    pub event: EventKind,
    pub t_event: f64,
    pub event_detail: String,
    pub final_chart: Chart,
    pub final_sgn: Option<String>,
    pub final_z: Option<usize>,
    pub final_dist_lower: f64,
    pub final_dist_upper: Option<f64>,
    pub final_energy: f64,
    pub final_dissipation: f64,
    pub max_step_energy_increase: f64,
    pub chart_switches: Vec<(f64, Chart)>,
    pub steps: usize,
    pub samples: usize,
    pub snapshots: usize,
    pub tolerances: ClassifierTolerances<f64>,
}

impl Summary {
    pub fn of(traj: &Trajectory<f64>, tols: &ClassifierTolerances<f64>) -> Self {
        let (category, blowup) = category_of(traj);
        let last = traj.final_record();
        let p: &ProblemParams<f64> = &traj.params;
        Summary {
            force: p.force(),
            half_span: p.half_span(),
            grid_n: p.grid_n(),
            sigma: traj.sigma,
            category,
            undetermined: category == Category::Undetermined,
            blowup,
            event: traj.event.kind,
            t_event: traj.event.t,
            event_detail: traj.event.detail.clone(),
            final_chart: last.chart,
            final_sgn: traj.final_sgn().map(|w| w.to_string()),
            final_z: traj.final_sgn().map(|w| w.z()),
            final_dist_lower: last.dist_lower,
            final_dist_upper: last.dist_upper,
            final_energy: last.energy,
            final_dissipation: last.dissipation,
            max_step_energy_increase: traj.max_step_energy_increase,
            chart_switches: traj.chart_switches.clone(),
            steps: traj.steps,
            samples: traj.diagnostics.len(),
            snapshots: traj.snapshots.len(),
            tolerances: *tols,
        }
    }
}

fn to_json<S: Serialize>(v: &S) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

/// Writes `snapshots_NNNN.csv`, `diagnostics.csv` and `summary.json` into `dir`
/// and returns the summary.
pub fn write_run(dir: &Path, traj: &Trajectory<f64>, tols: &ClassifierTolerances<f64>) -> Result<Summary> {
    fs::create_dir_all(dir)?;
    for (k, snap) in traj.snapshots.iter().enumerate() {
        fs::write(dir.join(format!("snapshots_{k:04}.csv")), snapshot_csv(snap.t, &snap.curve))?;
    }
    fs::write(dir.join("diagnostics.csv"), diagnostics_csv(traj))?;
    let summary = Summary::of(traj, tols);
    fs::write(dir.join("summary.json"), to_json(&summary))?;
    Ok(summary)
}

pub fn sweep_csv(table: &SweepTable<f64>) -> String {
    let mut s = String::from("sigma,category,t_event,final_sgn,event,blowup\n");
    for r in &table.rows {
        let word = r.final_sgn.as_ref().map(|w| w.to_string()).unwrap_or_default();
        writeln!(s, "{},{},{},{},{:?},{}", num(r.sigma), r.category, num(r.t_event), word, r.event, r.blowup)
            .expect("write to String");
    }
    s
}

pub fn write_sweep(dir: &Path, table: &SweepTable<f64>) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join("sweep.csv");
    fs::write(&path, sweep_csv(table))?;
    Ok(path)
}

pub fn write_bracket(dir: &Path, bracket: &Bracket<f64>) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join("bracket.json");
    fs::write(&path, to_json(bracket))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SampledCurve;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, std::f64::consts::PI] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(opt(None), "");
    }

    #[test]
    fn snapshot_has_header_and_rows() {
        let c = SampledCurve::new(vec![[-0.5, 0.0], [0.0, 0.25], [0.5, 0.0]]).unwrap();
        let s = snapshot_csv(0.5, &c);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "t,x,y");
        assert_eq!(lines.len(), 4);
        let cols: Vec<f64> = lines[2].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(cols, vec![0.5, 0.0, 0.25]);
    }
}
