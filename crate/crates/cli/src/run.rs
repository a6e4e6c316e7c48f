//! Executes the points of a scenario and writes their CSV files, the sweep
//! summary and the run manifest.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;
use supermode::laser::refine_threshold;
use supermode::validity::VALIDITY_WARN_THRESHOLD;
use supermode::{
    approximation_bound, classical_response, integrate_laser, inversion_series, threshold_scan, Error, LaserSetup,
    LaserTrajectory, LinearSystem, PopulationSeries, SystemParams, TimeGrid,
};

use crate::config::{Axis, Point, ScenarioConfig, ScenarioKind};

pub const MANIFEST: &str = "run.json";

/// Which artifacts a run writes besides the per-point CSV files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verb {
    Simulate,
    Sweep,
    Spectrum,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Summary {
    #[serde(rename = "dN_end")]
    pub dn_end: Option<f64>,
    pub amp_ratio: Option<f64>,
    #[serde(rename = "E_th")]
    pub e_th: Option<f64>,
    pub peak_count: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointRecord {
    pub index: usize,
    pub coords: Vec<(Axis, f64)>,
    pub params: SystemParams,
    pub t_end: f64,
    pub n_steps: usize,
    pub step: f64,
    pub validity_bound: f64,
    pub validity: &'static str,
    pub status: &'static str,
    pub message: Option<String>,
    pub blowup_time: Option<f64>,
    pub file: Option<String>,
    #[serde(flatten)]
    pub summary: Summary,
}

impl PointRecord {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub verb: Verb,
    pub config_file: Option<&'a Path>,
    pub config: &'a ScenarioConfig,
    pub validity_warn_threshold: f64,
    pub points: &'a [PointRecord],
    pub files: Vec<String>,
    pub wall_time_s: f64,
}

#[derive(Debug)]
pub struct RunReport {
    pub points: Vec<PointRecord>,
    pub files: Vec<PathBuf>,
}

impl RunReport {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| !p.ok()).count()
    }
}

/// Full double precision, fixed layout, so identical runs give identical bytes.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn validity_label(bound: f64) -> &'static str {
    if bound > VALIDITY_WARN_THRESHOLD {
        "warn"
    } else {
        "ok"
    }
}

/// Grid indices written to the CSV: every `stride`-th point plus the last.
fn row_indices(grid: &TimeGrid, rows: usize) -> Vec<usize> {
    let n = grid.n_steps();
    let stride = n.div_ceil(rows - 1).max(1);
    let mut idx: Vec<usize> = (0..=n).step_by(stride).collect();
    if idx.last() != Some(&n) {
        idx.push(n);
    }
    idx
}

/// Writes next to the target and renames, so a file is either complete or absent.
fn write_atomic(path: &Path, header: &[String], rows: impl Iterator<Item = Vec<String>>) -> io::Result<()> {
    let tmp = path.with_extension("csv.partial");
    {
        let mut w = csv::Writer::from_path(&tmp)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    fs::rename(&tmp, path)
}

const INVERSION_COLUMNS: [&str; 12] = [
    "t",
    "pop1",
    "pop2",
    "dN",
    "dN_initial",
    "dN_drive",
    "dN_noise_thermal",
    "dN_noise_optical",
    "dN_noise_thermal_np1",
    "dN_noise_thermal_n",
    "validity_bound",
    "validity",
];
const LASER_COLUMNS: [&str; 5] = ["b_s_re", "b_s_im", "p_re", "p_im", "amp_ratio"];

fn inversion_row(params: &SystemParams, series: &PopulationSeries, i: usize) -> Vec<String> {
    let t = series.time(i);
    // the corrections vanish at t = 0; the first step bounds them from above there
    let bound = approximation_bound(params, t.max(series.grid.step()));
    let parts = series.inversion_parts(i);
    vec![
        num(t),
        num(series.pop1(i)),
        num(series.pop2(i)),
        num(series.inversion(i)),
        num(parts.initial),
        num(parts.drive),
        num(parts.noise_thermal()),
        num(parts.noise_optical),
        num(parts.noise_thermal_np1),
        num(parts.noise_thermal_n),
        num(bound),
        validity_label(bound).to_string(),
    ]
}

fn laser_row(traj: &LaserTrajectory, i: usize) -> [String; 5] {
    [num(traj.b_s[i].re), num(traj.b_s[i].im), num(traj.p[i].re), num(traj.p[i].im), num(traj.amplification_at(i))]
}

fn owned(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

/// Runs one point and writes its CSV; the returned summary feeds the sweep table.
fn evaluate(cfg: &ScenarioConfig, point: &Point, path: &Path) -> Result<Summary, PointError> {
    let (params, grid) = (&point.params, &point.grid);
    if cfg.kind == ScenarioKind::Spectrum {
        let r = classical_response(params, &cfg.spectrum.deltas(), cfg.spectrum.horizon);
        if r.unstable {
            warn!("point {}: unstable pair, response taken at t = {}", point.index, cfg.spectrum.horizon);
        }
        let rows = (0..r.deltas.len()).map(|k| vec![num(r.deltas[k]), num(r.response[k]), u8::from(r.peak_flags[k]).to_string()]);
        write_atomic(path, &owned(&["Delta", "response", "peak_flag"]), rows)?;
        return Ok(Summary { peak_count: Some(r.peak_count()), ..Summary::default() });
    }

    let system = LinearSystem::new(params).with_noise_mode(cfg.noise_mode).with_signs(cfg.signs);
    let series = inversion_series(&system, grid, cfg.method)?;
    let indices = row_indices(grid, cfg.rows);
    let mut summary = Summary { dn_end: Some(series.inversion(series.last())), ..Summary::default() };

    if !cfg.kind.has_laser() {
        let rows = indices.iter().map(|&i| inversion_row(params, &series, i));
        write_atomic(path, &owned(&INVERSION_COLUMNS), rows)?;
        return Ok(summary);
    }

    let traj = integrate_laser(params, &series, cfg.laser.b0, cfg.laser.p0)?;
    summary.amp_ratio = Some(traj.amplification);
    if !cfg.laser.threshold_e.is_empty() {
        let setup = LaserSetup {
            t_end: grid.t_end(),
            steps: cfg.grid.steps,
            method: cfg.method,
            noise_mode: cfg.noise_mode,
            signs: cfg.signs,
            b0: cfg.laser.b0,
            p0: cfg.laser.p0,
        };
        match threshold_scan(params, &cfg.laser.threshold_e, &setup).and_then(|th| refine_threshold(params, &th, &setup, cfg.laser.refine)) {
            Ok(th) => summary.e_th = Some(th.e_th),
            Err(e @ Error::NoThresholdInRange(_)) => warn!("point {}: {e}", point.index),
            Err(e) => return Err(e.into()),
        }
    }
    let header = owned(&[&INVERSION_COLUMNS[..], &LASER_COLUMNS[..]].concat());
    let rows = indices.iter().map(|&i| [inversion_row(params, &series, i), laser_row(&traj, i).to_vec()].concat());
    write_atomic(path, &header, rows)?;
    Ok(summary)
}

#[derive(Debug)]
enum PointError {
    Numerical(Error),
    Io(io::Error),
}

impl From<Error> for PointError {
    fn from(e: Error) -> Self {
        Self::Numerical(e)
    }
}

impl From<io::Error> for PointError {
    fn from(e: io::Error) -> Self {
        Self::Io(e)
    }
}

fn run_point(cfg: &ScenarioConfig, point: &Point) -> PointRecord {
    let file = format!("{}_{:03}.csv", cfg.name, point.index);
    let path = cfg.output_dir.join(&file);
    let validity_bound = approximation_bound(&point.params, point.grid.t_end());
    let mut record = PointRecord {
        index: point.index,
        coords: point.coords.clone(),
        params: point.params,
        t_end: point.grid.t_end(),
        n_steps: point.grid.n_steps(),
        step: point.grid.step(),
        validity_bound,
        validity: validity_label(validity_bound),
        status: "ok",
        message: None,
        blowup_time: None,
        file: None,
        summary: Summary::default(),
    };
    if validity_bound > VALIDITY_WARN_THRESHOLD {
        warn!("point {}: approximation bound {validity_bound:.3e} exceeds {VALIDITY_WARN_THRESHOLD:e}", point.index);
    }
    match evaluate(cfg, point, &path) {
        Ok(summary) => {
            record.summary = summary;
            record.file = Some(file);
        }
        Err(err) => {
            let _ = fs::remove_file(path.with_extension("csv.partial"));
            let at: Vec<String> = point.coords.iter().map(|(a, v)| format!("{}={v:e}", a.name())).collect();
            let (status, message) = match err {
                PointError::Numerical(e) => {
                    if let Error::Overflow { time } = e {
                        record.blowup_time = Some(time);
                    }
                    ("numerical_error", e.to_string())
                }
                PointError::Io(e) => ("io_error", e.to_string()),
            };
            warn!("point {} [{}] failed: {message}", point.index, at.join(", "));
            record.status = status;
            record.message = Some(message);
        }
    }
    record
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn write_sweep_table(points: &[PointRecord], path: &Path) -> io::Result<()> {
    let axes: Vec<Axis> = points.first().map(|p| p.coords.iter().map(|(a, _)| *a).collect()).unwrap_or_default();
    let mut header: Vec<String> = axes.iter().map(|a| a.name().to_string()).collect();
    header.extend(owned(&[
        "status",
        "dN_end",
        "amp_ratio",
        "E_th",
        "peak_count",
        "validity_bound",
        "validity",
        "blowup_time",
        "file",
        "message",
    ]));
    let rows = points.iter().map(|p| {
        let mut row: Vec<String> = p.coords.iter().map(|(_, v)| num(*v)).collect();
        row.extend([
            p.status.to_string(),
            opt(p.summary.dn_end),
            opt(p.summary.amp_ratio),
            opt(p.summary.e_th),
            p.summary.peak_count.map(|c| c.to_string()).unwrap_or_default(),
            num(p.validity_bound),
            p.validity.to_string(),
            opt(p.blowup_time),
            p.file.clone().unwrap_or_default(),
            p.message.clone().unwrap_or_default(),
        ]);
        row
    });
    write_atomic(path, &header, rows)
}

/// Runs every point concurrently; files are written per point, the sweep
/// table and manifest afterwards on the calling thread.
pub fn run_scenario(cfg: &ScenarioConfig, verb: Verb, config_file: Option<&Path>) -> anyhow::Result<RunReport> {
    let start = Instant::now();
    let points = cfg.points()?;
    fs::create_dir_all(&cfg.output_dir)?;
    info!("{} point(s) of `{}` into {}", points.len(), cfg.name, cfg.output_dir.display());

    let records: Vec<PointRecord> = points.par_iter().map(|p| run_point(cfg, p)).collect();

    let mut files: Vec<PathBuf> = records.iter().filter_map(|r| r.file.as_ref().map(|f| cfg.output_dir.join(f))).collect();
    if verb == Verb::Sweep {
        let path = cfg.output_dir.join(format!("{}_sweep.csv", cfg.name));
        write_sweep_table(&records, &path)?;
        files.push(path);
    }
    let manifest_path = cfg.output_dir.join(MANIFEST);
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        verb,
        config_file,
        config: cfg,
        validity_warn_threshold: VALIDITY_WARN_THRESHOLD,
        points: &records,
        files: files.iter().filter_map(|f| f.file_name()).map(|f| f.to_string_lossy().into_owned()).collect(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    files.push(manifest_path);
    Ok(RunReport { points: records, files })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_include_both_ends() {
        let grid = TimeGrid::new(1.0, 10).unwrap();
        assert_eq!(row_indices(&grid, 2001), (0..=10).collect::<Vec<_>>());
        assert_eq!(row_indices(&grid, 4), vec![0, 4, 8, 10]);
        assert_eq!(row_indices(&grid, 2), vec![0, 10]);
    }

    #[test]
    fn numbers_keep_seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(-2.5e5), "-2.5000000000000000e5");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
    }
}
