//! Scenario files: TOML sections whose parameter values may be expressions
//! over the other parameters.
//!
//! ```toml
//! [scenario]
//! kind = "inversion_vs_drive"
//!
//! [params]
//! g = 0.5
//! J = 11.4
//! omega_m = "2*J"
//! Delta = "-3*J"
//!
//! [sweep]
//! axis = "J"
//! values = [0.03, 0.1, 0.3]
//! inner_axis = "E"
//! inner_values = [5e4, 1e5, 2.5e5]
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use supermode::{Method, NoiseMode, SignConvention, SystemParams, TimeGrid, C64};
use thiserror::Error;

use crate::expr::Expr;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Syntax(#[from] toml::de::Error),
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

fn invalid(path: impl Into<String>, message: impl fmt::Display) -> ConfigError {
    ConfigError::Invalid { path: path.into(), message: message.to_string() }
}

/// Parameter names as written in scenario files.
pub const PARAM_NAMES: [&str; 9] = ["gamma", "g", "gamma_m", "omega_m", "J", "g_m", "E", "Delta", "n_th"];

/// Expressions used for parameters the file leaves out: the blue-detuned
/// reference point with `omega_m = 2J` and `Delta = -3J`.
const DEFAULT_PARAMS: [(&str, &str); 9] = [
    ("gamma", "1"),
    ("g", "gamma"),
    ("gamma_m", "0.037"),
    ("omega_m", "2*J"),
    ("J", "11.4"),
    ("g_m", "5e-5"),
    ("E", "2.5e5"),
    ("Delta", "-3*J"),
    ("n_th", "2.4e5"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Inversion,
    InversionVsDrive,
    NoiseBreakdown,
    Amplification,
    Spectrum,
}

impl FromStr for ScenarioKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "inversion" => Ok(Self::Inversion),
            "inversion_vs_drive" => Ok(Self::InversionVsDrive),
            "noise_breakdown" => Ok(Self::NoiseBreakdown),
            "amplification" => Ok(Self::Amplification),
            "spectrum" => Ok(Self::Spectrum),
            other => Err(format!("unknown scenario `{other}`")),
        }
    }
}

impl ScenarioKind {
    pub fn has_laser(self) -> bool {
        self == Self::Amplification
    }
}

/// Parameters a sweep may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axis {
    E,
    J,
    #[serde(rename = "g")]
    G,
    Delta,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Self::E => "E",
            Self::J => "J",
            Self::G => "g",
            Self::Delta => "Delta",
        }
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "E" => Ok(Self::E),
            "J" => Ok(Self::J),
            "g" => Ok(Self::G),
            "Delta" => Ok(Self::Delta),
            other => Err(format!("unknown sweep axis `{other}` (expected E, J, g or Delta)")),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RawValue {
    Number(f64),
    Text(String),
}

impl RawValue {
    fn source(&self) -> String {
        match self {
            Self::Number(v) => format!("{v:e}"),
            Self::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: RawScenario,
    #[serde(default)]
    params: BTreeMap<String, RawValue>,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    sweep: RawSweep,
    #[serde(default)]
    laser: RawLaser,
    #[serde(default)]
    spectrum: RawSpectrum,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    kind: String,
    name: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    t_end: Option<RawValue>,
    steps: Option<i64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    method: Option<String>,
    noise_mode: Option<String>,
    signs: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    axis: Option<String>,
    #[serde(default)]
    values: Vec<f64>,
    inner_axis: Option<String>,
    #[serde(default)]
    inner_values: Vec<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLaser {
    b0: Option<[f64; 2]>,
    p0: Option<[f64; 2]>,
    #[serde(default)]
    threshold_e: Vec<f64>,
    refine: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectrum {
    delta_min: Option<f64>,
    delta_max: Option<f64>,
    points: Option<usize>,
    horizon: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    rows: Option<usize>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub method: Option<String>,
    pub noise_mode: Option<String>,
    pub steps: Option<usize>,
    pub t_end: Option<String>,
    pub kind: Option<ScenarioKind>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridSettings {
    /// Horizon expression, evaluated per sweep point.
    pub t_end: String,
    /// Fixed step count; `None` picks the step from the rates of each point.
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Sweep {
    pub axis: Axis,
    pub values: Vec<f64>,
    pub inner: Option<(Axis, Vec<f64>)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LaserSettings {
    pub b0: C64,
    pub p0: C64,
    /// Pump values scanned for the amplification threshold; empty skips the scan.
    pub threshold_e: Vec<f64>,
    pub refine: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSettings {
    pub delta_min: f64,
    pub delta_max: f64,
    pub points: usize,
    /// Integration horizon used when the pair is unstable.
    pub horizon: f64,
}

impl SpectrumSettings {
    pub fn deltas(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.delta_min];
        }
        let span = self.delta_max - self.delta_min;
        (0..self.points).map(|k| self.delta_min + span * k as f64 / (self.points - 1) as f64).collect()
    }
}

/// A fully resolved scenario. Every default that can affect a run is
/// filled in here so the manifest records it.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub name: String,
    pub param_exprs: BTreeMap<String, String>,
    pub base: SystemParams,
    pub grid: GridSettings,
    pub method: Method,
    pub noise_mode: NoiseMode,
    pub signs: SignConvention,
    pub sweep: Option<Sweep>,
    pub laser: LaserSettings,
    pub spectrum: SpectrumSettings,
    pub output_dir: PathBuf,
    /// Upper bound on time rows written per point; the last time is always written.
    pub rows: usize,
}

/// One sweep point with its axis coordinates.
#[derive(Debug, Clone, Serialize)]
pub struct Point {
    pub index: usize,
    pub coords: Vec<(Axis, f64)>,
    pub params: SystemParams,
    pub grid: TimeGrid,
}

impl ScenarioConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Self::parse(&text, overrides)
    }

    pub fn parse(text: &str, overrides: &Overrides) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text)?;

        let kind = match overrides.kind {
            Some(k) => k,
            None => raw.scenario.kind.parse().map_err(|m| invalid("scenario.kind", m))?,
        };
        let name = raw.scenario.name.unwrap_or_else(|| "point".to_string());
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(invalid("scenario.name", "must be a nonempty run of letters, digits, `_` or `-`"));
        }

        let mut param_exprs: BTreeMap<String, String> =
            DEFAULT_PARAMS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        for (key, value) in &raw.params {
            if !PARAM_NAMES.contains(&key.as_str()) {
                return Err(invalid(format!("params.{key}"), format!("unknown parameter (expected one of {})", PARAM_NAMES.join(", "))));
            }
            param_exprs.insert(key.clone(), value.source());
        }

        let t_end = overrides
            .t_end
            .clone()
            .or_else(|| raw.grid.t_end.as_ref().map(RawValue::source))
            .unwrap_or_else(|| "1/gamma_m".to_string());
        let steps = match (overrides.steps, raw.grid.steps) {
            (Some(n), _) => Some(n),
            (None, Some(n)) if n > 0 => Some(n as usize),
            (None, Some(n)) => return Err(invalid("grid.steps", format!("must be positive, got {n}"))),
            (None, None) => None,
        };
        let grid = GridSettings { t_end, steps };
        if grid.steps == Some(0) {
            return Err(invalid("grid.steps", "must be positive"));
        }

        let method = parse_field("solver.method", overrides.method.as_deref().or(raw.solver.method.as_deref()), Method::Moments)?;
        let noise_mode =
            parse_field("solver.noise_mode", overrides.noise_mode.as_deref().or(raw.solver.noise_mode.as_deref()), NoiseMode::default())?;
        let signs = parse_field("solver.signs", raw.solver.signs.as_deref(), SignConvention::default())?;

        let sweep = resolve_sweep(raw.sweep)?;

        let laser = LaserSettings {
            b0: raw.laser.b0.map_or(C64::new(1.0, 0.0), |[re, im]| C64::new(re, im)),
            p0: raw.laser.p0.map_or(C64::new(0.0, 0.0), |[re, im]| C64::new(re, im)),
            threshold_e: raw.laser.threshold_e,
            refine: raw.laser.refine.unwrap_or(8),
        };
        if laser.b0.norm() == 0.0 || !laser.b0.norm().is_finite() {
            return Err(invalid("laser.b0", "initial phonon amplitude must be finite and nonzero"));
        }
        if !laser.p0.norm().is_finite() {
            return Err(invalid("laser.p0", "must be finite"));
        }
        if !laser.threshold_e.windows(2).all(|w| w[0] < w[1]) || laser.threshold_e.iter().any(|e| !e.is_finite() || *e < 0.0) {
            return Err(invalid("laser.threshold_e", "must be finite, nonnegative and strictly ascending"));
        }

        let spectrum = SpectrumSettings {
            delta_min: raw.spectrum.delta_min.unwrap_or(-10.0),
            delta_max: raw.spectrum.delta_max.unwrap_or(10.0),
            points: raw.spectrum.points.unwrap_or(4001),
            horizon: raw.spectrum.horizon.unwrap_or(100.0),
        };
        if !(spectrum.delta_min.is_finite() && spectrum.delta_max.is_finite() && spectrum.delta_min <= spectrum.delta_max) {
            return Err(invalid("spectrum.delta_min", "range must be finite with delta_min <= delta_max"));
        }
        if spectrum.points == 0 {
            return Err(invalid("spectrum.points", "must be positive"));
        }
        if !(spectrum.horizon.is_finite() && spectrum.horizon > 0.0) {
            return Err(invalid("spectrum.horizon", "must be positive"));
        }

        let output_dir = overrides.out.clone().or(raw.output.dir).unwrap_or_else(|| PathBuf::from("out"));
        let rows = raw.output.rows.unwrap_or(2001);
        if rows < 2 {
            return Err(invalid("output.rows", "must be at least 2"));
        }

        let base = resolve_params(&param_exprs, &[])?;
        let config =
            Self { kind, name, param_exprs, base, grid, method, noise_mode, signs, sweep, laser, spectrum, output_dir, rows };
        // surface per-point errors before any work starts
        config.points()?;
        Ok(config)
    }

    /// Sweep points, outer axis major. An absent or empty sweep is one point.
    pub fn points(&self) -> Result<Vec<Point>, ConfigError> {
        let mut coords: Vec<Vec<(Axis, f64)>> = vec![Vec::new()];
        if let Some(sweep) = &self.sweep {
            coords = sweep.values.iter().map(|v| vec![(sweep.axis, *v)]).collect();
            if let Some((axis, inner)) = &sweep.inner {
                coords = coords
                    .into_iter()
                    .flat_map(|outer| inner.iter().map(move |v| [outer.clone(), vec![(*axis, *v)]].concat()))
                    .collect();
            }
        }
        coords
            .into_iter()
            .enumerate()
            .map(|(index, coords)| {
                let params = resolve_params(&self.param_exprs, &coords)?;
                let grid = self.time_grid(&params).map_err(|m| invalid(point_path(&coords, "grid"), m))?;
                Ok(Point { index, coords, params, grid })
            })
            .collect()
    }

    fn time_grid(&self, params: &SystemParams) -> Result<TimeGrid, String> {
        let expr = Expr::parse(&self.grid.t_end)?;
        let t_end = expr.eval(&param_values(params))?;
        let grid = match self.grid.steps {
            Some(n) => TimeGrid::new(t_end, n),
            None => TimeGrid::auto(params, t_end),
        }
        .map_err(|e| e.to_string())?;
        grid.check_resolution(params).map_err(|e| e.to_string())?;
        Ok(grid)
    }
}

fn point_path(coords: &[(Axis, f64)], section: &str) -> String {
    if coords.is_empty() {
        return section.to_string();
    }
    let at: Vec<String> = coords.iter().map(|(a, v)| format!("{}={v:e}", a.name())).collect();
    format!("{section} (at {})", at.join(", "))
}

fn parse_field<T: FromStr>(path: &str, value: Option<&str>, default: T) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.map_or(Ok(default), |s| s.parse().map_err(|e| invalid(path, e)))
}

fn resolve_sweep(raw: RawSweep) -> Result<Option<Sweep>, ConfigError> {
    let Some(axis) = raw.axis else {
        if !raw.values.is_empty() || raw.inner_axis.is_some() {
            return Err(invalid("sweep.axis", "missing although sweep values are given"));
        }
        return Ok(None);
    };
    let axis: Axis = axis.parse().map_err(|m| invalid("sweep.axis", m))?;
    let values = sorted_values("sweep.values", raw.values)?;
    let inner = match raw.inner_axis {
        None if raw.inner_values.is_empty() => None,
        None => return Err(invalid("sweep.inner_axis", "missing although inner values are given")),
        Some(name) => {
            let inner_axis: Axis = name.parse().map_err(|m| invalid("sweep.inner_axis", m))?;
            if inner_axis == axis {
                return Err(invalid("sweep.inner_axis", "must differ from sweep.axis"));
            }
            Some((inner_axis, sorted_values("sweep.inner_values", raw.inner_values)?))
        }
    };
    if values.is_empty() {
        return Ok(None);
    }
    Ok(Some(Sweep { axis, values, inner: inner.filter(|(_, v)| !v.is_empty()) }))
}

fn sorted_values(path: &str, mut values: Vec<f64>) -> Result<Vec<f64>, ConfigError> {
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(invalid(path, format!("value {v} is not finite")));
    }
    values.sort_by(f64::total_cmp);
    if values.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid(path, "contains duplicates"));
    }
    Ok(values)
}

pub fn param_values(p: &SystemParams) -> BTreeMap<String, f64> {
    let values = [p.gamma, p.g, p.gamma_m, p.omega_m, p.j, p.g_m, p.e, p.delta, p.n_th];
    PARAM_NAMES.iter().map(|n| n.to_string()).zip(values).collect()
}

/// Evaluates every parameter expression in dependency order; `fixed`
/// replaces the expressions of swept parameters.
fn resolve_params(exprs: &BTreeMap<String, String>, fixed: &[(Axis, f64)]) -> Result<SystemParams, ConfigError> {
    let mut values: BTreeMap<String, f64> = fixed.iter().map(|(a, v)| (a.name().to_string(), *v)).collect();
    let mut pending = Vec::new();
    for (name, src) in exprs {
        if values.contains_key(name) {
            continue;
        }
        let path = point_path(fixed, &format!("params.{name}"));
        let expr = Expr::parse(src).map_err(|m| invalid(&path, m))?;
        if let Some(bad) = expr.variables().into_iter().find(|v| !PARAM_NAMES.contains(&v.as_str())) {
            return Err(invalid(&path, format!("unknown name `{bad}`")));
        }
        pending.push((name.clone(), path, expr));
    }
    while !pending.is_empty() {
        let ready = pending.iter().position(|(_, _, e)| e.variables().iter().all(|v| values.contains_key(v)));
        let Some(k) = ready else {
            let names: Vec<&str> = pending.iter().map(|(n, _, _)| n.as_str()).collect();
            return Err(invalid("params", format!("circular definitions among {}", names.join(", "))));
        };
        let (name, path, expr) = pending.swap_remove(k);
        let v = expr.eval(&values).map_err(|m| invalid(&path, m))?;
        values.insert(name, v);
    }
    let get = |n: &str| values[n];
    let params = SystemParams {
        gamma: get("gamma"),
        g: get("g"),
        gamma_m: get("gamma_m"),
        omega_m: get("omega_m"),
        j: get("J"),
        g_m: get("g_m"),
        e: get("E"),
        delta: get("Delta"),
        n_th: get("n_th"),
    };
    params.validate().map(|(p, _)| p).map_err(|e| invalid(point_path(fixed, "params"), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ScenarioConfig, ConfigError> {
        ScenarioConfig::parse(text, &Overrides::default())
    }

    #[test]
    fn defaults_are_the_blue_detuned_reference() {
        let c = parse("[scenario]\nkind = \"inversion\"\n").unwrap();
        assert_eq!(c.base, SystemParams::blue_detuned_reference(1.0));
        assert_eq!(c.method, Method::Moments);
        assert!(c.sweep.is_none());
        assert_eq!(c.points().unwrap().len(), 1);
    }

    #[test]
    fn constraints_co_vary_with_the_swept_axis() {
        let c = parse(
            "[scenario]\nkind = \"inversion_vs_drive\"\n[params]\nomega_m = \"2*J\"\n\
             [sweep]\naxis = \"J\"\nvalues = [0.3, 0.03, 0.1]\ninner_axis = \"E\"\ninner_values = [1e5, 2.5e5]\n",
        )
        .unwrap();
        let points = c.points().unwrap();
        assert_eq!(points.len(), 6);
        assert_eq!(points[0].coords, vec![(Axis::J, 0.03), (Axis::E, 1e5)]);
        for p in &points {
            assert_eq!(p.params.omega_m, 2.0 * p.params.j);
            assert_eq!(p.params.delta, -3.0 * p.params.j);
        }
    }

    #[test]
    fn errors_name_the_field() {
        let err = |text: &str| match parse(text) {
            Err(ConfigError::Invalid { path, .. }) => path,
            other => panic!("{other:?}"),
        };
        assert_eq!(err("[scenario]\nkind = \"bogus\"\n"), "scenario.kind");
        assert_eq!(err("[scenario]\nkind = \"inversion\"\n[params]\nJ = \"2*K\"\n"), "params.J");
        assert_eq!(err("[scenario]\nkind = \"inversion\"\n[params]\nJ = \"omega_m/2\"\n"), "params");
        assert_eq!(err("[scenario]\nkind = \"inversion\"\n[solver]\nmethod = \"rk45\"\n"), "solver.method");
        assert_eq!(err("[scenario]\nkind = \"inversion\"\n[sweep]\naxis = \"n_th\"\nvalues = [1]\n"), "sweep.axis");
        assert!(err("[scenario]\nkind = \"inversion\"\n[sweep]\naxis = \"g\"\nvalues = [0, -2]\n").starts_with("params (at g="));
        assert!(matches!(parse("[scenario]\nkind = \"inversion\"\nbogus = 1\n"), Err(ConfigError::Syntax(_))));
    }

    #[test]
    fn overrides_win() {
        let overrides = Overrides { method: Some("midpoint".into()), steps: Some(100), t_end: Some("2".into()), ..Default::default() };
        let c = ScenarioConfig::parse("[scenario]\nkind = \"inversion\"\n[grid]\nsteps = 5\n", &overrides);
        // 100 steps over t = 2 cannot resolve omega_m = 22.8
        assert!(matches!(c, Err(ConfigError::Invalid { ref path, .. }) if path == "grid"));
        let overrides = Overrides { steps: Some(20000), ..overrides };
        let c = ScenarioConfig::parse("[scenario]\nkind = \"inversion\"\n", &overrides).unwrap();
        assert_eq!(c.method.to_string(), "midpoint_product");
        assert_eq!(c.points().unwrap()[0].grid.n_steps(), 20000);
    }
}
