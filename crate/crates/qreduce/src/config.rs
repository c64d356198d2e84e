//! JSON scenario configuration.
//!
//! ```json
//! {
//!   "scenario": "WindowScan",
//!   "seed": 7,
//!   "params": { "a2": 0.5, "z_values": [1e-3], "delta_theta": 5e-5 },
//!   "outputs": { "csv": "window.csv", "json": "window.json" }
//! }
//! ```
//!
//! Complex scalars are `[re, im]` pairs or plain numbers. Matrices are either
//! nested rows of scalars or a flat row-major list of scalars.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qreduce_core::{c64, ComplexMatrix, C64};
use serde::Deserialize;
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    ComparePostulates,
    DecoherenceSweep,
    WindowScan,
    HistoriesCheck,
    LambdaPositivityMap,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] = [
        ScenarioKind::ComparePostulates,
        ScenarioKind::DecoherenceSweep,
        ScenarioKind::WindowScan,
        ScenarioKind::HistoriesCheck,
        ScenarioKind::LambdaPositivityMap,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::ComparePostulates => "ComparePostulates",
            ScenarioKind::DecoherenceSweep => "DecoherenceSweep",
            ScenarioKind::WindowScan => "WindowScan",
            ScenarioKind::HistoriesCheck => "HistoriesCheck",
            ScenarioKind::LambdaPositivityMap => "LambdaPositivityMap",
        }
    }

    pub fn summary(&self) -> &'static str {
        match self {
            ScenarioKind::ComparePostulates => {
                "Lüders vs anticommutator post-states and unread mixtures on decohered qubits (params: a2, z_values, lambdas)"
            }
            ScenarioKind::DecoherenceSweep => {
                "median |z(t)| of the bit-by-bit model against environment size (params: a, b, n_values, trials, t)"
            }
            ScenarioKind::WindowScan => {
                "angular window without events after an anticommutator reduction (params: a2, z_values, delta_theta | delta_theta_rel, theta_half_span, tol)"
            }
            ScenarioKind::HistoriesCheck => {
                "consistency, additivity and marginalisation of a history family (params: dim, initial_state, hamiltonian, slots, tol)"
            }
            ScenarioKind::LambdaPositivityMap => {
                "minimum eigenvalue of the λ-family post-state over (λ, damping ratio) (params: lambda_grid, ratio_grid)"
            }
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown scenario `{s}`")))
    }
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: String,
    seed: u64,
    params: Value,
    #[serde(default)]
    outputs: Outputs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub params: ScenarioParams,
    pub outputs: Outputs,
}

impl ScenarioConfig {
    pub fn kind(&self) -> ScenarioKind {
        self.params.kind()
    }

    pub fn from_json_str(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        let kind: ScenarioKind = raw.scenario.parse()?;
        let params = ScenarioParams::from_value(kind, raw.params)?;
        params.validate()?;
        Ok(Self {
            seed: raw.seed,
            params,
            outputs: raw.outputs,
        })
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// Output paths, relative ones resolved against `out_dir`. Missing entries
    /// default to `<scenario>.csv` / `<scenario>.json`.
    pub fn resolved_outputs(&self, out_dir: Option<&Path>) -> (PathBuf, PathBuf) {
        let base = out_dir.unwrap_or_else(|| Path::new("."));
        let name = self.kind().name();
        let resolve = |p: &Option<PathBuf>, ext: &str| {
            let p = p.clone().unwrap_or_else(|| PathBuf::from(format!("{name}.{ext}")));
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        (resolve(&self.outputs.csv, "csv"), resolve(&self.outputs.json, "json"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioParams {
    ComparePostulates(CompareParams),
    DecoherenceSweep(SweepParams),
    WindowScan(WindowParams),
    HistoriesCheck(HistoriesParams),
    LambdaPositivityMap(LambdaMapParams),
}

impl ScenarioParams {
    pub fn kind(&self) -> ScenarioKind {
        match self {
            ScenarioParams::ComparePostulates(_) => ScenarioKind::ComparePostulates,
            ScenarioParams::DecoherenceSweep(_) => ScenarioKind::DecoherenceSweep,
            ScenarioParams::WindowScan(_) => ScenarioKind::WindowScan,
            ScenarioParams::HistoriesCheck(_) => ScenarioKind::HistoriesCheck,
            ScenarioParams::LambdaPositivityMap(_) => ScenarioKind::LambdaPositivityMap,
        }
    }

    fn from_value(kind: ScenarioKind, v: Value) -> Result<Self, CliError> {
        fn parse<T: serde::de::DeserializeOwned>(kind: ScenarioKind, v: Value) -> Result<T, CliError> {
            serde_json::from_value(v).map_err(|e| CliError::Config(format!("{kind} params: {e}")))
        }
        Ok(match kind {
            ScenarioKind::ComparePostulates => ScenarioParams::ComparePostulates(parse(kind, v)?),
            ScenarioKind::DecoherenceSweep => ScenarioParams::DecoherenceSweep(parse(kind, v)?),
            ScenarioKind::WindowScan => ScenarioParams::WindowScan(parse(kind, v)?),
            ScenarioKind::HistoriesCheck => ScenarioParams::HistoriesCheck(parse(kind, v)?),
            ScenarioKind::LambdaPositivityMap => ScenarioParams::LambdaPositivityMap(parse(kind, v)?),
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match self {
            ScenarioParams::ComparePostulates(p) => p.validate(),
            ScenarioParams::DecoherenceSweep(p) => p.validate(),
            ScenarioParams::WindowScan(p) => p.validate(),
            ScenarioParams::HistoriesCheck(p) => p.validate(),
            ScenarioParams::LambdaPositivityMap(p) => p.validate(),
        }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn check_population(name: &str, a2: f64) -> Result<(), CliError> {
    if !(a2 > 0.0 && a2 < 1.0) {
        return Err(config_err(format!(
            "{name} must lie strictly between 0 and 1, got {a2}"
        )));
    }
    Ok(())
}

fn check_nonempty<T>(name: &str, v: &[T]) -> Result<(), CliError> {
    if v.is_empty() {
        return Err(config_err(format!("{name} must not be empty")));
    }
    Ok(())
}

fn check_finite(name: &str, v: &[f64]) -> Result<(), CliError> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(config_err(format!("{name} must contain finite numbers")));
    }
    Ok(())
}

/// Interference terms must keep the 2x2 state Hermitian-valid: `|z|² ≤ a2(1 − a2)`.
fn check_coherences(a2: f64, z_values: &[f64]) -> Result<(), CliError> {
    let bound = (a2 * (1.0 - a2)).sqrt();
    if let Some(z) = z_values.iter().find(|z| z.abs() > bound) {
        return Err(config_err(format!(
            "|z| = {} exceeds sqrt(a2 (1 - a2)) = {bound}",
            z.abs()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CompareParams {
    pub a2: f64,
    pub z_values: Vec<f64>,
    pub lambdas: Vec<f64>,
}

impl CompareParams {
    fn validate(&self) -> Result<(), CliError> {
        check_population("a2", self.a2)?;
        check_nonempty("z_values", &self.z_values)?;
        check_finite("z_values", &self.z_values)?;
        check_finite("lambdas", &self.lambdas)?;
        check_coherences(self.a2, &self.z_values)
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    pub a: Scalar,
    pub b: Scalar,
    pub n_values: Vec<usize>,
    pub trials: usize,
    pub t: f64,
}

impl SweepParams {
    fn validate(&self) -> Result<(), CliError> {
        let norm = self.a.0.norm_sqr() + self.b.0.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(config_err(format!("|a|² + |b|² must be 1, got {norm}")));
        }
        check_nonempty("n_values", &self.n_values)?;
        if self.trials == 0 {
            return Err(config_err("trials must be positive"));
        }
        if !self.t.is_finite() {
            return Err(config_err("t must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct WindowParams {
    pub a2: f64,
    pub z_values: Vec<f64>,
    /// Absolute angular step in radians.
    #[serde(default)]
    pub delta_theta: Option<f64>,
    /// Step as a fraction of `|z|`; takes precedence over `delta_theta` when `z ≠ 0`.
    #[serde(default)]
    pub delta_theta_rel: Option<f64>,
    /// Half-width of the scanned interval around the +x direction.
    #[serde(default = "default_half_span")]
    pub theta_half_span: f64,
    #[serde(default = "default_event_tol")]
    pub tol: f64,
}

fn default_half_span() -> f64 {
    0.1
}

fn default_event_tol() -> f64 {
    qreduce_core::reduction::DEFAULT_EVENT_TOL
}

/// Scan points per z are capped to keep the CSV bounded.
pub const MAX_SCAN_POINTS: usize = 5_000_000;

impl WindowParams {
    /// Angular step used for a given `z`.
    pub fn step_for(&self, z: f64) -> f64 {
        match (self.delta_theta_rel, self.delta_theta) {
            (Some(rel), _) if z != 0.0 => rel * z.abs(),
            (_, Some(abs)) => abs,
            (Some(rel), None) => rel * 1e-6,
            (None, None) => unreachable!("validated"),
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        check_population("a2", self.a2)?;
        check_nonempty("z_values", &self.z_values)?;
        check_finite("z_values", &self.z_values)?;
        check_coherences(self.a2, &self.z_values)?;
        if self.delta_theta.is_none() && self.delta_theta_rel.is_none() {
            return Err(config_err("one of delta_theta or delta_theta_rel is required"));
        }
        for (name, v) in [
            ("delta_theta", self.delta_theta),
            ("delta_theta_rel", self.delta_theta_rel),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(config_err(format!("{name} must be positive")));
                }
            }
        }
        if !(self.theta_half_span > 0.0 && self.theta_half_span <= std::f64::consts::PI) {
            return Err(config_err("theta_half_span must lie in (0, π]"));
        }
        if !(self.tol >= 0.0 && self.tol < 0.5) {
            return Err(config_err("tol must lie in [0, 0.5)"));
        }
        for &z in &self.z_values {
            let points = 2.0 * self.theta_half_span / self.step_for(z);
            if points > MAX_SCAN_POINTS as f64 {
                return Err(config_err(format!(
                    "scan for z = {z} needs {points:.0} points (cap {MAX_SCAN_POINTS})"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SlotSpec {
    pub time: f64,
    pub observable: MatrixSpec,
    pub partition: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct HistoriesParams {
    pub dim: usize,
    pub initial_state: MatrixSpec,
    pub hamiltonian: MatrixSpec,
    pub slots: Vec<SlotSpec>,
    #[serde(default = "default_consistency_tol")]
    pub tol: f64,
}

fn default_consistency_tol() -> f64 {
    qreduce_core::histories::DEFAULT_CONSISTENCY_TOL
}

impl HistoriesParams {
    fn validate(&self) -> Result<(), CliError> {
        if self.dim == 0 {
            return Err(config_err("dim must be positive"));
        }
        self.initial_state.to_matrix(self.dim)?;
        self.hamiltonian.to_matrix(self.dim)?;
        check_nonempty("slots", &self.slots)?;
        for slot in &self.slots {
            slot.observable.to_matrix(self.dim)?;
        }
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return Err(config_err("tol must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LambdaMapParams {
    pub lambda_grid: Vec<f64>,
    pub ratio_grid: Vec<f64>,
}

impl LambdaMapParams {
    fn validate(&self) -> Result<(), CliError> {
        check_nonempty("lambda_grid", &self.lambda_grid)?;
        check_nonempty("ratio_grid", &self.ratio_grid)?;
        check_finite("lambda_grid", &self.lambda_grid)?;
        check_finite("ratio_grid", &self.ratio_grid)?;
        // ρ(ratio) = [[½, ratio/2], [ratio/2, ½]] is a state only for ratio ≤ 1
        if self.ratio_grid.iter().any(|&r| !(0.0..=1.0).contains(&r)) {
            return Err(config_err("ratio_grid values must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Complex scalar written as a number or an `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scalar(pub C64);

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Real(f64),
            Pair([f64; 2]),
        }
        Ok(match Repr::deserialize(d)? {
            Repr::Real(x) => Scalar(c64(x, 0.0)),
            Repr::Pair([re, im]) => Scalar(c64(re, im)),
        })
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum MatrixSpec {
    Rows(Vec<Vec<Scalar>>),
    Flat(Vec<Scalar>),
}

impl MatrixSpec {
    pub fn to_matrix(&self, dim: usize) -> Result<ComplexMatrix, CliError> {
        let data: Vec<C64> = match self {
            MatrixSpec::Rows(rows) => {
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(config_err(format!("matrix must be {dim}x{dim}")));
                }
                rows.iter().flatten().map(|s| s.0).collect()
            }
            MatrixSpec::Flat(flat) => {
                if flat.len() != dim * dim {
                    return Err(config_err(format!(
                        "flat matrix needs {} entries, got {}",
                        dim * dim,
                        flat.len()
                    )));
                }
                flat.iter().map(|s| s.0).collect()
            }
        };
        ComplexMatrix::from_row_major(data).map_err(|e| config_err(format!("matrix: {e}")))
    }
}
