//! Run configuration: a TOML tree with a default for every key.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::path::Path;

use rabi_core::HalfInt;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    RegimeMap,
    Ladder,
    Tdse,
    Interfere,
    Quantum,
    Vacuum,
    Spectrum,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::RegimeMap => "regime-map",
            Scenario::Ladder => "ladder",
            Scenario::Tdse => "tdse",
            Scenario::Interfere => "interfere",
            Scenario::Quantum => "quantum",
            Scenario::Vacuum => "vacuum",
            Scenario::Spectrum => "spectrum",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub scenario: Option<Scenario>,
    /// Stem of every output file; defaults to the scenario name.
    pub name: Option<String>,
    pub electron: ElectronConfig,
    pub field: FieldConfig,
    pub quantized: QuantizedConfig,
    pub photon: PhotonConfig,
    pub regime_map: RegimeMapConfig,
    pub ladder: LadderConfig,
    pub tdse: TdseConfig,
    pub interfere: InterfereConfig,
    pub quantum: QuantumConfig,
    pub vacuum: VacuumConfig,
    pub spectrum: SpectrumConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ElectronConfig {
    pub beta: f64,
}

impl Default for ElectronConfig {
    fn default() -> Self {
        Self { beta: 0.02 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldConfig {
    /// V/m.
    pub e_z: f64,
    /// m.
    pub lambda_l: f64,
    /// rad.
    pub phi0: f64,
    pub harmonic: u32,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self {
            e_z: 5e6,
            lambda_l: 200e-9,
            phi0: FRAC_PI_2,
            harmonic: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuantizedConfig {
    /// Coupling, rad/s.
    pub g: f64,
    /// Photon frequency, rad/s; 0 selects the laser frequency of `[field]`.
    pub omega_q: f64,
    /// `ω_q − v0 q_z`, rad/s.
    pub detuning: f64,
}

impl Default for QuantizedConfig {
    fn default() -> Self {
        Self {
            g: 2e11,
            omega_q: 0.0,
            detuning: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhotonState {
    Fock,
    Coherent,
    Thermal,
    Squeezed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ordering {
    DisplaceSqueezed,
    SqueezeDisplaced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhotonConfig {
    pub state: PhotonState,
    pub fock: usize,
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub nbar: f64,
    pub xi_re: f64,
    pub xi_im: f64,
    pub ordering: Ordering,
    /// 0 selects the automatic truncation.
    pub nu_max: usize,
}

impl Default for PhotonConfig {
    fn default() -> Self {
        Self {
            state: PhotonState::Coherent,
            fock: 0,
            alpha_re: 2.6,
            alpha_im: 0.0,
            nbar: 2.0,
            xi_re: 0.4,
            xi_im: 0.0,
            ordering: Ordering::DisplaceSqueezed,
            nu_max: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegimeMapConfig {
    pub beta_min: f64,
    pub beta_max: f64,
    pub beta_points: usize,
    pub field_min: f64,
    pub field_max: f64,
    pub field_points: usize,
    pub log: bool,
}

impl Default for RegimeMapConfig {
    fn default() -> Self {
        Self {
            beta_min: 0.005,
            beta_max: 0.5,
            beta_points: 200,
            field_min: 1e5,
            field_max: 1e9,
            field_points: 200,
            log: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LadderConfig {
    pub n_max: String,
    pub initial: String,
    /// Duration in Rabi periods.
    pub rabi_cycles: f64,
    pub samples: usize,
}

impl Default for LadderConfig {
    fn default() -> Self {
        Self {
            n_max: "7/2".into(),
            initial: "1/2".into(),
            rabi_cycles: 1.0,
            samples: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stencil {
    Midpoint,
    Literal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TdseConfig {
    pub points_per_period: usize,
    pub field_periods: usize,
    pub courant: f64,
    pub rabi_cycles: f64,
    pub snapshots: usize,
    pub stencil: Stencil,
    pub initial: String,
}

impl Default for TdseConfig {
    fn default() -> Self {
        Self {
            points_per_period: rabi_core::tdse::DEFAULT_POINTS_PER_PERIOD,
            field_periods: rabi_core::tdse::DEFAULT_FIELD_PERIODS,
            courant: rabi_core::tdse::DEFAULT_COURANT,
            rabi_cycles: 1.0,
            snapshots: 400,
            stencil: Stencil::Midpoint,
            initial: "-1/2".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvironmentConfig {
    pub e_local: f64,
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub gravity: f64,
    pub extra_phase: f64,
}

impl Default for EnvironmentConfig {
    fn default() -> Self {
        Self {
            e_local: 0.0,
            l1: 0.0,
            l2: 0.0,
            l3: 0.0,
            gravity: rabi_core::constants::G_STANDARD,
            extra_phase: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InterfereConfig {
    pub phases: usize,
    pub environment: EnvironmentConfig,
}

impl Default for InterfereConfig {
    fn default() -> Self {
        Self {
            phases: 100,
            environment: EnvironmentConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuantumSolver {
    /// Closed form on resonance, RK4 otherwise.
    Auto,
    ClosedForm,
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuantumConfig {
    /// Duration in units of `1/g`.
    pub t_end_g: f64,
    pub samples: usize,
    pub solver: QuantumSolver,
    pub collapse_fraction: f64,
    pub revival_fraction: f64,
}

impl Default for QuantumConfig {
    fn default() -> Self {
        Self {
            t_end_g: 100.0,
            samples: 4000,
            solver: QuantumSolver::Auto,
            collapse_fraction: rabi_core::analysis::DEFAULT_COLLAPSE_FRACTION,
            revival_fraction: rabi_core::analysis::DEFAULT_REVIVAL_FRACTION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VacuumConfig {
    /// Duration in vacuum Rabi periods `π/g`.
    pub periods: f64,
    pub samples: usize,
}

impl Default for VacuumConfig {
    fn default() -> Self {
        Self {
            periods: 3.0,
            samples: 600,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub nu_cap: usize,
    pub min_beat_periods: f64,
    /// Sampling step in units of `1/g`.
    pub dt_g: f64,
    /// Signal length as a multiple of the minimum window.
    pub window_factor: f64,
    pub max_condition: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            nu_cap: 30,
            min_beat_periods: rabi_core::analysis::DEFAULT_MIN_BEAT_PERIODS,
            dt_g: 0.05,
            window_factor: 1.05,
            max_condition: rabi_core::analysis::DEFAULT_MAX_CONDITION,
        }
    }
}

/// A parsed config together with the raw tree it came from.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub raw: serde_json::Value,
}

impl LoadedConfig {
    /// Dotted keys of the resolved config that were not given explicitly.
    pub fn defaults_used(&self) -> Vec<String> {
        let resolved = serde_json::to_value(&self.config).expect("config serializes");
        let mut out = Vec::new();
        missing_keys(&resolved, Some(&self.raw), String::new(), &mut out);
        out
    }
}

fn missing_keys(resolved: &serde_json::Value, raw: Option<&serde_json::Value>, prefix: String, out: &mut Vec<String>) {
    match resolved {
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                let sub = raw.and_then(|r| r.get(k));
                missing_keys(v, sub, key, out);
            }
        }
        _ => {
            if raw.is_none() {
                out.push(prefix);
            }
        }
    }
}

/// Read a TOML config, or the `config` member of a run's `.meta.json`.
pub fn load(path: &Path) -> Result<LoadedConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let is_json = path.extension().is_some_and(|e| e == "json");
    if is_json {
        let doc: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column())))?;
        let raw = doc.get("config").cloned().unwrap_or(doc);
        let config: RunConfig = serde_json::from_value(raw.clone())
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Ok(LoadedConfig { config, raw })
    } else {
        parse_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

pub fn parse_toml(text: &str) -> Result<LoadedConfig, String> {
    let config: RunConfig = toml::from_str(text).map_err(|e| e.to_string())?;
    let table: toml::Table = toml::from_str(text).map_err(|e| e.to_string())?;
    let raw = serde_json::to_value(table).map_err(|e| e.to_string())?;
    Ok(LoadedConfig { config, raw })
}

fn check(ok: bool, key: &str, what: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(format!("`{key}` {what}")))
    }
}

pub fn parse_label(key: &str, s: &str) -> Result<HalfInt, CliError> {
    s.parse()
        .map_err(|_| CliError::Config(format!("`{key}` = \"{s}\" is not an integer or half-integer label")))
}

impl RunConfig {
    pub fn stem(&self, scenario: Scenario) -> String {
        self.name.clone().unwrap_or_else(|| scenario.name().to_string())
    }

    /// Range checks for the keys `scenario` reads.
    pub fn validate(&self, scenario: Scenario) -> Result<(), CliError> {
        if let Some(s) = self.scenario {
            check(s == scenario, "scenario", &format!("is `{s}` but the command line asked for `{scenario}`"))?;
        }
        if let Some(name) = &self.name {
            check(
                !name.is_empty() && !name.contains(['/', '\\']) && name != "." && name != "..",
                "name",
                "must be a plain file stem",
            )?;
        }
        let b = self.electron.beta;
        let f = &self.field;
        let physical = || -> Result<(), CliError> {
            check(b > 0.0 && b < 1.0, "electron.beta", "must lie in (0, 1)")?;
            check(f.e_z.is_finite() && f.e_z >= 0.0, "field.e_z", "must be finite and non-negative")?;
            check(f.lambda_l > 0.0 && f.lambda_l.is_finite(), "field.lambda_l", "must be positive")?;
            check(f.harmonic >= 1, "field.harmonic", "must be at least 1")
        };
        let quantized = || -> Result<(), CliError> {
            let q = &self.quantized;
            check(q.g > 0.0 && q.g.is_finite(), "quantized.g", "must be positive")?;
            check(q.omega_q >= 0.0 && q.omega_q.is_finite(), "quantized.omega_q", "must be non-negative")?;
            check(q.detuning.is_finite(), "quantized.detuning", "must be finite")
        };
        let photon = || -> Result<(), CliError> {
            let p = &self.photon;
            check(p.nbar >= 0.0 && p.nbar.is_finite(), "photon.nbar", "must be non-negative")?;
            check(
                p.alpha_re.is_finite() && p.alpha_im.is_finite() && p.xi_re.is_finite() && p.xi_im.is_finite(),
                "photon.alpha",
                "components must be finite",
            )?;
            check(p.nu_max == 0 || p.fock <= p.nu_max, "photon.fock", "must not exceed photon.nu_max")
        };
        match scenario {
            Scenario::RegimeMap => {
                let r = &self.regime_map;
                check(r.beta_min > 0.0 && r.beta_max > r.beta_min && r.beta_max < 1.0, "regime_map.beta_min", "needs 0 < beta_min < beta_max < 1")?;
                check(r.field_min > 0.0 && r.field_max > r.field_min, "regime_map.field_min", "needs 0 < field_min < field_max")?;
                check(r.beta_points >= 2 && r.field_points >= 2, "regime_map.beta_points", "grids need at least 2 points per axis")?;
                check(f.lambda_l > 0.0, "field.lambda_l", "must be positive")?;
            }
            Scenario::Ladder => {
                physical()?;
                check(f.e_z > 0.0, "field.e_z", "must be positive for a finite Rabi period")?;
                parse_label("ladder.n_max", &self.ladder.n_max)?;
                parse_label("ladder.initial", &self.ladder.initial)?;
                check(self.ladder.rabi_cycles > 0.0, "ladder.rabi_cycles", "must be positive")?;
                check(self.ladder.samples >= 2, "ladder.samples", "must be at least 2")?;
            }
            Scenario::Tdse => {
                physical()?;
                check(f.e_z > 0.0, "field.e_z", "must be positive for a finite Rabi period")?;
                let t = &self.tdse;
                parse_label("tdse.initial", &t.initial)?;
                check(t.courant > 0.0 && t.courant <= 1.0, "tdse.courant", "must lie in (0, 1]")?;
                check(t.rabi_cycles > 0.0, "tdse.rabi_cycles", "must be positive")?;
                check(t.snapshots >= 1, "tdse.snapshots", "must be at least 1")?;
            }
            Scenario::Interfere => {
                physical()?;
                check(self.interfere.phases >= 2, "interfere.phases", "must be at least 2")?;
            }
            Scenario::Quantum => {
                quantized()?;
                photon()?;
                let q = &self.quantum;
                check(q.t_end_g > 0.0, "quantum.t_end_g", "must be positive")?;
                check(q.samples >= 2, "quantum.samples", "must be at least 2")?;
                check(
                    !(q.solver == QuantumSolver::ClosedForm && self.quantized.detuning != 0.0),
                    "quantum.solver",
                    "closed-form needs quantized.detuning = 0",
                )?;
            }
            Scenario::Vacuum => {
                quantized()?;
                check(self.vacuum.periods > 0.0, "vacuum.periods", "must be positive")?;
                check(self.vacuum.samples >= 2, "vacuum.samples", "must be at least 2")?;
            }
            Scenario::Spectrum => {
                quantized()?;
                photon()?;
                let s = &self.spectrum;
                check(s.dt_g > 0.0, "spectrum.dt_g", "must be positive")?;
                check(s.window_factor >= 1.0, "spectrum.window_factor", "must be at least 1")?;
                check(s.nu_cap >= 1, "spectrum.nu_cap", "must be at least 1")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_all_defaults() {
        let c = parse_toml("").unwrap();
        assert_eq!(c.config, RunConfig::default());
        assert!(c.defaults_used().contains(&"electron.beta".to_string()));
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let err = parse_toml("[electron]\nbeta = 0.02\nbetta = 0.1\n").unwrap_err();
        assert!(err.contains("betta"), "{err}");
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn explicit_keys_are_not_defaults() {
        let c = parse_toml("scenario = \"ladder\"\n[electron]\nbeta = 0.03\n").unwrap();
        let d = c.defaults_used();
        assert!(!d.contains(&"electron.beta".to_string()));
        assert!(d.contains(&"field.e_z".to_string()));
        assert_eq!(c.config.scenario, Some(Scenario::Ladder));
    }

    #[test]
    fn validation() {
        let mut c = RunConfig::default();
        c.electron.beta = 1.5;
        assert!(c.validate(Scenario::Ladder).is_err());
        assert!(c.validate(Scenario::Vacuum).is_ok());
        let mut c = RunConfig {
            scenario: Some(Scenario::Tdse),
            ..RunConfig::default()
        };
        assert!(c.validate(Scenario::Ladder).is_err());
        c.ladder.n_max = "7/3".into();
        c.scenario = None;
        assert!(c.validate(Scenario::Ladder).is_err());
    }
}
