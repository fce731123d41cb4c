//! Run configuration for the command-line tool.
//!
//! A run is described by one TOML file. Every physical quantity carries its
//! unit in the key name (`duration_ns`, `peak_rabi_ghz`, ...); frequencies
//! given in GHz or MHz are ordinary frequencies and are converted to rad/s.
//! Sweep axes name their unit in a `unit` field. Unknown keys are rejected.
//!
//! Precedence, lowest first: built-in defaults, the config file, `--set`
//! overrides.

use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fastgate::{Scheme, SolverOptions, TrapConfig};
use crate::levels::{build_yb171_system, yb_lambda_system, LevelSystem, ZeemanConfig};
use crate::pulses::{Protocol, ProtocolPulse};
use crate::sdk::{reference_pulse, Axis, AxisScale, Perturbation, SweepGrid, SweepParameter};
use crate::waveform::WaveformSettings;

pub const SCHEMA_VERSION: u32 = 1;

fn ghz(f: f64) -> f64 {
    TAU * f * 1e9
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default = "default_experiment")]
    pub experiment: String,
    #[serde(default)]
    pub system: SystemConfig,
    #[serde(default)]
    pub pulse: PulseConfig,
    #[serde(default)]
    pub sdk_map: MapConfig,
    #[serde(default)]
    pub robustness: RobustnessConfig,
    #[serde(default)]
    pub delay_scan: DelayScanConfig,
    #[serde(default)]
    pub gate: GateConfig,
    #[serde(default)]
    pub gate_scan: GateScanConfig,
    #[serde(default)]
    pub trajectory: TrajectoryConfig,
    #[serde(default)]
    pub waveform: WaveformConfig,
}

fn default_experiment() -> String {
    "default".into()
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            experiment: default_experiment(),
            system: SystemConfig::default(),
            pulse: PulseConfig::default(),
            sdk_map: MapConfig::default(),
            robustness: RobustnessConfig::default(),
            delay_scan: DelayScanConfig::default(),
            gate: GateConfig::default(),
            gate_scan: GateScanConfig::default(),
            trajectory: TrajectoryConfig::default(),
            waveform: WaveformConfig::default(),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Ideal three-level Λ system with the Yb⁺ clock splitting.
    Lambda,
    /// Full eight-level ¹⁷¹Yb⁺ S₁/₂, P₁/₂ manifold.
    Yb171,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    pub model: Model,
    pub magnetic_field_gauss: f64,
    /// Integrator tolerance (dimensionless).
    pub tolerance: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            model: Model::Lambda,
            magnetic_field_gauss: 5.0,
            tolerance: crate::dynamics::DEFAULT_TOL,
        }
    }
}

impl SystemConfig {
    pub fn build(&self) -> Result<LevelSystem> {
        if !(self.tolerance > 0.0 && self.tolerance < 1e-2) {
            return Err(Error::Config(format!(
                "system.tolerance = {} is out of range",
                self.tolerance
            )));
        }
        match self.model {
            Model::Lambda => Ok(yb_lambda_system()),
            Model::Yb171 => build_yb171_system(ZeemanConfig::new(self.magnetic_field_gauss)),
        }
    }
}

/// Pulse parameters; unset fields take the protocol's reference values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub protocol: Protocol,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_rabi_ghz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detuning_ghz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_ghz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope_frequency_ghz: Option<f64>,
}

impl Default for PulseConfig {
    fn default() -> Self {
        PulseConfig::reference(Protocol::Stirap)
    }
}

impl PulseConfig {
    pub fn reference(protocol: Protocol) -> Self {
        PulseConfig {
            protocol,
            duration_ns: None,
            peak_rabi_ghz: None,
            detuning_ghz: None,
            sweep_ghz: None,
            delay_ns: None,
            envelope_frequency_ghz: None,
        }
    }

    pub fn build(&self) -> Result<ProtocolPulse> {
        let r = reference_pulse(self.protocol);
        let only = |set: bool, key: &str, proto: Protocol| -> Result<()> {
            if set && self.protocol != proto {
                return Err(Error::Config(format!(
                    "pulse.{key} applies to {proto} only"
                )));
            }
            Ok(())
        };
        only(self.sweep_ghz.is_some(), "sweep_ghz", Protocol::Arp)?;
        only(self.delay_ns.is_some(), "delay_ns", Protocol::Stirap)?;
        only(
            self.envelope_frequency_ghz.is_some(),
            "envelope_frequency_ghz",
            Protocol::De,
        )?;

        let tau = self.duration_ns.map_or(r.duration, |v| v * 1e-9);
        let rabi = self.peak_rabi_ghz.map_or(r.peak_rabi, ghz);
        let detuning = self.detuning_ghz.map_or(r.detuning, ghz);
        let pulse = match self.protocol {
            Protocol::Srt => ProtocolPulse::srt(rabi, tau, detuning)?,
            Protocol::Arp => {
                ProtocolPulse::arp(rabi, tau, self.sweep_ghz.map_or(r.sweep, ghz), detuning)?
            }
            Protocol::Stirap => {
                ProtocolPulse::stirap(rabi, tau, self.delay_ns.map_or(r.delay, |v| v * 1e-9))?
                    .with_detuning(detuning)
            }
            Protocol::De => ProtocolPulse::de(
                rabi,
                tau,
                self.envelope_frequency_ghz
                    .map_or(r.envelope_frequency, ghz),
            )?
            .with_detuning(detuning),
        };
        Ok(pulse)
    }
}

/// One sweep axis; `min`/`max` are in `unit`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub parameter: SweepParameter,
    pub unit: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default = "linear")]
    pub scale: AxisScale,
}

fn linear() -> AxisScale {
    AxisScale::Linear
}

/// Factor converting a value in `unit` into the parameter's SI unit.
pub fn unit_factor(parameter: SweepParameter, unit: &str) -> Result<f64> {
    let u = unit.to_ascii_lowercase();
    let f = match parameter {
        SweepParameter::PeakRabi
        | SweepParameter::Detuning
        | SweepParameter::Sweep
        | SweepParameter::EnvelopeFrequency => match u.as_str() {
            "ghz" => TAU * 1e9,
            "mhz" => TAU * 1e6,
            "rad/s" => 1.0,
            _ => f64::NAN,
        },
        SweepParameter::Delay => match u.as_str() {
            "ns" => 1e-9,
            "ps" => 1e-12,
            "s" => 1.0,
            _ => f64::NAN,
        },
        SweepParameter::Intensity => match u.as_str() {
            "relative" | "1" => 1.0,
            _ => f64::NAN,
        },
    };
    if f.is_nan() {
        return Err(Error::Config(format!(
            "unit `{unit}` is not valid for axis parameter `{}`",
            parameter.name()
        )));
    }
    Ok(f)
}

impl AxisConfig {
    pub fn build(&self) -> Result<Axis> {
        let f = unit_factor(self.parameter, &self.unit)?;
        let a = Axis {
            parameter: self.parameter,
            min: self.min * f,
            max: self.max * f,
            count: self.count,
            scale: self.scale,
        };
        a.validate()?;
        Ok(a)
    }

    /// Axis values in the configured unit.
    pub fn display_values(&self) -> Vec<f64> {
        Axis {
            parameter: self.parameter,
            min: self.min,
            max: self.max,
            count: self.count,
            scale: self.scale,
        }
        .values()
    }
}

/// Map axes; unset axes take protocol-specific defaults.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<AxisConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<AxisConfig>,
}

/// Default map axes around a protocol's operating point.
pub fn default_axes(protocol: Protocol) -> (AxisConfig, AxisConfig) {
    let axis = |parameter, unit: &str, min, max| AxisConfig {
        parameter,
        unit: unit.into(),
        min,
        max,
        count: 15,
        scale: AxisScale::Linear,
    };
    let (xp, yp) = SweepParameter::default_axes(protocol);
    let x = match protocol {
        Protocol::Arp => axis(xp, "ghz", 40.0, 200.0),
        _ => axis(xp, "ghz", 20.0, 70.0),
    };
    let y = match protocol {
        Protocol::Srt => axis(yp, "ghz", 200.0, 800.0),
        Protocol::Arp => axis(yp, "ghz", 0.0, 40.0),
        Protocol::Stirap => axis(yp, "ns", 0.0, 0.6),
        Protocol::De => axis(yp, "ghz", 100.0, 300.0),
    };
    (x, y)
}

impl MapConfig {
    pub fn axes(&self, protocol: Protocol) -> (AxisConfig, AxisConfig) {
        let (dx, dy) = default_axes(protocol);
        (self.x.clone().unwrap_or(dx), self.y.clone().unwrap_or(dy))
    }

    pub fn build(&self, base: ProtocolPulse) -> Result<SweepGrid> {
        let (x, y) = self.axes(base.protocol);
        SweepGrid::new(base, x.build()?, y.build()?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RobustnessConfig {
    pub protocols: Vec<Protocol>,
    pub perturbations: Vec<Perturbation>,
    /// Largest relative deviation (dimensionless).
    pub half_width_relative: f64,
    pub points: usize,
    pub pulse_pairs: u32,
}

impl Default for RobustnessConfig {
    fn default() -> Self {
        RobustnessConfig {
            protocols: Protocol::ALL.to_vec(),
            perturbations: vec![Perturbation::Intensity, Perturbation::Detuning],
            half_width_relative: 0.1,
            points: 21,
            pulse_pairs: crate::constants::REFERENCE_PULSE_PAIRS,
        }
    }
}

impl RobustnessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.perturbations.contains(&Perturbation::Delay) {
            return Err(Error::Config(
                "robustness.perturbations: use the delay-scan command for delay deviations".into(),
            ));
        }
        if !(self.half_width_relative > 0.0 && self.half_width_relative < 1.0) {
            return Err(Error::Config(
                "robustness.half_width_relative must lie in (0, 1)".into(),
            ));
        }
        check_points("robustness.points", self.points)?;
        check_pairs(self.pulse_pairs)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DelayScanConfig {
    pub half_width_ps: f64,
    pub points: usize,
    pub pulse_pairs: u32,
}

impl Default for DelayScanConfig {
    fn default() -> Self {
        DelayScanConfig {
            half_width_ps: 150.0,
            points: 61,
            pulse_pairs: crate::constants::REFERENCE_PULSE_PAIRS,
        }
    }
}

impl DelayScanConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.half_width_ps > 0.0) {
            return Err(Error::Config(
                "delay_scan.half_width_ps must be positive".into(),
            ));
        }
        check_points("delay_scan.points", self.points)?;
        check_pairs(self.pulse_pairs)
    }
}

fn check_points(key: &str, n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Config(format!("{key} must be at least 2")));
    }
    Ok(())
}

fn check_pairs(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::Config("pulse_pairs must be positive".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GateConfig {
    pub schemes: Vec<Scheme>,
    pub repetitions: Vec<u32>,
    pub trap_frequency_mhz: f64,
    pub lamb_dicke: f64,
    pub nbar_com: f64,
    pub nbar_stretch: f64,
    pub seeds: usize,
    /// Solver residual target (dimensionless).
    pub solver_tolerance: f64,
    /// Per-flip population error used for `F_s` (dimensionless).
    pub flip_error: f64,
    /// Cross-check solutions with the Fock-space oracle.
    pub oracle: bool,
    pub oracle_lamb_dicke: f64,
    pub oracle_truncation: usize,
}

impl Default for GateConfig {
    fn default() -> Self {
        GateConfig {
            schemes: vec![Scheme::Gzc, Scheme::Frag],
            repetitions: vec![1, 2, 3, 4],
            trap_frequency_mhz: 1.0,
            lamb_dicke: crate::constants::REFERENCE_LAMB_DICKE,
            nbar_com: 0.0,
            nbar_stretch: 0.0,
            seeds: 64,
            solver_tolerance: 1e-12,
            flip_error: 0.0,
            oracle: false,
            oracle_lamb_dicke: 0.1,
            oracle_truncation: 40,
        }
    }
}

impl GateConfig {
    pub fn trap(&self) -> Result<TrapConfig> {
        let t = TrapConfig::new(TAU * self.trap_frequency_mhz * 1e6, self.lamb_dicke)?
            .with_thermal(self.nbar_com, self.nbar_stretch);
        t.validate()?;
        Ok(t)
    }

    pub fn solver(&self) -> SolverOptions {
        SolverOptions {
            tol: self.solver_tolerance,
            ..SolverOptions::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.trap()?;
        if self.schemes.is_empty() || self.schemes.contains(&Scheme::Custom) {
            return Err(Error::Config(
                "gate.schemes must list gzc and/or frag".into(),
            ));
        }
        if self.repetitions.is_empty() || self.repetitions.contains(&0) {
            return Err(Error::Config(
                "gate.repetitions must be positive integers".into(),
            ));
        }
        if self.seeds == 0 {
            return Err(Error::Config("gate.seeds must be positive".into()));
        }
        if !(self.solver_tolerance > 0.0) {
            return Err(Error::Config(
                "gate.solver_tolerance must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.flip_error) {
            return Err(Error::Config("gate.flip_error must lie in [0, 1]".into()));
        }
        if self.oracle_truncation < 4 || !(self.oracle_lamb_dicke > 0.0) {
            return Err(Error::Config(
                "gate.oracle_truncation ≥ 4 and oracle_lamb_dicke > 0 required".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GateScanConfig {
    pub repetitions: Vec<u32>,
    pub bandwidths_ghz: Vec<f64>,
    /// Search neighbouring grid slots instead of plain rounding.
    pub refine: bool,
}

impl Default for GateScanConfig {
    fn default() -> Self {
        GateScanConfig {
            repetitions: (1..=8).collect(),
            bandwidths_ghz: vec![0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0],
            refine: false,
        }
    }
}

impl GateScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions.is_empty() || self.repetitions.contains(&0) {
            return Err(Error::Config(
                "gate_scan.repetitions must be positive integers".into(),
            ));
        }
        if self.bandwidths_ghz.is_empty() || self.bandwidths_ghz.iter().any(|&b| !(b > 0.0)) {
            return Err(Error::Config(
                "gate_scan.bandwidths_ghz must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrajectoryConfig {
    pub scheme: Scheme,
    pub repetitions: u32,
    pub bandwidths_ghz: Vec<f64>,
    /// Also dump the internal-state trajectory of the configured pulse.
    pub state: bool,
    pub initial_level: usize,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        TrajectoryConfig {
            scheme: Scheme::Gzc,
            repetitions: 1,
            bandwidths_ghz: vec![1.0, 0.1],
            state: true,
            initial_level: 0,
        }
    }
}

impl TrajectoryConfig {
    pub fn validate(&self, system: &LevelSystem) -> Result<()> {
        if self.scheme == Scheme::Custom || self.repetitions == 0 {
            return Err(Error::Config(
                "trajectory needs scheme gzc/frag and repetitions ≥ 1".into(),
            ));
        }
        if self.bandwidths_ghz.iter().any(|&b| !(b > 0.0)) {
            return Err(Error::Config(
                "trajectory.bandwidths_ghz must be positive".into(),
            ));
        }
        if self.initial_level >= system.len() {
            return Err(Error::Config(format!(
                "trajectory.initial_level {} exceeds the {}-level model",
                self.initial_level,
                system.len()
            )));
        }
        Ok(())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveformFormat {
    Csv,
    Binary,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaveformConfig {
    pub sample_rate_gsps: f64,
    pub v_pi_volts: f64,
    pub rf_frequency_ghz: f64,
    pub seed_wavelength_nm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub full_scale_rabi_ghz: Option<f64>,
    pub format: WaveformFormat,
}

impl Default for WaveformConfig {
    fn default() -> Self {
        WaveformConfig {
            sample_rate_gsps: 100.0,
            v_pi_volts: 1.0,
            rf_frequency_ghz: 10.0,
            seed_wavelength_nm: 1108.0,
            full_scale_rabi_ghz: None,
            format: WaveformFormat::Csv,
        }
    }
}

impl WaveformConfig {
    pub fn settings(&self) -> Result<WaveformSettings> {
        if !(self.seed_wavelength_nm > 0.0) {
            return Err(Error::Config(
                "waveform.seed_wavelength_nm must be positive".into(),
            ));
        }
        let mut s = WaveformSettings::new(self.sample_rate_gsps * 1e9, self.v_pi_volts);
        s.seed_frequency_hz = 299_792_458.0 / (self.seed_wavelength_nm * 1e-9);
        s.rf_frequency_hz = self.rf_frequency_ghz * 1e9;
        s.full_scale_rabi = self.full_scale_rabi_ghz.map(ghz);
        Ok(s)
    }
}

impl RunConfig {
    /// Parse TOML text, apply `key=value` overrides and check the schema.
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut value: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let cfg: RunConfig = toml::Value::Table(value)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?,
            None => format!("schema_version = {SCHEMA_VERSION}\n"),
        };
        Self::from_toml(&text, overrides)
    }

    /// Canonical TOML of the resolved configuration.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// SHA-256 of [`canonical`](Self::canonical), hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Check every section without running anything.
    pub fn validate(&self) -> Result<()> {
        let system = self.system.build()?;
        let pulse = self.pulse.build()?;
        self.sdk_map.build(pulse)?;
        self.robustness.validate()?;
        self.delay_scan.validate()?;
        self.gate.validate()?;
        self.gate_scan.validate()?;
        self.trajectory.validate(&system)?;
        self.waveform.settings()?;
        Ok(())
    }
}

/// Apply `a.b.c=value` to a TOML table. The value is parsed as TOML and
/// falls back to a bare string.
fn apply_override(root: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("override key `{key}` is malformed")));
    }
    let mut table = root;
    for p in &parts[..parts.len() - 1] {
        let entry = table
            .entry((*p).to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override `{key}`: `{p}` is not a table")))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
