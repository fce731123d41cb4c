//! Spin-dependent-kick fidelity: parameter maps, robustness curves and the
//! cumulative fidelity of a pulse train.
//!
//! A fast gate uses `N_p` pulse pairs, each flipping the qubit twice. With a
//! single-flip population error `ε` the kick train fidelity is
//! `F_s = |1 − 2N_pε + N_p²ε²| = (1 − N_pε)²`.
//!
//! Sweeps evaluate their points on the current rayon pool and always return
//! results in grid order.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::REFERENCE_PULSE_DURATION;
use crate::dynamics::{flip_error, TransferResult};
use crate::error::{Error, Result};
use crate::levels::LevelSystem;
use crate::pulses::{Protocol, ProtocolPulse};

/// `F_s = |1 − 2Nε + N²ε²|`.
pub fn cumulative_fidelity(epsilon: f64, pairs: u32) -> f64 {
    let n = f64::from(pairs);
    (1.0 - 2.0 * n * epsilon + n * n * epsilon * epsilon).abs()
}

/// Pulse parameters that a sweep axis can vary.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Ω₀, rad/s.
    PeakRabi,
    /// Δ, rad/s.
    Detuning,
    /// δ₀, rad/s.
    Sweep,
    /// t_d, s.
    Delay,
    /// ω_e, rad/s.
    EnvelopeFrequency,
    /// Relative intensity scale (dimensionless).
    Intensity,
}

impl SweepParameter {
    pub fn apply(self, pulse: &ProtocolPulse, value: f64) -> Result<ProtocolPulse> {
        let mut p = pulse.clone();
        match self {
            SweepParameter::PeakRabi => {
                if value < 0.0 {
                    return Err(Error::invalid("peak_rabi", "must be non-negative"));
                }
                p.peak_rabi = value;
            }
            SweepParameter::Detuning => p.detuning = value,
            SweepParameter::Sweep => p.sweep = value,
            SweepParameter::Delay => p = pulse.with_delay(value)?,
            SweepParameter::EnvelopeFrequency => {
                if !(value > 0.0) {
                    return Err(Error::invalid("envelope_frequency", "must be positive"));
                }
                p.envelope_frequency = value;
            }
            SweepParameter::Intensity => p = pulse.with_intensity_scale(value),
        }
        Ok(p)
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::PeakRabi => "peak_rabi",
            SweepParameter::Detuning => "detuning",
            SweepParameter::Sweep => "sweep",
            SweepParameter::Delay => "delay",
            SweepParameter::EnvelopeFrequency => "envelope_frequency",
            SweepParameter::Intensity => "intensity",
        }
    }

    /// The natural pair of map axes for a protocol.
    pub fn default_axes(protocol: Protocol) -> (SweepParameter, SweepParameter) {
        let y = match protocol {
            Protocol::Srt => SweepParameter::Detuning,
            Protocol::Arp => SweepParameter::Sweep,
            Protocol::Stirap => SweepParameter::Delay,
            Protocol::De => SweepParameter::EnvelopeFrequency,
        };
        (SweepParameter::PeakRabi, y)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisScale {
    Linear,
    Log,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub parameter: SweepParameter,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub scale: AxisScale,
}

impl Axis {
    pub fn linear(parameter: SweepParameter, min: f64, max: f64, count: usize) -> Result<Self> {
        let a = Axis {
            parameter,
            min,
            max,
            count,
            scale: AxisScale::Linear,
        };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(Error::invalid("count", "an axis needs at least two points"));
        }
        if !(self.min < self.max) || !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::invalid(
                "range",
                format!("need min < max, got [{:e}, {:e}]", self.min, self.max),
            ));
        }
        if self.scale == AxisScale::Log && self.min <= 0.0 {
            return Err(Error::invalid("range", "log axes need a positive minimum"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|k| {
                let f = k as f64 / (n - 1) as f64;
                match self.scale {
                    AxisScale::Linear => self.min + f * (self.max - self.min),
                    AxisScale::Log => (self.min.ln() + f * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect()
    }
}

/// Two-axis sweep around a fixed base pulse.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub x: Axis,
    pub y: Axis,
    pub base: ProtocolPulse,
}

impl SweepGrid {
    pub fn new(base: ProtocolPulse, x: Axis, y: Axis) -> Result<Self> {
        x.validate()?;
        y.validate()?;
        if x.parameter == y.parameter {
            return Err(Error::invalid(
                "axes",
                "the two axes must vary different parameters",
            ));
        }
        Ok(SweepGrid { x, y, base })
    }
}

/// One evaluated map cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MapCell {
    pub x: f64,
    pub y: f64,
    /// `None` when the cell could not be evaluated.
    pub epsilon: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FidelityMap {
    pub grid: SweepGrid,
    /// Row-major over `(x, y)`: all `y` for the first `x`, then the next `x`.
    pub cells: Vec<MapCell>,
}

impl FidelityMap {
    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| c.epsilon.is_none()).count()
    }

    /// Cell with the smallest ε.
    pub fn best(&self) -> Option<&MapCell> {
        self.cells
            .iter()
            .filter(|c| c.epsilon.is_some())
            .min_by(|a, b| a.epsilon.unwrap().total_cmp(&b.epsilon.unwrap()))
    }
}

/// Evaluate the single-flip error over a two-dimensional grid.
///
/// Failed cells are recorded with their error message rather than aborting
/// the map.
pub fn fidelity_map(system: &LevelSystem, grid: &SweepGrid, tol: f64) -> FidelityMap {
    let xs = grid.x.values();
    let ys = grid.y.values();
    let points: Vec<(f64, f64)> = xs
        .iter()
        .flat_map(|&x| ys.iter().map(move |&y| (x, y)))
        .collect();
    let cells = points
        .par_iter()
        .map(|&(x, y)| {
            let result = grid
                .x
                .parameter
                .apply(&grid.base, x)
                .and_then(|p| grid.y.parameter.apply(&p, y))
                .and_then(|p| flip_error(system, &p, tol));
            match result {
                Ok(r) => MapCell {
                    x,
                    y,
                    epsilon: Some(r.epsilon),
                    error: None,
                },
                Err(e) => MapCell {
                    x,
                    y,
                    epsilon: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    FidelityMap {
        grid: grid.clone(),
        cells,
    }
}

/// Quasi-static perturbation applied to both beams.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    /// Relative intensity change `p`: `I → (1 + p) I`.
    Intensity,
    /// Relative single-photon detuning change `p`: `Δ → (1 + p) Δ`, or
    /// `Δ = p Ω₀` for protocols operated on single-photon resonance.
    Detuning,
    /// Absolute delay deviation `p` (s): `t_d → t_d + p`.
    Delay,
}

impl Perturbation {
    pub fn apply(self, pulse: &ProtocolPulse, p: f64) -> Result<ProtocolPulse> {
        match self {
            Perturbation::Intensity => {
                if p <= -1.0 {
                    return Err(Error::invalid(
                        "perturbation",
                        "intensity cannot drop below zero",
                    ));
                }
                Ok(pulse.with_intensity_scale(1.0 + p))
            }
            Perturbation::Detuning => Ok(if pulse.detuning == 0.0 {
                pulse.with_detuning(p * pulse.peak_rabi)
            } else {
                pulse.with_detuning(pulse.detuning * (1.0 + p))
            }),
            Perturbation::Delay => {
                if pulse.protocol != Protocol::Stirap {
                    return Err(Error::invalid(
                        "perturbation",
                        "delay deviations apply to STIRAP only",
                    ));
                }
                pulse.with_delay(pulse.delay + p)
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Perturbation::Intensity => "intensity",
            Perturbation::Detuning => "detuning",
            Perturbation::Delay => "delay",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct RobustnessSample {
    pub perturbation: f64,
    pub epsilon: f64,
    pub one_minus_fs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RobustnessCurve {
    pub protocol: Protocol,
    pub kind: Perturbation,
    pub pairs: u32,
    pub samples: Vec<RobustnessSample>,
}

impl RobustnessCurve {
    pub fn max_infidelity(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.one_minus_fs)
            .fold(0.0, f64::max)
    }

    /// `max − min` of `1 − F_s` over the curve.
    pub fn span(&self) -> f64 {
        let lo = self
            .samples
            .iter()
            .map(|s| s.one_minus_fs)
            .fold(f64::INFINITY, f64::min);
        self.max_infidelity() - lo
    }

    /// Smallest `|perturbation|` at which `1 − F_s` first reaches
    /// `threshold`, walking outward from zero on each side and interpolating
    /// linearly between the bracketing samples.
    pub fn crossing(&self, threshold: f64) -> Option<f64> {
        let side = |sign: f64| -> Option<f64> {
            let mut pts: Vec<(f64, f64)> = self
                .samples
                .iter()
                .filter(|s| s.perturbation * sign >= 0.0)
                .map(|s| (s.perturbation.abs(), s.one_minus_fs))
                .collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut prev: Option<(f64, f64)> = None;
            for (x, y) in pts {
                if y >= threshold {
                    return Some(match prev {
                        Some((x0, y0)) if y > y0 => x0 + (threshold - y0) / (y - y0) * (x - x0),
                        _ => x,
                    });
                }
                prev = Some((x, y));
            }
            None
        };
        match (side(1.0), side(-1.0)) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// Largest `1 − F_s` among samples with `|perturbation| ≤ bound`.
    pub fn max_within(&self, bound: f64) -> f64 {
        self.samples
            .iter()
            .filter(|s| s.perturbation.abs() <= bound * (1.0 + 1e-12))
            .map(|s| s.one_minus_fs)
            .fold(0.0, f64::max)
    }
}

/// Propagate the pulse under each perturbation value and record `ε`, `1 − F_s`.
pub fn robustness_sweep(
    system: &LevelSystem,
    pulse: &ProtocolPulse,
    kind: Perturbation,
    values: &[f64],
    pairs: u32,
    tol: f64,
) -> Result<RobustnessCurve> {
    if pairs == 0 {
        return Err(Error::invalid("pairs", "need at least one pulse pair"));
    }
    let samples = values
        .par_iter()
        .map(|&p| {
            let perturbed = kind.apply(pulse, p)?;
            let r = flip_error(system, &perturbed, tol)?;
            Ok(RobustnessSample {
                perturbation: p,
                epsilon: r.epsilon,
                one_minus_fs: 1.0 - cumulative_fidelity(r.epsilon, pairs),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RobustnessCurve {
        protocol: pulse.protocol,
        kind,
        pairs,
        samples,
    })
}

/// `1 − F_s` of a STIRAP pulse as a function of delay deviation.
pub fn delay_sensitivity(
    system: &LevelSystem,
    pulse: &ProtocolPulse,
    deviations: &[f64],
    pairs: u32,
    tol: f64,
) -> Result<RobustnessCurve> {
    if pulse.protocol != Protocol::Stirap {
        return Err(Error::invalid(
            "protocol",
            "delay sensitivity is defined for STIRAP",
        ));
    }
    robustness_sweep(system, pulse, Perturbation::Delay, deviations, pairs, tol)
}

/// `n` evenly spaced values in `[-half_width, half_width]`.
pub fn symmetric_range(half_width: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![0.0];
    }
    (0..n)
        .map(|k| -half_width + 2.0 * half_width * k as f64 / (n - 1) as f64)
        .collect()
}

/// Calibrated single-flip operating points, τ = 1 ns.
///
/// | protocol | Ω₀/2π       | other                          |
/// |----------|-------------|--------------------------------|
/// | SRT      | 35.829 GHz  | Δ/2π = 400 GHz                 |
/// | ARP      | 120 GHz     | δ₀/2π = 18 GHz, Δ/2π = 400 GHz |
/// | STIRAP   | 47.959 GHz  | t_d = 0.26 ns, Δ = 0           |
/// | DE       | 48.647 GHz  | ω_e/2π = 200 GHz, Δ = 0        |
///
/// The SRT, DE and STIRAP Rabi frequencies are the values that minimise `ε`
/// (for STIRAP: that put the delay optimum at 0.26 ns); see
/// [`calibrate_peak_rabi`].
pub fn reference_pulse(protocol: Protocol) -> ProtocolPulse {
    let tau = REFERENCE_PULSE_DURATION;
    let ghz = |f: f64| TAU * f * 1e9;
    match protocol {
        Protocol::Srt => ProtocolPulse::srt(ghz(SRT_PEAK_RABI_GHZ), tau, ghz(400.0)),
        Protocol::Arp => ProtocolPulse::arp(ghz(120.0), tau, ghz(18.0), ghz(400.0)),
        Protocol::Stirap => ProtocolPulse::stirap(ghz(STIRAP_PEAK_RABI_GHZ), tau, 0.26e-9),
        Protocol::De => ProtocolPulse::de(ghz(DE_PEAK_RABI_GHZ), tau, ghz(200.0)),
    }
    .expect("reference parameters are valid")
}

pub const SRT_PEAK_RABI_GHZ: f64 = 35.8286;
pub const STIRAP_PEAK_RABI_GHZ: f64 = 47.9591;
pub const DE_PEAK_RABI_GHZ: f64 = 48.6471;

/// Golden-section search for a minimum of `f` on `[a, b]`.
pub fn golden_minimize<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    xtol: f64,
) -> Result<(f64, f64)> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > xtol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

/// Peak Rabi frequency in `[lo, hi]` that minimises the flip error.
///
/// The flip condition is found numerically rather than from a fixed pulse
/// area.
pub fn calibrate_peak_rabi(
    system: &LevelSystem,
    pulse: &ProtocolPulse,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(f64, TransferResult)> {
    let (best, _) = golden_minimize(
        |r| Ok(flip_error(system, &pulse.with_peak_rabi(r), tol)?.epsilon),
        lo,
        hi,
        (hi - lo) * 1e-5,
    )?;
    let r = flip_error(system, &pulse.with_peak_rabi(best), tol)?;
    Ok((best, r))
}

/// STIRAP delay in `[lo, hi]` that minimises the flip error.
pub fn optimal_delay(
    system: &LevelSystem,
    pulse: &ProtocolPulse,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    golden_minimize(
        |td| Ok(flip_error(system, &pulse.with_delay(td)?, tol)?.epsilon),
        lo,
        hi,
        1e-14,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levels::yb_lambda_system;
    use proptest::prelude::*;

    #[test]
    fn cumulative_fidelity_examples() {
        assert_eq!(cumulative_fidelity(0.0, 10), 1.0);
        assert_eq!(cumulative_fidelity(0.0, 1), 1.0);
        let f = cumulative_fidelity(5e-6, 10);
        assert!((f - (1.0 - 1e-4 + 2.5e-9)).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn factored_form(eps in 0.0f64..1.0, n in 1u32..200) {
            let nf = f64::from(n);
            let f = cumulative_fidelity(eps, n);
            let factored = (1.0 - nf * eps).powi(2);
            prop_assert!((f - factored).abs() <= 4.0 * f64::EPSILON * (1.0 + nf * eps).powi(2));
        }
    }

    #[test]
    fn axis_values() {
        let a = Axis::linear(SweepParameter::PeakRabi, 1.0, 3.0, 5).unwrap();
        assert_eq!(a.values(), vec![1.0, 1.5, 2.0, 2.5, 3.0]);
        let l = Axis {
            parameter: SweepParameter::Detuning,
            min: 1.0,
            max: 100.0,
            count: 3,
            scale: AxisScale::Log,
        };
        let v = l.values();
        assert!((v[1] - 10.0).abs() < 1e-12);
        assert!(Axis::linear(SweepParameter::PeakRabi, 1.0, 1.0, 5).is_err());
        assert!(Axis::linear(SweepParameter::PeakRabi, 0.0, 1.0, 1).is_err());
    }

    #[test]
    fn zero_intensity_row_is_all_error() {
        let base = reference_pulse(Protocol::Stirap);
        let grid = SweepGrid::new(
            base,
            Axis::linear(SweepParameter::PeakRabi, 0.0, TAU * 48e9, 2).unwrap(),
            Axis::linear(SweepParameter::Delay, 0.2e-9, 0.3e-9, 3).unwrap(),
        )
        .unwrap();
        let map = fidelity_map(&yb_lambda_system(), &grid, 1e-9);
        assert_eq!(map.cells.len(), 6);
        for c in &map.cells[..3] {
            assert_eq!(c.x, 0.0);
            assert_eq!(c.epsilon, Some(1.0));
        }
        assert_eq!(map.failures(), 0);
        assert!(map.best().unwrap().epsilon.unwrap() < 1e-3);
    }

    #[test]
    fn map_records_failures_per_cell() {
        let base = reference_pulse(Protocol::Stirap);
        let grid = SweepGrid::new(
            base,
            Axis::linear(SweepParameter::PeakRabi, TAU * 40e9, TAU * 48e9, 2).unwrap(),
            Axis::linear(SweepParameter::Delay, 0.5e-9, 1.5e-9, 2).unwrap(),
        )
        .unwrap();
        let map = fidelity_map(&yb_lambda_system(), &grid, 1e-8);
        assert_eq!(map.failures(), 2);
        assert!(map.cells[1].error.as_deref().unwrap().contains("delay"));
    }

    #[test]
    fn zero_perturbation_reproduces_nominal() {
        let sys = yb_lambda_system();
        for protocol in [Protocol::Srt, Protocol::Stirap] {
            let p = reference_pulse(protocol);
            let nominal = flip_error(&sys, &p, 1e-10).unwrap().epsilon;
            for kind in [Perturbation::Intensity, Perturbation::Detuning] {
                let c = robustness_sweep(&sys, &p, kind, &[0.0], 10, 1e-10).unwrap();
                assert_eq!(c.samples[0].epsilon, nominal);
            }
        }
    }

    #[test]
    fn perturbations() {
        let p = reference_pulse(Protocol::Srt);
        let q = Perturbation::Intensity.apply(&p, 0.21).unwrap();
        assert!((q.peak_rabi / p.peak_rabi - 1.1).abs() < 1e-12);
        let q = Perturbation::Detuning.apply(&p, -0.1).unwrap();
        assert!((q.detuning / p.detuning - 0.9).abs() < 1e-12);
        let s = reference_pulse(Protocol::Stirap);
        let q = Perturbation::Detuning.apply(&s, 0.1).unwrap();
        assert!((q.detuning - 0.1 * s.peak_rabi).abs() < 1e-3);
        let q = Perturbation::Delay.apply(&s, 20e-12).unwrap();
        assert!((q.delay - 0.28e-9).abs() < 1e-20);
        assert!(Perturbation::Delay.apply(&p, 1e-12).is_err());
        assert!(Perturbation::Intensity.apply(&p, -1.0).is_err());
    }

    #[test]
    fn stirap_mixing_angle_is_intensity_invariant() {
        let p = reference_pulse(Protocol::Stirap);
        let q = p.with_intensity_scale(1.1);
        for k in 1..50 {
            let t = p.total_duration() * f64::from(k) / 50.0;
            let a = p.pump(t).atan2(p.stokes(t));
            let b = q.pump(t).atan2(q.stokes(t));
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, fx) = golden_minimize(|x| Ok((x - 0.3).powi(2)), -1.0, 2.0, 1e-10).unwrap();
        assert!((x - 0.3).abs() < 1e-9);
        assert!(fx < 1e-18);
    }

    #[test]
    fn arp_flattens_with_wider_sweep() {
        let system = yb_lambda_system();
        let values = symmetric_range(0.1, 5);
        let span = |sweep_ghz: f64| {
            let p = reference_pulse(Protocol::Arp);
            let p = ProtocolPulse::arp(p.peak_rabi, p.duration, TAU * sweep_ghz * 1e9, p.detuning)
                .unwrap();
            robustness_sweep(&system, &p, Perturbation::Intensity, &values, 10, 1e-9)
                .unwrap()
                .span()
        };
        let narrow = span(2.0);
        let wide = span(18.0);
        assert!(
            wide < 0.1 * narrow,
            "span {wide:e} at 18 GHz vs {narrow:e} at 2 GHz"
        );
    }

    #[test]
    fn crossing_interpolates_outward() {
        let curve = RobustnessCurve {
            protocol: Protocol::Stirap,
            kind: Perturbation::Delay,
            pairs: 10,
            samples: [
                (-2.0, 5.0),
                (-1.0, 1.0),
                (0.0, 0.0),
                (1.0, 2.0),
                (2.0, 0.5),
                (3.0, 4.0),
            ]
            .iter()
            .map(|&(p, y)| RobustnessSample {
                perturbation: p,
                epsilon: 0.0,
                one_minus_fs: y,
            })
            .collect(),
        };
        // positive side crosses 1.5 between 0 and 1; negative side between 1 and 2
        assert!((curve.crossing(1.5).unwrap() - 0.75).abs() < 1e-15);
        assert!((curve.crossing(3.0).unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(curve.crossing(10.0), None);
    }

    #[test]
    fn symmetric_range_is_symmetric() {
        let r = symmetric_range(0.1, 5);
        assert_eq!(r.len(), 5);
        assert!((r[0] + 0.1).abs() < 1e-15 && r[2].abs() < 1e-15 && (r[4] - 0.1).abs() < 1e-15);
    }
}
