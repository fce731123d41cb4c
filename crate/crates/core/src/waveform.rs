//! Drive-signal synthesis for the programmable pulse source.
//!
//! A CW seed passes a phase EOM driven at `ω_p`, a grating keeps the `+3`
//! sideband (`ω₀ + 3ω_p`), an intensity EOM shapes it with
//! `sin(πV_I/2V_π)` and third-harmonic generation cubes the field. The UV
//! output therefore has
//!
//! ```text
//! ω(t) = 3ω₀ + 9ω_p,        I(t) = I₀ sin⁶(πV_I(t)/2V_π),
//! ```
//!
//! and a Rabi envelope `Ω(t)/Ω_fs = sin³(πV_I/2V_π)`, where `Ω_fs` is the Rabi
//! frequency at `V_I = V_π`.
//!
//! The two Raman beams are produced one after the other by hopping the RF by
//! `δ_HF/9`; a retro-reflection path delay then overlaps them at the ions. A
//! compiled program is thus a Stokes segment followed by a pump segment.
//! Negative field values (the DE protocol) are produced by a `π/9` RF phase
//! step, which the ninefold multiplication turns into a sign flip.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::io::{Read, Write};

use serde::Serialize;

use crate::constants::{HYPERFINE_SPLITTING, SEED_FREQUENCY_HZ};
use crate::error::{Error, Result};
use crate::output::Float;
use crate::pulses::{Protocol, ProtocolPulse};

/// Magic bytes opening the binary sample format.
pub const BINARY_MAGIC: &[u8; 8] = b"IONKWF01";

pub const CSV_HEADER: &str = "t,phase_rf_freq_hz,phase_rf_phase_rad,intensity_v_over_vpi";

/// Required ratio of sample rate to the highest frequency in the envelope.
pub const OVERSAMPLING: f64 = 20.0;

/// Bessel function of the first kind `J_n(x)` for integer order.
///
/// Uses Miller's backward recurrence normalised with
/// `J₀ + 2ΣJ_{2k} = 1`.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    if n < 0 {
        let v = bessel_j(-n, x);
        return if n % 2 == 0 { v } else { -v };
    }
    if x < 0.0 {
        let v = bessel_j(n, -x);
        return if n % 2 == 0 { v } else { -v };
    }
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let n = n as usize;
    let start = {
        let m = n.max(x as usize) + 30 + (x.sqrt() * 10.0) as usize;
        m + m % 2
    };
    let (mut jp1, mut j) = (0.0f64, 1e-300f64);
    let mut norm = 0.0;
    let mut want = 0.0;
    for k in (0..start).rev() {
        let jm1 = 2.0 * (k + 1) as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        if k == n {
            want = j;
        }
        if k % 2 == 0 && k > 0 {
            norm += 2.0 * j;
        }
        if j.abs() > 1e250 {
            jp1 *= 1e-250;
            j *= 1e-250;
            norm *= 1e-250;
            want *= 1e-250;
        }
    }
    norm += j;
    want / norm
}

/// Sideband amplitudes `(n, J_n(β))` for `|n| ≤ n_max` after a phase EOM of
/// modulation depth `β`. Sideband `n` sits at `ω₀ + nω_p`.
pub fn phase_eom_spectrum(beta: f64, n_max: u32) -> Result<Vec<(i32, f64)>> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::invalid(
            "beta",
            "modulation depth must be finite and non-negative",
        ));
    }
    let n = n_max as i32;
    Ok((-n..=n).map(|k| (k, bessel_j(k, beta))).collect())
}

/// Field transmission `sin(πV/2V_π)` of the intensity EOM.
pub fn intensity_transfer(v: f64, v_pi: f64) -> f64 {
    (PI * v / (2.0 * v_pi)).sin()
}

/// Sawtooth of amplitude `2V_π` and period `2τ`, rising through zero at
/// `t = 0`. Driving the intensity EOM with it gives `I₀ sin⁶(πt/τ)`.
pub fn sawtooth(t: f64, tau: f64, v_pi: f64) -> f64 {
    let phase = (t / (2.0 * tau) + 0.5).rem_euclid(1.0);
    2.0 * v_pi * (2.0 * phase - 1.0)
}

/// Which Raman beam a segment of the program produces.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Beam {
    Pump,
    Stokes,
}

/// Contiguous run of samples belonging to one beam.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct Segment {
    pub beam: Beam,
    pub start: usize,
    pub len: usize,
}

/// Hardware settings for compilation.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct WaveformSettings {
    /// Samples per second of the AWG.
    pub sample_rate: f64,
    /// Half-wave voltage of the intensity EOM, volts.
    pub v_pi: f64,
    /// Seed laser frequency, Hz.
    pub seed_frequency_hz: f64,
    /// Phase-EOM drive frequency for the Stokes beam, Hz.
    pub rf_frequency_hz: f64,
    /// Rabi frequency delivered at `V_I = V_π` (rad/s); `None` uses the
    /// pulse's peak Rabi frequency.
    pub full_scale_rabi: Option<f64>,
}

impl WaveformSettings {
    pub fn new(sample_rate: f64, v_pi: f64) -> Self {
        WaveformSettings {
            sample_rate,
            v_pi,
            seed_frequency_hz: SEED_FREQUENCY_HZ,
            rf_frequency_hz: 10.0e9,
            full_scale_rabi: None,
        }
    }
}

/// RF step between the two Raman segments, rad/s.
pub fn rf_hop() -> f64 {
    HYPERFINE_SPLITTING / 9.0
}

/// Sampled AWG output for one protocol pulse.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WaveformProgram {
    pub protocol: Protocol,
    pub settings: WaveformSettings,
    /// Phase-EOM drive frequency per sample, Hz.
    pub rf_frequency_hz: Vec<f64>,
    /// Phase-EOM drive phase `φ_p` per sample, rad.
    pub rf_phase: Vec<f64>,
    /// Intensity-EOM voltage per sample, in units of `V_π`.
    pub intensity_v: Vec<f64>,
    pub segments: Vec<Segment>,
    /// Extra optical path, in seconds of flight, needed on the first segment
    /// so that both beams reach the ions together.
    pub path_delay: f64,
}

impl WaveformProgram {
    pub fn len(&self) -> usize {
        self.intensity_v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intensity_v.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 / self.settings.sample_rate
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for k in 0..self.len() {
            writeln!(
                out,
                "{},{},{},{}",
                Float(self.time(k)),
                Float(self.rf_frequency_hz[k]),
                Float(self.rf_phase[k]),
                Float(self.intensity_v[k])
            )?;
        }
        Ok(())
    }

    /// Binary form: magic, `f64` sample rate, `u64` channel count, `u64`
    /// sample count, then sample-major little-endian `f64` values for the
    /// channels (RF frequency in Hz, RF phase in rad, voltage over `V_π`).
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        let ch = self.channels();
        out.write_all(BINARY_MAGIC)?;
        out.write_all(&self.settings.sample_rate.to_le_bytes())?;
        out.write_all(&(ch.len() as u64).to_le_bytes())?;
        out.write_all(&(self.len() as u64).to_le_bytes())?;
        for k in 0..self.len() {
            for c in &ch {
                out.write_all(&c[k].to_le_bytes())?;
            }
        }
        Ok(())
    }

    fn channels(&self) -> [&[f64]; 3] {
        [&self.rf_frequency_hz, &self.rf_phase, &self.intensity_v]
    }
}

/// Raw samples read back from the binary format.
#[derive(Clone, Debug, PartialEq)]
pub struct RawSamples {
    pub sample_rate: f64,
    /// `channels[c][k]`.
    pub channels: Vec<Vec<f64>>,
}

pub fn read_binary<R: Read>(mut input: R) -> Result<RawSamples> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != BINARY_MAGIC {
        return Err(Error::Waveform("not an IONKWF01 file".into()));
    }
    let mut word = [0u8; 8];
    input.read_exact(&mut word)?;
    let sample_rate = f64::from_le_bytes(word);
    input.read_exact(&mut word)?;
    let nch = u64::from_le_bytes(word) as usize;
    input.read_exact(&mut word)?;
    let ns = u64::from_le_bytes(word) as usize;
    if nch == 0 || nch > 64 {
        return Err(Error::Waveform(format!("implausible channel count {nch}")));
    }
    let mut channels = vec![Vec::with_capacity(ns); nch];
    for _ in 0..ns {
        for c in channels.iter_mut() {
            input.read_exact(&mut word)?;
            c.push(f64::from_le_bytes(word));
        }
    }
    Ok(RawSamples {
        sample_rate,
        channels,
    })
}

/// Highest frequency (Hz) present in a protocol's field envelope.
pub fn envelope_bandwidth(pulse: &ProtocolPulse) -> f64 {
    // sin³ contains harmonics up to 3/(2τ); cos³(ω_e t) adds 3ω_e
    let base = 3.0 / (2.0 * pulse.duration);
    match pulse.protocol {
        Protocol::De => base + 3.0 * pulse.envelope_frequency / TAU,
        _ => base,
    }
}

/// Compile a protocol pulse into AWG samples.
///
/// The voltage inverts the forward chain on the cube root of the normalised
/// field, `V = (2V_π/π) asin((|Ω|/Ω_fs)^{1/3})`, on the principal branch.
pub fn compile_protocol(
    pulse: &ProtocolPulse,
    settings: &WaveformSettings,
) -> Result<WaveformProgram> {
    let fs = settings.sample_rate;
    if !(fs > 0.0) || !fs.is_finite() {
        return Err(Error::invalid("sample_rate", "must be positive"));
    }
    if !(settings.v_pi > 0.0) {
        return Err(Error::invalid("v_pi", "must be positive"));
    }
    let f_max = envelope_bandwidth(pulse);
    if fs < OVERSAMPLING * f_max {
        return Err(Error::Waveform(format!(
            "sample rate {fs:e} Hz is below {OVERSAMPLING}× the envelope bandwidth {f_max:e} Hz"
        )));
    }
    let full_scale = settings.full_scale_rabi.unwrap_or(pulse.peak_rabi);
    if !(full_scale >= 0.0) {
        return Err(Error::invalid("full_scale_rabi", "must be non-negative"));
    }

    let span = pulse.total_duration();
    let per_segment = (span * fs).round() as usize + 1;
    let hop_hz = rf_hop() / TAU;
    let mut program = WaveformProgram {
        protocol: pulse.protocol,
        settings: *settings,
        rf_frequency_hz: Vec::with_capacity(2 * per_segment),
        rf_phase: Vec::with_capacity(2 * per_segment),
        intensity_v: Vec::with_capacity(2 * per_segment),
        segments: Vec::with_capacity(2),
        path_delay: per_segment as f64 / fs,
    };
    for (beam, rf) in [
        (Beam::Stokes, settings.rf_frequency_hz),
        (Beam::Pump, settings.rf_frequency_hz + hop_hz),
    ] {
        program.segments.push(Segment {
            beam,
            start: program.len(),
            len: per_segment,
        });
        for k in 0..per_segment {
            let t = k as f64 / fs;
            let omega = match beam {
                Beam::Pump => pulse.pump(t),
                Beam::Stokes => pulse.stokes(t),
            };
            let x = if full_scale > 0.0 {
                omega.abs() / full_scale
            } else {
                0.0
            };
            if x > 1.0 + 1e-12 {
                return Err(Error::Waveform(format!(
                    "{beam:?} envelope reaches {x} of full scale at t = {t:e} s (clipping)"
                )));
            }
            let v = 2.0 / PI * x.min(1.0).cbrt().asin();
            program.rf_frequency_hz.push(rf);
            program
                .rf_phase
                .push(if omega < 0.0 { PI / 9.0 } else { 0.0 });
            program.intensity_v.push(v);
        }
    }
    Ok(program)
}

/// Optical output predicted from a program.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredictedOutput {
    /// `I(t)/I₀`.
    pub intensity: Vec<f64>,
    /// UV carrier frequency, Hz.
    pub frequency_hz: Vec<f64>,
    /// UV field phase offset `9φ_p`, rad.
    pub phase: Vec<f64>,
}

impl PredictedOutput {
    /// Signed normalised field `±√(I/I₀)`, sign taken from the phase.
    pub fn signed_field(&self) -> Vec<f64> {
        self.intensity
            .iter()
            .zip(&self.phase)
            .map(|(i, p)| i.sqrt() * p.cos().signum())
            .collect()
    }
}

pub fn predict_output(program: &WaveformProgram) -> PredictedOutput {
    let f0 = program.settings.seed_frequency_hz;
    PredictedOutput {
        intensity: program
            .intensity_v
            .iter()
            .map(|&v| (v * FRAC_PI_2).sin().powi(6))
            .collect(),
        frequency_hz: program
            .rf_frequency_hz
            .iter()
            .map(|&f| 3.0 * f0 + 9.0 * f)
            .collect(),
        phase: program.rf_phase.iter().map(|&p| 9.0 * p).collect(),
    }
}

/// RMS difference between the predicted intensity and the pulse's own
/// `(Ω/Ω_fs)²` over the whole program.
pub fn envelope_rms_error(pulse: &ProtocolPulse, program: &WaveformProgram) -> f64 {
    let out = predict_output(program);
    let full_scale = program.settings.full_scale_rabi.unwrap_or(pulse.peak_rabi);
    let mut acc = 0.0;
    for seg in &program.segments {
        for k in 0..seg.len {
            let t = k as f64 / program.settings.sample_rate;
            let omega = match seg.beam {
                Beam::Pump => pulse.pump(t),
                Beam::Stokes => pulse.stokes(t),
            };
            let want = if full_scale > 0.0 {
                (omega / full_scale).powi(2)
            } else {
                0.0
            };
            acc += (out.intensity[seg.start + k] - want).powi(2);
        }
    }
    (acc / program.len().max(1) as f64).sqrt()
}
