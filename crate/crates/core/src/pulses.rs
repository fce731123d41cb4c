//! Field envelopes of the four spin-dependent-kick protocols.
//!
//! Every protocol is stored as a pair of Rabi-frequency envelopes (pump leg
//! `|0⟩ ↔ |e⟩`, Stokes leg `|1⟩ ↔ |e⟩`) built from the window
//! `s(t) = sin³(πt/τ)`, together with a two-photon detuning profile and a
//! static single-photon detuning.
//!
//! | protocol | pump `Ω₁(t)`                  | Stokes `Ω₂(t)`                | `δ(t)`           |
//! |----------|-------------------------------|-------------------------------|------------------|
//! | SRT      | `Ω₀ s(t)`                     | `Ω₀ s(t)`                     | 0                |
//! | ARP      | `Ω₀ s(t)`                     | `Ω₀ s(t)`                     | `δ₀ cos(πt/τ)`   |
//! | STIRAP   | `Ω₀ s(t − t_d)`               | `Ω₀ s(t)`                     | 0                |
//! | DE       | `Ω₀ s(t) cos³(ω_e t)`         | `Ω₀ s(t) sin³(ω_e t)`         | 0                |
//!
//! Beam intensities follow `I ∝ Ω²`, so the SRT/ARP intensity is `∝ sin⁶`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levels::KickDirection;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Srt,
    Arp,
    Stirap,
    De,
}

impl Protocol {
    pub const ALL: [Protocol; 4] = [Protocol::Srt, Protocol::Arp, Protocol::Stirap, Protocol::De];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Srt => "SRT",
            Protocol::Arp => "ARP",
            Protocol::Stirap => "STIRAP",
            Protocol::De => "DE",
        }
    }
}

impl std::fmt::Display for Protocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "srt" => Ok(Protocol::Srt),
            "arp" => Ok(Protocol::Arp),
            "stirap" => Ok(Protocol::Stirap),
            "de" => Ok(Protocol::De),
            other => Err(Error::invalid(
                "protocol",
                format!("unknown protocol `{other}`"),
            )),
        }
    }
}

/// Instantaneous drive values.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct PulseSample {
    /// Pump-leg Rabi frequency, rad/s (signed for DE).
    pub pump: f64,
    /// Stokes-leg Rabi frequency, rad/s (signed for DE).
    pub stokes: f64,
    /// Two-photon detuning, rad/s.
    pub two_photon_detuning: f64,
}

/// One Raman pulse pair of a given protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolPulse {
    pub protocol: Protocol,
    /// Duration τ of a single envelope, s.
    pub duration: f64,
    /// Peak single-leg Rabi frequency Ω₀, rad/s.
    pub peak_rabi: f64,
    /// Single-photon detuning Δ, rad/s.
    pub detuning: f64,
    /// Two-photon sweep amplitude δ₀ (ARP), rad/s.
    pub sweep: f64,
    /// Stokes → pump delay t_d (STIRAP), s.
    pub delay: f64,
    /// Envelope oscillation frequency ω_e (DE), rad/s.
    pub envelope_frequency: f64,
    pub direction: KickDirection,
}

fn window(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        (PI * x).sin().powi(3)
    }
}

fn check_duration(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            "duration",
            format!("must be positive and finite, got {tau:e}"),
        ))
    }
}

fn check_finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, "must be finite"))
    }
}

impl ProtocolPulse {
    fn base(protocol: Protocol, peak_rabi: f64, duration: f64, detuning: f64) -> Result<Self> {
        check_duration(duration)?;
        check_finite("peak_rabi", peak_rabi)?;
        check_finite("detuning", detuning)?;
        if peak_rabi < 0.0 {
            return Err(Error::invalid("peak_rabi", "must be non-negative"));
        }
        Ok(ProtocolPulse {
            protocol,
            duration,
            peak_rabi,
            detuning,
            sweep: 0.0,
            delay: 0.0,
            envelope_frequency: 0.0,
            direction: KickDirection::Forward,
        })
    }

    /// Stimulated Raman transition with identical `Ω₀ sin³(πt/τ)` legs.
    pub fn srt(peak_rabi: f64, duration: f64, detuning: f64) -> Result<Self> {
        let p = Self::base(Protocol::Srt, peak_rabi, duration, detuning)?;
        if detuning.abs() < 10.0 * peak_rabi {
            log::warn!(
                "SRT with |Δ| = {:e} rad/s not far above Ω₀ = {:e} rad/s; the excited level will be populated",
                detuning.abs(),
                peak_rabi
            );
        }
        Ok(p)
    }

    /// Adiabatic rapid passage: SRT envelopes plus `δ(t) = δ₀ cos(πt/τ)`.
    pub fn arp(peak_rabi: f64, duration: f64, sweep: f64, detuning: f64) -> Result<Self> {
        check_finite("sweep", sweep)?;
        let mut p = Self::base(Protocol::Arp, peak_rabi, duration, detuning)?;
        p.sweep = sweep;
        Ok(p)
    }

    /// Counter-intuitive STIRAP: Stokes on `[0, τ]`, pump on `[t_d, t_d + τ]`,
    /// single-photon resonant.
    pub fn stirap(peak_rabi: f64, duration: f64, delay: f64) -> Result<Self> {
        let mut p = Self::base(Protocol::Stirap, peak_rabi, duration, 0.0)?;
        if !(delay >= 0.0 && delay < duration) {
            return Err(Error::invalid(
                "delay",
                format!("must lie in [0, τ) for overlapping pulses, got {delay:e} s with τ = {duration:e} s"),
            ));
        }
        p.delay = delay;
        Ok(p)
    }

    /// Dynamical elimination: zero-area `cos³`/`sin³` modulated legs.
    pub fn de(peak_rabi: f64, duration: f64, envelope_frequency: f64) -> Result<Self> {
        let mut p = Self::base(Protocol::De, peak_rabi, duration, 0.0)?;
        if !(envelope_frequency > 0.0 && envelope_frequency.is_finite()) {
            return Err(Error::invalid(
                "envelope_frequency",
                format!("must be positive, got {envelope_frequency:e}"),
            ));
        }
        p.envelope_frequency = envelope_frequency;
        Ok(p)
    }

    /// Scale both beam intensities by `scale` (Rabi frequencies by `√scale`).
    pub fn with_intensity_scale(&self, scale: f64) -> Self {
        let mut p = self.clone();
        p.peak_rabi *= scale.max(0.0).sqrt();
        p
    }

    pub fn with_peak_rabi(&self, peak_rabi: f64) -> Self {
        let mut p = self.clone();
        p.peak_rabi = peak_rabi;
        p
    }

    pub fn with_detuning(&self, detuning: f64) -> Self {
        let mut p = self.clone();
        p.detuning = detuning;
        p
    }

    pub fn with_delay(&self, delay: f64) -> Result<Self> {
        let mut p = self.clone();
        if self.protocol == Protocol::Stirap && !(delay >= 0.0 && delay < self.duration) {
            return Err(Error::invalid(
                "delay",
                format!("must lie in [0, τ), got {delay:e} s"),
            ));
        }
        p.delay = delay;
        Ok(p)
    }

    pub fn with_direction(&self, direction: KickDirection) -> Self {
        let mut p = self.clone();
        p.direction = direction;
        p
    }

    /// Length of the window in which any field is on.
    pub fn total_duration(&self) -> f64 {
        match self.protocol {
            Protocol::Stirap => self.duration + self.delay,
            _ => self.duration,
        }
    }

    pub fn pump(&self, t: f64) -> f64 {
        let tau = self.duration;
        match self.protocol {
            Protocol::Srt | Protocol::Arp => self.peak_rabi * window(t / tau),
            Protocol::Stirap => self.peak_rabi * window((t - self.delay) / tau),
            Protocol::De => {
                self.peak_rabi * window(t / tau) * (self.envelope_frequency * t).cos().powi(3)
            }
        }
    }

    pub fn stokes(&self, t: f64) -> f64 {
        let tau = self.duration;
        match self.protocol {
            Protocol::Srt | Protocol::Arp | Protocol::Stirap => self.peak_rabi * window(t / tau),
            Protocol::De => {
                self.peak_rabi * window(t / tau) * (self.envelope_frequency * t).sin().powi(3)
            }
        }
    }

    /// Two-photon detuning, evaluated at `t` clamped into the pulse window.
    pub fn two_photon_detuning(&self, t: f64) -> f64 {
        match self.protocol {
            Protocol::Arp => {
                let tc = t.clamp(0.0, self.duration);
                self.sweep * (PI * tc / self.duration).cos()
            }
            _ => 0.0,
        }
    }

    /// `∫₀ᵗ δ(t') dt'` (clamped outside the window).
    pub fn detuning_integral(&self, t: f64) -> f64 {
        match self.protocol {
            Protocol::Arp => {
                let tau = self.duration;
                let tc = t.clamp(0.0, tau);
                let inside = self.sweep * tau / PI * (PI * tc / tau).sin();
                inside + self.two_photon_detuning(t) * (t - tc)
            }
            _ => 0.0,
        }
    }

    pub fn sample(&self, t: f64) -> PulseSample {
        PulseSample {
            pump: self.pump(t),
            stokes: self.stokes(t),
            two_photon_detuning: self.two_photon_detuning(t),
        }
    }

    /// Largest integration step that resolves the fastest envelope feature.
    pub fn max_step(&self) -> f64 {
        match self.protocol {
            Protocol::De => (2.0 * PI / self.envelope_frequency) / 20.0,
            _ => self.duration / 20.0,
        }
    }

    /// Points where an envelope has a kink (window edges); integration
    /// segments are split there.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = vec![0.0, self.total_duration()];
        if self.protocol == Protocol::Stirap && self.delay > 0.0 {
            b.push(self.delay);
            b.push(self.duration);
        }
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }
}
