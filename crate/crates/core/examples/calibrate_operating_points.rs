//! Locate the flip-error minimum in peak Rabi frequency for SRT and DE, and
//! the best pump/Stokes delay for STIRAP.

use std::f64::consts::TAU;

use ionkick::dynamics::DEFAULT_TOL;
use ionkick::levels::yb_lambda_system;
use ionkick::pulses::Protocol;
use ionkick::sdk::{calibrate_peak_rabi, optimal_delay, reference_pulse};

fn main() -> ionkick::Result<()> {
    let system = yb_lambda_system();
    let ghz = TAU * 1e9;
    for (protocol, lo, hi) in [(Protocol::Srt, 30.0, 40.0), (Protocol::De, 44.0, 52.0)] {
        let (rabi, r) = calibrate_peak_rabi(
            &system,
            &reference_pulse(protocol),
            lo * ghz,
            hi * ghz,
            DEFAULT_TOL,
        )?;
        println!(
            "{:<6} Ω₀ = {:.4} GHz, ε = {:.2e}",
            protocol.name(),
            rabi / ghz,
            r.epsilon
        );
    }
    let stirap = reference_pulse(Protocol::Stirap);
    let (td, eps) = optimal_delay(&system, &stirap, 0.22e-9, 0.30e-9, DEFAULT_TOL)?;
    println!(
        "STIRAP at Ω₀ = {:.4} GHz: t_d = {:.1} ps, ε = {:.2e}",
        stirap.peak_rabi / ghz,
        td * 1e12,
        eps
    );
    Ok(())
}
