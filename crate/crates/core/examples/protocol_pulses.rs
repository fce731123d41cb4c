//! Envelopes of the four kick protocols at their reference operating points.

use std::f64::consts::TAU;

use ionkick::pulses::Protocol;
use ionkick::sdk::reference_pulse;

fn main() {
    for protocol in Protocol::ALL {
        let p = reference_pulse(protocol);
        let total = p.total_duration();
        println!("{} (window {:.2} ns)", protocol.name(), total * 1e9);
        println!(
            "  {:>8} {:>12} {:>12} {:>12}",
            "t/ns", "pump/GHz", "stokes/GHz", "delta/GHz"
        );
        for k in 0..=8 {
            let t = total * f64::from(k) / 8.0;
            let s = p.sample(t);
            let ghz = |w: f64| w / TAU / 1e9;
            println!(
                "  {:>8.3} {:>12.4} {:>12.4} {:>12.4}",
                t * 1e9,
                ghz(s.pump),
                ghz(s.stokes),
                ghz(s.two_photon_detuning)
            );
        }
    }
}
