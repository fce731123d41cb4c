//! Kick-train infidelity of each protocol under ±10 % intensity and detuning
//! deviations, with 10 pulse pairs.

use ionkick::dynamics::DEFAULT_TOL;
use ionkick::levels::yb_lambda_system;
use ionkick::pulses::Protocol;
use ionkick::sdk::{reference_pulse, robustness_sweep, symmetric_range, Perturbation};

fn main() -> ionkick::Result<()> {
    let system = yb_lambda_system();
    let values = symmetric_range(0.1, 9);
    for kind in [Perturbation::Intensity, Perturbation::Detuning] {
        println!("{} deviation", kind.name());
        print!("{:>8}", "p");
        for protocol in Protocol::ALL {
            print!("{:>11}", protocol.name());
        }
        println!();
        let curves = Protocol::ALL
            .iter()
            .map(|&p| {
                robustness_sweep(&system, &reference_pulse(p), kind, &values, 10, DEFAULT_TOL)
            })
            .collect::<ionkick::Result<Vec<_>>>()?;
        for (k, p) in values.iter().enumerate() {
            print!("{:>8.3}", p);
            for c in &curves {
                print!("{:>11.2e}", c.samples[k].one_minus_fs);
            }
            println!();
        }
        println!();
    }
    Ok(())
}
