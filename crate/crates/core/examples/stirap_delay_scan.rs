//! How precisely the pump/Stokes delay of STIRAP must be held.

use ionkick::dynamics::DEFAULT_TOL;
use ionkick::levels::yb_lambda_system;
use ionkick::pulses::Protocol;
use ionkick::sdk::{delay_sensitivity, reference_pulse, symmetric_range};

fn main() -> ionkick::Result<()> {
    let pulse = reference_pulse(Protocol::Stirap);
    let deviations = symmetric_range(100e-12, 21);
    let curve = delay_sensitivity(&yb_lambda_system(), &pulse, &deviations, 10, DEFAULT_TOL)?;
    println!("t_d = {:.0} ps", pulse.delay * 1e12);
    println!("{:>10} {:>12}", "Δt_d/ps", "1-F_s");
    for s in &curve.samples {
        println!("{:>10.0} {:>12.3e}", s.perturbation * 1e12, s.one_minus_fs);
    }
    for threshold in [1e-4, 2e-4] {
        match curve.crossing(threshold) {
            Some(x) => println!("1-F_s reaches {threshold:e} at |Δt_d| = {:.1} ps", x * 1e12),
            None => println!("1-F_s stays below {threshold:e}"),
        }
    }
    Ok(())
}
