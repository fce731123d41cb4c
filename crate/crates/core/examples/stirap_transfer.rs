//! Population transfer of a single STIRAP kick through the Λ system.

use ionkick::dynamics::{
    propagate_hamiltonian, transfer_error, PropagateOptions, RamanHamiltonian, DEFAULT_TOL,
};
use ionkick::levels::yb_lambda_system;
use ionkick::pulses::Protocol;
use ionkick::sdk::reference_pulse;

fn main() -> ionkick::Result<()> {
    let system = yb_lambda_system();
    let pulse = reference_pulse(Protocol::Stirap);
    let ham = RamanHamiltonian::new(&system, &pulse);
    let opts = PropagateOptions {
        record: true,
        ..PropagateOptions::with_tol(DEFAULT_TOL)
    };
    let prop = propagate_hamiltonian(&ham, &opts)?;

    let (g, e, t) = (system.ground(), system.reference_excited(), system.target());
    let states = prop.column_trajectory(g);
    let stride = (states.len() / 12).max(1);
    println!("{:>8} {:>10} {:>10} {:>10}", "t/ns", "P0", "Pe", "P1");
    for (time, psi) in prop.t_grid.iter().zip(&states).step_by(stride) {
        println!(
            "{:>8.3} {:>10.6} {:>10.2e} {:>10.6}",
            time * 1e9,
            psi[g].norm_sqr(),
            psi[e].norm_sqr(),
            psi[t].norm_sqr()
        );
    }

    let r = transfer_error(&prop, g, t);
    println!(
        "\nflip error {:.3e}, peak intermediate population {:.3e}",
        r.epsilon, r.intermediate_peak
    );
    println!(
        "{} adaptive steps, unitarity defect {:.1e}",
        prop.steps,
        prop.unitarity_defect()
    );
    Ok(())
}
