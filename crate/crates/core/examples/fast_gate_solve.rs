//! Shortest GZC and FRAG kick sequences that close both motional loops and
//! accumulate a π/4 phase.

use std::f64::consts::FRAC_PI_4;

use ionkick::fastgate::{gate_report, solve_fastest, Scheme, SolverOptions, TrapConfig};

fn main() -> ionkick::Result<()> {
    let trap = TrapConfig::reference();
    println!(
        "{:>5} {:>2} {:>4} {:>11} {:>26} {:>9} {:>9}",
        "", "n", "N_p", "T/µs", "ωτ", "|α|max", "|φ-π/4|"
    );
    for scheme in [Scheme::Gzc, Scheme::Frag] {
        for n in 1..=4 {
            let (seq, report) = solve_fastest(scheme, n, &trap, 64, &SolverOptions::default())?;
            let r = gate_report(&seq, &trap, 0.0);
            let w = report.omega_tau;
            println!(
                "{:>5} {:>2} {:>4} {:>11.5} {:>8.4} {:>8.4} {:>8.4} {:>9.1e} {:>9.1e}",
                scheme.name(),
                n,
                seq.pulse_pairs(),
                seq.gate_time() * 1e6,
                w[0],
                w[1],
                w[2],
                r.alpha_c.norm().max(r.alpha_s.norm()),
                (r.phi - FRAC_PI_4).abs()
            );
        }
    }
    Ok(())
}
