//! Cross-check of the analytic displacements and phase against brute-force
//! evolution in a truncated two-mode Fock space. At η = 0.1 the π/4 sequence
//! solved for η = 0.3 still closes, and its phase drops by a factor of nine.

use num_complex::Complex64;

use ionkick::fastgate::{
    closure, fock_oracle, gate_phase, solve_fastest, Scheme, SolverOptions, TrapConfig,
};

fn main() -> ionkick::Result<()> {
    let trap = TrapConfig::reference();
    let weak = trap.with_eta(0.1);
    let (seq, _) = solve_fastest(Scheme::Gzc, 2, &trap, 64, &SolverOptions::default())?;

    let (ac, as_, _) = closure(&seq, &weak);
    let phi = gate_phase(&seq, &weak);
    let show = |z: Complex64| format!("{:+.3e} {:+.3e}i", z.re, z.im);
    for truncation in [16, 24, 40] {
        let o = fock_oracle(&seq, &weak, truncation)?;
        println!(
            "truncation {truncation}: boundary population {:.1e}",
            o.tail
        );
        println!("  α_c  oracle {}  analytic {}", show(o.alpha_c), show(ac));
        println!("  α_s  oracle {}  analytic {}", show(o.alpha_s), show(as_));
        println!("  φ    oracle {:.12}  analytic {:.12}", o.phi, phi);
    }
    Ok(())
}
