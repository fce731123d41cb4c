//! Effect of snapping kick times to a finite repetition-rate grid.

use ionkick::fastgate::{repetition_scan, Scheme, TrapConfig};

fn main() -> ionkick::Result<()> {
    let trap = TrapConfig::reference();
    let bandwidths = [0.1e9, 0.5e9, 1e9, 5e9];
    for scheme in [Scheme::Gzc, Scheme::Frag] {
        let rows = repetition_scan(scheme, &[1, 2, 3, 4], &bandwidths, &trap, 64, false)?;
        println!("{}", scheme.name());
        println!(
            "{:>3} {:>9} {:>10} {:>10} {:>10}",
            "n", "f/GHz", "|α_c|", "|α_s|", "1-F_o"
        );
        for r in rows {
            println!(
                "{:>3} {:>9.1} {:>10.2e} {:>10.2e} {:>10.2e}",
                r.n,
                r.f_bw_hz / 1e9,
                r.alpha_c_abs,
                r.alpha_s_abs,
                r.one_minus_fo
            );
        }
        println!();
    }
    Ok(())
}
