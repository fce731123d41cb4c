//! Single-flip error of SRT over peak Rabi frequency and single-photon detuning.

use std::f64::consts::TAU;

use ionkick::dynamics::DEFAULT_TOL;
use ionkick::levels::yb_lambda_system;
use ionkick::pulses::Protocol;
use ionkick::sdk::{fidelity_map, reference_pulse, Axis, SweepGrid, SweepParameter};

fn main() -> ionkick::Result<()> {
    let ghz = TAU * 1e9;
    let x = Axis::linear(SweepParameter::PeakRabi, 30.0 * ghz, 42.0 * ghz, 7)?;
    let y = Axis::linear(SweepParameter::Detuning, 300.0 * ghz, 500.0 * ghz, 5)?;
    let grid = SweepGrid::new(reference_pulse(Protocol::Srt), x, y)?;
    let map = fidelity_map(&yb_lambda_system(), &grid, DEFAULT_TOL);

    print!("{:>10}", "Δ \\ Ω₀");
    for v in grid.x.values() {
        print!("{:>10.1}", v / ghz);
    }
    println!();
    for (j, dv) in grid.y.values().iter().enumerate() {
        print!("{:>10.0}", dv / ghz);
        for i in 0..grid.x.count {
            let cell = &map.cells[i * grid.y.count + j];
            match cell.epsilon {
                Some(e) => print!("{:>10.1e}", e),
                None => print!("{:>10}", "-"),
            }
        }
        println!();
    }
    if let Some(best) = map.best() {
        println!(
            "\nbest: Ω₀ = {:.2} GHz, Δ = {:.0} GHz, ε = {:.2e}",
            best.x / ghz,
            best.y / ghz,
            best.epsilon.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
