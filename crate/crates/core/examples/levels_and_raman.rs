//! Level structure of ¹⁷¹Yb⁺ and the two-photon Raman coupling it supports.

use std::f64::consts::TAU;

use ionkick::constants::HYPERFINE_SPLITTING;
use ionkick::levels::{
    build_yb171_system, effective_raman, yb_lambda_system, KickDirection, RamanDrive, ZeemanConfig,
};

fn main() -> ionkick::Result<()> {
    let yb = build_yb171_system(ZeemanConfig::new(5.0))?;
    println!("{} levels at 5 G:", yb.len());
    for level in yb.levels() {
        println!(
            "  {:<12} {:>14.6} GHz",
            level.label,
            level.energy / TAU / 1e9
        );
    }

    let lambda = yb_lambda_system();
    println!("\nreduced model: {:?}", lambda.labels());

    let drive = RamanDrive {
        rabi_1: TAU * 40e9,
        rabi_2: TAU * 40e9,
        detuning: TAU * 400e9,
        two_photon_detuning: 0.0,
        wavevector_difference: 2.0 * TAU / 355e-9,
        direction: KickDirection::Forward,
    };
    let eff = effective_raman(&drive, HYPERFINE_SPLITTING)?;
    println!("effective Rabi frequency  {:.4} GHz", eff.rabi / TAU / 1e9);
    println!(
        "differential Stark shift  {:.4} MHz",
        eff.differential_stark / TAU / 1e6
    );
    println!(
        "common Stark shift        {:.4} GHz",
        eff.common_stark / TAU / 1e9
    );
    Ok(())
}
