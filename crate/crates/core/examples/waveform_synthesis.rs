//! Compile an ARP kick into modulator drive samples and predict the optical
//! output.

use ionkick::pulses::Protocol;
use ionkick::sdk::reference_pulse;
use ionkick::waveform::{
    compile_protocol, envelope_rms_error, phase_eom_spectrum, predict_output, rf_hop,
    WaveformSettings,
};

fn main() -> ionkick::Result<()> {
    println!("phase EOM sideband amplitudes J_n(1.5):");
    for (order, amp) in phase_eom_spectrum(1.5, 4)? {
        println!("  {order:+}: {amp:+.4}");
    }

    let pulse = reference_pulse(Protocol::Arp);
    let program = compile_protocol(&pulse, &WaveformSettings::new(100e9, 1.0))?;
    println!(
        "\n{} samples, path delay {:.2} ns",
        program.len(),
        program.path_delay * 1e9
    );
    println!(
        "RF hop between beams {:.4} GHz",
        rf_hop() / std::f64::consts::TAU / 1e9
    );
    for seg in &program.segments {
        println!(
            "  {:?}: samples {}..{}",
            seg.beam,
            seg.start,
            seg.start + seg.len
        );
    }

    let out = predict_output(&program);
    let peak = (0..program.len())
        .max_by(|&a, &b| out.intensity[a].total_cmp(&out.intensity[b]))
        .unwrap_or(0);
    println!(
        "peak intensity {:.4} at {:.3} ns, UV frequency {:.6} PHz",
        out.intensity[peak],
        program.time(peak) * 1e9,
        out.frequency_hz[peak] / 1e15
    );
    println!(
        "round-trip envelope rms error {:.1e}",
        envelope_rms_error(&pulse, &program)
    );

    let mut csv = Vec::new();
    program.write_csv(&mut csv)?;
    println!("CSV export: {} bytes", csv.len());
    Ok(())
}
