//! The `ionkick` command-line tool.
//!
//! ```text
//! ionkick [--config FILE] [--set key=value]... [--out-dir DIR] [--threads N] <command>
//! ```
//!
//! Commands: `sdk-map`, `robustness`, `delay-scan`, `gate-solve`, `gate-scan`,
//! `trajectory`, `waveform-compile`, `validate`. Each run writes its files and
//! a `manifest.json` to the output directory and prints a one-line summary.
//! Exit codes: 0 success, 2 configuration, 3 numerical failure, 4 I/O.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{RunConfig, WaveformFormat};
use crate::dynamics::{
    propagate_hamiltonian, write_trajectory_csv, PropagateOptions, RamanHamiltonian,
};
use crate::error::{Error, Result};
use crate::fastgate::{
    closure, discretize, fock_oracle, gate_report, repetition_scan, scaling_exponent,
    solve_fastest, KickSequence, Scheme, SCAN_CSV_HEADER,
};
use crate::output::{Float, Manifest, OutputDir};
use crate::pulses::Protocol;
use crate::sdk::{
    delay_sensitivity, fidelity_map, reference_pulse, robustness_sweep, symmetric_range,
};
use crate::waveform::{compile_protocol, envelope_rms_error};

pub const THREADS_ENV: &str = "IONKICK_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "ionkick",
    version,
    about = "Ultrafast trapped-ion gate simulator"
)]
struct Cli {
    /// TOML run configuration (defaults are used when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a config value, e.g. `--set pulse.peak_rabi_ghz=40`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Directory for output files.
    #[arg(long, default_value = "out", global = true)]
    out_dir: PathBuf,

    /// Worker threads (falls back to IONKICK_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single-flip error over a two-parameter grid.
    SdkMap,
    /// Kick-train infidelity under intensity and detuning deviations.
    Robustness,
    /// STIRAP kick-train infidelity against pump/Stokes delay deviation.
    DelayScan,
    /// Solve GZC/FRAG timings and report closure, phase and fidelities.
    GateSolve,
    /// Gate time and infidelity on finite-bandwidth timing grids.
    GateScan,
    /// Phase-space and internal-state trajectories.
    Trajectory,
    /// Compile the configured pulse into modulator drive samples.
    WaveformCompile,
    /// Check the configuration and exit.
    Validate,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::SdkMap => "sdk-map",
            Command::Robustness => "robustness",
            Command::DelayScan => "delay-scan",
            Command::GateSolve => "gate-solve",
            Command::GateScan => "gate-scan",
            Command::Trajectory => "trajectory",
            Command::WaveformCompile => "waveform-compile",
            Command::Validate => "validate",
        }
    }
}

/// Parse `argv` (including the program name), run and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(line) => {
            println!("{line}");
            0
        }
        Err(e) => {
            eprintln!("ionkick: error[{}]: {e}", e.category());
            e.exit_code()
        }
    }
}

fn thread_count(flag: Option<usize>) -> Result<usize> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{THREADS_ENV}={v} is not a thread count")))?,
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        },
    };
    if n == 0 {
        return Err(Error::Config("thread count must be positive".into()));
    }
    Ok(n)
}

fn execute(cli: &Cli) -> Result<String> {
    let cfg = RunConfig::load(cli.config.as_deref(), &cli.overrides)?;
    cfg.validate()?;
    let hash = cfg.hash();
    if let Command::Validate = cli.command {
        return Ok(format!(
            "validate: ok experiment={} config_sha256={hash}",
            cfg.experiment
        ));
    }
    let threads = thread_count(cli.threads)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} worker threads: {e}")))?;
    let mut out = OutputDir::create(&cli.out_dir, &hash)?;
    let (line, summary) = pool.install(|| match cli.command {
        Command::SdkMap => sdk_map(&cfg, &mut out),
        Command::Robustness => robustness(&cfg, &mut out),
        Command::DelayScan => delay_scan(&cfg, &mut out),
        Command::GateSolve => gate_solve(&cfg, &mut out),
        Command::GateScan => gate_scan(&cfg, &mut out),
        Command::Trajectory => trajectory(&cfg, &mut out),
        Command::WaveformCompile => waveform_compile(&cfg, &mut out),
        Command::Validate => unreachable!(),
    })?;
    let outputs = out
        .written()
        .iter()
        .map(|p| {
            p.file_name()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned()
        })
        .collect();
    let manifest = Manifest {
        tool: "ionkick",
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.name(),
        experiment: &cfg.experiment,
        threads,
        config: &cfg,
        outputs,
        summary: &summary,
    };
    out.json("manifest.json", &manifest)?;
    Ok(format!(
        "{}: {line} (outputs in {})",
        cli.command.name(),
        out.root().display()
    ))
}

type Outcome = Result<(String, Value)>;

fn sdk_map(cfg: &RunConfig, out: &mut OutputDir) -> Outcome {
    let system = cfg.system.build()?;
    let pulse = cfg.pulse.build()?;
    let grid = cfg.sdk_map.build(pulse.clone())?;
    let (xa, ya) = cfg.sdk_map.axes(pulse.protocol);
    let map = fidelity_map(&system, &grid, cfg.system.tolerance);
    let xs = xa.display_values();
    let ys = ya.display_values();
    let at = |i: usize| (xs[i / ys.len()], ys[i % ys.len()]);
    let comments = vec![
        format!("protocol={}", pulse.protocol),
        format!("x={} unit={}", xa.parameter.name(), xa.unit),
        format!("y={} unit={}", ya.parameter.name(), ya.unit),
    ];
    out.text("sdk_map.csv", &comments, |w| {
        writeln!(w, "x,y,epsilon")?;
        for (i, c) in map.cells.iter().enumerate() {
            let (x, y) = at(i);
            let eps = c
                .epsilon
                .map_or_else(|| "nan".to_string(), |e| Float(e).to_string());
            writeln!(w, "{},{},{eps}", Float(x), Float(y))?;
        }
        Ok(())
    })?;
    let failures: Vec<Value> = map
        .cells
        .iter()
        .enumerate()
        .filter(|(_, c)| c.epsilon.is_none())
        .map(|(i, c)| json!({"x": at(i).0, "y": at(i).1, "error": c.error}))
        .collect();
    let best = map
        .cells
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.epsilon.map(|e| (i, e)))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    let line = match best {
        Some((i, e)) => format!(
            "{} cells, best epsilon {e:.3e} at x={} y={}, {} failed",
            map.cells.len(),
            at(i).0,
            at(i).1,
            failures.len()
        ),
        None => format!("{} cells, all failed", map.cells.len()),
    };
    let best = best.map(|(i, e)| json!({"x": at(i).0, "y": at(i).1, "epsilon": e}));
    Ok((
        line,
        json!({"cells": map.cells.len(), "best": best, "failures": failures}),
    ))
}

fn robustness(cfg: &RunConfig, out: &mut OutputDir) -> Outcome {
    let system = cfg.system.build()?;
    let rc = &cfg.robustness;
    let values = symmetric_range(rc.half_width_relative, rc.points);
    let mut curves = Vec::new();
    for &protocol in &rc.protocols {
        let pulse = if protocol == cfg.pulse.protocol {
            cfg.pulse.build()?
        } else {
            reference_pulse(protocol)
        };
        for &kind in &rc.perturbations {
            let curve = robustness_sweep(
                &system,
                &pulse,
                kind,
                &values,
                rc.pulse_pairs,
                cfg.system.tolerance,
            )?;
            let name = format!(
                "robustness_{}_{}.csv",
                protocol.name().to_ascii_lowercase(),
                kind.name()
            );
            write_curve(out, &name, &curve)?;
            curves.push(json!({
                "protocol": protocol,
                "perturbation": kind,
                "max_one_minus_Fs": curve.max_infidelity(),
                "span_one_minus_Fs": curve.span(),
            }));
        }
    }
    Ok((
        format!("{} curves written", curves.len()),
        json!({ "curves": curves }),
    ))
}

fn write_curve(out: &mut OutputDir, name: &str, curve: &crate::sdk::RobustnessCurve) -> Result<()> {
    let comments = vec![format!(
        "protocol={} perturbation={} pulse_pairs={}",
        curve.protocol,
        curve.kind.name(),
        curve.pairs
    )];
    out.text(name, &comments, |w| {
        writeln!(w, "perturbation,epsilon,one_minus_Fs")?;
        for s in &curve.samples {
            writeln!(
                w,
                "{},{},{}",
                Float(s.perturbation),
                Float(s.epsilon),
                Float(s.one_minus_fs)
            )?;
        }
        Ok(())
    })?;
    Ok(())
}

fn delay_scan(cfg: &RunConfig, out: &mut OutputDir) -> Outcome {
    let system = cfg.system.build()?;
    let pulse = cfg.pulse.build()?;
    if pulse.protocol != Protocol::Stirap {
        return Err(Error::Config(
            "delay-scan needs pulse.protocol = \"stirap\"".into(),
        ));
    }
    let dc = &cfg.delay_scan;
    let values = symmetric_range(dc.half_width_ps * 1e-12, dc.points);
    let curve = delay_sensitivity(
        &system,
        &pulse,
        &values,
        dc.pulse_pairs,
        cfg.system.tolerance,
    )?;
    write_curve(out, "delay_scan.csv", &curve)?;
    let c1 = curve.crossing(1e-4);
    let c2 = curve.crossing(2e-4);
    let ps =
        |c: Option<f64>| c.map_or_else(|| "none".to_string(), |v| format!("{:.1} ps", v * 1e12));
    Ok((
        format!(
            "{} points, 1-Fs reaches 1e-4 at {} and 2e-4 at {}",
            curve.samples.len(),
            ps(c1),
            ps(c2)
        ),
        json!({
            "points": curve.samples.len(),
            "crossing_1e-4_s": c1,
            "crossing_2e-4_s": c2,
            "max_one_minus_Fs": curve.max_infidelity(),
        }),
    ))
}

#[derive(Serialize)]
struct SolvedGate {
    scheme: Scheme,
    n: u32,
    taus_s: [f64; 3],
    omega_tau: [f64; 3],
    iterations: usize,
    residual: [f64; 3],
    report: crate::fastgate::GateReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<Value>,
}

fn gate_solve(cfg: &RunConfig, out: &mut OutputDir) -> Outcome {
    let gc = &cfg.gate;
    let trap = gc.trap()?;
    let opts = gc.solver();
    let mut solved = Vec::new();
    for &scheme in &gc.schemes {
        for &n in &gc.repetitions {
            let (seq, rep) = solve_fastest(scheme, n, &trap, gc.seeds, &opts)?;
            let report = gate_report(&seq, &trap, gc.flip_error);
            let oracle = if gc.oracle {
                let small = trap.with_eta(gc.oracle_lamb_dicke);
                let o = fock_oracle(&seq, &small, gc.oracle_truncation)?;
                let (ac, as_, _) = closure(&seq, &small);
                let phi = crate::fastgate::gate_phase(&seq, &small);
                Some(json!({
                    "lamb_dicke": gc.oracle_lamb_dicke,
                    "truncation": gc.oracle_truncation,
                    "alpha_c_error": (o.alpha_c - ac).norm(),
                    "alpha_s_error": (o.alpha_s - as_).norm(),
                    "phi_oracle": o.phi,
                    "phi_analytic": phi,
                    "motional_overlap": o.motional_overlap,
                    "tail": o.tail,
                }))
            } else {
                None
            };
            solved.push(SolvedGate {
                scheme,
                n,
                taus_s: seq.taus().unwrap_or([f64::NAN; 3]),
                omega_tau: rep.omega_tau,
                iterations: rep.iterations,
                residual: rep.residual,
                report,
                oracle,
            });
        }
    }
    out.text("gate_solve.csv", &[], |w| {
        writeln!(
            w,
            "scheme,n,pulse_pairs,tau1_s,tau2_s,tau3_s,gate_time_s,alpha_c_abs,alpha_s_abs,delta_phi,one_minus_Fo,one_minus_Fs,one_minus_Fgate"
        )?;
        for s in &solved {
            let r = &s.report;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                s.scheme.name(),
                s.n,
                r.pulse_pairs,
                Float(s.taus_s[0]),
                Float(s.taus_s[1]),
                Float(s.taus_s[2]),
                Float(r.gate_time),
                Float(r.alpha_c.norm()),
                Float(r.alpha_s.norm()),
                Float(r.delta_phi),
                Float(r.one_minus_fo),
                Float(1.0 - r.f_s),
                Float(1.0 - r.f_gate)
            )?;
        }
        Ok(())
    })?;
    out.json("gate_solve.json", &json!({ "solutions": solved }))?;
    let fastest = solved
        .iter()
        .map(|s| s.report.gate_time)
        .fold(f64::INFINITY, f64::min);
    Ok((
        format!(
            "{} sequences solved, fastest gate {:.4} us",
            solved.len(),
            fastest * 1e6
        ),
        json!({ "solved": solved.len(), "fastest_gate_time_s": fastest }),
    ))
}

fn gate_scan(cfg: &RunConfig, out: &mut OutputDir) -> Outcome {
    let gc = &cfg.gate;
    let sc = &cfg.gate_scan;
    let trap = gc.trap()?;
    let bws: Vec<f64> = sc.bandwidths_ghz.iter().map(|b| b * 1e9).collect();
    let mut summary = Vec::new();
    for &scheme in &gc.schemes {
        let rows = repetition_scan(scheme, &sc.repetitions, &bws, &trap, gc.seeds, sc.refine)?;
        let name = format!("gate_scan_{}.csv", scheme.name().to_ascii_lowercase());
        out.text(
            &name,
            &[format!("scheme={scheme} refine={}", sc.refine)],
            |w| {
                writeln!(w, "{SCAN_CSV_HEADER}")?;
                for r in &rows {
                    writeln!(w, "{}", r.csv())?;
                }
                Ok(())
            },
        )?;
        let mut points = Vec::new();
        for &n in &sc.repetitions {
            if let Some(r) = rows.iter().find(|r| r.n == n) {
                let pairs = match scheme {
                    Scheme::Gzc => 14 * n,
                    _ => 10 * n,
                };
                points.push((f64::from(pairs), r.gate_time_s));
            }
        }
        let exponent = (points.len() >= 2).then(|| scaling_exponent(&points));
        summary.push(json!({ "scheme": scheme, "rows": rows.len(), "scaling_exponent": exponent }));
    }
    let line = summary
        .iter()
        .map(|s| {
            format!(
                "{} exponent {}",
                s["scheme"].as_str().unwrap_or("?"),
                s["scaling_exponent"]
                    .as_f64()
                    .map_or("n/a".into(), |e| format!("{e:.3}"))
            )
        })
        .collect::<Vec<_>>()
        .join(", ");
    Ok((line, json!({ "schemes": summary })))
}

fn trajectory(cfg: &RunConfig, out: &mut OutputDir) -> Outcome {
    let tc = &cfg.trajectory;
    let trap = cfg.gate.trap()?;
    let (seq, _) = solve_fastest(
        tc.scheme,
        tc.repetitions,
        &trap,
        cfg.gate.seeds,
        &cfg.gate.solver(),
    )?;
    let mut finals = Vec::new();
    let mut dump =
        |out: &mut OutputDir, name: String, label: String, s: &KickSequence| -> Result<()> {
            let (ac, as_, tr) = closure(s, &trap);
            out.text(
                &name,
                &[format!(
                    "scheme={} n={} grid={label}",
                    tc.scheme, tc.repetitions
                )],
                |w| tr.write_csv(w),
            )?;
            finals
                .push(json!({"grid": label, "alpha_c_abs": ac.norm(), "alpha_s_abs": as_.norm()}));
            Ok(())
        };
    dump(out, "phase_space_exact.csv".into(), "exact".into(), &seq)?;
    for &bw in &tc.bandwidths_ghz {
        let (grid, _) = discretize(&seq, bw * 1e9, 0.0)?;
        dump(
            out,
            format!("phase_space_{bw}ghz.csv"),
            format!("{bw} GHz"),
            &grid,
        )?;
    }
    let mut state = Value::Null;
    if tc.state {
        let system = cfg.system.build()?;
        let pulse = cfg.pulse.build()?;
        let ham = RamanHamiltonian::new(&system, &pulse);
        let opts = PropagateOptions {
            record: true,
            ..PropagateOptions::with_tol(cfg.system.tolerance)
        };
        let prop = propagate_hamiltonian(&ham, &opts)?;
        out.text(
            "state_trajectory.csv",
            &[format!(
                "protocol={} initial_level={}",
                pulse.protocol, tc.initial_level
            )],
            |w| write_trajectory_csv(&prop, tc.initial_level, w),
        )?;
        state = json!({"steps": prop.steps, "unitarity_defect": prop.unitarity_defect()});
    }
    Ok((
        format!("{} phase-space trajectories written", finals.len()),
        json!({ "phase_space": finals, "state": state }),
    ))
}

fn waveform_compile(cfg: &RunConfig, out: &mut OutputDir) -> Outcome {
    let pulse = cfg.pulse.build()?;
    let settings = cfg.waveform.settings()?;
    let program = compile_protocol(&pulse, &settings)?;
    let rms = envelope_rms_error(&pulse, &program);
    let fmt = cfg.waveform.format;
    if matches!(fmt, WaveformFormat::Csv | WaveformFormat::Both) {
        let comments = vec![format!(
            "protocol={} sample_rate_hz={} v_pi_volts={} path_delay_s={}",
            pulse.protocol,
            Float(settings.sample_rate),
            Float(settings.v_pi),
            Float(program.path_delay)
        )];
        out.text("waveform.csv", &comments, |w| program.write_csv(w))?;
    }
    if matches!(fmt, WaveformFormat::Binary | WaveformFormat::Both) {
        out.binary("waveform.bin", |w| program.write_binary(w))?;
    }
    Ok((
        format!("{} samples, round-trip rms {:.1e}", program.len(), rms),
        json!({
            "samples": program.len(),
            "segments": program.segments,
            "path_delay_s": program.path_delay,
            "round_trip_rms": rms,
        }),
    ))
}
