//! Time-dependent Schrödinger propagation in the Raman rotating frame.
//!
//! The frame removes the optical carriers: `|0⟩`-manifold levels rotate at 0,
//! `|1⟩`-manifold levels at `E(|1⟩) − ∫δ`, excited levels at the pump
//! frequency. Diagonal entries then carry `Δ` and `δ(t)`, and couplings that a
//! beam drives off its intended leg oscillate at the hyperfine frequency.
//!
//! Integration uses an adaptive Dormand–Prince 5(4) pair acting on the full
//! propagator, so one pass yields every column of `U(T)`.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{self, PositionBasis};
use crate::levels::{
    effective_raman, polarization_vector, BeamSelect, KickDirection, LevelSystem, Manifold,
    Polarization, RamanDrive,
};
use crate::output::Float;
use crate::pulses::ProtocolPulse;

/// Default integrator tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;

/// The step controller holds the embedded error estimate this far below the
/// requested tolerance, so that drift accumulated over thousands of steps
/// stays within a few multiples of `tol`.
const LOCAL_TOL_FACTOR: f64 = 100.0;

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// A time-dependent Hermitian generator `H(t)` (units of rad/s).
pub trait Hamiltonian: Sync {
    fn dim(&self) -> usize;

    /// Overwrite `h` with `H(t)`.
    fn fill(&self, t: f64, h: &mut DMatrix<C64>);

    /// Integration window.
    fn window(&self) -> (f64, f64);

    /// Upper bound on the step size.
    fn max_step(&self) -> f64 {
        f64::INFINITY
    }

    /// Times at which the window is split into separate segments.
    fn breakpoints(&self) -> Vec<f64> {
        let (a, b) = self.window();
        vec![a, b]
    }

    /// Levels whose population is tracked as "intermediate".
    fn intermediate(&self) -> Vec<usize> {
        Vec::new()
    }

    /// `θᵢ(t) = ∫₀ᵗ Hᵢᵢ dt'` when the diagonal is known in closed form. The
    /// integrator then works in the interaction picture of the diagonal, so
    /// large static detunings do not limit the step size.
    fn diagonal_phase(&self, _t: f64) -> Option<Vec<f64>> {
        None
    }

    fn matrix(&self, t: f64) -> DMatrix<C64> {
        let mut h = DMatrix::zeros(self.dim(), self.dim());
        self.fill(t, &mut h);
        h
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct PropagateOptions {
    pub tol: f64,
    /// Store `U(t)` after every accepted step.
    pub record: bool,
    pub max_steps: usize,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        PropagateOptions {
            tol: DEFAULT_TOL,
            record: false,
            max_steps: 5_000_000,
        }
    }
}

impl PropagateOptions {
    pub fn with_tol(tol: f64) -> Self {
        PropagateOptions {
            tol,
            ..Default::default()
        }
    }
}

/// Result of a propagation.
#[derive(Clone, Debug)]
pub struct Propagation {
    /// Recorded times (start, every accepted step, end) when recording.
    pub t_grid: Vec<f64>,
    /// `U(t)` at each recorded time.
    pub states: Vec<DMatrix<C64>>,
    pub u_final: DMatrix<C64>,
    pub tol: f64,
    /// Peak intermediate-level population for each initial basis state.
    pub intermediate_peak: Vec<f64>,
    pub steps: usize,
}

impl Propagation {
    /// `max |U†U − I|`.
    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.u_final)
    }

    /// State `U(t)|initial⟩` at every recorded time.
    pub fn column_trajectory(&self, initial: usize) -> Vec<Vec<C64>> {
        self.states
            .iter()
            .map(|u| u.column(initial).iter().copied().collect())
            .collect()
    }
}

pub fn unitarity_defect(u: &DMatrix<C64>) -> f64 {
    let p = u.adjoint() * u;
    let mut worst: f64 = 0.0;
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            let e = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[(i, j)] - e).norm());
        }
    }
    worst
}

/// Dormand–Prince 5(4) tableau.
mod dp {
    pub const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    pub const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    /// Difference between the 5th- and 4th-order weights.
    pub const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
}

struct Workspace {
    h: DMatrix<C64>,
    k: Vec<DMatrix<C64>>,
    stage: DMatrix<C64>,
    y_new: DMatrix<C64>,
}

impl Workspace {
    fn new(n: usize, m: usize) -> Self {
        Workspace {
            h: DMatrix::zeros(n, n),
            k: (0..7).map(|_| DMatrix::zeros(n, m)).collect(),
            stage: DMatrix::zeros(n, m),
            y_new: DMatrix::zeros(n, m),
        }
    }
}

fn rhs<H: Hamiltonian + ?Sized>(
    ham: &H,
    t: f64,
    y: &DMatrix<C64>,
    hbuf: &mut DMatrix<C64>,
    out: &mut DMatrix<C64>,
) {
    ham.fill(t, hbuf);
    out.gemm(-I, hbuf, y, ZERO);
}

/// Integrate `dY/dt = −i H(t) Y` from `t0` to `t1` in place.
///
/// `observe` is called after every accepted step. Returns the number of
/// accepted steps.
pub(crate) fn integrate<H: Hamiltonian + ?Sized>(
    ham: &H,
    y: &mut DMatrix<C64>,
    t0: f64,
    t1: f64,
    tol: f64,
    max_steps: usize,
    observe: &mut dyn FnMut(f64, &DMatrix<C64>),
) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "tolerance must be positive"));
    }
    let span = t1 - t0;
    if span <= 0.0 {
        return Ok(0);
    }
    let tol = tol / LOCAL_TOL_FACTOR;
    let (n, m) = y.shape();
    let mut ws = Workspace::new(n, m);
    let h_max = ham.max_step().min(span);
    let mut h = (span / 100.0).min(h_max);
    let h_min = span * 1e-14;
    let mut t = t0;
    let mut steps = 0usize;
    let mut rejected = 0usize;

    rhs(ham, t, y, &mut ws.h, &mut ws.k[0]);
    while t < t1 {
        if steps + rejected >= max_steps {
            return Err(Error::Integration {
                t,
                step: h,
                steps,
                reason: format!("exceeded {max_steps} steps"),
            });
        }
        let last = t + h >= t1 || (t1 - (t + h)) < 1e-3 * h;
        if last {
            h = t1 - t;
        }
        for s in 1..7 {
            let (done, rest) = ws.k.split_at_mut(s);
            ws.stage.copy_from(y);
            for (j, a) in dp::A[s].iter().enumerate().take(s) {
                if *a != 0.0 {
                    let w = a * h;
                    for (d, k) in ws.stage.iter_mut().zip(done[j].iter()) {
                        *d += k * w;
                    }
                }
            }
            if s == 6 {
                ws.y_new.copy_from(&ws.stage);
            }
            rhs(ham, t + dp::C[s] * h, &ws.stage, &mut ws.h, &mut rest[0]);
        }
        // error estimate
        let mut err: f64 = 0.0;
        for idx in 0..n * m {
            let mut e = ZERO;
            for (s, c) in dp::E.iter().enumerate() {
                if *c != 0.0 {
                    e += ws.k[s][idx] * *c;
                }
            }
            let scale = tol + tol * y[idx].norm().max(ws.y_new[idx].norm());
            err = err.max((e * h).norm() / scale);
        }
        if !err.is_finite() {
            rejected += 1;
            h *= 0.25;
            if h < h_min {
                return Err(Error::Integration {
                    t,
                    step: h,
                    steps,
                    reason: "non-finite state".into(),
                });
            }
            continue;
        }
        if err <= 1.0 {
            t = if last { t1 } else { t + h };
            y.copy_from(&ws.y_new);
            ws.k.swap(0, 6);
            steps += 1;
            observe(t, y);
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h * factor).min(h_max);
        } else {
            rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h < h_min {
                return Err(Error::Integration {
                    t,
                    step: h,
                    steps,
                    reason: format!("step size underflow (error ratio {err:e})"),
                });
            }
        }
    }
    Ok(steps)
}

/// Propagate the identity through a Hamiltonian.
/// Interaction picture with respect to the diagonal of `H`.
struct DiagonalFrame<'a, H: ?Sized>(&'a H);

impl<H: Hamiltonian + ?Sized> Hamiltonian for DiagonalFrame<'_, H> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn fill(&self, t: f64, h: &mut DMatrix<C64>) {
        self.0.fill(t, h);
        let theta = self.0.diagonal_phase(t).expect("diagonal phase available");
        let rot: Vec<C64> = theta.iter().map(|&x| C64::from_polar(1.0, x)).collect();
        let n = self.dim();
        for j in 0..n {
            for i in 0..n {
                if i == j {
                    h[(i, i)] = ZERO;
                } else if h[(i, j)] != ZERO {
                    h[(i, j)] *= rot[i] * rot[j].conj();
                }
            }
        }
    }

    fn window(&self) -> (f64, f64) {
        self.0.window()
    }

    fn max_step(&self) -> f64 {
        self.0.max_step()
    }
}

/// Rotate interaction-picture amplitudes back: `U = e^{−iθ(t)} U_I`.
fn to_schrodinger(theta: Option<Vec<f64>>, y: &DMatrix<C64>) -> DMatrix<C64> {
    let mut out = y.clone();
    if let Some(theta) = theta {
        for (i, th) in theta.iter().enumerate() {
            let ph = C64::from_polar(1.0, -th);
            for j in 0..out.ncols() {
                out[(i, j)] *= ph;
            }
        }
    }
    out
}

/// Integrate segment by segment, in the diagonal frame when available.
fn integrate_segments<H: Hamiltonian + ?Sized>(
    ham: &H,
    y: &mut DMatrix<C64>,
    tol: f64,
    max_steps: usize,
    observe: &mut dyn FnMut(f64, &DMatrix<C64>),
) -> Result<usize> {
    let bps = ham.breakpoints();
    let framed = ham.diagonal_phase(bps[0]).is_some();
    let mut total = 0;
    for w in bps.windows(2) {
        total += if framed {
            integrate(&DiagonalFrame(ham), y, w[0], w[1], tol, max_steps, observe)?
        } else {
            integrate(ham, y, w[0], w[1], tol, max_steps, observe)?
        };
    }
    Ok(total)
}

/// Propagate the identity through a Hamiltonian.
pub fn propagate_hamiltonian<H: Hamiltonian + ?Sized>(
    ham: &H,
    opts: &PropagateOptions,
) -> Result<Propagation> {
    let n = ham.dim();
    let (t0, t1) = ham.window();
    let mut y = DMatrix::<C64>::identity(n, n);
    let inter = ham.intermediate();
    let mut peak = vec![0.0f64; n];
    let mut t_grid = Vec::new();
    let mut states = Vec::new();
    if opts.record {
        t_grid.push(t0);
        states.push(to_schrodinger(ham.diagonal_phase(t0), &y));
    }
    let mut observe = |t: f64, y: &DMatrix<C64>| {
        for (col, p) in peak.iter_mut().enumerate() {
            let pop: f64 = inter.iter().map(|&r| y[(r, col)].norm_sqr()).sum();
            if pop > *p {
                *p = pop;
            }
        }
        if opts.record {
            t_grid.push(t);
            states.push(to_schrodinger(ham.diagonal_phase(t), y));
        }
    };
    let steps = integrate_segments(ham, &mut y, opts.tol, opts.max_steps, &mut observe)?;
    Ok(Propagation {
        t_grid,
        states,
        u_final: to_schrodinger(ham.diagonal_phase(t1), &y),
        tol: opts.tol,
        intermediate_peak: peak,
        steps,
    })
}

#[derive(Clone, Debug)]
struct CouplingTerm {
    lower: usize,
    upper: usize,
    pump: C64,
    stokes: C64,
    lower_manifold: Manifold,
}

/// Rotating-frame Hamiltonian of a level system driven by a protocol pulse.
#[derive(Clone, Debug)]
pub struct RamanHamiltonian {
    pulse: ProtocolPulse,
    base_diag: Vec<f64>,
    in_lower1: Vec<bool>,
    excited: Vec<usize>,
    terms: Vec<CouplingTerm>,
    qubit_splitting: f64,
}

impl RamanHamiltonian {
    /// Pump along `H`, Stokes along `V`.
    pub fn new(system: &LevelSystem, pulse: &ProtocolPulse) -> Self {
        Self::with_polarizations(system, pulse, Polarization::H, Polarization::V)
    }

    pub fn with_polarizations(
        system: &LevelSystem,
        pulse: &ProtocolPulse,
        pump_pol: Polarization,
        stokes_pol: Polarization,
    ) -> Self {
        let e_ref = system.levels()[system.reference_excited()].energy;
        let e_1 = system.qubit_splitting();
        let base_diag = system
            .levels()
            .iter()
            .map(|l| match l.manifold {
                Manifold::Lower0 => l.energy,
                Manifold::Lower1 => l.energy - e_1,
                Manifold::Excited => l.energy - e_ref + pulse.detuning,
            })
            .collect();
        let in_lower1 = system
            .levels()
            .iter()
            .map(|l| l.manifold == Manifold::Lower1)
            .collect();
        let pp = polarization_vector(pump_pol);
        let sp = polarization_vector(stokes_pol);
        let terms = system
            .couplings()
            .iter()
            .map(|c| {
                let proj = |p: &[C64; 3]| -> C64 { (0..3).map(|q| p[q] * c.weights[q]).sum() };
                let (pump, stokes) = match c.beams {
                    BeamSelect::Pump => (proj(&pp), ZERO),
                    BeamSelect::Stokes => (ZERO, proj(&sp)),
                    BeamSelect::Both => (proj(&pp), proj(&sp)),
                };
                CouplingTerm {
                    lower: c.lower,
                    upper: c.upper,
                    pump,
                    stokes,
                    lower_manifold: system.levels()[c.lower].manifold,
                }
            })
            .collect();
        RamanHamiltonian {
            pulse: pulse.clone(),
            base_diag,
            in_lower1,
            excited: system.excited_indices(),
            terms,
            qubit_splitting: e_1,
        }
    }

    pub fn pulse(&self) -> &ProtocolPulse {
        &self.pulse
    }

    /// Upper ← lower coupling amplitudes `(pump part, Stokes part)` at `t`,
    /// each still to be multiplied by the leg's motional factor.
    fn coupling_parts(&self, t: f64, theta_1: C64, term: &CouplingTerm) -> (C64, C64) {
        let s = self.pulse.sample(t);
        let (pump_phase, stokes_phase) = match term.lower_manifold {
            Manifold::Lower1 => (theta_1.conj(), C64::new(1.0, 0.0)),
            _ => (C64::new(1.0, 0.0), theta_1),
        };
        (
            term.pump * (0.5 * s.pump) * pump_phase,
            term.stokes * (0.5 * s.stokes) * stokes_phase,
        )
    }

    fn diagonal_phase_at(&self, t: f64) -> Vec<f64> {
        let sweep = self.pulse.detuning_integral(t);
        self.base_diag
            .iter()
            .zip(&self.in_lower1)
            .map(|(d, &l1)| d * t + if l1 { sweep } else { 0.0 })
            .collect()
    }

    fn frame_phase(&self, t: f64) -> C64 {
        C64::from_polar(
            1.0,
            self.qubit_splitting * t - self.pulse.detuning_integral(t),
        )
    }
}

impl Hamiltonian for RamanHamiltonian {
    fn dim(&self) -> usize {
        self.base_diag.len()
    }

    fn fill(&self, t: f64, h: &mut DMatrix<C64>) {
        h.fill(ZERO);
        let delta = self.pulse.two_photon_detuning(t);
        for (i, d) in self.base_diag.iter().enumerate() {
            let extra = if self.in_lower1[i] { delta } else { 0.0 };
            h[(i, i)] = C64::new(d + extra, 0.0);
        }
        let theta_1 = self.frame_phase(t);
        for term in &self.terms {
            let (p, s) = self.coupling_parts(t, theta_1, term);
            let v = p + s;
            h[(term.upper, term.lower)] += v;
            h[(term.lower, term.upper)] += v.conj();
        }
    }

    fn window(&self) -> (f64, f64) {
        (0.0, self.pulse.total_duration())
    }

    fn max_step(&self) -> f64 {
        let hf = if self
            .terms
            .iter()
            .any(|t| t.pump != ZERO && t.stokes != ZERO)
        {
            (std::f64::consts::TAU / self.qubit_splitting) / 8.0
        } else {
            f64::INFINITY
        };
        self.pulse.max_step().min(hf)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.pulse.breakpoints()
    }

    fn intermediate(&self) -> Vec<usize> {
        self.excited.clone()
    }

    fn diagonal_phase(&self, t: f64) -> Option<Vec<f64>> {
        Some(self.diagonal_phase_at(t))
    }
}

/// Propagate a level system under a protocol pulse.
pub fn propagate(system: &LevelSystem, pulse: &ProtocolPulse, tol: f64) -> Result<Propagation> {
    propagate_hamiltonian(
        &RamanHamiltonian::new(system, pulse),
        &PropagateOptions::with_tol(tol),
    )
}

/// Population-transfer figures of merit.
#[derive(Copy, Clone, Debug, PartialEq, serde::Serialize)]
pub struct TransferResult {
    /// `1 − |⟨target|U|initial⟩|²`.
    pub epsilon: f64,
    /// `arg ⟨target|U|initial⟩`.
    pub final_phase: f64,
    /// Peak intermediate population during the pulse.
    pub intermediate_peak: f64,
    /// `1 − |⟨target|U|initial⟩|` (state infidelity up to a phase).
    pub amplitude_error: f64,
}

pub fn transfer_error(prop: &Propagation, initial: usize, target: usize) -> TransferResult {
    let amp = prop.u_final[(target, initial)];
    TransferResult {
        epsilon: (1.0 - amp.norm_sqr()).clamp(0.0, 1.0),
        final_phase: amp.arg(),
        intermediate_peak: prop.intermediate_peak[initial],
        amplitude_error: (1.0 - amp.norm()).clamp(0.0, 1.0),
    }
}

/// Single-flip error of a pulse on a level system (`|0⟩ → |1⟩`).
pub fn flip_error(system: &LevelSystem, pulse: &ProtocolPulse, tol: f64) -> Result<TransferResult> {
    let prop = propagate(system, pulse, tol)?;
    Ok(transfer_error(&prop, system.ground(), system.target()))
}

/// Two-level system `H = [[0, Ω/2], [Ω/2, δ]]` with constant drive.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct TwoLevelDrive {
    pub rabi: f64,
    pub detuning: f64,
    pub duration: f64,
}

impl TwoLevelDrive {
    /// Closed-form excited population at the end of the drive.
    pub fn rabi_population(&self) -> f64 {
        let w = (self.rabi * self.rabi + self.detuning * self.detuning).sqrt();
        if w == 0.0 {
            return 0.0;
        }
        (self.rabi / w).powi(2) * (0.5 * w * self.duration).sin().powi(2)
    }
}

impl Hamiltonian for TwoLevelDrive {
    fn dim(&self) -> usize {
        2
    }

    fn fill(&self, _t: f64, h: &mut DMatrix<C64>) {
        h[(0, 0)] = ZERO;
        h[(0, 1)] = C64::new(0.5 * self.rabi, 0.0);
        h[(1, 0)] = C64::new(0.5 * self.rabi, 0.0);
        h[(1, 1)] = C64::new(self.detuning, 0.0);
    }

    fn window(&self) -> (f64, f64) {
        (0.0, self.duration)
    }
}

/// Two-level model obtained by adiabatically eliminating the intermediate
/// level of an SRT/ARP pulse at each instant.
#[derive(Clone, Debug)]
pub struct EffectiveHamiltonian {
    pulse: ProtocolPulse,
    hyperfine: f64,
}

impl EffectiveHamiltonian {
    pub fn new(pulse: &ProtocolPulse, hyperfine: f64) -> Result<Self> {
        let probe = pulse.sample(0.5 * pulse.duration);
        effective_raman(
            &RamanDrive {
                rabi_1: probe.pump.abs(),
                rabi_2: probe.stokes.abs(),
                detuning: pulse.detuning,
                two_photon_detuning: 0.0,
                wavevector_difference: 0.0,
                direction: KickDirection::Forward,
            },
            hyperfine,
        )?;
        Ok(EffectiveHamiltonian {
            pulse: pulse.clone(),
            hyperfine,
        })
    }
}

impl Hamiltonian for EffectiveHamiltonian {
    fn dim(&self) -> usize {
        2
    }

    fn fill(&self, t: f64, h: &mut DMatrix<C64>) {
        let s = self.pulse.sample(t);
        let eff = effective_raman(
            &RamanDrive {
                rabi_1: s.pump.abs(),
                rabi_2: s.stokes.abs(),
                detuning: self.pulse.detuning,
                two_photon_detuning: s.two_photon_detuning,
                wavevector_difference: 0.0,
                direction: KickDirection::Forward,
            },
            self.hyperfine,
        )
        .expect("validated at construction");
        let shift_0 = eff.common_stark - 0.5 * eff.differential_stark;
        let shift_1 = eff.common_stark + 0.5 * eff.differential_stark;
        h[(0, 0)] = C64::new(shift_0, 0.0);
        h[(1, 1)] = C64::new(shift_1 + s.two_photon_detuning, 0.0);
        h[(0, 1)] = C64::new(-0.5 * eff.rabi, 0.0);
        h[(1, 0)] = C64::new(-0.5 * eff.rabi, 0.0);
    }

    fn window(&self) -> (f64, f64) {
        (0.0, self.pulse.total_duration())
    }

    fn max_step(&self) -> f64 {
        self.pulse.max_step()
    }
}

/// Joint internal ⊗ motion Hamiltonian: each leg carries `exp(±i z η X / 2)`.
struct JointHamiltonian {
    internal: RamanHamiltonian,
    n_fock: usize,
    pump_factor: DMatrix<C64>,
    stokes_factor: DMatrix<C64>,
}

impl JointHamiltonian {
    fn new(internal: RamanHamiltonian, basis: &PositionBasis, eta: f64) -> Self {
        let z = internal.pulse.direction.sign();
        JointHamiltonian {
            n_fock: basis.dim(),
            pump_factor: basis.exp_i(0.5 * z * eta),
            stokes_factor: basis.exp_i(-0.5 * z * eta),
            internal,
        }
    }
}

impl Hamiltonian for JointHamiltonian {
    fn dim(&self) -> usize {
        self.internal.dim() * self.n_fock
    }

    fn fill(&self, t: f64, h: &mut DMatrix<C64>) {
        let nf = self.n_fock;
        h.fill(ZERO);
        let delta = self.internal.pulse.two_photon_detuning(t);
        for (i, d) in self.internal.base_diag.iter().enumerate() {
            let extra = if self.internal.in_lower1[i] {
                delta
            } else {
                0.0
            };
            for k in 0..nf {
                h[(i * nf + k, i * nf + k)] = C64::new(d + extra, 0.0);
            }
        }
        let theta_1 = self.internal.frame_phase(t);
        for term in &self.internal.terms {
            let (p, s) = self.internal.coupling_parts(t, theta_1, term);
            let (u, l) = (term.upper * nf, term.lower * nf);
            for a in 0..nf {
                for b in 0..nf {
                    let v = self.pump_factor[(a, b)] * p + self.stokes_factor[(a, b)] * s;
                    h[(u + a, l + b)] += v;
                    h[(l + b, u + a)] += v.conj();
                }
            }
        }
    }

    fn window(&self) -> (f64, f64) {
        self.internal.window()
    }

    fn max_step(&self) -> f64 {
        self.internal.max_step()
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.internal.breakpoints()
    }

    fn diagonal_phase(&self, t: f64) -> Option<Vec<f64>> {
        let inner = self.internal.diagonal_phase_at(t);
        Some(
            inner
                .iter()
                .flat_map(|&th| std::iter::repeat_n(th, self.n_fock))
                .collect(),
        )
    }
}

/// Motional displacement produced by a counter-propagating pulse pair.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct DisplacementEstimate {
    /// Fitted `⟨a⟩` of the motional state for initial `|0⟩` and `|1⟩`.
    pub displacement: [C64; 2],
    /// Mean of `|displacement|` over both spin states.
    pub magnitude: f64,
    /// `|⟨±2iη|χ⟩|²` for the normalised motional state `χ`.
    pub overlap: [f64; 2],
    /// Population returned to the initial spin state.
    pub spin_return: [f64; 2],
    /// `max(1 − overlap)`.
    pub conditioning_error: f64,
    /// Largest population found in the top Fock level.
    pub tail: f64,
}

/// Propagate `|s⟩ ⊗ |vac⟩` (s = 0, 1) through `first` then `second` in the
/// joint internal ⊗ Fock space and fit the motional state to `D(±2iη)|vac⟩`.
pub fn sdk_phase_check(
    system: &LevelSystem,
    pulse_pair: (&ProtocolPulse, &ProtocolPulse),
    eta: f64,
    truncation: usize,
    tol: f64,
) -> Result<DisplacementEstimate> {
    if truncation < 2 {
        return Err(Error::invalid(
            "truncation",
            "need at least two Fock levels",
        ));
    }
    if !(eta >= 0.0) {
        return Err(Error::invalid("eta", "must be non-negative"));
    }
    let nf = truncation;
    let ni = system.len();
    let basis = PositionBasis::new(nf);
    let mut y = DMatrix::<C64>::zeros(ni * nf, 2);
    let (g, e) = (system.ground(), system.target());
    y[(g * nf, 0)] = C64::new(1.0, 0.0);
    y[(e * nf, 1)] = C64::new(1.0, 0.0);
    let mut tail: f64 = 0.0;
    for pulse in [pulse_pair.0, pulse_pair.1] {
        let ham = JointHamiltonian::new(RamanHamiltonian::new(system, pulse), &basis, eta);
        let mut observe = |_t: f64, y: &DMatrix<C64>| {
            for col in 0..2 {
                for lvl in 0..ni {
                    tail = tail.max(y[(lvl * nf + nf - 1, col)].norm_sqr());
                }
            }
        };
        integrate_segments(&ham, &mut y, tol, 5_000_000, &mut observe)?;
        y = to_schrodinger(ham.diagonal_phase(ham.window().1), &y);
    }
    fock::check_tail(nf, tail, 1e-8)?;
    let mut displacement = [ZERO; 2];
    let mut overlap = [0.0; 2];
    let mut spin_return = [0.0; 2];
    for (col, (start, sign)) in [(g, 1.0), (e, -1.0)].into_iter().enumerate() {
        let chi: Vec<C64> = (0..nf).map(|k| y[(start * nf + k, col)]).collect();
        let p: f64 = chi.iter().map(|c| c.norm_sqr()).sum();
        spin_return[col] = p;
        if p <= 0.0 {
            continue;
        }
        displacement[col] = fock::mean_annihilation(&chi) / p;
        let ideal = fock::coherent_state(C64::new(0.0, 2.0 * sign * eta), nf);
        let ov: C64 = (0..nf).map(|k| ideal[k].conj() * chi[k]).sum();
        overlap[col] = ov.norm_sqr() / p;
    }
    Ok(DisplacementEstimate {
        displacement,
        magnitude: 0.5 * (displacement[0].norm() + displacement[1].norm()),
        overlap,
        spin_return,
        conditioning_error: (1.0 - overlap[0]).max(1.0 - overlap[1]),
        tail,
    })
}

/// Write the trajectory of `U(t)|initial⟩` as CSV `t,re_c0,im_c0,...`.
pub fn write_trajectory_csv<W: Write + ?Sized>(
    prop: &Propagation,
    initial: usize,
    out: &mut W,
) -> Result<()> {
    let n = prop.u_final.nrows();
    let mut header = String::from("t");
    for k in 0..n {
        header.push_str(&format!(",re_c{k},im_c{k}"));
    }
    writeln!(out, "{header}")?;
    for (t, u) in prop.t_grid.iter().zip(&prop.states) {
        let mut row = Float(*t).to_string();
        for k in 0..n {
            let c = u[(k, initial)];
            row.push_str(&format!(",{},{}", Float(c.re), Float(c.im)));
        }
        writeln!(out, "{row}")?;
    }
    Ok(())
}
