//! Fast entangling gates from trains of spin-dependent kicks on a two-ion
//! crystal.
//!
//! A sequence of kicks with integer weights `z_k` at times `t_k` displaces the
//! centre-of-mass (frequency `ω`) and stretch (`√3 ω`) modes by
//!
//! ```text
//! α_c = 2η Σ z_k e^{−iω t_k},    α_s = (2η / 3^{1/4}) Σ z_k e^{−i√3 ω t_k}
//! ```
//!
//! and imprints the two-qubit phase
//!
//! ```text
//! φ = 4η² Σ_{k<m} z_k z_m [ sin(√3 ω (t_k − t_m)) / √3 − sin(ω (t_k − t_m)) ]
//! ```
//!
//! with kicks indexed chronologically. The sign of the time difference is the
//! one for which the GZC and FRAG solutions give `φ = +π/4`, i.e. the gate
//! `exp(−iφ σ_z⊗σ_z)` whose phases are reproduced by [`fock_oracle`].
//!
//! GZC and FRAG place six kick groups at `−τ₃, −τ₂, −τ₁, τ₁, τ₂, τ₃` with
//! weights `n·(−2, 3, −2, 2, −3, 2)` and `n·(−1, 2, −2, 2, −2, 1)`. Both
//! patterns are odd in time, so `Re α_c = Re α_s = 0` for any `τᵢ` and three
//! real conditions remain for three unknowns.

use std::f64::consts::{FRAC_PI_4, TAU};
use std::io::Write;

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, PositionBasis};
use crate::output::Float;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Trap and thermal parameters of the two-ion crystal.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapConfig {
    /// Centre-of-mass angular frequency, rad/s.
    pub omega: f64,
    /// Lamb–Dicke parameter.
    pub eta: f64,
    /// Mean COM occupation.
    pub nbar_c: f64,
    /// Mean stretch occupation.
    pub nbar_s: f64,
}

impl TrapConfig {
    pub fn new(omega: f64, eta: f64) -> Result<Self> {
        let t = TrapConfig {
            omega,
            eta,
            nbar_c: 0.0,
            nbar_s: 0.0,
        };
        t.validate()?;
        Ok(t)
    }

    /// `ω = 2π × 1 MHz`, `η = 0.3`, ground-state cooled.
    pub fn reference() -> Self {
        TrapConfig {
            omega: crate::constants::REFERENCE_TRAP_FREQUENCY,
            eta: crate::constants::REFERENCE_LAMB_DICKE,
            nbar_c: 0.0,
            nbar_s: 0.0,
        }
    }

    pub fn with_eta(&self, eta: f64) -> Self {
        TrapConfig { eta, ..*self }
    }

    pub fn with_thermal(&self, nbar_c: f64, nbar_s: f64) -> Self {
        TrapConfig {
            nbar_c,
            nbar_s,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::invalid("omega", "trap frequency must be positive"));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::invalid(
                "eta",
                "Lamb–Dicke parameter must be positive",
            ));
        }
        if !(self.nbar_c >= 0.0 && self.nbar_s >= 0.0) {
            return Err(Error::invalid(
                "nbar",
                "thermal occupations must be non-negative",
            ));
        }
        Ok(())
    }

    /// `ω_s = √3 ω`.
    pub fn stretch_frequency(&self) -> f64 {
        SQRT3 * self.omega
    }

    pub fn period(&self) -> f64 {
        TAU / self.omega
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Gzc,
    Frag,
    Custom,
}

impl Scheme {
    /// Weights in chronological order `(−τ₃, −τ₂, −τ₁, τ₁, τ₂, τ₃)` for `n = 1`.
    pub fn pattern(self) -> Option<[i32; 6]> {
        match self {
            Scheme::Gzc => Some([-2, 3, -2, 2, -3, 2]),
            Scheme::Frag => Some([-1, 2, -2, 2, -2, 1]),
            Scheme::Custom => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Gzc => "GZC",
            Scheme::Frag => "FRAG",
            Scheme::Custom => "custom",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gzc" => Ok(Scheme::Gzc),
            "frag" => Ok(Scheme::Frag),
            other => Err(Error::invalid(
                "scheme",
                format!("unknown scheme `{other}`"),
            )),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kick {
    /// Time, s.
    pub time: f64,
    /// Signed number of pulse pairs in this group.
    pub weight: i32,
}

/// Time-ordered list of kick groups.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KickSequence {
    kicks: Vec<Kick>,
    pub scheme: Scheme,
    pub n: u32,
}

impl KickSequence {
    /// A custom sequence; times must be strictly increasing.
    pub fn custom(kicks: Vec<Kick>) -> Result<Self> {
        Self::checked(kicks, Scheme::Custom, 0)
    }

    fn checked(kicks: Vec<Kick>, scheme: Scheme, n: u32) -> Result<Self> {
        if kicks.windows(2).any(|w| !(w[0].time < w[1].time)) {
            return Err(Error::invalid(
                "times",
                "kick times must be strictly increasing",
            ));
        }
        if kicks.iter().any(|k| !k.time.is_finite()) {
            return Err(Error::invalid("times", "kick times must be finite"));
        }
        Ok(KickSequence { kicks, scheme, n })
    }

    pub fn kicks(&self) -> &[Kick] {
        &self.kicks
    }

    pub fn len(&self) -> usize {
        self.kicks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kicks.is_empty()
    }

    /// `N_p = Σ |z_k|`.
    pub fn pulse_pairs(&self) -> u32 {
        self.kicks.iter().map(|k| k.weight.unsigned_abs()).sum()
    }

    /// `t_N − t_1`.
    pub fn gate_time(&self) -> f64 {
        match (self.kicks.first(), self.kicks.last()) {
            (Some(a), Some(b)) => b.time - a.time,
            _ => 0.0,
        }
    }

    /// Shift every kick by `dt`.
    pub fn shifted(&self, dt: f64) -> Self {
        let mut s = self.clone();
        for k in &mut s.kicks {
            k.time += dt;
        }
        s
    }

    /// `(τ₁, τ₂, τ₃)` of a six-group symmetric sequence.
    pub fn taus(&self) -> Option<[f64; 3]> {
        if self.kicks.len() != 6 {
            return None;
        }
        Some([self.kicks[3].time, self.kicks[4].time, self.kicks[5].time])
    }
}

/// GZC or FRAG sequence with `0 < τ₁ < τ₂ < τ₃`.
pub fn build_sequence(scheme: Scheme, n: u32, taus: [f64; 3]) -> Result<KickSequence> {
    let pattern = scheme
        .pattern()
        .ok_or_else(|| Error::invalid("scheme", "custom sequences have no pattern"))?;
    if n == 0 {
        return Err(Error::invalid("n", "scheme multiplier must be positive"));
    }
    let [t1, t2, t3] = taus;
    if !(0.0 < t1 && t1 < t2 && t2 < t3) {
        return Err(Error::invalid(
            "taus",
            format!("need 0 < τ₁ < τ₂ < τ₃, got ({t1:e}, {t2:e}, {t3:e})"),
        ));
    }
    let times = [-t3, -t2, -t1, t1, t2, t3];
    let n = n as i32;
    let kicks = times
        .iter()
        .zip(pattern)
        .map(|(&time, w)| Kick {
            time,
            weight: w * n,
        })
        .collect();
    KickSequence::checked(kicks, scheme, n as u32)
}

/// Cumulative phase-space points after each kick (rotating frame).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub com: Vec<C64>,
    pub stretch: Vec<C64>,
}

impl Trajectory {
    pub fn write_csv<W: Write + ?Sized>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "mode,step,re,im")?;
        for (mode, pts) in [("com", &self.com), ("stretch", &self.stretch)] {
            for (k, p) in pts.iter().enumerate() {
                writeln!(out, "{mode},{k},{},{}", Float(p.re), Float(p.im))?;
            }
        }
        Ok(())
    }

    /// Largest distance from the origin reached by either mode.
    pub fn max_excursion(&self) -> f64 {
        self.com
            .iter()
            .chain(&self.stretch)
            .map(|p| p.norm())
            .fold(0.0, f64::max)
    }
}

/// Final mode displacements `(α_c, α_s)` and the per-kick trajectory.
pub fn closure(seq: &KickSequence, trap: &TrapConfig) -> (C64, C64, Trajectory) {
    let w = trap.omega;
    let cs = 2.0 * trap.eta;
    let ss = 2.0 * trap.eta / 3f64.powf(0.25);
    let mut ac = C64::new(0.0, 0.0);
    let mut as_ = C64::new(0.0, 0.0);
    let mut traj = Trajectory {
        com: Vec::with_capacity(seq.len()),
        stretch: Vec::with_capacity(seq.len()),
    };
    for k in seq.kicks() {
        let z = f64::from(k.weight);
        ac += C64::from_polar(cs * z, -w * k.time);
        as_ += C64::from_polar(ss * z, -SQRT3 * w * k.time);
        traj.com.push(ac);
        traj.stretch.push(as_);
    }
    (ac, as_, traj)
}

/// Two-qubit phase `φ` of a kick sequence.
pub fn gate_phase(seq: &KickSequence, trap: &TrapConfig) -> f64 {
    let w = trap.omega;
    let k = seq.kicks();
    let mut acc = 0.0;
    for m in 0..k.len() {
        for j in 0..m {
            let dt = k[j].time - k[m].time;
            let zz = f64::from(k[j].weight) * f64::from(k[m].weight);
            acc += zz * ((SQRT3 * w * dt).sin() / SQRT3 - (w * dt).sin());
        }
    }
    4.0 * trap.eta * trap.eta * acc
}

/// Motional/phase fidelity `F_o` of a sequence with residual displacements
/// and phase error `Δφ`.
pub fn operation_fidelity(alpha_c: C64, alpha_s: C64, delta_phi: f64, trap: &TrapConfig) -> f64 {
    1.0 - gate_infidelity(alpha_c, alpha_s, delta_phi, trap)
}

/// `1 − F_o`, evaluated without cancellation:
/// `F_o = [6 + e^{−4n̄_c|α_c|²} + e^{−4n̄_s|α_s|²} + 4 e^{−(n̄_c|α_c|² + n̄_s|α_s|²)} cos Δφ] / 12`.
pub fn gate_infidelity(alpha_c: C64, alpha_s: C64, delta_phi: f64, trap: &TrapConfig) -> f64 {
    let xc = trap.nbar_c * alpha_c.norm_sqr();
    let xs = trap.nbar_s * alpha_s.norm_sqr();
    let one_minus_e = |x: f64| -(-x).exp_m1();
    let damp = (-(xc + xs)).exp();
    let one_minus_cos = 2.0 * (0.5 * delta_phi).sin().powi(2);
    // 1 − e·cos = (1 − e) + e (1 − cos)
    let cross = one_minus_e(xc + xs) + damp * one_minus_cos;
    ((one_minus_e(4.0 * xc) + one_minus_e(4.0 * xs) + 4.0 * cross) / 12.0).clamp(0.0, 1.0)
}

/// Closure, phase and fidelity summary of a sequence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GateReport {
    pub scheme: Scheme,
    pub n: u32,
    pub alpha_c: C64,
    pub alpha_s: C64,
    pub phi: f64,
    pub delta_phi: f64,
    /// Per-flip error used for `F_s`.
    pub epsilon: f64,
    pub pulse_pairs: u32,
    pub f_o: f64,
    pub one_minus_fo: f64,
    pub f_s: f64,
    pub f_gate: f64,
    pub gate_time: f64,
}

pub fn gate_report(seq: &KickSequence, trap: &TrapConfig, epsilon: f64) -> GateReport {
    let (ac, as_, _) = closure(seq, trap);
    let phi = gate_phase(seq, trap);
    let dphi = phi - FRAC_PI_4;
    let one_minus_fo = gate_infidelity(ac, as_, dphi, trap);
    let pairs = seq.pulse_pairs();
    let f_s = crate::sdk::cumulative_fidelity(epsilon, pairs);
    let f_o = 1.0 - one_minus_fo;
    GateReport {
        scheme: seq.scheme,
        n: seq.n,
        alpha_c: ac,
        alpha_s: as_,
        phi,
        delta_phi: dphi,
        epsilon,
        pulse_pairs: pairs,
        f_o,
        one_minus_fo,
        f_s,
        f_gate: f_s * f_o,
        gate_time: seq.gate_time(),
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Required `max |residual|`.
    pub tol: f64,
    pub max_iterations: usize,
    /// Re-seeds after an ordering collapse.
    pub reseeds: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-12,
            max_iterations: 100,
            reseeds: 6,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    Newton,
    LevenbergMarquardt,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub reseeds: usize,
    /// `(Im α_c, Im α_s, φ − π/4)` at the solution.
    pub residual: [f64; 3],
    /// `(Re α_c, Re α_s)`, which vanish by symmetry.
    pub real_parts: [f64; 2],
    pub method: SolverMethod,
    /// Solution in units of the COM phase, `ω τᵢ`.
    pub omega_tau: [f64; 3],
}

struct Problem<'a> {
    scheme: Scheme,
    n: u32,
    trap: &'a TrapConfig,
}

impl Problem<'_> {
    fn sequence(&self, x: &Vector3<f64>) -> Option<KickSequence> {
        let w = self.trap.omega;
        build_sequence(self.scheme, self.n, [x[0] / w, x[1] / w, x[2] / w]).ok()
    }

    fn residual(&self, x: &Vector3<f64>) -> Option<Vector3<f64>> {
        let seq = self.sequence(x)?;
        let (ac, as_, _) = closure(&seq, self.trap);
        let phi = gate_phase(&seq, self.trap);
        Some(Vector3::new(ac.im, as_.im, phi - FRAC_PI_4))
    }

    fn jacobian(&self, x: &Vector3<f64>) -> Option<Matrix3<f64>> {
        let mut j = Matrix3::zeros();
        for c in 0..3 {
            let h = 1e-6 * x[c].abs().max(1e-3);
            let mut xp = *x;
            let mut xm = *x;
            xp[c] += h;
            xm[c] -= h;
            let d = (self.residual(&xp)? - self.residual(&xm)?) / (2.0 * h);
            j.set_column(c, &d);
        }
        Some(j)
    }
}

fn inf_norm(v: &Vector3<f64>) -> f64 {
    v.amax()
}

enum Outcome {
    Converged(Vector3<f64>, usize, SolverMethod),
    Collapsed,
    Stalled(Vector3<f64>, f64),
}

fn newton(p: &Problem, x0: Vector3<f64>, opts: &SolverOptions) -> Outcome {
    let mut x = x0;
    let Some(mut r) = p.residual(&x) else {
        return Outcome::Collapsed;
    };
    for it in 0..opts.max_iterations {
        if inf_norm(&r) < opts.tol {
            return Outcome::Converged(x, it, SolverMethod::Newton);
        }
        let Some(j) = p.jacobian(&x) else {
            return Outcome::Collapsed;
        };
        let Some(step) = j.lu().solve(&(-r)) else {
            return levenberg_marquardt(p, x, opts, it);
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-6 {
            let xn = x + step * lambda;
            if let Some(rn) = p.residual(&xn) {
                if rn.norm() < r.norm() * (1.0 - 1e-4 * lambda) || inf_norm(&rn) < opts.tol {
                    x = xn;
                    r = rn;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            if inf_norm(&r) < opts.tol {
                return Outcome::Converged(x, it, SolverMethod::Newton);
            }
            return levenberg_marquardt(p, x, opts, it);
        }
    }
    if inf_norm(&r) < opts.tol {
        Outcome::Converged(x, opts.max_iterations, SolverMethod::Newton)
    } else {
        levenberg_marquardt(p, x, opts, opts.max_iterations)
    }
}

fn levenberg_marquardt(
    p: &Problem,
    x0: Vector3<f64>,
    opts: &SolverOptions,
    start: usize,
) -> Outcome {
    let mut x = x0;
    let Some(mut r) = p.residual(&x) else {
        return Outcome::Collapsed;
    };
    let mut mu = 1e-3;
    for it in 0..4 * opts.max_iterations {
        if inf_norm(&r) < opts.tol {
            return Outcome::Converged(x, start + it, SolverMethod::LevenbergMarquardt);
        }
        let Some(j) = p.jacobian(&x) else {
            return Outcome::Collapsed;
        };
        let jt = j.transpose();
        let jtj = jt * j;
        let g = jt * r;
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj;
            for d in 0..3 {
                a[(d, d)] += mu * jtj[(d, d)].max(1e-12);
            }
            if let Some(step) = a.lu().solve(&(-g)) {
                let xn = x + step;
                match p.residual(&xn) {
                    Some(rn) if rn.norm() < r.norm() => {
                        x = xn;
                        r = rn;
                        mu = (mu * 0.3).max(1e-12);
                        improved = true;
                        break;
                    }
                    Some(_) => mu *= 4.0,
                    None => {
                        mu *= 4.0;
                    }
                }
            } else {
                mu *= 4.0;
            }
        }
        if !improved {
            break;
        }
    }
    if inf_norm(&r) < opts.tol {
        Outcome::Converged(x, start, SolverMethod::LevenbergMarquardt)
    } else if !(0.0 < x[0] && x[0] < x[1] && x[1] < x[2]) {
        Outcome::Collapsed
    } else {
        Outcome::Stalled(x, inf_norm(&r))
    }
}

/// Solve the closure and phase conditions from an initial guess
/// `(τ₁, τ₂, τ₃)` in seconds.
///
/// Damped Newton with a finite-difference Jacobian; falls back to
/// Levenberg–Marquardt when Newton stalls, and re-seeds around the guess when
/// the iterate leaves the ordered region.
pub fn solve_timings(
    scheme: Scheme,
    n: u32,
    trap: &TrapConfig,
    guess: [f64; 3],
    opts: &SolverOptions,
) -> Result<(KickSequence, SolveReport)> {
    trap.validate()?;
    // validates ordering and scheme
    build_sequence(scheme, n, guess)?;
    let p = Problem { scheme, n, trap };
    let w = trap.omega;
    let x0 = Vector3::new(guess[0] * w, guess[1] * w, guess[2] * w);
    let mut best: Option<(Vector3<f64>, f64)> = None;
    let mut iterations = 0;
    for reseed in 0..=opts.reseeds {
        let start = if reseed == 0 {
            x0
        } else {
            // spread successive re-seeds around the guess, keeping the order
            let f = 0.05 * reseed as f64;
            let sign = if reseed % 2 == 0 { 1.0 } else { -1.0 };
            Vector3::new(
                x0[0] * (1.0 + sign * f),
                0.5 * (x0[0] + x0[2]) + (x0[1] - 0.5 * (x0[0] + x0[2])) * (1.0 - f),
                x0[2] * (1.0 - sign * 0.5 * f),
            )
        };
        match newton(&p, start, opts) {
            Outcome::Converged(x, it, method) => {
                iterations += it;
                let seq = p.sequence(&x).expect("converged iterate is ordered");
                let (ac, as_, _) = closure(&seq, trap);
                let r = p.residual(&x).expect("ordered");
                let report = SolveReport {
                    iterations,
                    reseeds: reseed,
                    residual: [r[0], r[1], r[2]],
                    real_parts: [ac.re, as_.re],
                    method,
                    omega_tau: [x[0], x[1], x[2]],
                };
                return Ok((seq, report));
            }
            Outcome::Collapsed => {
                iterations += opts.max_iterations;
            }
            Outcome::Stalled(x, res) => {
                iterations += opts.max_iterations;
                if best.is_none_or(|(_, b)| res < b) {
                    best = Some((x, res));
                }
            }
        }
    }
    let (bx, bres) = best.unwrap_or((x0, f64::INFINITY));
    Err(Error::NonConvergence {
        iterations,
        residual: bres,
        best: vec![bx[0] / w, bx[1] / w, bx[2] / w],
    })
}

/// Deterministic low-discrepancy seeds `0 < ωτ₁ < ωτ₂ < ωτ₃ < span`.
pub fn seed_triples(count: usize, span: f64) -> Vec<[f64; 3]> {
    fn halton(mut i: usize, base: usize) -> f64 {
        let mut f = 1.0;
        let mut r = 0.0;
        while i > 0 {
            f /= base as f64;
            r += f * (i % base) as f64;
            i /= base;
        }
        r
    }
    let mut out = Vec::with_capacity(count);
    let mut i = 1;
    while out.len() < count {
        let mut v = [
            halton(i, 2) * span,
            halton(i, 3) * span,
            halton(i, 5) * span,
        ];
        v.sort_by(f64::total_cmp);
        i += 1;
        if v[0] > 1e-3 && v[1] - v[0] > 1e-3 && v[2] - v[1] > 1e-3 {
            out.push(v);
        }
    }
    out
}

/// Multi-start search for the shortest solution of a scheme.
///
/// Seeds `ωτᵢ` are spread over `(0, 2π)`; the converged solution with the
/// smallest gate time wins.
pub fn solve_fastest(
    scheme: Scheme,
    n: u32,
    trap: &TrapConfig,
    seeds: usize,
    opts: &SolverOptions,
) -> Result<(KickSequence, SolveReport)> {
    trap.validate()?;
    let w = trap.omega;
    let candidates: Vec<_> = seed_triples(seeds, TAU)
        .into_par_iter()
        .map(|s| {
            let quick = SolverOptions {
                reseeds: 0,
                ..*opts
            };
            solve_timings(scheme, n, trap, [s[0] / w, s[1] / w, s[2] / w], &quick).ok()
        })
        .collect();
    let mut best: Option<(KickSequence, SolveReport)> = None;
    for c in candidates.into_iter().flatten() {
        let better = match &best {
            None => true,
            Some((b, _)) => c.0.gate_time() < b.gate_time() * (1.0 - 1e-9),
        };
        if better {
            best = Some(c);
        }
    }
    best.ok_or(Error::NonConvergence {
        iterations: seeds * opts.max_iterations,
        residual: f64::INFINITY,
        best: Vec::new(),
    })
}

/// Two kicks that landed on the same grid slot.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridCollision {
    pub time: f64,
    pub weights: Vec<i32>,
    pub merged: i32,
}

/// Snap every kick to the nearest `t₀ + m / f_bw`.
///
/// Kicks sharing a slot are merged by summing their weights (and dropped if
/// the sum vanishes). `f_bw = ∞` leaves the sequence unchanged.
pub fn discretize(
    seq: &KickSequence,
    f_bw: f64,
    t0: f64,
) -> Result<(KickSequence, Vec<GridCollision>)> {
    if !(f_bw > 0.0) {
        return Err(Error::invalid("f_bw", "bandwidth must be positive"));
    }
    if f_bw.is_infinite() {
        return Ok((seq.clone(), Vec::new()));
    }
    let mut slots: Vec<(i64, Vec<i32>)> = Vec::new();
    for k in seq.kicks() {
        let m = ((k.time - t0) * f_bw).round() as i64;
        match slots.last_mut() {
            Some((last, ws)) if *last == m => ws.push(k.weight),
            _ => slots.push((m, vec![k.weight])),
        }
    }
    let mut kicks = Vec::with_capacity(slots.len());
    let mut collisions = Vec::new();
    for (m, ws) in slots {
        let time = t0 + m as f64 / f_bw;
        let merged: i32 = ws.iter().sum();
        if ws.len() > 1 {
            let opposite = ws.iter().any(|&w| w > 0) && ws.iter().any(|&w| w < 0);
            if opposite {
                log::warn!(
                    "kicks of opposite sign collide at t = {time:e} s; merged weight {merged}"
                );
            }
            collisions.push(GridCollision {
                time,
                weights: ws,
                merged,
            });
        }
        if merged != 0 {
            kicks.push(Kick {
                time,
                weight: merged,
            });
        }
    }
    let out = KickSequence {
        kicks,
        scheme: seq.scheme,
        n: seq.n,
    };
    Ok((out, collisions))
}

/// Snap to the grid, then try neighbouring slots for `τ₁, τ₂, τ₃` and keep
/// the symmetric placement with the lowest `1 − F_o`.
pub fn discretize_refined(
    seq: &KickSequence,
    f_bw: f64,
    trap: &TrapConfig,
) -> Result<KickSequence> {
    let (snapped, _) = discretize(seq, f_bw, 0.0)?;
    let (Some(taus), Some(_)) = (snapped.taus(), seq.scheme.pattern()) else {
        return Ok(snapped);
    };
    if f_bw.is_infinite() {
        return Ok(snapped);
    }
    let dt = 1.0 / f_bw;
    let score = |s: &KickSequence| {
        let (ac, as_, _) = closure(s, trap);
        let dphi = gate_phase(s, trap) - FRAC_PI_4;
        gate_infidelity(ac, as_, dphi, trap) + 1e-3 * (ac.norm_sqr() + as_.norm_sqr())
    };
    let mut best = (score(&snapped), snapped.clone());
    for a in -1..=1 {
        for b in -1..=1 {
            for c in -1..=1 {
                let t = [
                    taus[0] + f64::from(a) * dt,
                    taus[1] + f64::from(b) * dt,
                    taus[2] + f64::from(c) * dt,
                ];
                if let Ok(s) = build_sequence(seq.scheme, seq.n, t) {
                    let sc = score(&s);
                    if sc < best.0 {
                        best = (sc, s);
                    }
                }
            }
        }
    }
    Ok(best.1)
}

/// One row of a bandwidth scan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub scheme: Scheme,
    pub n: u32,
    pub f_bw_hz: f64,
    pub gate_time_s: f64,
    pub alpha_c_abs: f64,
    pub alpha_s_abs: f64,
    pub delta_phi: f64,
    pub one_minus_fo: f64,
}

pub const SCAN_CSV_HEADER: &str =
    "n,f_bw_hz,gate_time_s,alpha_c_abs,alpha_s_abs,delta_phi,one_minus_Fo";

impl ScanRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.n,
            Float(self.f_bw_hz),
            Float(self.gate_time_s),
            Float(self.alpha_c_abs),
            Float(self.alpha_s_abs),
            Float(self.delta_phi),
            Float(self.one_minus_fo)
        )
    }
}

/// Evaluate a continuous-time sequence on a timing grid.
pub fn evaluate_on_grid(
    seq: &KickSequence,
    f_bw: f64,
    trap: &TrapConfig,
    refine: bool,
) -> Result<ScanRow> {
    let grid = if refine {
        discretize_refined(seq, f_bw, trap)?
    } else {
        discretize(seq, f_bw, 0.0)?.0
    };
    let (ac, as_, _) = closure(&grid, trap);
    let dphi = gate_phase(&grid, trap) - FRAC_PI_4;
    Ok(ScanRow {
        scheme: seq.scheme,
        n: seq.n,
        f_bw_hz: f_bw,
        gate_time_s: grid.gate_time(),
        alpha_c_abs: ac.norm(),
        alpha_s_abs: as_.norm(),
        delta_phi: dphi,
        one_minus_fo: gate_infidelity(ac, as_, dphi, trap),
    })
}

/// Solve the fastest sequence for each `n`, then evaluate it on every grid.
///
/// Rows are ordered by `n`, then by `f_bw` as given.
pub fn repetition_scan(
    scheme: Scheme,
    ns: &[u32],
    f_bws: &[f64],
    trap: &TrapConfig,
    seeds: usize,
    refine: bool,
) -> Result<Vec<ScanRow>> {
    let opts = SolverOptions::default();
    let baselines = ns
        .par_iter()
        .map(|&n| solve_fastest(scheme, n, trap, seeds, &opts).map(|(s, _)| s))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(ns.len() * f_bws.len());
    for seq in &baselines {
        for &f in f_bws {
            rows.push(evaluate_on_grid(seq, f, trap, refine)?);
        }
    }
    Ok(rows)
}

/// Least-squares slope of `ln T` against `ln N_p`.
pub fn scaling_exponent(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(np, t) in points {
        let (x, y) = (np.ln(), t.ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Displacements and phase recovered from brute-force Fock-space evolution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleResult {
    pub alpha_c: C64,
    pub alpha_s: C64,
    pub phi: f64,
    /// `|⟨vac|ψ⟩|²` of the motional state for `|↑↑⟩`, i.e. the return
    /// probability of the motion.
    pub motional_overlap: f64,
    /// Largest population seen on the truncation boundary.
    pub tail: f64,
}

/// Evolve `|s₁ s₂⟩ ⊗ |0_c 0_s⟩` for the four spin configurations through the
/// kick sequence on a truncated two-mode Fock space.
///
/// Each kick displaces the COM by `i√2 η (s₁ + s₂) z` and the stretch mode by
/// `i√2 (η/3^{1/4}) (s₁ − s₂) z`; the modes evolve freely in between. The
/// displacements are read from `⟨a⟩` and the phase from the overlaps with the
/// corresponding coherent states.
///
/// The phase is reported in the convention of [`gate_phase`], as `φ` in a
/// spin operator `e^{iφσ_z¹σ_z²}`, reduced to `[0, π/2)`.
pub fn fock_oracle(
    seq: &KickSequence,
    trap: &TrapConfig,
    truncation: usize,
) -> Result<OracleResult> {
    trap.validate()?;
    if truncation < 4 {
        return Err(Error::invalid(
            "truncation",
            "need at least four Fock levels",
        ));
    }
    let nf = truncation;
    let basis = PositionBasis::new(nf);
    let w = trap.omega;
    let ws = trap.stretch_frequency();
    let eta_c = 2f64.sqrt() * trap.eta;
    let eta_s = 2f64.sqrt() * trap.eta / 3f64.powf(0.25);
    let configs: [(f64, f64); 4] = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
    let kicks = seq.kicks();
    let mut tail: f64 = 0.0;
    let mut states = Vec::with_capacity(4);
    for &(s1, s2) in &configs {
        let mut psi = DMatrix::<C64>::zeros(nf, nf);
        psi[(0, 0)] = C64::new(1.0, 0.0);
        let mut t_prev = kicks.first().map_or(0.0, |k| k.time);
        for k in kicks {
            let dt = k.time - t_prev;
            free_evolve(&mut psi, w * dt, ws * dt);
            let z = f64::from(k.weight);
            let dc = basis.exp_i(eta_c * (s1 + s2) * z);
            let ds = basis.exp_i(eta_s * (s1 - s2) * z);
            psi = &dc * &psi * ds.transpose();
            tail = tail.max(boundary_population(&psi));
            t_prev = k.time;
        }
        // interaction picture with respect to t = 0
        free_evolve(&mut psi, -w * t_prev, -ws * t_prev);
        states.push(psi);
    }
    fock::check_tail(nf, tail, 1e-8)?;

    let mean_a = |psi: &DMatrix<C64>, com: bool| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..nf {
            for b in 0..nf {
                let (na, nb) = if com { (a + 1, b) } else { (a, b + 1) };
                if na < nf && nb < nf {
                    let f = if com { na as f64 } else { nb as f64 };
                    acc += psi[(a, b)].conj() * psi[(na, nb)] * f.sqrt();
                }
            }
        }
        acc
    };
    let displacement = |psi: &DMatrix<C64>| (mean_a(psi, true), mean_a(psi, false));
    let (ac_uu, _) = displacement(&states[0]);
    let (_, as_ud) = displacement(&states[1]);
    let to_alpha = |m: C64| C64::new(0.0, 1.0) * m.conj() / 2f64.sqrt();

    let mut amps = [C64::new(0.0, 0.0); 4];
    for (i, psi) in states.iter().enumerate() {
        let (mc, ms) = displacement(psi);
        let cc = fock::coherent_state(mc, nf);
        let cs = fock::coherent_state(ms, nf);
        let mut ov = C64::new(0.0, 0.0);
        for a in 0..nf {
            for b in 0..nf {
                ov += (cc[a] * cs[b]).conj() * psi[(a, b)];
            }
        }
        amps[i] = ov;
    }
    let prod = amps[1] * amps[2] * amps[0].conj() * amps[3].conj();
    let phi = (-prod.arg()).rem_euclid(TAU) / 4.0;
    Ok(OracleResult {
        alpha_c: to_alpha(ac_uu),
        alpha_s: to_alpha(as_ud),
        phi,
        motional_overlap: states[0][(0, 0)].norm_sqr(),
        tail,
    })
}

fn free_evolve(psi: &mut DMatrix<C64>, phase_c: f64, phase_s: f64) {
    let nf = psi.nrows();
    let rc: Vec<C64> = (0..nf)
        .map(|a| C64::from_polar(1.0, -phase_c * a as f64))
        .collect();
    let rs: Vec<C64> = (0..nf)
        .map(|b| C64::from_polar(1.0, -phase_s * b as f64))
        .collect();
    for a in 0..nf {
        for b in 0..nf {
            psi[(a, b)] *= rc[a] * rs[b];
        }
    }
}

fn boundary_population(psi: &DMatrix<C64>) -> f64 {
    let nf = psi.nrows();
    let row: f64 = (0..nf).map(|b| psi[(nf - 1, b)].norm_sqr()).sum();
    let col: f64 = (0..nf).map(|a| psi[(a, nf - 1)].norm_sqr()).sum();
    row.max(col)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trap() -> TrapConfig {
        TrapConfig::reference()
    }

    #[test]
    fn stretch_frequency_is_root_three() {
        let t = trap();
        assert_eq!(t.stretch_frequency(), 3f64.sqrt() * t.omega);
        assert!(TrapConfig::new(1.0, 0.0).is_err());
        assert!(TrapConfig::new(-1.0, 0.1).is_err());
        assert!(t.with_thermal(-1.0, 0.0).validate().is_err());
    }

    #[test]
    fn pulse_pair_counts() {
        for n in 1..5 {
            let g = build_sequence(Scheme::Gzc, n, [1e-7, 2e-7, 3e-7]).unwrap();
            let f = build_sequence(Scheme::Frag, n, [1e-7, 2e-7, 3e-7]).unwrap();
            assert_eq!(g.pulse_pairs(), 14 * n);
            assert_eq!(f.pulse_pairs(), 10 * n);
            assert_eq!(g.kicks().iter().map(|k| k.weight).sum::<i32>(), 0);
            assert_eq!(f.kicks().iter().map(|k| k.weight).sum::<i32>(), 0);
        }
        assert!(build_sequence(Scheme::Gzc, 1, [2e-7, 1e-7, 3e-7]).is_err());
        assert!(build_sequence(Scheme::Gzc, 1, [0.0, 1e-7, 3e-7]).is_err());
        assert!(build_sequence(Scheme::Custom, 1, [1e-7, 2e-7, 3e-7]).is_err());
    }

    #[test]
    fn sequences_are_odd_in_time() {
        for scheme in [Scheme::Gzc, Scheme::Frag] {
            let s = build_sequence(scheme, 2, [1e-7, 2.5e-7, 3e-7]).unwrap();
            let k = s.kicks();
            for i in 0..3 {
                assert_eq!(k[i].time, -k[5 - i].time);
                assert_eq!(k[i].weight, -k[5 - i].weight);
            }
        }
    }

    #[test]
    fn closure_examples() {
        let empty = KickSequence::custom(vec![]).unwrap();
        let (ac, as_, _) = closure(&empty, &trap());
        assert_eq!((ac, as_), (C64::new(0.0, 0.0), C64::new(0.0, 0.0)));
        let single = KickSequence::custom(vec![Kick {
            time: 0.0,
            weight: 1,
        }])
        .unwrap();
        let (ac, as_, tr) = closure(&single, &trap());
        assert!((ac - C64::new(0.6, 0.0)).norm() < 1e-15);
        assert!((as_ - C64::new(0.6 / 3f64.powf(0.25), 0.0)).norm() < 1e-15);
        assert_eq!(tr.com.len(), 1);
        assert_eq!(gate_phase(&single, &trap()), 0.0);
    }

    #[test]
    fn phase_matches_series_for_close_kicks() {
        // two kicks z = 1 separated by small Δt; with d = t₁ − t₂ = −Δt:
        // sin(√3 ω d)/√3 − sin(ω d) = ω³d³(1 − 3)/6·(−1)… expanded to fifth order
        let t = trap();
        for x in [1e-3, 5e-3, 2e-2] {
            let dt = x / t.omega;
            let s = KickSequence::custom(vec![
                Kick {
                    time: 0.0,
                    weight: 1,
                },
                Kick {
                    time: dt,
                    weight: 1,
                },
            ])
            .unwrap();
            let d = -x;
            // sin(a d)/a − sin(d) for a = √3, Taylor series to d⁷
            let series = |d: f64| {
                let a2 = 3.0;
                let c3 = (a2 - 1.0) * d.powi(3) / 6.0;
                let c5 = (a2 * a2 - 1.0) * d.powi(5) / 120.0;
                let c7 = (a2 * a2 * a2 - 1.0) * d.powi(7) / 5040.0;
                -c3 + c5 - c7
            };
            let expected = 4.0 * t.eta * t.eta * series(d);
            let got = gate_phase(&s, &t);
            assert!(
                (got - expected).abs() < 1e-6 * expected.abs(),
                "{got:e} {expected:e}"
            );
        }
    }

    #[test]
    fn infidelity_model() {
        let t = trap();
        let z = C64::new(0.0, 0.0);
        assert_eq!(operation_fidelity(z, z, 0.0, &t), 1.0);
        for dphi in [1e-3, 1e-2] {
            let inf = gate_infidelity(z, z, dphi, &t);
            assert!((inf / (dphi * dphi / 6.0) - 1.0).abs() < 1e-4);
        }
        let a = C64::new(0.3, -0.2);
        for dphi in [0.0, 0.4, 2.0] {
            let f = operation_fidelity(a, a, dphi, &t);
            assert!((f - (8.0 + 4.0 * dphi.cos()) / 12.0).abs() < 1e-15);
        }
        let hot = t.with_thermal(2.0, 1.0);
        assert!(operation_fidelity(a, a, 0.0, &hot) < 1.0);
    }

    proptest! {
        #[test]
        fn infidelity_bounds(re in -3.0f64..3.0, im in -3.0f64..3.0, d in -4.0f64..4.0, nc in 0.0f64..5.0, ns in 0.0f64..5.0) {
            let t = trap().with_thermal(nc, ns);
            let a = C64::new(re, im);
            let f = operation_fidelity(a, a * 0.5, d, &t);
            prop_assert!((0.0..=1.0).contains(&f));
        }

        #[test]
        fn antisymmetric_real_parts_vanish(x1 in 0.01f64..2.0, dx2 in 0.01f64..2.0, dx3 in 0.01f64..2.0, frag in proptest::bool::ANY, n in 1u32..6) {
            let t = trap();
            let w = t.omega;
            let scheme = if frag { Scheme::Frag } else { Scheme::Gzc };
            let s = build_sequence(scheme, n, [x1 / w, (x1 + dx2) / w, (x1 + dx2 + dx3) / w]).unwrap();
            let (ac, as_, _) = closure(&s, &t);
            prop_assert!(ac.re.abs() < 1e-12 && as_.re.abs() < 1e-12);
        }

        #[test]
        fn time_translation(shift in -1e-5f64..1e-5, x1 in 0.1f64..1.0) {
            let t = trap();
            let w = t.omega;
            let s = build_sequence(Scheme::Gzc, 1, [x1 / w, 2.0 * x1 / w, 3.5 * x1 / w]).unwrap();
            let sh = s.shifted(shift);
            let (a, b, _) = closure(&s, &t);
            let (c, d, _) = closure(&sh, &t);
            prop_assert!((a.norm() - c.norm()).abs() < 1e-12);
            prop_assert!((b.norm() - d.norm()).abs() < 1e-12);
            prop_assert!((gate_phase(&s, &t) - gate_phase(&sh, &t)).abs() < 1e-12);
        }

        #[test]
        fn eta_scaling(scale in 0.1f64..3.0, x1 in 0.1f64..1.0) {
            let t = trap();
            let w = t.omega;
            let s = build_sequence(Scheme::Frag, 2, [x1 / w, 1.7 * x1 / w, 2.2 * x1 / w]).unwrap();
            let t2 = t.with_eta(t.eta * scale);
            let (a, b, _) = closure(&s, &t);
            let (c, d, _) = closure(&s, &t2);
            prop_assert!((c - a * scale).norm() < 1e-12);
            prop_assert!((d - b * scale).norm() < 1e-12);
            let p1 = gate_phase(&s, &t);
            let p2 = gate_phase(&s, &t2);
            prop_assert!((p2 - p1 * scale * scale).abs() < 1e-12 * (1.0 + p1.abs()));
        }
    }

    #[test]
    fn solves_gzc_n2_within_a_trap_period() {
        let t = trap();
        let (seq, rep) = solve_fastest(Scheme::Gzc, 2, &t, 200, &SolverOptions::default()).unwrap();
        assert!(rep.residual.iter().all(|r| r.abs() < 1e-12));
        assert!(rep.real_parts.iter().all(|r| r.abs() < 1e-12));
        assert!(seq.gate_time() < t.period());
        let (ac, as_, _) = closure(&seq, &t);
        assert!(ac.norm() < 1e-10 && as_.norm() < 1e-10);
        assert!((gate_phase(&seq, &t) - FRAC_PI_4).abs() < 1e-10);
    }

    #[test]
    fn timings_scale_inversely_with_trap_frequency() {
        let t = trap();
        let (seq, rep) =
            solve_fastest(Scheme::Frag, 2, &t, 100, &SolverOptions::default()).unwrap();
        let t2 = TrapConfig {
            omega: 2.0 * t.omega,
            ..t
        };
        let guess = seq.taus().unwrap().map(|x| 0.5 * x * (1.0 + 1e-3));
        let (seq2, rep2) =
            solve_timings(Scheme::Frag, 2, &t2, guess, &SolverOptions::default()).unwrap();
        for i in 0..3 {
            assert!((rep2.omega_tau[i] - rep.omega_tau[i]).abs() < 1e-9);
        }
        assert!((seq2.gate_time() - 0.5 * seq.gate_time()).abs() < 1e-15);
    }

    #[test]
    fn solver_rejects_bad_guess() {
        let t = trap();
        let r = solve_timings(
            Scheme::Gzc,
            1,
            &t,
            [3e-7, 2e-7, 1e-7],
            &SolverOptions::default(),
        );
        assert!(matches!(r, Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn solver_reports_non_convergence() {
        let t = trap();
        let opts = SolverOptions {
            max_iterations: 1,
            reseeds: 0,
            tol: 1e-30,
        };
        let r = solve_timings(Scheme::Gzc, 1, &t, [1e-8, 2e-8, 3e-8], &opts);
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn discretize_snaps_to_grid() {
        let s = KickSequence::custom(vec![
            Kick {
                time: 0.3e-9,
                weight: 1,
            },
            Kick {
                time: 2.6e-9,
                weight: -1,
            },
        ])
        .unwrap();
        let (d, c) = discretize(&s, 1e9, 0.0).unwrap();
        assert_eq!(d.kicks()[0].time, 0.0);
        assert!((d.kicks()[1].time - 3e-9).abs() < 1e-21);
        assert!(c.is_empty());
        let (same, _) = discretize(&s, f64::INFINITY, 0.0).unwrap();
        assert_eq!(same, s);
        assert!(discretize(&s, 0.0, 0.0).is_err());
    }

    #[test]
    fn discretize_merges_collisions() {
        let s = KickSequence::custom(vec![
            Kick {
                time: 0.1e-9,
                weight: 2,
            },
            Kick {
                time: 0.2e-9,
                weight: -1,
            },
            Kick {
                time: 1.4e-9,
                weight: 1,
            },
            Kick {
                time: 1.45e-9,
                weight: -1,
            },
        ])
        .unwrap();
        let (d, c) = discretize(&s, 1e9, 0.0).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].merged, 1);
        assert_eq!(d.len(), 1);
        assert_eq!(d.kicks()[0].weight, 1);
    }

    #[test]
    fn trajectory_ends_at_closure_values() {
        let t = trap();
        let s = build_sequence(Scheme::Gzc, 1, [1e-7, 2e-7, 3e-7]).unwrap();
        let (ac, as_, tr) = closure(&s, &t);
        assert_eq!(*tr.com.last().unwrap(), ac);
        assert_eq!(*tr.stretch.last().unwrap(), as_);
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("mode,step,re,im\ncom,0,"));
        assert_eq!(text.lines().count(), 13);
    }

    #[test]
    fn oracle_matches_analytic_single_pair() {
        let t = trap().with_eta(0.1);
        let s = KickSequence::custom(vec![
            Kick {
                time: 0.0,
                weight: 1,
            },
            Kick {
                time: 0.2e-6,
                weight: 1,
            },
        ])
        .unwrap();
        let o = fock_oracle(&s, &t, 30).unwrap();
        let (ac, as_, _) = closure(&s, &t);
        assert!((o.alpha_c - ac).norm() < 1e-6, "{:?} {:?}", o.alpha_c, ac);
        assert!((o.alpha_s - as_).norm() < 1e-6);
        assert!(
            phase_gap(o.phi, gate_phase(&s, &t)) < 1e-6,
            "{} {}",
            o.phi,
            gate_phase(&s, &t)
        );
    }

    /// Distance between two phases modulo π/2.
    fn phase_gap(a: f64, b: f64) -> f64 {
        let q = std::f64::consts::FRAC_PI_2;
        let d = (a - b).rem_euclid(q);
        d.min(q - d)
    }

    #[test]
    fn oracle_matches_analytic_open_sequence() {
        let t = trap().with_eta(0.1);
        let s = KickSequence::custom(vec![
            Kick {
                time: -0.3e-6,
                weight: -1,
            },
            Kick {
                time: -0.1e-6,
                weight: 2,
            },
            Kick {
                time: 0.15e-6,
                weight: -2,
            },
            Kick {
                time: 0.4e-6,
                weight: 1,
            },
        ])
        .unwrap();
        let o = fock_oracle(&s, &t, 40).unwrap();
        let (ac, as_, _) = closure(&s, &t);
        assert!((o.alpha_c - ac).norm() < 1e-6);
        assert!((o.alpha_s - as_).norm() < 1e-6);
        assert!(
            phase_gap(o.phi, gate_phase(&s, &t)) < 1e-6,
            "{} {}",
            o.phi,
            gate_phase(&s, &t)
        );
    }

    #[test]
    fn oracle_detects_truncation() {
        let t = trap();
        let s = KickSequence::custom(vec![Kick {
            time: 0.0,
            weight: 4,
        }])
        .unwrap();
        assert!(matches!(
            fock_oracle(&s, &t, 6),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn scaling_fit_recovers_power_law() {
        let pts: Vec<(f64, f64)> = (1..9)
            .map(|n| (14.0 * n as f64, 3.0 * (14.0 * n as f64).powf(-0.6667)))
            .collect();
        assert!((scaling_exponent(&pts) + 0.6667).abs() < 1e-12);
    }
}
