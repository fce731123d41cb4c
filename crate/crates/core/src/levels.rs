//! Atomic level models and the far-detuned Raman reduction.
//!
//! Two models are provided: a minimal Λ system (`|0⟩`, `|e⟩`, `|1⟩`) and the
//! eight hyperfine/Zeeman sublevels of ¹⁷¹Yb⁺ (`²S₁/₂` and `²P₁/₂`). Energies
//! are angular frequencies relative to `|0⟩`.
//!
//! ## Dipole weights of the ¹⁷¹Yb⁺ model
//!
//! Relative matrix elements `⟨F' m'| d_q |F m⟩` for `²S₁/₂ → ²P₁/₂`
//! (`q = m' − m`, `L ≡ σ⁺ ≡ q = +1`, `R ≡ σ⁻ ≡ q = −1`), normalised so the
//! largest magnitude is `1/√2`:
//!
//! | lower `(F, m)` | upper `(F', m')` | `q`  | weight  |
//! |----------------|------------------|------|---------|
//! | (0, 0)         | (1, −1)          | −1   | +1/√2   |
//! | (0, 0)         | (1, 0)           | 0    | +1/√2   |
//! | (0, 0)         | (1, +1)          | +1   | +1/√2   |
//! | (1, −1)        | (0, 0)           | +1   | −1/√2   |
//! | (1, −1)        | (1, −1)          | 0    | −1/√2   |
//! | (1, −1)        | (1, 0)           | +1   | −1/√2   |
//! | (1, 0)         | (0, 0)           | 0    | +1/√2   |
//! | (1, 0)         | (1, −1)          | −1   | +1/√2   |
//! | (1, 0)         | (1, +1)          | +1   | −1/√2   |
//! | (1, +1)        | (0, 0)           | −1   | −1/√2   |
//! | (1, +1)        | (1, 0)           | −1   | +1/√2   |
//! | (1, +1)        | (1, +1)          | 0    | +1/√2   |
//!
//! `(1, 0) → (1, 0)` vanishes. With the pump linearly polarised along `H` and the
//! Stokes beam along `V` both clock states couple to the same bright
//! combination of `²P₁/₂ |F' = 1, m' = ±1⟩`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::constants::{
    HYPERFINE_SPLITTING, OPTICAL_FREQUENCY_HZ, P_HYPERFINE_SPLITTING, ZEEMAN_P_LINEAR,
    ZEEMAN_QUADRATIC, ZEEMAN_S_LINEAR,
};
use crate::error::{Error, Result};

/// Linear polarisation of a Raman beam.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

/// Circular (and π) components of a drive, in the order used by coupling
/// weight arrays.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Component {
    /// σ⁺, Δm = +1.
    L = 0,
    /// σ⁻, Δm = −1.
    R = 1,
    Pi = 2,
}

/// Circular amplitudes `(L, R)` of a linear polarisation.
pub fn decompose_polarization(pol: Polarization) -> (C64, C64) {
    let a = C64::new(FRAC_1_SQRT_2, 0.0);
    match pol {
        Polarization::H => (a, a),
        Polarization::V => (a, -a),
    }
}

/// Spherical amplitude vector `[L, R, π]` of a linear polarisation.
pub fn polarization_vector(pol: Polarization) -> [C64; 3] {
    let (l, r) = decompose_polarization(pol);
    [l, r, C64::new(0.0, 0.0)]
}

/// Which rotating frame a level is assigned to.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Manifold {
    /// Hyperfine manifold containing `|0⟩`.
    Lower0,
    /// Hyperfine manifold containing `|1⟩`.
    Lower1,
    /// Optically excited manifold.
    Excited,
}

/// Which Raman beam drives a dipole coupling.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BeamSelect {
    /// Only the pump (frequency near `|0⟩ → |e⟩`).
    Pump,
    /// Only the Stokes beam (frequency near `|1⟩ → |e⟩`).
    Stokes,
    /// Both beams, each with its own detuning from this transition.
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub label: String,
    /// Angular frequency relative to `|0⟩`, rad/s.
    pub energy: f64,
    pub manifold: Manifold,
}

/// Dipole coupling between a lower and an upper level with per-component
/// weights `[L, R, π]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DipoleCoupling {
    pub lower: usize,
    pub upper: usize,
    pub weights: [f64; 3],
    pub beams: BeamSelect,
}

/// Energies and dipole couplings of an N-level ion model.
///
/// Immutable once built; share it freely between worker threads.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSystem {
    levels: Vec<Level>,
    couplings: Vec<DipoleCoupling>,
    ground: usize,
    target: usize,
    reference_excited: usize,
}

impl LevelSystem {
    fn new(
        levels: Vec<Level>,
        couplings: Vec<DipoleCoupling>,
        ground: usize,
        target: usize,
        reference_excited: usize,
    ) -> Self {
        debug_assert_eq!(levels[ground].energy, 0.0);
        LevelSystem {
            levels,
            couplings,
            ground,
            target,
            reference_excited,
        }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn labels(&self) -> Vec<&str> {
        self.levels.iter().map(|l| l.label.as_str()).collect()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }

    pub fn couplings(&self) -> &[DipoleCoupling] {
        &self.couplings
    }

    /// Index of `|0⟩`.
    pub fn ground(&self) -> usize {
        self.ground
    }

    /// Index of `|1⟩`.
    pub fn target(&self) -> usize {
        self.target
    }

    /// Excited level the single-photon detuning is measured from.
    pub fn reference_excited(&self) -> usize {
        self.reference_excited
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.levels.iter().position(|l| l.label == label)
    }

    pub fn excited_indices(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.levels[i].manifold == Manifold::Excited)
            .collect()
    }

    /// Clock splitting `E(|1⟩) − E(|0⟩)`.
    pub fn qubit_splitting(&self) -> f64 {
        self.levels[self.target].energy - self.levels[self.ground].energy
    }

    /// Symmetric `n × n` matrix of coupling weights for one component.
    pub fn coupling_matrix(&self, component: Component) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut m = vec![vec![0.0; n]; n];
        for c in &self.couplings {
            let w = c.weights[component as usize];
            m[c.lower][c.upper] = w;
            m[c.upper][c.lower] = w;
        }
        m
    }
}

/// Minimal Λ system `{|0⟩, |e⟩, |1⟩}`.
///
/// The pump addresses `|0⟩ ↔ |e⟩` and the Stokes beam `|1⟩ ↔ |e⟩`; each leg has
/// a unit-norm weight vector whose sign pattern matches the clock-state legs of
/// the Yb model, so an `H` pump and a `V` Stokes beam both couple with unit
/// strength.
pub fn build_lambda_system(splitting: f64, intermediate_energy: f64) -> Result<LevelSystem> {
    if !(splitting > 0.0) || !splitting.is_finite() {
        return Err(Error::invalid(
            "splitting",
            format!("must be positive and finite, got {splitting}"),
        ));
    }
    if !intermediate_energy.is_finite() {
        return Err(Error::invalid("intermediate_energy", "must be finite"));
    }
    let levels = vec![
        Level {
            label: "0".into(),
            energy: 0.0,
            manifold: Manifold::Lower0,
        },
        Level {
            label: "e".into(),
            energy: intermediate_energy,
            manifold: Manifold::Excited,
        },
        Level {
            label: "1".into(),
            energy: splitting,
            manifold: Manifold::Lower1,
        },
    ];
    let couplings = vec![
        DipoleCoupling {
            lower: 0,
            upper: 1,
            weights: [FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0],
            beams: BeamSelect::Pump,
        },
        DipoleCoupling {
            lower: 2,
            upper: 1,
            weights: [FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0],
            beams: BeamSelect::Stokes,
        },
    ];
    Ok(LevelSystem::new(levels, couplings, 0, 2, 1))
}

/// Λ system at the ¹⁷¹Yb⁺ clock splitting with the intermediate level at the
/// optical reference.
pub fn yb_lambda_system() -> LevelSystem {
    build_lambda_system(
        HYPERFINE_SPLITTING,
        std::f64::consts::TAU * OPTICAL_FREQUENCY_HZ,
    )
    .expect("reference parameters are valid")
}

/// Static magnetic field and Zeeman coefficients.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeemanConfig {
    /// Field magnitude, gauss.
    pub field_gauss: f64,
    /// ²S₁/₂ F = 1 linear coefficient, rad/s/G.
    pub s_linear: f64,
    /// ²P₁/₂ F' = 1 linear coefficient, rad/s/G.
    pub p_linear: f64,
    /// Clock-state quadratic coefficient, rad/s/G².
    pub quadratic: f64,
}

impl ZeemanConfig {
    pub fn new(field_gauss: f64) -> Self {
        ZeemanConfig {
            field_gauss,
            ..Default::default()
        }
    }

    pub fn s_shift(&self, m: i32) -> f64 {
        self.s_linear * f64::from(m) * self.field_gauss
    }

    pub fn p_shift(&self, m: i32) -> f64 {
        self.p_linear * f64::from(m) * self.field_gauss
    }

    /// Increase of the clock splitting.
    pub fn clock_shift(&self) -> f64 {
        self.quadratic * self.field_gauss * self.field_gauss
    }
}

impl Default for ZeemanConfig {
    fn default() -> Self {
        ZeemanConfig {
            field_gauss: 0.0,
            s_linear: ZEEMAN_S_LINEAR,
            p_linear: ZEEMAN_P_LINEAR,
            quadratic: ZEEMAN_QUADRATIC,
        }
    }
}

/// Eight-level ¹⁷¹Yb⁺ model.
///
/// Level order: `S(0,0)=|0⟩, S(1,−1), S(1,0)=|1⟩, S(1,+1), P(0,0), P(1,−1),
/// P(1,0), P(1,+1)`. The clock quadratic shift is carried entirely by `|1⟩` so
/// that `|0⟩` stays at zero. Both beams drive every allowed coupling.
pub fn build_yb171_system(zeeman: ZeemanConfig) -> Result<LevelSystem> {
    if !(zeeman.field_gauss >= 0.0) || !zeeman.field_gauss.is_finite() {
        return Err(Error::invalid(
            "field_gauss",
            format!(
                "must be non-negative and finite, got {}",
                zeeman.field_gauss
            ),
        ));
    }
    let optical = std::f64::consts::TAU * OPTICAL_FREQUENCY_HZ;
    let s = |f: u8, m: i32| format!("S(F={f},m={m:+})");
    let p = |f: u8, m: i32| format!("P(F'={f},m'={m:+})");
    let lvl = |label: String, energy: f64, manifold| Level {
        label,
        energy,
        manifold,
    };
    let levels = vec![
        lvl(s(0, 0), 0.0, Manifold::Lower0),
        lvl(
            s(1, -1),
            HYPERFINE_SPLITTING + zeeman.s_shift(-1),
            Manifold::Lower1,
        ),
        lvl(
            s(1, 0),
            HYPERFINE_SPLITTING + zeeman.clock_shift(),
            Manifold::Lower1,
        ),
        lvl(
            s(1, 1),
            HYPERFINE_SPLITTING + zeeman.s_shift(1),
            Manifold::Lower1,
        ),
        lvl(p(0, 0), optical, Manifold::Excited),
        lvl(
            p(1, -1),
            optical + P_HYPERFINE_SPLITTING + zeeman.p_shift(-1),
            Manifold::Excited,
        ),
        lvl(p(1, 0), optical + P_HYPERFINE_SPLITTING, Manifold::Excited),
        lvl(
            p(1, 1),
            optical + P_HYPERFINE_SPLITTING + zeeman.p_shift(1),
            Manifold::Excited,
        ),
    ];

    let w = FRAC_1_SQRT_2;
    // (lower, upper, q, weight) from the table in the module docs.
    let table: [(usize, usize, i32, f64); 12] = [
        (0, 5, -1, w),
        (0, 6, 0, w),
        (0, 7, 1, w),
        (1, 4, 1, -w),
        (1, 5, 0, -w),
        (1, 6, 1, -w),
        (2, 4, 0, w),
        (2, 5, -1, w),
        (2, 7, 1, -w),
        (3, 4, -1, -w),
        (3, 6, -1, w),
        (3, 7, 0, w),
    ];
    let couplings = table
        .iter()
        .map(|&(lower, upper, q, weight)| {
            let mut weights = [0.0; 3];
            let slot = match q {
                1 => Component::L,
                -1 => Component::R,
                _ => Component::Pi,
            };
            weights[slot as usize] = weight;
            DipoleCoupling {
                lower,
                upper,
                weights,
                beams: BeamSelect::Both,
            }
        })
        .collect();
    Ok(LevelSystem::new(levels, couplings, 0, 2, 6))
}

/// Direction of the Raman wave-vector difference along the trap axis.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KickDirection {
    Forward,
    Backward,
}

impl KickDirection {
    pub fn sign(self) -> f64 {
        match self {
            KickDirection::Forward => 1.0,
            KickDirection::Backward => -1.0,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            KickDirection::Forward => KickDirection::Backward,
            KickDirection::Backward => KickDirection::Forward,
        }
    }
}

/// Single-leg Rabi frequency for a beam of relative intensity `intensity`,
/// given the Rabi frequency at unit intensity (`Ω ∝ √I`).
pub fn rabi_from_intensity(intensity: f64, rabi_at_unit_intensity: f64) -> f64 {
    rabi_at_unit_intensity * intensity.max(0.0).sqrt()
}

/// Parameters of a far-detuned Raman drive.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RamanDrive {
    /// Pump-leg Rabi frequency, rad/s.
    pub rabi_1: f64,
    /// Stokes-leg Rabi frequency, rad/s.
    pub rabi_2: f64,
    /// Single-photon detuning Δ, rad/s.
    pub detuning: f64,
    /// Two-photon detuning δ, rad/s.
    pub two_photon_detuning: f64,
    /// Magnitude of the wave-vector difference, 1/m.
    pub wavevector_difference: f64,
    pub direction: KickDirection,
}

/// Two-level reduction of a Raman drive.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveRaman {
    /// Two-photon Rabi frequency `Ω₁Ω₂/(2Δ)`, rad/s.
    pub rabi: f64,
    /// Differential Stark shift `E(|1⟩) − E(|0⟩)` induced by the beams, rad/s.
    pub differential_stark: f64,
    /// Light shift common to both clock states, rad/s.
    pub common_stark: f64,
    pub detuning: f64,
    pub two_photon_detuning: f64,
    /// Signed wave-vector difference `z·|Δk|`, 1/m.
    pub wavevector: f64,
    pub direction: KickDirection,
}

/// Adiabatically eliminate the excited level of a far-detuned Raman drive.
///
/// Each beam also couples the other clock state, detuned by `∓ hyperfine`,
/// which produces the differential shift
/// `δ_A = −(Ω²/2)·ω_HF/(Δ² − ω_HF²)`; pass `hyperfine = 0` for an ideal Λ
/// system in which every beam addresses a single leg.
pub fn effective_raman(drive: &RamanDrive, hyperfine: f64) -> Result<EffectiveRaman> {
    let RamanDrive {
        rabi_1,
        rabi_2,
        detuning,
        ..
    } = *drive;
    if !(rabi_1 >= 0.0 && rabi_2 >= 0.0) {
        return Err(Error::invalid(
            "rabi",
            "Rabi frequencies must be non-negative",
        ));
    }
    let scale = rabi_1.abs().max(rabi_2.abs()).max(f64::MIN_POSITIVE);
    if (rabi_1 - rabi_2).abs() > 1e-12 * scale {
        return Err(Error::invalid(
            "rabi",
            format!("equal beam intensities required, got Ω₁ = {rabi_1:e}, Ω₂ = {rabi_2:e}"),
        ));
    }
    if detuning == 0.0 || !detuning.is_finite() {
        return Err(Error::invalid(
            "detuning",
            "adiabatic elimination needs a non-zero single-photon detuning; propagate the full level system instead",
        ));
    }
    if !(hyperfine >= 0.0) || detuning.abs() <= hyperfine {
        return Err(Error::invalid(
            "detuning",
            format!(
                "|Δ| = {:e} must exceed the hyperfine splitting {hyperfine:e}",
                detuning.abs()
            ),
        ));
    }
    let omega_sq = rabi_1 * rabi_2;
    let rabi = omega_sq / (2.0 * detuning);
    let cross = if hyperfine > 0.0 {
        -(omega_sq / 2.0) * hyperfine / (detuning * detuning - hyperfine * hyperfine)
    } else {
        0.0
    };
    let shift_0 = -rabi_1 * rabi_1 / (4.0 * detuning)
        - if hyperfine > 0.0 {
            rabi_2 * rabi_2 / (4.0 * (detuning + hyperfine))
        } else {
            0.0
        };
    let shift_1 = shift_0 + cross;
    Ok(EffectiveRaman {
        rabi,
        differential_stark: cross,
        common_stark: 0.5 * (shift_0 + shift_1),
        detuning,
        two_photon_detuning: drive.two_photon_detuning,
        wavevector: drive.direction.sign() * drive.wavevector_difference,
        direction: drive.direction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn lambda_system_layout() {
        let sys = build_lambda_system(TAU * 12.6428e9, TAU * 811e12).unwrap();
        assert_eq!(sys.labels(), vec!["0", "e", "1"]);
        assert_eq!(sys.energies()[0], 0.0);
        assert_eq!(sys.qubit_splitting(), TAU * 12.6428e9);
        for c in sys.couplings() {
            let norm: f64 = c.weights.iter().map(|w| w * w).sum();
            assert!((norm - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn lambda_rejects_degenerate_levels() {
        assert!(matches!(
            build_lambda_system(0.0, 1.0),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(build_lambda_system(-1.0, 1.0).is_err());
    }

    #[test]
    fn polarization_decomposition() {
        let (l, r) = decompose_polarization(Polarization::H);
        assert!((l.re - FRAC_1_SQRT_2).abs() < 1e-16 && (r.re - FRAC_1_SQRT_2).abs() < 1e-16);
        let (l, r) = decompose_polarization(Polarization::V);
        assert!((l.re - FRAC_1_SQRT_2).abs() < 1e-16 && (r.re + FRAC_1_SQRT_2).abs() < 1e-16);
        for pol in [Polarization::H, Polarization::V] {
            let (l, r) = decompose_polarization(pol);
            assert!((l.norm_sqr() + r.norm_sqr() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn yb_zero_field_degeneracy() {
        let sys = build_yb171_system(ZeemanConfig::new(0.0)).unwrap();
        let e = sys.energies();
        assert_eq!(e[0], 0.0);
        assert_eq!(e[1], e[2]);
        assert_eq!(e[2], e[3]);
        assert_eq!(e[5], e[6]);
        assert_eq!(e[6], e[7]);
        assert!((e[2] - TAU * 12.6428e9).abs() < 1e-3);
        assert!((e[6] - e[4] - TAU * 2105e6).abs() < 4.0);
    }

    #[test]
    fn yb_zeeman_shifts() {
        let zero = build_yb171_system(ZeemanConfig::new(0.0))
            .unwrap()
            .energies();
        let one = build_yb171_system(ZeemanConfig::new(1.0))
            .unwrap()
            .energies();
        assert!((one[3] - zero[3] - TAU * 1.4e6).abs() < 1e-3);
        assert!((one[1] - zero[1] + TAU * 1.4e6).abs() < 1e-3);
        assert!((one[2] - zero[2] - TAU * 310.8).abs() < 1e-3);
        assert!((one[7] - zero[7] - TAU * 0.47e6).abs() < 4.0);
        // clock shift is purely quadratic
        let two = build_yb171_system(ZeemanConfig::new(2.0))
            .unwrap()
            .energies();
        assert!((two[2] - zero[2] - 4.0 * (one[2] - zero[2])).abs() < 1e-6);
    }

    #[test]
    fn yb_rejects_negative_field() {
        assert!(build_yb171_system(ZeemanConfig::new(-1.0)).is_err());
    }

    #[test]
    fn coupling_matrices_are_symmetric() {
        for sys in [
            yb_lambda_system(),
            build_yb171_system(ZeemanConfig::new(3.0)).unwrap(),
        ] {
            for comp in [Component::L, Component::R, Component::Pi] {
                let m = sys.coupling_matrix(comp);
                for (i, row) in m.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        assert_eq!(*v, m[j][i]);
                    }
                }
            }
        }
    }

    #[test]
    fn clock_states_share_a_bright_state_under_lin_perp_lin() {
        // H pump on |0⟩ and V Stokes on |1⟩ project onto the same P(1,±1) combination.
        let sys = build_yb171_system(ZeemanConfig::default()).unwrap();
        let proj = |lower: usize, pol| {
            let p = polarization_vector(pol);
            let mut out = [C64::new(0.0, 0.0); 8];
            for c in sys.couplings().iter().filter(|c| c.lower == lower) {
                let amp: C64 = (0..3).map(|q| p[q] * c.weights[q]).sum();
                out[c.upper] = amp;
            }
            out
        };
        let a = proj(0, Polarization::H);
        let b = proj(2, Polarization::V);
        assert!((a[5] - a[7]).norm() < 1e-15);
        assert!((b[5] - b[7]).norm() < 1e-15);
        assert!(a[5].norm() > 0.4 && b[5].norm() > 0.4);
        assert!(b[4].norm() < 1e-15 && a[6].norm() < 1e-15);
    }

    fn drive(rabi: f64, detuning: f64) -> RamanDrive {
        RamanDrive {
            rabi_1: rabi,
            rabi_2: rabi,
            detuning,
            two_photon_detuning: 0.0,
            wavevector_difference: 2.0 * TAU / 369.5e-9,
            direction: KickDirection::Forward,
        }
    }

    #[test]
    fn effective_raman_scaling() {
        let unit = TAU * 10e9;
        let d = TAU * 400e9;
        let base = effective_raman(&drive(rabi_from_intensity(1.0, unit), d), 0.0).unwrap();
        let doubled = effective_raman(&drive(rabi_from_intensity(2.0, unit), d), 0.0).unwrap();
        assert!((doubled.rabi / base.rabi - 2.0).abs() < 1e-12);
        let far = effective_raman(&drive(unit, 2.0 * d), 0.0).unwrap();
        assert!((far.rabi / base.rabi - 0.5).abs() < 1e-12);
        assert!((base.rabi - unit * unit / (2.0 * d)).abs() < 1e-3);
    }

    #[test]
    fn effective_raman_preconditions() {
        let mut d = drive(1e9, 1e12);
        d.rabi_2 = 2e9;
        assert!(effective_raman(&d, 0.0).is_err());
        assert!(effective_raman(&drive(1e9, 0.0), 0.0).is_err());
        assert!(effective_raman(&drive(1e9, 1e10), HYPERFINE_SPLITTING * 2.0).is_err());
    }

    #[test]
    fn differential_stark_vanishes_far_detuned() {
        let rabi = TAU * 20e9;
        let mut last = f64::INFINITY;
        for k in 1..6 {
            let d = TAU * 100e9 * f64::from(1 << k);
            // keep Ω_eff fixed by scaling Ω ∝ √Δ
            let r = rabi * (f64::from(1 << k)).sqrt();
            let e = effective_raman(&drive(r, d), HYPERFINE_SPLITTING).unwrap();
            let ratio = (e.differential_stark / e.rabi).abs();
            assert!(ratio < last);
            assert!((ratio * d / HYPERFINE_SPLITTING - 1.0).abs() < 0.02);
            last = ratio;
        }
    }

    #[test]
    fn direction_flips_wavevector() {
        let f = effective_raman(&drive(1e9, 1e12), 0.0).unwrap();
        let mut d = drive(1e9, 1e12);
        d.direction = KickDirection::Backward;
        let b = effective_raman(&d, 0.0).unwrap();
        assert_eq!(f.wavevector, -b.wavevector);
        assert_eq!(f.rabi, b.rabi);
    }
}
