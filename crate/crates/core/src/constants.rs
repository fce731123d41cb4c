//! Physical constants of the ¹⁷¹Yb⁺ system and the reference operating values
//! used throughout the crate. Frequencies are angular (rad/s) unless the name
//! ends in `_HZ`.

use std::f64::consts::TAU;

/// Ground-state hyperfine (clock) splitting, 2π × 12.6428 GHz.
pub const HYPERFINE_SPLITTING: f64 = TAU * 12.6428e9;

/// ²P₁/₂ hyperfine splitting, 2π × 2105 MHz.
pub const P_HYPERFINE_SPLITTING: f64 = TAU * 2105.0e6;

/// Linear Zeeman coefficient of the ²S₁/₂ F = 1 manifold, rad/s per gauss.
pub const ZEEMAN_S_LINEAR: f64 = TAU * 1.4e6;

/// Linear Zeeman coefficient of the ²P₁/₂ F' = 1 manifold, rad/s per gauss.
pub const ZEEMAN_P_LINEAR: f64 = TAU * 0.47e6;

/// Quadratic Zeeman coefficient of the clock transition, rad/s per gauss².
pub const ZEEMAN_QUADRATIC: f64 = TAU * 310.8;

/// ²S₁/₂ → ²P₁/₂ optical frequency (369.5 nm), Hz.
pub const OPTICAL_FREQUENCY_HZ: f64 = 811.291_5e12;

/// Seed laser frequency at 1108 nm, Hz.
pub const SEED_FREQUENCY_HZ: f64 = 299_792_458.0 / 1108.0e-9;

/// Single-flip window used for all SDK protocol analyses, seconds.
pub const REFERENCE_PULSE_DURATION: f64 = 1.0e-9;

/// Minimum number of pulse pairs in a fast gate.
pub const REFERENCE_PULSE_PAIRS: u32 = 10;

/// Lamb–Dicke parameter of the reference two-ion crystal.
pub const REFERENCE_LAMB_DICKE: f64 = 0.3;

/// Centre-of-mass trap frequency of the reference crystal, 2π × 1 MHz.
pub const REFERENCE_TRAP_FREQUENCY: f64 = TAU * 1.0e6;
