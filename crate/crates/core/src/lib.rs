//! Simulation and optimisation of ultrafast trapped-ion entangling gates built
//! from spin-dependent kicks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod fastgate;
pub mod fock;
pub mod levels;
pub mod output;
pub mod pulses;
pub mod sdk;
pub mod waveform;

pub use error::{Error, Result};
