//! Viscous shock profiles of the one-dimensional Brenner-Navier-Stokes-Fourier
//! system with temperature-dependent transport coefficients.
//!
//! The crate computes the end states of a weak shock, builds its monotone
//! traveling-wave profile by shooting, and measures the profile against the
//! small-amplitude estimates (tail law, derivative ratios, decay rates).

// negated comparisons below deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gas;
pub mod hugoniot;
pub mod integrate;
pub mod linalg;
pub mod profile_ode;
pub mod shooting;
pub mod slow_fast;
pub mod verify;

pub use error::{Error, Result};
pub use gas::{GasConstants, State, TransportModel};
pub use hugoniot::{Family, ShockData};
pub use profile_ode::{end_state_eigenstructure, PhaseField};
pub use shooting::{normalize_phase, reflect, shoot, Profile, ShootOptions};
pub use verify::{sweep, verify_profile, EstimateReport, SweepReport, SweepTemplate};
