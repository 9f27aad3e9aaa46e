//! Shock synthesis under a shock response spectrum (SRS) specification.
//!
//! A reference shock is passed through a bank of net zero displacement
//! filters (NZDF), the filtered columns are normalized into a basis, and a
//! particle swarm searches for the coefficient vector whose linear
//! combination meets the SRS target. Every column has a double zero at DC,
//! so any combination integrates to zero velocity and zero displacement.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the CLI and
//! everything touching the filesystem live in the `shocksynth` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod filterbank;
pub mod nzdf;
pub mod pso;
pub mod signal;
pub mod srs;
pub mod synthesis;

pub use error::{Error, Result};
pub use filterbank::{build_basis, four_coordinate_check, make_layout, BankLayout, BasisMatrix};
pub use nzdf::{
    apply_filter, beta_to_q, discretize, gammatone_impulse, group_delay, impulse_response, nzdf_gain, q_to_beta,
    validate_order, DigitalNzdf, GammatoneParams, NzdfParams,
};
pub use pso::{pso_minimize, pso_minimize_batch, PsoConfig, PsoOutcome};
pub use signal::{integrate, motion_of, residual_motion, synth_reference, MotionTriple, ResidualReport, Signal};
pub use srs::{db_error, spec_interpolate, srs, srs_oracle, DbErrorReport, SrsCurve, SrsSpec};
pub use synthesis::{objective, synthesize, verify, SynthesisResult};
