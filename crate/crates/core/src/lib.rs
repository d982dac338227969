//! Certified secret-key-rate bounds for discretely modulated MDI-QKD.
//!
//! The central object is the Gram matrix of the eavesdropper's side
//! information, one block per conclusive Bell-state announcement. Every
//! constraint Alice and Bob can check (overlaps of the code states, pass
//! probabilities, bit-error rates) is linear in that Gram matrix, and so is
//! the phase-error rate of the virtual entanglement-based protocol. The worst
//! case phase-error rate is therefore a semidefinite program whose dual gives
//! a certified upper bound.
//!
//! Module map:
//! - [`states`]: code states, protocol families and the overlap matrix.
//! - [`sdp_model`]: assembly of the phase-error SDP.
//! - [`solver`]: dense primal-dual interior-point solver with dual certificates.
//! - [`channel`]: honest device simulation (detectors, loss, misalignment).
//! - [`decoy`]: decoy-state single-photon bounds by linear programming.
//! - [`coin`]: quantum-coin baseline.
//! - [`rates`]: key-rate formulas and grid optimisation.
//! - [`pipeline`]: end-to-end evaluation of one operating point.

pub mod channel;
pub mod coin;
pub mod decoy;
mod error;
pub mod linalg;
pub mod pipeline;
pub mod rates;
pub mod sdp_model;
pub mod solver;
pub mod states;

pub use error::{Error, Result};
