//! Biphoton Wigner functions and the modified Hong-Ou-Mandel interferometer.
//!
//! A momentum displacement `μ` on one photon and a position displacement
//! `2δ` on the other turn the coincidence probability of a Hong-Ou-Mandel
//! interferometer into a direct readout of a Wigner function,
//! `I(μ,δ) = 1/2 − (π/2) W(μ,δ)`. This crate computes both sides of that
//! relation for down-conversion sources and scans phase space for
//! violations of the separability bound `I ≤ 1/2`.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod chirp;
pub mod cli;
pub mod error;
pub mod export;
pub mod hom;
pub mod lattice;
pub mod scenarios;
pub mod search;
pub mod states;
pub mod wigner;

pub use chirp::ChirpPlan;
pub use error::{Error, Result};
