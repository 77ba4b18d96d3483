//! Band structures of shamrock-hole opto-mechanical crystals and the
//! scattering amplitudes of a Λ-system photon-to-phonon cascade.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bands;
pub mod cascade;
pub mod cli;
pub mod config;
pub mod defects;
pub mod error;
pub mod geometry;
pub mod numerics;
pub mod phononic;
pub mod photonic;
pub mod plot;
pub mod pwe;
pub mod symmetry;

pub use error::{Error, Result};
