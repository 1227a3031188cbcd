//! Secure degrees of freedom of the blind MIMOME wiretap channel with delayed
//! CSIT from the legitimate receiver only.
//!
//! The crate computes the secure DoF exactly ([`sdof`]), builds and runs the
//! single-slot and two-phase artificial-noise schemes ([`scheme`],
//! [`receiver`]), and checks the converse through linear-rank analogues and
//! an aligned-image-set enumerator ([`converse`]). [`experiment`] ties these
//! into seeded, reproducible runs.

pub mod converse;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod model;
pub mod receiver;
pub mod scheme;
pub mod sdof;

pub use error::{Error, Result};
pub use model::AntennaConfig;
