//! Desk-scale simulator and analysis library for the dynamics of
//! entanglement in open quantum systems.
//!
//! The crate builds canonical multiqubit (and two-mode Gaussian) states,
//! evolves them under parameterized noise channels, evaluates entanglement
//! measures and separability/distillability criteria, and reproduces
//! closed-form disentanglement laws, scaling bounds, and
//! bound-entanglement phenomena.
//!
//! Register convention: qubit 0 is the leftmost tensor factor, i.e. the
//! most significant bit of a computational-basis index.

pub mod channels;
pub mod criteria;
pub mod cvgauss;
pub mod dynamics;
pub mod error;
pub mod graphdyn;
pub mod measures;
pub mod qstate;
pub mod sdp;
pub mod states;

pub use error::{EntLabError, Result};
pub use qstate::{DensityMatrix, PartitionSpec, PureState};
