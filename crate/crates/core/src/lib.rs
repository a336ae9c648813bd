//! Simulator of a 2-bit MLC flash read channel under wear, retention and
//! cell-to-cell interference, together with the controllers that scale the
//! write voltages (to hold mutual information at a setpoint) and place read
//! thresholds.

pub mod channel;
pub mod controller;
pub mod error;
pub mod estimation;
pub mod harness;
pub mod info;
pub mod lattice;
pub mod math;

pub use error::{FlashError, Result};
