//! Write-side scale-factor search, read-side boundary placement and the
//! voltage grid both sides are restricted to.

mod allocation;
mod dta;
mod dva;
mod quant;

pub use allocation::VoltageAllocation;
pub use dta::{dta_boundaries, fixed_read_boundaries};
pub use dva::{dva_scale_factor, joint_dva, DvaConfig, DvaOutcome, MiEvaluator, Saturation};
pub use quant::{QuantGrid, QuantMode};
