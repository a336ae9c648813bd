//! Cell-to-cell coupling between a victim cell and the neighbours programmed
//! after it.
//!
//! Positions follow the usual even/odd layout: `a`, `b`, `c` sit on the next
//! wordline (upper-left, directly above, upper-right); `d` and `e` are the
//! left and right neighbours on the same wordline and only disturb cells of
//! the parity that is programmed first.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::channel::{C2cParams, ChannelParams, Parity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WriteOrder {
    EvenFirst,
    OddFirst,
}

impl WriteOrder {
    pub fn first(self) -> Parity {
        match self {
            WriteOrder::EvenFirst => Parity::Even,
            WriteOrder::OddFirst => Parity::Odd,
        }
    }

    pub fn role_of(self, parity: Parity) -> WriteRole {
        if parity == self.first() {
            WriteRole::First
        } else {
            WriteRole::Second
        }
    }

    pub fn swapped(self) -> WriteOrder {
        match self {
            WriteOrder::EvenFirst => WriteOrder::OddFirst,
            WriteOrder::OddFirst => WriteOrder::EvenFirst,
        }
    }

    /// Order used in the `block`-th block of an alternating schedule that
    /// starts with even cells first.
    pub fn alternating(block: u64) -> WriteOrder {
        if block % 2 == 0 {
            WriteOrder::EvenFirst
        } else {
            WriteOrder::OddFirst
        }
    }
}

/// Whether a parity is programmed before or after its same-wordline
/// neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WriteRole {
    First,
    Second,
}

/// Voltage increases of the interfering neighbours; absent neighbours are 0.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NeighborIncreases {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

/// Draws one coupling ratio: Gaussian around `mean` with standard deviation
/// `std_factor * mean`, redrawn until it lands within `width_factor * mean`
/// of the mean and is non-negative.
pub fn sample_coupling<R: Rng + ?Sized>(mean: f64, c2c: &C2cParams, rng: &mut R) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    let sd = c2c.std_factor * mean;
    let half_width = c2c.width_factor * mean;
    if sd == 0.0 || half_width == 0.0 {
        return mean;
    }
    loop {
        let z: f64 = rng.sample(StandardNormal);
        let g = mean + sd * z;
        if (g - mean).abs() <= half_width && g >= 0.0 {
            return g;
        }
    }
}

/// Interference-induced voltage lift of a victim cell.
pub fn c2c_disturbance<R: Rng + ?Sized>(
    params: &ChannelParams,
    role: WriteRole,
    inc: &NeighborIncreases,
    rng: &mut R,
) -> f64 {
    if !params.c2c_active() {
        return 0.0;
    }
    let c = &params.c2c;
    let ga = sample_coupling(c.mean_xy(), c, rng);
    let gb = sample_coupling(c.mean_y(), c, rng);
    let gc = sample_coupling(c.mean_xy(), c, rng);
    let mut v = ga * inc.a + gb * inc.b + gc * inc.c;
    if role == WriteRole::First {
        let gd = sample_coupling(c.mean_x(), c, rng);
        let ge = sample_coupling(c.mean_x(), c, rng);
        v += gd * inc.d + ge * inc.e;
    }
    v
}
