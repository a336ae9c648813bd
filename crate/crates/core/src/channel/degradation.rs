//! Wear state and the laws mapping it to noise parameters.

use serde::{Deserialize, Serialize};

use super::params::ChannelParams;
use crate::error::{FlashError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub const ALL: [Parity; 2] = [Parity::Even, Parity::Odd];

    pub fn index(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    pub fn other(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn of_column(column: usize) -> Parity {
        if column % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParityTag {
    Even,
    Odd,
    Combined,
}

impl From<Parity> for ParityTag {
    fn from(p: Parity) -> Self {
        match p {
            Parity::Even => ParityTag::Even,
            Parity::Odd => ParityTag::Odd,
        }
    }
}

/// Dynamic wear of one cell population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelState {
    /// Accumulated programmed-minus-erased voltage, volts.
    pub v_acc: f64,
    pub pe_count: u64,
    pub parity: ParityTag,
}

impl ChannelState {
    pub fn fresh(parity: ParityTag) -> Self {
        ChannelState {
            v_acc: 0.0,
            pe_count: 0,
            parity,
        }
    }
}

/// Slope of the one-sided exponential wear-out noise:
/// `C_w + A_w * (v_acc / V_max)^k_i`.
pub fn wearout_lambda(params: &ChannelParams, v_acc: f64) -> Result<f64> {
    if !(v_acc >= 0.0) {
        return Err(FlashError::Domain(format!("accumulated voltage must be >= 0, got {v_acc}")));
    }
    Ok(params.c_w + params.a_w * (v_acc / params.v_max).powf(params.k_i))
}

/// Total trap density term shared by the retention mean and variance.
pub fn trap_density(params: &ChannelParams, v_acc: f64) -> Result<f64> {
    if !(v_acc >= 0.0) {
        return Err(FlashError::Domain(format!("accumulated voltage must be >= 0, got {v_acc}")));
    }
    let r = v_acc / params.v_max;
    Ok(params.a_r * r.powf(params.k_i) + params.b_r * r.powf(params.k_o))
}

/// Mean and variance of the Gaussian retention shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetentionStats {
    pub mean: f64,
    pub variance: f64,
}

fn retention_from_parts(trap: f64, log_time: f64, v: f64, v0: f64) -> Result<RetentionStats> {
    let dv = v - v0;
    if dv < 0.0 {
        return Err(FlashError::Domain(format!(
            "retention law needs V >= V0, got V={v} V0={v0}"
        )));
    }
    Ok(RetentionStats {
        mean: -dv * log_time * trap,
        variance: 0.1 * dv * log_time * trap * trap,
    })
}

/// Retention shift of a cell holding voltage `v` after `t` hours, where `v0`
/// is the erased-state threshold of the allocation that wrote it.
pub fn retention_stats(
    params: &ChannelParams,
    v_acc: f64,
    t: f64,
    v: f64,
    v0: f64,
) -> Result<RetentionStats> {
    if !(t >= 0.0) {
        return Err(FlashError::Domain(format!("retention time must be >= 0, got {t}")));
    }
    let trap = trap_density(params, v_acc)?;
    retention_from_parts(trap, (t / params.t0).ln_1p(), v, v0)
}

/// Row-stochastic matrix of written level given intended level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeMatrix(pub [[f64; 4]; 4]);

impl PeMatrix {
    pub fn identity() -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        PeMatrix(m)
    }

    pub fn row(&self, from: usize) -> &[f64; 4] {
        &self.0[from]
    }

    /// Maps a uniform draw `u` in [0, 1) to a written level. The intended
    /// level occupies the start of the interval so that a given `u` keeps
    /// its outcome when error rates are small.
    pub fn sample(&self, from: usize, u: f64) -> usize {
        let row = &self.0[from];
        let mut acc = row[from];
        if u < acc {
            return from;
        }
        for (to, &p) in row.iter().enumerate() {
            if to == from {
                continue;
            }
            acc += p;
            if u < acc {
                return to;
            }
        }
        from
    }
}

/// Programming-error transition matrix at a given P/E count.
pub fn prog_error_pmf(params: &ChannelParams, pe_count: u64) -> Result<PeMatrix> {
    let x = pe_count as f64 / params.pe_norm;
    let mut m = [[0.0; 4]; 4];
    for c in &params.pe_coeffs {
        m[c.from][c.to] = (c.c1 * x + c.c0).exp();
    }
    for (i, row) in m.iter_mut().enumerate() {
        let off: f64 = row.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, p)| p).sum();
        let diag = 1.0 - off;
        if diag < 0.0 {
            return Err(FlashError::ModelRange(format!(
                "programming-error row {i} exceeds probability 1 at pe_count={pe_count}"
            )));
        }
        row[i] = diag;
    }
    Ok(PeMatrix(m))
}

/// Noise parameters of one cell population at its current wear state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegradedNoiseParams {
    /// Wear-out exponential mean; zero when wear-out is switched off.
    pub lambda_w: f64,
    pub trap_density: f64,
    /// `ln(1 + t/t0)`, zero when retention is switched off.
    pub log_time: f64,
    pub pe_pmf: PeMatrix,
}

impl DegradedNoiseParams {
    pub fn at(params: &ChannelParams, state: &ChannelState) -> Result<Self> {
        let lambda_w = if params.components.wearout {
            wearout_lambda(params, state.v_acc)?
        } else {
            0.0
        };
        let log_time = if params.components.retention {
            (params.retention_t / params.t0).ln_1p()
        } else {
            0.0
        };
        let pe_pmf = if params.pe_active() {
            prog_error_pmf(params, state.pe_count)?
        } else {
            PeMatrix::identity()
        };
        Ok(DegradedNoiseParams {
            lambda_w,
            trap_density: trap_density(params, state.v_acc)?,
            log_time,
            pe_pmf,
        })
    }

    pub fn retention(&self, v: f64, v0: f64) -> Result<RetentionStats> {
        retention_from_parts(self.trap_density, self.log_time, v, v0)
    }

    pub fn mu_r(&self, v: f64, v0: f64) -> Result<f64> {
        Ok(self.retention(v, v0)?.mean)
    }

    pub fn sigma_r2(&self, v: f64, v0: f64) -> Result<f64> {
        Ok(self.retention(v, v0)?.variance)
    }
}
