use serde::{Deserialize, Serialize};

use crate::error::{FlashError, Result};

/// Equally spaced set of settable voltages, endpoints inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantGrid {
    pub lo: f64,
    pub hi: f64,
    pub n_levels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantMode {
    /// Closest grid point; exact ties go to the higher point.
    Nearest,
    /// Smallest grid point not below the value.
    Ceil,
}

impl QuantGrid {
    pub fn new(lo: f64, hi: f64, n_levels: usize) -> Result<Self> {
        if !(lo < hi) || n_levels < 2 {
            return Err(FlashError::Argument(format!(
                "quantization grid needs lo < hi and at least 2 levels, got [{lo}, {hi}] x {n_levels}"
            )));
        }
        Ok(QuantGrid { lo, hi, n_levels })
    }

    /// Read/write voltage grid spanning -1 V .. 8 V.
    pub fn standard(n_levels: usize) -> Result<Self> {
        Self::new(-1.0, 8.0, n_levels)
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.n_levels - 1) as f64
    }

    pub fn point(&self, index: usize) -> f64 {
        self.lo + index as f64 * self.spacing()
    }

    pub fn index_of(&self, value: f64, mode: QuantMode) -> usize {
        let pos = (value - self.lo) / self.spacing();
        let idx = match mode {
            QuantMode::Nearest => (pos + 0.5).floor(),
            // absorb rounding noise so grid points map to themselves
            QuantMode::Ceil => (pos - 1e-9).ceil(),
        };
        idx.clamp(0.0, (self.n_levels - 1) as f64) as usize
    }

    pub fn snap(&self, value: f64, mode: QuantMode) -> f64 {
        self.point(self.index_of(value, mode))
    }

    pub fn quantize(&self, values: &[f64], mode: QuantMode) -> Vec<f64> {
        values.iter().map(|&v| self.snap(v, mode)).collect()
    }
}
