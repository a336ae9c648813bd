use serde::{Deserialize, Serialize};

use super::quant::{QuantGrid, QuantMode};
use crate::error::{FlashError, Result};

/// Write-side voltage allocation: a scale factor applied to the default
/// intended levels, optionally snapped to a hardware voltage grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoltageAllocation {
    pub alpha: f64,
    pub thresholds: [f64; 4],
    pub quantized: bool,
}

impl VoltageAllocation {
    pub fn scaled(alpha: f64, base: &[f64; 4]) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(FlashError::Argument(format!("scale factor must lie in (0, 1], got {alpha}")));
        }
        let thresholds = base.map(|v| alpha * v);
        check_increasing(&thresholds)?;
        Ok(VoltageAllocation {
            alpha,
            thresholds,
            quantized: false,
        })
    }

    /// Scaled levels rounded up onto `grid`, so each level sits at or above
    /// its unquantized position.
    pub fn quantized(alpha: f64, base: &[f64; 4], grid: &QuantGrid) -> Result<Self> {
        let exact = Self::scaled(alpha, base)?;
        let snapped = grid.quantize(&exact.thresholds, QuantMode::Ceil);
        let thresholds = [snapped[0], snapped[1], snapped[2], snapped[3]];
        check_increasing(&thresholds)?;
        Ok(VoltageAllocation {
            alpha,
            thresholds,
            quantized: true,
        })
    }

    pub fn new(alpha: f64, base: &[f64; 4], grid: Option<&QuantGrid>) -> Result<Self> {
        match grid {
            Some(g) => Self::quantized(alpha, base, g),
            None => Self::scaled(alpha, base),
        }
    }

    pub fn erased_level(&self) -> f64 {
        self.thresholds[0]
    }

    /// Mean programmed-minus-erased voltage of one uniformly random write.
    pub fn mean_increment(&self) -> f64 {
        self.thresholds.iter().map(|t| t - self.thresholds[0]).sum::<f64>() / 4.0
    }
}

fn check_increasing(t: &[f64; 4]) -> Result<()> {
    if t.windows(2).all(|w| w[0] < w[1]) {
        Ok(())
    } else {
        Err(FlashError::Argument(format!("thresholds must be strictly increasing: {t:?}")))
    }
}
