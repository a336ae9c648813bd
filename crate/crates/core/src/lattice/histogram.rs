use serde::{Deserialize, Serialize};

use crate::channel::ParityTag;
use crate::error::{FlashError, Result};

/// Cell counts between consecutive read voltages. With `N - 1` boundaries
/// the bins are `(-inf, b1], (b1, b2], ..., (b_{N-1}, inf)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoltageHistogram {
    pub boundaries: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
    pub parity: ParityTag,
}

pub(crate) fn check_boundaries(boundaries: &[f64]) -> Result<()> {
    if boundaries.iter().any(|b| b.is_nan()) || !boundaries.windows(2).all(|w| w[0] < w[1]) {
        return Err(FlashError::Argument(format!(
            "read boundaries must be strictly increasing: {boundaries:?}"
        )));
    }
    Ok(())
}

impl VoltageHistogram {
    pub fn new(boundaries: Vec<f64>, counts: Vec<u64>, parity: ParityTag) -> Result<Self> {
        check_boundaries(&boundaries)?;
        if counts.len() != boundaries.len() + 1 {
            return Err(FlashError::Argument(format!(
                "{} boundaries need {} counts, got {}",
                boundaries.len(),
                boundaries.len() + 1,
                counts.len()
            )));
        }
        let total = counts.iter().sum();
        Ok(VoltageHistogram {
            boundaries,
            counts,
            total,
            parity,
        })
    }

    pub fn from_samples<I>(samples: I, boundaries: &[f64], parity: ParityTag) -> Result<Self>
    where
        I: IntoIterator<Item = f64>,
    {
        check_boundaries(boundaries)?;
        let mut counts = vec![0u64; boundaries.len() + 1];
        for v in samples {
            counts[bin_of(boundaries, v)] += 1;
        }
        Self::new(boundaries.to_vec(), counts, parity)
    }

    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let t = self.total.max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / t).collect()
    }
}

#[inline]
pub(crate) fn bin_of(boundaries: &[f64], v: f64) -> usize {
    boundaries.partition_point(|&b| b < v)
}
