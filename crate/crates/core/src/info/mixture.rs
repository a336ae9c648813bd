use serde::{Deserialize, Serialize};

use crate::error::{FlashError, Result};
use crate::math::{std_normal_cdf, std_normal_pdf};

/// Equal-prior mixture of four Gaussians, one per stored level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixtureModel {
    pub means: [f64; 4],
    pub sigmas: [f64; 4],
}

pub const LEVEL_PRIOR: f64 = 0.25;

impl GaussianMixtureModel {
    pub fn new(means: [f64; 4], sigmas: [f64; 4]) -> Result<Self> {
        let m = GaussianMixtureModel { means, sigmas };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.means.iter().any(|m| !m.is_finite()) {
            return Err(FlashError::Argument(format!("mixture means must be finite: {:?}", self.means)));
        }
        if self.sigmas.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(FlashError::Argument(format!(
                "mixture sigmas must be positive: {:?}",
                self.sigmas
            )));
        }
        Ok(())
    }

    /// Components at `alpha * levels` sharing the given spreads.
    pub fn scaled_levels(alpha: f64, levels: &[f64; 4], sigmas: [f64; 4]) -> Self {
        GaussianMixtureModel {
            means: levels.map(|v| alpha * v),
            sigmas,
        }
    }

    pub fn pdf(&self, y: f64) -> f64 {
        (0..4)
            .map(|l| LEVEL_PRIOR * std_normal_pdf((y - self.means[l]) / self.sigmas[l]) / self.sigmas[l])
            .sum()
    }

    pub fn cdf(&self, y: f64) -> f64 {
        (0..4)
            .map(|l| LEVEL_PRIOR * std_normal_cdf((y - self.means[l]) / self.sigmas[l]))
            .sum()
    }

    /// Means with their sigmas reordered by increasing mean. Returns whether
    /// any component moved.
    pub fn sorted(&self) -> (Self, bool) {
        let mut idx = [0usize, 1, 2, 3];
        idx.sort_by(|&a, &b| self.means[a].total_cmp(&self.means[b]));
        let moved = idx != [0, 1, 2, 3];
        (
            GaussianMixtureModel {
                means: idx.map(|i| self.means[i]),
                sigmas: idx.map(|i| self.sigmas[i]),
            },
            moved,
        )
    }

    /// Same spreads with means multiplied by `ratio`.
    pub fn rescale_means(&self, ratio: f64) -> Self {
        GaussianMixtureModel {
            means: self.means.map(|m| m * ratio),
            sigmas: self.sigmas,
        }
    }
}
