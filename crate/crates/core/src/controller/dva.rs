use serde::{Deserialize, Serialize};

use crate::error::{FlashError, Result};

/// How candidate allocations are scored during the scale-factor search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MiEvaluator {
    /// Grid mutual information of the true convolved densities.
    IdealGrid,
    /// Quadrature mutual information of the fitted Gaussian mixture.
    GaussianGh,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DvaConfig {
    /// Information rate the code needs, bits per cell.
    pub target_mi: f64,
    /// Headroom added on top of the target when choosing the scale factor.
    pub margin_mi: f64,
    /// P/E cycles between controller updates.
    pub cadence: u64,
    pub alpha_min: f64,
    /// Width of the final scale-factor bracket.
    pub epsilon: f64,
    pub evaluator: MiEvaluator,
}

impl Default for DvaConfig {
    fn default() -> Self {
        DvaConfig {
            target_mi: 1.945,
            margin_mi: 0.02,
            cadence: 100,
            alpha_min: 0.0,
            epsilon: 1e-4,
            evaluator: MiEvaluator::IdealGrid,
        }
    }
}

impl DvaConfig {
    pub fn setpoint(&self) -> f64 {
        self.target_mi + self.margin_mi
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(FlashError::Config(m));
        if !(self.target_mi > 0.0 && self.target_mi <= 2.0) {
            return bad(format!("target_mi must lie in (0, 2], got {}", self.target_mi));
        }
        if !(self.margin_mi >= 0.0) || self.setpoint() > 2.0 {
            return bad(format!(
                "margin_mi must be >= 0 with target + margin <= 2, got {}",
                self.margin_mi
            ));
        }
        if self.cadence == 0 {
            return bad("cadence must be at least 1".into());
        }
        if !(self.alpha_min >= 0.0 && self.alpha_min < 1.0) {
            return bad(format!("alpha_min must lie in [0, 1), got {}", self.alpha_min));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return bad(format!("epsilon must lie in (0, 0.5), got {}", self.epsilon));
        }
        Ok(())
    }
}

/// Which end of the search range, if any, the result is pinned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Saturation {
    None,
    /// Even the lowest allowed scale meets the setpoint.
    Lower,
    /// Full scale cannot reach the setpoint.
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DvaOutcome {
    pub alpha: f64,
    pub saturation: Saturation,
    /// Evaluator value at `alpha`, when it was evaluated there.
    pub mi: Option<f64>,
    pub evaluations: usize,
}

impl DvaOutcome {
    pub fn saturated(&self) -> bool {
        self.saturation == Saturation::Upper
    }
}

/// Smallest scale factor in `[alpha_min, 1]` whose mutual information reaches
/// the setpoint, by bisection. A zero lower bound is never evaluated: with
/// every level at 0 V the channel carries no information.
pub fn dva_scale_factor<F>(mut mi_of_alpha: F, config: &DvaConfig) -> Result<DvaOutcome>
where
    F: FnMut(f64) -> Result<f64>,
{
    let setpoint = config.setpoint();
    let mut evaluations = 1;
    let top = mi_of_alpha(1.0)?;
    if top < setpoint {
        return Ok(DvaOutcome {
            alpha: 1.0,
            saturation: Saturation::Upper,
            mi: Some(top),
            evaluations,
        });
    }
    let mut lo = config.alpha_min;
    if lo > 0.0 {
        evaluations += 1;
        let bottom = mi_of_alpha(lo)?;
        if bottom >= setpoint {
            return Ok(DvaOutcome {
                alpha: lo,
                saturation: Saturation::Lower,
                mi: Some(bottom),
                evaluations,
            });
        }
    }
    let (mut hi, mut hi_mi) = (1.0, top);
    while hi - lo > config.epsilon {
        let mid = 0.5 * (lo + hi);
        evaluations += 1;
        let m = mi_of_alpha(mid)?;
        if m >= setpoint {
            hi = mid;
            hi_mi = m;
        } else {
            lo = mid;
        }
    }
    Ok(DvaOutcome {
        alpha: hi,
        saturation: Saturation::None,
        mi: Some(hi_mi),
        evaluations,
    })
}

/// Independent searches for the two parities.
pub fn joint_dva<E, O>(even_eval: E, odd_eval: O, config: &DvaConfig) -> Result<(DvaOutcome, DvaOutcome)>
where
    E: FnMut(f64) -> Result<f64>,
    O: FnMut(f64) -> Result<f64>,
{
    Ok((dva_scale_factor(even_eval, config)?, dva_scale_factor(odd_eval, config)?))
}
