use crate::error::{FlashError, Result};
use crate::info::GaussianMixtureModel;
use crate::math::std_normal_tail;

/// Default bracket for boundary searches, volts.
pub const SEARCH_RANGE: (f64, f64) = (-4.0, 12.0);
/// Default bisection tolerance, applied to both the bracket width (volts)
/// and the probability error.
pub const BOUNDARY_TOL: f64 = 1e-4;
pub const DEFAULT_BINS: usize = 9;

/// Mixture CDF through the upper-tail function, which keeps relative
/// precision where a component's mass is nearly exhausted.
pub fn mixture_cdf(model: &GaussianMixtureModel, y: f64) -> f64 {
    let tail: f64 = (0..4)
        .map(|l| 0.25 * std_normal_tail((y - model.means[l]) / model.sigmas[l]))
        .sum();
    1.0 - tail
}

/// Read voltages splitting the mixture into `n_bins` bins of equal predicted
/// probability. Boundaries are found left to right; each search starts at
/// the previous boundary.
pub fn equal_prob_boundaries(
    model: &GaussianMixtureModel,
    n_bins: usize,
    search_range: (f64, f64),
    tol: f64,
) -> Result<Vec<f64>> {
    if n_bins < 2 {
        return Err(FlashError::Argument(format!("need at least 2 bins, got {n_bins}")));
    }
    if !(tol > 0.0) || !(search_range.1 > search_range.0) {
        return Err(FlashError::Argument(format!(
            "bad search range {search_range:?} or tolerance {tol}"
        )));
    }
    let (lo0, hi0) = search_range;
    let mut out = Vec::with_capacity(n_bins - 1);
    let mut left = lo0;
    for i in 1..n_bins {
        let target = i as f64 / n_bins as f64;
        let (mut lo, mut hi) = (left, hi0);
        let (c_lo, c_hi) = (mixture_cdf(model, lo), mixture_cdf(model, hi));
        if c_lo > target + tol || c_hi < target - tol {
            return Err(FlashError::Bracketing(format!(
                "CDF over [{lo}, {hi}] is [{c_lo:.6}, {c_hi:.6}], target {target:.6}"
            )));
        }
        let mut mid = 0.5 * (lo + hi);
        loop {
            let c = mixture_cdf(model, mid);
            if ((c - target).abs() <= tol && hi - lo <= tol) || hi - lo <= 1e-13 {
                break;
            }
            if c < target {
                lo = mid;
            } else {
                hi = mid;
            }
            mid = 0.5 * (lo + hi);
        }
        out.push(mid);
        left = mid;
    }
    Ok(out)
}

/// Predicted probability of each bin `(-inf, b1], ..., (b_{N-1}, inf)`.
pub fn predict_bin_probs(model: &GaussianMixtureModel, boundaries: &[f64]) -> Vec<f64> {
    let n = boundaries.len() + 1;
    let mut p = vec![0.0; n];
    for l in 0..4 {
        let (m, s) = (model.means[l], model.sigmas[l]);
        // upper-tail differences are exact in both tails
        let mut prev = 1.0;
        for (i, pi) in p.iter_mut().enumerate() {
            let next = if i + 1 < n { std_normal_tail((boundaries[i] - m) / s) } else { 0.0 };
            *pi += 0.25 * (prev - next);
            prev = next;
        }
    }
    p
}

/// Every boundary multiplied by `alpha_new / alpha_prev`.
pub fn rescale_boundaries(boundaries: &[f64], alpha_new: f64, alpha_prev: f64) -> Result<Vec<f64>> {
    if !(alpha_prev > 0.0) {
        return Err(FlashError::Argument(format!("previous scale must be positive, got {alpha_prev}")));
    }
    let r = alpha_new / alpha_prev;
    Ok(boundaries.iter().map(|b| b * r).collect())
}

/// Drops repeated boundaries (after snapping to a coarse grid several can
/// land on the same voltage). Returns whether any were merged.
pub fn collapse_coincident(boundaries: &[f64]) -> (Vec<f64>, bool) {
    let mut out: Vec<f64> = Vec::with_capacity(boundaries.len());
    let mut merged = false;
    for &b in boundaries {
        match out.last() {
            Some(&last) if b <= last => merged = true,
            _ => out.push(b),
        }
    }
    (out, merged)
}
