//! Mixture estimation from histograms of read voltages.

mod boundaries;
mod lm;
mod retry;

pub use boundaries::{
    collapse_coincident, equal_prob_boundaries, mixture_cdf, predict_bin_probs,
    rescale_boundaries, BOUNDARY_TOL, DEFAULT_BINS, SEARCH_RANGE,
};
pub use lm::{lm_fit, lm_fit_with, FitReport, FitStatus, LmOptions, MAX_LM_ITERATIONS, SIGMA_FLOOR};
pub use retry::{occupancy_ok, EmpiricalCdf, MAX_REREADS, OCCUPANCY_TOL};

/// Starting mixture for the first fit of a run: components at the written
/// levels with a wide erased state.
pub fn prior_model(thresholds: &[f64; 4]) -> crate::info::GaussianMixtureModel {
    crate::info::GaussianMixtureModel {
        means: *thresholds,
        sigmas: [0.4, 0.1, 0.1, 0.1],
    }
}
