use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use super::boundaries::predict_bin_probs;
use crate::error::{FlashError, Result};
use crate::info::GaussianMixtureModel;
use crate::lattice::VoltageHistogram;
use crate::math::std_normal_pdf;

type Vec8 = SVector<f64, 8>;
type Mat8 = SMatrix<f64, 8, 8>;

pub const MAX_LM_ITERATIONS: usize = 100;
pub const SIGMA_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Converged,
    MaxIter,
    /// No damping level produced a better fit.
    Stalled,
    /// Fewer than two occupied bins; the initial model is returned.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmOptions {
    pub max_iterations: usize,
    pub initial_damping: f64,
    pub step_tol: f64,
    pub improvement_tol: f64,
    pub sigma_floor: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iterations: MAX_LM_ITERATIONS,
            initial_damping: 1e-3,
            step_tol: 1e-8,
            improvement_tol: 1e-12,
            sigma_floor: SIGMA_FLOOR,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: GaussianMixtureModel,
    pub iterations: usize,
    /// Sum of squared differences between observed and predicted bin
    /// frequencies.
    pub residual: f64,
    pub status: FitStatus,
    /// Components had to be reordered after fitting.
    pub reordered: bool,
}

/// Fits the eight mixture parameters to a histogram by Levenberg-Marquardt.
pub fn lm_fit(histogram: &VoltageHistogram, init: &GaussianMixtureModel) -> Result<FitReport> {
    lm_fit_with(histogram, init, &LmOptions::default())
}

pub fn lm_fit_with(
    histogram: &VoltageHistogram,
    init: &GaussianMixtureModel,
    opts: &LmOptions,
) -> Result<FitReport> {
    if histogram.total == 0 {
        return Err(FlashError::Argument("histogram is empty".into()));
    }
    init.validate()?;
    let freq = histogram.frequencies();
    let b = &histogram.boundaries;
    let sse = |m: &GaussianMixtureModel| -> f64 {
        predict_bin_probs(m, b).iter().zip(&freq).map(|(p, f)| (f - p).powi(2)).sum()
    };
    if histogram.counts.iter().filter(|&&c| c > 0).count() < 2 {
        return Ok(FitReport {
            model: *init,
            iterations: 0,
            residual: sse(init),
            status: FitStatus::Degenerate,
            reordered: false,
        });
    }

    let mut model = *init;
    let mut cost = sse(&model);
    let mut damping = opts.initial_damping;
    let mut iterations = 0;
    let mut status = FitStatus::MaxIter;
    while iterations < opts.max_iterations {
        let (jtj, jtr) = normal_equations(&model, b, &freq);
        if jtr.amax() < 1e-300 {
            status = FitStatus::Converged;
            break;
        }
        iterations += 1;
        let floor = 1e-12 * jtj.diagonal().max().max(1e-300);
        let mut a = jtj;
        for k in 0..8 {
            a[(k, k)] += damping * jtj[(k, k)].max(floor);
        }
        let Some(step) = a.lu().solve(&jtr) else {
            damping *= 10.0;
            continue;
        };
        let trial = apply(&model, &step, opts.sigma_floor);
        let trial_cost = sse(&trial);
        if trial_cost < cost {
            let improvement = cost - trial_cost;
            let moved = params(&trial) - params(&model);
            model = trial;
            cost = trial_cost;
            damping = (damping / 10.0).max(1e-15);
            if moved.norm() < opts.step_tol || improvement < opts.improvement_tol {
                status = FitStatus::Converged;
                break;
            }
        } else {
            damping *= 10.0;
            if damping > 1e16 {
                status = FitStatus::Stalled;
                break;
            }
        }
    }
    let (sorted, reordered) = model.sorted();
    Ok(FitReport {
        model: sorted,
        iterations,
        residual: cost,
        status,
        reordered,
    })
}

fn params(m: &GaussianMixtureModel) -> Vec8 {
    Vec8::from_fn(|k, _| if k < 4 { m.means[k] } else { m.sigmas[k - 4] })
}

fn apply(m: &GaussianMixtureModel, step: &Vec8, sigma_floor: f64) -> GaussianMixtureModel {
    GaussianMixtureModel {
        means: std::array::from_fn(|l| m.means[l] + step[l]),
        sigmas: std::array::from_fn(|l| (m.sigmas[l] + step[l + 4]).max(sigma_floor)),
    }
}

/// `J^T J` and `J^T r` for residuals `r = freq - p(theta)`, with `J` the
/// Jacobian of the predicted bin probabilities.
fn normal_equations(m: &GaussianMixtureModel, b: &[f64], freq: &[f64]) -> (Mat8, Vec8) {
    let p = predict_bin_probs(m, b);
    let n = freq.len();
    let mut jtj = Mat8::zeros();
    let mut jtr = Vec8::zeros();
    // density and density*z at each boundary, per component
    let mut phi = vec![[0.0f64; 4]; n + 1];
    let mut phiz = vec![[0.0f64; 4]; n + 1];
    for (i, &bi) in b.iter().enumerate() {
        for l in 0..4 {
            let z = (bi - m.means[l]) / m.sigmas[l];
            let d = std_normal_pdf(z);
            phi[i + 1][l] = d;
            phiz[i + 1][l] = d * z;
        }
    }
    for i in 0..n {
        let mut row = Vec8::zeros();
        for l in 0..4 {
            let s = m.sigmas[l];
            row[l] = 0.25 * (phi[i][l] - phi[i + 1][l]) / s;
            row[l + 4] = 0.25 * (phiz[i][l] - phiz[i + 1][l]) / s;
        }
        let r = freq[i] - p[i];
        jtj += row * row.transpose();
        jtr += row * r;
    }
    (jtj, jtr)
}
