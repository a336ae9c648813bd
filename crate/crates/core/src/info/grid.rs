use std::io::Write;

use serde::{Deserialize, Serialize};

use super::mixture::GaussianMixtureModel;
use crate::error::{FlashError, Result};
use crate::math::std_normal_cdf;

/// Uniform voltage grid `lo, lo + step, ..., lo + (n_points - 1) * step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoltageGrid {
    pub lo: f64,
    pub step: f64,
    pub n_points: usize,
}

impl Default for VoltageGrid {
    /// -4 V .. 12 V in 2 mV steps.
    fn default() -> Self {
        VoltageGrid {
            lo: -4.0,
            step: 0.002,
            n_points: 8001,
        }
    }
}

impl VoltageGrid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(hi > lo && step > 0.0 && lo.is_finite() && hi.is_finite()) {
            return Err(FlashError::Argument(format!("bad grid [{lo}, {hi}] step {step}")));
        }
        let n = ((hi - lo) / step).round() as usize + 1;
        Ok(VoltageGrid {
            lo,
            step,
            n_points: n,
        })
    }

    pub fn hi(&self) -> f64 {
        self.point(self.n_points - 1)
    }

    #[inline]
    pub fn point(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.step
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|i| self.point(i))
    }

    /// Trapezoid rule over the whole grid.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.n_points);
        if f.len() < 2 {
            return 0.0;
        }
        let inner: f64 = f[1..f.len() - 1].iter().sum();
        self.step * (inner + 0.5 * (f[0] + f[f.len() - 1]))
    }

    /// Adds `mass` at voltage `v`, split linearly between the two nearest
    /// grid points so the first moment is preserved. Returns the mass that
    /// fell outside the grid.
    pub(crate) fn deposit(&self, f: &mut [f64], v: f64, mass: f64) -> f64 {
        let pos = (v - self.lo) / self.step;
        if pos < 0.0 || pos > (self.n_points - 1) as f64 {
            return mass;
        }
        let i = pos.floor() as usize;
        let frac = pos - i as f64;
        if i + 1 < self.n_points {
            f[i] += mass * (1.0 - frac) / self.step;
            f[i + 1] += mass * frac / self.step;
        } else {
            f[i] += mass / self.step;
        }
        0.0
    }

    /// Adds a Gaussian of total `mass`, each grid value being the average
    /// density over its cell. Returns the mass outside the grid.
    pub(crate) fn deposit_gaussian(&self, f: &mut [f64], mean: f64, sd: f64, mass: f64) -> f64 {
        if sd <= 0.0 {
            return self.deposit(f, mean, mass);
        }
        let h = self.step;
        let reach = 12.0 * sd;
        let first = (((mean - reach - self.lo) / h).floor().max(0.0)) as usize;
        let last = ((((mean + reach - self.lo) / h).ceil()) as isize).min(self.n_points as isize - 1);
        if last < first as isize {
            return mass;
        }
        let last = last as usize;
        let edge = |i: usize| std_normal_cdf((self.point(i) - 0.5 * h - mean) / sd);
        let mut below = edge(first);
        let clipped_lo = if first == 0 { below } else { 0.0 };
        for (i, val) in f.iter_mut().enumerate().take(last + 1).skip(first) {
            let above = edge(i + 1);
            *val += mass * (above - below) / h;
            below = above;
        }
        let clipped_hi = if last == self.n_points - 1 { 1.0 - below } else { 0.0 };
        mass * (clipped_lo + clipped_hi)
    }
}

/// Conditional read-voltage densities of the four levels on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelPDFs {
    pub grid: VoltageGrid,
    pub densities: [Vec<f64>; 4],
    pub priors: [f64; 4],
}

impl LevelPDFs {
    pub fn new(grid: VoltageGrid, densities: [Vec<f64>; 4], priors: [f64; 4]) -> Result<Self> {
        for (l, d) in densities.iter().enumerate() {
            if d.len() != grid.n_points {
                return Err(FlashError::Argument(format!(
                    "level {l} density has {} points, grid has {}",
                    d.len(),
                    grid.n_points
                )));
            }
            if d.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                return Err(FlashError::Argument(format!("level {l} density has invalid values")));
            }
        }
        if priors.iter().any(|p| *p < 0.0) || (priors.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(FlashError::Argument(format!("priors must form a distribution: {priors:?}")));
        }
        Ok(LevelPDFs {
            grid,
            densities,
            priors,
        })
    }

    /// Densities of a Gaussian mixture, cell-averaged on `grid`.
    pub fn from_mixture(model: &GaussianMixtureModel, grid: VoltageGrid) -> Result<Self> {
        model.validate()?;
        let densities = std::array::from_fn(|l| {
            let mut f = vec![0.0; grid.n_points];
            grid.deposit_gaussian(&mut f, model.means[l], model.sigmas[l], 1.0);
            f
        });
        Self::new(grid, densities, [0.25; 4])
    }

    pub fn mass(&self, level: usize) -> f64 {
        self.grid.integrate(&self.densities[level])
    }

    pub fn mean(&self, level: usize) -> f64 {
        let f = &self.densities[level];
        let weighted: Vec<f64> = f.iter().enumerate().map(|(i, v)| v * self.grid.point(i)).collect();
        self.grid.integrate(&weighted) / self.mass(level)
    }

    pub fn variance(&self, level: usize) -> f64 {
        let m = self.mean(level);
        let f = &self.densities[level];
        let weighted: Vec<f64> = f
            .iter()
            .enumerate()
            .map(|(i, v)| v * (self.grid.point(i) - m).powi(2))
            .collect();
        self.grid.integrate(&weighted) / self.mass(level)
    }

    /// Gaussian with the same mean and spread as each level's density.
    pub fn moment_matched(&self) -> Result<GaussianMixtureModel> {
        let means = std::array::from_fn(|l| self.mean(l));
        let sigmas = std::array::from_fn(|l| self.variance(l).sqrt().max(1e-6));
        GaussianMixtureModel::new(means, sigmas)
    }

    /// Cumulative distribution of one level at every grid point.
    pub fn cdf(&self, level: usize) -> Vec<f64> {
        let f = &self.densities[level];
        let h = self.grid.step;
        let mut out = Vec::with_capacity(f.len());
        let mut acc = 0.0;
        out.push(0.0);
        for w in f.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            out.push(acc);
        }
        out
    }

    /// Writes `voltage,f0,f1,f2,f3`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["voltage", "f0", "f1", "f2", "f3"])?;
        for i in 0..self.grid.n_points {
            let mut row = vec![format!("{:.6}", self.grid.point(i))];
            row.extend(self.densities.iter().map(|d| format!("{:.9e}", d[i])));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| FlashError::io("<csv>", e))?;
        Ok(())
    }
}
