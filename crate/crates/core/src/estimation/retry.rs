//! Re-reads for histograms taken at stale read voltages.
//!
//! Estimation read voltages are placed from the previous epoch's fit. When
//! the channel has drifted by more than a few level widths in between, whole
//! levels fall inside a single bin and no fit can locate them. The helpers
//! here detect that from the bin occupancies and re-place the reads using
//! everything observed so far on the same readout.

use super::boundaries::equal_prob_boundaries;
use super::lm::{lm_fit, SIGMA_FLOOR};
use crate::error::Result;
use crate::info::GaussianMixtureModel;
use crate::lattice::VoltageHistogram;

/// Largest deviation of a bin's share from `1 / n_bins` that still counts as
/// a well-placed read.
pub const OCCUPANCY_TOL: f64 = 0.04;
/// Re-reads allowed per population and epoch.
pub const MAX_REREADS: usize = 6;

/// True when every bin holds close to an equal share of the cells.
pub fn occupancy_ok(hist: &VoltageHistogram, tol: f64) -> bool {
    let share = 1.0 / hist.n_bins() as f64;
    hist.frequencies().iter().all(|f| (f - share).abs() <= tol)
}

/// Cumulative cell fractions observed at read voltages, pooled over several
/// reads of one population.
#[derive(Debug, Clone, Default)]
pub struct EmpiricalCdf {
    points: Vec<(f64, f64)>,
    total: u64,
}

impl EmpiricalCdf {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Adds the boundaries of one histogram. All histograms must count the
    /// same cells.
    pub fn add(&mut self, hist: &VoltageHistogram) {
        self.total = hist.total;
        let t = hist.total.max(1) as f64;
        let mut acc = 0u64;
        for (b, c) in hist.boundaries.iter().zip(&hist.counts) {
            acc += c;
            let at = self.points.partition_point(|p| p.0 < *b);
            if self.points.get(at).is_none_or(|p| p.0 != *b) {
                self.points.insert(at, (*b, acc as f64 / t));
            }
        }
    }

    /// Linearly interpolated voltage at cumulative fraction `q`, with the
    /// ends of `range` anchoring fractions 0 and 1.
    pub fn quantile(&self, q: f64, range: (f64, f64)) -> f64 {
        let mut prev = (range.0, 0.0);
        for &p in self.points.iter().chain(std::iter::once(&(range.1, 1.0))) {
            if p.1 >= q && p.1 > prev.1 {
                let t = (q - prev.1) / (p.1 - prev.1);
                return prev.0 + t.clamp(0.0, 1.0) * (p.0 - prev.0);
            }
            prev = p;
        }
        range.1
    }

    /// All pooled reads as one histogram.
    pub fn histogram(&self, parity: crate::channel::ParityTag) -> Result<VoltageHistogram> {
        let bounds: Vec<f64> = self.points.iter().map(|p| p.0).collect();
        let mut counts = Vec::with_capacity(bounds.len() + 1);
        let mut prev = 0u64;
        for p in &self.points {
            let cum = (p.1 * self.total as f64).round() as u64;
            counts.push(cum.saturating_sub(prev));
            prev = cum.max(prev);
        }
        counts.push(self.total.saturating_sub(prev));
        VoltageHistogram::new(bounds, counts, parity)
    }

    /// A mixture read off the pooled quantiles, assuming each level holds a
    /// quarter of the cells: median for the mean, interquartile range for
    /// the spread.
    pub fn quantile_model(&self, range: (f64, f64)) -> GaussianMixtureModel {
        let q = |f: f64| self.quantile(f, range);
        GaussianMixtureModel {
            means: std::array::from_fn(|l| q((l as f64 + 0.5) / 4.0)),
            sigmas: std::array::from_fn(|l| {
                let iqr = q((l as f64 + 0.75) / 4.0) - q((l as f64 + 0.25) / 4.0);
                (iqr / 1.349).max(10.0 * SIGMA_FLOOR)
            }),
        }
    }

    /// Read voltages for the next attempt: equal-probability boundaries of a
    /// mixture fitted to the pooled reads, or plain pooled quantiles when
    /// that fit cannot be placed.
    pub fn replace_boundaries(
        &self,
        parity: crate::channel::ParityTag,
        n_bins: usize,
        range: (f64, f64),
        tol: f64,
    ) -> Result<Vec<f64>> {
        let pooled = self.histogram(parity)?;
        let fit = lm_fit(&pooled, &self.quantile_model(range))?;
        if let Ok(b) = equal_prob_boundaries(&fit.model, n_bins, range, tol) {
            return Ok(b);
        }
        let mut out: Vec<f64> = (1..n_bins).map(|i| self.quantile(i as f64 / n_bins as f64, range)).collect();
        for k in 1..out.len() {
            if out[k] <= out[k - 1] {
                out[k] = out[k - 1] + tol;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ParityTag;
    use crate::estimation::{BOUNDARY_TOL, DEFAULT_BINS, SEARCH_RANGE};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn draws(model: &GaussianMixtureModel, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let l = i % 4;
                Normal::new(model.means[l], model.sigmas[l]).unwrap().sample(&mut rng)
            })
            .collect()
    }

    #[test]
    fn pooled_points_reproduce_counts() {
        let v = [0.5, 1.5, 2.5, 3.5, 4.5];
        let mut cdf = EmpiricalCdf::new();
        cdf.add(&VoltageHistogram::from_samples(v, &[1.0, 3.0], ParityTag::Even).unwrap());
        cdf.add(&VoltageHistogram::from_samples(v, &[2.0, 3.0, 4.0], ParityTag::Even).unwrap());
        assert_eq!(cdf.len(), 4);
        let h = cdf.histogram(ParityTag::Even).unwrap();
        assert_eq!(h.boundaries, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(h.counts, vec![1, 1, 1, 1, 1]);
        assert!((cdf.quantile(0.5, (0.0, 5.0)) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn stale_reads_are_detected_and_recovered() {
        let placed = GaussianMixtureModel {
            means: [2.96, 5.36, 6.56, 8.02],
            sigmas: [0.36, 0.08, 0.08, 0.08],
        };
        let actual = GaussianMixtureModel {
            means: [2.96, 5.03, 6.07, 7.32],
            sigmas: [0.36, 0.085, 0.085, 0.085],
        };
        let cells = draws(&actual, 65536, 3);
        let mut bounds = equal_prob_boundaries(&placed, DEFAULT_BINS, SEARCH_RANGE, BOUNDARY_TOL).unwrap();
        let mut cdf = EmpiricalCdf::new();
        let first = VoltageHistogram::from_samples(cells.iter().copied(), &bounds, ParityTag::Even).unwrap();
        assert!(!occupancy_ok(&first, OCCUPANCY_TOL));
        cdf.add(&first);
        let mut ok = false;
        for _ in 0..MAX_REREADS {
            bounds = cdf.replace_boundaries(ParityTag::Even, DEFAULT_BINS, SEARCH_RANGE, BOUNDARY_TOL).unwrap();
            let h = VoltageHistogram::from_samples(cells.iter().copied(), &bounds, ParityTag::Even).unwrap();
            cdf.add(&h);
            if occupancy_ok(&h, OCCUPANCY_TOL) {
                let fit = lm_fit(&h, &cdf.quantile_model(SEARCH_RANGE)).unwrap();
                for l in 0..4 {
                    assert!((fit.model.means[l] - actual.means[l]).abs() < 0.05, "{:?}", fit.model);
                }
                ok = true;
                break;
            }
        }
        assert!(ok, "re-reads did not settle");
    }

    #[test]
    fn quantile_model_of_separated_levels() {
        let actual = GaussianMixtureModel {
            means: [0.0, 3.0, 6.0, 9.0],
            sigmas: [0.3, 0.2, 0.2, 0.2],
        };
        let cells = draws(&actual, 40000, 9);
        let bounds: Vec<f64> = (0..200).map(|i| -2.0 + 0.06 * i as f64).collect();
        let mut cdf = EmpiricalCdf::new();
        cdf.add(&VoltageHistogram::from_samples(cells, &bounds, ParityTag::Odd).unwrap());
        let m = cdf.quantile_model(SEARCH_RANGE);
        for l in 0..4 {
            assert!((m.means[l] - actual.means[l]).abs() < 0.05);
            assert!((m.sigmas[l] / actual.sigmas[l] - 1.0).abs() < 0.2, "{:?}", m.sigmas);
        }
    }
}
