use serde::{Deserialize, Serialize};

use super::grid::LevelPDFs;
use crate::error::Result;
use crate::lattice::check_boundaries;

/// Two-bit label of each level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrayMap(pub [u8; 4]);

impl Default for GrayMap {
    /// `11, 01, 00, 10` from the lowest level up.
    fn default() -> Self {
        GrayMap([0b11, 0b01, 0b00, 0b10])
    }
}

impl GrayMap {
    pub fn hamming(&self, a: usize, b: usize) -> u32 {
        (self.0[a] ^ self.0[b]).count_ones()
    }
}

/// Per-bit error rate of hard decisions with three read boundaries.
pub fn raw_ber(pdfs: &LevelPDFs, boundaries: &[f64; 3], gray: &GrayMap) -> Result<f64> {
    check_boundaries(boundaries)?;
    let mut ber = 0.0;
    for l in 0..4 {
        let cdf = pdfs.cdf(l);
        let total = *cdf.last().unwrap_or(&0.0);
        if total <= 0.0 || pdfs.priors[l] == 0.0 {
            continue;
        }
        let at = |b: f64| cdf_at(pdfs, l, &cdf, b);
        let edges = [0.0, at(boundaries[0]), at(boundaries[1]), at(boundaries[2]), total];
        for r in 0..4 {
            if r != l {
                let p = (edges[r + 1] - edges[r]).max(0.0) / total;
                ber += pdfs.priors[l] * p * gray.hamming(l, r) as f64;
            }
        }
    }
    Ok(0.5 * ber)
}

/// Cumulative mass up to `y`, integrating the piecewise-linear density
/// exactly inside the containing cell.
fn cdf_at(pdfs: &LevelPDFs, level: usize, cdf: &[f64], y: f64) -> f64 {
    let g = &pdfs.grid;
    let pos = (y - g.lo) / g.step;
    if pos <= 0.0 {
        return 0.0;
    }
    if pos >= (g.n_points - 1) as f64 {
        return cdf[g.n_points - 1];
    }
    let i = pos.floor() as usize;
    let t = pos - i as f64;
    let f = &pdfs.densities[level];
    cdf[i] + g.step * (t * f[i] + 0.5 * t * t * (f[i + 1] - f[i]))
}
