//! Ground-truth read densities by numerical convolution of the noise
//! components.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use super::grid::{LevelPDFs, VoltageGrid};
use crate::channel::{ChannelParams, ChannelState, DegradedNoiseParams, Parity, PeMatrix};
use crate::controller::VoltageAllocation;
use crate::error::{FlashError, Result};
use crate::lattice::{sample_coupling, WriteOrder, WriteRole};
use crate::math::substream;

/// Monte-Carlo draws used to tabulate the interference density.
pub const DEFAULT_C2C_SAMPLES: usize = 1_000_000;
/// Mass allowed to fall off the grid before a density is rejected.
pub const MAX_CLIPPED_MASS: f64 = 1e-6;
const INTERNAL_C2C_SEED: u64 = 0x00C2_C5A3_9E1E;

// neighbour positions: upper-left, above, upper-right, left, right
const POSITIONS: usize = 5;
const ABOVE: usize = 1;

/// Raw random draws behind the interference density. The coupling ratios,
/// neighbour levels and neighbour noise are stored as standardized variates
/// so the same draws can be re-weighted for any allocation or wear state.
#[derive(Debug, Clone)]
pub struct C2cSamples {
    n: usize,
    gamma: [Vec<f32>; POSITIONS],
    level: [Vec<u8>; POSITIONS],
    pe_u: [Vec<f32>; POSITIONS],
    z: [Vec<f32>; POSITIONS],
    e: [Vec<f32>; POSITIONS],
}

impl C2cSamples {
    pub fn generate(params: &ChannelParams, n: usize, seed: u64) -> Self {
        let c = &params.c2c;
        let means = [c.mean_xy(), c.mean_y(), c.mean_xy(), c.mean_x(), c.mean_x()];
        let mut out = C2cSamples {
            n,
            gamma: Default::default(),
            level: Default::default(),
            pe_u: Default::default(),
            z: Default::default(),
            e: Default::default(),
        };
        for k in 0..POSITIONS {
            let mut rng = substream(seed, &[k as u64]);
            out.gamma[k].reserve_exact(n);
            out.level[k].reserve_exact(n);
            out.pe_u[k].reserve_exact(n);
            out.z[k].reserve_exact(n);
            out.e[k].reserve_exact(n);
            for _ in 0..n {
                out.gamma[k].push(sample_coupling(means[k], c, &mut rng) as f32);
                out.level[k].push(rng.random_range(0..4u8));
                out.pe_u[k].push(rng.random::<f64>() as f32);
                out.z[k].push(rng.sample::<f64, _>(StandardNormal) as f32);
                out.e[k].push(rng.sample::<f64, _>(Exp1) as f32);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Probability mass of one neighbour's contribution to the interference
    /// shift, on multiples of `step` starting at zero.
    fn position_kernel(&self, params: &ChannelParams, k: usize, nb: &NeighborWrites, step: f64) -> Vec<f64> {
        let mut kern = vec![0.0f64; 2];
        let w = 1.0 / self.n as f64;
        for i in 0..self.n {
            let lvl = nb.written_level(self.level[k][i] as usize, self.pe_u[k][i] as f64);
            let inc = if lvl == 0 {
                0.0
            } else {
                let v = nb.thresholds[lvl]
                    + params.programming_sigma(lvl) * self.z[k][i] as f64
                    + nb.lambda * self.e[k][i] as f64;
                (v - nb.thresholds[0]).max(0.0)
            };
            let pos = self.gamma[k][i] as f64 * inc / step;
            let j = pos.floor() as usize;
            if j + 2 > kern.len() {
                kern.resize(j + 2, 0.0);
            }
            let frac = pos - j as f64;
            kern[j] += w * (1.0 - frac);
            kern[j + 1] += w * frac;
        }
        trim(&mut kern);
        kern
    }
}

fn trim(kern: &mut Vec<f64>) {
    while kern.len() > 1 && kern[kern.len() - 1] == 0.0 {
        kern.pop();
    }
}

/// Distribution of the sum of two independent shifts on the same lattice.
fn convolve_kernels(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (o, &y) in out[i..].iter_mut().zip(b) {
            *o += x * y;
        }
    }
    trim(&mut out);
    out
}

/// Identifies one neighbour position's kernel: the position and everything
/// about the neighbour population that shapes its writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct KernelKey {
    position: usize,
    thresholds: [u64; 4],
    v_acc: u64,
    pe_count: u64,
}

impl KernelKey {
    fn new(position: usize, state: &ChannelState, alloc: &VoltageAllocation) -> Self {
        KernelKey {
            position,
            thresholds: alloc.thresholds.map(f64::to_bits),
            v_acc: state.v_acc.to_bits(),
            pe_count: state.pe_count,
        }
    }
}

const KERNEL_CACHE_LIMIT: usize = 512;

/// What the neighbours of a victim look like when they are programmed.
struct NeighborWrites {
    thresholds: [f64; 4],
    lambda: f64,
    pe_pmf: Option<PeMatrix>,
}

impl NeighborWrites {
    fn new(params: &ChannelParams, state: &ChannelState, alloc: &VoltageAllocation) -> Result<Self> {
        let noise = DegradedNoiseParams::at(params, state)?;
        Ok(NeighborWrites {
            thresholds: alloc.thresholds,
            lambda: noise.lambda_w,
            pe_pmf: params.pe_active().then_some(noise.pe_pmf),
        })
    }

    #[inline]
    fn written_level(&self, intended: usize, u: f64) -> usize {
        match &self.pe_pmf {
            Some(p) => p.sample(intended, u),
            None => intended,
        }
    }
}

/// Everything the read density of one parity depends on: its own wear and
/// allocation, those of the other parity (its same-wordline and diagonal
/// neighbours), and whether it was programmed first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadChannel {
    pub own_state: ChannelState,
    pub own_alloc: VoltageAllocation,
    pub other_state: ChannelState,
    pub other_alloc: VoltageAllocation,
    pub role: WriteRole,
}

impl ReadChannel {
    /// Both parities in the same condition.
    pub fn symmetric(state: ChannelState, alloc: VoltageAllocation, role: WriteRole) -> Self {
        ReadChannel {
            own_state: state,
            own_alloc: alloc,
            other_state: state,
            other_alloc: alloc,
            role,
        }
    }

    pub fn with_own_alloc(mut self, alloc: VoltageAllocation) -> Self {
        self.own_alloc = alloc;
        self
    }

    pub fn with_other_alloc(mut self, alloc: VoltageAllocation) -> Self {
        self.other_alloc = alloc;
        self
    }
}

/// Builds ground-truth conditional densities on a fixed grid. Interference
/// draws are generated once and reused for every evaluation so successive
/// densities differ only through the channel condition.
///
/// The neighbours of one victim are distinct cells, so the interference
/// shift is a sum of independent per-position terms and its density is the
/// convolution of per-position densities. Those are cached, which makes a
/// search over one parity's allocation cheap: only the neighbour above
/// belongs to the same parity.
#[derive(Debug, Clone)]
pub struct DensityModel {
    params: ChannelParams,
    grid: VoltageGrid,
    c2c: Option<Arc<C2cSamples>>,
    kernels: Arc<Mutex<HashMap<KernelKey, Arc<Vec<f64>>>>>,
}

impl DensityModel {
    pub fn new(params: ChannelParams, grid: VoltageGrid, c2c_samples: usize, seed: u64) -> Result<Self> {
        params.validate()?;
        let c2c = (params.c2c_active() && c2c_samples > 0)
            .then(|| Arc::new(C2cSamples::generate(&params, c2c_samples, seed)));
        Ok(DensityModel {
            params,
            grid,
            c2c,
            kernels: Arc::default(),
        })
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    pub fn grid(&self) -> VoltageGrid {
        self.grid
    }

    pub fn pdfs(&self, ch: &ReadChannel) -> Result<LevelPDFs> {
        let p = &self.params;
        let g = self.grid;
        let noise = DegradedNoiseParams::at(p, &ch.own_state)?;
        let thr = ch.own_alloc.thresholds;
        let kernel = match &self.c2c {
            Some(samples) => Some(self.interference_kernel(samples, ch)?),
            None => None,
        };
        let mut densities: [Vec<f64>; 4] = Default::default();
        for (l, dens) in densities.iter_mut().enumerate() {
            let mut f = vec![0.0; g.n_points];
            let mut clipped = 0.0;
            for w in 0..4 {
                let pw = noise.pe_pmf.row(l)[w];
                if pw == 0.0 {
                    continue;
                }
                let ret = noise.retention(thr[w], thr[0])?;
                let sd = (p.programming_sigma(w).powi(2) + ret.variance).sqrt();
                clipped += g.deposit_gaussian(&mut f, thr[w] + ret.mean, sd, pw);
            }
            clipped += exponential_convolve(&g, &mut f, noise.lambda_w);
            if let Some(k) = &kernel {
                clipped += shift_convolve(&g, &mut f, k);
            }
            if clipped > MAX_CLIPPED_MASS {
                return Err(FlashError::GridCoverage(format!(
                    "level {l}: {clipped:.3e} of the mass lies outside [{}, {}]",
                    g.lo,
                    g.hi()
                )));
            }
            let mass = g.integrate(&f);
            if !(mass > 0.0) {
                return Err(FlashError::GridCoverage(format!("level {l} has no mass on the grid")));
            }
            f.iter_mut().for_each(|v| *v /= mass);
            *dens = f;
        }
        LevelPDFs::new(g, densities, [0.25; 4])
    }

    fn interference_kernel(&self, samples: &C2cSamples, ch: &ReadChannel) -> Result<Vec<f64>> {
        let used = match ch.role {
            WriteRole::First => POSITIONS,
            WriteRole::Second => 3,
        };
        let mut total = vec![1.0];
        for k in 0..used {
            let (state, alloc) = if k == ABOVE {
                (&ch.own_state, &ch.own_alloc)
            } else {
                (&ch.other_state, &ch.other_alloc)
            };
            let key = KernelKey::new(k, state, alloc);
            let cached = self.kernels.lock().expect("kernel cache").get(&key).cloned();
            let kern = match cached {
                Some(kern) => kern,
                None => {
                    let nb = NeighborWrites::new(&self.params, state, alloc)?;
                    let kern = Arc::new(samples.position_kernel(&self.params, k, &nb, self.grid.step));
                    let mut cache = self.kernels.lock().expect("kernel cache");
                    if cache.len() >= KERNEL_CACHE_LIMIT {
                        cache.clear();
                    }
                    cache.insert(key, kern.clone());
                    kern
                }
            };
            total = convolve_kernels(&total, &kern);
        }
        Ok(total)
    }
}

/// Densities for a population whose neighbours share its state and
/// allocation, written in even-first order.
pub fn build_conditional_pdfs(
    params: &ChannelParams,
    state: &ChannelState,
    allocation: &VoltageAllocation,
    parity: Parity,
) -> Result<LevelPDFs> {
    let model = DensityModel::new(
        params.clone(),
        VoltageGrid::default(),
        DEFAULT_C2C_SAMPLES,
        INTERNAL_C2C_SEED,
    )?;
    let role = WriteOrder::EvenFirst.role_of(parity);
    model.pdfs(&ReadChannel::symmetric(*state, *allocation, role))
}

/// Convolves a grid density with an exponential of mean `lambda`, treating
/// the density as piecewise linear. Returns the mass pushed past the top.
fn exponential_convolve(g: &VoltageGrid, f: &mut [f64], lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    let h = g.step;
    let e = (-h / lambda).exp();
    let a = 1.0 - e;
    let b = (lambda * (1.0 - e) - h * e) / h;
    let mut prev_in = f[0];
    let mut prev_out = f[0] * a;
    f[0] = prev_out;
    for v in f.iter_mut().skip(1) {
        let cur_in = *v;
        let out = e * prev_out + cur_in * a + (prev_in - cur_in) * b;
        *v = out;
        prev_in = cur_in;
        prev_out = out;
    }
    lambda * prev_out
}

/// Convolves with a non-negative shift whose probabilities sit on multiples
/// of the grid step. Returns the mass pushed past the top.
fn shift_convolve(g: &VoltageGrid, f: &mut [f64], kernel: &[f64]) -> f64 {
    let n = f.len();
    let before: f64 = f.iter().sum();
    let mut out = vec![0.0; n];
    for (i, &fi) in f.iter().enumerate() {
        if fi == 0.0 {
            continue;
        }
        let reach = kernel.len().min(n - i);
        for (o, k) in out[i..i + reach].iter_mut().zip(&kernel[..reach]) {
            *o += fi * k;
        }
    }
    let after: f64 = out.iter().sum();
    f.copy_from_slice(&out);
    (before - after).max(0.0) * g.step
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ChannelModel, NoiseComponents, ParityTag};
    use crate::info::mutual_information_grid;
    use crate::lattice::CellLattice;

    fn alloc(alpha: f64, p: &ChannelParams) -> VoltageAllocation {
        VoltageAllocation::scaled(alpha, &p.default_thresholds).unwrap()
    }

    fn fresh() -> ChannelState {
        ChannelState::fresh(ParityTag::Even)
    }

    #[test]
    fn noiseless_levels_are_spikes() {
        let mut p = ChannelParams::paper_appendix();
        p.components = NoiseComponents::none();
        let a = alloc(0.9, &p);
        let pdfs = build_conditional_pdfs(&p, &fresh(), &a, Parity::Even).unwrap();
        for l in 0..4 {
            let f = &pdfs.densities[l];
            let (i, peak) = f
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.total_cmp(y.1))
                .unwrap();
            assert!(peak * pdfs.grid.step > 1.0 - 1e-9);
            assert!((pdfs.grid.point(i) - a.thresholds[l]).abs() <= pdfs.grid.step);
        }
        assert!((mutual_information_grid(&pdfs) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn model1_fresh_mean_adds_wear_slope() {
        let mut p = ChannelParams::paper_appendix().with_model(ChannelModel::Model1);
        p.retention_t = 0.0;
        let a = alloc(0.8, &p);
        let pdfs = build_conditional_pdfs(&p, &fresh(), &a, Parity::Odd).unwrap();
        for l in 0..4 {
            let expect = a.thresholds[l] + p.c_w;
            assert!((pdfs.mean(l) - expect).abs() < 1e-5, "level {l}: {} vs {expect}", pdfs.mean(l));
            let var = p.programming_sigma(l).powi(2) + p.c_w * p.c_w;
            assert!((pdfs.variance(l) / var - 1.0).abs() < 2e-3);
        }
    }

    #[test]
    fn exponential_recursion_matches_closed_form() {
        // Gaussian convolved with an exponential has a closed-form density.
        let g = VoltageGrid::new(-2.0, 4.0, 0.001).unwrap();
        let (m, s, lam) = (0.5, 0.1, 0.2);
        let mut f = vec![0.0; g.n_points];
        g.deposit_gaussian(&mut f, m, s, 1.0);
        exponential_convolve(&g, &mut f, lam);
        for y in [0.3, 0.5, 0.8, 1.2] {
            let i = ((y - g.lo) / g.step).round() as usize;
            let x = g.point(i);
            let z = (x - m) / s - s / lam;
            let exact = (1.0 / lam)
                * ((s * s / (2.0 * lam * lam)) - (x - m) / lam).exp()
                * crate::math::std_normal_cdf(z);
            assert!((f[i] / exact - 1.0).abs() < 1e-3, "y={y}: {} vs {exact}", f[i]);
        }
    }

    #[test]
    fn narrow_grid_is_rejected() {
        let p = ChannelParams::paper_appendix();
        let grid = VoltageGrid::new(2.0, 6.0, 0.002).unwrap();
        let model = DensityModel::new(p.clone(), grid, 1000, 1).unwrap();
        let ch = ReadChannel::symmetric(fresh(), alloc(1.0, &p), WriteRole::First);
        assert!(matches!(model.pdfs(&ch), Err(FlashError::GridCoverage(_))));
    }

    #[test]
    fn first_role_is_noisier() {
        let p = ChannelParams::paper_appendix();
        let model = DensityModel::new(p.clone(), VoltageGrid::default(), 200_000, 3).unwrap();
        let st = ChannelState { v_acc: 3000.0, pe_count: 1100, parity: ParityTag::Even };
        let base = ReadChannel::symmetric(st, alloc(0.7, &p), WriteRole::First);
        let first = mutual_information_grid(&model.pdfs(&base).unwrap());
        let second = mutual_information_grid(
            &model.pdfs(&ReadChannel { role: WriteRole::Second, ..base }).unwrap(),
        );
        assert!(first < second, "first {first} second {second}");
    }

    /// Kolmogorov-Smirnov distance between the convolved densities and cells
    /// drawn from the lattice at a pinned wear state.
    #[test]
    fn densities_match_lattice_samples() {
        let p = ChannelParams::paper_appendix();
        let a = alloc(0.75, &p);
        let st = ChannelState { v_acc: 4000.0, pe_count: 1500, parity: ParityTag::Even };
        let mut lattice = CellLattice::with_default_size();
        let mut rng = substream(99, &[]);
        let mut by_level: [Vec<f64>; 4] = Default::default();
        let mut cells = 0;
        while cells < 1_000_000 {
            for parity in Parity::ALL {
                lattice.set_state(parity, ChannelState { parity: parity.into(), ..st });
            }
            lattice.program_cycle(&p, &a, &a, &mut rng).unwrap();
            for parity in Parity::ALL {
                lattice.set_state(parity, ChannelState { parity: parity.into(), ..st });
            }
            let r = lattice.read_voltages(&p, &mut rng).unwrap();
            for i in lattice.measured_cells(Parity::Even) {
                by_level[lattice.intended_level(i)].push(r.voltages[i]);
                cells += 1;
            }
        }
        let model = DensityModel::new(p.clone(), VoltageGrid::default(), DEFAULT_C2C_SAMPLES, 5).unwrap();
        let pdfs = model.pdfs(&ReadChannel::symmetric(st, a, WriteRole::First)).unwrap();
        for (l, xs) in by_level.iter_mut().enumerate() {
            xs.sort_by(f64::total_cmp);
            let cdf = pdfs.cdf(l);
            let n = xs.len() as f64;
            let mut d: f64 = 0.0;
            for (k, x) in xs.iter().enumerate().step_by(7) {
                let pos = ((x - pdfs.grid.lo) / pdfs.grid.step).clamp(0.0, (pdfs.grid.n_points - 1) as f64);
                let i = pos.floor() as usize;
                let j = (i + 1).min(pdfs.grid.n_points - 1);
                let c = cdf[i] + (pos - i as f64) * (cdf[j] - cdf[i]);
                d = d.max((c - k as f64 / n).abs()).max((c - (k + 1) as f64 / n).abs());
            }
            assert!(d < 0.01, "level {l}: KS distance {d}");
        }
    }
}
