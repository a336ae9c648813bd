//! The P/E-cycle loop with periodic controller epochs.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, InfoMode, OrderSchedule, ReadPolicy, WritePolicy};
use super::record::{EpochRecord, RunSummary};
use crate::channel::{ChannelParams, Parity};
use crate::controller::{
    dta_boundaries, dva_scale_factor, fixed_read_boundaries, DvaConfig, DvaOutcome, QuantGrid,
    QuantMode, Saturation, VoltageAllocation,
};
use crate::error::{FlashError, Result};
use crate::estimation::{
    collapse_coincident, equal_prob_boundaries, lm_fit, occupancy_ok, prior_model, rescale_boundaries,
    EmpiricalCdf, FitReport, BOUNDARY_TOL, DEFAULT_BINS, MAX_REREADS, OCCUPANCY_TOL, SEARCH_RANGE,
};
use crate::info::{
    hermite_rule, mutual_information_gh, mutual_information_grid, raw_ber, DensityModel,
    GaussianMixtureModel, GrayMap, LevelPDFs, QuadratureRule, ReadChannel,
};
use crate::lattice::{CellLattice, Readout, WriteOrder};
use crate::math::{mix64, substream};

const STREAM_LATTICE: u64 = 10;
const STREAM_PROBE: u64 = 11;
const STREAM_C2C: u64 = 12;
/// Alternating scale-factor searches stop once neither parity moves more
/// than this between rounds.
const JOINT_TOL: f64 = 1e-3;
const JOINT_ROUNDS: usize = 4;

/// Per-epoch details that do not belong in the CSV time series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochDiagnostics {
    pub cycle: u64,
    pub parity: Parity,
    /// True mutual information of the next block's data at the current wear,
    /// under the freshly chosen allocation and write order.
    pub mi_next: f64,
    pub write_order: WriteOrder,
    pub thresholds: [f64; 4],
    pub read_boundaries: [f64; 3],
    /// Estimation read voltages actually applied this epoch.
    pub estimation_boundaries: Vec<f64>,
    /// Some estimation read voltages coincided after quantization.
    pub coincident: bool,
    /// Extra estimation reads taken because the first placement was stale.
    pub rereads: usize,
    pub fit: Option<FitReport>,
    /// Controller failure, if any; the previous allocation is kept.
    pub failure: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub config: ExperimentConfig,
    pub records: Vec<EpochRecord>,
    pub diagnostics: Vec<EpochDiagnostics>,
    pub summary: RunSummary,
}

impl RunResult {
    pub fn parity_records(&self, parity: Parity) -> impl Iterator<Item = &EpochRecord> + '_ {
        self.records.iter().filter(move |r| r.parity == parity)
    }
}

struct ParityFit {
    fit: FitReport,
    bounds: Vec<f64>,
    coincident: bool,
    rereads: usize,
}

/// What the estimator carries from one epoch to the next, per parity.
#[derive(Debug, Clone)]
struct EstimatorState {
    boundaries: Vec<f64>,
    init: GaussianMixtureModel,
}

struct Runner<'a> {
    cfg: &'a ExperimentConfig,
    params: ChannelParams,
    dva: DvaConfig,
    quant: Option<QuantGrid>,
    density: DensityModel,
    rule: QuadratureRule,
    gray: GrayMap,
    lattice: CellLattice,
    allocs: [VoltageAllocation; 2],
    saturated: [bool; 2],
    est: Option<[EstimatorState; 2]>,
}

/// Runs one experiment to `max_cycles`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunResult> {
    cfg.validate()?;
    let started = Instant::now();
    let params = cfg.channel_params()?;
    let density = DensityModel::new(
        params.clone(),
        cfg.voltage_grid()?,
        cfg.c2c_samples,
        mix64(cfg.seed ^ mix64(STREAM_C2C)),
    )?;
    let quant = cfg.quant_grid()?;
    let full = VoltageAllocation::new(1.0, &params.default_thresholds, quant.as_ref())?;
    let mut runner = Runner {
        cfg,
        dva: cfg.dva_config(),
        quant,
        density,
        rule: hermite_rule(cfg.hermite_order)?,
        gray: GrayMap::default(),
        lattice: CellLattice::new(cfg.wordlines, cfg.cells_per_wordline)?,
        allocs: [full, full],
        saturated: [false; 2],
        est: None,
        params,
    };
    let mut rng = substream(cfg.seed, &[STREAM_LATTICE]);
    let mut records = Vec::new();
    let mut diagnostics = Vec::new();

    runner.start(&mut records, &mut diagnostics)?;
    for cycle in 1..=cfg.max_cycles {
        runner.lattice.set_write_order(runner.order_of_cycle(cycle));
        let (even, odd) = (runner.allocs[0], runner.allocs[1]);
        if cycle % cfg.cadence == 0 {
            runner.lattice.program_cycle(&runner.params, &even, &odd, &mut rng)?;
            let readout = runner.lattice.read_voltages(&runner.params, &mut rng)?;
            runner.epoch(cycle, &readout, &mut records, &mut diagnostics)?;
        } else {
            runner.lattice.wear_cycle(&even, &odd, &mut rng);
        }
    }
    let summary = RunSummary::from_run(cfg, &records, &diagnostics, started.elapsed().as_secs_f64());
    Ok(RunResult {
        config: cfg.clone(),
        records,
        diagnostics,
        summary,
    })
}

impl Runner<'_> {
    fn alloc(&self, alpha: f64) -> Result<VoltageAllocation> {
        VoltageAllocation::new(alpha, &self.params.default_thresholds, self.quant.as_ref())
    }

    fn order_of_block(&self, block: u64) -> WriteOrder {
        match self.cfg.write_order {
            OrderSchedule::EvenFirst => WriteOrder::EvenFirst,
            OrderSchedule::Alternating => WriteOrder::alternating(block),
        }
    }

    /// Order used to program cycle `cycle` (counting from 1).
    fn order_of_cycle(&self, cycle: u64) -> WriteOrder {
        self.order_of_block((cycle - 1) / self.cfg.cadence)
    }

    fn channel(&self, parity: Parity, own: VoltageAllocation, other: VoltageAllocation, order: WriteOrder) -> ReadChannel {
        ReadChannel {
            own_state: *self.lattice.state(parity),
            own_alloc: own,
            other_state: *self.lattice.state(parity.other()),
            other_alloc: other,
            role: order.role_of(parity),
        }
    }

    fn true_pdfs(&self, parity: Parity, allocs: &[VoltageAllocation; 2], order: WriteOrder) -> Result<LevelPDFs> {
        let ch = self.channel(parity, allocs[parity.index()], allocs[parity.other().index()], order);
        self.density.pdfs(&ch)
    }

    fn snap_read(&self, b: &[f64]) -> Vec<f64> {
        match &self.quant {
            Some(g) => g.quantize(b, QuantMode::Nearest),
            None => b.to_vec(),
        }
    }

    /// Three hard-decision boundaries, snapped and kept strictly increasing.
    fn read_boundaries(&self, raw: [f64; 3]) -> [f64; 3] {
        let s = self.snap_read(&raw);
        let mut out = [s[0], s[1], s[2]];
        let bump = self.quant.map(|g| g.spacing()).unwrap_or(1e-6);
        for k in 1..3 {
            if out[k] <= out[k - 1] {
                out[k] = out[k - 1] + bump;
            }
        }
        out
    }

    /// Allocation, saturation flag and estimator state in force from cycle 1.
    fn start(&mut self, records: &mut Vec<EpochRecord>, diags: &mut Vec<EpochDiagnostics>) -> Result<()> {
        let first = self.order_of_block(0);
        let mut fits: [Option<FitReport>; 2] = [None, None];
        let mut est_bounds: [Vec<f64>; 2] = Default::default();
        let mut rereads = [0; 2];
        match self.cfg.info_mode {
            InfoMode::Ideal => {
                if self.cfg.write_policy != WritePolicy::Fixed {
                    self.update_ideal(first)?;
                }
            }
            InfoMode::Estimation => {
                // probe a throw-away copy of the array at full scale
                let full = self.alloc(1.0)?;
                let mut probe = self.lattice.clone();
                probe.set_write_order(WriteOrder::EvenFirst);
                let mut rng = substream(self.cfg.seed, &[STREAM_PROBE]);
                probe.program_cycle(&self.params, &full, &full, &mut rng)?;
                let readout = probe.read_voltages(&self.params, &mut rng)?;
                let prior = EstimatorState {
                    boundaries: equal_prob_boundaries(&prior_model(&full.thresholds), DEFAULT_BINS, SEARCH_RANGE, BOUNDARY_TOL)?,
                    init: prior_model(&full.thresholds),
                };
                self.est = Some([prior.clone(), prior]);
                for p in Parity::ALL {
                    let pf = self.fit_parity(&probe, &readout, p)?;
                    est_bounds[p.index()] = pf.bounds;
                    rereads[p.index()] = pf.rereads;
                    fits[p.index()] = Some(pf.fit);
                }
                let fits_now = [fits[0].unwrap(), fits[1].unwrap()];
                self.update_estimated(&fits_now, WriteOrder::EvenFirst, first)?;
            }
        }
        let allocs = self.allocs;
        for p in Parity::ALL {
            let pdfs = self.true_pdfs(p, &allocs, first)?;
            let mi = mutual_information_grid(&pdfs);
            let assumed = self.est.as_ref().map(|e| mutual_information_gh(&e[p.index()].init, &self.rule));
            let model = match &self.est {
                Some(e) => e[p.index()].init,
                None => pdfs.moment_matched()?,
            };
            let read = self.policy_boundaries(p, &model);
            let ber = raw_ber(&pdfs, &read, &self.gray)?;
            records.push(self.record(0, p, mi, assumed, ber, fits[p.index()].as_ref()));
            diags.push(EpochDiagnostics {
                cycle: 0,
                parity: p,
                mi_next: mi,
                write_order: first,
                thresholds: allocs[p.index()].thresholds,
                read_boundaries: read,
                estimation_boundaries: std::mem::take(&mut est_bounds[p.index()]),
                coincident: false,
                rereads: rereads[p.index()],
                fit: fits[p.index()],
                failure: None,
            });
        }
        Ok(())
    }

    fn record(&self, cycle: u64, p: Parity, mi: f64, assumed: Option<f64>, ber: f64, fit: Option<&FitReport>) -> EpochRecord {
        let state = self.lattice.state(p);
        let lambda = crate::channel::DegradedNoiseParams::at(&self.params, state)
            .map(|n| n.lambda_w)
            .unwrap_or(f64::NAN);
        EpochRecord::new(
            cycle,
            p,
            mi,
            assumed,
            self.allocs[p.index()].alpha,
            state.v_acc,
            lambda,
            ber,
            fit.map(|f| f.residual),
            fit.map(|f| f.iterations as u64),
            self.saturated[p.index()],
        )
    }

    fn policy_boundaries(&self, p: Parity, model: &GaussianMixtureModel) -> [f64; 3] {
        let raw = match self.cfg.read_policy {
            ReadPolicy::FixedMid => fixed_read_boundaries(&self.allocs[p.index()].thresholds),
            ReadPolicy::Dta => dta_boundaries(&model.sorted().0),
        };
        self.read_boundaries(raw)
    }

    /// Histogram of one parity at the estimator's current read voltages and
    /// the resulting fit. Reads whose bins come out far from equal shares
    /// were placed on a stale estimate and are retried.
    fn fit_parity(&self, lattice: &CellLattice, readout: &Readout, p: Parity) -> Result<ParityFit> {
        let est = &self.est.as_ref().expect("estimation state")[p.index()];
        let mut cdf = EmpiricalCdf::new();
        let mut placed = est.boundaries.clone();
        let mut coincident = false;
        let mut rereads = 0;
        loop {
            let (bounds, merged) = collapse_coincident(&self.snap_read(&placed));
            coincident |= merged;
            let hist = lattice.measure_histogram(readout, &bounds, p)?;
            cdf.add(&hist);
            let mut next = None;
            if rereads < MAX_REREADS && !occupancy_ok(&hist, OCCUPANCY_TOL) {
                let b = cdf.replace_boundaries(hist.parity, DEFAULT_BINS, SEARCH_RANGE, BOUNDARY_TOL)?;
                if collapse_coincident(&self.snap_read(&b)).0 != bounds {
                    next = Some(b);
                }
            }
            match next {
                Some(b) => {
                    placed = b;
                    rereads += 1;
                }
                None => {
                    let mut fit = lm_fit(&hist, &est.init)?;
                    if rereads > 0 {
                        let alt = lm_fit(&hist, &cdf.quantile_model(SEARCH_RANGE))?;
                        if alt.residual < fit.residual {
                            fit = alt;
                        }
                    }
                    return Ok(ParityFit {
                        fit,
                        bounds,
                        coincident,
                        rereads,
                    });
                }
            }
        }
    }

    fn epoch(
        &mut self,
        cycle: u64,
        readout: &Readout,
        records: &mut Vec<EpochRecord>,
        diags: &mut Vec<EpochDiagnostics>,
    ) -> Result<()> {
        let measured = self.order_of_cycle(cycle);
        let next = self.order_of_block(cycle / self.cfg.cadence);
        let allocs = self.allocs;
        let pdfs = [
            self.true_pdfs(Parity::Even, &allocs, measured)?,
            self.true_pdfs(Parity::Odd, &allocs, measured)?,
        ];
        let mut fits: [Option<FitReport>; 2] = [None, None];
        let mut est_bounds: [Vec<f64>; 2] = Default::default();
        let mut coincident = [false; 2];
        let mut rereads = [0; 2];
        if self.est.is_some() {
            for p in Parity::ALL {
                let pf = self.fit_parity(&self.lattice, readout, p)?;
                fits[p.index()] = Some(pf.fit);
                est_bounds[p.index()] = pf.bounds;
                coincident[p.index()] = pf.coincident;
                rereads[p.index()] = pf.rereads;
            }
        }
        let mut rows = Vec::with_capacity(2);
        for p in Parity::ALL {
            let i = p.index();
            let model = match &fits[i] {
                Some(f) => f.model,
                None => pdfs[i].moment_matched()?,
            };
            let read = self.policy_boundaries(p, &model);
            let ber = raw_ber(&pdfs[i], &read, &self.gray)?;
            let assumed = fits[i].map(|f| mutual_information_gh(&f.model, &self.rule));
            let mi = mutual_information_grid(&pdfs[i]);
            records.push(self.record(cycle, p, mi, assumed, ber, fits[i].as_ref()));
            rows.push(read);
        }

        let failure = match (&self.cfg.info_mode, fits) {
            (InfoMode::Estimation, [Some(e), Some(o)]) => self.update_estimated(&[e, o], measured, next),
            _ if self.cfg.write_policy == WritePolicy::Fixed => Ok(()),
            _ => self.update_ideal(next),
        }
        .err()
        .map(|e| e.to_string());

        let new_allocs = self.allocs;
        for p in Parity::ALL {
            let i = p.index();
            let mi_next = mutual_information_grid(&self.true_pdfs(p, &new_allocs, next)?);
            diags.push(EpochDiagnostics {
                cycle,
                parity: p,
                mi_next,
                write_order: measured,
                thresholds: allocs[i].thresholds,
                read_boundaries: rows[i],
                estimation_boundaries: std::mem::take(&mut est_bounds[i]),
                coincident: coincident[i],
                rereads: rereads[i],
                fit: fits[i],
                failure: failure.clone(),
            });
        }
        Ok(())
    }

    fn apply_outcomes(&mut self, outcomes: [DvaOutcome; 2]) -> Result<()> {
        for p in 0..2 {
            self.allocs[p] = self.alloc(outcomes[p].alpha)?;
            self.saturated[p] = outcomes[p].saturation == Saturation::Upper;
        }
        Ok(())
    }

    /// Scale-factor search against the true densities of the next block.
    fn update_ideal(&mut self, next: WriteOrder) -> Result<()> {
        match self.cfg.write_policy {
            WritePolicy::Fixed => Ok(()),
            WritePolicy::DvaSingleEvenTarget => {
                let out = dva_scale_factor(
                    |a| {
                        let al = self.alloc(a)?;
                        Ok(mutual_information_grid(&self.density.pdfs(&self.channel(Parity::Even, al, al, next))?))
                    },
                    &self.dva,
                )?;
                self.apply_outcomes([out, out])
            }
            WritePolicy::DvaJointAlternating => {
                // each parity's density depends on the other's allocation
                // through interference, so alternate the two searches
                let mut allocs = self.allocs;
                let mut outcomes: [Option<DvaOutcome>; 2] = [None, None];
                for _ in 0..JOINT_ROUNDS {
                    let before = [allocs[0].alpha, allocs[1].alpha];
                    for p in Parity::ALL {
                        let other = allocs[p.other().index()];
                        let out = dva_scale_factor(
                            |a| {
                                let own = self.alloc(a)?;
                                Ok(mutual_information_grid(&self.density.pdfs(&self.channel(p, own, other, next))?))
                            },
                            &self.dva,
                        )?;
                        allocs[p.index()] = self.alloc(out.alpha)?;
                        outcomes[p.index()] = Some(out);
                    }
                    let moved = (0..2).map(|i| (allocs[i].alpha - before[i]).abs()).fold(0.0, f64::max);
                    if moved < JOINT_TOL {
                        break;
                    }
                }
                self.apply_outcomes([outcomes[0].unwrap(), outcomes[1].unwrap()])
            }
        }
    }

    /// Scale-factor search on fitted mixtures. When the programming order is
    /// about to swap, each parity is planned from the fit of the parity
    /// that has just been written in the role it is about to take.
    fn update_estimated(&mut self, fits: &[FitReport; 2], measured: WriteOrder, next: WriteOrder) -> Result<()> {
        let source = |p: Parity| {
            if measured.role_of(p) == next.role_of(p) { p } else { p.other() }
        };
        let this = &*self;
        let eval_for = |p: Parity| {
            let s = source(p);
            let fit = fits[s.index()].model;
            let thr_s = this.allocs[s.index()].thresholds;
            move |a: f64| -> Result<f64> {
                let thr = this.alloc(a)?.thresholds;
                let m = GaussianMixtureModel {
                    means: std::array::from_fn(|l| fit.means[l] * thr[l] / thr_s[l]),
                    sigmas: fit.sigmas,
                };
                Ok(mutual_information_gh(&m, &this.rule))
            }
        };
        let outcomes = match this.cfg.write_policy {
            WritePolicy::Fixed => None,
            WritePolicy::DvaSingleEvenTarget => {
                let out = dva_scale_factor(eval_for(Parity::Even), &this.dva)?;
                Some([out, out])
            }
            WritePolicy::DvaJointAlternating => Some([
                dva_scale_factor(eval_for(Parity::Even), &this.dva)?,
                dva_scale_factor(eval_for(Parity::Odd), &this.dva)?,
            ]),
        };
        let old = self.allocs;
        if let Some(o) = outcomes {
            self.apply_outcomes(o)?;
        }
        let mut est = self.est.take().expect("estimation state");
        for p in Parity::ALL {
            let s = source(p);
            let src = fits[s.index()].model;
            let (a_new, a_src) = (self.allocs[p.index()].alpha, old[s.index()].alpha);
            let e = &mut est[p.index()];
            match equal_prob_boundaries(&src, DEFAULT_BINS, SEARCH_RANGE, BOUNDARY_TOL) {
                Ok(b) => e.boundaries = rescale_boundaries(&b, a_new, a_src)?,
                Err(FlashError::Bracketing(_)) => {
                    e.boundaries = rescale_boundaries(&e.boundaries, a_new, old[p.index()].alpha)?
                }
                Err(err) => return Err(err),
            }
            e.init = src.rescale_means(a_new / a_src);
        }
        self.est = Some(est);
        Ok(())
    }
}
