//! Even/odd wordline array: P/E cycling with interference, wear bookkeeping,
//! and retention-aware reads.

mod histogram;
mod interference;

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;

pub use histogram::VoltageHistogram;
pub(crate) use histogram::check_boundaries;
pub use interference::{
    c2c_disturbance, sample_coupling, NeighborIncreases, WriteOrder, WriteRole,
};

use crate::channel::{
    sample_cell_noise, ChannelParams, ChannelState, DegradedNoiseParams, Parity, ParityTag,
};
use crate::controller::VoltageAllocation;
use crate::error::{FlashError, Result};
use crate::math::substream;

const STREAM_PROGRAM: u64 = 0;
const STREAM_COUPLING: u64 = 1;
const STREAM_WEAR: u64 = 2;
const STREAM_READ: u64 = 3;

/// Default array: the last wordline and both edge columns are excluded from
/// measurements, leaving 256 x 2048 cells (262144 per parity).
pub const DEFAULT_WORDLINES: usize = 257;
pub const DEFAULT_CELLS_PER_WORDLINE: usize = 2050;

#[derive(Debug, Clone)]
pub struct CellLattice {
    wordlines: usize,
    cells_per_wordline: usize,
    intended: Vec<u8>,
    written: Vec<u8>,
    /// Programmed voltage including received interference, before retention.
    stored: Vec<f64>,
    /// Interference received in the last full programming cycle.
    disturbance: Vec<f64>,
    order: WriteOrder,
    states: [ChannelState; 2],
    allocations: Option<[VoltageAllocation; 2]>,
    programmed: bool,
}

/// Measured voltages of every cell, in lattice order.
#[derive(Debug, Clone, PartialEq)]
pub struct Readout {
    pub voltages: Vec<f64>,
}

impl CellLattice {
    pub fn new(wordlines: usize, cells_per_wordline: usize) -> Result<Self> {
        if wordlines < 3 || cells_per_wordline < 4 || cells_per_wordline % 2 != 0 {
            return Err(FlashError::Argument(format!(
                "lattice needs >= 3 wordlines and an even count >= 4 of cells per wordline, got {wordlines} x {cells_per_wordline}"
            )));
        }
        let n = wordlines * cells_per_wordline;
        Ok(CellLattice {
            wordlines,
            cells_per_wordline,
            intended: vec![0; n],
            written: vec![0; n],
            stored: vec![0.0; n],
            disturbance: vec![0.0; n],
            order: WriteOrder::EvenFirst,
            states: [
                ChannelState::fresh(ParityTag::Even),
                ChannelState::fresh(ParityTag::Odd),
            ],
            allocations: None,
            programmed: false,
        })
    }

    pub fn with_default_size() -> Self {
        Self::new(DEFAULT_WORDLINES, DEFAULT_CELLS_PER_WORDLINE).expect("default size is valid")
    }

    pub fn wordlines(&self) -> usize {
        self.wordlines
    }

    pub fn cells_per_wordline(&self) -> usize {
        self.cells_per_wordline
    }

    pub fn len(&self) -> usize {
        self.stored.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stored.is_empty()
    }

    pub fn order(&self) -> WriteOrder {
        self.order
    }

    pub fn set_write_order(&mut self, order: WriteOrder) {
        self.order = order;
    }

    pub fn state(&self, parity: Parity) -> &ChannelState {
        &self.states[parity.index()]
    }

    /// Overrides the wear state of one parity, e.g. to start a run mid-life.
    pub fn set_state(&mut self, parity: Parity, state: ChannelState) {
        self.states[parity.index()] = state;
    }

    pub fn is_programmed(&self) -> bool {
        self.programmed
    }

    /// Allocations of the data currently held, if any.
    pub fn allocations(&self) -> Option<&[VoltageAllocation; 2]> {
        self.allocations.as_ref()
    }

    pub fn intended_level(&self, idx: usize) -> usize {
        self.intended[idx] as usize
    }

    pub fn written_level(&self, idx: usize) -> usize {
        self.written[idx] as usize
    }

    pub fn stored_voltage(&self, idx: usize) -> f64 {
        self.stored[idx]
    }

    pub fn disturbance(&self, idx: usize) -> f64 {
        self.disturbance[idx]
    }

    pub fn position(&self, idx: usize) -> (usize, usize) {
        (idx / self.cells_per_wordline, idx % self.cells_per_wordline)
    }

    pub fn parity_of(&self, idx: usize) -> Parity {
        Parity::of_column(idx % self.cells_per_wordline)
    }

    /// Indices of the cells used for statistics: every wordline except the
    /// last one, without the two edge columns.
    pub fn measured_cells(&self, parity: Parity) -> impl Iterator<Item = usize> + '_ {
        let cpw = self.cells_per_wordline;
        (0..self.wordlines - 1).flat_map(move |wl| {
            (1..cpw - 1)
                .filter(move |&col| Parity::of_column(col) == parity)
                .map(move |col| wl * cpw + col)
        })
    }

    pub fn measured_count(&self, parity: Parity) -> usize {
        self.measured_cells(parity).count()
    }

    /// One full P/E cycle: erase, write a fresh uniform level into every
    /// cell with programming noise, apply interference from later-written
    /// neighbours, and advance the wear state of both parities.
    pub fn program_cycle<R: Rng + ?Sized>(
        &mut self,
        params: &ChannelParams,
        alloc_even: &VoltageAllocation,
        alloc_odd: &VoltageAllocation,
        rng: &mut R,
    ) -> Result<()> {
        let allocs = [*alloc_even, *alloc_odd];
        let noise = [
            DegradedNoiseParams::at(params, &self.states[0])?,
            DegradedNoiseParams::at(params, &self.states[1])?,
        ];
        let seed = rng.next_u64();
        let cpw = self.cells_per_wordline;
        let n = self.len();
        let mut increase = vec![0.0; n];

        for wl in 0..self.wordlines {
            let mut r = substream(seed, &[STREAM_PROGRAM, wl as u64]);
            for col in 0..cpw {
                let idx = wl * cpw + col;
                let p = Parity::of_column(col).index();
                let level = r.random_range(0..4usize);
                let w = sample_cell_noise(params, &noise[p], level, &allocs[p].thresholds, &mut r);
                self.intended[idx] = level as u8;
                self.written[idx] = w.written_level as u8;
                self.stored[idx] = w.voltage;
                increase[idx] = if w.written_level == 0 {
                    0.0
                } else {
                    (w.voltage - allocs[p].erased_level()).max(0.0)
                };
            }
        }

        for wl in 0..self.wordlines {
            let mut r = substream(seed, &[STREAM_COUPLING, wl as u64]);
            let next = wl + 1 < self.wordlines;
            for col in 0..cpw {
                let idx = wl * cpw + col;
                let role = self.order.role_of(Parity::of_column(col));
                let at = |w: usize, c: Option<usize>| -> f64 {
                    match c {
                        Some(c) if c < cpw => increase[w * cpw + c],
                        _ => 0.0,
                    }
                };
                let left = col.checked_sub(1);
                let right = Some(col + 1);
                let inc = NeighborIncreases {
                    a: if next { at(wl + 1, left) } else { 0.0 },
                    b: if next { at(wl + 1, Some(col)) } else { 0.0 },
                    c: if next { at(wl + 1, right) } else { 0.0 },
                    d: at(wl, left),
                    e: at(wl, right),
                };
                let d = c2c_disturbance(params, role, &inc, &mut r);
                self.disturbance[idx] = d;
                self.stored[idx] += d;
            }
        }

        self.advance_wear(&allocs);
        self.allocations = Some(allocs);
        self.programmed = true;
        Ok(())
    }

    /// A P/E cycle whose written data is never read back: draws the levels
    /// that drive wear and updates the accumulated voltage, skipping noise
    /// and interference. The lattice contents become stale until the next
    /// [`program_cycle`](Self::program_cycle).
    pub fn wear_cycle<R: Rng + ?Sized>(
        &mut self,
        alloc_even: &VoltageAllocation,
        alloc_odd: &VoltageAllocation,
        rng: &mut R,
    ) {
        let allocs = [*alloc_even, *alloc_odd];
        let seed = rng.next_u64();
        let mut r = substream(seed, &[STREAM_WEAR]);
        for level in self.intended.iter_mut() {
            *level = r.random_range(0..4u8);
        }
        self.advance_wear(&allocs);
        self.programmed = false;
    }

    fn advance_wear(&mut self, allocs: &[VoltageAllocation; 2]) {
        let mut sum = [0.0f64; 2];
        let mut count = [0usize; 2];
        let cpw = self.cells_per_wordline;
        for (idx, &level) in self.intended.iter().enumerate() {
            let p = Parity::of_column(idx % cpw).index();
            let t = &allocs[p].thresholds;
            sum[p] += t[level as usize] - t[0];
            count[p] += 1;
        }
        for p in 0..2 {
            self.states[p].v_acc += sum[p] / count[p] as f64;
            self.states[p].pe_count += 1;
        }
    }

    /// Applies retention at the configured read time to every cell. Reads
    /// are non-destructive; each call draws fresh retention noise.
    pub fn read_voltages<R: Rng + ?Sized>(
        &self,
        params: &ChannelParams,
        rng: &mut R,
    ) -> Result<Readout> {
        let allocs = match (&self.allocations, self.programmed) {
            (Some(a), true) => a,
            _ => return Err(FlashError::NotProgrammed),
        };
        let noise = [
            DegradedNoiseParams::at(params, &self.states[0])?,
            DegradedNoiseParams::at(params, &self.states[1])?,
        ];
        let mut r = substream(rng.next_u64(), &[STREAM_READ]);
        let cpw = self.cells_per_wordline;
        let mut voltages = Vec::with_capacity(self.len());
        for (idx, &stored) in self.stored.iter().enumerate() {
            let p = Parity::of_column(idx % cpw).index();
            let t = &allocs[p].thresholds;
            let ret = noise[p].retention(t[self.written[idx] as usize], t[0])?;
            let z: f64 = r.sample(StandardNormal);
            voltages.push(stored + ret.mean + ret.variance.sqrt() * z);
        }
        Ok(Readout { voltages })
    }

    /// Histogram of the measured cells of one parity.
    pub fn measure_histogram(
        &self,
        readout: &Readout,
        boundaries: &[f64],
        parity: Parity,
    ) -> Result<VoltageHistogram> {
        VoltageHistogram::from_samples(
            self.measured_cells(parity).map(|i| readout.voltages[i]),
            boundaries,
            parity.into(),
        )
    }

    /// Measured voltages of one parity's statistics cells.
    pub fn parity_voltages(&self, readout: &Readout, parity: Parity) -> Vec<f64> {
        self.measured_cells(parity).map(|i| readout.voltages[i]).collect()
    }

    /// Raw dump: `wordline,index,parity,intended_level,written_level,measured_voltage`.
    pub fn write_readout_csv<W: Write>(&self, readout: &Readout, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "wordline",
            "index",
            "parity",
            "intended_level",
            "written_level",
            "measured_voltage",
        ])?;
        for (idx, v) in readout.voltages.iter().enumerate() {
            let (wl, col) = self.position(idx);
            w.write_record([
                wl.to_string(),
                col.to_string(),
                self.parity_of(idx).name().to_string(),
                self.intended[idx].to_string(),
                self.written[idx].to_string(),
                format!("{v:.9}"),
            ])?;
        }
        w.flush().map_err(|e| FlashError::io("<csv>", e))?;
        Ok(())
    }
}
