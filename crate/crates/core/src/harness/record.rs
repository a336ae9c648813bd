//! Epoch records, run summaries and their CSV form.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::run::EpochDiagnostics;
use crate::channel::Parity;
use crate::error::{FlashError, Result};

/// Column order of the epoch CSV.
pub const CSV_COLUMNS: [&str; 11] = [
    "cycle",
    "parity",
    "mi_true",
    "mi_assumed",
    "alpha",
    "v_acc",
    "lambda",
    "ber",
    "fit_residual",
    "fit_iters",
    "saturated",
];

/// State of one parity at the end of an epoch. Real values are kept at the
/// nine significant digits written to CSV, so records survive a round trip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub cycle: u64,
    pub parity: Parity,
    /// Mutual information of the true channel, bits.
    pub mi_true: f64,
    /// Mutual information the controller believes in (estimation mode).
    pub mi_assumed: Option<f64>,
    pub alpha: f64,
    pub v_acc: f64,
    pub lambda: f64,
    /// Raw bit error rate under the active read boundaries.
    pub ber: f64,
    pub fit_residual: Option<f64>,
    pub fit_iters: Option<u64>,
    pub saturated: bool,
}

impl EpochRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        cycle: u64,
        parity: Parity,
        mi_true: f64,
        mi_assumed: Option<f64>,
        alpha: f64,
        v_acc: f64,
        lambda: f64,
        ber: f64,
        fit_residual: Option<f64>,
        fit_iters: Option<u64>,
        saturated: bool,
    ) -> Self {
        EpochRecord {
            cycle,
            parity,
            mi_true: sig9(mi_true),
            mi_assumed: mi_assumed.map(sig9),
            alpha: sig9(alpha),
            v_acc: sig9(v_acc),
            lambda: sig9(lambda),
            ber: sig9(ber),
            fit_residual: fit_residual.map(sig9),
            fit_iters,
            saturated,
        }
    }
}

/// Rounds to nine significant digits.
pub fn sig9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

fn fmt_real(x: f64) -> String {
    let x = sig9(x);
    if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn write_csv<W: Write>(records: &[EpochRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    let opt = |v: Option<f64>| v.map(fmt_real).unwrap_or_default();
    for r in records {
        w.write_record([
            r.cycle.to_string(),
            r.parity.name().to_string(),
            fmt_real(r.mi_true),
            opt(r.mi_assumed),
            fmt_real(r.alpha),
            fmt_real(r.v_acc),
            fmt_real(r.lambda),
            fmt_real(r.ber),
            opt(r.fit_residual),
            r.fit_iters.map(|i| i.to_string()).unwrap_or_default(),
            r.saturated.to_string(),
        ])?;
    }
    w.flush().map_err(|e| FlashError::io("<csv>", e))?;
    Ok(())
}

/// Writes the epoch table to `path`.
pub fn emit_csv(records: &[EpochRecord], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(FlashError::Argument("no records to write".into()));
    }
    let file = std::fs::File::create(path).map_err(|e| FlashError::io(path, e))?;
    write_csv(records, std::io::BufWriter::new(file))
}

pub fn parse_csv<R: Read>(input: R) -> Result<Vec<EpochRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(CSV_COLUMNS) {
        return Err(FlashError::Argument(format!("unexpected CSV header: {header:?}")));
    }
    let bad = |row: usize, what: &str| FlashError::Argument(format!("row {row}: bad {what}"));
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let real = |k: usize| rec[k].parse::<f64>().map_err(|_| bad(row, CSV_COLUMNS[k]));
        let opt = |k: usize| {
            if rec[k].is_empty() { Ok(None) } else { real(k).map(Some) }
        };
        out.push(EpochRecord {
            cycle: rec[0].parse().map_err(|_| bad(row, "cycle"))?,
            parity: match &rec[1] {
                "even" => Parity::Even,
                "odd" => Parity::Odd,
                _ => return Err(bad(row, "parity")),
            },
            mi_true: real(2)?,
            mi_assumed: opt(3)?,
            alpha: real(4)?,
            v_acc: real(5)?,
            lambda: real(6)?,
            ber: real(7)?,
            fit_residual: opt(8)?,
            fit_iters: if rec[9].is_empty() {
                None
            } else {
                Some(rec[9].parse().map_err(|_| bad(row, "fit_iters"))?)
            },
            saturated: rec[10].parse().map_err(|_| bad(row, "saturated"))?,
        });
    }
    Ok(out)
}

pub fn read_csv(path: &Path) -> Result<Vec<EpochRecord>> {
    let file = std::fs::File::open(path).map_err(|e| FlashError::io(path, e))?;
    parse_csv(file)
}

/// Cycle count at which a parity reached end of life; `censored` means it
/// never did before the run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lifetime {
    pub cycles: u64,
    pub censored: bool,
}

impl Lifetime {
    fn min(a: Lifetime, b: Lifetime) -> Lifetime {
        if a.cycles <= b.cycles { a } else { b }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub preset: String,
    pub seed: u64,
    pub config_hash: String,
    /// Mutual-information lifetimes: even, odd, and the earlier of the two.
    pub lifetime_even: Lifetime,
    pub lifetime_odd: Lifetime,
    pub lifetime: Lifetime,
    /// Cycles until the raw BER reaches the configured limit.
    pub ber_lifetime_even: Lifetime,
    pub ber_lifetime_odd: Lifetime,
    pub ber_lifetime: Lifetime,
    pub initial_alpha: [f64; 2],
    pub final_alpha: [f64; 2],
    /// Epochs in which some estimation read voltages coincided.
    pub coincident_epochs: usize,
    pub epochs: usize,
    pub elapsed_s: f64,
}

impl RunSummary {
    pub fn from_run(
        cfg: &ExperimentConfig,
        records: &[EpochRecord],
        diags: &[EpochDiagnostics],
        elapsed_s: f64,
    ) -> Self {
        let series = |p: Parity| -> Vec<(&EpochRecord, &EpochDiagnostics)> {
            records
                .iter()
                .zip(diags)
                .filter(|(r, _)| r.parity == p)
                .collect()
        };
        let (even, odd) = (series(Parity::Even), series(Parity::Odd));
        let mi = |s: &[(&EpochRecord, &EpochDiagnostics)]| mi_lifetime(s, cfg.target_mi, cfg.max_cycles);
        let ber = |s: &[(&EpochRecord, &EpochDiagnostics)]| ber_lifetime(s, cfg.ber_limit, cfg.max_cycles);
        let (le, lo) = (mi(&even), mi(&odd));
        let (be, bo) = (ber(&even), ber(&odd));
        let alpha = |s: &[(&EpochRecord, &EpochDiagnostics)], first: bool| {
            let r = if first { s.first() } else { s.last() };
            r.map(|(r, _)| r.alpha).unwrap_or(f64::NAN)
        };
        RunSummary {
            preset: cfg.preset.clone(),
            seed: cfg.seed,
            config_hash: cfg.hash(),
            lifetime_even: le,
            lifetime_odd: lo,
            lifetime: Lifetime::min(le, lo),
            ber_lifetime_even: be,
            ber_lifetime_odd: bo,
            ber_lifetime: Lifetime::min(be, bo),
            initial_alpha: [alpha(&even, true), alpha(&odd, true)],
            final_alpha: [alpha(&even, false), alpha(&odd, false)],
            coincident_epochs: diags
                .chunks(2)
                .filter(|pair| pair.iter().any(|d| d.coincident))
                .count(),
            epochs: even.len(),
            elapsed_s,
        }
    }
}

/// First crossing of the target, interpolated linearly between the last
/// epoch above it (using the information of the block written after it)
/// and the first epoch below it.
fn mi_lifetime(s: &[(&EpochRecord, &EpochDiagnostics)], target: f64, max_cycles: u64) -> Lifetime {
    for k in 0..s.len() {
        if s[k].0.mi_true < target {
            if k == 0 {
                return Lifetime { cycles: 0, censored: false };
            }
            let (prev, prev_diag) = s[k - 1];
            let start = prev_diag.mi_next;
            let span = (s[k].0.cycle - prev.cycle) as f64;
            let frac = if start > s[k].0.mi_true {
                ((start - target) / (start - s[k].0.mi_true)).clamp(0.0, 1.0)
            } else {
                1.0
            };
            return Lifetime {
                cycles: prev.cycle + (frac * span).ceil() as u64,
                censored: false,
            };
        }
    }
    Lifetime { cycles: max_cycles, censored: true }
}

/// First epoch at or above the BER limit, interpolated on a log scale.
fn ber_lifetime(s: &[(&EpochRecord, &EpochDiagnostics)], limit: f64, max_cycles: u64) -> Lifetime {
    let lg = |x: f64| x.max(1e-15).log10();
    for k in 0..s.len() {
        let r = s[k].0;
        if r.ber >= limit {
            if k == 0 {
                return Lifetime { cycles: 0, censored: false };
            }
            let prev = s[k - 1].0;
            let span = (r.cycle - prev.cycle) as f64;
            let (a, b) = (lg(prev.ber), lg(r.ber));
            let frac = if b > a { ((lg(limit) - a) / (b - a)).clamp(0.0, 1.0) } else { 1.0 };
            return Lifetime {
                cycles: prev.cycle + (frac * span).ceil() as u64,
                censored: false,
            };
        }
    }
    Lifetime { cycles: max_cycles, censored: true }
}
