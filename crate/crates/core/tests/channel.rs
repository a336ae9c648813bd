//! Monte-Carlo oracles for the density model, the error-rate integral and the
//! estimator, checked against cells simulated on the lattice.

use flash_dva::channel::{ChannelParams, ChannelState, Parity, ParityTag};
use flash_dva::controller::{dta_boundaries, dva_scale_factor, fixed_read_boundaries, DvaConfig, VoltageAllocation};
use flash_dva::estimation::{equal_prob_boundaries, lm_fit, prior_model, BOUNDARY_TOL, DEFAULT_BINS, SEARCH_RANGE};
use flash_dva::info::{
    build_conditional_pdfs, hermite_rule, mutual_information_gh, mutual_information_grid, raw_ber,
    DensityModel, GrayMap, ReadChannel, VoltageGrid, DEFAULT_C2C_SAMPLES,
};
use flash_dva::lattice::{CellLattice, WriteOrder, WriteRole};
use flash_dva::math::substream;

fn worn(v_acc: f64, pe_count: u64) -> ChannelState {
    ChannelState { v_acc, pe_count, parity: ParityTag::Even }
}

/// Programs the lattice `rounds` times at a frozen wear state and returns,
/// per measured even cell, the number of wrong bits under `reads`.
fn bit_errors(
    params: &ChannelParams,
    alloc: &VoltageAllocation,
    state: ChannelState,
    reads: &[f64; 3],
    rounds: usize,
    seed: u64,
) -> Vec<u32> {
    let gray = GrayMap::default();
    let mut lattice = CellLattice::new(65, 2050).unwrap();
    let mut rng = substream(seed, &[]);
    let mut out = Vec::new();
    for _ in 0..rounds {
        for p in Parity::ALL {
            lattice.set_state(p, ChannelState { parity: p.into(), ..state });
        }
        lattice.program_cycle(params, alloc, alloc, &mut rng).unwrap();
        for p in Parity::ALL {
            lattice.set_state(p, ChannelState { parity: p.into(), ..state });
        }
        let readout = lattice.read_voltages(params, &mut rng).unwrap();
        let cells: Vec<usize> = lattice.measured_cells(Parity::Even).collect();
        for idx in cells {
            let v = readout.voltages[idx];
            let decided = reads.iter().filter(|&&b| v > b).count();
            out.push(gray.hamming(decided, lattice.intended_level(idx)));
        }
    }
    out
}

fn mean_and_se(per_cell: &[u32]) -> (f64, f64) {
    let n = per_cell.len() as f64;
    let x: Vec<f64> = per_cell.iter().map(|&e| e as f64 / 2.0).collect();
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn error_rate_integral_matches_bit_counting() {
    let params = ChannelParams::paper_appendix();
    let alloc = VoltageAllocation::scaled(1.0, &params.default_thresholds).unwrap();
    let state = worn(550.0, 200);
    let reads = fixed_read_boundaries(&alloc.thresholds);
    let pdfs = build_conditional_pdfs(&params, &state, &alloc, Parity::Even).unwrap();
    let predicted = raw_ber(&pdfs, &reads, &GrayMap::default()).unwrap();

    let (measured, se) = mean_and_se(&bit_errors(&params, &alloc, state, &reads, 4, 17));
    assert!(predicted > 1e-3, "operating point too clean to be informative: {predicted}");
    assert!(
        (measured - predicted).abs() <= 3.0 * se,
        "integral {predicted:.5e} vs counted {measured:.5e} +/- {se:.1e}"
    );
}

#[test]
fn fresh_channel_with_adaptive_reads_is_almost_error_free() {
    let params = ChannelParams::paper_appendix();
    let alloc = VoltageAllocation::scaled(1.0, &params.default_thresholds).unwrap();
    let state = worn(0.0, 0);
    let pdfs = build_conditional_pdfs(&params, &state, &alloc, Parity::Even).unwrap();
    let reads = dta_boundaries(&pdfs.moment_matched().unwrap());

    // 153 rounds of 65536 measured even cells: just over 10^7 cells.
    let errs = bit_errors(&params, &alloc, state, &reads, 153, 23);
    assert!(errs.len() >= 10_000_000);
    let (ber, _) = mean_and_se(&errs);
    assert!(ber < 1e-3, "fresh BER {ber:.3e}");
    assert!(raw_ber(&pdfs, &reads, &GrayMap::default()).unwrap() < 1e-3);
}

#[test]
fn mid_life_fit_supports_the_information_estimate() {
    let params = ChannelParams::paper_appendix();
    let alpha = 0.6;
    let alloc = VoltageAllocation::scaled(alpha, &params.default_thresholds).unwrap();
    let state = worn(2000.0, 1600);
    let pdfs = build_conditional_pdfs(&params, &state, &alloc, Parity::Even).unwrap();
    let truth_mi = mutual_information_grid(&pdfs);

    let mut lattice = CellLattice::new(65, 2050).unwrap();
    let mut rng = substream(31, &[]);
    for _ in 0..2 {
        for p in Parity::ALL {
            lattice.set_state(p, ChannelState { parity: p.into(), ..state });
        }
        if !lattice.is_programmed() {
            lattice.program_cycle(&params, &alloc, &alloc, &mut rng).unwrap();
        }
    }
    let readout = lattice.read_voltages(&params, &mut rng).unwrap();

    let guess = prior_model(&alloc.thresholds);
    let bounds = equal_prob_boundaries(&pdfs.moment_matched().unwrap(), DEFAULT_BINS, SEARCH_RANGE, BOUNDARY_TOL).unwrap();
    let hist = lattice.measure_histogram(&readout, &bounds, Parity::Even).unwrap();
    let fit = lm_fit(&hist, &guess).unwrap();
    let fit_mi = mutual_information_gh(&fit.model, &hermite_rule(32).unwrap());

    assert!(fit.residual < 1e-3, "residual {}", fit.residual);
    assert!((fit_mi - truth_mi).abs() < 0.05, "fit {fit_mi:.4} vs true {truth_mi:.4}");
}

#[test]
fn first_written_parity_needs_the_larger_scale() {
    let params = ChannelParams::paper_appendix();
    let density = DensityModel::new(params.clone(), VoltageGrid::default(), DEFAULT_C2C_SAMPLES, 3).unwrap();
    let state = worn(1500.0, 2400);
    let config = DvaConfig::default();
    let alpha_for = |role: WriteRole| {
        let eval = |a: f64| {
            let alloc = VoltageAllocation::scaled(a, &params.default_thresholds)?;
            Ok(mutual_information_grid(&density.pdfs(&ReadChannel::symmetric(state, alloc, role))?))
        };
        dva_scale_factor(eval, &config).unwrap().alpha
    };
    let first = alpha_for(WriteRole::First);
    let second = alpha_for(WriteRole::Second);
    assert!(first > second, "first {first} second {second}");
    assert_eq!(WriteOrder::EvenFirst.role_of(Parity::Even), WriteRole::First);
}

#[test]
fn alternating_order_keeps_parities_level() {
    // Both parities draw from the same allocation, so their accumulated
    // voltages differ only by the sampling noise of the drawn levels.
    let alloc = VoltageAllocation::scaled(1.0, &ChannelParams::paper_appendix().default_thresholds).unwrap();
    let mut lattice = CellLattice::new(9, 130).unwrap();
    let mut rng = substream(41, &[]);
    let cycles = 200_000u64;
    for c in 0..cycles {
        lattice.set_write_order(WriteOrder::alternating(c / 100));
        lattice.wear_cycle(&alloc, &alloc, &mut rng);
    }
    let even = lattice.state(Parity::Even).v_acc;
    let odd = lattice.state(Parity::Odd).v_acc;

    let levels = alloc.thresholds.map(|t| t - alloc.thresholds[0]);
    let mean = levels.iter().sum::<f64>() / 4.0;
    let sd = (levels.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / 4.0).sqrt();
    let per_parity = (lattice.len() / 2) as f64;
    let walk_sd = sd / per_parity.sqrt() * (cycles as f64).sqrt();

    for v in [even, odd] {
        assert!((v / cycles as f64 - mean).abs() <= 4.0 * walk_sd / cycles as f64);
    }
    assert!((even - odd).abs() <= 4.0 * std::f64::consts::SQRT_2 * walk_sd, "{even} vs {odd}");
    assert_eq!(lattice.state(Parity::Even).pe_count, cycles);
}
