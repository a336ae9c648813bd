//! Write levels and read voltages restricted to a DAC grid.
use flash_dva::channel::ChannelParams;
use flash_dva::controller::{QuantGrid, QuantMode, VoltageAllocation};
use flash_dva::estimation::{collapse_coincident, equal_prob_boundaries, BOUNDARY_TOL, DEFAULT_BINS, SEARCH_RANGE};
use flash_dva::info::GaussianMixtureModel;

fn main() -> flash_dva::Result<()> {
    let base = ChannelParams::paper_appendix().default_thresholds;
    let alpha = 0.37;
    let model = GaussianMixtureModel::scaled_levels(alpha, &base, [0.35, 0.06, 0.06, 0.06]);
    let reads = equal_prob_boundaries(&model, DEFAULT_BINS, SEARCH_RANGE, BOUNDARY_TOL)?;
    println!("exact levels {:.4?}", VoltageAllocation::scaled(alpha, &base)?.thresholds);
    for n in [64, 128, 256] {
        let grid = QuantGrid::standard(n)?;
        let alloc = VoltageAllocation::quantized(alpha, &base, &grid)?;
        let (snapped, coincident) = collapse_coincident(&grid.quantize(&reads, QuantMode::Nearest));
        println!(
            "{n:>3} levels (step {:.4} V): writes {:.4?}, {} distinct reads{}",
            grid.spacing(),
            alloc.thresholds,
            snapped.len(),
            if coincident { ", some coincide" } else { "" }
        );
    }
    Ok(())
}
