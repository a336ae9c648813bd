//! Raw bit error rate of midpoint reads versus reads placed at the
//! crossings of the current level densities.
use flash_dva::channel::{ChannelParams, ChannelState, Parity, ParityTag};
use flash_dva::controller::{dta_boundaries, fixed_read_boundaries, VoltageAllocation};
use flash_dva::info::{build_conditional_pdfs, raw_ber, GrayMap};

fn main() -> flash_dva::Result<()> {
    let params = ChannelParams::paper_appendix();
    let alloc = VoltageAllocation::scaled(1.0, &params.default_thresholds)?;
    let fixed = fixed_read_boundaries(&alloc.thresholds);
    let gray = GrayMap::default();
    println!("{:>7} {:>12} {:>12}", "cycle", "fixed", "adaptive");
    for cycle in [0u64, 200, 1000, 2000, 3000] {
        let state = ChannelState {
            v_acc: 2.765 * cycle as f64,
            pe_count: cycle,
            parity: ParityTag::Even,
        };
        let pdfs = build_conditional_pdfs(&params, &state, &alloc, Parity::Even)?;
        let adaptive = dta_boundaries(&pdfs.moment_matched()?);
        println!(
            "{cycle:>7} {:>12.3e} {:>12.3e}",
            raw_ber(&pdfs, &fixed, &gray)?,
            raw_ber(&pdfs, &adaptive, &gray)?
        );
    }
    Ok(())
}
