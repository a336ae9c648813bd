//! Builds the exact read densities of a worn channel and compares grid
//! mutual information against the Gaussian approximation.
use flash_dva::channel::{ChannelParams, ChannelState, Parity, ParityTag};
use flash_dva::controller::VoltageAllocation;
use flash_dva::info::{
    build_conditional_pdfs, hermite_rule, mutual_information_gh, mutual_information_grid,
    DEFAULT_HERMITE_ORDER,
};

fn main() -> flash_dva::Result<()> {
    let params = ChannelParams::paper_appendix();
    let rule = hermite_rule(DEFAULT_HERMITE_ORDER)?;
    let alloc = VoltageAllocation::scaled(1.0, &params.default_thresholds)?;
    for v_acc in [0.0, 2000.0, 6000.0, 10000.0] {
        let state = ChannelState {
            v_acc,
            pe_count: (v_acc / 2.77) as u64,
            parity: ParityTag::Even,
        };
        for parity in Parity::ALL {
            let pdfs = build_conditional_pdfs(&params, &state, &alloc, parity)?;
            let gauss = pdfs.moment_matched()?;
            println!(
                "v_acc {v_acc:>6.0} {:<4} grid MI {:.5}  gaussian MI {:.5}  means {:.2?}",
                parity.name(),
                mutual_information_grid(&pdfs),
                mutual_information_gh(&gauss, &rule),
                gauss.means
            );
        }
    }
    Ok(())
}
