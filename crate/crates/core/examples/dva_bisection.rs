//! Smallest write scale that keeps mutual information at the setpoint, for
//! a fresh and a worn channel.
use flash_dva::channel::{ChannelParams, ChannelState, Parity, ParityTag};
use flash_dva::controller::{dva_scale_factor, DvaConfig, VoltageAllocation};
use flash_dva::info::{build_conditional_pdfs, mutual_information_grid};

fn main() -> flash_dva::Result<()> {
    let params = ChannelParams::paper_appendix();
    let config = DvaConfig::default();
    for v_acc in [0.0, 1500.0, 4000.0, 8000.0] {
        let state = ChannelState {
            v_acc,
            pe_count: (v_acc / 1.2) as u64,
            parity: ParityTag::Even,
        };
        let mi_at = |alpha: f64| {
            let alloc = VoltageAllocation::scaled(alpha, &params.default_thresholds)?;
            Ok(mutual_information_grid(&build_conditional_pdfs(&params, &state, &alloc, Parity::Even)?))
        };
        let out = dva_scale_factor(mi_at, &config)?;
        println!(
            "v_acc {v_acc:>6.0}: alpha {:.4} ({:?}), MI {:.4}, {} evaluations",
            out.alpha,
            out.saturation,
            out.mi.unwrap_or(f64::NAN),
            out.evaluations
        );
    }
    Ok(())
}
