//! Wear-out slope, retention shift and programming-error probabilities as
//! the device ages.
use flash_dva::channel::{prog_error_pmf, retention_stats, wearout_lambda, ChannelParams};

fn main() -> flash_dva::Result<()> {
    let p = ChannelParams::paper_appendix();
    let top = p.default_thresholds[3];
    let erased = p.default_thresholds[0];

    println!("{:>8} {:>10} {:>12} {:>10} {:>12}", "v_acc", "lambda", "ret_mean", "ret_sd", "p(1->3)");
    for (v_acc, pe) in [(0.0, 0), (300.0, 100), (1500.0, 500), (5500.0, 2000), (11000.0, 4000)] {
        let lambda = wearout_lambda(&p, v_acc)?;
        let ret = retention_stats(&p, v_acc, p.retention_t, top, erased)?;
        let pe = prog_error_pmf(&p, pe)?;
        println!(
            "{v_acc:>8.0} {lambda:>10.5} {:>12.4} {:>10.4} {:>12.3e}",
            ret.mean,
            ret.variance.sqrt(),
            pe.row(1)[3]
        );
    }
    Ok(())
}
