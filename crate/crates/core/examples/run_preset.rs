//! Runs a built-in experiment on a reduced array and prints its summary.
//!
//! cargo run --release --example run_preset -- fig8 2000
use flash_dva::channel::Parity;
use flash_dva::harness::{preset, run_experiment};

fn main() -> flash_dva::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "fixed-model2".into());
    let mut cfg = preset(&name)?;
    if let Some(cycles) = args.next() {
        cfg.max_cycles = cycles.parse().expect("cycle count");
    }
    cfg.wordlines = 33;

    let run = run_experiment(&cfg)?;
    for rec in run.parity_records(Parity::Even).step_by(5) {
        println!("{:>5}  MI {:.4}  alpha {:.3}  BER {:.2e}", rec.cycle, rec.mi_true, rec.alpha, rec.ber);
    }
    let s = &run.summary;
    println!(
        "lifetime even {} odd {} (config {})",
        s.lifetime_even.cycles,
        s.lifetime_odd.cycles,
        &s.config_hash[..12]
    );
    Ok(())
}
