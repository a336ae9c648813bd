//! Cycles a small wordline array and reads back a histogram per parity.
use flash_dva::channel::{ChannelParams, Parity};
use flash_dva::controller::{fixed_read_boundaries, VoltageAllocation};
use flash_dva::lattice::CellLattice;
use flash_dva::math::substream;

fn main() -> flash_dva::Result<()> {
    let params = ChannelParams::paper_appendix();
    let alloc = VoltageAllocation::scaled(1.0, &params.default_thresholds)?;
    let mut lattice = CellLattice::new(33, 514)?;
    let mut rng = substream(3, &[]);

    for _ in 0..499 {
        lattice.wear_cycle(&alloc, &alloc, &mut rng);
    }
    lattice.program_cycle(&params, &alloc, &alloc, &mut rng)?;
    let readout = lattice.read_voltages(&params, &mut rng)?;

    let bounds: Vec<f64> = (0..=24).map(|i| -1.0 + 0.4 * i as f64).collect();
    for parity in Parity::ALL {
        let h = lattice.measure_histogram(&readout, &bounds, parity)?;
        println!("{} cells, v_acc {:.1}", parity.name(), lattice.state(parity).v_acc);
        for (i, c) in h.counts.iter().enumerate() {
            let lo = if i == 0 { f64::NEG_INFINITY } else { bounds[i - 1] };
            println!("  {lo:>6.1} {c:>6} {}", "#".repeat((*c as usize) / 80));
        }
    }
    let mid = fixed_read_boundaries(&alloc.thresholds);
    let h = lattice.measure_histogram(&readout, &mid, Parity::Even)?;
    println!("even cells per decision region: {:?}", h.counts);
    Ok(())
}
