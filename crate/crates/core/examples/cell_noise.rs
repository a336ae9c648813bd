//! Programs a few thousand cells at one wear state and prints the sample
//! moments of each written level.
use flash_dva::channel::{sample_cell_noise, ChannelParams, ChannelState, DegradedNoiseParams, ParityTag};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> flash_dva::Result<()> {
    let params = ChannelParams::paper_appendix();
    let state = ChannelState {
        v_acc: 4000.0,
        pe_count: 1500,
        parity: ParityTag::Even,
    };
    let noise = DegradedNoiseParams::at(&params, &state)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    let mut sums = [(0.0f64, 0.0f64, 0usize); 4];
    let mut wrong = 0;
    for i in 0..40_000 {
        let level = i % 4;
        let w = sample_cell_noise(&params, &noise, level, &params.default_thresholds, &mut rng);
        if w.written_level != level {
            wrong += 1;
        }
        let s = &mut sums[level];
        s.0 += w.voltage;
        s.1 += w.voltage * w.voltage;
        s.2 += 1;
    }
    for (l, (s, s2, n)) in sums.iter().enumerate() {
        let m = s / *n as f64;
        println!("level {l}: mean {m:.3} V, sd {:.3} V", (s2 / *n as f64 - m * m).sqrt());
    }
    println!("cells written at the wrong level: {wrong}");
    Ok(())
}
