use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use super::degradation::DegradedNoiseParams;
use super::params::ChannelParams;

/// Outcome of programming one cell, before interference and retention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellWrite {
    pub written_level: usize,
    pub voltage: f64,
}

/// Programs one cell: draws the programming error (Model 2), then adds
/// level-dependent Gaussian programming noise and exponential wear-out noise
/// around the written level's intended voltage.
pub fn sample_cell_noise<R: Rng + ?Sized>(
    params: &ChannelParams,
    noise: &DegradedNoiseParams,
    intended_level: usize,
    thresholds: &[f64; 4],
    rng: &mut R,
) -> CellWrite {
    let written_level = if params.pe_active() {
        let u: f64 = rng.random();
        noise.pe_pmf.sample(intended_level, u)
    } else {
        intended_level
    };
    let sigma = params.programming_sigma(written_level);
    let z: f64 = rng.sample(StandardNormal);
    let e: f64 = rng.sample(Exp1);
    CellWrite {
        written_level,
        voltage: thresholds[written_level] + sigma * z + noise.lambda_w * e,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ChannelModel, ChannelState, NoiseComponents, ParityTag};
    use crate::math::substream;

    #[test]
    fn degenerate_noise_returns_intended_voltage() {
        let mut p = ChannelParams::paper_appendix().with_model(ChannelModel::Model1);
        p.components = NoiseComponents::none();
        let noise = DegradedNoiseParams::at(&p, &ChannelState::fresh(ParityTag::Even)).unwrap();
        let t = p.default_thresholds;
        let mut rng = substream(1, &[]);
        for level in 0..4 {
            let w = sample_cell_noise(&p, &noise, level, &t, &mut rng);
            assert_eq!(w.written_level, level);
            assert_eq!(w.voltage, t[level]);
        }
    }

    #[test]
    fn fresh_model2_rarely_misprograms() {
        // Largest fresh error probability is exp(-11.67) + exp(-19.22) ~ 8.6e-6
        // per write, so 1e6 draws should see only a handful.
        let p = ChannelParams::paper_appendix();
        let noise = DegradedNoiseParams::at(&p, &ChannelState::fresh(ParityTag::Even)).unwrap();
        let t = p.default_thresholds;
        let mut rng = substream(2, &[]);
        let n = 1_000_000;
        let mut wrong = 0;
        for i in 0..n {
            let l = i % 4;
            if sample_cell_noise(&p, &noise, l, &t, &mut rng).written_level != l {
                wrong += 1;
            }
        }
        assert!((wrong as f64) / (n as f64) < 3e-5, "{wrong}");
    }

    #[test]
    fn wearout_mean_matches_lambda() {
        let mut p = ChannelParams::paper_appendix().with_model(ChannelModel::Model1);
        p.components.programming = false;
        let state = ChannelState { v_acc: 5000.0, pe_count: 1800, parity: ParityTag::Odd };
        let noise = DegradedNoiseParams::at(&p, &state).unwrap();
        let t = p.default_thresholds;
        let mut rng = substream(3, &[]);
        let n = 1_000_000;
        let mut sum = 0.0;
        let mut min: f64 = f64::INFINITY;
        for _ in 0..n {
            let d = sample_cell_noise(&p, &noise, 1, &t, &mut rng).voltage - t[1];
            sum += d;
            min = min.min(d);
        }
        let mean = sum / n as f64;
        // exponential: std error = lambda / sqrt(n)
        let se = noise.lambda_w / (n as f64).sqrt();
        assert!((mean - noise.lambda_w).abs() < 3.0 * se, "{mean} vs {}", noise.lambda_w);
        assert!(min >= 0.0);
    }

    #[test]
    fn erased_state_is_noisier() {
        let p = ChannelParams::paper_appendix().with_model(ChannelModel::Model1);
        let noise = DegradedNoiseParams::at(&p, &ChannelState::fresh(ParityTag::Even)).unwrap();
        let t = p.default_thresholds;
        let mut rng = substream(4, &[]);
        let var = |level: usize, rng: &mut crate::math::SimRng| {
            let xs: Vec<f64> = (0..100_000)
                .map(|_| sample_cell_noise(&p, &noise, level, &t, rng).voltage)
                .collect();
            let m = xs.iter().sum::<f64>() / xs.len() as f64;
            xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64
        };
        let v0 = var(0, &mut rng);
        for level in 1..4 {
            assert!(v0 > var(level, &mut rng));
        }
    }
}
