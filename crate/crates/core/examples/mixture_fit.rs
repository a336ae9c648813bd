//! Recovers a Gaussian mixture from nine equal-probability read bins.
use flash_dva::channel::ParityTag;
use flash_dva::estimation::{equal_prob_boundaries, lm_fit, BOUNDARY_TOL, DEFAULT_BINS, SEARCH_RANGE};
use flash_dva::info::GaussianMixtureModel;
use flash_dva::lattice::VoltageHistogram;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> flash_dva::Result<()> {
    let truth = GaussianMixtureModel::new([1.05, 2.02, 2.49, 3.05], [0.36, 0.07, 0.08, 0.09])?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cells: Vec<f64> = (0..1_000_000)
        .map(|i| {
            let l = i % 4;
            Normal::new(truth.means[l], truth.sigmas[l]).unwrap().sample(&mut rng)
        })
        .collect();

    // Reads placed from a slightly wrong guess, as after an epoch of drift.
    let guess = GaussianMixtureModel::new([1.1, 2.1, 2.6, 3.15], [0.3, 0.06, 0.06, 0.06])?;
    let bounds = equal_prob_boundaries(&guess, DEFAULT_BINS, SEARCH_RANGE, BOUNDARY_TOL)?;
    let hist = VoltageHistogram::from_samples(cells, &bounds, ParityTag::Combined)?;
    let fit = lm_fit(&hist, &guess)?;

    println!("status {:?} after {} iterations, residual {:.2e}", fit.status, fit.iterations, fit.residual);
    for l in 0..4 {
        println!(
            "level {l}: mean {:.4} (true {:.2}), sigma {:.4} (true {:.2})",
            fit.model.means[l], truth.means[l], fit.model.sigmas[l], truth.sigmas[l]
        );
    }
    Ok(())
}
