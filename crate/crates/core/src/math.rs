//! Small numeric helpers shared across modules.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for every stochastic component of the simulator.
pub type SimRng = ChaCha8Rng;

pub(crate) const SQRT_2: f64 = std::f64::consts::SQRT_2;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
#[inline]
pub fn std_normal_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard normal CDF, evaluated through the complementary error function so
/// both tails keep full relative precision.
#[inline]
pub fn std_normal_cdf(z: f64) -> f64 {
    if z.is_infinite() {
        return if z > 0.0 { 1.0 } else { 0.0 };
    }
    0.5 * libm::erfc(-z / SQRT_2)
}

/// Upper tail Q(z) = 1 - Phi(z).
#[inline]
pub fn std_normal_tail(z: f64) -> f64 {
    std_normal_cdf(-z)
}

/// splitmix64 finalizer, used to derive independent stream seeds.
#[inline]
pub fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derives a generator for a named sub-stream of `seed`.
pub fn substream(seed: u64, tags: &[u64]) -> SimRng {
    let mut s = mix64(seed);
    for &t in tags {
        s = mix64(s ^ mix64(t.wrapping_add(0x51_7CC1_B727_220A)));
    }
    SimRng::seed_from_u64(s)
}

/// Natural log of the sum of exponentials, stable for large arguments.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}
