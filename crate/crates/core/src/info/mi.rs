use super::grid::LevelPDFs;
use super::hermite::QuadratureRule;
use super::mixture::GaussianMixtureModel;
use crate::math::log_sum_exp;

/// `h(Y) - h(Y|X)` in bits, by the trapezoid rule on the density grid.
/// Points where a level's density vanishes contribute nothing.
pub fn mutual_information_grid(pdfs: &LevelPDFs) -> f64 {
    let n = pdfs.grid.n_points;
    let f = &pdfs.densities;
    let p = &pdfs.priors;
    let mut total = 0.0;
    for i in 0..n {
        let fy: f64 = (0..4).map(|l| p[l] * f[l][i]).sum();
        if fy <= 0.0 {
            continue;
        }
        let mut v = 0.0;
        for l in 0..4 {
            if f[l][i] > 0.0 && p[l] > 0.0 {
                v += p[l] * f[l][i] * (f[l][i] / fy).log2();
            }
        }
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        total += w * v;
    }
    (total * pdfs.grid.step).clamp(0.0, 2.0)
}

/// Mutual information of an equal-prior Gaussian mixture channel, each
/// component expectation taken with Gauss-Hermite quadrature.
pub fn mutual_information_gh(model: &GaussianMixtureModel, rule: &QuadratureRule) -> f64 {
    let ln_quarter = 0.25f64.ln();
    let mut acc = 0.0;
    let mut terms = [0.0; 4];
    for i in 0..4 {
        let (xi, si) = (model.means[i], model.sigmas[i]);
        for (z, w) in rule.nodes.iter().zip(&rule.weights) {
            let y = std::f64::consts::SQRT_2 * si * z + xi;
            for j in 0..4 {
                terms[j] = if j == i {
                    ln_quarter
                } else {
                    let sj = model.sigmas[j];
                    let d = y - model.means[j];
                    (si / (4.0 * sj)).ln() + z * z - d * d / (2.0 * sj * sj)
                };
            }
            acc += w * log_sum_exp(&terms);
        }
    }
    let bits = -acc / (4.0 * std::f64::consts::PI.sqrt() * std::f64::consts::LN_2);
    bits.clamp(0.0, 2.0)
}

#[cfg(test)]
mod tests {
    use super::super::grid::VoltageGrid;
    use super::super::hermite::hermite_rule;
    use super::*;

    fn mixture(means: [f64; 4], sigmas: [f64; 4]) -> GaussianMixtureModel {
        GaussianMixtureModel::new(means, sigmas).unwrap()
    }

    #[test]
    fn identical_levels_carry_nothing() {
        let m = mixture([1.0; 4], [0.3; 4]);
        let p = LevelPDFs::from_mixture(&m, VoltageGrid::default()).unwrap();
        assert!(mutual_information_grid(&p).abs() < 1e-9);
        assert!(mutual_information_gh(&m, &hermite_rule(32).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn disjoint_rectangles_give_two_bits() {
        let g = VoltageGrid::new(0.0, 4.0, 0.01).unwrap();
        let densities = std::array::from_fn(|l| {
            (0..g.n_points)
                .map(|i| {
                    let y = g.point(i);
                    if y > l as f64 + 0.005 && y < l as f64 + 0.995 { 1.0 / 0.99 } else { 0.0 }
                })
                .collect()
        });
        let p = LevelPDFs::new(g, densities, [0.25; 4]).unwrap();
        assert!((mutual_information_grid(&p) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn far_apart_levels_give_two_bits() {
        let m = mixture([0.0, 100.0, 200.0, 300.0], [1.0; 4]);
        let mi = mutual_information_gh(&m, &hermite_rule(32).unwrap());
        assert!((mi - 2.0).abs() < 1e-9, "{mi}");
    }

    #[test]
    fn grid_and_quadrature_agree() {
        let rule = hermite_rule(32).unwrap();
        for (means, sigmas) in [
            ([0.0, 1.0, 2.0, 3.0], [0.1; 4]),
            ([2.8, 5.2, 6.4, 7.86], [0.35, 0.05, 0.05, 0.05]),
            ([1.0, 1.9, 2.4, 2.9], [0.35, 0.2, 0.15, 0.1]),
        ] {
            let m = mixture(means, sigmas);
            let p = LevelPDFs::from_mixture(&m, VoltageGrid::default()).unwrap();
            let (a, b) = (mutual_information_grid(&p), mutual_information_gh(&m, &rule));
            assert!((a - b).abs() < 1e-3, "{means:?}: grid {a} gh {b}");
        }
    }

    #[test]
    fn translation_invariance() {
        let rule = hermite_rule(32).unwrap();
        let m = mixture([1.0, 2.0, 2.7, 3.5], [0.3, 0.2, 0.2, 0.25]);
        let shifted = mixture(m.means.map(|x| x + 3.3), m.sigmas);
        assert!((mutual_information_gh(&m, &rule) - mutual_information_gh(&shifted, &rule)).abs() < 1e-12);
        let g = VoltageGrid::default();
        let a = mutual_information_grid(&LevelPDFs::from_mixture(&m, g).unwrap());
        let b = mutual_information_grid(&LevelPDFs::from_mixture(&shifted, g).unwrap());
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn gaussian_mi_grows_with_scale() {
        let rule = hermite_rule(32).unwrap();
        let t = [2.8, 5.2, 6.4, 7.86];
        let sig = [0.35, 0.05, 0.05, 0.05];
        let mut prev = 0.0;
        for k in 1..=50 {
            let alpha = k as f64 / 50.0;
            let mi = mutual_information_gh(&GaussianMixtureModel::scaled_levels(alpha, &t, sig), &rule);
            assert!(mi >= prev - 1e-12, "alpha {alpha}: {mi} < {prev}");
            prev = mi;
        }
    }
}
