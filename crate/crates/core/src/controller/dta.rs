use crate::info::GaussianMixtureModel;

/// Read boundaries where adjacent equally likely components have equal
/// density, falling back to the midpoint when no crossing lies between the
/// two means.
pub fn dta_boundaries(model: &GaussianMixtureModel) -> [f64; 3] {
    std::array::from_fn(|l| {
        equal_likelihood_crossing(
            model.means[l],
            model.sigmas[l],
            model.means[l + 1],
            model.sigmas[l + 1],
        )
    })
}

fn equal_likelihood_crossing(m1: f64, s1: f64, m2: f64, s2: f64) -> f64 {
    let mid = 0.5 * (m1 + m2);
    if !(m2 > m1) {
        return mid;
    }
    // log N(x; m1, s1) - log N(x; m2, s2) = a x^2 + b x + c
    let (v1, v2) = (s1 * s1, s2 * s2);
    let a = 0.5 / v2 - 0.5 / v1;
    let b = m1 / v1 - m2 / v2;
    let c = 0.5 * m2 * m2 / v2 - 0.5 * m1 * m1 / v1 + (s2 / s1).ln();
    let inside = |x: f64| x > m1 && x < m2;
    let scale = a.abs().max(b.abs() / (m1.abs() + m2.abs()).max(1.0));
    if a.abs() <= 1e-12 * scale {
        let x = -c / b;
        return if inside(x) { x } else { mid };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return mid;
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let roots = [q / a, c / q];
    roots
        .into_iter()
        .filter(|x| x.is_finite() && inside(*x))
        .min_by(|x, y| (x - mid).abs().total_cmp(&(y - mid).abs()))
        .unwrap_or(mid)
}

/// Midpoints between adjacent write levels.
pub fn fixed_read_boundaries(thresholds: &[f64; 4]) -> [f64; 3] {
    std::array::from_fn(|l| 0.5 * (thresholds[l] + thresholds[l + 1]))
}
