use crate::error::{FlashError, Result};

/// Nodes and weights integrating `exp(-z^2) f(z)` over the real line.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(z, w)| w * f(*z)).sum()
    }
}

pub const MAX_HERMITE_ORDER: usize = 128;

/// Gauss-Hermite rule of order `n` (nodes ascending). Roots are polished by
/// Newton iteration on the orthonormal Hermite recurrence.
pub fn hermite_rule(n: usize) -> Result<QuadratureRule> {
    if !(2..=MAX_HERMITE_ORDER).contains(&n) {
        return Err(FlashError::Argument(format!(
            "Gauss-Hermite order must lie in 2..={MAX_HERMITE_ORDER}, got {n}"
        )));
    }
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        for _ in 0..100 {
            let (p1, p2) = orthonormal_hermite(n, z, pim4);
            // derivative of the orthonormal polynomial
            let dz = p1 / ((2.0 * nf).sqrt() * p2);
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        let (_, p2) = orthonormal_hermite(n, z, pim4);
        let pp = (2.0 * nf).sqrt() * p2;
        nodes[i] = z;
        weights[i] = 2.0 / (pp * pp);
    }
    // mirror into ascending order
    let mut asc_nodes = vec![0.0; n];
    let mut asc_weights = vec![0.0; n];
    for i in 0..m {
        asc_nodes[i] = -nodes[i];
        asc_weights[i] = weights[i];
        asc_nodes[n - 1 - i] = nodes[i];
        asc_weights[n - 1 - i] = weights[i];
    }
    if n % 2 == 1 {
        asc_nodes[m - 1] = 0.0;
    }
    Ok(QuadratureRule {
        order: n,
        nodes: asc_nodes,
        weights: asc_weights,
    })
}

/// Values of the orthonormal Hermite functions of degree `n` and `n - 1`.
fn orthonormal_hermite(n: usize, z: f64, pim4: f64) -> (f64, f64) {
    let mut p1 = pim4;
    let mut p2 = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, p2)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT_PI: f64 = 1.772_453_850_905_516;

    #[test]
    fn order_two_closed_form() {
        let r = hermite_rule(2).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((r.nodes[0] + s).abs() < 1e-14 && (r.nodes[1] - s).abs() < 1e-14);
        for w in &r.weights {
            assert!((w - SQRT_PI / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn weights_sum_to_sqrt_pi() {
        for n in [8, 16, 32, 64, 100, 128] {
            let r = hermite_rule(n).unwrap();
            let s: f64 = r.weights.iter().sum();
            assert!((s - SQRT_PI).abs() < 1e-10, "n={n}: {s}");
        }
    }

    #[test]
    fn nodes_symmetric_and_sorted() {
        for n in [3, 7, 32, 33] {
            let r = hermite_rule(n).unwrap();
            for i in 0..n {
                assert!((r.nodes[i] + r.nodes[n - 1 - i]).abs() < 1e-12);
                assert!((r.weights[i] - r.weights[n - 1 - i]).abs() < 1e-14);
            }
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn exact_for_low_degree_polynomials() {
        let r = hermite_rule(8).unwrap();
        assert!((r.integrate(|z| z * z) - SQRT_PI / 2.0).abs() < 1e-13);
        // E[z^{2k}] under exp(-z^2): (2k-1)!! / 2^k * sqrt(pi), exact up to degree 15
        assert!((r.integrate(|z| z.powi(14)) - 135135.0 / 128.0 * SQRT_PI).abs() < 1e-8);
        assert!(r.integrate(|z| z.powi(15)).abs() < 1e-9);
    }

    /// Weight formula in terms of the physicists' polynomial:
    /// `w_i = 2^(n-1) n! sqrt(pi) / (n^2 H_{n-1}(x_i)^2)`, evaluated in logs.
    #[test]
    fn weights_match_closed_form() {
        for n in [3usize, 5, 10, 20] {
            let r = hermite_rule(n).unwrap();
            for (x, w) in r.nodes.iter().zip(&r.weights) {
                let (mut h0, mut h1) = (1.0f64, 2.0 * x);
                for k in 1..n - 1 {
                    let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
                    h0 = h1;
                    h1 = h2;
                }
                let h_prev = if n == 1 { h0 } else { h1 };
                let ln_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
                let ln_w = (n as f64 - 1.0) * 2f64.ln() + ln_fact + SQRT_PI.ln()
                    - 2.0 * (n as f64).ln()
                    - 2.0 * h_prev.abs().ln();
                assert!((ln_w.exp() / w - 1.0).abs() < 1e-9, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn rejects_unsupported_orders() {
        assert!(hermite_rule(1).is_err());
        assert!(hermite_rule(129).is_err());
    }
}
