//! Gauss-Hermite quadrature, integral of exp(-x^2) f(x) ~ sum w_i f(x_i).
//!
//! Golub-Welsch: nodes are the eigenvalues of the symmetric tridiagonal
//! Jacobi matrix (zero diagonal, off-diagonal sqrt(j/2)), computed with the
//! implicit-QL algorithm while accumulating only the first eigenvector
//! component, which gives the weights as sqrt(pi) * q0^2. Stable for
//! thousands of nodes.

use crate::error::{Error, Result};

/// Nodes (ascending) and weights of the n-point Gauss-Hermite rule.
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::BadNodeCount(0));
    }
    let mut d = vec![0.0f64; n]; // diagonal -> eigenvalues
    let mut e: Vec<f64> = (1..n).map(|j| (j as f64 / 2.0).sqrt()).collect();
    e.push(0.0);
    let mut q = vec![0.0f64; n]; // first row of the rotation product
    q[0] = 1.0;

    let eps = f64::EPSILON;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 64 {
                return Err(Error::InvalidParameter(format!(
                    "quadrature eigensolver failed to converge for n = {n}"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = q[i + 1];
                q[i + 1] = s * q[i] + c * f;
                q[i] = c * q[i] - s * f;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let mut nodes: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut weights: Vec<f64> = order.iter().map(|&i| sqrt_pi * q[i] * q[i]).collect();

    // enforce the exact symmetry of the rule
    for i in 0..n / 2 {
        let x = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        let w = 0.5 * (weights[n - 1 - i] + weights[i]);
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok((nodes, weights))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_point_rule_matches_tables() {
        // Abramowitz & Stegun 25.4.46
        let (x, w) = gauss_hermite(5).unwrap();
        let x_ref = [-2.020_182_870_456_086, -0.958_572_464_613_819, 0.0];
        let w_ref = [0.019_953_242_059_045_9, 0.393_619_323_152_241, 0.945_308_720_482_942];
        for i in 0..3 {
            assert!((x[i] - x_ref[i]).abs() < 1e-12, "node {i}: {}", x[i]);
            assert!((w[i] - w_ref[i]).abs() < 1e-12, "weight {i}: {}", w[i]);
        }
        assert_eq!(x[3], -x[1]);
        assert!((w[3] - w[1]).abs() < 1e-16);
    }

    #[test]
    fn moments_are_exact() {
        for n in [3usize, 7, 51, 101, 201, 401] {
            let (x, w) = gauss_hermite(n).unwrap();
            let m0: f64 = w.iter().sum();
            let m2: f64 = w.iter().zip(&x).map(|(w, x)| w * x * x).sum();
            let sqrt_pi = std::f64::consts::PI.sqrt();
            assert!((m0 - sqrt_pi).abs() < 1e-12 * sqrt_pi, "n={n}: m0={m0}");
            assert!((m2 - sqrt_pi / 2.0).abs() < 1e-11 * sqrt_pi, "n={n}: m2={m2}");
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn gaussian_expectation_converges() {
        // integral exp(-x^2) cos(2x) dx = sqrt(pi) exp(-1)
        let (x, w) = gauss_hermite(31).unwrap();
        let got: f64 = w.iter().zip(&x).map(|(w, x)| w * (2.0 * x).cos()).sum();
        let want = std::f64::consts::PI.sqrt() * (-1.0f64).exp();
        assert!((got - want).abs() < 1e-12);
    }
}
