//! Faddeeva function w(z) = exp(-z^2) erfc(-iz) for Im z >= 0.
//!
//! Single rational approximation over the whole upper half-plane after
//! Weideman, SIAM J. Numer. Anal. 31, 1497 (1994): with L = sqrt(N/sqrt 2)
//! and Z = (L+iz)/(L-iz),
//!
//!   w(z) ~ 2 P(Z) / (L-iz)^2 + (1/sqrt pi) / (L-iz),
//!
//! where P is a degree-N-1 polynomial whose coefficients are Fourier
//! coefficients of exp(-t^2)(L^2+t^2) under the tangent map. N = 48 keeps
//! the relative error of the complex value near machine precision
//! everywhere in the closed upper half-plane.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

const N_TERMS: usize = 48;
const INV_SQRT_PI: f64 = 0.564_189_583_547_756_3;

struct Approximation {
    /// Polynomial coefficients, highest power first.
    coeffs: [f64; N_TERMS],
    length: f64,
}

fn build_approximation() -> Approximation {
    let n = N_TERMS;
    let m = 2 * n;
    let m2 = 2 * m;
    let length = (n as f64 / std::f64::consts::SQRT_2).sqrt();

    // samples of f(theta) = exp(-t^2)(L^2 + t^2), t = L tan(theta/2),
    // theta_k = k pi / m for k = -m+1 .. m-1, prepended with f(-pi) = 0
    let mut samples = vec![0.0f64; m2];
    for (idx, k) in (-(m as i64 - 1)..m as i64).enumerate() {
        let theta = k as f64 * std::f64::consts::PI / m as f64;
        let t = length * (theta / 2.0).tan();
        samples[idx + 1] = (-t * t).exp() * (length * length + t * t);
    }
    samples.rotate_left(m); // fftshift for even length

    // real part of the DFT, a_j = (1/m2) sum_k g_k exp(-2 pi i j k / m2)
    let mut coeffs = [0.0f64; N_TERMS];
    for j in 1..=n {
        let mut acc = 0.0;
        for (k, &g) in samples.iter().enumerate() {
            let angle = -2.0 * std::f64::consts::PI * (j * k) as f64 / m2 as f64;
            acc += g * angle.cos();
        }
        // reversed so coeffs[0] multiplies the highest power
        coeffs[n - j] = acc / m2 as f64;
    }
    Approximation { coeffs, length }
}

fn approximation() -> &'static Approximation {
    static APPROX: OnceLock<Approximation> = OnceLock::new();
    APPROX.get_or_init(build_approximation)
}

/// w(z) for Im z >= 0; rejects non-finite input and Im z < 0.
pub fn faddeeva(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::NonFinite("faddeeva argument"));
    }
    if z.im < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "faddeeva is evaluated in the upper half-plane only, got Im z = {}",
            z.im
        )));
    }
    Ok(faddeeva_upper(z))
}

/// w(z) assuming Im z >= 0 (unchecked).
pub(crate) fn faddeeva_upper(z: Complex64) -> Complex64 {
    let a = approximation();
    let iz = Complex64::new(-z.im, z.re);
    let denom = a.length - iz;
    let big_z = (a.length + iz) / denom;
    let mut p = Complex64::default();
    for &c in a.coeffs.iter() {
        p = p * big_z + c;
    }
    let mut w = 2.0 * p / (denom * denom) + INV_SQRT_PI / denom;
    if z.im == 0.0 {
        // on the real axis Re w(x) = exp(-x^2) exactly
        w.re = (-z.re * z.re).exp();
    }
    w
}

/// Scaled complementary error function erfcx(x) = exp(x^2) erfc(x).
pub fn erfcx(x: f64) -> f64 {
    if x >= 0.0 {
        faddeeva_upper(Complex64::new(0.0, x)).re
    } else {
        2.0 * (x * x).exp() - erfcx(-x)
    }
}

/// Complementary error function for real argument.
pub fn erfc(x: f64) -> f64 {
    if x >= 0.0 {
        (-x * x).exp() * erfcx(x)
    } else {
        2.0 - erfc(-x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: Maclaurin series w(z) = sum (iz)^n / Gamma(n/2+1)
    /// for |z| <= 3, Gauss continued fraction in i/sqrt(pi)/(z - ...) for
    /// larger arguments.
    fn w_oracle(z: Complex64) -> Complex64 {
        if z.norm() <= 3.0 {
            let iz = Complex64::new(-z.im, z.re);
            let mut term = Complex64::new(1.0, 0.0);
            let mut sum = Complex64::default();
            // Gamma(n/2+1) via recursion on even/odd split
            let mut gamma_even = 1.0; // Gamma(1), n=0
            let mut gamma_odd = 0.5 * std::f64::consts::PI.sqrt(); // Gamma(3/2), n=1
            for n in 0..200 {
                let gamma = if n % 2 == 0 { gamma_even } else { gamma_odd };
                sum += term / gamma;
                if n % 2 == 0 {
                    gamma_even *= n as f64 / 2.0 + 1.0;
                } else {
                    gamma_odd *= n as f64 / 2.0 + 1.0;
                }
                term *= iz;
                if term.norm() / gamma < 1e-20 && n > 8 {
                    break;
                }
            }
            sum
        } else {
            // w(z) = (i/sqrt(pi)) / (z - (1/2)/(z - 1/(z - (3/2)/(z - ...))))
            let mut cf = Complex64::default();
            for k in (1..=60).rev() {
                cf = Complex64::new(k as f64 / 2.0, 0.0) / (z - cf);
            }
            Complex64::new(0.0, INV_SQRT_PI) / (z - cf)
        }
    }

    #[test]
    fn trivial_anchors() {
        let w0 = faddeeva(Complex64::new(0.0, 0.0)).unwrap();
        assert!((w0 - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        // w(i) = e * erfc(1)
        let wi = faddeeva(Complex64::new(0.0, 1.0)).unwrap();
        assert!((wi.re - 0.427_583_576_155_807).abs() < 1e-12, "got {wi}");
        assert!(wi.im.abs() < 1e-15);
    }

    #[test]
    fn matches_series_and_continued_fraction_oracle() {
        let pts = [
            Complex64::new(0.3, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 1.0),
            Complex64::new(2.4725, 0.009655),
            Complex64::new(0.5, 3.0),
            Complex64::new(-2.0, 0.7),
            Complex64::new(6.0, 0.01),
            Complex64::new(0.0, 14.0),
            Complex64::new(40.0, 2.0),
            Complex64::new(-120.0, 0.5),
        ];
        for z in pts {
            let got = faddeeva(z).unwrap();
            let want = w_oracle(z);
            let rel = (got - want).norm() / want.norm();
            assert!(rel < 1e-6, "z={z}: got {got}, oracle {want}, rel {rel:.2e}");
        }
    }

    #[test]
    fn asymptotic_tail_on_real_axis() {
        // |z| large along the real axis: w(z) ~ i/(sqrt(pi) z)
        let z = Complex64::new(100.0, 0.0);
        let got = faddeeva(z).unwrap();
        let asym = Complex64::new(0.0, INV_SQRT_PI / 100.0);
        assert!((got - asym).norm() / asym.norm() < 1e-4);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(faddeeva(Complex64::new(f64::NAN, 0.0)).is_err());
        assert!(faddeeva(Complex64::new(0.0, -0.1)).is_err());
    }

    #[test]
    fn real_error_functions() {
        assert!((erfc(1.0) - 0.157_299_207_050_285_13).abs() < 1e-15);
        assert!((erfc(-1.0) - (2.0 - 0.157_299_207_050_285_13)).abs() < 1e-15);
        assert!((erfcx(0.0) - 1.0).abs() < 1e-15);
        // erfcx stays finite where erfc underflows
        let big = erfcx(30.0);
        assert!(big > 0.0 && big < 0.02);
    }
}
