//! Wigner 6-j symbols via the Racah sum formula.
//!
//! The triangle coefficients and the alternating sum are accumulated in
//! exact rational arithmetic (big-integer factorial ratios) and converted
//! to floating point only at the end, so there is no cancellation error.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Half-integer represented as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct TwoJ(i64);

fn parse_half_integer(name: &'static str, value: f64) -> Result<TwoJ> {
    let doubled = 2.0 * value;
    if !value.is_finite() || value < 0.0 || (doubled - doubled.round()).abs() > 1e-9 {
        return Err(Error::InvalidHalfInteger { name, value });
    }
    Ok(TwoJ(doubled.round() as i64))
}

fn factorial(n: i64) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= k;
    }
    acc
}

/// Triangle rule for doubled arguments, including the integer-perimeter
/// requirement.
fn triangle_ok(a: TwoJ, b: TwoJ, c: TwoJ) -> bool {
    (a.0 + b.0 + c.0) % 2 == 0 && c.0 >= (a.0 - b.0).abs() && c.0 <= a.0 + b.0
}

/// Triangle coefficient Delta(a,b,c) as an exact rational.
fn triangle_coefficient(a: TwoJ, b: TwoJ, c: TwoJ) -> BigRational {
    let num = factorial((a.0 + b.0 - c.0) / 2)
        * factorial((a.0 - b.0 + c.0) / 2)
        * factorial((-a.0 + b.0 + c.0) / 2);
    let den = factorial((a.0 + b.0 + c.0) / 2 + 1);
    BigRational::new(num, den)
}

/// Wigner 6-j symbol {j1 j2 j3; j4 j5 j6}.
///
/// Arguments are non-negative half-integers; anything else is rejected.
/// Returns 0 when any of the four triads violates the triangle rules.
pub fn wigner6j(j1: f64, j2: f64, j3: f64, j4: f64, j5: f64, j6: f64) -> Result<f64> {
    let a = parse_half_integer("j1", j1)?;
    let b = parse_half_integer("j2", j2)?;
    let c = parse_half_integer("j3", j3)?;
    let d = parse_half_integer("j4", j4)?;
    let e = parse_half_integer("j5", j5)?;
    let f = parse_half_integer("j6", j6)?;

    if !(triangle_ok(a, b, c) && triangle_ok(c, d, e) && triangle_ok(a, e, f) && triangle_ok(b, d, f)) {
        return Ok(0.0);
    }

    // Racah: value = sqrt(D1 D2 D3 D4) * sum_t (-1)^t (t+1)! /
    //   [(t-T1)! (t-T2)! (t-T3)! (t-T4)! (S1-t)! (S2-t)! (S3-t)!]
    let t1 = (a.0 + b.0 + c.0) / 2;
    let t2 = (c.0 + d.0 + e.0) / 2;
    let t3 = (a.0 + e.0 + f.0) / 2;
    let t4 = (b.0 + d.0 + f.0) / 2;
    let s1 = (a.0 + b.0 + d.0 + e.0) / 2;
    let s2 = (a.0 + c.0 + d.0 + f.0) / 2;
    let s3 = (b.0 + c.0 + e.0 + f.0) / 2;

    let t_min = t1.max(t2).max(t3).max(t4);
    let t_max = s1.min(s2).min(s3);

    let mut sum = BigRational::zero();
    for t in t_min..=t_max {
        let den = factorial(t - t1)
            * factorial(t - t2)
            * factorial(t - t3)
            * factorial(t - t4)
            * factorial(s1 - t)
            * factorial(s2 - t)
            * factorial(s3 - t);
        let mut term = BigRational::new(factorial(t + 1), den);
        if t % 2 != 0 {
            term = -term;
        }
        sum += term;
    }
    if sum.is_zero() {
        return Ok(0.0);
    }

    let delta = triangle_coefficient(a, b, c)
        * triangle_coefficient(c, d, e)
        * triangle_coefficient(a, e, f)
        * triangle_coefficient(b, d, f);

    // value^2 = delta * sum^2 exactly; take the square root in f64 and
    // reattach the sign of the sum.
    let value_sq = delta * sum.clone() * sum.clone();
    let magnitude = value_sq
        .to_f64()
        .ok_or(Error::NonFinite("wigner6j"))?
        .sqrt();
    Ok(if sum.is_negative() { -magnitude } else { magnitude })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_violation_is_zero() {
        assert_eq!(wigner6j(1.0, 1.0, 3.0, 1.0, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn zero_argument_reduction() {
        // {a b c; 0 c b} = (-1)^(a+b+c) / sqrt((2b+1)(2c+1))
        let got = wigner6j(1.0, 1.0, 1.0, 0.0, 1.0, 1.0).unwrap();
        assert!((got - (-1.0 / 3.0)).abs() < 1e-15, "got {got}");
    }

    #[test]
    fn cs_d1_values() {
        // {1/2 1/2 1; F' F 7/2} entering the D1 strengths
        let v43 = wigner6j(0.5, 0.5, 1.0, 3.0, 4.0, 3.5).unwrap();
        assert!((v43 - 6f64.sqrt() / 12.0).abs() < 1e-15, "got {v43}");
        let v44 = wigner6j(0.5, 0.5, 1.0, 4.0, 4.0, 3.5).unwrap();
        assert!((v44 - (-30f64.sqrt() / 36.0)).abs() < 1e-15, "got {v44}");
        let v33 = wigner6j(0.5, 0.5, 1.0, 3.0, 3.0, 3.5).unwrap();
        assert!((v33 - (-14f64.sqrt() / 28.0)).abs() < 1e-15, "got {v33}");
    }

    #[test]
    fn integer_case() {
        let got = wigner6j(1.0, 2.0, 3.0, 4.0, 5.0, 6.0).unwrap();
        assert!((got - 1430f64.sqrt() / 2145.0).abs() < 1e-15, "got {got}");
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(wigner6j(-0.5, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(wigner6j(0.3, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(wigner6j(f64::NAN, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }
}
