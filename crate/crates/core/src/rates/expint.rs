//! Exponential integral `E1(x) = int_x^inf e^{-u}/u du` for real `x > 0`.
//!
//! Power series below 1, modified Lentz continued fraction above. The
//! scaled variant `e^x E1(x)` never forms `e^x`, so it stays finite for
//! the huge arguments that appear when the RSI variance is tiny.

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 10_000;

pub fn exp_integral_e1(x: f64) -> Result<f64> {
    check(x)?;
    if x <= 1.0 {
        Ok(series(x))
    } else {
        Ok(continued_fraction(x) * (-x).exp())
    }
}

/// `e^x E1(x)`.
pub fn scaled_exp_integral_e1(x: f64) -> Result<f64> {
    check(x)?;
    if x <= 1.0 {
        Ok(series(x) * x.exp())
    } else {
        Ok(continued_fraction(x))
    }
}

fn check(x: f64) -> Result<()> {
    if !(x > 0.0) || x.is_nan() {
        return Err(Error::invalid(format!(
            "exponential integral needs x > 0, got {x}"
        )));
    }
    Ok(())
}

fn series(x: f64) -> f64 {
    // E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    let mut sum = 0.0;
    let mut fact = 1.0;
    for k in 1..MAX_ITER {
        fact *= -x / k as f64;
        let term = fact / k as f64;
        sum += term;
        if term.abs() < EPS * sum.abs() {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

/// `e^x E1(x)` as the continued fraction `1/(x+1- 1/(x+3- 4/(x+5- ...)))`.
fn continued_fraction(x: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonpositive() {
        assert!(exp_integral_e1(0.0).is_err());
        assert!(exp_integral_e1(-1.0).is_err());
        assert!(scaled_exp_integral_e1(f64::NAN).is_err());
    }

    #[test]
    fn known_values() {
        // Reference values from the series definition evaluated in extended precision.
        assert!((exp_integral_e1(1.0).unwrap() - 0.219_383_934_395_520_3).abs() < 1e-15);
        assert!((exp_integral_e1(0.1).unwrap() - 1.822_923_958_419_390_7).abs() < 1e-14);
    }

    #[test]
    fn branches_agree_near_one() {
        let below = series(1.0);
        let above = continued_fraction(1.0) * (-1.0f64).exp();
        assert!((below - above).abs() < 1e-13 * below);
    }

    #[test]
    fn asymptotic_identity() {
        let x = 50.0;
        assert!((x * scaled_exp_integral_e1(x).unwrap() - 1.0).abs() < 0.02);
        assert!(scaled_exp_integral_e1(1e12).unwrap() * 1e12 > 0.999);
    }

    #[test]
    fn decreasing_on_grid() {
        let mut prev = f64::INFINITY;
        for k in 1..=1000 {
            let v = exp_integral_e1(0.01 * k as f64).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }
}
