//! Exponential integral `Ei(x)` (Cauchy principal value).
//!
//! Two regimes: the convergent power series around the origin for `|x| <= 6`,
//! and for larger arguments the continued fraction of `E1` (negative axis) or
//! the asymptotic expansion (positive axis).

use crate::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 6.0;
const EPS: f64 = 1e-17;
const FPMIN: f64 = f64::MIN_POSITIVE / EPS;

/// `Ei(x) = -PV ∫_{-x}^{∞} e^{-u}/u du`, defined for all nonzero reals.
pub fn exponential_integral_ei(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Domain("Ei(NaN)".into()));
    }
    if x == 0.0 {
        return Err(Error::Domain(
            "Ei has a logarithmic singularity at x = 0".into(),
        ));
    }
    if x == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        return Ok(series(x));
    }
    if x < 0.0 {
        Ok(-e1_continued_fraction(ax))
    } else if x <= 40.0 {
        Ok(series(x))
    } else {
        Ok(asymptotic(x))
    }
}

// gamma + ln|x| + sum_{n>=1} x^n / (n n!)
fn series(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for n in 1..400 {
        let nf = n as f64;
        term *= x / nf;
        let contrib = term / nf;
        sum += contrib;
        if contrib.abs() < EPS * sum.abs().max(1e-300) {
            break;
        }
    }
    EULER_GAMMA + x.abs().ln() + sum
}

// Modified Lentz evaluation of E1(z) = e^{-z} / (z + 1 - 1/(z + 3 - 4/(z + 5 - ...))).
fn e1_continued_fraction(z: f64) -> f64 {
    let mut b = z + 1.0;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
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
    h * (-z).exp()
}

fn asymptotic(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    for k in 1..200 {
        let prev = term;
        term *= k as f64 / x;
        if term < EPS {
            break;
        }
        if term < prev {
            sum += term;
        } else {
            sum -= prev;
            break;
        }
    }
    x.exp() * sum / x
}
