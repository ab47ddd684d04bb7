//! Biquad sections: Butterworth cascades and shelf/peak equalisers.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

/// `H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    fn normalized(b: [f64; 3], a: [f64; 3]) -> Self {
        Self {
            b0: b[0] / a[0],
            b1: b[1] / a[0],
            b2: b[2] / a[0],
            a1: a[1] / a[0],
            a2: a[2] / a[0],
        }
    }

    /// Largest pole magnitude.
    pub fn pole_radius(&self) -> f64 {
        let disc = self.a1 * self.a1 - 4.0 * self.a2;
        if disc < 0.0 {
            self.a2.abs().sqrt()
        } else {
            let r = disc.sqrt();
            ((-self.a1 + r) / 2.0).abs().max(((-self.a1 - r) / 2.0).abs())
        }
    }

    fn checked(self) -> Result<Self> {
        let r = self.pole_radius();
        if !r.is_finite() || r >= 1.0 {
            return Err(Error::UnstableFilter(r));
        }
        Ok(self)
    }

    pub fn response(&self, freq: f64, sample_rate: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -2.0 * PI * freq / sample_rate);
        let z2 = z1 * z1;
        (self.b0 + self.b1 * z1 + self.b2 * z2) / (1.0 + self.a1 * z1 + self.a2 * z2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PassKind {
    Low,
    High,
}

/// A cascade of second-order sections in transposed direct form II.
#[derive(Debug, Clone, PartialEq)]
pub struct SosFilter {
    sections: Vec<Biquad>,
}

impl SosFilter {
    pub fn new(sections: Vec<Biquad>) -> Result<Self> {
        let sections = sections.into_iter().map(Biquad::checked).collect::<Result<_>>()?;
        Ok(Self { sections })
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        for s in &self.sections {
            let (mut z1, mut z2) = (0.0, 0.0);
            for v in out.iter_mut() {
                let input = *v;
                let y = s.b0 * input + z1;
                z1 = s.b1 * input - s.a1 * y + z2;
                z2 = s.b2 * input - s.a2 * y;
                *v = y;
            }
        }
        out
    }

    pub fn response(&self, freq: f64, sample_rate: f64) -> Complex64 {
        self.sections
            .iter()
            .map(|s| s.response(freq, sample_rate))
            .product()
    }

    pub fn gain_db(&self, freq: f64, sample_rate: f64) -> f64 {
        20.0 * self.response(freq, sample_rate).norm().log10()
    }
}

fn check_frequency(name: &'static str, freq: f64, sample_rate: f64) -> Result<()> {
    if !(freq > 0.0 && freq < sample_rate / 2.0) {
        return Err(Error::invalid(
            name,
            format!("{freq} Hz must lie in (0, {}) Hz", sample_rate / 2.0),
        ));
    }
    Ok(())
}

/// Digital Butterworth of even `order` via the bilinear transform with prewarping.
pub fn butterworth(order: usize, cutoff: f64, sample_rate: f64, kind: PassKind) -> Result<SosFilter> {
    if order < 2 || !order.is_multiple_of(2) {
        return Err(Error::invalid("order", format!("must be even and >= 2, got {order}")));
    }
    check_frequency("cutoff", cutoff, sample_rate)?;
    let k = (PI * cutoff / sample_rate).tan();
    let k2 = k * k;
    let sections = (1..=order / 2)
        .map(|i| {
            let theta = PI * (2 * i - 1) as f64 / (2 * order) as f64;
            let a = 2.0 * theta.sin();
            let den = [1.0 + a * k + k2, 2.0 * (k2 - 1.0), 1.0 - a * k + k2];
            let num = match kind {
                PassKind::Low => [k2, 2.0 * k2, k2],
                PassKind::High => [1.0, -2.0, 1.0],
            };
            Biquad::normalized(num, den)
        })
        .collect();
    SosFilter::new(sections)
}

fn shelf_terms(freq: f64, gain_db: f64, sample_rate: f64) -> (f64, f64, f64, f64) {
    let a = 10f64.powf(gain_db / 40.0);
    let w0 = 2.0 * PI * freq / sample_rate;
    // Unit shelf slope.
    let alpha = w0.sin() / 2.0 * 2f64.sqrt();
    (a, w0.cos(), alpha, 2.0 * a.sqrt() * alpha)
}

pub fn low_shelf(freq: f64, gain_db: f64, sample_rate: f64) -> Result<SosFilter> {
    check_frequency("freq", freq, sample_rate)?;
    let (a, c, _, s) = shelf_terms(freq, gain_db, sample_rate);
    let b = [
        a * ((a + 1.0) - (a - 1.0) * c + s),
        2.0 * a * ((a - 1.0) - (a + 1.0) * c),
        a * ((a + 1.0) - (a - 1.0) * c - s),
    ];
    let d = [
        (a + 1.0) + (a - 1.0) * c + s,
        -2.0 * ((a - 1.0) + (a + 1.0) * c),
        (a + 1.0) + (a - 1.0) * c - s,
    ];
    SosFilter::new(vec![Biquad::normalized(b, d)])
}

pub fn high_shelf(freq: f64, gain_db: f64, sample_rate: f64) -> Result<SosFilter> {
    check_frequency("freq", freq, sample_rate)?;
    let (a, c, _, s) = shelf_terms(freq, gain_db, sample_rate);
    let b = [
        a * ((a + 1.0) + (a - 1.0) * c + s),
        -2.0 * a * ((a - 1.0) + (a + 1.0) * c),
        a * ((a + 1.0) + (a - 1.0) * c - s),
    ];
    let d = [
        (a + 1.0) - (a - 1.0) * c + s,
        2.0 * ((a - 1.0) - (a + 1.0) * c),
        (a + 1.0) - (a - 1.0) * c - s,
    ];
    SosFilter::new(vec![Biquad::normalized(b, d)])
}

pub fn peak(freq: f64, gain_db: f64, q: f64, sample_rate: f64) -> Result<SosFilter> {
    check_frequency("freq", freq, sample_rate)?;
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::invalid("q", format!("must be positive, got {q}")));
    }
    let a = 10f64.powf(gain_db / 40.0);
    let w0 = 2.0 * PI * freq / sample_rate;
    let alpha = w0.sin() / (2.0 * q);
    let c = w0.cos();
    let b = [1.0 + alpha * a, -2.0 * c, 1.0 - alpha * a];
    let d = [1.0 + alpha / a, -2.0 * c, 1.0 - alpha / a];
    SosFilter::new(vec![Biquad::normalized(b, d)])
}

#[cfg(test)]
mod tests {
    use super::*;

    const FS: f64 = 16_000.0;

    #[test]
    fn butterworth_anchors() {
        let lp = butterworth(12, 4000.0, FS, PassKind::Low).unwrap();
        assert!(lp.gain_db(0.0, FS).abs() < 0.01);
        assert!((lp.gain_db(4000.0, FS) + 3.0103).abs() < 0.01);
        let hp = butterworth(8, 100.0, FS, PassKind::High).unwrap();
        assert!(hp.gain_db(1e-3, FS) < -80.0);
        assert!(hp.gain_db(FS / 2.0 - 1e-6, FS).abs() < 0.01);
    }

    #[test]
    fn butterworth_matches_warped_prototype() {
        // The bilinear map sends f to the analog frequency tan(pi f / fs).
        let fc = 1000.0;
        let lp = butterworth(6, fc, FS, PassKind::Low).unwrap();
        let wc = (PI * fc / FS).tan();
        for f in [100.0, 500.0, 1500.0, 3000.0, 6000.0] {
            let ratio: f64 = (PI * f / FS).tan() / wc;
            let want = -10.0 * (1.0 + ratio.powi(12)).log10();
            assert!((lp.gain_db(f, FS) - want).abs() < 1e-8, "f = {f}");
        }
    }

    #[test]
    fn invalid_designs_are_rejected() {
        assert!(butterworth(3, 1000.0, FS, PassKind::Low).is_err());
        assert!(butterworth(4, 8000.0, FS, PassKind::Low).is_err());
        assert!(butterworth(4, 0.0, FS, PassKind::High).is_err());
        let unstable = Biquad { b0: 1.0, b1: 0.0, b2: 0.0, a1: 0.0, a2: 1.2 };
        assert!(matches!(SosFilter::new(vec![unstable]), Err(Error::UnstableFilter(_))));
    }

    #[test]
    fn zero_gain_equalisers_are_identity() {
        let x: Vec<f64> = (0..500).map(|i| ((i * 37 % 101) as f64 / 50.0) - 1.0).collect();
        for f in [
            low_shelf(300.0, 0.0, FS).unwrap(),
            high_shelf(3000.0, 0.0, FS).unwrap(),
            peak(1000.0, 0.0, 1.0, FS).unwrap(),
        ] {
            let y = f.apply(&x);
            assert!(x.iter().zip(&y).all(|(a, b)| (a - b).abs() < 1e-10));
        }
    }

    #[test]
    fn shelf_and_peak_responses() {
        assert!((low_shelf(200.0, 6.0, FS).unwrap().gain_db(1.0, FS) - 6.0).abs() < 0.01);
        assert!((high_shelf(2000.0, -6.0, FS).unwrap().gain_db(7999.0, FS) + 6.0).abs() < 0.05);
        let p = peak(1000.0, 6.0, 1.0, FS).unwrap();
        assert!((p.gain_db(1000.0, FS) - 6.0).abs() < 1e-9);
    }
}
