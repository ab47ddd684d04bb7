//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let s = f(c - h * XGK[i]) + f(c + h * XGK[i]);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss-Kronrod (7, 15) quadrature.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, est: f64, depth: u32) -> f64 {
        let (k, err) = kronrod(f, a, b);
        if err <= tol * est.abs().max(f64::MIN_POSITIVE) || depth > 40 {
            return k;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, tol, est, depth + 1) + rec(f, m, b, tol, est, depth + 1)
    }
    let (est, _) = kronrod(f, a, b);
    rec(f, a, b, tol, est, 0)
}

/// `Ei(x)` for `x < 0` as `-E1(-x)`, with `E1(z) = ∫_0^∞ exp(-z e^w) dw`.
pub fn ei_negative_quadrature(x: f64) -> f64 {
    assert!(x < 0.0);
    let z = -x;
    let upper = (800.0 / z).ln().max(1.0);
    let f = |w: f64| (-z * w.exp()).exp();
    // Split at the knee w = ln(1 / z) where the integrand turns over.
    let knee = (1.0 / z).ln().clamp(0.0, upper);
    let mut total = 0.0;
    if knee > 0.0 {
        total += integrate(&f, 0.0, knee, 1e-15);
    }
    total += integrate(&f, knee, upper, 1e-15);
    -total
}

/// Literal double loop over frames and bins.
pub fn lsd_brute_force(reference: &[Complex64], estimate: &[Complex64], frames: usize, bins: usize, floor: f64) -> f64 {
    let mut outer = 0.0;
    for f in 0..frames {
        let mut inner = 0.0;
        for k in 0..bins {
            let r = reference[f * bins + k];
            let e = estimate[f * bins + k];
            let pr = (r.re * r.re + r.im * r.im).max(floor);
            let pe = (e.re * e.re + e.im * e.im).max(floor);
            let d = pr.ln() - pe.ln();
            inner += d * d;
        }
        outer += (inner / bins as f64).sqrt();
    }
    outer / frames as f64
}

pub fn sine(freq: f64, rate: f64, len: usize, amp: f64) -> Vec<f64> {
    (0..len).map(|i| amp * (2.0 * PI * freq * i as f64 / rate).sin()).collect()
}

/// Amplitude of the `freq` component over `x[start..]` by quadrature projection.
pub fn tone_amplitude(x: &[f64], freq: f64, rate: f64, start: usize) -> f64 {
    let (mut s, mut c) = (0.0, 0.0);
    let seg = &x[start..];
    for (i, v) in seg.iter().enumerate() {
        let ph = 2.0 * PI * freq * (start + i) as f64 / rate;
        s += v * ph.sin();
        c += v * ph.cos();
    }
    2.0 * (s * s + c * c).sqrt() / seg.len() as f64
}

/// Harmonic bursts with a slow envelope.
pub fn speech_like(len: usize, rate: f64) -> Vec<f64> {
    (0..len)
        .map(|i| {
            let t = i as f64 / rate;
            let env = 0.5 * (1.0 - (2.0 * PI * 3.0 * t).cos());
            let f0 = 140.0 + 30.0 * (2.0 * PI * 0.7 * t).sin();
            let v: f64 = (1..6).map(|h| (2.0 * PI * f0 * h as f64 * t).sin() / h as f64).sum();
            0.3 * env * v
        })
        .collect()
}

/// Write to the real stdout, bypassing the test harness capture.
pub fn report(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}
