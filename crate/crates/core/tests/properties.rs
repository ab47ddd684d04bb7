//! Randomised invariants.

use proptest::prelude::*;

use speechdiff::distortion::{apply_gain, clip, DistortionStage, Pools, GUARD_LIMIT};
use speechdiff::io::wav::{decode, encode};
use speechdiff::io::SampleFormat;
use speechdiff::metrics::{lsd_magnitudes, spectrogram_ssim};
use speechdiff::sampler::ReverseSchedule;
use speechdiff::sde::SdeParams;
use speechdiff::signal::{
    amplitude_transform, inverse_amplitude_transform, istft, stft, StftConfig, TransformConfig, Waveform,
};

fn signal(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 1..max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gain_then_inverse_gain_is_identity(x in signal(200), db in -40.0f64..40.0) {
        let back = apply_gain(&apply_gain(&x, db), -db);
        for (a, b) in x.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn clip_is_idempotent_and_bounded(x in signal(200), thr in 0.05f64..1.0) {
        let once = clip(&x, thr).unwrap();
        prop_assert_eq!(&clip(&once, thr).unwrap(), &once);
        prop_assert!(once.iter().all(|v| v.abs() <= thr));
    }

    #[test]
    fn stages_stay_finite_and_guarded(
        x in prop::collection::vec(-3.0f64..3.0, 1..300),
        db in -12.0f64..40.0,
        thr in 0.1f64..0.9,
        bits in prop::sample::select(vec![8u32, 12]),
    ) {
        let w = Waveform::new(x, 16_000).unwrap();
        let stages = [
            DistortionStage::Gain { db },
            DistortionStage::Clip { threshold: thr },
            DistortionStage::BitDepth { bits },
        ];
        for stage in stages {
            let out = stage.apply(&w, &Pools::default()).unwrap();
            prop_assert_eq!(out.len(), w.len());
            prop_assert!(out.samples().iter().all(|v| v.is_finite() && v.abs() <= GUARD_LIMIT));
        }
    }

    #[test]
    fn lsd_is_symmetric_and_follows_scale_law(
        mags in prop::collection::vec(0.01f64..10.0, 16..64),
        other in prop::collection::vec(0.01f64..10.0, 64),
        a in 0.1f64..10.0,
    ) {
        let bins = 8;
        let n = mags.len() / bins * bins;
        let (r, e) = (&mags[..n], &other[..n]);
        let ab = lsd_magnitudes(r, e, bins, 1e-8).unwrap();
        let ba = lsd_magnitudes(e, r, bins, 1e-8).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12 * ab.max(1.0));
        let scaled: Vec<f64> = r.iter().map(|m| a * m).collect();
        let law = lsd_magnitudes(r, &scaled, bins, 1e-8).unwrap();
        prop_assert!((law - 2.0 * a.ln().abs()).abs() <= 1e-12);
    }

    #[test]
    fn ssim_never_exceeds_one(
        r in prop::collection::vec(0.0f64..5.0, 120),
        e in prop::collection::vec(0.0f64..5.0, 120),
    ) {
        let s = spectrogram_ssim(&r, &e, 10, 12).unwrap();
        prop_assert!(s <= 1.0 + 1e-12);
        prop_assert!((spectrogram_ssim(&r, &r, 10, 12).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn stft_round_trip(x in prop::collection::vec(-1.0f64..1.0, 512..3000)) {
        let cfg = StftConfig::default();
        let w = Waveform::new(x, 16_000).unwrap();
        let back = istft(&stft(&w, &cfg).unwrap(), &cfg, w.len()).unwrap();
        for (a, b) in w.samples().iter().zip(back.samples()) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn amplitude_transform_round_trip(
        x in prop::collection::vec(-1.0f64..1.0, 512..2000),
        beta1 in 0.1f64..1.0,
        beta2 in 0.1f64..1.0,
    ) {
        let cfg = StftConfig::default();
        let t = TransformConfig::new(beta1, beta2).unwrap();
        let s = stft(&Waveform::new(x, 16_000).unwrap(), &cfg).unwrap();
        let back = inverse_amplitude_transform(&amplitude_transform(&s, &t).unwrap(), &t).unwrap();
        for (a, b) in s.data().iter().zip(back.data()) {
            prop_assert!((a - b).norm() <= 1e-9 * a.norm().max(1.0));
        }
    }

    #[test]
    fn float_wav_round_trip_is_exact(x in signal(500), rate in 8_000u32..48_000) {
        let w = Waveform::new(x, rate).unwrap();
        prop_assert_eq!(decode(&encode(&w, SampleFormat::Float32)).unwrap(), w.with_samples(
            w.samples().iter().map(|&v| v as f32 as f64).collect()
        ).unwrap());
    }

    #[test]
    fn pcm_wav_round_trip_within_one_step(x in signal(500)) {
        let w = Waveform::new(x, 16_000).unwrap();
        let back = decode(&encode(&w, SampleFormat::Pcm16)).unwrap();
        for (a, b) in w.samples().iter().zip(back.samples()) {
            prop_assert!((a - b).abs() <= 1.0 / 32768.0);
        }
    }

    #[test]
    fn truncated_schedule_is_descending_grid(n in 5usize..200, k in 1usize..5) {
        let p = SdeParams::bbed_default();
        let t_rs = (k as f64 / n as f64).min(0.9);
        let s = ReverseSchedule::truncated(&p, n, t_rs).unwrap();
        let times: Vec<f64> = s.times().collect();
        prop_assert_eq!(times.len(), s.steps_executed());
        prop_assert!((times[0] - t_rs).abs() <= 1e-12);
        prop_assert!((times[times.len() - 1] - 1.0 / n as f64).abs() <= 1e-12);
        prop_assert!(times.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn kernel_std_is_nonnegative_and_finite(
        c in 0.001f64..2.0,
        k in 1.01f64..20.0,
        gamma in 0.1f64..5.0,
        frac in 0.0f64..1.0,
    ) {
        for p in [SdeParams::bbed(c, k, 0.999).unwrap(), SdeParams::ouve(gamma, c, k, 1.0).unwrap()] {
            let t = p.time(frac * p.horizon()).unwrap();
            let s = p.kernel_std(t).unwrap();
            prop_assert!(s.is_finite() && s >= 0.0);
        }
    }
}
