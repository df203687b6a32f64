use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use scb_core::scene::{self, NoiseSpec, Scenario, Target};
use scb_core::spectral::{self, SpectralFrame, StreamBuffer};
use scb_core::tx::{self, ArrayGeometry, BeamPlan};
use scb_core::zc;
use scb_core::SPEED_OF_LIGHT;

fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(t, v)| v * Complex64::from_polar(1.0, -2.0 * PI * (k * t) as f64 / n as f64))
                .sum()
        })
        .collect()
}

fn direct_conv(x: &[Complex64], h: &[Complex64]) -> Vec<Complex64> {
    let mut y = vec![Complex64::default(); x.len() + h.len() - 1];
    for (i, a) in x.iter().enumerate() {
        for (j, b) in h.iter().enumerate() {
            y[i + j] += a * b;
        }
    }
    y
}

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len)
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den.max(1e-300)).sqrt()
}

proptest! {
    #[test]
    fn forward_matches_naive_dft_and_inverts(x in complex_vec(32)) {
        let f = spectral::forward(&x, 32).unwrap();
        let oracle = naive_dft(&x);
        prop_assert!(rel_l2(f.bins(), &oracle) < 1e-12);
        let back = spectral::inverse(&f);
        prop_assert!(rel_l2(&back, &x) < 1e-12);
        // Parseval with the unnormalized forward transform.
        let e_t: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        prop_assert!((f.energy() - 32.0 * e_t).abs() < 1e-9 * f.energy().max(1.0));
    }

    #[test]
    fn overlap_add_matches_direct_convolution(
        n_pow in prop::sample::select(vec![64usize, 256]),
        x in complex_vec(700),
        h in complex_vec(256),
        taps in 1usize..=256,
    ) {
        let block = n_pow;
        let taps = taps.min(block);
        let h = &h[..taps];
        let x = &x[..(3 * block + 17).min(x.len())];
        let mut padded = h.to_vec();
        padded.resize(2 * block, Complex64::default());
        let multiplier = spectral::forward(&padded, 2 * block).unwrap();
        let stream = StreamBuffer::new(x.to_vec(), 1.0).unwrap();
        let y = spectral::overlap_add_filter(&stream, &multiplier, block).unwrap();
        let oracle = direct_conv(x, h);
        prop_assert!(rel_l2(&y.samples[..oracle.len()], &oracle) < 1e-9);
        prop_assert!(y.samples[oracle.len()..].iter().all(|v| v.norm() < 1e-9));
    }

    #[test]
    fn delays_compose(
        t1 in -2e-6f64..2e-6,
        t2 in -2e-6f64..2e-6,
        x in complex_vec(64),
    ) {
        let (fs, fc) = (10e6, 10e9);
        let f = spectral::forward(&x, 64).unwrap();
        let once = spectral::apply_delay(&f, t1 + t2, fs, fc);
        let twice = spectral::apply_delay(&spectral::apply_delay(&f, t1, fs, fc), t2, fs, fc);
        // Carrier phases of ~1e4 cycles limit absolute agreement.
        prop_assert!(rel_l2(once.bins(), twice.bins()) < 1e-6);
        // A delay is all-pass.
        prop_assert!((once.energy() - f.energy()).abs() < 1e-9 * f.energy());
    }

    #[test]
    fn integer_delay_is_circular_shift(shift in 0usize..64, x in complex_vec(64)) {
        let fs = 1.0;
        let f = spectral::forward(&x, 64).unwrap();
        let y = spectral::inverse(&spectral::apply_delay(&f, shift as f64 / fs, fs, 0.0));
        for t in 0..64 {
            prop_assert!((y[(t + shift) % 64] - x[t]).norm() < 1e-9);
        }
    }
}

#[test]
fn oversampled_spectrum_interpolates() {
    let z = zc::generate_zc(zc::ZcParams::new(5, 13).unwrap());
    let s = spectral::synthesize_time(&spectral::place_in_spectrum(&z, 16).unwrap());
    let wide = spectral::oversampled_code_spectrum(&s).unwrap();
    let narrow = spectral::forward(&s, 16).unwrap();
    assert_eq!(wide.len(), 32);
    for k in 0..16 {
        assert!((wide.bins()[2 * k] - narrow.bins()[k]).norm() < 1e-12);
    }
}

fn small_system() -> (ArrayGeometry, BeamPlan, zc::CodeSet) {
    let geom = ArrayGeometry::new(8, 10e9).unwrap();
    let plan = BeamPlan::uniform(&[-20.0, 0.0, 25.0], 1.5).unwrap();
    let codes = zc::build_code_set(61, 3, 64).unwrap();
    (geom, plan, codes)
}

#[test]
fn tx_synthesis_matches_direct_time_domain_sum() {
    let (geom, plan, codes) = small_system();
    let fs = 10e6;
    let frame = tx::synthesize_tx(&plan, &codes, &geom, fs).unwrap();
    // Oracle: per-bin sum of each code spectrum times the element delay phase, via naive IDFT.
    for m in [0usize, 3, 7] {
        let mut bins = vec![Complex64::default(); 64];
        for beam in plan.beams() {
            let tau = geom.delay(m, beam.theta_deg);
            let code = &codes.codes[beam.code_index].spectrum;
            for (k, v) in code.signed_iter() {
                let phase = -2.0 * PI * tau * (fs * k as f64 / 64.0 + geom.carrier_hz());
                bins[code.index_of(k)] += beam.alpha * v * Complex64::from_polar(1.0, phase);
            }
        }
        let time: Vec<Complex64> = (0..64)
            .map(|t| {
                bins.iter()
                    .enumerate()
                    .map(|(k, v)| v * Complex64::from_polar(1.0, 2.0 * PI * (k * t) as f64 / 64.0))
                    .sum::<Complex64>()
                    / 64.0
            })
            .collect();
        assert!(rel_l2(&frame.signals[m], &time) < 1e-9, "element {m}");
    }
}

#[test]
fn tx_synthesis_is_linear_in_alpha() {
    let (geom, _, codes) = small_system();
    let one = BeamPlan::uniform(&[10.0], 1.0).unwrap();
    let three = BeamPlan::uniform(&[10.0], 3.0).unwrap();
    let a = tx::synthesize_tx(&one, &codes, &geom, 10e6).unwrap();
    let b = tx::synthesize_tx(&three, &codes, &geom, 10e6).unwrap();
    for (ra, rb) in a.signals.iter().zip(&b.signals) {
        let scaled: Vec<Complex64> = ra.iter().map(|v| v * 3.0).collect();
        assert!(rel_l2(rb, &scaled) < 1e-12);
    }
}

#[test]
fn propagation_is_linear_over_targets() {
    let (geom, plan, codes) = small_system();
    let frame = tx::synthesize_tx(&plan, &codes, &geom, 10e6).unwrap();
    let t1 = Target::new(900.0, -20.0, 0.0).unwrap();
    let t2 = Target::new(1400.0, 25.0, 3.0).unwrap();
    let both = scene::propagate(&frame, &Scenario::new(vec![t1, t2], 4), &geom).unwrap();
    let a = scene::propagate(&frame, &Scenario::new(vec![t1], 4), &geom).unwrap();
    let b = scene::propagate(&frame, &Scenario::new(vec![t2], 4), &geom).unwrap();
    for m in 0..geom.m_elements() {
        let sum: Vec<Complex64> = a.streams[m]
            .iter()
            .zip(&b.streams[m])
            .map(|(x, y)| x + y)
            .collect();
        assert!(rel_l2(&both.streams[m], &sum) < 1e-12);
    }
}

#[test]
fn echo_amplitude_follows_radar_equation() {
    let (geom, _, codes) = small_system();
    let plan = BeamPlan::uniform(&[0.0], 1.0).unwrap();
    let frame = tx::synthesize_tx(&plan, &codes, &geom, 10e6).unwrap();
    let energy = |r: f64| {
        let s = Scenario::new(vec![Target::new(r, 0.0, 0.0).unwrap()], 4);
        let rx = scene::propagate(&frame, &s, &geom).unwrap();
        rx.streams[0].iter().map(|v| v.norm_sqr()).sum::<f64>()
    };
    // Echo power falls as R^-4; 1 km and 2 km both fit in the window.
    let ratio = energy(1000.0) / energy(2000.0);
    assert!((ratio - 16.0).abs() < 1e-6 * 16.0, "{ratio}");
    let sigma = 1.0;
    let lambda = SPEED_OF_LIGHT / 10e9;
    let want = (sigma * lambda * lambda / ((4.0 * PI).powi(3) * 1e12)).sqrt();
    assert!((scene::target_amplitude(1000.0, 0.0, 10e9) - want).abs() < 1e-12 * want);
}

#[test]
fn noise_is_seed_deterministic() {
    let (geom, plan, codes) = small_system();
    let frame = tx::synthesize_tx(&plan, &codes, &geom, 10e6).unwrap();
    let t = Target::new(900.0, 0.0, 0.0).unwrap();
    let run = |seed| {
        let s = Scenario::new(vec![t], 4).with_noise(NoiseSpec { snr_db: 10.0, seed });
        scene::propagate(&frame, &s, &geom).unwrap()
    };
    assert_eq!(run(7).streams, run(7).streams);
    assert_ne!(run(7).streams, run(8).streams);
}

#[test]
fn window_violation_names_the_target() {
    let s = Scenario::new(
        vec![
            Target::new(300.0, 0.0, 0.0).unwrap(),
            Target::new(60_000.0, 0.0, 0.0).unwrap(),
        ],
        2,
    );
    match s.check_window(64, 10e6) {
        Err(scb_core::Error::EchoOutsideWindow { index, .. }) => assert_eq!(index, 1),
        other => panic!("{other:?}"),
    }
}

#[test]
fn spectral_frame_signed_indexing_round_trips() {
    let mut f = SpectralFrame::zeros(16).unwrap();
    for k in -8..8i64 {
        // Index 8 holds the Nyquist bin, labelled -8.
        f.set(k, Complex64::new(k as f64, 0.0));
    }
    for (i, v) in f.bins().iter().enumerate() {
        assert_eq!(v.re as i64, f.signed_bin(i));
    }
}
