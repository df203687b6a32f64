//! Acceptance checks. Each test prints exactly one `PASS`/`FAIL` line with
//! the measured quantity, then asserts. Oracles are computed here, directly
//! from definitions, independently of the library code paths under test.

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use scb_core::config::{self, Mode, SystemConfig};
use scb_core::experiments;
use scb_core::scene::{self, Scenario, Target};
use scb_core::spectral::{self, StreamBuffer};
use scb_core::tx::{self, ArrayGeometry, BeamPlan, EirpConfiguration};
use scb_core::zc::{self, ZcParams};
use scb_core::SPEED_OF_LIGHT;

fn report(id: u32, name: &str, passed: bool, elapsed: Duration, detail: &str) {
    let line = format!(
        "[acceptance {id:>2}] {} {name} ({:.1} s): {detail}\n",
        if passed { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    // Bypass the test harness capture so every run shows the verdict line.
    let _ = std::io::stdout().write_all(line.as_bytes());
}

fn is_prime(n: u64) -> bool {
    n >= 2
        && (2..n)
            .take_while(|d| d * d <= n)
            .all(|d| !n.is_multiple_of(d))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Sequence straight from the defining formula, in floating point.
fn zc_formula(q: u64, n: u64) -> Vec<Complex64> {
    (0..n)
        .map(|k| {
            let k = k as f64;
            let phase = if n.is_multiple_of(2) {
                PI * q as f64 * k * k / n as f64
            } else {
                2.0 * PI * q as f64 * k * (k + 1.0) / n as f64
            };
            Complex64::from_polar(1.0, phase)
        })
        .collect()
}

fn circular_corr(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let l = a.len();
    (0..l)
        .map(|k| (0..l).map(|n| a[n] * b[(n + l - k) % l].conj()).sum())
        .collect()
}

/// Placement by explicit bin loop and synthesis by explicit inverse sum.
fn synthesize_oracle(z: &[Complex64], n: usize) -> Vec<Complex64> {
    let n_zc = z.len() as i64;
    let mut bins = vec![Complex64::default(); n];
    for k in 1..=n_zc / 2 {
        bins[k as usize] = z[(k - 1) as usize];
    }
    for k in (-n_zc).div_euclid(2)..0 {
        bins[(k + n as i64) as usize] = z[(n_zc + k) as usize];
    }
    (0..n)
        .map(|t| {
            bins.iter()
                .enumerate()
                .filter(|(_, v)| v.norm() > 0.0)
                .map(|(k, v)| {
                    v * Complex64::from_polar(1.0, 2.0 * PI * (k * t % n) as f64 / n as f64)
                })
                .sum::<Complex64>()
                / n as f64
        })
        .collect()
}

fn direct_side_peak_ratio(s: &[Complex64]) -> f64 {
    let l = s.len();
    let r = |k: usize| -> f64 {
        (k..l)
            .map(|n| s[n] * s[n - k].conj())
            .sum::<Complex64>()
            .norm()
    };
    let peak = r(0);
    (1..l).map(r).fold(0.0, f64::max) / peak
}

#[test]
fn ac01_periodic_autocorrelation_impulse() {
    let t0 = Instant::now();
    let primes: Vec<u64> = (3..=199).filter(|&p| is_prime(p)).collect();
    let worst = primes
        .par_iter()
        .flat_map_iter(|&p| (1..p).map(move |q| (q, p)))
        .map(|(q, p)| {
            let z = zc::generate_zc(ZcParams::new(q, p).unwrap());
            let r = circular_corr(z.samples(), z.samples());
            let off = r[1..].iter().map(|v| v.norm()).fold(0.0, f64::max) / p as f64;
            let peak_err = (r[0].norm() - p as f64).abs() / p as f64;
            (off, peak_err)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    // Length 2 has the single seed 1.
    let two = circular_corr(
        zc::generate_zc(ZcParams::new(1, 2).unwrap()).samples(),
        zc::generate_zc(ZcParams::new(1, 2).unwrap()).samples(),
    );
    let worst_off = worst.0.max(two[1].norm() / 2.0);
    let elapsed = t0.elapsed();
    let passed = worst_off < 1e-9 && worst.1 < 1e-9 && elapsed < Duration::from_secs(10);
    report(
        1,
        "periodic autocorrelation impulse, primes <= 199",
        passed,
        elapsed,
        &format!(
            "worst off-peak/N_zc = {worst_off:.2e}, worst peak error = {:.2e}",
            worst.1
        ),
    );
    assert!(passed);
}

#[test]
fn ac02_periodic_crosscorrelation_constancy() {
    let t0 = Instant::now();
    let sweep = experiments::crosscorr_sweep(940, 1021).unwrap();
    let reference = zc_formula(940, 1021);
    let root = 1021f64.sqrt();
    let worst_prime = (1..1021u64)
        .into_par_iter()
        .filter(|&q| q != 940)
        .map(|q| {
            let oracle = circular_corr(&reference, &zc_formula(q, 1021))
                .iter()
                .map(|v| v.norm())
                .fold(0.0, f64::max);
            let lib = sweep.iter().find(|r| r.0 == q).unwrap().1;
            ((oracle - root).abs() / root).max((lib - root).abs() / root)
        })
        .reduce(|| 0.0, f64::max);

    let even = experiments::crosscorr_sweep(940, 1024).unwrap();
    let (q_max, lib_max) = even
        .iter()
        .cloned()
        .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    let oracle_max = circular_corr(&zc_formula(940, 1024), &zc_formula(q_max, 1024))
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    let elapsed = t0.elapsed();
    let passed = worst_prime < 1e-6
        && (oracle_max - lib_max).abs() < 1e-6 * oracle_max
        && oracle_max >= 2.0 * 32.0
        && elapsed < Duration::from_secs(30);
    report(
        2,
        "periodic cross-correlation constancy vs seed 940",
        passed,
        elapsed,
        &format!(
            "N_zc=1021 max relative deviation {worst_prime:.2e}; N_zc=1024 max peak {oracle_max:.1} at seed {q_max} (2·sqrt(1024) = 64)"
        ),
    );
    assert!(passed);
}

#[test]
fn ac03_seed_ranking_near_length() {
    let t0 = Instant::now();
    let (n_zc, n) = (953u64, 1024usize);
    let mut oracle: Vec<(u64, f64)> = (1..n_zc)
        .into_par_iter()
        .map(|q| {
            (
                q,
                direct_side_peak_ratio(&synthesize_oracle(&zc_formula(q, n_zc), n)),
            )
        })
        .collect();
    oracle.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let best: Vec<u64> = oracle.iter().take(10).map(|r| r.0).collect();

    let library = experiments::best_seeds(n_zc, n, 10).unwrap();
    let lib_best: Vec<u64> = library.iter().map(|r| r.seed).collect();
    let outside: Vec<u64> = best
        .iter()
        .copied()
        .filter(|s| s.abs_diff(n_zc) > 40)
        .collect();
    let elapsed = t0.elapsed();
    let agrees = lib_best == best;
    let passed = agrees && outside.is_empty() && elapsed < Duration::from_secs(120);
    let detail: Vec<String> = oracle
        .iter()
        .take(10)
        .map(|(q, r)| format!("{q}:{:.2}dB", 20.0 * r.log10()))
        .collect();
    report(
        3,
        "10 best seeds within ±40 of N_zc = 953",
        passed,
        elapsed,
        &format!(
            "oracle best {} (library ranking {}); outside window: {outside:?}",
            detail.join(" "),
            if agrees { "agrees" } else { "DIFFERS" }
        ),
    );
    assert!(
        agrees,
        "library ranking {lib_best:?} differs from oracle {best:?}"
    );
    assert!(passed, "seeds outside the window: {outside:?}");
}

#[test]
fn ac04_overlap_add_matches_direct_convolution() {
    let t0 = Instant::now();
    let n = 256;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let taps = rng.random_range(1..=n);
        let len = rng.random_range(1..=5 * n);
        let mut c = || Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        let h: Vec<Complex64> = (0..taps).map(|_| c()).collect();
        let x: Vec<Complex64> = (0..len).map(|_| c()).collect();
        let mut direct = vec![Complex64::default(); len + taps - 1];
        for (i, a) in x.iter().enumerate() {
            for (j, b) in h.iter().enumerate() {
                direct[i + j] += a * b;
            }
        }
        let mut padded = h.clone();
        padded.resize(2 * n, Complex64::default());
        let multiplier = spectral::forward(&padded, 2 * n).unwrap();
        let y = spectral::overlap_add_filter(&StreamBuffer::new(x, 1.0).unwrap(), &multiplier, n)
            .unwrap();
        let num: f64 = y
            .samples
            .iter()
            .zip(&direct)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            + y.samples[direct.len()..]
                .iter()
                .map(|v| v.norm_sqr())
                .sum::<f64>();
        let den: f64 = direct.iter().map(|v| v.norm_sqr()).sum();
        worst = worst.max((num / den).sqrt());
    }
    let elapsed = t0.elapsed();
    let passed = worst < 1e-9 && elapsed < Duration::from_secs(5);
    report(
        4,
        "overlap-add equals direct convolution, 100 trials, N = 256",
        passed,
        elapsed,
        &format!("worst relative L2 error {worst:.2e}"),
    );
    assert!(passed);
}

/// Far-field energy of a transmit frame, from the per-element spectra and
/// explicit steering phases.
fn radiated_energy_oracle(frame: &tx::TxFrame, geom: &ArrayGeometry, fs: f64, theta: f64) -> f64 {
    let n = frame.n();
    let d = SPEED_OF_LIGHT / geom.carrier_hz() / 2.0;
    let spectra: Vec<Vec<Complex64>> = frame
        .signals
        .iter()
        .map(|s| spectral::forward(s, n).unwrap().into_bins())
        .collect();
    (0..n)
        .map(|i| {
            let k = if i < n / 2 {
                i as f64
            } else {
                i as f64 - n as f64
            };
            let f = fs * k / n as f64 + geom.carrier_hz();
            spectra
                .iter()
                .enumerate()
                .map(|(m, s)| {
                    let tau = m as f64 * d * theta.to_radians().sin() / SPEED_OF_LIGHT;
                    s[i] * Complex64::from_polar(1.0, 2.0 * PI * tau * f)
                })
                .sum::<Complex64>()
                .norm_sqr()
        })
        .sum::<f64>()
        / n as f64
}

#[test]
fn ac05_single_beam_steering() {
    let t0 = Instant::now();
    let sys = SystemConfig::default();
    let geom = sys.geometry().unwrap();
    let codes = zc::build_code_set(sys.n_zc, 1, sys.n).unwrap();
    let expected_gain = 10.0 * (64f64 * 64.0).log10();
    let mut lines = Vec::new();
    let mut passed = true;
    for theta_b in [-60.0, -30.0, 0.0, 30.0, 60.0] {
        let (peak_at, gain) = experiments::steering_check(&sys, theta_b).unwrap();
        // Oracle: refine on the 0.05° grid around the steering angle and
        // compare against one element radiating the same code.
        let frame = tx::synthesize_tx(
            &BeamPlan::uniform(&[theta_b], 1.0).unwrap(),
            &codes,
            &geom,
            sys.fs_hz,
        )
        .unwrap();
        let grid: Vec<f64> = (-10..=10).map(|i| theta_b + 0.05 * i as f64).collect();
        let energies: Vec<f64> = grid
            .par_iter()
            .map(|t| radiated_energy_oracle(&frame, &geom, sys.fs_hz, *t))
            .collect();
        let (i_max, e_max) =
            energies
                .iter()
                .enumerate()
                .fold((0, 0.0), |a, (i, e)| if *e > a.1 { (i, *e) } else { a });
        let single: f64 = codes.codes[0].samples.iter().map(|v| v.norm_sqr()).sum();
        let oracle_gain = 10.0 * (e_max / single).log10();
        let ok = (peak_at - theta_b).abs() <= 0.2
            && (grid[i_max] - theta_b).abs() <= 0.2
            && (gain - expected_gain).abs() <= 0.5
            && (oracle_gain - expected_gain).abs() <= 0.5;
        passed &= ok;
        lines.push(format!(
            "{theta_b}°→{peak_at:.2}° {gain:.2} dB (oracle {:.2}°, {oracle_gain:.2} dB)",
            grid[i_max]
        ));
    }
    let elapsed = t0.elapsed();
    passed &= elapsed < Duration::from_secs(10);
    report(
        5,
        "single-beam steering peak within 0.2°, gain 10·log10(M²) ± 0.5 dB",
        passed,
        elapsed,
        &format!("{}; expected gain {expected_gain:.2} dB", lines.join(", ")),
    );
    assert!(passed);
}

#[test]
fn ac06_matched_filter_range_accuracy() {
    let t0 = Instant::now();
    let sys = SystemConfig::default();
    let mut lines = Vec::new();
    let mut passed = true;
    for range in [1500.0, 3000.0, 4500.0, 9000.0] {
        let scenario = Scenario::new(vec![Target::new(range, 0.0, 0.0).unwrap()], sys.k_window);
        let profiles = experiments::run_mode(&sys, &scenario, Mode::Multi, None).unwrap();
        let p = profiles.iter().find(|p| p.beam_theta == 0.0).unwrap();
        let want = (2.0 * range * sys.fs_hz / SPEED_OF_LIGHT).round() as usize;
        let ok = p.peak_bin().abs_diff(want) <= 1;
        passed &= ok;
        lines.push(format!("{range} m: bin {} (expected {want})", p.peak_bin()));
    }
    let elapsed = t0.elapsed();
    passed &= elapsed < Duration::from_secs(30);
    report(
        6,
        "range accuracy ±1 bin",
        passed,
        elapsed,
        &lines.join(", "),
    );
    assert!(passed);
}

/// Monolithic receiver: one large FFT per element, untruncated fractional
/// delay templates, beam sum in the frequency domain.
fn receive_oracle(
    rx: &scene::RxStreams,
    code: &[Complex64],
    geom: &ArrayGeometry,
    fs: f64,
    theta_b: f64,
) -> Vec<f64> {
    let len = rx.len();
    let n = code.len();
    let g = (len + 2 * n).next_power_of_two();
    let fc = geom.carrier_hz();
    let code_spec = spectral::forward(code, g).unwrap().into_bins();
    let sum = (0..geom.m_elements())
        .into_par_iter()
        .map(|m| {
            let x = spectral::forward(&rx.streams[m], g).unwrap().into_bins();
            let tau = geom.delay(m, theta_b);
            (0..g)
                .map(|i| {
                    let k = if i < g / 2 {
                        i as f64
                    } else {
                        i as f64 - g as f64
                    };
                    let h = code_spec[i]
                        * Complex64::from_polar(1.0, -2.0 * PI * tau * (fs * k / g as f64 + fc));
                    x[i] * h.conj()
                })
                .collect::<Vec<_>>()
        })
        .reduce(
            || vec![Complex64::default(); g],
            |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect(),
        );
    let frame = spectral::SpectralFrame::from_bins(sum).unwrap();
    spectral::inverse(&frame)[..len]
        .iter()
        .map(|v| v.norm())
        .collect()
}

#[test]
fn ac07_multi_code_leakage_suppression() {
    let t0 = Instant::now();
    let cfg = config::preset("figure8").unwrap();
    let sys = &cfg.system;
    let scenario = cfg.scenario.scenario(sys.k_window).unwrap();
    let (near, far) = (scenario.targets[0], scenario.targets[1]);
    let multi = experiments::run_mode(sys, &scenario, Mode::Multi, None).unwrap();
    let single = experiments::run_mode(sys, &scenario, Mode::Single, None).unwrap();
    let res = experiments::leakage(&multi, &single, &near, &far, sys.fs_hz).unwrap();

    // Oracle run for the far target's beam under both modes.
    let geom = sys.geometry().unwrap();
    let plan = sys.plan().unwrap();
    let codes = zc::build_code_set(sys.n_zc, plan.len(), sys.n).unwrap();
    let beam = plan
        .beams()
        .iter()
        .find(|b| b.theta_deg == far.theta_deg)
        .unwrap();
    let near_bin = experiments::range_bin(near.range_m, sys.fs_hz);
    let far_bin = experiments::range_bin(far.range_m, sys.fs_hz);
    let around = |p: &[f64], b: usize| p[b - 1..=b + 1].iter().cloned().fold(0.0, f64::max);
    let oracle_run = |tx_plan: &BeamPlan, code_index: usize| {
        let frame = tx::synthesize_tx(tx_plan, &codes, &geom, sys.fs_hz).unwrap();
        let rx = scene::propagate(&frame, &scenario, &geom).unwrap();
        receive_oracle(
            &rx,
            &codes.codes[code_index].samples,
            &geom,
            sys.fs_hz,
            far.theta_deg,
        )
    };
    let o_multi = oracle_run(&plan, beam.code_index);
    let o_single = oracle_run(&plan.single_code(), 0);
    let o_margin = 20.0 * (around(&o_multi, far_bin) / around(&o_multi, near_bin)).log10();
    let o_strict = around(&o_multi, near_bin) < around(&o_single, near_bin);

    let margin = res.ghost_margin_db();
    let elapsed = t0.elapsed();
    let passed = res.multi_ghost < res.single_ghost
        && margin >= 10.0
        && o_strict
        && o_margin >= 10.0
        && res.far_peak_bin.abs_diff(far_bin) <= 1
        && elapsed < Duration::from_secs(120);
    report(
        7,
        "multi-code ghost below single-code and >= 10 dB under the true peak",
        passed,
        elapsed,
        &format!(
            "12° beam at 4.5 km: multi {:.1} dB, single {:.1} dB; ghost margin {margin:.2} dB (oracle {o_margin:.2} dB)",
            20.0 * res.multi_ghost.log10(),
            20.0 * res.single_ghost.log10()
        ),
    );
    assert!(passed);
}

#[test]
fn ac08_resolution_dichotomy() {
    let t0 = Instant::now();
    let cfg = config::preset("figure10").unwrap();
    let sys = &cfg.system;
    let scenario = cfg.scenario.scenario(sys.k_window).unwrap();
    let det = &cfg.simulation.detection;
    let multi = experiments::run_mode(sys, &scenario, Mode::Multi, None).unwrap();
    let sub = experiments::run_mode(sys, &scenario, Mode::Subcarrier, None).unwrap();
    let mut passed = true;
    let mut lines = Vec::new();
    for (theta, ranges) in [(-30.0, [3000.0, 3070.0]), (12.0, [6000.0, 6070.0])] {
        for (mode, profiles, resolved) in [("SCB", &multi, true), ("subcarrier", &sub, false)] {
            let p = profiles.iter().find(|p| p.beam_theta == theta).unwrap();
            let a = experiments::resolution_check(mode, p, &ranges, sys.fs_hz, resolved, det);
            passed &= a.passed;
            lines.push(format!("{mode} {theta}°: {}", a.detail));
        }
    }
    let elapsed = t0.elapsed();
    passed &= elapsed < Duration::from_secs(180);
    report(
        8,
        "SCB resolves 70 m pairs, subcarrier baseline merges them",
        passed,
        elapsed,
        &lines.join("; "),
    );
    assert!(passed);
}

#[test]
fn ac09_power_accounting() {
    let t0 = Instant::now();
    // Oracle: sum of α² mW written out from the allocation itself.
    let table_oracle = 41.0 * 32.0 * 32.0 / 1000.0;
    let table = tx::total_digital_power(&EirpConfiguration::Surveillance.plan());
    let mut passed = table == table_oracle && (table - 41.984).abs() < 1e-12;
    let mut lines = vec![format!("reference plan {table} W")];
    for c in EirpConfiguration::ALL {
        let plan = c.plan();
        let p = tx::total_digital_power(&plan);
        let oracle: f64 = plan.beams().iter().map(|b| b.alpha * b.alpha).sum::<f64>() / 1000.0;
        let ok = (p - oracle).abs() < 1e-12 && (p - 42.0).abs() <= 0.3;
        passed &= ok;
        lines.push(format!("({}) {p:.3} W", c.label()));
    }
    report(
        9,
        "digital power accounting",
        passed,
        t0.elapsed(),
        &lines.join(", "),
    );
    assert!(passed);
}

#[test]
fn ac10_blocking_invariance() {
    let t0 = Instant::now();
    let cfg = config::preset("figure8").unwrap();
    let sys = &cfg.system;
    let scenario = cfg.scenario.scenario(sys.k_window).unwrap();
    let rel = experiments::blocking_invariance(sys, &scenario).unwrap();
    let passed = rel < 1e-9;
    report(
        10,
        "N-block and monolithic overlap-add outputs agree",
        passed,
        t0.elapsed(),
        &format!("max difference / peak = {rel:.2e}"),
    );
    assert!(passed);
}

#[test]
fn acceptance_oracles_are_self_consistent() {
    // The formula oracle and the library agree, including the even branch.
    for (q, n) in [(251u64, 1024u64), (940, 1021), (5, 13)] {
        let lib = zc::generate_zc(ZcParams::new(q, n).unwrap());
        let ora = zc_formula(q, n);
        for (a, b) in lib.samples().iter().zip(&ora) {
            assert!((a - b).norm() < 1e-7);
        }
    }
    let z = zc_formula(5, 13);
    let lib = spectral::synthesize_time(
        &spectral::place_in_spectrum(&zc::generate_zc(ZcParams::new(5, 13).unwrap()), 16).unwrap(),
    );
    let ora = synthesize_oracle(&z, 16);
    for (a, b) in lib.iter().zip(&ora) {
        assert!((a - b).norm() < 1e-9);
    }
    assert_eq!(gcd(940, 1024), 4);
}
