//! Far-field point-target channel.
//!
//! Each target sees the coherent plane-wave sum of the element signals
//! toward its angle, scaled by the monostatic radar-equation amplitude and
//! delayed by the round trip `2R/c`. Receive element `m` then adds its own
//! plane-wave delay `τ_m(θ)`. All delays are exact fractional delays applied
//! in the frequency domain, carrier phase included.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::spectral::{self, Dft};
use crate::tx::{far_field_spectrum, ArrayGeometry, TxFrame};
use crate::{Error, Result, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub range_m: f64,
    pub theta_deg: f64,
    pub rcs_dbsm: f64,
}

impl Target {
    pub fn new(range_m: f64, theta_deg: f64, rcs_dbsm: f64) -> Result<Self> {
        let t = Self {
            range_m,
            theta_deg,
            rcs_dbsm,
        };
        t.validate(0)?;
        Ok(t)
    }

    fn validate(&self, index: usize) -> Result<()> {
        if !(self.range_m.is_finite() && self.range_m > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "target {index}: range {} must be positive",
                self.range_m
            )));
        }
        if !(self.theta_deg.is_finite() && self.theta_deg.abs() < 90.0) {
            return Err(Error::InvalidScenario(format!(
                "target {index}: angle {} is outside (-90°, 90°)",
                self.theta_deg
            )));
        }
        if !self.rcs_dbsm.is_finite() {
            return Err(Error::InvalidScenario(format!(
                "target {index}: RCS is not finite"
            )));
        }
        Ok(())
    }

    /// Round-trip delay in samples at `fs`.
    pub fn delay_samples(&self, fs: f64) -> f64 {
        2.0 * self.range_m / SPEED_OF_LIGHT * fs
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Per-element SNR of the strongest echo, dB.
    pub snr_db: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub targets: Vec<Target>,
    /// Receive window length in units of the code length `N`.
    pub k_window: usize,
    pub noise: Option<NoiseSpec>,
}

impl Scenario {
    pub fn new(targets: Vec<Target>, k_window: usize) -> Self {
        Self {
            targets,
            k_window,
            noise: None,
        }
    }

    pub fn with_noise(mut self, noise: NoiseSpec) -> Self {
        self.noise = Some(noise);
        self
    }

    /// Checks that every echo of a length-`n` pulse fits the window.
    pub fn check_window(&self, n: usize, fs: f64) -> Result<()> {
        if self.k_window == 0 {
            return Err(Error::InvalidScenario(
                "receive window must be at least one pulse".into(),
            ));
        }
        let window = self.k_window * n;
        for (index, t) in self.targets.iter().enumerate() {
            t.validate(index)?;
            let needed = t.delay_samples(fs).ceil() as usize + n;
            if needed > window {
                return Err(Error::EchoOutsideWindow {
                    index,
                    range_m: t.range_m,
                    needed,
                    window,
                });
            }
        }
        Ok(())
    }

    /// Largest range whose echo still fits a window of `k_window` pulses.
    pub fn max_range(&self, n: usize, fs: f64) -> f64 {
        (self.k_window.saturating_sub(1) * n) as f64 / fs * SPEED_OF_LIGHT / 2.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RxStreams {
    pub streams: Vec<Vec<Complex64>>,
    pub sample_rate: f64,
}

impl RxStreams {
    pub fn m_elements(&self) -> usize {
        self.streams.len()
    }

    pub fn len(&self) -> usize {
        self.streams.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Field amplitude `sqrt(σ λ² / ((4π)³ R⁴))` of a point target.
pub fn target_amplitude(range_m: f64, rcs_dbsm: f64, carrier_hz: f64) -> f64 {
    let sigma = 10f64.powf(rcs_dbsm / 10.0);
    let lambda = SPEED_OF_LIGHT / carrier_hz;
    (sigma * lambda * lambda / ((4.0 * std::f64::consts::PI).powi(3) * range_m.powi(4))).sqrt()
}

pub fn propagate(tx: &TxFrame, scenario: &Scenario, geom: &ArrayGeometry) -> Result<RxStreams> {
    let n = tx.n();
    let fs = tx.sample_rate;
    if tx.m_elements() != geom.m_elements() {
        return Err(Error::LengthMismatch {
            expected: geom.m_elements(),
            actual: tx.m_elements(),
        });
    }
    scenario.check_window(n, fs)?;
    let window = scenario.k_window * n;
    let grid = window.next_power_of_two();
    let fc = geom.carrier_hz();

    if scenario.targets.is_empty() {
        return Ok(RxStreams {
            streams: vec![vec![Complex64::default(); window]; geom.m_elements()],
            sample_rate: fs,
        });
    }

    let dft = Dft::new(grid)?;
    let element_spectra: Vec<Vec<Complex64>> =
        tx.signals.par_iter().map(|s| dft.forward(s)).collect();

    // Scaled far-field spectrum toward each target, delayed by the round trip.
    let echoes: Vec<Vec<Complex64>> = scenario
        .targets
        .iter()
        .map(|t| {
            let mut x = far_field_spectrum(&element_spectra, geom, fs, t.theta_deg);
            let a = target_amplitude(t.range_m, t.rcs_dbsm, fc);
            x.iter_mut().for_each(|v| *v *= a);
            spectral::delay_in_place(&mut x, 2.0 * t.range_m / SPEED_OF_LIGHT, fs, fc);
            x
        })
        .collect();

    let mut streams: Vec<Vec<Complex64>> = (0..geom.m_elements())
        .into_par_iter()
        .map(|m| {
            let mut acc = vec![Complex64::default(); grid];
            for (t, echo) in scenario.targets.iter().zip(&echoes) {
                let tau = geom.delay(m, t.theta_deg);
                for (i, (dst, e)) in acc.iter_mut().zip(echo).enumerate() {
                    *dst +=
                        e * spectral::delay_phase(spectral::signed_bin(i, grid), grid, tau, fs, fc);
                }
            }
            dft.inverse_in_place(&mut acc);
            acc.truncate(window);
            acc
        })
        .collect();

    if let Some(noise) = scenario.noise {
        add_noise(&mut streams, &echoes, n, noise)?;
    }
    Ok(RxStreams {
        streams,
        sample_rate: fs,
    })
}

/// Complex white Gaussian noise referenced to the mean power of the
/// strongest echo over one pulse.
fn add_noise(
    streams: &mut [Vec<Complex64>],
    echoes: &[Vec<Complex64>],
    n: usize,
    noise: NoiseSpec,
) -> Result<()> {
    let strongest = echoes
        .iter()
        .map(|x| {
            let grid = x.len() as f64;
            x.iter().map(|v| v.norm_sqr()).sum::<f64>() / grid
        })
        .fold(0.0, f64::max);
    let signal_power = strongest / n as f64;
    let sigma2 = signal_power / 10f64.powf(noise.snr_db / 10.0);
    let normal = Normal::new(0.0, (sigma2 / 2.0).sqrt())
        .map_err(|e| Error::InvalidScenario(format!("noise: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    for stream in streams.iter_mut() {
        for v in stream.iter_mut() {
            *v += Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
        }
    }
    Ok(())
}
