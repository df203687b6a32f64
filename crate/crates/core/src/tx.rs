//! Transmit side: array geometry, beam plans, per-element SCB synthesis and
//! EIRP patterns.
//!
//! Angles are in degrees from broadside, positive toward increasing element
//! index. Beam amplitudes `α_b` multiply the code spectra directly; the
//! digital power of a beam is `α_b²` milliwatts at full scale.

use std::collections::HashSet;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::spectral::{self, Dft};
use crate::zc::CodeSet;
use crate::{Error, Result, SPEED_OF_LIGHT};

/// Uniform linear array with half-wavelength spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    m_elements: usize,
    carrier_hz: f64,
}

impl ArrayGeometry {
    pub fn new(m_elements: usize, carrier_hz: f64) -> Result<Self> {
        if m_elements == 0 {
            return Err(Error::InvalidParams(
                "array needs at least one element".into(),
            ));
        }
        if !(carrier_hz.is_finite() && carrier_hz > 0.0) {
            return Err(Error::InvalidParams(format!(
                "carrier frequency must be positive, got {carrier_hz}"
            )));
        }
        Ok(Self {
            m_elements,
            carrier_hz,
        })
    }

    pub fn m_elements(&self) -> usize {
        self.m_elements
    }

    pub fn carrier_hz(&self) -> f64 {
        self.carrier_hz
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    pub fn spacing(&self) -> f64 {
        self.wavelength() / 2.0
    }

    pub fn position(&self, m: usize) -> f64 {
        m as f64 * self.spacing()
    }

    /// Signed plane-wave delay `d_m sin θ / c` of element `m`.
    pub fn delay(&self, m: usize, theta_deg: f64) -> f64 {
        self.position(m) * theta_deg.to_radians().sin() / SPEED_OF_LIGHT
    }
}

pub fn element_delay(geom: &ArrayGeometry, m: usize, theta_deg: f64) -> f64 {
    geom.delay(m, theta_deg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beam {
    pub theta_deg: f64,
    pub alpha: f64,
    pub code_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamPlan {
    beams: Vec<Beam>,
}

impl BeamPlan {
    pub fn new(beams: Vec<Beam>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (i, b) in beams.iter().enumerate() {
            validate_beam(i, b)?;
            if !seen.insert(b.code_index) {
                return Err(Error::InvalidPlan(format!(
                    "code {} is assigned to more than one beam",
                    b.code_index
                )));
            }
        }
        Ok(Self { beams })
    }

    /// Beam `b` steered to `thetas[b]` with amplitude `alpha` and code `b`.
    pub fn uniform(thetas: &[f64], alpha: f64) -> Result<Self> {
        Self::new(
            thetas
                .iter()
                .enumerate()
                .map(|(code_index, &theta_deg)| Beam {
                    theta_deg,
                    alpha,
                    code_index,
                })
                .collect(),
        )
    }

    /// The same steering and power with every beam on code 0. This is the
    /// single-code comparison arm and the only plan that shares a code.
    pub fn single_code(&self) -> Self {
        Self {
            beams: self
                .beams
                .iter()
                .map(|b| Beam {
                    code_index: 0,
                    ..*b
                })
                .collect(),
        }
    }

    pub fn beams(&self) -> &[Beam] {
        &self.beams
    }

    pub fn len(&self) -> usize {
        self.beams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beams.is_empty()
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.beams.iter().map(|b| b.theta_deg).collect()
    }

    pub(crate) fn check_codes(&self, codes: &CodeSet) -> Result<()> {
        for b in &self.beams {
            if b.code_index >= codes.len() {
                return Err(Error::InvalidPlan(format!(
                    "beam at {}° uses code {} but the code set has {}",
                    b.theta_deg,
                    b.code_index,
                    codes.len()
                )));
            }
        }
        if let Some(c) = codes.codes.iter().find(|c| c.samples.len() != codes.n) {
            return Err(Error::LengthMismatch {
                expected: codes.n,
                actual: c.samples.len(),
            });
        }
        Ok(())
    }
}

fn validate_beam(i: usize, b: &Beam) -> Result<()> {
    if !(b.theta_deg.is_finite() && b.theta_deg.abs() < 90.0) {
        return Err(Error::InvalidPlan(format!(
            "beam {i}: angle {} is outside (-90°, 90°)",
            b.theta_deg
        )));
    }
    if !(b.alpha.is_finite() && b.alpha >= 0.0) {
        return Err(Error::InvalidPlan(format!(
            "beam {i}: amplitude {} must be nonnegative",
            b.alpha
        )));
    }
    Ok(())
}

/// Per-element transmit signals, one row per element.
#[derive(Debug, Clone, PartialEq)]
pub struct TxFrame {
    pub signals: Vec<Vec<Complex64>>,
    pub sample_rate: f64,
}

impl TxFrame {
    pub fn m_elements(&self) -> usize {
        self.signals.len()
    }

    pub fn n(&self) -> usize {
        self.signals.first().map_or(0, Vec::len)
    }

    pub fn energy(&self) -> f64 {
        self.signals
            .iter()
            .flat_map(|row| row.iter())
            .map(|v| v.norm_sqr())
            .sum()
    }
}

/// Element `m` transmits the inverse transform of `Σ_b α_b S_b[k]` delayed by
/// `τ_{m,b}` (baseband phase and carrier phase). Beams are summed in the
/// frequency domain, then one inverse transform runs per element.
pub fn synthesize_tx(
    plan: &BeamPlan,
    codes: &CodeSet,
    geom: &ArrayGeometry,
    sample_rate: f64,
) -> Result<TxFrame> {
    plan.check_codes(codes)?;
    let n = codes.n;
    let dft = Dft::new(n)?;
    let fc = geom.carrier_hz();
    let signals = (0..geom.m_elements())
        .into_par_iter()
        .map(|m| {
            let mut acc = vec![Complex64::default(); n];
            for beam in plan.beams() {
                let tau = geom.delay(m, beam.theta_deg);
                let spectrum = codes.codes[beam.code_index].spectrum.bins();
                for (i, (dst, s)) in acc.iter_mut().zip(spectrum).enumerate() {
                    if *s != Complex64::default() {
                        let k = spectral::signed_bin(i, n);
                        *dst += beam.alpha * s * spectral::delay_phase(k, n, tau, sample_rate, fc);
                    }
                }
            }
            dft.inverse_in_place(&mut acc);
            acc
        })
        .collect();
    Ok(TxFrame {
        signals,
        sample_rate,
    })
}

/// Spectrum (on a `grid`-point transform) of the coherent far-field waveform
/// radiated toward `theta_deg`: each element is advanced by its path
/// difference and the elements are summed.
pub fn far_field_spectrum(
    element_spectra: &[Vec<Complex64>],
    geom: &ArrayGeometry,
    sample_rate: f64,
    theta_deg: f64,
) -> Vec<Complex64> {
    let grid = element_spectra.first().map_or(0, Vec::len);
    let fc = geom.carrier_hz();
    let mut out = vec![Complex64::default(); grid];
    if grid == 0 {
        return out;
    }
    // Chunks never straddle the jump from bin grid/2 - 1 to -grid/2, so the
    // phase within a chunk advances by a constant factor per bin.
    let chunk = (grid / 2).clamp(1, 256);
    let steps: Vec<(f64, Complex64)> = (0..element_spectra.len())
        .map(|m| {
            let tau = -geom.delay(m, theta_deg);
            (tau, spectral::delay_phase(1, grid, tau, sample_rate, 0.0))
        })
        .collect();
    out.par_chunks_mut(chunk).enumerate().for_each(|(c, dst)| {
        let first = c * chunk;
        let k0 = spectral::signed_bin(first, grid);
        for (spec, &(tau, step)) in element_spectra.iter().zip(&steps) {
            let mut phase = spectral::delay_phase(k0, grid, tau, sample_rate, fc);
            for (v, x) in dst.iter_mut().zip(&spec[first..]) {
                *v += x * phase;
                phase *= step;
            }
        }
    });
    out
}

/// Energy of the far-field waveform radiated toward each angle of `grid_deg`.
pub fn radiated_energy(tx: &TxFrame, geom: &ArrayGeometry, grid_deg: &[f64]) -> Result<Vec<f64>> {
    let n = tx.n();
    let dft = Dft::new(n)?;
    let spectra: Vec<Vec<Complex64>> = tx.signals.iter().map(|s| dft.forward(s)).collect();
    Ok(grid_deg
        .iter()
        .map(|&theta| {
            far_field_spectrum(&spectra, geom, tx.sample_rate, theta)
                .iter()
                .map(|v| v.norm_sqr())
                .sum::<f64>()
                / n as f64
        })
        .collect())
}

/// Narrowband array factor at the carrier for an array steered to `steer_deg`.
pub fn array_factor(geom: &ArrayGeometry, theta_deg: f64, steer_deg: f64) -> Complex64 {
    let fc = geom.carrier_hz();
    (0..geom.m_elements())
        .map(|m| {
            let cycles = fc * (geom.delay(m, theta_deg) - geom.delay(m, steer_deg));
            Complex64::cis(2.0 * std::f64::consts::PI * (cycles - cycles.round()))
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EirpPattern {
    pub theta_deg: Vec<f64>,
    /// Linear sum over beams, dBW.
    pub composite_db: Vec<f64>,
    /// Per-beam patterns `α_b² |AF(θ; θ_b)|²`, dBW, one row per beam.
    pub beams_db: Vec<Vec<f64>>,
}

impl EirpPattern {
    /// Upper envelope of the per-beam patterns, dBW.
    pub fn envelope_db(&self) -> Vec<f64> {
        (0..self.theta_deg.len())
            .map(|i| {
                self.beams_db
                    .iter()
                    .map(|row| row[i])
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect()
    }
}

fn to_db(p: f64) -> f64 {
    10.0 * p.max(1e-30).log10()
}

pub fn eirp_pattern(
    plan: &BeamPlan,
    geom: &ArrayGeometry,
    grid_deg: &[f64],
) -> Result<EirpPattern> {
    if let Some(bad) = grid_deg.iter().find(|t| t.is_nan() || t.abs() >= 90.0) {
        return Err(Error::InvalidParams(format!(
            "pattern grid angle {bad} is outside (-90°, 90°)"
        )));
    }
    let linear: Vec<Vec<f64>> = plan
        .beams()
        .par_iter()
        .map(|b| {
            let watts = b.alpha * b.alpha / 1000.0;
            grid_deg
                .iter()
                .map(|&t| watts * array_factor(geom, t, b.theta_deg).norm_sqr())
                .collect()
        })
        .collect();
    let composite_db = (0..grid_deg.len())
        .map(|i| to_db(linear.iter().map(|row| row[i]).sum()))
        .collect();
    Ok(EirpPattern {
        theta_deg: grid_deg.to_vec(),
        composite_db,
        beams_db: linear
            .into_iter()
            .map(|row| row.into_iter().map(to_db).collect())
            .collect(),
    })
}

/// `Σ_b α_b²` with `α_b²` in milliwatts, returned in watts.
pub fn total_digital_power(plan: &BeamPlan) -> f64 {
    plan.beams().iter().map(|b| b.alpha * b.alpha).sum::<f64>() / 1000.0
}

/// `count` angles from `start` in steps of `step` degrees.
pub fn angle_grid(start: f64, step: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| start + step * i as f64).collect()
}

/// The 41-beam grid −60°..60° at 3° spacing.
pub fn standard_beam_angles() -> Vec<f64> {
    angle_grid(-60.0, 3.0, 41)
}

/// The three power allocations shown for the 64-element EIRP comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EirpConfiguration {
    /// One long-range beam at −30° plus 40 reduced surveillance beams.
    LongRange,
    /// Two medium-range beams at +30° and +33° plus 39 reduced beams.
    MediumRange,
    /// 41 equal-power surveillance beams.
    Surveillance,
}

impl EirpConfiguration {
    pub const ALL: [EirpConfiguration; 3] =
        [Self::LongRange, Self::MediumRange, Self::Surveillance];

    pub fn label(&self) -> &'static str {
        match self {
            Self::LongRange => "a",
            Self::MediumRange => "b",
            Self::Surveillance => "c",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.label() == label)
    }

    /// Amplitude `α` (√mW) of a beam at `theta_deg` in this configuration.
    fn alpha_at(&self, theta_deg: f64) -> f64 {
        let near = |t: f64| (theta_deg - t).abs() < 1e-9;
        match self {
            Self::LongRange if near(-30.0) => 198.0,
            Self::LongRange => 8.0,
            Self::MediumRange if near(30.0) || near(33.0) => 126.0,
            Self::MediumRange => 16.0,
            Self::Surveillance => 32.0,
        }
    }

    pub fn plan(&self) -> BeamPlan {
        BeamPlan::new(
            standard_beam_angles()
                .into_iter()
                .enumerate()
                .map(|(code_index, theta_deg)| Beam {
                    theta_deg,
                    alpha: self.alpha_at(theta_deg),
                    code_index,
                })
                .collect(),
        )
        .expect("standard grid is a valid plan")
    }
}
