//! Zadoff-Chu sequences, their correlation diagnostics and the SCB code set.
//!
//! For odd lengths the generator uses
//!
//! ```text
//! Z[n] = exp(j 2π q n(n+1) / N_zc)
//! ```
//!
//! and for even lengths `Z[n] = exp(j π q n² / N_zc)`. Exponents are reduced
//! modulo the phase period in integer arithmetic before conversion to
//! floating point, so long sequences keep full phase precision.
//!
//! A code set places each prime-length sequence onto a power-of-two spectrum
//! (see [`crate::spectral::place_in_spectrum`]) and takes the inverse
//! transform; the resulting time sequences are what the radar transmits.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::spectral::{self, SpectralFrame};
use crate::{Error, Result};

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Deterministic trial division.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Seed and length of a Zadoff-Chu sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ZcParams {
    q: u64,
    n_zc: u64,
}

impl ZcParams {
    pub fn new(q: u64, n_zc: u64) -> Result<Self> {
        if n_zc < 2 {
            return Err(Error::InvalidParams(format!(
                "length must be at least 2, got {n_zc}"
            )));
        }
        if q == 0 || q >= n_zc {
            return Err(Error::InvalidParams(format!(
                "seed must satisfy 1 <= q < {n_zc}, got {q}"
            )));
        }
        let g = gcd(q, n_zc);
        if g != 1 {
            return Err(Error::NotCoprime { q, n_zc, gcd: g });
        }
        Ok(Self { q, n_zc })
    }

    /// Like [`ZcParams::new`] without the coprimality check. The resulting
    /// sequence follows the same formula but loses constant amplitude
    /// correlation properties; useful to study non-prime lengths.
    pub fn any_seed(q: u64, n_zc: u64) -> Result<Self> {
        match Self::new(q, n_zc) {
            Err(Error::NotCoprime { .. }) => Ok(Self { q, n_zc }),
            other => other,
        }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn n_zc(&self) -> u64 {
        self.n_zc
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZcSequence {
    params: ZcParams,
    samples: Vec<Complex64>,
}

impl ZcSequence {
    pub fn params(&self) -> ZcParams {
        self.params
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

pub fn generate_zc(params: ZcParams) -> ZcSequence {
    let q = params.q as u128;
    let n_zc = params.n_zc as u128;
    let samples = (0..n_zc)
        .map(|n| {
            // Phase is 2π·num/den with num reduced mod den.
            let (num, den) = if n_zc.is_multiple_of(2) {
                let den = 2 * n_zc;
                (((n * n) % den) * q % den, den)
            } else {
                ((((n * (n + 1)) % n_zc) * q) % n_zc, n_zc)
            };
            Complex64::cis(2.0 * PI * num as f64 / den as f64)
        })
        .collect();
    ZcSequence { params, samples }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationKind {
    Periodic,
    Aperiodic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationProfile {
    pub kind: CorrelationKind,
    pub lags: Vec<i64>,
    pub values: Vec<Complex64>,
}

impl CorrelationProfile {
    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn at_lag(&self, lag: i64) -> Option<Complex64> {
        let first = *self.lags.first()?;
        let idx = usize::try_from(lag - first).ok()?;
        self.values.get(idx).copied()
    }
}

/// Circular cross-correlation `R[j] = Σ a[(n+j) mod L] b*[n]` for `j = 0..L`.
fn circular_xcorr(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len();
    let mut fa = a.to_vec();
    let mut fb = b.to_vec();
    spectral::fft_any(&mut fa, false);
    spectral::fft_any(&mut fb, false);
    let mut prod: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x * y.conj()).collect();
    spectral::fft_any(&mut prod, true);
    let scale = 1.0 / n as f64;
    prod.iter_mut().for_each(|v| *v *= scale);
    prod
}

pub fn periodic_autocorr(seq: &ZcSequence) -> CorrelationProfile {
    let values = circular_xcorr(&seq.samples, &seq.samples);
    CorrelationProfile {
        kind: CorrelationKind::Periodic,
        lags: (0..values.len() as i64).collect(),
        values,
    }
}

/// Aperiodic autocorrelation over the zero-extended support, lags `-(L-1)..=(L-1)`.
pub fn aperiodic_autocorr(x: &[Complex64]) -> Result<CorrelationProfile> {
    if x.is_empty() {
        return Err(Error::Empty("aperiodic autocorrelation input"));
    }
    let len = x.len();
    let grid = (2 * len - 1).next_power_of_two();
    let mut buf = vec![Complex64::default(); grid];
    buf[..len].copy_from_slice(x);
    spectral::fft_any(&mut buf, false);
    buf.iter_mut()
        .for_each(|v| *v = Complex64::new(v.norm_sqr(), 0.0));
    spectral::fft_any(&mut buf, true);
    let scale = 1.0 / grid as f64;

    let max_lag = len as i64 - 1;
    let lags: Vec<i64> = (-max_lag..=max_lag).collect();
    let values = lags
        .iter()
        .map(|&j| buf[j.rem_euclid(grid as i64) as usize] * scale)
        .collect();
    Ok(CorrelationProfile {
        kind: CorrelationKind::Aperiodic,
        lags,
        values,
    })
}

/// Peak magnitude of the periodic cross-correlation over all lags.
pub fn periodic_crosscorr_peak(a: &ZcSequence, b: &ZcSequence) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(circular_xcorr(&a.samples, &b.samples)
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max))
}

/// Largest aperiodic autocorrelation magnitude away from lag 0, relative to
/// the lag-0 peak. Only the zero lag counts as main lobe.
pub fn side_peak_ratio(s: &[Complex64]) -> Result<f64> {
    let acf = aperiodic_autocorr(s)?;
    let centre = s.len() - 1;
    let peak = acf.values[centre].norm();
    if peak == 0.0 {
        return Ok(0.0);
    }
    let side = acf
        .values
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != centre)
        .map(|(_, v)| v.norm())
        .fold(0.0, f64::max);
    Ok(side / peak)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedRank {
    pub seed: u64,
    pub ratio: f64,
}

/// Side-peak ratio of the synthesized sequence for every seed coprime with
/// `n_zc`, in seed order. Thresholding is left to the caller.
pub fn rank_seeds(
    n_zc: u64,
    n: usize,
    seeds: impl IntoIterator<Item = u64>,
) -> Result<Vec<SeedRank>> {
    let seeds: Vec<u64> = seeds
        .into_iter()
        .filter(|&q| q % n_zc != 0 && gcd(q % n_zc, n_zc) == 1)
        .collect();
    seeds
        .par_iter()
        .map(|&seed| {
            let z = generate_zc(ZcParams::new(seed % n_zc, n_zc)?);
            let s = spectral::synthesize_time(&spectral::place_in_spectrum(&z, n)?);
            Ok(SeedRank {
                seed,
                ratio: side_peak_ratio(&s)?,
            })
        })
        .collect()
}

/// Sorts a ranking table best (lowest ratio) first; ties broken by seed.
pub fn sort_by_ratio(table: &mut [SeedRank]) {
    table.sort_by(|a, b| a.ratio.total_cmp(&b.ratio).then(a.seed.cmp(&b.seed)));
}

/// One transmit code: the placed spectrum and its time-domain sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Code {
    /// Nominal seed as listed in the code set (may exceed the length).
    pub seed: u64,
    /// Length of the Zadoff-Chu sequence carried by this code.
    pub zc_len: u64,
    pub spectrum: SpectralFrame,
    pub samples: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeSetKind {
    /// Every code occupies the full `n_zc`-bin band.
    FullBand,
    /// Codes occupy disjoint contiguous sub-bands of `block_len` bins.
    Subcarrier { block_len: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodeSet {
    pub n_zc: u64,
    pub n: usize,
    pub kind: CodeSetKind,
    pub codes: Vec<Code>,
}

impl CodeSet {
    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn seeds(&self) -> Vec<u64> {
        self.codes.iter().map(|c| c.seed).collect()
    }

    pub(crate) fn from_parts(n_zc: u64, n: usize, kind: CodeSetKind, codes: Vec<Code>) -> Self {
        Self {
            n_zc,
            n,
            kind,
            codes,
        }
    }
}

impl fmt::Display for CodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} codes, N_zc = {}, N = {}, seeds {:?}",
            self.codes.len(),
            self.n_zc,
            self.n,
            self.seeds()
        )
    }
}

/// The `n_codes` seeds nearest to `n_zc`, excluding `n_zc` itself, in
/// ascending order. Equal distances prefer the lower seed, so an odd count
/// extends the window by one on the low side.
pub fn code_seeds(n_zc: u64, n_codes: usize) -> Vec<u64> {
    let mut seeds = Vec::with_capacity(n_codes);
    let mut d = 1;
    while seeds.len() < n_codes {
        for s in [n_zc.checked_sub(d), Some(n_zc + d)].into_iter().flatten() {
            if seeds.len() < n_codes && s > 0 {
                seeds.push(s);
            }
        }
        d += 1;
    }
    seeds.sort_unstable();
    seeds
}

pub fn build_code_set(n_zc: u64, n_codes: usize, n: usize) -> Result<CodeSet> {
    if !is_prime(n_zc) {
        return Err(Error::NotPrime(n_zc));
    }
    let expected_n = (n_zc as usize).next_power_of_two();
    if n != expected_n {
        return Err(Error::InvalidParams(format!(
            "code length must be 2^ceil(log2({n_zc})) = {expected_n}, got {n}"
        )));
    }
    let max = (n_zc - 1) as usize;
    if n_codes == 0 || n_codes > max {
        return Err(Error::TooManyCodes {
            requested: n_codes,
            n_zc,
            max,
        });
    }
    let codes = code_seeds(n_zc, n_codes)
        .into_par_iter()
        .map(|seed| {
            let z = generate_zc(ZcParams::new(seed % n_zc, n_zc)?);
            let spectrum = spectral::place_in_spectrum(&z, n)?;
            let samples = spectral::synthesize_time(&spectrum);
            Ok(Code {
                seed,
                zc_len: n_zc,
                spectrum,
                samples,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CodeSet::from_parts(n_zc, n, CodeSetKind::FullBand, codes))
}
