//! Receive chain: overlap-add block processing, per-beam delay compensation,
//! spectral pulse compression and range profiles.
//!
//! Per block of `N` samples every element is transformed once (zero-padded
//! to `2N`) and the spectra are shared by all beams. For beam `b`, element
//! `m` is multiplied by the conjugate of its transmit-side delay phase for
//! `θ_b` and by the conjugated `2N`-point code spectrum, the `M` products are
//! summed, and one inverse transform per beam feeds the overlap-add.
//!
//! The compensation phase and the code spectrum are folded into one
//! correlation template per (beam, element): the code delayed by `τ_m(θ_b)`,
//! windowed to `N + 1` taps. That keeps the per-element filter finite, so the
//! blocked result equals processing the whole stream at once.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::scene::RxStreams;
use crate::spectral::{self, Dft, OverlapAdd, SpectralFrame};
use crate::tx::{ArrayGeometry, BeamPlan};
use crate::zc::{generate_zc, is_prime, Code, CodeSet, CodeSetKind, ZcParams};
use crate::{Error, Result, SPEED_OF_LIGHT};

/// Compressed magnitude versus range for one beam. Bin `j` is a round-trip
/// delay of `j` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeProfile {
    pub beam_theta: f64,
    pub magnitudes: Vec<f64>,
    pub bin_to_meters: f64,
}

impl RangeProfile {
    pub fn range_of(&self, bin: usize) -> f64 {
        bin as f64 * self.bin_to_meters
    }

    pub fn bin_of(&self, range_m: f64) -> usize {
        (range_m / self.bin_to_meters).round() as usize
    }

    pub fn peak_bin(&self) -> usize {
        self.magnitudes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map_or(0, |(i, _)| i)
    }

    pub fn peak(&self) -> f64 {
        self.magnitudes.iter().cloned().fold(0.0, f64::max)
    }

    /// Largest magnitude within `±radius` bins of `bin`.
    pub fn max_near(&self, bin: usize, radius: usize) -> f64 {
        let lo = bin.saturating_sub(radius);
        let hi = (bin + radius + 1).min(self.magnitudes.len());
        self.magnitudes[lo..hi].iter().cloned().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub beam_theta: f64,
    pub bin: usize,
    pub range_m: f64,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeAngleMap {
    pub thetas: Vec<f64>,
    pub bin_to_meters: f64,
    /// One row per beam, in plan order.
    pub rows: Vec<Vec<f64>>,
}

impl RangeAngleMap {
    pub fn bins(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// The `count` largest cells that are local maxima along range,
    /// as `(row, bin, magnitude)`, strongest first.
    pub fn dominant_cells(
        &self,
        count: usize,
        min_separation_bins: usize,
    ) -> Vec<(usize, usize, f64)> {
        let mut cells = Vec::new();
        for (r, row) in self.rows.iter().enumerate() {
            for i in 0..row.len() {
                let left = if i > 0 { row[i - 1] } else { 0.0 };
                let right = row.get(i + 1).copied().unwrap_or(0.0);
                if row[i] > 0.0 && row[i] >= left && row[i] > right {
                    cells.push((r, i, row[i]));
                }
            }
        }
        cells.sort_by(|a, b| b.2.total_cmp(&a.2));
        let mut picked: Vec<(usize, usize, f64)> = Vec::new();
        for c in cells {
            if picked.len() == count {
                break;
            }
            if picked
                .iter()
                .all(|p| p.0 != c.0 || p.1.abs_diff(c.1) >= min_separation_bins)
            {
                picked.push(c);
            }
        }
        picked
    }
}

pub fn bin_to_meters(sample_rate: f64) -> f64 {
    SPEED_OF_LIGHT / (2.0 * sample_rate)
}

/// Template support offset: taps `[-1, N-1]` when the delays are negative,
/// `[0, N]` otherwise.
fn template_start(theta_deg: f64) -> i64 {
    if theta_deg < 0.0 {
        -1
    } else {
        0
    }
}

/// Correlation template for one element of one beam, `N + 1` taps starting
/// at `start`: the code delayed by `tau` on the `2N` grid.
fn correlation_template(
    code: &[Complex64],
    dft2n: &Dft,
    tau: f64,
    fs: f64,
    fc: f64,
    start: i64,
) -> Vec<Complex64> {
    let two_n = dft2n.len();
    let n = code.len();
    let mut spec = dft2n.forward(code);
    spectral::delay_in_place(&mut spec, tau, fs, fc);
    dft2n.inverse_in_place(&mut spec);
    (0..=n as i64)
        .map(|j| spec[(start + j).rem_euclid(two_n as i64) as usize])
        .collect()
}

/// `conj` of the `2P`-point spectrum of a template placed at its taps.
fn template_multiplier(template: &[Complex64], start: i64, dft2p: &Dft) -> Vec<Complex64> {
    let two_p = dft2p.len() as i64;
    let mut buf = vec![Complex64::default(); two_p as usize];
    for (j, v) in template.iter().enumerate() {
        buf[(start + j as i64).rem_euclid(two_p) as usize] = *v;
    }
    dft2p.forward_in_place(&mut buf);
    buf.iter_mut().for_each(|v| *v = v.conj());
    buf
}

/// Runs the receive chain with the default block length `N`.
pub fn beamform_and_compress(
    rx: &RxStreams,
    plan: &BeamPlan,
    codes: &CodeSet,
    geom: &ArrayGeometry,
) -> Result<Vec<RangeProfile>> {
    beamform_and_compress_blocked(rx, plan, codes, geom, codes.n)
}

/// Receive chain with an explicit overlap-add block length. `block` must be
/// a power of two no shorter than the code; any valid choice gives the same
/// profiles up to rounding.
pub fn beamform_and_compress_blocked(
    rx: &RxStreams,
    plan: &BeamPlan,
    codes: &CodeSet,
    geom: &ArrayGeometry,
    block: usize,
) -> Result<Vec<RangeProfile>> {
    plan.check_codes(codes)?;
    if rx.m_elements() != geom.m_elements() {
        return Err(Error::LengthMismatch {
            expected: geom.m_elements(),
            actual: rx.m_elements(),
        });
    }
    let n = codes.n;
    if block < n {
        return Err(Error::InvalidParams(format!(
            "block length {block} is shorter than the code length {n}"
        )));
    }
    let ola = OverlapAdd::new(block)?;
    let dft2n = Dft::new(2 * n)?;
    let fs = rx.sample_rate;
    let fc = geom.carrier_hz();

    // Window length rounded up to whole blocks of N, as delivered.
    let len = rx.len().div_ceil(n).max(1) * n;
    let blocks = ola.block_count(len);

    // Element spectra, computed once and shared by every beam.
    let element_blocks: Vec<Vec<Vec<Complex64>>> = (0..blocks)
        .map(|i| {
            rx.streams
                .par_iter()
                .map(|s| ola.block_spectrum(s, i))
                .collect()
        })
        .collect();

    let b2m = bin_to_meters(fs);
    plan.beams()
        .par_iter()
        .map(|beam| {
            let code = &codes.codes[beam.code_index].samples;
            let start = template_start(beam.theta_deg);
            let multipliers: Vec<Vec<Complex64>> = (0..geom.m_elements())
                .map(|m| {
                    let tau = geom.delay(m, beam.theta_deg);
                    let t = correlation_template(code, &dft2n, tau, fs, fc, start);
                    template_multiplier(&t, start, ola.dft())
                })
                .collect();

            // Lags run from -(N + start) upward; `block` leading samples absorb them.
            let mut out = vec![Complex64::default(); blocks * block + 3 * block];
            for (i, spectra) in element_blocks.iter().enumerate() {
                let mut acc = vec![Complex64::default(); 2 * block];
                for (x, h) in spectra.iter().zip(&multipliers) {
                    for ((a, xv), hv) in acc.iter_mut().zip(x).zip(h) {
                        *a += xv * hv;
                    }
                }
                // Circular lag p maps to p for p <= block - 1 - start, else p - 2·block.
                let split = (block as i64 - start) as usize;
                let mut corr = acc;
                ola.dft().inverse_in_place(&mut corr);
                let base = block + i * block;
                for (p, v) in corr.into_iter().enumerate() {
                    let idx = if p < split {
                        base + p
                    } else {
                        base + p - 2 * block
                    };
                    out[idx] += v;
                }
            }
            Ok(RangeProfile {
                beam_theta: beam.theta_deg,
                magnitudes: out[block..block + len].iter().map(|v| v.norm()).collect(),
                bin_to_meters: b2m,
            })
        })
        .collect()
}

/// Same pipeline with every beam transmitting and matching code 0. `rx`
/// must come from a single-code transmission.
pub fn single_code_mode(
    rx: &RxStreams,
    plan: &BeamPlan,
    codes: &CodeSet,
    geom: &ArrayGeometry,
) -> Result<Vec<RangeProfile>> {
    beamform_and_compress(rx, &plan.single_code(), codes, geom)
}

/// Largest prime not above `n`.
fn prime_at_most(n: u64) -> Option<u64> {
    (2..=n).rev().find(|&p| is_prime(p))
}

/// Baseline codes that split the `n_zc` occupied bins into `n_beams`
/// contiguous disjoint blocks. Block `b` carries a Zadoff-Chu sequence of the
/// largest prime length that fits, seed `length - 1`; leftover bins are unused.
pub fn subcarrier_code_set(n_zc: u64, n_beams: usize, n: usize) -> Result<CodeSet> {
    if n_beams == 0 {
        return Err(Error::Empty("subcarrier beam count"));
    }
    let occupied = spectral::placement_bins(n_zc);
    let width = occupied.len() / n_beams;
    if width < 16 {
        return Err(Error::DegenerateBlock(width));
    }
    let block_len = prime_at_most(width as u64).expect("width >= 16 has a prime below it");
    let seed = block_len - 1;
    let z = generate_zc(ZcParams::new(seed, block_len)?);
    let codes = (0..n_beams)
        .map(|b| {
            let mut spectrum = SpectralFrame::zeros(n)?;
            for (k, v) in occupied[b * width..].iter().zip(z.samples()) {
                spectrum.set(*k, *v);
            }
            let samples = spectral::synthesize_time(&spectrum);
            Ok(Code {
                seed,
                zc_len: block_len,
                spectrum,
                samples,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CodeSet::from_parts(
        n_zc,
        n,
        CodeSetKind::Subcarrier { block_len },
        codes,
    ))
}

/// Receive chain for the subcarrier-split baseline; `rx` must come from a
/// transmission with `baseline_codes`.
pub fn subcarrier_baseline(
    rx: &RxStreams,
    plan: &BeamPlan,
    baseline_codes: &CodeSet,
    geom: &ArrayGeometry,
) -> Result<Vec<RangeProfile>> {
    if !matches!(baseline_codes.kind, CodeSetKind::Subcarrier { .. }) {
        return Err(Error::InvalidParams(
            "subcarrier baseline needs a subcarrier code set".into(),
        ));
    }
    beamform_and_compress(rx, plan, baseline_codes, geom)
}

/// Local maxima above `threshold_rel` of the profile maximum, picked
/// strongest first at least `min_separation_bins` apart. Neighbouring picks
/// must be separated by a valley at least 3 dB below the weaker one;
/// otherwise the weaker pick is dropped.
pub fn extract_peaks(
    profile: &RangeProfile,
    min_separation_bins: usize,
    threshold_rel: f64,
) -> Vec<Detection> {
    let mags = &profile.magnitudes;
    let global = profile.peak();
    if global <= 0.0 || !(threshold_rel > 0.0 && threshold_rel <= 1.0) {
        return Vec::new();
    }
    let floor = threshold_rel * global;
    let mut candidates: Vec<usize> = (0..mags.len())
        .filter(|&i| {
            let left = if i > 0 {
                mags[i - 1]
            } else {
                f64::NEG_INFINITY
            };
            let right = mags.get(i + 1).copied().unwrap_or(f64::NEG_INFINITY);
            mags[i] >= floor && mags[i] >= left && mags[i] > right
        })
        .collect();
    candidates.sort_by(|&a, &b| mags[b].total_cmp(&mags[a]).then(a.cmp(&b)));

    let mut picked: Vec<usize> = Vec::new();
    for c in candidates {
        if picked
            .iter()
            .all(|&p| p.abs_diff(c) >= min_separation_bins.max(1))
        {
            picked.push(c);
        }
    }
    picked.sort_unstable();

    let valley_ratio = 10f64.powf(-3.0 / 20.0);
    loop {
        let merge = picked.windows(2).position(|w| {
            let valley = mags[w[0]..=w[1]]
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            valley > valley_ratio * mags[w[0]].min(mags[w[1]])
        });
        match merge {
            Some(i) => {
                let drop = if mags[picked[i]] < mags[picked[i + 1]] {
                    i
                } else {
                    i + 1
                };
                picked.remove(drop);
            }
            None => break,
        }
    }

    picked
        .into_iter()
        .map(|bin| Detection {
            beam_theta: profile.beam_theta,
            bin,
            range_m: profile.range_of(bin),
            magnitude: mags[bin],
        })
        .collect()
}

pub fn assemble_map(profiles: &[RangeProfile]) -> Result<RangeAngleMap> {
    let first = profiles.first().ok_or(Error::Empty("range profiles"))?;
    let len = first.magnitudes.len();
    if let Some(p) = profiles.iter().find(|p| p.magnitudes.len() != len) {
        return Err(Error::LengthMismatch {
            expected: len,
            actual: p.magnitudes.len(),
        });
    }
    Ok(RangeAngleMap {
        thetas: profiles.iter().map(|p| p.beam_theta).collect(),
        bin_to_meters: first.bin_to_meters,
        rows: profiles.iter().map(|p| p.magnitudes.clone()).collect(),
    })
}
