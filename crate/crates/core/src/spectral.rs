//! Power-of-two transforms, spectrum placement, frequency-domain delays and
//! overlap-add fast convolution.
//!
//! Conventions used throughout the crate:
//!
//! * The forward transform is unnormalized; the inverse scales by `1/n`.
//! * Signed bin `k ∈ [-n/2, n/2 - 1]` is stored at index `k mod n` (natural
//!   FFT order). [`SpectralFrame::signed_bin`] and [`SpectralFrame::index_of`]
//!   convert between the two.
//! * A delay `τ` multiplies bin `k` by `exp(-j2π τ (f_s k / n + f_c))`: the
//!   baseband linear phase plus the carrier true-time-delay term. `f_c = 0`
//!   gives the plain baseband shift.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::zc::ZcSequence;
use crate::{Error, Result};

/// In-place transform of arbitrary length; unnormalized in both directions.
pub(crate) fn fft_any(buf: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(buf.len())
    } else {
        planner.plan_fft_forward(buf.len())
    };
    fft.process(buf);
}

fn check_pow2(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    Ok(())
}

/// Planned forward/inverse pair for one power-of-two length. Cheap to clone
/// and safe to share between threads.
#[derive(Clone)]
pub struct Dft {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Dft {
    pub fn new(n: usize) -> Result<Self> {
        check_pow2(n)?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        self.fwd.process(buf);
    }

    /// Inverse transform including the `1/n` scale.
    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        self.inv.process(buf);
        let scale = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
    }

    /// Zero-pads `x` to the transform length and returns its spectrum.
    pub fn forward(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut buf = vec![Complex64::default(); self.n];
        buf[..x.len()].copy_from_slice(x);
        self.forward_in_place(&mut buf);
        buf
    }
}

impl std::fmt::Debug for Dft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dft").field("n", &self.n).finish()
    }
}

/// A length-`n` frequency-domain block in natural FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFrame {
    bins: Vec<Complex64>,
}

impl SpectralFrame {
    pub fn zeros(n: usize) -> Result<Self> {
        check_pow2(n)?;
        Ok(Self {
            bins: vec![Complex64::default(); n],
        })
    }

    pub fn from_bins(bins: Vec<Complex64>) -> Result<Self> {
        check_pow2(bins.len())?;
        Ok(Self { bins })
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn bins_mut(&mut self) -> &mut [Complex64] {
        &mut self.bins
    }

    pub fn into_bins(self) -> Vec<Complex64> {
        self.bins
    }

    /// Signed bin number of storage index `index`.
    pub fn signed_bin(&self, index: usize) -> i64 {
        signed_bin(index, self.len())
    }

    /// Storage index of signed bin `k`.
    pub fn index_of(&self, k: i64) -> usize {
        k.rem_euclid(self.len() as i64) as usize
    }

    pub fn get(&self, k: i64) -> Complex64 {
        self.bins[self.index_of(k)]
    }

    pub fn set(&mut self, k: i64, value: Complex64) {
        let idx = self.index_of(k);
        self.bins[idx] = value;
    }

    pub fn energy(&self) -> f64 {
        self.bins.iter().map(|v| v.norm_sqr()).sum()
    }

    /// `(k_signed, value)` pairs in ascending bin order.
    pub fn signed_iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let n = self.len() as i64;
        (-(n / 2)..n - n / 2).map(move |k| (k, self.get(k)))
    }
}

pub(crate) fn signed_bin(index: usize, n: usize) -> i64 {
    if index < n.div_ceil(2) {
        index as i64
    } else {
        index as i64 - n as i64
    }
}

/// A sampled complex baseband stream.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamBuffer {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
}

impl StreamBuffer {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty("stream buffer"));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

pub fn forward(x: &[Complex64], n: usize) -> Result<SpectralFrame> {
    check_pow2(n)?;
    if x.len() > n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: x.len(),
        });
    }
    Ok(SpectralFrame {
        bins: Dft::new(n)?.forward(x),
    })
}

pub fn inverse(frame: &SpectralFrame) -> Vec<Complex64> {
    let mut buf = frame.bins.clone();
    // Length was validated when the frame was built.
    Dft::new(buf.len())
        .expect("frame length is a power of two")
        .inverse_in_place(&mut buf);
    buf
}

/// Maps a sequence onto the bins around DC: negative bins
/// `k ∈ [⌊-N_zc/2⌋, -1]` carry `Z[N_zc + k]`, DC is zero, positive bins
/// `k ∈ [1, ⌊N_zc/2⌋]` carry `Z[k - 1]`, everything else is zero.
pub fn place_in_spectrum(z: &ZcSequence, n: usize) -> Result<SpectralFrame> {
    place_samples(z.samples(), n)
}

pub(crate) fn place_samples(z: &[Complex64], n: usize) -> Result<SpectralFrame> {
    check_pow2(n)?;
    let n_zc = z.len();
    if n < n_zc + 1 {
        return Err(Error::SpectrumTooSmall { n, n_zc });
    }
    let mut frame = SpectralFrame::zeros(n)?;
    for (k, value) in placement_bins(n_zc as u64)
        .into_iter()
        .zip(placement_order(z))
    {
        frame.set(k, value);
    }
    Ok(frame)
}

/// Signed bins occupied by a placed length-`n_zc` sequence, ascending.
pub fn placement_bins(n_zc: u64) -> Vec<i64> {
    let n_zc = n_zc as i64;
    let lowest = (-n_zc).div_euclid(2);
    (lowest..0).chain(1..=n_zc / 2).collect()
}

/// Sequence samples in the order they land on [`placement_bins`].
fn placement_order(z: &[Complex64]) -> impl Iterator<Item = Complex64> + '_ {
    let n_zc = z.len() as i64;
    let lowest = (-n_zc).div_euclid(2);
    (lowest..0)
        .map(move |k| z[(n_zc + k) as usize])
        .chain((1..=n_zc / 2).map(move |k| z[(k - 1) as usize]))
}

/// Time sequence of a frame. Carries the `1/n` inverse scale, so it differs
/// from the unnormalized synthesis sum by the constant factor `n`.
pub fn synthesize_time(frame: &SpectralFrame) -> Vec<Complex64> {
    inverse(frame)
}

/// Phase factor applied to signed bin `k` of an `n`-bin frame by a delay `tau`.
#[inline]
pub fn delay_phase(k: i64, n: usize, tau: f64, fs: f64, fc: f64) -> Complex64 {
    let cycles = tau * fs * k as f64 / n as f64 + tau * fc;
    Complex64::cis(-2.0 * PI * (cycles - cycles.round()))
}

/// Multiplies every bin of a natural-order spectrum by its delay phase.
pub fn delay_in_place(bins: &mut [Complex64], tau: f64, fs: f64, fc: f64) {
    if tau == 0.0 {
        return;
    }
    let n = bins.len();
    for (i, v) in bins.iter_mut().enumerate() {
        *v *= delay_phase(signed_bin(i, n), n, tau, fs, fc);
    }
}

pub fn apply_delay(frame: &SpectralFrame, tau: f64, fs: f64, fc: f64) -> SpectralFrame {
    let mut out = frame.clone();
    delay_in_place(&mut out.bins, tau, fs, fc);
    out
}

/// `2n`-point spectrum of `s` zero-padded to `2n`.
pub fn oversampled_code_spectrum(s: &[Complex64]) -> Result<SpectralFrame> {
    forward(s, 2 * s.len())
}

/// Block engine behind the receive chain: splits a stream into `block`
/// sample segments, transforms each zero-padded to `2·block`, and sums
/// inverse-transformed blocks back with a `block`-sample overlap.
#[derive(Debug, Clone)]
pub struct OverlapAdd {
    block: usize,
    dft: Dft,
}

impl OverlapAdd {
    pub fn new(block: usize) -> Result<Self> {
        check_pow2(block)?;
        Ok(Self {
            block,
            dft: Dft::new(2 * block)?,
        })
    }

    pub fn block(&self) -> usize {
        self.block
    }

    pub fn dft(&self) -> &Dft {
        &self.dft
    }

    pub fn block_count(&self, len: usize) -> usize {
        len.div_ceil(self.block)
    }

    /// `2·block` spectrum of segment `index` of `stream`.
    pub fn block_spectrum(&self, stream: &[Complex64], index: usize) -> Vec<Complex64> {
        let start = (index * self.block).min(stream.len());
        let end = (start + self.block).min(stream.len());
        self.dft.forward(&stream[start..end])
    }

    /// Inverse-transforms a processed block spectrum and adds it into `out`
    /// starting at `offset + index·block`.
    pub fn accumulate(
        &self,
        out: &mut [Complex64],
        offset: usize,
        index: usize,
        mut spectrum: Vec<Complex64>,
    ) {
        self.dft.inverse_in_place(&mut spectrum);
        let start = offset + index * self.block;
        for (dst, src) in out[start..].iter_mut().zip(spectrum) {
            *dst += src;
        }
    }
}

/// Linear convolution of `stream` with the impulse response (at most
/// `block` taps) whose `2·block`-point spectrum is `multiplier`.
/// Output length is `len + block - 1`.
pub fn overlap_add_filter(
    stream: &StreamBuffer,
    multiplier: &SpectralFrame,
    block: usize,
) -> Result<StreamBuffer> {
    if multiplier.len() != 2 * block {
        return Err(Error::LengthMismatch {
            expected: 2 * block,
            actual: multiplier.len(),
        });
    }
    let ola = OverlapAdd::new(block)?;
    let len = stream.len();
    let blocks = ola.block_count(len);
    let mut out = vec![Complex64::default(); blocks * block + 2 * block];
    for i in 0..blocks {
        let mut spec = ola.block_spectrum(&stream.samples, i);
        spec.iter_mut()
            .zip(multiplier.bins())
            .for_each(|(x, h)| *x *= h);
        ola.accumulate(&mut out, 0, i, spec);
    }
    out.truncate(len + block - 1);
    StreamBuffer::new(out, stream.sample_rate)
}
