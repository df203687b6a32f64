//! Space-code beamforming (SCB) radar simulation.
//!
//! Every transmit beam carries its own full-band Zadoff-Chu code, so each
//! beam keeps the full range resolution of the waveform while the code
//! space separates echoes that leak between adjacent beams.
//!
//! The crate is organised along the signal path:
//!
//! ```text
//! zc ──► spectral ──► tx ──► scene ──► rx ──► experiments / CLI
//! ```
//!
//! * [`zc`]: sequence generation, correlation diagnostics, seed ranking, code sets.
//! * [`spectral`]: power-of-two transforms, spectrum placement, fractional
//!   delays with carrier phase, overlap-add fast convolution.
//! * [`tx`]: array geometry, beam plans, per-element SCB synthesis, EIRP patterns.
//! * [`scene`]: far-field point-target channel.
//! * [`rx`]: overlap-add receive beamforming with spectral pulse compression,
//!   the subcarrier-split baseline, peak extraction and range-angle maps.
//! * [`config`], [`experiments`], [`export`], [`svg`]: CLI support.

pub mod config;
pub mod error;
pub mod experiments;
pub mod export;
pub mod rx;
pub mod scene;
pub mod spectral;
pub mod svg;
pub mod tx;
pub mod zc;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
