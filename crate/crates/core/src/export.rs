//! CSV writers for every exported artifact.

use std::io::Write;

use crate::rx::{Detection, RangeAngleMap, RangeProfile};
use crate::spectral::SpectralFrame;
use crate::tx::EirpPattern;
use crate::zc::{CorrelationProfile, SeedRank};
use crate::Result;

pub fn to_db(magnitude: f64) -> f64 {
    20.0 * magnitude.max(1e-300).log10()
}

/// `lag, magnitude`.
pub fn write_correlation<W: Write>(w: W, profile: &CorrelationProfile) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["lag", "magnitude"])?;
    for (lag, v) in profile.lags.iter().zip(&profile.values) {
        csv.serialize((lag, v.norm()))?;
    }
    csv.flush()?;
    Ok(())
}

/// `seed, magnitude, ratio` where `ratio = magnitude / reference`.
pub fn write_seed_magnitudes<W: Write>(w: W, rows: &[(u64, f64)], reference: f64) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["seed", "magnitude", "ratio"])?;
    for (seed, mag) in rows {
        csv.serialize((seed, mag, mag / reference))?;
    }
    csv.flush()?;
    Ok(())
}

/// `seed, magnitude, ratio`; magnitude is the ratio in dB.
pub fn write_seed_ranking<W: Write>(w: W, table: &[SeedRank]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["seed", "magnitude", "ratio"])?;
    for r in table {
        csv.serialize((r.seed, to_db(r.ratio), r.ratio))?;
    }
    csv.flush()?;
    Ok(())
}

/// `k_signed, re, im` in ascending bin order.
pub fn write_spectral_frame<W: Write>(w: W, frame: &SpectralFrame) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["k_signed", "re", "im"])?;
    for (k, v) in frame.signed_iter() {
        csv.serialize((k, v.re, v.im))?;
    }
    csv.flush()?;
    Ok(())
}

/// `theta_deg, composite_dB, beam_0_dB, ...`.
pub fn write_eirp<W: Write>(w: W, pattern: &EirpPattern) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    let mut header = vec!["theta_deg".to_string(), "composite_dB".to_string()];
    header.extend((0..pattern.beams_db.len()).map(|b| format!("beam_{b}_dB")));
    csv.write_record(&header)?;
    for (i, theta) in pattern.theta_deg.iter().enumerate() {
        let mut row = vec![theta.to_string(), pattern.composite_db[i].to_string()];
        row.extend(pattern.beams_db.iter().map(|b| b[i].to_string()));
        csv.write_record(&row)?;
    }
    csv.flush()?;
    Ok(())
}

/// `bin, range_m, magnitude, magnitude_db`.
pub fn write_range_profile<W: Write>(w: W, profile: &RangeProfile) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["bin", "range_m", "magnitude", "magnitude_db"])?;
    for (bin, m) in profile.magnitudes.iter().enumerate() {
        csv.serialize((bin, profile.range_of(bin), m, to_db(*m)))?;
    }
    csv.flush()?;
    Ok(())
}

/// Header row of ranges, then one row per beam led by its angle.
pub fn write_range_angle_map<W: Write>(w: W, map: &RangeAngleMap) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    let mut header = vec!["theta_deg".to_string()];
    header.extend((0..map.bins()).map(|b| (b as f64 * map.bin_to_meters).to_string()));
    csv.write_record(&header)?;
    for (theta, row) in map.thetas.iter().zip(&map.rows) {
        let mut rec = vec![theta.to_string()];
        rec.extend(row.iter().map(|m| m.to_string()));
        csv.write_record(&rec)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn write_detections<W: Write>(w: W, detections: &[Detection]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["beam_theta", "range_m", "bin", "magnitude", "magnitude_db"])?;
    for d in detections {
        csv.serialize((
            d.beam_theta,
            d.range_m,
            d.bin,
            d.magnitude,
            to_db(d.magnitude),
        ))?;
    }
    csv.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn spectral_frame_rows_are_signed() {
        let mut f = SpectralFrame::zeros(4).unwrap();
        f.set(-1, Complex64::new(1.0, 2.0));
        let mut buf = Vec::new();
        write_spectral_frame(&mut buf, &f).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "k_signed,re,im");
        assert_eq!(lines[1], "-2,0.0,0.0");
        assert_eq!(lines[2], "-1,1.0,2.0");
        assert_eq!(lines.len(), 5);
    }

    #[test]
    fn profile_rows() {
        let p = RangeProfile {
            beam_theta: 0.0,
            magnitudes: vec![1.0, 10.0],
            bin_to_meters: 15.0,
        };
        let mut buf = Vec::new();
        write_range_profile(&mut buf, &p).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(2).unwrap(), "1,15.0,10.0,20.0");
    }
}
