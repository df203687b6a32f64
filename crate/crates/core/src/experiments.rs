//! Experiment orchestration behind the CLI verbs: sequence analysis, EIRP
//! patterns, end-to-end simulation and the full reproduction run. Each
//! experiment writes its artifacts under `<out>/<id>/` and returns a report
//! with the outcome of its built-in assertions.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::{Analysis, Format, Mode, RunConfig, SystemConfig};
use crate::export;
use crate::rx::{self, RangeProfile};
use crate::scene::{self, Scenario, Target};
use crate::svg::{self, HeatMap, LinePlot, Series};
use crate::tx::{self, BeamPlan, EirpConfiguration};
use crate::zc::{self, ZcParams};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentReport {
    pub id: String,
    pub digest: String,
    pub artifacts: Vec<PathBuf>,
    pub assertions: Vec<Assertion>,
    pub warnings: Vec<String>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter().filter(|a| !a.passed)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "experiment = \"{}\"\ndigest = \"{}\"\nstatus = \"{}\"\n",
            self.id,
            self.digest,
            if self.passed() { "pass" } else { "fail" }
        );
        for w in &self.warnings {
            s.push_str(&format!("warning = \"{}\"\n", w.replace('"', "'")));
        }
        for a in &self.assertions {
            s.push_str(&format!(
                "\n[[assertion]]\nname = \"{}\"\nresult = \"{}\"\ndetail = \"{}\"\n",
                a.name,
                if a.passed { "PASS" } else { "FAIL" },
                a.detail.replace('"', "'")
            ));
        }
        for p in &self.artifacts {
            s.push_str(&format!("\n[[artifact]]\npath = \"{}\"\n", p.display()));
        }
        s
    }
}

/// Writes artifacts into one experiment directory.
struct Sink {
    dir: PathBuf,
    csv: bool,
    svg: bool,
    artifacts: Vec<PathBuf>,
}

impl Sink {
    fn new(cfg: &RunConfig) -> Result<Self> {
        let dir = cfg.outputs.dir.join(&cfg.id);
        fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            csv: cfg.outputs.wants(Format::Csv),
            svg: cfg.outputs.wants(Format::Svg),
            artifacts: Vec::new(),
        })
    }

    fn csv(&mut self, name: &str, write: impl FnOnce(BufWriter<File>) -> Result<()>) -> Result<()> {
        if self.csv {
            let path = self.dir.join(name);
            write(BufWriter::new(File::create(&path)?))?;
            self.artifacts.push(path);
        }
        Ok(())
    }

    fn svg(&mut self, name: &str, render: impl FnOnce() -> String) -> Result<()> {
        if self.svg {
            let path = self.dir.join(name);
            fs::write(&path, render())?;
            self.artifacts.push(path);
        }
        Ok(())
    }

    fn finish(
        self,
        cfg: &RunConfig,
        assertions: Vec<Assertion>,
        warnings: Vec<String>,
    ) -> Result<ExperimentReport> {
        let report_path = self.dir.join("report.txt");
        let mut artifacts = self.artifacts;
        artifacts.push(report_path.clone());
        let report = ExperimentReport {
            id: cfg.id.clone(),
            digest: cfg.digest(),
            artifacts,
            assertions,
            warnings,
        };
        fs::write(report_path, report.to_text())?;
        Ok(report)
    }
}

fn db(x: f64) -> f64 {
    export::to_db(x)
}

// ---------------------------------------------------------------------------
// Sequence analysis

/// Worst off-peak periodic autocorrelation, relative to the length, over
/// every prime length up to `max_len` and every seed.
pub fn pacf_sweep(max_len: u64) -> Result<(f64, f64)> {
    let primes: Vec<u64> = (2..=max_len).filter(|&p| zc::is_prime(p)).collect();
    let results = primes
        .par_iter()
        .flat_map_iter(|&p| (1..p).map(move |q| (q, p)))
        .map(|(q, p)| {
            let r = zc::periodic_autocorr(&zc::generate_zc(ZcParams::new(q, p)?));
            let off = r.values[1..].iter().map(|v| v.norm()).fold(0.0, f64::max);
            Ok((
                off / p as f64,
                (r.values[0].norm() - p as f64).abs() / p as f64,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(results.into_iter().fold((0.0, 0.0), |acc, (off, peak)| {
        (acc.0.max(off), acc.1.max(peak))
    }))
}

/// Peak cross-correlation of `seed` against every other seed of `n_zc`.
/// Seeds sharing a factor with a non-prime length are included.
pub fn crosscorr_sweep(seed: u64, n_zc: u64) -> Result<Vec<(u64, f64)>> {
    let reference = zc::generate_zc(ZcParams::any_seed(seed % n_zc, n_zc)?);
    (1..n_zc)
        .into_par_iter()
        .filter(|&q| q != seed % n_zc)
        .map(|q| {
            let other = zc::generate_zc(ZcParams::any_seed(q, n_zc)?);
            Ok((q, zc::periodic_crosscorr_peak(&reference, &other)?))
        })
        .collect()
}

/// Best `count` seeds of the full ranking for `n_zc` placed in `n` bins.
pub fn best_seeds(n_zc: u64, n: usize, count: usize) -> Result<Vec<zc::SeedRank>> {
    let mut table = zc::rank_seeds(n_zc, n, 1..n_zc)?;
    zc::sort_by_ratio(&mut table);
    table.truncate(count);
    Ok(table)
}

pub fn check_seed_ranking(n_zc: u64, n: usize) -> Result<Assertion> {
    let best = best_seeds(n_zc, n, 10)?;
    let far: Vec<u64> = best
        .iter()
        .map(|r| r.seed)
        .filter(|s| s.abs_diff(n_zc) > 40)
        .collect();
    Ok(Assertion::new(
        "seed_ranking_near_length",
        far.is_empty(),
        format!(
            "10 best seeds {:?}; outside ±40 of {n_zc}: {far:?}",
            best.iter().map(|r| r.seed).collect::<Vec<_>>()
        ),
    ))
}

pub fn seq_analyze(cfg: &RunConfig) -> Result<ExperimentReport> {
    let seq = cfg
        .sequence
        .clone()
        .ok_or_else(|| Error::Config("seq-analyze needs a [sequence] section".into()))?;
    let mut sink = Sink::new(cfg)?;
    let mut assertions = Vec::new();

    for analysis in &seq.analyses {
        match analysis {
            Analysis::Acf => {
                let q = seq
                    .q
                    .ok_or_else(|| Error::Config("acf analysis needs a seed q".into()))?;
                let z = zc::generate_zc(ZcParams::new(q, seq.n_zc)?);
                let periodic = zc::periodic_autocorr(&z);
                let aperiodic = zc::aperiodic_autocorr(z.samples())?;
                sink.csv("periodic_acf.csv", |w| {
                    export::write_correlation(w, &periodic)
                })?;
                sink.csv("aperiodic_acf.csv", |w| {
                    export::write_correlation(w, &aperiodic)
                })?;

                let peak = seq.n_zc as f64;
                let p_side = periodic.values[1..]
                    .iter()
                    .map(|v| v.norm())
                    .fold(0.0, f64::max);
                let centre = z.len() - 1;
                let a_side = aperiodic
                    .values
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != centre)
                    .map(|(_, v)| v.norm())
                    .fold(0.0, f64::max);
                assertions.push(Assertion::new(
                    "periodic_acf_impulse",
                    p_side < 1e-9 * peak,
                    format!("off-peak {p_side:.3e}, peak {peak}"),
                ));
                assertions.push(Assertion::new(
                    "aperiodic_acf_side_peaks",
                    a_side > 1e3 * p_side.max(1e-12),
                    format!("largest aperiodic side peak {:.2} dB", db(a_side / peak)),
                ));

                let lags_p: Vec<f64> = periodic.lags.iter().map(|&l| l as f64).collect();
                let lags_a: Vec<f64> = aperiodic.lags.iter().map(|&l| l as f64).collect();
                let mp: Vec<f64> = periodic
                    .values
                    .iter()
                    .map(|v| db(v.norm() / peak))
                    .collect();
                let ma: Vec<f64> = aperiodic
                    .values
                    .iter()
                    .map(|v| db(v.norm() / peak))
                    .collect();
                sink.svg("acf.svg", || {
                    svg::line_plot(&LinePlot {
                        title: format!("Autocorrelation, q = {q}, N_zc = {}", seq.n_zc),
                        x_label: "lag".into(),
                        y_label: "normalized magnitude (dB)".into(),
                        series: vec![
                            Series {
                                label: "aperiodic".into(),
                                x: &lags_a,
                                y: &ma,
                            },
                            Series {
                                label: "periodic".into(),
                                x: &lags_p,
                                y: &mp,
                            },
                        ],
                        y_floor: Some(-80.0),
                    })
                })?;
            }
            Analysis::Crosscorr => {
                let q = seq
                    .q
                    .ok_or_else(|| Error::Config("crosscorr analysis needs a seed q".into()))?;
                let mut lengths = vec![seq.n_zc];
                lengths.extend(seq.compare_n_zc);
                let mut curves = Vec::new();
                for &len in &lengths {
                    let sweep = crosscorr_sweep(q, len)?;
                    sink.csv(&format!("crosscorr_{len}.csv"), |w| {
                        export::write_seed_magnitudes(w, &sweep, len as f64)
                    })?;
                    let root = (len as f64).sqrt();
                    let max = sweep.iter().map(|r| r.1).fold(0.0, f64::max);
                    if zc::is_prime(len) {
                        let worst = sweep
                            .iter()
                            .map(|r| (r.1 - root).abs() / root)
                            .fold(0.0, f64::max);
                        assertions.push(Assertion::new(
                            format!("pccf_constant_{len}"),
                            worst < 1e-6,
                            format!("max relative deviation from sqrt({len}) = {worst:.3e}"),
                        ));
                    } else {
                        assertions.push(Assertion::new(
                            format!("pccf_spread_{len}"),
                            max >= 2.0 * root,
                            format!("max peak {max:.2} vs 2·sqrt({len}) = {:.2}", 2.0 * root),
                        ));
                    }
                    curves.push((
                        len,
                        sweep.iter().map(|r| r.0 as f64).collect::<Vec<_>>(),
                        sweep.iter().map(|r| r.1 / len as f64).collect::<Vec<_>>(),
                    ));
                }
                sink.svg("crosscorr.svg", || {
                    svg::line_plot(&LinePlot {
                        title: format!("Peak cross-correlation against seed {q}"),
                        x_label: "seed".into(),
                        y_label: "normalized peak magnitude".into(),
                        series: curves
                            .iter()
                            .map(|(len, x, y)| Series {
                                label: format!("N_zc = {len}"),
                                x,
                                y,
                            })
                            .collect(),
                        y_floor: None,
                    })
                })?;
            }
            Analysis::Ranking => {
                let n = seq.n.unwrap_or((seq.n_zc as usize + 1).next_power_of_two());
                let table = zc::rank_seeds(seq.n_zc, n, 1..seq.n_zc)?;
                sink.csv("seed_ranking.csv", |w| {
                    export::write_seed_ranking(w, &table)
                })?;
                let x: Vec<f64> = table.iter().map(|r| r.seed as f64).collect();
                let y: Vec<f64> = table.iter().map(|r| db(r.ratio)).collect();
                sink.svg("seed_ranking.svg", || {
                    svg::line_plot(&LinePlot {
                        title: format!("Side-peak ratio, N_zc = {} in N = {n}", seq.n_zc),
                        x_label: "seed".into(),
                        y_label: "side peak / peak (dB)".into(),
                        series: vec![Series {
                            label: "ratio".into(),
                            x: &x,
                            y: &y,
                        }],
                        y_floor: None,
                    })
                })?;

                let mut sorted = table.clone();
                zc::sort_by_ratio(&mut sorted);
                let best: Vec<u64> = sorted.iter().take(10).map(|r| r.seed).collect();
                let far: Vec<u64> = best
                    .iter()
                    .copied()
                    .filter(|s| s.abs_diff(seq.n_zc) > 40)
                    .collect();
                assertions.push(Assertion::new(
                    "seed_ranking_near_length",
                    far.is_empty(),
                    format!(
                        "10 best seeds {best:?}; outside ±40 of {}: {far:?}",
                        seq.n_zc
                    ),
                ));

                let mut highlighted = Vec::new();
                for &seed in &seq.highlight_seeds {
                    let z = zc::generate_zc(ZcParams::new(seed % seq.n_zc, seq.n_zc)?);
                    let s = crate::spectral::synthesize_time(&crate::spectral::place_in_spectrum(
                        &z, n,
                    )?);
                    let acf = zc::aperiodic_autocorr(&s)?;
                    sink.csv(&format!("synth_acf_{seed}.csv"), |w| {
                        export::write_correlation(w, &acf)
                    })?;
                    let peak = acf.values[s.len() - 1].norm();
                    highlighted.push((
                        seed,
                        acf.lags.iter().map(|&l| l as f64).collect::<Vec<_>>(),
                        acf.values
                            .iter()
                            .map(|v| db(v.norm() / peak))
                            .collect::<Vec<_>>(),
                    ));
                }
                if let [(s1, ..), (s2, ..)] = highlighted.as_slice() {
                    let r = |seed: u64| table.iter().find(|r| r.seed == seed).map(|r| r.ratio);
                    if let (Some(r1), Some(r2)) = (r(*s1), r(*s2)) {
                        assertions.push(Assertion::new(
                            format!("seed_{s1}_below_{s2}"),
                            r1 < r2,
                            format!(
                                "ratio({s1}) = {:.2} dB, ratio({s2}) = {:.2} dB",
                                db(r1),
                                db(r2)
                            ),
                        ));
                    }
                }
                if !highlighted.is_empty() {
                    sink.svg("synth_acf.svg", || {
                        svg::line_plot(&LinePlot {
                            title: format!(
                                "Synthesized autocorrelation, N_zc = {} in N = {n}",
                                seq.n_zc
                            ),
                            x_label: "lag".into(),
                            y_label: "normalized magnitude (dB)".into(),
                            series: highlighted
                                .iter()
                                .map(|(seed, x, y)| Series {
                                    label: format!("seed {seed}"),
                                    x,
                                    y,
                                })
                                .collect(),
                            y_floor: Some(-80.0),
                        })
                    })?;
                }
            }
        }
    }
    sink.finish(cfg, assertions, Vec::new())
}

// ---------------------------------------------------------------------------
// EIRP

/// Symmetric angle grid strictly inside (−90°, 90°).
pub fn pattern_grid(step_deg: f64) -> Vec<f64> {
    let count = (90.0 / step_deg).ceil() as i64 - 1;
    (-count..=count).map(|i| i as f64 * step_deg).collect()
}

pub fn eirp(cfg: &RunConfig) -> Result<ExperimentReport> {
    let eirp_cfg = cfg.eirp.clone().unwrap_or_default();
    let geom = cfg.system.geometry()?;
    let grid = pattern_grid(eirp_cfg.grid_step_deg);
    let mut sink = Sink::new(cfg)?;
    let mut assertions = Vec::new();
    let mut warnings = Vec::new();
    let mut curves = Vec::new();

    for label in &eirp_cfg.configurations {
        let (plan, preset) = if label == "custom" {
            (cfg.system.plan()?, None)
        } else {
            let c = EirpConfiguration::from_label(label)
                .ok_or_else(|| Error::Config(format!("unknown EIRP configuration '{label}'")))?;
            (c.plan(), Some(c))
        };
        if plan.is_empty() {
            return Err(Error::InvalidPlan("EIRP needs at least one beam".into()));
        }
        let power = tx::total_digital_power(&plan);
        if power > eirp_cfg.budget_w {
            warnings.push(format!(
                "configuration {label}: total digital power {power:.3} W exceeds the {} W budget",
                eirp_cfg.budget_w
            ));
        }
        let pattern = tx::eirp_pattern(&plan, &geom, &grid)?;
        sink.csv(&format!("eirp_{label}.csv"), |w| {
            export::write_eirp(w, &pattern)
        })?;

        if let Some(c) = preset {
            assertions.push(Assertion::new(
                format!("power_budget_{label}"),
                (power - eirp_cfg.budget_w).abs() <= 0.3,
                format!("{power:.3} W vs {} W", eirp_cfg.budget_w),
            ));
            let peak_theta = pattern.theta_deg[argmax(&pattern.composite_db)];
            match c {
                EirpConfiguration::LongRange => assertions.push(Assertion::new(
                    "long_range_beam_dominates",
                    (peak_theta + 30.0).abs() <= eirp_cfg.grid_step_deg,
                    format!("composite peak at {peak_theta}°"),
                )),
                EirpConfiguration::MediumRange => assertions.push(Assertion::new(
                    "medium_range_beams_dominate",
                    (peak_theta - 30.0).abs() <= 0.5 || (peak_theta - 33.0).abs() <= 0.5,
                    format!("composite peak at {peak_theta}°"),
                )),
                EirpConfiguration::Surveillance => {
                    let centres: Vec<f64> = plan
                        .thetas()
                        .iter()
                        .map(|t| pattern.composite_db[nearest(&pattern.theta_deg, *t)])
                        .collect();
                    let spread = centres.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                        - centres.iter().cloned().fold(f64::INFINITY, f64::min);
                    assertions.push(Assertion::new(
                        "surveillance_flat_at_beam_centres",
                        spread < 1.0,
                        format!("composite spread over beam centres {spread:.3} dB"),
                    ));
                }
            }
        }
        curves.push((label.clone(), pattern.composite_db));
    }
    sink.svg("eirp.svg", || {
        svg::line_plot(&LinePlot {
            title: format!("EIRP, {}-element array", geom.m_elements()),
            x_label: "angle (deg)".into(),
            y_label: "EIRP (dBW)".into(),
            series: curves
                .iter()
                .map(|(label, y)| Series {
                    label: format!("configuration {label}"),
                    x: &grid,
                    y,
                })
                .collect(),
            y_floor: Some(0.0),
        })
    })?;
    sink.finish(cfg, assertions, warnings)
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map_or(0, |(i, _)| i)
}

fn nearest(values: &[f64], x: f64) -> usize {
    values
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
        .map_or(0, |(i, _)| i)
}

// ---------------------------------------------------------------------------
// End-to-end simulation

/// Transmit, propagate and receive with the given mode. `block` selects the
/// overlap-add block length (defaults to the code length).
pub fn run_mode(
    sys: &SystemConfig,
    scenario: &Scenario,
    mode: Mode,
    block: Option<usize>,
) -> Result<Vec<RangeProfile>> {
    sys.validate()?;
    let geom = sys.geometry()?;
    let plan = sys.plan()?;
    let (codes, tx_plan) = match mode {
        Mode::Multi => (
            zc::build_code_set(sys.n_zc, plan.len(), sys.n)?,
            plan.clone(),
        ),
        Mode::Single => (
            zc::build_code_set(sys.n_zc, plan.len(), sys.n)?,
            plan.single_code(),
        ),
        Mode::Subcarrier => (
            rx::subcarrier_code_set(sys.n_zc, plan.len(), sys.n)?,
            plan.clone(),
        ),
    };
    let frame = tx::synthesize_tx(&tx_plan, &codes, &geom, sys.fs_hz)?;
    let streams = scene::propagate(&frame, scenario, &geom)?;
    match (mode, block) {
        (_, Some(b)) => rx::beamform_and_compress_blocked(&streams, &tx_plan, &codes, &geom, b),
        (Mode::Multi, None) => rx::beamform_and_compress(&streams, &plan, &codes, &geom),
        (Mode::Single, None) => rx::single_code_mode(&streams, &plan, &codes, &geom),
        (Mode::Subcarrier, None) => rx::subcarrier_baseline(&streams, &plan, &codes, &geom),
    }
}

/// Expected profile bin of a target at `range_m`.
pub fn range_bin(range_m: f64, fs: f64) -> usize {
    (2.0 * range_m * fs / crate::SPEED_OF_LIGHT).round() as usize
}

fn profile_at(profiles: &[RangeProfile], theta: f64) -> Option<&RangeProfile> {
    profiles
        .iter()
        .find(|p| (p.beam_theta - theta).abs() < 1e-9)
}

/// Leakage comparison for two targets in adjacent beams: the far target's
/// beam is inspected at the near target's range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakageResult {
    pub multi_ghost: f64,
    pub single_ghost: f64,
    pub multi_true_peak: f64,
    pub near_peak_bin: usize,
    pub far_peak_bin: usize,
}

impl LeakageResult {
    /// Multi-code ghost relative to the true peak in the same beam, dB.
    pub fn ghost_margin_db(&self) -> f64 {
        db(self.multi_true_peak) - db(self.multi_ghost)
    }

    pub fn assertions(&self, near_bin: usize, far_bin: usize) -> Vec<Assertion> {
        vec![
            Assertion::new(
                "near_beam_peak_at_near_target",
                self.near_peak_bin.abs_diff(near_bin) <= 1,
                format!("peak bin {} vs expected {near_bin}", self.near_peak_bin),
            ),
            Assertion::new(
                "far_beam_peak_at_far_target",
                self.far_peak_bin.abs_diff(far_bin) <= 1,
                format!("peak bin {} vs expected {far_bin}", self.far_peak_bin),
            ),
            Assertion::new(
                "multi_code_ghost_below_single_code",
                self.multi_ghost < self.single_ghost,
                format!(
                    "ghost: multi {:.2} dB, single {:.2} dB",
                    db(self.multi_ghost),
                    db(self.single_ghost)
                ),
            ),
            Assertion::new(
                "multi_code_ghost_margin_10db",
                self.ghost_margin_db() >= 10.0,
                format!("ghost {:.2} dB below the true peak", self.ghost_margin_db()),
            ),
        ]
    }
}

pub fn leakage(
    multi: &[RangeProfile],
    single: &[RangeProfile],
    near: &Target,
    far: &Target,
    fs: f64,
) -> Result<LeakageResult> {
    let missing = |t: f64| Error::InvalidPlan(format!("no beam at {t}°"));
    let near_bin = range_bin(near.range_m, fs);
    let far_bin = range_bin(far.range_m, fs);
    let m_near = profile_at(multi, near.theta_deg).ok_or_else(|| missing(near.theta_deg))?;
    let m_far = profile_at(multi, far.theta_deg).ok_or_else(|| missing(far.theta_deg))?;
    let s_far = profile_at(single, far.theta_deg).ok_or_else(|| missing(far.theta_deg))?;
    Ok(LeakageResult {
        multi_ghost: m_far.max_near(near_bin, 1),
        single_ghost: s_far.max_near(near_bin, 1),
        multi_true_peak: m_far.max_near(far_bin, 1),
        near_peak_bin: m_near.peak_bin(),
        far_peak_bin: m_far.peak_bin(),
    })
}

/// Detections of one beam matched against expected target ranges.
pub fn resolution_check(
    name: &str,
    profile: &RangeProfile,
    expected_ranges: &[f64],
    fs: f64,
    want_resolved: bool,
    detection: &crate::config::DetectionConfig,
) -> Assertion {
    let dets = rx::extract_peaks(
        profile,
        detection.min_separation_bins,
        detection.threshold_rel,
    );
    let bins: Vec<usize> = dets.iter().map(|d| d.bin).collect();
    let passed = if want_resolved {
        bins.len() == expected_ranges.len()
            && expected_ranges
                .iter()
                .zip(&bins)
                .all(|(r, b)| b.abs_diff(range_bin(*r, fs)) <= 1)
    } else {
        bins.len() == 1
    };
    Assertion::new(
        name,
        passed,
        format!(
            "detections at bins {bins:?}, expected {} near {:?}",
            if want_resolved {
                expected_ranges.len()
            } else {
                1
            },
            expected_ranges
                .iter()
                .map(|r| range_bin(*r, fs))
                .collect::<Vec<_>>()
        ),
    )
}

fn report_beams(cfg: &RunConfig, plan: &BeamPlan) -> Vec<f64> {
    if !cfg.simulation.report_beams.is_empty() {
        return cfg.simulation.report_beams.clone();
    }
    let thetas = plan.thetas();
    let mut out: Vec<f64> = cfg
        .scenario
        .targets
        .iter()
        .map(|t| thetas[nearest(&thetas, t.theta_deg)])
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

pub fn simulate(cfg: &RunConfig) -> Result<ExperimentReport> {
    let sys = &cfg.system;
    sys.validate()?;
    let plan = sys.plan()?;
    if plan.is_empty() {
        return Err(Error::InvalidPlan(
            "simulation needs at least one beam".into(),
        ));
    }
    let scenario = cfg.scenario.scenario(sys.k_window)?;
    scenario.check_window(sys.n, sys.fs_hz)?;
    let mut sink = Sink::new(cfg)?;
    let mut assertions = Vec::new();
    let beams = report_beams(cfg, &plan);
    let det = &cfg.simulation.detection;

    let runs: Vec<(Mode, Vec<RangeProfile>)> = cfg
        .simulation
        .modes
        .iter()
        .map(|&mode| Ok((mode, run_mode(sys, &scenario, mode, None)?)))
        .collect::<Result<_>>()?;

    for (mode, profiles) in &runs {
        let name = mode.name();
        let map = rx::assemble_map(profiles)?;
        let detections: Vec<rx::Detection> = profiles
            .iter()
            .flat_map(|p| rx::extract_peaks(p, det.min_separation_bins, det.threshold_rel))
            .filter(|d| d.magnitude > 0.0)
            .collect();
        // Detections are relative to each beam's own maximum; keep only those
        // within the global dynamic range of the map.
        let global = profiles.iter().map(|p| p.peak()).fold(0.0, f64::max);
        let detections: Vec<_> = detections
            .into_iter()
            .filter(|d| d.magnitude >= det.threshold_rel * global)
            .collect();
        sink.csv(&format!("detections_{name}.csv"), |w| {
            export::write_detections(w, &detections)
        })?;
        sink.csv(&format!("map_{name}.csv"), |w| {
            export::write_range_angle_map(w, &map)
        })?;
        for theta in &beams {
            if let Some(p) = profile_at(profiles, *theta) {
                sink.csv(&format!("profile_{name}_{theta}deg.csv"), |w| {
                    export::write_range_profile(w, p)
                })?;
            }
        }
        let max_range = map.bins() as f64 * map.bin_to_meters;
        sink.svg(&format!("map_{name}.svg"), || {
            svg::heat_map(&HeatMap {
                title: format!("Range-angle map ({name})"),
                rows: &map.rows,
                x_extent: (0.0, max_range),
                y_values: &map.thetas,
                x_label: "range (m)".into(),
                y_label: "beam angle (deg)".into(),
                floor_db: -40.0,
                max_columns: 600,
            })
        })?;
        if scenario.targets.is_empty() {
            assertions.push(Assertion::new(
                format!("no_detections_{name}"),
                detections.is_empty(),
                format!("{} detections", detections.len()),
            ));
        }
    }

    // Profiles of the report beams, all modes overlaid, in dB of the global peak.
    let x_range: Vec<f64> = runs
        .first()
        .map(|(_, p)| {
            (0..p[0].magnitudes.len())
                .map(|b| p[0].range_of(b))
                .collect()
        })
        .unwrap_or_default();
    for theta in &beams {
        let curves: Vec<(String, Vec<f64>)> = runs
            .iter()
            .filter_map(|(mode, profiles)| {
                let p = profile_at(profiles, *theta)?;
                let peak = profiles
                    .iter()
                    .map(|p| p.peak())
                    .fold(0.0, f64::max)
                    .max(1e-300);
                Some((
                    mode.name().to_string(),
                    p.magnitudes.iter().map(|m| db(m / peak)).collect(),
                ))
            })
            .collect();
        sink.svg(&format!("profile_{theta}deg.svg"), || {
            svg::line_plot(&LinePlot {
                title: format!("Pulse compression output, {theta}° beam"),
                x_label: "range (m)".into(),
                y_label: "magnitude (dB)".into(),
                series: curves
                    .iter()
                    .map(|(label, y)| Series {
                        label: label.clone(),
                        x: &x_range,
                        y,
                    })
                    .collect(),
                y_floor: Some(-60.0),
            })
        })?;
    }

    assertions.extend(preset_assertions(cfg, &scenario, &runs)?);
    sink.finish(cfg, assertions, Vec::new())
}

/// Built-in checks for the two shipped target scenarios.
fn preset_assertions(
    cfg: &RunConfig,
    scenario: &Scenario,
    runs: &[(Mode, Vec<RangeProfile>)],
) -> Result<Vec<Assertion>> {
    let fs = cfg.system.fs_hz;
    let find = |m: Mode| runs.iter().find(|(mode, _)| *mode == m).map(|(_, p)| p);
    let mut out = Vec::new();
    match cfg.id.as_str() {
        "figure8" => {
            if let (Some(multi), Some(single), [near, far]) = (
                find(Mode::Multi),
                find(Mode::Single),
                scenario.targets.as_slice(),
            ) {
                let res = leakage(multi, single, near, far, fs)?;
                out.extend(res.assertions(range_bin(near.range_m, fs), range_bin(far.range_m, fs)));
            }
        }
        "figure10" => {
            let det = &cfg.simulation.detection;
            let mut pairs: Vec<(f64, Vec<f64>)> = Vec::new();
            for t in &scenario.targets {
                match pairs.iter_mut().find(|(theta, _)| *theta == t.theta_deg) {
                    Some((_, ranges)) => ranges.push(t.range_m),
                    None => pairs.push((t.theta_deg, vec![t.range_m])),
                }
            }
            for (mode, want_resolved) in [(Mode::Multi, true), (Mode::Subcarrier, false)] {
                let Some(profiles) = find(mode) else { continue };
                for (theta, ranges) in &pairs {
                    if let Some(p) = profile_at(profiles, *theta) {
                        out.push(resolution_check(
                            &format!(
                                "{}_{}deg_{}",
                                mode.name(),
                                theta,
                                if want_resolved { "resolved" } else { "merged" }
                            ),
                            p,
                            ranges,
                            fs,
                            want_resolved,
                            det,
                        ));
                    }
                }
            }
        }
        _ => {}
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Full reproduction

/// Single-beam steering check: peak angle of the radiated energy and its
/// gain over one element, in dB.
pub fn steering_check(sys: &SystemConfig, theta_b: f64) -> Result<(f64, f64)> {
    let geom = sys.geometry()?;
    let codes = zc::build_code_set(sys.n_zc, 1, sys.n)?;
    let plan = BeamPlan::uniform(&[theta_b], 1.0)?;
    let frame = tx::synthesize_tx(&plan, &codes, &geom, sys.fs_hz)?;

    let coarse: Vec<f64> = pattern_grid(1.0);
    let coarse_e = tx::radiated_energy(&frame, &geom, &coarse)?;
    let centre = coarse[argmax(&coarse_e)];
    let fine: Vec<f64> = (-20..=20)
        .map(|i| centre + 0.05 * i as f64)
        .filter(|t| t.abs() < 90.0)
        .collect();
    let fine_e = tx::radiated_energy(&frame, &geom, &fine)?;
    let i = argmax(&fine_e);
    let single: f64 = codes.codes[0].samples.iter().map(|v| v.norm_sqr()).sum();
    Ok((fine[i], 10.0 * (fine_e[i] / single).log10()))
}

pub fn blocking_invariance(sys: &SystemConfig, scenario: &Scenario) -> Result<f64> {
    let blocked = run_mode(sys, scenario, Mode::Multi, Some(sys.n))?;
    let whole = (sys.k_window * sys.n).next_power_of_two();
    let mono = run_mode(sys, scenario, Mode::Multi, Some(whole))?;
    let peak = mono.iter().map(|p| p.peak()).fold(0.0, f64::max);
    let diff = blocked
        .iter()
        .zip(&mono)
        .flat_map(|(a, b)| {
            a.magnitudes
                .iter()
                .zip(&b.magnitudes)
                .map(|(x, y)| (x - y).abs())
        })
        .fold(0.0, f64::max);
    Ok(diff / peak)
}

fn write_summary(out: &Path, reports: &[ExperimentReport]) -> Result<ExperimentReport> {
    let mut summary = ExperimentReport {
        id: "reproduce-all".into(),
        ..Default::default()
    };
    let mut digests = String::new();
    for r in reports {
        digests.push_str(&r.digest);
        summary.artifacts.extend(r.artifacts.iter().cloned());
        summary.warnings.extend(r.warnings.iter().cloned());
        summary
            .assertions
            .extend(r.assertions.iter().map(|a| Assertion {
                name: format!("{}/{}", r.id, a.name),
                ..a.clone()
            }));
    }
    use sha2::{Digest, Sha256};
    summary.digest = hex::encode(Sha256::digest(digests.as_bytes()));
    fs::create_dir_all(out)?;
    let path = out.join("summary.txt");
    summary.artifacts.push(path.clone());
    fs::write(path, summary.to_text())?;
    Ok(summary)
}

pub fn reproduce_all(out: &Path) -> Result<ExperimentReport> {
    let mut reports = Vec::new();
    for name in crate::config::preset_names() {
        let mut cfg = crate::config::preset(name)?;
        cfg.outputs.dir = out.to_path_buf();
        let report = if cfg.sequence.is_some() {
            seq_analyze(&cfg)?
        } else if cfg.eirp.is_some() {
            eirp(&cfg)?
        } else {
            simulate(&cfg)?
        };
        reports.push(report);
    }

    let sys = SystemConfig::default();
    let mut checks = Vec::new();

    let (off, peak) = pacf_sweep(199)?;
    checks.push(Assertion::new(
        "pacf_impulse_primes_to_199",
        off < 1e-9 && peak < 1e-12,
        format!("worst off-peak/N_zc {off:.3e}, peak error {peak:.3e}"),
    ));

    for theta in [-60.0, -30.0, 0.0, 30.0, 60.0] {
        let (peak_at, gain) = steering_check(&sys, theta)?;
        let want = 20.0 * (sys.m_elements as f64).log10();
        checks.push(Assertion::new(
            format!("steering_{theta}deg"),
            (peak_at - theta).abs() <= 0.2 && (gain - want).abs() <= 0.5,
            format!("peak at {peak_at:.2}°, gain {gain:.2} dB (expected {want:.2})"),
        ));
    }

    for range in [1500.0, 3000.0, 4500.0, 9000.0] {
        let scenario = Scenario::new(vec![Target::new(range, 0.0, 0.0)?], sys.k_window);
        let profiles = run_mode(&sys, &scenario, Mode::Multi, None)?;
        let p = profile_at(&profiles, 0.0)
            .ok_or_else(|| Error::InvalidPlan("no broadside beam".into()))?;
        let want = range_bin(range, sys.fs_hz);
        checks.push(Assertion::new(
            format!("range_accuracy_{range}m"),
            p.peak_bin().abs_diff(want) <= 1,
            format!("peak bin {} vs {want}", p.peak_bin()),
        ));
    }

    let table = EirpConfiguration::Surveillance.plan();
    let p = tx::total_digital_power(&table);
    checks.push(Assertion::new(
        "table_power_41984mw",
        (p - 41.984).abs() < 1e-9,
        format!("{p} W"),
    ));

    let fig7 = crate::config::preset("figure8")?;
    let rel = blocking_invariance(&sys, &fig7.scenario.scenario(sys.k_window)?)?;
    checks.push(Assertion::new(
        "blocking_invariance",
        rel < 1e-9,
        format!("max relative difference {rel:.3e}"),
    ));

    let checks_cfg = RunConfig {
        id: "checks".into(),
        outputs: crate::config::OutputConfig {
            dir: out.to_path_buf(),
            ..Default::default()
        },
        ..Default::default()
    };
    let sink = Sink::new(&checks_cfg)?;
    reports.push(sink.finish(&checks_cfg, checks, Vec::new())?);
    write_summary(out, &reports)
}
