//! Drive-cycle ingestion, validation and resampling.
//!
//! A cycle file is plain two-column delimited text (`time, speed`), comma or
//! whitespace separated, with optional `#` comment lines and an optional
//! one-line header. Speeds are converted to m/s on load; acceleration is the
//! forward difference to the next sample, zero at the last sample.

use std::fs;
use std::path::Path;

use thiserror::Error;

/// Unit of the speed column in a cycle file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpeedUnit {
    MetersPerSecond,
    KilometersPerHour,
}

impl SpeedUnit {
    fn to_mps(self, v: f64) -> f64 {
        match self {
            SpeedUnit::MetersPerSecond => v,
            SpeedUnit::KilometersPerHour => v / 3.6,
        }
    }
}

#[derive(Debug, Error)]
pub enum CycleError {
    #[error("cannot read cycle file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed row {row:?}")]
    MalformedRow { line: usize, row: String },
    #[error("line {line}: time {t} does not increase past {prev}")]
    NonMonotoneTime { line: usize, t: f64, prev: f64 },
    #[error("line {line}: negative speed {v}")]
    NegativeSpeed { line: usize, v: f64 },
    #[error("cycle needs at least 2 points, got {0}")]
    TooShort(usize),
    #[error("resample step must be positive, got {0}")]
    BadStep(f64),
}

/// One sample of the speed trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CyclePoint {
    /// Time since cycle start, s.
    pub t: f64,
    /// Speed, m/s.
    pub v: f64,
    /// Forward-difference acceleration over [t_i, t_{i+1}), m/s²; 0 at the last sample.
    pub a: f64,
}

/// An immutable, validated speed trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveCycle {
    pub name: String,
    points: Vec<CyclePoint>,
    duration: f64,
}

impl DriveCycle {
    /// Build a cycle from (t, v) samples in SI units.
    pub fn from_samples(name: &str, samples: &[(f64, f64)]) -> Result<Self, CycleError> {
        if samples.len() < 2 {
            return Err(CycleError::TooShort(samples.len()));
        }
        for (i, &(t, v)) in samples.iter().enumerate() {
            if i > 0 && t <= samples[i - 1].0 {
                return Err(CycleError::NonMonotoneTime {
                    line: i + 1,
                    t,
                    prev: samples[i - 1].0,
                });
            }
            if v < 0.0 {
                return Err(CycleError::NegativeSpeed { line: i + 1, v });
            }
        }
        Ok(Self::from_valid_samples(name, samples))
    }

    fn from_valid_samples(name: &str, samples: &[(f64, f64)]) -> Self {
        let n = samples.len();
        let points = samples
            .iter()
            .enumerate()
            .map(|(i, &(t, v))| {
                let a = if i + 1 < n {
                    let (tn, vn) = samples[i + 1];
                    (vn - v) / (tn - t)
                } else {
                    0.0
                };
                CyclePoint { t, v, a }
            })
            .collect();
        DriveCycle {
            name: name.to_string(),
            points,
            duration: samples[n - 1].0 - samples[0].0,
        }
    }

    pub fn points(&self) -> &[CyclePoint] {
        &self.points
    }

    /// Cycle duration T, s (last t minus first t).
    pub fn duration_s(&self) -> f64 {
        self.duration
    }

    /// Distance covered, m (trapezoidal integral of v).
    pub fn distance_m(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| 0.5 * (w[0].v + w[1].v) * (w[1].t - w[0].t))
            .sum()
    }

    /// Linear interpolation of speed at time `t` (clamped to the trace ends).
    pub fn speed_at(&self, t: f64) -> f64 {
        let pts = &self.points;
        if t <= pts[0].t {
            return pts[0].v;
        }
        if t >= pts[pts.len() - 1].t {
            return pts[pts.len() - 1].v;
        }
        // partition_point returns the first index with pts[i].t > t
        let hi = pts.partition_point(|p| p.t <= t);
        let (p0, p1) = (pts[hi - 1], pts[hi]);
        let u = (t - p0.t) / (p1.t - p0.t);
        p0.v + u * (p1.v - p0.v)
    }
}

/// Load a two-column cycle file and convert speeds to m/s.
pub fn load_cycle(path: &Path, unit: SpeedUnit) -> Result<DriveCycle, CycleError> {
    let text = fs::read_to_string(path).map_err(|source| CycleError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "cycle".to_string());

    let mut samples: Vec<(f64, f64)> = Vec::new();
    let mut header_allowed = true;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let row = raw.trim();
        if row.is_empty() || row.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = row
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        let parsed = if cols.len() == 2 {
            match (cols[0].parse::<f64>(), cols[1].parse::<f64>()) {
                (Ok(t), Ok(v)) => Some((t, v)),
                _ => None,
            }
        } else {
            None
        };
        match parsed {
            Some((t, v)) => {
                if let Some(&(prev, _)) = samples.last() {
                    if t <= prev {
                        return Err(CycleError::NonMonotoneTime { line, t, prev });
                    }
                }
                let v = unit.to_mps(v);
                if v < 0.0 {
                    return Err(CycleError::NegativeSpeed { line, v });
                }
                samples.push((t, v));
                header_allowed = false;
            }
            None if header_allowed => {
                // one non-numeric header line is tolerated
                header_allowed = false;
            }
            None => {
                return Err(CycleError::MalformedRow {
                    line,
                    row: row.to_string(),
                })
            }
        }
    }
    if samples.len() < 2 {
        return Err(CycleError::TooShort(samples.len()));
    }
    Ok(DriveCycle::from_valid_samples(&name, &samples))
}

/// Resample onto a uniform grid of step `dt` by linear interpolation.
///
/// The grid starts at the first sample time and extends to the first multiple
/// of `dt` at or past the original end, so the duration is preserved within
/// one `dt`. Acceleration is recomputed from the resampled speeds.
pub fn resample(cycle: &DriveCycle, dt: f64) -> Result<DriveCycle, CycleError> {
    if dt.is_nan() || dt <= 0.0 {
        return Err(CycleError::BadStep(dt));
    }
    let t0 = cycle.points()[0].t;
    let steps = ((cycle.duration_s() / dt) - 1e-9).ceil().max(1.0) as usize;
    let samples: Vec<(f64, f64)> = (0..=steps)
        .map(|i| {
            let t = t0 + i as f64 * dt;
            (t, cycle.speed_at(t))
        })
        .collect();
    Ok(DriveCycle::from_valid_samples(&cycle.name, &samples))
}
