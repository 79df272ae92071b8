//! Run configuration: a flat `key = value` text format with dotted section
//! prefixes, chosen so config snapshots diff cleanly. Every key has a
//! documented default; the emitted snapshot tags each value with where it
//! came from.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use evscale_core::cycle::SpeedUnit;
use evscale_core::design::DesignBounds;
use evscale_core::motor::ReferenceMachine;
use evscale_core::sim::PerformanceSpec;
use evscale_core::vehicle::VehicleParams;

use crate::CliError;

/// Provenance of an effective configuration value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueSource {
    /// Adopted from the published reference parameter set.
    Paper,
    /// Implementation default.
    Default,
    /// Set in the config file.
    Config,
    /// Overridden on the command line.
    Cli,
}

impl ValueSource {
    pub fn label(self) -> &'static str {
        match self {
            ValueSource::Paper => "paper",
            ValueSource::Default => "default",
            ValueSource::Config => "config",
            ValueSource::Cli => "cli",
        }
    }
}

/// Which study modes a run executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyMode {
    Proportional,
    Combined,
    Both,
}

impl StudyMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "proportional" => Some(StudyMode::Proportional),
            "combined" => Some(StudyMode::Combined),
            "both" => Some(StudyMode::Both),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            StudyMode::Proportional => "proportional",
            StudyMode::Combined => "combined",
            StudyMode::Both => "both",
        }
    }
}

/// The fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub vehicle: VehicleParams,
    pub reference: ReferenceMachine,
    pub spec: PerformanceSpec,
    pub bounds: DesignBounds,
    pub mode: StudyMode,
    pub iterations: usize,
    pub seeds: Vec<u64>,
    pub cycle_path: PathBuf,
    pub speed_unit: SpeedUnit,
    pub dt: f64,
    pub out_dir: PathBuf,
    pub trace: bool,
    pub penalty_fallback: f64,
    pub parallel_seeds: bool,
    /// Key → where its effective value came from.
    sources: BTreeMap<String, ValueSource>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            vehicle: VehicleParams::default(),
            reference: ReferenceMachine::default(),
            spec: PerformanceSpec::default(),
            bounds: DesignBounds::default(),
            mode: StudyMode::Both,
            iterations: 50,
            seeds: vec![1],
            cycle_path: PathBuf::from("data/wltc_class3.csv"),
            speed_unit: SpeedUnit::KilometersPerHour,
            dt: 1.0,
            out_dir: PathBuf::from("out"),
            trace: false,
            penalty_fallback: 1.0e8,
            parallel_seeds: false,
            sources: BTreeMap::new(),
        }
    }
}

/// Canonical key order for snapshots and reports, with the provenance of
/// each default.
const KEYS: &[(&str, ValueSource)] = &[
    ("vehicle.m_v", ValueSource::Paper),
    ("vehicle.r_w", ValueSource::Paper),
    ("vehicle.rho_a", ValueSource::Paper),
    ("vehicle.c_d", ValueSource::Paper),
    ("vehicle.a_f", ValueSource::Paper),
    ("vehicle.c_r", ValueSource::Default),
    ("vehicle.g", ValueSource::Paper),
    ("vehicle.eta_g", ValueSource::Paper),
    ("vehicle.regen_enabled", ValueSource::Default),
    ("motor.d_mw0", ValueSource::Default),
    ("motor.d_ml0", ValueSource::Default),
    ("motor.d_sd0", ValueSource::Default),
    ("motor.d_tw0", ValueSource::Default),
    ("motor.t_max0", ValueSource::Default),
    ("motor.w_base0", ValueSource::Default),
    ("motor.w_max0", ValueSource::Default),
    ("motor.c_cu", ValueSource::Default),
    ("motor.c_hys", ValueSource::Default),
    ("motor.c_eddy", ValueSource::Default),
    ("motor.c_mech", ValueSource::Default),
    ("motor.c_g", ValueSource::Default),
    ("motor.f_t", ValueSource::Default),
    ("motor.b_sat", ValueSource::Default),
    ("motor.c_ew", ValueSource::Default),
    ("spec.v_max_kmh", ValueSource::Paper),
    ("spec.v_acc_kmh", ValueSource::Paper),
    ("spec.t_acc_s", ValueSource::Paper),
    ("spec.alpha_max", ValueSource::Paper),
    ("bounds.k_ax_lo", ValueSource::Paper),
    ("bounds.k_ax_hi", ValueSource::Paper),
    ("bounds.k_rad_lo", ValueSource::Paper),
    ("bounds.k_rad_hi", ValueSource::Paper),
    ("bounds.k_mw_lo", ValueSource::Paper),
    ("bounds.k_mw_hi", ValueSource::Paper),
    ("bounds.k_ml_lo", ValueSource::Paper),
    ("bounds.k_ml_hi", ValueSource::Paper),
    ("bounds.k_sd_lo", ValueSource::Paper),
    ("bounds.k_sd_hi", ValueSource::Paper),
    ("bounds.k_tw_lo", ValueSource::Paper),
    ("bounds.k_tw_hi", ValueSource::Paper),
    ("bounds.gamma_lo", ValueSource::Paper),
    ("bounds.gamma_hi", ValueSource::Paper),
    ("run.mode", ValueSource::Default),
    ("run.iterations", ValueSource::Paper),
    ("run.seeds", ValueSource::Default),
    ("run.cycle", ValueSource::Default),
    ("run.speed_unit", ValueSource::Default),
    ("run.dt", ValueSource::Default),
    ("run.out", ValueSource::Default),
    ("run.trace", ValueSource::Default),
    ("run.penalty_fallback", ValueSource::Default),
    ("run.parallel_seeds", ValueSource::Default),
];

/// The reference search box; configs widening it draw a warning.
const REFERENCE_BOX: &[(&str, f64, f64)] = &[
    ("k_ax", 0.8, 1.2),
    ("k_rad", 0.8, 1.2),
    ("k_mw", 0.9, 1.1),
    ("k_ml", 0.9, 1.1),
    ("k_sd", 0.9, 1.1),
    ("k_tw", 0.9, 1.1),
    ("gamma", 1.0, 10.0),
];

fn parse_entries(text: &str) -> Result<Vec<(String, String, usize)>, CliError> {
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let body = body.trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| CliError::Config {
            path: format!("line {line}"),
            message: format!("expected `key = value`, got {body:?}"),
        })?;
        entries.push((key.trim().to_string(), value.trim().to_string(), line));
    }
    Ok(entries)
}

fn bad_value(key: &str, value: &str, expected: &str) -> CliError {
    CliError::Config {
        path: key.to_string(),
        message: format!("expected {expected}, got {value:?}"),
    }
}

impl RunConfig {
    /// Parse a config file's text on top of the defaults. Unknown keys and
    /// unparseable values are schema violations.
    pub fn from_text(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        for (key, value, line) in parse_entries(text)? {
            if !KEYS.iter().any(|(k, _)| *k == key) {
                return Err(CliError::Config {
                    path: key.clone(),
                    message: format!("unknown key (line {line})"),
                });
            }
            cfg.apply(&key, &value)?;
            cfg.sources.insert(key, ValueSource::Config);
        }
        Ok(cfg)
    }

    pub fn set_from_cli(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        self.apply(key, value)?;
        self.sources.insert(key.to_string(), ValueSource::Cli);
        Ok(())
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let f = |v: &str| -> Result<f64, CliError> {
            v.parse::<f64>().map_err(|_| bad_value(key, v, "a number"))
        };
        let b = |v: &str| -> Result<bool, CliError> {
            v.parse::<bool>()
                .map_err(|_| bad_value(key, v, "true or false"))
        };
        match key {
            "vehicle.m_v" => self.vehicle.m_v = f(value)?,
            "vehicle.r_w" => self.vehicle.r_w = f(value)?,
            "vehicle.rho_a" => self.vehicle.rho_a = f(value)?,
            "vehicle.c_d" => self.vehicle.c_d = f(value)?,
            "vehicle.a_f" => self.vehicle.a_f = f(value)?,
            "vehicle.c_r" => self.vehicle.c_r = f(value)?,
            "vehicle.g" => self.vehicle.g = f(value)?,
            "vehicle.eta_g" => self.vehicle.eta_g = f(value)?,
            "vehicle.regen_enabled" => self.vehicle.regen_enabled = b(value)?,
            "motor.d_mw0" => self.reference.d_mw0 = f(value)?,
            "motor.d_ml0" => self.reference.d_ml0 = f(value)?,
            "motor.d_sd0" => self.reference.d_sd0 = f(value)?,
            "motor.d_tw0" => self.reference.d_tw0 = f(value)?,
            "motor.t_max0" => self.reference.t_max0 = f(value)?,
            "motor.w_base0" => self.reference.w_base0 = f(value)?,
            "motor.w_max0" => self.reference.w_max0 = f(value)?,
            "motor.c_cu" => self.reference.c_cu = f(value)?,
            "motor.c_hys" => self.reference.c_hys = f(value)?,
            "motor.c_eddy" => self.reference.c_eddy = f(value)?,
            "motor.c_mech" => self.reference.c_mech = f(value)?,
            "motor.c_g" => self.reference.c_g = f(value)?,
            "motor.f_t" => self.reference.f_t = f(value)?,
            "motor.b_sat" => self.reference.b_sat = f(value)?,
            "motor.c_ew" => self.reference.c_ew = f(value)?,
            "spec.v_max_kmh" => self.spec.v_max = f(value)? / 3.6,
            "spec.v_acc_kmh" => self.spec.v_acc = f(value)? / 3.6,
            "spec.t_acc_s" => self.spec.t_acc = f(value)?,
            "spec.alpha_max" => self.spec.alpha_max = f(value)?,
            "bounds.k_ax_lo" => self.bounds.scale.k_ax.0 = f(value)?,
            "bounds.k_ax_hi" => self.bounds.scale.k_ax.1 = f(value)?,
            "bounds.k_rad_lo" => self.bounds.scale.k_rad.0 = f(value)?,
            "bounds.k_rad_hi" => self.bounds.scale.k_rad.1 = f(value)?,
            "bounds.k_mw_lo" => self.bounds.scale.k_mw.0 = f(value)?,
            "bounds.k_mw_hi" => self.bounds.scale.k_mw.1 = f(value)?,
            "bounds.k_ml_lo" => self.bounds.scale.k_ml.0 = f(value)?,
            "bounds.k_ml_hi" => self.bounds.scale.k_ml.1 = f(value)?,
            "bounds.k_sd_lo" => self.bounds.scale.k_sd.0 = f(value)?,
            "bounds.k_sd_hi" => self.bounds.scale.k_sd.1 = f(value)?,
            "bounds.k_tw_lo" => self.bounds.scale.k_tw.0 = f(value)?,
            "bounds.k_tw_hi" => self.bounds.scale.k_tw.1 = f(value)?,
            "bounds.gamma_lo" => self.bounds.gamma.0 = f(value)?,
            "bounds.gamma_hi" => self.bounds.gamma.1 = f(value)?,
            "run.mode" => {
                self.mode = StudyMode::parse(value)
                    .ok_or_else(|| bad_value(key, value, "proportional, combined or both"))?
            }
            "run.iterations" => {
                self.iterations = value
                    .parse::<usize>()
                    .map_err(|_| bad_value(key, value, "a positive integer"))?
            }
            "run.seeds" => {
                let seeds: Result<Vec<u64>, _> =
                    value.split(',').map(|s| s.trim().parse::<u64>()).collect();
                self.seeds = seeds.map_err(|_| bad_value(key, value, "comma-separated integers"))?;
                if self.seeds.is_empty() {
                    return Err(bad_value(key, value, "at least one seed"));
                }
            }
            "run.cycle" => self.cycle_path = PathBuf::from(value),
            "run.speed_unit" => {
                self.speed_unit = match value {
                    "kmh" => SpeedUnit::KilometersPerHour,
                    "ms" => SpeedUnit::MetersPerSecond,
                    _ => return Err(bad_value(key, value, "kmh or ms")),
                }
            }
            "run.dt" => self.dt = f(value)?,
            "run.out" => self.out_dir = PathBuf::from(value),
            "run.trace" => self.trace = b(value)?,
            "run.penalty_fallback" => self.penalty_fallback = f(value)?,
            "run.parallel_seeds" => self.parallel_seeds = b(value)?,
            other => {
                return Err(CliError::Config {
                    path: other.to_string(),
                    message: "unknown key".to_string(),
                })
            }
        }
        Ok(())
    }

    fn value_string(&self, key: &str) -> String {
        match key {
            "vehicle.m_v" => self.vehicle.m_v.to_string(),
            "vehicle.r_w" => self.vehicle.r_w.to_string(),
            "vehicle.rho_a" => self.vehicle.rho_a.to_string(),
            "vehicle.c_d" => self.vehicle.c_d.to_string(),
            "vehicle.a_f" => self.vehicle.a_f.to_string(),
            "vehicle.c_r" => self.vehicle.c_r.to_string(),
            "vehicle.g" => self.vehicle.g.to_string(),
            "vehicle.eta_g" => self.vehicle.eta_g.to_string(),
            "vehicle.regen_enabled" => self.vehicle.regen_enabled.to_string(),
            "motor.d_mw0" => self.reference.d_mw0.to_string(),
            "motor.d_ml0" => self.reference.d_ml0.to_string(),
            "motor.d_sd0" => self.reference.d_sd0.to_string(),
            "motor.d_tw0" => self.reference.d_tw0.to_string(),
            "motor.t_max0" => self.reference.t_max0.to_string(),
            "motor.w_base0" => self.reference.w_base0.to_string(),
            "motor.w_max0" => self.reference.w_max0.to_string(),
            "motor.c_cu" => self.reference.c_cu.to_string(),
            "motor.c_hys" => self.reference.c_hys.to_string(),
            "motor.c_eddy" => self.reference.c_eddy.to_string(),
            "motor.c_mech" => self.reference.c_mech.to_string(),
            "motor.c_g" => self.reference.c_g.to_string(),
            "motor.f_t" => self.reference.f_t.to_string(),
            "motor.b_sat" => self.reference.b_sat.to_string(),
            "motor.c_ew" => self.reference.c_ew.to_string(),
            "spec.v_max_kmh" => (self.spec.v_max * 3.6).to_string(),
            "spec.v_acc_kmh" => (self.spec.v_acc * 3.6).to_string(),
            "spec.t_acc_s" => self.spec.t_acc.to_string(),
            "spec.alpha_max" => self.spec.alpha_max.to_string(),
            "bounds.k_ax_lo" => self.bounds.scale.k_ax.0.to_string(),
            "bounds.k_ax_hi" => self.bounds.scale.k_ax.1.to_string(),
            "bounds.k_rad_lo" => self.bounds.scale.k_rad.0.to_string(),
            "bounds.k_rad_hi" => self.bounds.scale.k_rad.1.to_string(),
            "bounds.k_mw_lo" => self.bounds.scale.k_mw.0.to_string(),
            "bounds.k_mw_hi" => self.bounds.scale.k_mw.1.to_string(),
            "bounds.k_ml_lo" => self.bounds.scale.k_ml.0.to_string(),
            "bounds.k_ml_hi" => self.bounds.scale.k_ml.1.to_string(),
            "bounds.k_sd_lo" => self.bounds.scale.k_sd.0.to_string(),
            "bounds.k_sd_hi" => self.bounds.scale.k_sd.1.to_string(),
            "bounds.k_tw_lo" => self.bounds.scale.k_tw.0.to_string(),
            "bounds.k_tw_hi" => self.bounds.scale.k_tw.1.to_string(),
            "bounds.gamma_lo" => self.bounds.gamma.0.to_string(),
            "bounds.gamma_hi" => self.bounds.gamma.1.to_string(),
            "run.mode" => self.mode.label().to_string(),
            "run.iterations" => self.iterations.to_string(),
            "run.seeds" => self
                .seeds
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(","),
            "run.cycle" => self.cycle_path.display().to_string(),
            "run.speed_unit" => match self.speed_unit {
                SpeedUnit::KilometersPerHour => "kmh".to_string(),
                SpeedUnit::MetersPerSecond => "ms".to_string(),
            },
            "run.dt" => self.dt.to_string(),
            "run.out" => self.out_dir.display().to_string(),
            "run.trace" => self.trace.to_string(),
            "run.penalty_fallback" => self.penalty_fallback.to_string(),
            "run.parallel_seeds" => self.parallel_seeds.to_string(),
            _ => unreachable!("key list and serializer out of sync"),
        }
    }

    pub fn source_of(&self, key: &str) -> ValueSource {
        if let Some(&s) = self.sources.get(key) {
            return s;
        }
        KEYS.iter()
            .find(|(k, _)| *k == key)
            .map(|&(_, s)| s)
            .unwrap_or(ValueSource::Default)
    }

    /// Every key in canonical order with its effective value and source tag.
    pub fn snapshot_entries(&self) -> Vec<(String, String, ValueSource)> {
        KEYS.iter()
            .map(|&(key, _)| (key.to_string(), self.value_string(key), self.source_of(key)))
            .collect()
    }

    /// Bounds wider than the reference search box.
    pub fn bound_warnings(&self) -> Vec<String> {
        let actual = [
            self.bounds.scale.k_ax,
            self.bounds.scale.k_rad,
            self.bounds.scale.k_mw,
            self.bounds.scale.k_ml,
            self.bounds.scale.k_sd,
            self.bounds.scale.k_tw,
            self.bounds.gamma,
        ];
        let mut warnings = Vec::new();
        for ((name, lo, hi), (alo, ahi)) in REFERENCE_BOX.iter().zip(actual) {
            if alo < *lo {
                warnings.push(format!(
                    "bounds.{name}_lo = {alo} widens the reference bound {lo}"
                ));
            }
            if ahi > *hi {
                warnings.push(format!(
                    "bounds.{name}_hi = {ahi} exceeds the reference bound {hi}"
                ));
            }
        }
        warnings
    }

    /// Sanity problems that make a run impossible.
    pub fn schema_errors(&self) -> Vec<String> {
        let mut errors = Vec::new();
        let positive = [
            ("vehicle.m_v", self.vehicle.m_v),
            ("vehicle.r_w", self.vehicle.r_w),
            ("vehicle.rho_a", self.vehicle.rho_a),
            ("vehicle.g", self.vehicle.g),
            ("motor.t_max0", self.reference.t_max0),
            ("motor.w_base0", self.reference.w_base0),
            ("motor.w_max0", self.reference.w_max0),
            ("spec.t_acc_s", self.spec.t_acc),
            ("run.dt", self.dt),
        ];
        for (key, value) in positive {
            if value.is_nan() || value <= 0.0 {
                errors.push(format!("{key} must be positive, got {value}"));
            }
        }
        if !(self.vehicle.eta_g > 0.0 && self.vehicle.eta_g <= 1.0) {
            errors.push(format!(
                "vehicle.eta_g must lie in (0, 1], got {}",
                self.vehicle.eta_g
            ));
        }
        if self.iterations == 0 {
            errors.push("run.iterations must be at least 1".to_string());
        }
        for (name, (lo, hi)) in [
            ("k_ax", self.bounds.scale.k_ax),
            ("k_rad", self.bounds.scale.k_rad),
            ("k_mw", self.bounds.scale.k_mw),
            ("k_ml", self.bounds.scale.k_ml),
            ("k_sd", self.bounds.scale.k_sd),
            ("k_tw", self.bounds.scale.k_tw),
            ("gamma", self.bounds.gamma),
        ] {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                errors.push(format!("bounds.{name}: lower bound {lo} above upper {hi}"));
            }
        }
        errors
    }
}

/// Validation report for a config file.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub unknown_keys: Vec<String>,
    pub missing_keys: Vec<(String, String, ValueSource)>,
    pub bound_warnings: Vec<String>,
    pub schema_errors: Vec<String>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.unknown_keys.is_empty()
            && self.bound_warnings.is_empty()
            && self.schema_errors.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "status: {}",
            if self.is_clean() { "clean" } else { "issues found" }
        );
        for k in &self.unknown_keys {
            let _ = writeln!(out, "unknown key: {k}");
        }
        for e in &self.schema_errors {
            let _ = writeln!(out, "error: {e}");
        }
        for w in &self.bound_warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        for (key, value, source) in &self.missing_keys {
            let _ = writeln!(
                out,
                "missing key: {key} -> filled with {value} (source: {})",
                source.label()
            );
        }
        out
    }
}

/// Validate a config file: unknown keys, missing keys (reported with the
/// default that fills them), widened bounds, impossible values.
pub fn validate_config(text: &str) -> Result<(RunConfig, ValidationReport), CliError> {
    let mut report = ValidationReport::default();
    let mut cfg = RunConfig::default();
    let mut seen = Vec::new();
    for (key, value, line) in parse_entries(text)? {
        if !KEYS.iter().any(|(k, _)| *k == key) {
            report.unknown_keys.push(format!("{key} (line {line})"));
            continue;
        }
        cfg.apply(&key, &value)?;
        cfg.sources.insert(key.clone(), ValueSource::Config);
        seen.push(key);
    }
    for &(key, source) in KEYS {
        if !seen.iter().any(|k| k == key) {
            report
                .missing_keys
                .push((key.to_string(), cfg.value_string(key), source));
        }
    }
    report.bound_warnings = cfg.bound_warnings();
    report.schema_errors = cfg.schema_errors();
    Ok((cfg, report))
}
