//! The optimization design vector and its search box.

use crate::motor::{MotorError, ScaleBounds, ScalingVector};
use crate::vehicle::VehicleError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DesignError {
    #[error(transparent)]
    Factor(#[from] MotorError),
    #[error(transparent)]
    Gear(#[from] VehicleError),
}

/// Study mode: proportional scaling optimizes (k_ax, k_rad, γ) with the
/// internal factors pinned to 1; combined scaling frees all seven variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Proportional,
    Combined,
}

impl Mode {
    /// Number of free optimization variables.
    pub fn dim(self) -> usize {
        match self {
            Mode::Proportional => 3,
            Mode::Combined => 7,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Mode::Proportional => "proportional",
            Mode::Combined => "combined",
        }
    }
}

/// One candidate design: six scaling factors plus the gear ratio.
///
/// Free-coordinate order is k_ax, k_rad, γ, then k_mw, k_ml, k_sd, k_tw
/// (the trailing four only in combined mode).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignVector {
    pub k_ax: f64,
    pub k_rad: f64,
    pub k_mw: f64,
    pub k_ml: f64,
    pub k_sd: f64,
    pub k_tw: f64,
    pub gamma: f64,
    pub mode: Mode,
}

impl DesignVector {
    pub fn proportional(k_ax: f64, k_rad: f64, gamma: f64) -> Self {
        DesignVector {
            k_ax,
            k_rad,
            k_mw: 1.0,
            k_ml: 1.0,
            k_sd: 1.0,
            k_tw: 1.0,
            gamma,
            mode: Mode::Proportional,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn combined(
        k_ax: f64,
        k_rad: f64,
        gamma: f64,
        k_mw: f64,
        k_ml: f64,
        k_sd: f64,
        k_tw: f64,
    ) -> Self {
        DesignVector {
            k_ax,
            k_rad,
            k_mw,
            k_ml,
            k_sd,
            k_tw,
            gamma,
            mode: Mode::Combined,
        }
    }

    pub fn scaling(&self) -> ScalingVector {
        ScalingVector {
            k_ax: self.k_ax,
            k_rad: self.k_rad,
            k_mw: self.k_mw,
            k_ml: self.k_ml,
            k_sd: self.k_sd,
            k_tw: self.k_tw,
        }
    }

    /// All seven coordinates in log order (k_ax, k_rad, γ, k_mw, k_ml, k_sd, k_tw).
    pub fn coords(&self) -> [f64; 7] {
        [
            self.k_ax, self.k_rad, self.gamma, self.k_mw, self.k_ml, self.k_sd, self.k_tw,
        ]
    }

    /// The free coordinates for this design's mode.
    pub fn free_coords(&self) -> Vec<f64> {
        self.coords()[..self.mode.dim()].to_vec()
    }

    /// Rebuild a design from free coordinates (pinning internals in
    /// proportional mode).
    pub fn from_free_coords(mode: Mode, x: &[f64]) -> Self {
        assert_eq!(x.len(), mode.dim(), "coordinate count must match the mode");
        match mode {
            Mode::Proportional => DesignVector::proportional(x[0], x[1], x[2]),
            Mode::Combined => DesignVector::combined(x[0], x[1], x[2], x[3], x[4], x[5], x[6]),
        }
    }

    pub fn validate(&self, bounds: &DesignBounds) -> Result<(), DesignError> {
        self.scaling().validate(&bounds.scale)?;
        crate::vehicle::GearRatio::new(self.gamma, bounds.gamma.0, bounds.gamma.1)?;
        Ok(())
    }
}

/// Per-variable search box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignBounds {
    pub scale: ScaleBounds,
    pub gamma: (f64, f64),
}

impl Default for DesignBounds {
    fn default() -> Self {
        DesignBounds {
            scale: ScaleBounds::default(),
            gamma: (1.0, 10.0),
        }
    }
}

impl DesignBounds {
    /// (lo, hi) per free coordinate in log order.
    pub fn free_bounds(&self, mode: Mode) -> Vec<(f64, f64)> {
        let all = [
            self.scale.k_ax,
            self.scale.k_rad,
            self.gamma,
            self.scale.k_mw,
            self.scale.k_ml,
            self.scale.k_sd,
            self.scale.k_tw,
        ];
        all[..mode.dim()].to_vec()
    }

    /// Map free coordinates into the unit box.
    pub fn to_unit(&self, mode: Mode, x: &[f64]) -> Vec<f64> {
        self.free_bounds(mode)
            .iter()
            .zip(x)
            .map(|(&(lo, hi), &v)| (v - lo) / (hi - lo))
            .collect()
    }

    /// Map a unit-box point back onto the design box.
    pub fn from_unit(&self, mode: Mode, u: &[f64]) -> Vec<f64> {
        self.free_bounds(mode)
            .iter()
            .zip(u)
            .map(|(&(lo, hi), &q)| lo + q * (hi - lo))
            .collect()
    }
}
