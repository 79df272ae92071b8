//! Longitudinal dynamics at the wheels and the one-speed transmission.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum VehicleError {
    #[error("gear ratio {value} outside [{lo}, {hi}]")]
    GearOutOfBounds { value: f64, lo: f64, hi: f64 },
}

/// Vehicle and driveline parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleParams {
    /// Vehicle mass, kg.
    pub m_v: f64,
    /// Wheel radius, m.
    pub r_w: f64,
    /// Air density, kg/m³.
    pub rho_a: f64,
    /// Aerodynamic drag coefficient.
    pub c_d: f64,
    /// Frontal area, m².
    pub a_f: f64,
    /// Rolling resistance coefficient.
    pub c_r: f64,
    /// Gravitational acceleration, m/s².
    pub g: f64,
    /// Transmission + final-drive efficiency, in (0, 1].
    pub eta_g: f64,
    /// Whether braking torque may be recovered through the machine.
    pub regen_enabled: bool,
}

impl Default for VehicleParams {
    fn default() -> Self {
        VehicleParams {
            m_v: 1085.0,
            r_w: 0.295,
            rho_a: 1.2,
            c_d: 0.35,
            a_f: 0.72,
            c_r: 0.01,
            g: 9.81,
            eta_g: 0.95,
            regen_enabled: true,
        }
    }
}

/// Fixed transmission + final-drive ratio, checked against its bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GearRatio(f64);

impl GearRatio {
    pub fn new(gamma: f64, lo: f64, hi: f64) -> Result<Self, VehicleError> {
        if gamma < lo || gamma > hi || !gamma.is_finite() {
            return Err(VehicleError::GearOutOfBounds {
                value: gamma,
                lo,
                hi,
            });
        }
        Ok(GearRatio(gamma))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Torque required at the wheels for speed `v` and acceleration `a` on a
/// flat road: r_w · (m_v·a + ½·ρ_a·c_d·A_f·v² + c_r·m_v·g).
///
/// The rolling term is unconditional here; the cycle simulator gates it to
/// v > 0 so idle phases demand no torque.
pub fn wheel_torque(p: &VehicleParams, v: f64, a: f64) -> f64 {
    debug_assert!(v >= 0.0);
    p.r_w * (p.m_v * a + 0.5 * p.rho_a * p.c_d * p.a_f * v * v + p.c_r * p.m_v * p.g)
}

/// Torque at the machine shaft for a wheel torque demand.
///
/// Positive demand is divided by γ·η_g, negative demand is multiplied by
/// η_g/γ (losses work against recovery). With regeneration disabled the
/// friction brakes absorb all negative demand.
pub fn shaft_torque(p: &VehicleParams, gamma: GearRatio, t_req: f64) -> f64 {
    let g = gamma.value();
    if t_req >= 0.0 {
        t_req / (g * p.eta_g)
    } else if p.regen_enabled {
        t_req * p.eta_g / g
    } else {
        0.0
    }
}

/// Machine shaft speed γ·v/r_w, rad/s.
pub fn shaft_speed(p: &VehicleParams, gamma: GearRatio, v: f64) -> f64 {
    debug_assert!(v >= 0.0);
    gamma.value() * v / p.r_w
}
