//! Geometric scaling of a reference machine and its closed-form performance
//! surrogate: torque envelope plus loss map.
//!
//! Geometry scales as d = d₀·k_rad·k_int per dimension. The surrogate maps
//! the internal factors onto magnetic loading λ_B (magnet width/length
//! through a permeance divider, capped by tooth saturation) and electric
//! loading λ_A (slot depth times the slot-width share of the slot pitch).
//! Peak torque follows rotor volume times both loadings; losses decompose
//! into copper, iron (hysteresis + eddy) and mechanical terms that reduce to
//! the configured reference values at all-ones scaling. The constants are
//! configuration, not measurements; see `docs/motor_model_card.md`.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MotorError {
    #[error("scaling factor {name} = {value} outside [{lo}, {hi}]")]
    FactorOutOfBounds {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("operating point (T = {torque} N·m, ω = {speed} rad/s) outside the envelope")]
    OutsideEnvelope { torque: f64, speed: f64 },
}

/// Per-factor bounds for a [`ScalingVector`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleBounds {
    pub k_ax: (f64, f64),
    pub k_rad: (f64, f64),
    pub k_mw: (f64, f64),
    pub k_ml: (f64, f64),
    pub k_sd: (f64, f64),
    pub k_tw: (f64, f64),
}

impl Default for ScaleBounds {
    fn default() -> Self {
        ScaleBounds {
            k_ax: (0.8, 1.2),
            k_rad: (0.8, 1.2),
            k_mw: (0.9, 1.1),
            k_ml: (0.9, 1.1),
            k_sd: (0.9, 1.1),
            k_tw: (0.9, 1.1),
        }
    }
}

/// The six geometric scaling factors: axial, radial, and the four internal
/// rescalings (magnet width/length, slot depth, tooth width).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingVector {
    pub k_ax: f64,
    pub k_rad: f64,
    pub k_mw: f64,
    pub k_ml: f64,
    pub k_sd: f64,
    pub k_tw: f64,
}

impl ScalingVector {
    /// Proportional scaling: internal factors pinned to 1.
    pub fn proportional(k_ax: f64, k_rad: f64) -> Self {
        ScalingVector {
            k_ax,
            k_rad,
            k_mw: 1.0,
            k_ml: 1.0,
            k_sd: 1.0,
            k_tw: 1.0,
        }
    }

    pub fn identity() -> Self {
        ScalingVector::proportional(1.0, 1.0)
    }

    pub fn validate(&self, b: &ScaleBounds) -> Result<(), MotorError> {
        let checks = [
            ("k_ax", self.k_ax, b.k_ax),
            ("k_rad", self.k_rad, b.k_rad),
            ("k_mw", self.k_mw, b.k_mw),
            ("k_ml", self.k_ml, b.k_ml),
            ("k_sd", self.k_sd, b.k_sd),
            ("k_tw", self.k_tw, b.k_tw),
        ];
        for (name, value, (lo, hi)) in checks {
            if !(value >= lo && value <= hi) {
                return Err(MotorError::FactorOutOfBounds {
                    name,
                    value,
                    lo,
                    hi,
                });
            }
        }
        Ok(())
    }
}

/// The unscaled machine: reference dimensions, envelope corner points, loss
/// coefficients at the rated point, and surrogate shape constants.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceMachine {
    /// Magnet width, m.
    pub d_mw0: f64,
    /// Magnet length, m.
    pub d_ml0: f64,
    /// Slot depth, m.
    pub d_sd0: f64,
    /// Tooth width, m.
    pub d_tw0: f64,
    /// Peak torque, N·m.
    pub t_max0: f64,
    /// Base speed (end of the constant-torque region), rad/s.
    pub w_base0: f64,
    /// Mechanical speed limit, rad/s.
    pub w_max0: f64,
    /// Copper loss at the rated point (t_max0, w_base0), W.
    pub c_cu: f64,
    /// Hysteresis loss at base speed, W.
    pub c_hys: f64,
    /// Eddy-current loss at base speed, W.
    pub c_eddy: f64,
    /// Mechanical (windage + friction) loss at base speed, W.
    pub c_mech: f64,
    /// Effective air-gap constant in the magnet-length permeance divider.
    pub c_g: f64,
    /// Tooth fraction of the slot pitch.
    pub f_t: f64,
    /// Tooth-saturation cap on magnetic loading.
    pub b_sat: f64,
    /// End-winding share in the copper length factor.
    pub c_ew: f64,
}

impl Default for ReferenceMachine {
    fn default() -> Self {
        // 280 N·m · 430 rad/s ≈ 120 kW rated power
        ReferenceMachine {
            d_mw0: 0.018,
            d_ml0: 0.030,
            d_sd0: 0.022,
            d_tw0: 0.009,
            t_max0: 280.0,
            w_base0: 430.0,
            w_max0: 1100.0,
            c_cu: 4000.0,
            c_hys: 300.0,
            c_eddy: 600.0,
            c_mech: 150.0,
            c_g: 0.2,
            f_t: 0.5,
            b_sat: 1.1,
            c_ew: 0.3,
        }
    }
}

/// Scaled machine dimensions, m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledGeometry {
    pub d_mw: f64,
    pub d_ml: f64,
    pub d_sd: f64,
    pub d_tw: f64,
}

/// Scale the reference dimensions: radial factor times the per-dimension
/// internal factor.
pub fn scale_geometry(reference: &ReferenceMachine, k: &ScalingVector) -> ScaledGeometry {
    ScaledGeometry {
        d_mw: reference.d_mw0 * k.k_rad * k.k_mw,
        d_ml: reference.d_ml0 * k.k_rad * k.k_ml,
        d_sd: reference.d_sd0 * k.k_rad * k.k_sd,
        d_tw: reference.d_tw0 * k.k_rad * k.k_tw,
    }
}

/// Relative magnetic and electric loading (λ_B, λ_A) of a rescaled design.
///
/// λ_B = min(k_mw · p(k_ml), b_sat · k_tw) with the permeance divider
/// p(k_ml) = k_ml·(1 + c_g)/(k_ml + c_g); λ_A = k_sd · (1 − f_t·k_tw)/(1 − f_t).
pub fn loading_factors(k: &ScalingVector, reference: &ReferenceMachine) -> (f64, f64) {
    let p_ml = k.k_ml * (1.0 + reference.c_g) / (k.k_ml + reference.c_g);
    let lambda_b = (k.k_mw * p_ml).min(reference.b_sat * k.k_tw);
    let slot_width = (1.0 - reference.f_t * k.k_tw) / (1.0 - reference.f_t);
    let lambda_a = k.k_sd * slot_width;
    (lambda_b, lambda_a)
}

/// A scaled machine: geometry, torque envelope and loss map.
#[derive(Debug, Clone, PartialEq)]
pub struct MotorModel {
    pub geometry: ScaledGeometry,
    /// Peak torque of the constant-torque region, N·m.
    pub t_peak: f64,
    /// Base speed: end of the constant-torque region, rad/s.
    pub w_base: f64,
    /// Mechanical speed limit, rad/s.
    pub w_max: f64,
    /// Reference peak torque, kept for scale-free constraint margins.
    pub t_ref: f64,
    // loss-map coefficients, all reducing to the reference values at k = 1
    cu_coeff: f64,
    cu_torque_norm: f64,
    hys_coeff: f64,
    eddy_coeff: f64,
    mech_coeff: f64,
    w_ref: f64,
}

/// Build the performance model of a rescaled machine.
///
/// Peak torque scales with rotor volume and both loadings
/// (k_ax·k_rad³·λ_B·λ_A); base speed shifts inversely with k_ax·k_rad·λ_B so
/// the rated power of a purely axial rescale is preserved; the mechanical
/// speed limit shrinks with the radius.
pub fn build_model(reference: &ReferenceMachine, k: &ScalingVector) -> MotorModel {
    let (lambda_b, lambda_a) = loading_factors(k, reference);
    let kr2 = k.k_rad * k.k_rad;

    let t_peak = reference.t_max0 * k.k_ax * kr2 * k.k_rad * lambda_b * lambda_a;
    let w_base = reference.w_base0 / (k.k_ax * k.k_rad * lambda_b);
    let w_max = reference.w_max0 / k.k_rad;

    // copper: I²R against the flux-normalised torque, spread over the slot
    // area, with an end-winding length share
    let ell = (k.k_ax + reference.c_ew * k.k_rad) / (1.0 + reference.c_ew);
    let slot_width = (1.0 - reference.f_t * k.k_tw) / (1.0 - reference.f_t);
    let cu_coeff = reference.c_cu * ell / (kr2 * k.k_sd * slot_width);
    let cu_torque_norm = reference.t_max0 * k.k_ax * kr2 * lambda_b;

    // iron: flux-density squared times core volume
    let fe_scale = lambda_b * lambda_b * k.k_ax * kr2;
    let hys_coeff = reference.c_hys * fe_scale;
    let eddy_coeff = reference.c_eddy * fe_scale;

    // windage grows steeply with the radius
    let mech_coeff = reference.c_mech * k.k_ax * kr2 * kr2;

    MotorModel {
        geometry: scale_geometry(reference, k),
        t_peak,
        w_base,
        w_max,
        t_ref: reference.t_max0,
        cu_coeff,
        cu_torque_norm,
        hys_coeff,
        eddy_coeff,
        mech_coeff,
        w_ref: reference.w_base0,
    }
}

impl MotorModel {
    /// Envelope torque T_max(ω): constant torque up to the base speed, then
    /// constant power. The hyperbola is extended past `w_max` so constraint
    /// margins stay defined; feasibility of the speed itself is checked
    /// separately.
    pub fn torque_limit(&self, w: f64) -> f64 {
        debug_assert!(w >= 0.0);
        if w <= self.w_base {
            self.t_peak
        } else {
            self.t_peak * self.w_base / w
        }
    }

    /// Whether (T, ω) lies inside the operating envelope.
    pub fn contains(&self, torque: f64, speed: f64) -> bool {
        speed >= 0.0 && speed <= self.w_max && torque.abs() <= self.torque_limit(speed)
    }

    /// Loss map P_loss(T, ω) ≥ 0, symmetric in the torque sign.
    pub fn losses(&self, torque: f64, speed: f64) -> Result<f64, MotorError> {
        if !self.contains(torque, speed) {
            return Err(MotorError::OutsideEnvelope { torque, speed });
        }
        Ok(self.losses_unchecked(torque, speed))
    }

    pub(crate) fn losses_unchecked(&self, torque: f64, speed: f64) -> f64 {
        let tq = torque / self.cu_torque_norm;
        let p_cu = self.cu_coeff * tq * tq;
        let wn = speed / self.w_ref;
        let p_fe = self.hys_coeff * wn + self.eddy_coeff * wn * wn;
        let p_mech = self.mech_coeff * wn * wn * wn;
        p_cu + p_fe + p_mech
    }

    /// Electrical input power P_ac = T·ω + P_loss(T, ω).
    pub fn input_power(&self, torque: f64, speed: f64) -> Result<f64, MotorError> {
        Ok(torque * speed + self.losses(torque, speed)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reference() -> ReferenceMachine {
        ReferenceMachine::default()
    }

    #[test]
    fn identity_scaling_reproduces_reference_bitwise() {
        let r = reference();
        let m = build_model(&r, &ScalingVector::identity());
        assert_eq!(m.t_peak.to_bits(), r.t_max0.to_bits());
        assert_eq!(m.w_base.to_bits(), r.w_base0.to_bits());
        assert_eq!(m.w_max.to_bits(), r.w_max0.to_bits());
        assert_eq!(m.geometry.d_mw.to_bits(), r.d_mw0.to_bits());
        assert_eq!(m.geometry.d_ml.to_bits(), r.d_ml0.to_bits());
        assert_eq!(m.geometry.d_sd.to_bits(), r.d_sd0.to_bits());
        assert_eq!(m.geometry.d_tw.to_bits(), r.d_tw0.to_bits());
        assert_eq!(m.cu_coeff.to_bits(), r.c_cu.to_bits());
        assert_eq!(m.hys_coeff.to_bits(), r.c_hys.to_bits());
        assert_eq!(m.eddy_coeff.to_bits(), r.c_eddy.to_bits());
        assert_eq!(m.mech_coeff.to_bits(), r.c_mech.to_bits());
    }

    #[test]
    fn geometry_scales_per_dimension() {
        let r = reference();
        let k = ScalingVector {
            k_rad: 1.10,
            k_mw: 1.05,
            ..ScalingVector::identity()
        };
        let g = scale_geometry(&r, &k);
        let expect = 1.10 * 1.05 * r.d_mw0;
        assert!((g.d_mw - expect).abs() <= 1e-9 * expect);
        assert!((g.d_mw - 1.155 * r.d_mw0).abs() <= 1e-9 * g.d_mw);
    }

    #[test]
    fn proportional_scaling_moves_all_dimensions_together() {
        let r = reference();
        let g = scale_geometry(&r, &ScalingVector::proportional(1.0, 1.03));
        for (d, d0) in [
            (g.d_mw, r.d_mw0),
            (g.d_ml, r.d_ml0),
            (g.d_sd, r.d_sd0),
            (g.d_tw, r.d_tw0),
        ] {
            assert!((d - 1.03 * d0).abs() <= 1e-12 * d0);
        }
    }

    #[test]
    fn out_of_bounds_factor_is_named() {
        let b = ScaleBounds::default();
        let k = ScalingVector {
            k_rad: 1.3,
            ..ScalingVector::identity()
        };
        match k.validate(&b) {
            Err(MotorError::FactorOutOfBounds { name, .. }) => assert_eq!(name, "k_rad"),
            other => panic!("expected out-of-bounds error, got {other:?}"),
        }
    }

    #[test]
    fn loading_factors_identity() {
        let r = reference();
        let (lb, la) = loading_factors(&ScalingVector::identity(), &r);
        assert_eq!(lb, 1.0);
        assert_eq!(la, 1.0);
    }

    #[test]
    fn loading_factors_saturation_cap() {
        let r = reference(); // c_g = 0.2, b_sat = 1.1
        let k = ScalingVector {
            k_mw: 1.05,
            k_ml: 0.92,
            k_tw: 0.90,
            ..ScalingVector::identity()
        };
        let p_ml: f64 = 0.92 * 1.2 / (0.92 + 0.2);
        assert!((p_ml - 0.9857).abs() < 1e-4);
        let expect = (1.05 * p_ml).min(1.1 * 0.90);
        let (lb, _) = loading_factors(&k, &r);
        assert!((lb - expect).abs() <= 1e-12);
        assert!((lb - 0.99).abs() <= 1e-9, "cap binds at 0.99, got {lb}");
    }

    #[test]
    fn loading_factors_slot_partition() {
        let r = reference(); // f_t = 0.5
        let k = ScalingVector {
            k_sd: 0.95,
            k_tw: 0.90,
            ..ScalingVector::identity()
        };
        let (_, la) = loading_factors(&k, &r);
        let expect = 0.95 * (1.0 - 0.5 * 0.90) / 0.5;
        assert!((la - expect).abs() <= 1e-12);
        assert!((la - 1.045).abs() <= 1e-9);
    }

    #[test]
    fn axial_shrink_keeps_rated_power() {
        let r = reference();
        let k = ScalingVector {
            k_ax: 0.8,
            ..ScalingVector::identity()
        };
        let m = build_model(&r, &k);
        assert!((m.t_peak - 0.8 * r.t_max0).abs() <= 1e-9 * m.t_peak);
        assert!((m.w_base - r.w_base0 / 0.8).abs() <= 1e-9 * m.w_base);
        let power = m.t_peak * m.w_base;
        let power0 = r.t_max0 * r.w_base0;
        assert!((power - power0).abs() <= 1e-9 * power0);
    }

    #[test]
    fn radial_growth_cubes_torque_and_trims_speed() {
        let r = reference();
        let k = ScalingVector {
            k_rad: 1.2,
            ..ScalingVector::identity()
        };
        let m = build_model(&r, &k);
        assert!((m.t_peak - 1.728 * r.t_max0).abs() <= 1e-9 * m.t_peak);
        assert!((m.w_max - r.w_max0 / 1.2).abs() <= 1e-9 * m.w_max);
    }

    #[test]
    fn losses_zero_at_origin() {
        let m = build_model(&reference(), &ScalingVector::identity());
        assert_eq!(m.losses(0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn losses_calibrated_at_rated_point() {
        let r = reference();
        let m = build_model(&r, &ScalingVector::identity());
        let got = m.losses(r.t_max0, r.w_base0).unwrap();
        let expect = r.c_cu + r.c_hys + r.c_eddy + r.c_mech;
        assert!((got - expect).abs() <= 1e-9 * expect, "got {got}");
    }

    #[test]
    fn copper_loss_quadratic_in_torque() {
        let r = reference();
        let m = build_model(&r, &ScalingVector::identity());
        let w = 100.0;
        let iron = m.losses(0.0, w).unwrap();
        let l1 = m.losses(50.0, w).unwrap() - iron;
        let l2 = m.losses(100.0, w).unwrap() - iron;
        assert!((l2 - 4.0 * l1).abs() <= 1e-9 * l2);
    }

    #[test]
    fn losses_reject_points_outside_envelope() {
        let r = reference();
        let m = build_model(&r, &ScalingVector::identity());
        assert!(matches!(
            m.losses(r.t_max0 * 1.01, 10.0),
            Err(MotorError::OutsideEnvelope { .. })
        ));
        assert!(matches!(
            m.losses(1.0, r.w_max0 * 1.01),
            Err(MotorError::OutsideEnvelope { .. })
        ));
    }

    #[test]
    fn input_power_exceeds_mechanical_power_when_motoring() {
        let m = build_model(&reference(), &ScalingVector::identity());
        assert_eq!(m.input_power(0.0, 0.0).unwrap(), 0.0);
        let p = m.input_power(100.0, 300.0).unwrap();
        assert!(p > 100.0 * 300.0);
        // braking: recovered power is reduced by the losses
        let pb = m.input_power(-100.0, 300.0).unwrap();
        assert!(pb > -100.0 * 300.0);
    }

    #[test]
    fn envelope_power_continuous_at_base_speed() {
        let m = build_model(
            &reference(),
            &ScalingVector {
                k_ax: 0.9,
                k_rad: 1.1,
                k_sd: 1.05,
                ..ScalingVector::identity()
            },
        );
        let below = m.torque_limit(m.w_base) * m.w_base;
        let w_up = m.w_base * (1.0 + 1e-12);
        let above = m.torque_limit(w_up) * w_up;
        assert!((below - above).abs() <= 1e-9 * below);
    }

    fn arb_scaling() -> impl Strategy<Value = ScalingVector> {
        (
            0.8..1.2f64,
            0.8..1.2f64,
            0.9..1.1f64,
            0.9..1.1f64,
            0.9..1.1f64,
            0.9..1.1f64,
        )
            .prop_map(|(k_ax, k_rad, k_mw, k_ml, k_sd, k_tw)| ScalingVector {
                k_ax,
                k_rad,
                k_mw,
                k_ml,
                k_sd,
                k_tw,
            })
    }

    proptest! {
        #[test]
        fn reduction_internal_ones_equals_proportional(
            k_ax in 0.8..1.2f64,
            k_rad in 0.8..1.2f64,
        ) {
            let r = reference();
            let combined = build_model(&r, &ScalingVector {
                k_ax, k_rad, k_mw: 1.0, k_ml: 1.0, k_sd: 1.0, k_tw: 1.0,
            });
            let proportional = build_model(&r, &ScalingVector::proportional(k_ax, k_rad));
            prop_assert_eq!(combined, proportional);
        }

        #[test]
        fn loss_map_symmetric_in_torque_sign(k in arb_scaling(), tq in 0.0..1.0f64, wq in 0.0..1.0f64) {
            let r = reference();
            let m = build_model(&r, &k);
            let w = wq * m.w_max;
            let t = tq * m.torque_limit(w);
            let plus = m.losses(t, w).unwrap();
            let minus = m.losses(-t, w).unwrap();
            prop_assert_eq!(plus.to_bits(), minus.to_bits());
            prop_assert!(plus >= 0.0);
        }

        #[test]
        fn peak_torque_monotone_in_volume_factors(
            k in arb_scaling(),
            bump in 1.001..1.05f64,
        ) {
            let r = reference();
            // keep λ_B off the saturation cap so growth is strict
            let k = ScalingVector { k_mw: 0.95, k_tw: 1.05, ..k };
            let base = build_model(&r, &k).t_peak;
            for grown in [
                ScalingVector { k_ax: (k.k_ax * bump).min(1.2), ..k },
                ScalingVector { k_rad: (k.k_rad * bump).min(1.2), ..k },
                ScalingVector { k_sd: (k.k_sd * bump).min(1.1), ..k },
            ] {
                prop_assert!(build_model(&r, &grown).t_peak > base);
            }
        }

        #[test]
        fn magnetic_loading_monotone_and_capped(k in arb_scaling(), bump in 1.001..1.05f64) {
            let r = reference();
            let (lb, _) = loading_factors(&k, &r);
            let grown = ScalingVector { k_mw: (k.k_mw * bump).min(1.1), ..k };
            let (lb2, _) = loading_factors(&grown, &r);
            prop_assert!(lb2 >= lb);
            prop_assert!(lb <= r.b_sat * k.k_tw + 1e-12);
        }
    }
}
