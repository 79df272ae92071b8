//! Per-candidate evaluation: cycle energy plus the three performance
//! constraints (top speed, acceleration time, gradeability).
//!
//! The cycle simulation is quasi-static and backward-facing: each step
//! [t_i, t_{i+1}) carries the forward-difference acceleration of the trace
//! and the mid-step speed, so the work term m·a·v integrates exactly and the
//! energy sum converges quadratically in the step size. Rolling resistance
//! is gated to moving steps; idle phases demand no torque.

use thiserror::Error;

use crate::cycle::DriveCycle;
use crate::design::{DesignBounds, DesignError, DesignVector};
use crate::motor::{build_model, MotorModel, ReferenceMachine};
use crate::vehicle::{shaft_speed, shaft_torque, wheel_torque, GearRatio, VehicleParams};

/// Gradeability is evaluated at a crawl speed of 1 km/h so the shaft speed
/// is nonzero and the envelope lookup is well defined.
const CRAWL_SPEED: f64 = 1.0 / 3.6;
/// Explicit-Euler step for the acceleration-time integration, s.
const ACCEL_DT: f64 = 0.01;
/// Acceleration runs are abandoned after this long, s.
const ACCEL_TIME_CAP: f64 = 60.0;

/// Performance constraint targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerformanceSpec {
    /// Required top speed, m/s.
    pub v_max: f64,
    /// Speed the acceleration test must reach, m/s.
    pub v_acc: f64,
    /// Time budget for the acceleration test, s.
    pub t_acc: f64,
    /// Maximum grade as a fraction (tangent of the road angle).
    pub alpha_max: f64,
}

impl Default for PerformanceSpec {
    fn default() -> Self {
        PerformanceSpec {
            v_max: 180.0 / 3.6,
            v_acc: 100.0 / 3.6,
            t_acc: 9.6,
            alpha_max: 0.20,
        }
    }
}

/// Scale-free signed slacks, one per constraint; nonnegative means satisfied.
///
/// Speed slack is relative to the shaft speed at v_max, torque slacks to the
/// reference peak torque, the time slack to t_acc. `envelope` is the minimum
/// headroom seen over the cycle; it stays 0 when the cycle was skipped
/// because a performance constraint already failed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintMargins {
    pub top_speed: f64,
    pub acceleration: f64,
    pub gradeability: f64,
    pub envelope: f64,
}

impl ConstraintMargins {
    pub fn all_satisfied(&self) -> bool {
        self.top_speed >= 0.0
            && self.acceleration >= 0.0
            && self.gradeability >= 0.0
            && self.envelope >= 0.0
    }

    /// Total normalized violation, zero when feasible.
    pub fn violation(&self) -> f64 {
        [
            self.top_speed,
            self.acceleration,
            self.gradeability,
            self.envelope,
        ]
        .iter()
        .map(|m| (-m).max(0.0))
        .sum()
    }
}

/// One step of the optional simulation trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub t: f64,
    pub v: f64,
    pub t_m: f64,
    pub w_m: f64,
    pub p_ac: f64,
    pub p_loss: f64,
}

/// The outcome of evaluating one candidate design.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationRecord {
    pub design: DesignVector,
    /// Cycle input energy, J; infinite when the candidate is infeasible
    /// before or during the cycle.
    pub e_ac: f64,
    pub feasible: bool,
    pub margins: ConstraintMargins,
    pub trace: Option<Vec<TraceStep>>,
}

#[derive(Debug, Error)]
#[error("cycle infeasible at t = {t} s (envelope headroom {margin})")]
pub struct CycleInfeasible {
    /// First violating timestamp, s.
    pub t: f64,
    /// Minimum normalized envelope headroom over the whole cycle (negative).
    pub margin: f64,
}

/// Result of a feasible cycle simulation.
#[derive(Debug, Clone)]
pub struct CycleEnergy {
    /// Input energy over the cycle, J.
    pub e_ac: f64,
    /// Minimum normalized envelope headroom over the cycle.
    pub envelope_margin: f64,
    pub trace: Option<Vec<TraceStep>>,
}

/// Everything a candidate evaluation needs, shared read-only across
/// concurrent evaluations.
#[derive(Debug, Clone)]
pub struct EvalContext<'a> {
    pub cycle: &'a DriveCycle,
    pub vehicle: VehicleParams,
    pub reference: ReferenceMachine,
    pub spec: PerformanceSpec,
    pub bounds: DesignBounds,
    pub collect_trace: bool,
}

impl<'a> EvalContext<'a> {
    pub fn new(cycle: &'a DriveCycle, vehicle: VehicleParams, reference: ReferenceMachine) -> Self {
        EvalContext {
            cycle,
            vehicle,
            reference,
            spec: PerformanceSpec::default(),
            bounds: DesignBounds::default(),
            collect_trace: false,
        }
    }
}

/// Wheel torque demand with the rolling term gated to moving steps.
fn demand_torque(p: &VehicleParams, v: f64, a: f64) -> f64 {
    let raw = wheel_torque(p, v, a);
    if v > 0.0 {
        raw
    } else {
        raw - p.r_w * p.c_r * p.m_v * p.g
    }
}

/// Integrate the input energy over the cycle.
///
/// E_ac(T) = Σ_i P_ac(T_m,i, ω_m,i)·dt_i over the steps of the resampled
/// trace, each step evaluated at its forward-difference acceleration and
/// mid-step speed. Braking torque beyond the envelope is surrendered to the
/// friction brakes; a motoring demand beyond the envelope, or any shaft
/// speed beyond w_max, makes the cycle infeasible.
pub fn cycle_energy(
    cycle: &DriveCycle,
    p: &VehicleParams,
    gamma: GearRatio,
    m: &MotorModel,
    collect_trace: bool,
) -> Result<CycleEnergy, CycleInfeasible> {
    let pts = cycle.points();
    let mut energy = 0.0;
    let mut min_headroom = f64::INFINITY;
    let mut first_violation: Option<f64> = None;
    let mut trace = collect_trace.then(|| Vec::with_capacity(pts.len().saturating_sub(1)));

    for w in pts.windows(2) {
        let dt = w[1].t - w[0].t;
        let v = 0.5 * (w[0].v + w[1].v);
        let a = w[0].a;

        let w_m = shaft_speed(p, gamma, v);
        let speed_headroom = (m.w_max - w_m) / m.w_max;
        let t_m = shaft_torque(p, gamma, demand_torque(p, v, a));
        let t_cap = m.torque_limit(w_m);

        let (t_applied, torque_headroom) = if t_m >= 0.0 {
            ((t_m), (t_cap - t_m) / m.t_ref)
        } else {
            // clip recovery to the envelope; the friction brakes take the rest
            (t_m.max(-t_cap), (t_cap - t_m.abs().min(t_cap)) / m.t_ref)
        };

        let headroom = speed_headroom.min(torque_headroom);
        min_headroom = min_headroom.min(headroom);
        let violated = w_m > m.w_max || (t_m >= 0.0 && t_m > t_cap);
        if violated {
            if first_violation.is_none() {
                first_violation = Some(w[0].t);
            }
            continue;
        }

        let p_loss = m.losses_unchecked(t_applied, w_m);
        let p_ac = t_applied * w_m + p_loss;
        energy += p_ac * dt;
        if let Some(tr) = trace.as_mut() {
            tr.push(TraceStep {
                t: w[0].t,
                v,
                t_m: t_applied,
                w_m,
                p_ac,
                p_loss,
            });
        }
    }

    if min_headroom == f64::INFINITY {
        min_headroom = 0.0; // degenerate single-point cycle
    }
    match first_violation {
        Some(t) => Err(CycleInfeasible {
            t,
            margin: min_headroom,
        }),
        None => Ok(CycleEnergy {
            e_ac: energy,
            envelope_margin: min_headroom,
            trace,
        }),
    }
}

/// Top-speed margin: the lesser of the speed headroom at v_max (relative to
/// the shaft speed there) and the torque headroom against the steady-state
/// demand (relative to the reference peak torque).
pub fn check_top_speed(
    p: &VehicleParams,
    gamma: GearRatio,
    m: &MotorModel,
    spec: &PerformanceSpec,
) -> f64 {
    let w_at_vmax = shaft_speed(p, gamma, spec.v_max);
    let speed_margin = (m.w_max - w_at_vmax) / w_at_vmax;
    let demand = shaft_torque(p, gamma, wheel_torque(p, spec.v_max, 0.0));
    let torque_margin = (m.torque_limit(w_at_vmax) - demand) / m.t_ref;
    speed_margin.min(torque_margin)
}

/// Acceleration margin (t_acc − elapsed)/t_acc from a full-torque launch to
/// v_acc, forward-integrated with an explicit Euler step.
pub fn check_acceleration(
    p: &VehicleParams,
    gamma: GearRatio,
    m: &MotorModel,
    spec: &PerformanceSpec,
) -> f64 {
    let mut v = 0.0;
    let mut t = 0.0;
    while v < spec.v_acc && t < ACCEL_TIME_CAP {
        let w_m = shaft_speed(p, gamma, v);
        let torque = if w_m <= m.w_max {
            m.torque_limit(w_m)
        } else {
            0.0
        };
        let drive = gamma.value() * p.eta_g * torque / p.r_w;
        let mut resist = 0.5 * p.rho_a * p.c_d * p.a_f * v * v;
        if v > 0.0 {
            resist += p.c_r * p.m_v * p.g;
        }
        v += (drive - resist) / p.m_v * ACCEL_DT;
        t += ACCEL_DT;
    }
    let elapsed = if v >= spec.v_acc { t } else { ACCEL_TIME_CAP };
    (spec.t_acc - elapsed) / spec.t_acc
}

/// Gradeability margin at crawl speed, normalized by the reference peak
/// torque: wheel-level available torque minus the slope + rolling demand
/// r_w·m_v·g·(sin θ + c_r·cos θ) with θ = arctan(α_max).
pub fn check_gradeability(
    p: &VehicleParams,
    gamma: GearRatio,
    m: &MotorModel,
    spec: &PerformanceSpec,
) -> f64 {
    let theta = spec.alpha_max.atan();
    let demand = p.r_w * p.m_v * p.g * (theta.sin() + p.c_r * theta.cos());
    let w_crawl = shaft_speed(p, gamma, CRAWL_SPEED);
    let available = gamma.value() * p.eta_g * m.torque_limit(w_crawl);
    (available - demand) / m.t_ref
}

/// Evaluate one candidate: cheap performance constraints first, then the
/// cycle energy. Infeasibility is encoded in the record, never raised;
/// only an out-of-bounds design is rejected before simulation.
pub fn evaluate(design: &DesignVector, ctx: &EvalContext) -> Result<EvaluationRecord, DesignError> {
    design.validate(&ctx.bounds)?;
    let gamma = GearRatio::new(design.gamma, ctx.bounds.gamma.0, ctx.bounds.gamma.1)?;
    let model = build_model(&ctx.reference, &design.scaling());

    let mut margins = ConstraintMargins {
        top_speed: check_top_speed(&ctx.vehicle, gamma, &model, &ctx.spec),
        acceleration: check_acceleration(&ctx.vehicle, gamma, &model, &ctx.spec),
        gradeability: check_gradeability(&ctx.vehicle, gamma, &model, &ctx.spec),
        envelope: 0.0,
    };

    let perf_ok =
        margins.top_speed >= 0.0 && margins.acceleration >= 0.0 && margins.gradeability >= 0.0;
    let (e_ac, trace) = if perf_ok {
        match cycle_energy(ctx.cycle, &ctx.vehicle, gamma, &model, ctx.collect_trace) {
            Ok(res) => {
                margins.envelope = res.envelope_margin;
                (res.e_ac, res.trace)
            }
            Err(err) => {
                margins.envelope = err.margin;
                (f64::INFINITY, None)
            }
        }
    } else {
        (f64::INFINITY, None)
    };

    Ok(EvaluationRecord {
        design: *design,
        e_ac,
        feasible: margins.all_satisfied(),
        margins,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycle::DriveCycle;
    use crate::motor::{ReferenceMachine, ScalingVector};

    fn table_vehicle() -> VehicleParams {
        VehicleParams::default()
    }

    fn reference() -> ReferenceMachine {
        ReferenceMachine::default()
    }

    fn reference_model() -> MotorModel {
        build_model(&reference(), &ScalingVector::identity())
    }

    fn gear(g: f64) -> GearRatio {
        GearRatio::new(g, 1.0, 10.0).unwrap()
    }

    /// Lossless machine with a flat, enormous envelope.
    fn ideal_model() -> MotorModel {
        let r = ReferenceMachine {
            t_max0: 1e9,
            w_base0: 1e9,
            w_max0: 1e12,
            c_cu: 0.0,
            c_hys: 0.0,
            c_eddy: 0.0,
            c_mech: 0.0,
            ..reference()
        };
        build_model(&r, &ScalingVector::identity())
    }

    #[test]
    fn constant_power_cycle_integrates_exactly() {
        // pure rolling load tuned to 10 kW at the shaft: c_r·m·g = 1000 N,
        // v = 10 m/s, η_g = 1 → P_ac = 1000 · 10 = 10 kW at any gear ratio
        let p = VehicleParams {
            m_v: 1000.0,
            g: 10.0,
            c_r: 0.1,
            c_d: 0.0,
            eta_g: 1.0,
            ..table_vehicle()
        };
        let samples: Vec<(f64, f64)> = (0..=100).map(|i| (i as f64, 10.0)).collect();
        let c = DriveCycle::from_samples("steady", &samples).unwrap();
        let e = cycle_energy(&c, &p, gear(4.0), &ideal_model(), false)
            .unwrap()
            .e_ac;
        assert_eq!(e, 1.0e6, "100 s at 10 kW is exactly 1 MJ");
    }

    #[test]
    fn zero_cycle_uses_no_energy() {
        let c = DriveCycle::from_samples("idle", &[(0.0, 0.0), (1.0, 0.0)]).unwrap();
        let e = cycle_energy(&c, &table_vehicle(), gear(5.0), &reference_model(), false)
            .unwrap()
            .e_ac;
        assert_eq!(e, 0.0);
    }

    #[test]
    fn ramp_cycle_matches_trapezoidal_oracle() {
        let p = table_vehicle();
        let m = reference_model();
        let g = gear(5.0);
        let samples: Vec<(f64, f64)> = (0..=60)
            .map(|i| {
                let t = i as f64;
                let v = if t <= 30.0 { t } else { 60.0 - t };
                (t, 0.5 * v)
            })
            .collect();
        let c = DriveCycle::from_samples("ramp", &samples).unwrap();
        let got = cycle_energy(&c, &p, g, &m, false).unwrap().e_ac;

        // independent route: trapezoidal integration over the same power samples
        let pts = c.points();
        let mut p_samples = Vec::new();
        for w in pts.windows(2) {
            let v = 0.5 * (w[0].v + w[1].v);
            let t_m = shaft_torque(&p, g, demand_torque(&p, v, w[0].a));
            let w_m = shaft_speed(&p, g, v);
            p_samples.push(t_m * w_m + m.losses(t_m, w_m).unwrap());
        }
        let oracle: f64 = p_samples
            .windows(2)
            .map(|q| 0.5 * (q[0] + q[1]))
            .sum::<f64>()
            + 0.5 * (p_samples[0] + p_samples[p_samples.len() - 1]);
        assert!(
            (got - oracle).abs() / oracle.abs() < 5e-3,
            "quadratures disagree: {got} vs {oracle}"
        );
    }

    #[test]
    fn cycle_infeasible_reports_first_violation() {
        // tiny machine cannot follow a hard launch
        let r = ReferenceMachine {
            t_max0: 5.0,
            ..reference()
        };
        let m = build_model(&r, &ScalingVector::identity());
        let c = DriveCycle::from_samples(
            "launch",
            &[(0.0, 0.0), (1.0, 3.0), (2.0, 6.0), (3.0, 9.0)],
        )
        .unwrap();
        let err = cycle_energy(&c, &table_vehicle(), gear(5.0), &m, false).unwrap_err();
        assert_eq!(err.t, 0.0, "violation starts at the first step");
        assert!(err.margin < 0.0);
    }

    #[test]
    fn regen_disabled_energy_nonnegative() {
        let p = VehicleParams {
            regen_enabled: false,
            ..table_vehicle()
        };
        let samples: Vec<(f64, f64)> = (0..=80)
            .map(|i| {
                let t = i as f64;
                (t, 15.0 * (1.0 - ((t - 40.0) / 40.0).powi(2)))
            })
            .collect();
        let c = DriveCycle::from_samples("hump", &samples).unwrap();
        let e = cycle_energy(&c, &p, gear(5.0), &reference_model(), false)
            .unwrap()
            .e_ac;
        assert!(e >= 0.0);
    }

    #[test]
    fn regen_energy_bounded_by_recoverable_braking() {
        let p = table_vehicle();
        let g = gear(5.0);
        let m = reference_model();
        let samples: Vec<(f64, f64)> = (0..=80)
            .map(|i| {
                let t = i as f64;
                (t, 20.0 * (1.0 - ((t - 40.0) / 40.0).powi(2)))
            })
            .collect();
        let c = DriveCycle::from_samples("hump", &samples).unwrap();
        let e = cycle_energy(&c, &p, g, &m, false).unwrap().e_ac;

        // wheel-level braking energy bounds what regeneration can return
        let braking: f64 = c
            .points()
            .windows(2)
            .map(|w| {
                let v = 0.5 * (w[0].v + w[1].v);
                let wheel_power = demand_torque(&p, v, w[0].a) * v / p.r_w;
                (-wheel_power).max(0.0)
            })
            .sum();
        assert!(e >= -braking, "E_ac {e} below the recoverable bound {braking}");
    }

    #[test]
    fn energy_independent_of_gear_without_losses() {
        let p = VehicleParams {
            eta_g: 1.0,
            ..table_vehicle()
        };
        let m = ideal_model();
        let samples: Vec<(f64, f64)> = (0..=60)
            .map(|i| {
                let t = i as f64;
                (t, 12.0 * (1.0 - ((t - 30.0) / 30.0).powi(2)))
            })
            .collect();
        let c = DriveCycle::from_samples("hump", &samples).unwrap();
        let e1 = cycle_energy(&c, &p, gear(2.0), &m, false).unwrap().e_ac;
        let e2 = cycle_energy(&c, &p, gear(8.0), &m, false).unwrap().e_ac;
        assert!(
            (e1 - e2).abs() <= 1e-9 * e1.abs().max(1.0),
            "lossless energy depends on gear: {e1} vs {e2}"
        );
    }

    #[test]
    fn top_speed_margin_negative_for_overgeared_design() {
        let p = table_vehicle();
        let m = reference_model();
        // ω at v_max = 10·50/0.295 ≈ 1695 rad/s > w_max = 1100
        let margin = check_top_speed(&p, gear(10.0), &m, &PerformanceSpec::default());
        assert!(margin < 0.0);
    }

    #[test]
    fn top_speed_margin_nonnegative_on_calibrated_grid() {
        // independent oracle: scan the gear box and keep feasible ratios
        let p = table_vehicle();
        let m = reference_model();
        let spec = PerformanceSpec::default();
        let feasible: Vec<f64> = grid_scan_gamma(&p, &m, &spec);
        assert!(!feasible.is_empty(), "calibration must admit some ratio");
        for g in feasible {
            assert!(check_top_speed(&p, gear(g), &m, &spec) >= 0.0);
        }
    }

    /// γ values (step 0.05 over [1, 10]) satisfying all three constraints.
    pub(crate) fn grid_scan_gamma(
        p: &VehicleParams,
        m: &MotorModel,
        spec: &PerformanceSpec,
    ) -> Vec<f64> {
        let mut ok = Vec::new();
        let mut i = 0;
        loop {
            let g = 1.0 + 0.05 * i as f64;
            if g > 10.0 + 1e-12 {
                break;
            }
            let gamma = gear(g.min(10.0));
            if check_top_speed(p, gamma, m, spec) >= 0.0
                && check_acceleration(p, gamma, m, spec) >= 0.0
                && check_gradeability(p, gamma, m, spec) >= 0.0
            {
                ok.push(g);
            }
            i += 1;
        }
        ok
    }

    #[test]
    fn top_speed_torque_margin_is_full_envelope_without_drag() {
        let p = VehicleParams {
            c_d: 0.0,
            c_r: 0.0,
            ..table_vehicle()
        };
        let m = reference_model();
        let spec = PerformanceSpec::default();
        // γ = 3: speed headroom is large, so the torque term binds
        let margin = check_top_speed(&p, gear(3.0), &m, &spec);
        let w = shaft_speed(&p, gear(3.0), spec.v_max);
        let expect = m.torque_limit(w) / m.t_ref;
        assert!((margin - expect).abs() <= 1e-12);
    }

    #[test]
    fn acceleration_margin_signs() {
        let p = table_vehicle();
        let spec = PerformanceSpec::default();
        // unbounded torque: reaches the target almost immediately
        assert!(check_acceleration(&p, gear(5.0), &ideal_model(), &spec) > 0.0);

        // no torque at all: capped at 60 s
        let dead = build_model(
            &ReferenceMachine {
                t_max0: 0.0,
                ..reference()
            },
            &ScalingVector::identity(),
        );
        let margin = check_acceleration(&p, gear(5.0), &dead, &spec);
        let expect = (spec.t_acc - 60.0) / spec.t_acc;
        assert!((margin - expect).abs() <= 1e-12);
        assert!(margin < 0.0);
    }

    #[test]
    fn gradeability_margin_cases() {
        let p = table_vehicle();
        let m = reference_model();
        let spec = PerformanceSpec::default();

        // flat road, no rolling: the whole envelope is margin
        let free = PerformanceSpec {
            alpha_max: 0.0,
            ..spec
        };
        let p0 = VehicleParams {
            c_r: 0.0,
            ..p.clone()
        };
        let margin = check_gradeability(&p0, gear(4.0), &m, &free);
        let w = shaft_speed(&p0, gear(4.0), CRAWL_SPEED);
        let expect = 4.0 * p0.eta_g * m.torque_limit(w) / m.t_ref;
        assert!((margin - expect).abs() <= 1e-12);

        // arithmetic oracle for the 20 % demand
        let theta = 0.20f64.atan();
        let demand = 0.295 * 1085.0 * 9.81 * (theta.sin() + 0.01 * theta.cos());
        assert!((demand - 646.5817).abs() < 1e-3, "demand = {demand}");
        let w4 = shaft_speed(&p, gear(4.0), CRAWL_SPEED);
        let got = check_gradeability(&p, gear(4.0), &m, &spec);
        let expect = (4.0 * 0.95 * m.torque_limit(w4) - demand) / m.t_ref;
        assert!((got - expect).abs() <= 1e-9 * expect.abs());

        // a dead machine cannot hold the slope
        let dead = build_model(
            &ReferenceMachine {
                t_max0: 0.0,
                ..reference()
            },
            &ScalingVector::identity(),
        );
        assert!(check_gradeability(&p, gear(4.0), &dead, &spec) < 0.0);
    }

    fn desk_cycle() -> DriveCycle {
        let mut samples = Vec::new();
        for i in 0..=240 {
            let t = i as f64;
            let v = match t {
                t if t < 5.0 => 0.0,
                t if t < 25.0 => 13.9 * (t - 5.0) / 20.0,
                t if t < 65.0 => 13.9,
                t if t < 80.0 => 13.9 * (80.0 - t) / 15.0,
                t if t < 90.0 => 0.0,
                t if t < 115.0 => 22.2 * (t - 90.0) / 25.0,
                t if t < 175.0 => 22.2,
                t if t < 200.0 => 22.2 * (200.0 - t) / 25.0,
                _ => 0.0,
            };
            samples.push((t, v));
        }
        DriveCycle::from_samples("desk", &samples).unwrap()
    }

    #[test]
    fn evaluate_mode_paths_are_identical() {
        let cycle = desk_cycle();
        let ctx = EvalContext::new(&cycle, table_vehicle(), reference());
        let prop = DesignVector::proportional(0.95, 1.05, 5.2);
        let comb = DesignVector::combined(0.95, 1.05, 5.2, 1.0, 1.0, 1.0, 1.0);
        let rp = evaluate(&prop, &ctx).unwrap();
        let rc = evaluate(&comb, &ctx).unwrap();
        assert_eq!(rp.e_ac.to_bits(), rc.e_ac.to_bits());
        assert_eq!(rp.margins, rc.margins);
        assert_eq!(rp.feasible, rc.feasible);
    }

    #[test]
    fn evaluate_rejects_out_of_bounds_design() {
        let cycle = desk_cycle();
        let ctx = EvalContext::new(&cycle, table_vehicle(), reference());
        let bad = DesignVector::combined(1.0, 1.3, 5.0, 1.0, 1.0, 1.0, 1.0);
        assert!(evaluate(&bad, &ctx).is_err());
    }

    #[test]
    fn evaluate_reference_design_on_desk_cycle() {
        let cycle = desk_cycle();
        let ctx = EvalContext::new(&cycle, table_vehicle(), reference());
        let design = DesignVector::proportional(1.0, 1.0, 5.5);
        let rec = evaluate(&design, &ctx).unwrap();
        assert!(rec.feasible, "margins: {:?}", rec.margins);
        assert!(rec.e_ac.is_finite() && rec.e_ac > 0.0);
    }

    #[test]
    fn evaluate_is_pure() {
        let cycle = desk_cycle();
        let ctx = EvalContext::new(&cycle, table_vehicle(), reference());
        let design = DesignVector::proportional(0.9, 1.1, 4.8);
        let a = evaluate(&design, &ctx).unwrap();
        let b = evaluate(&design, &ctx).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn infeasible_performance_skips_cycle() {
        let cycle = desk_cycle();
        let mut ctx = EvalContext::new(&cycle, table_vehicle(), reference());
        ctx.spec.t_acc = 0.01; // impossible sprint
        let rec = evaluate(&DesignVector::proportional(1.0, 1.0, 5.5), &ctx).unwrap();
        assert!(!rec.feasible);
        assert!(rec.e_ac.is_infinite());
        assert!(rec.margins.acceleration < 0.0);
        assert_eq!(rec.margins.envelope, 0.0, "cycle was skipped");
    }
}
