//! End-to-end checks on the bundled desk cycle: a frozen regression
//! baseline for the reference design and a small matched-budget comparison
//! of the two study modes.

use std::path::PathBuf;

use evscale_core::bayesopt::{optimize, SolverConfig};
use evscale_core::cycle::{load_cycle, resample, DriveCycle, SpeedUnit};
use evscale_core::design::{DesignVector, Mode};
use evscale_core::motor::ReferenceMachine;
use evscale_core::sim::{evaluate, EvalContext};
use evscale_core::vehicle::VehicleParams;

fn desk_cycle() -> DriveCycle {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/desk_cycle.csv");
    let raw = load_cycle(&path, SpeedUnit::KilometersPerHour).unwrap();
    resample(&raw, 1.0).unwrap()
}

#[test]
fn reference_design_baseline_energy() {
    let cycle = desk_cycle();
    let ctx = EvalContext::new(&cycle, VehicleParams::default(), ReferenceMachine::default());
    let rec = evaluate(&DesignVector::proportional(1.0, 1.0, 5.5), &ctx).unwrap();
    assert!(rec.feasible, "margins: {:?}", rec.margins);

    // frozen regression baseline for the shipped defaults
    let baseline = 615361.2623181202;
    assert!(
        (rec.e_ac - baseline).abs() <= 1e-9 * baseline,
        "desk-cycle energy drifted from the baseline: {} vs {baseline}",
        rec.e_ac
    );
}

#[test]
fn combined_mode_matches_proportional_at_equal_budget() {
    let cycle = desk_cycle();
    let ctx = EvalContext::new(&cycle, VehicleParams::default(), ReferenceMachine::default());
    let problem = |d: &DesignVector| evaluate(d, &ctx).expect("in bounds");

    let mut best_prop = f64::INFINITY;
    let mut best_comb = f64::INFINITY;
    for seed in [1u64, 2, 3] {
        let prop = optimize(problem, &SolverConfig::new(Mode::Proportional, 25, seed)).unwrap();
        let comb = optimize(problem, &SolverConfig::new(Mode::Combined, 25, seed)).unwrap();
        best_prop = best_prop.min(prop.best().unwrap().e_ac);
        best_comb = best_comb.min(comb.best().unwrap().e_ac);
    }
    // the combined box contains every proportional design
    assert!(
        best_comb <= best_prop * 1.005,
        "combined {best_comb} fell behind proportional {best_prop} at matched budget"
    );
}
