//! Powertrain design study for a battery-electric vehicle: scale a reference
//! motor geometrically, simulate candidate designs over a drive cycle, and
//! minimize the cycle input energy with a constrained Bayesian optimizer.
//!
//! The crate is organized along the data flow:
//!
//! - [`cycle`]: speed-trace ingestion and resampling
//! - [`vehicle`]: wheel-level dynamics and the one-speed transmission
//! - [`motor`]: geometric scaling and the closed-form performance surrogate
//! - [`design`]: the seven-variable design vector and its search box
//! - [`sim`]: per-candidate evaluation (energy + performance constraints)
//! - [`bayesopt`]: the seeded Gaussian-process optimization loop

pub mod bayesopt;
pub mod cycle;
pub mod design;
pub mod motor;
pub mod sim;
pub mod vehicle;

pub use bayesopt::{optimize, RunResult, SolverConfig};
pub use cycle::{load_cycle, resample, DriveCycle, SpeedUnit};
pub use design::{DesignBounds, DesignVector, Mode};
pub use motor::{build_model, MotorModel, ReferenceMachine, ScalingVector};
pub use sim::{evaluate, EvalContext, EvaluationRecord, PerformanceSpec};
pub use vehicle::{GearRatio, VehicleParams};
