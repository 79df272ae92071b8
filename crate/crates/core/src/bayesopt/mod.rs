//! Derivative-free solver for the powertrain design problem: a Gaussian
//! process over the design box, expected-improvement acquisition, and a
//! deterministic feasibility penalty, all seeded and reproducible.

mod acquisition;
mod gp;
mod linalg;
mod sampling;

pub use acquisition::{ei_from_moments, expected_improvement, nelder_mead, UnitProposal};
pub use gp::{GpError, GpHyper, GpModel};
pub use sampling::latin_hypercube;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::design::{DesignBounds, DesignVector, Mode};
use crate::sim::EvaluationRecord;

/// Seed offset separating initial-design randomness from the loop's, so the
/// two streams are independently reproducible.
const INIT_SEED_OFFSET: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("surrogate fit failed after {evaluated} evaluations: {source}")]
    Surrogate {
        evaluated: usize,
        #[source]
        source: GpError,
    },
    #[error("iteration budget must be at least 1")]
    NoBudget,
}

/// Solver settings for one optimization run.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub mode: Mode,
    pub iterations: usize,
    pub seed: u64,
    pub bounds: DesignBounds,
    /// Objective assigned to infeasible points before any feasible energy is
    /// known, J.
    pub penalty_fallback: f64,
    /// Acquisition candidates per iteration.
    pub n_candidates: usize,
}

impl SolverConfig {
    pub fn new(mode: Mode, iterations: usize, seed: u64) -> Self {
        SolverConfig {
            mode,
            iterations,
            seed,
            bounds: DesignBounds::default(),
            penalty_fallback: 1.0e8,
            n_candidates: 1024,
        }
    }

    /// Initial Latin-hypercube batch size: max(5, 2·d).
    pub fn n_init(&self) -> usize {
        (2 * self.mode.dim()).max(5)
    }
}

/// One evaluated candidate in run order.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryEntry {
    pub eval: EvaluationRecord,
    /// Acquisition value at proposal time (standardized units); `None` for
    /// the initial batch.
    pub proposal_ei: Option<f64>,
}

/// A complete seeded optimization run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub mode: Mode,
    pub seed: u64,
    pub iterations: usize,
    pub n_init: usize,
    pub history: Vec<HistoryEntry>,
    pub wall_time_s: f64,
}

impl RunResult {
    /// The minimum-energy feasible record, if the run found any.
    pub fn best(&self) -> Option<&EvaluationRecord> {
        self.history
            .iter()
            .map(|h| &h.eval)
            .filter(|r| r.feasible)
            .min_by(|a, b| a.e_ac.partial_cmp(&b.e_ac).unwrap())
    }

    pub fn is_feasible_run(&self) -> bool {
        self.best().is_some()
    }

    /// Running best energy after each history entry (∞ until the first
    /// feasible point).
    pub fn best_trajectory(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.history
            .iter()
            .map(|h| {
                if h.eval.feasible {
                    best = best.min(h.eval.e_ac);
                }
                best
            })
            .collect()
    }
}

/// GP training targets: feasible points keep their energy; infeasible points
/// get (worst feasible energy so far, or the fallback) × (1 + violation), so
/// no infeasible point ever ranks below the best feasible one.
pub(crate) fn penalized_targets(records: &[&EvaluationRecord], fallback: f64) -> Vec<f64> {
    let worst_feasible = records
        .iter()
        .filter(|r| r.feasible)
        .map(|r| r.e_ac)
        .fold(f64::NEG_INFINITY, f64::max);
    let base = if worst_feasible.is_finite() && worst_feasible > 0.0 {
        worst_feasible
    } else {
        fallback
    };
    records
        .iter()
        .map(|r| {
            if r.feasible {
                r.e_ac
            } else {
                base * (1.0 + r.margins.violation())
            }
        })
        .collect()
}

fn standardize(y: &[f64]) -> (Vec<f64>, f64, f64) {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sd = var.sqrt().max(1e-12);
    (y.iter().map(|v| (v - mean) / sd).collect(), mean, sd)
}

/// Propose the next design for an already-fitted surrogate.
pub fn propose(
    gp: &GpModel,
    bounds: &DesignBounds,
    mode: Mode,
    best_standardized: f64,
    rng: &mut ChaCha8Rng,
    n_candidates: usize,
) -> (DesignVector, f64) {
    let unit = acquisition::propose_unit(gp, best_standardized, rng, n_candidates);
    let coords = bounds.from_unit(mode, &unit.point);
    (DesignVector::from_free_coords(mode, &coords), unit.ei)
}

/// Run the full loop: a Latin-hypercube initial batch, then `iterations`
/// fit–propose–evaluate steps. Deterministic for a given (config, problem).
///
/// The evaluation closure must tolerate concurrent calls; the initial batch
/// is evaluated in parallel.
pub fn optimize<F>(problem: F, cfg: &SolverConfig) -> Result<RunResult, SolverError>
where
    F: Fn(&DesignVector) -> EvaluationRecord + Sync,
{
    if cfg.iterations == 0 {
        return Err(SolverError::NoBudget);
    }
    let start = Instant::now();
    let dim = cfg.mode.dim();
    let n_init = cfg.n_init();

    let mut init_rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(INIT_SEED_OFFSET));
    let unit_points = latin_hypercube(n_init, dim, &mut init_rng);
    let designs: Vec<DesignVector> = unit_points
        .iter()
        .map(|u| DesignVector::from_free_coords(cfg.mode, &cfg.bounds.from_unit(cfg.mode, u)))
        .collect();

    let mut init_records: Vec<Option<EvaluationRecord>> = designs.iter().map(|_| None).collect();
    std::thread::scope(|scope| {
        for (slot, design) in init_records.iter_mut().zip(&designs) {
            scope.spawn(|| *slot = Some(problem(design)));
        }
    });
    let mut history: Vec<HistoryEntry> = init_records
        .into_iter()
        .map(|r| HistoryEntry {
            eval: r.expect("initial evaluation completed"),
            proposal_ei: None,
        })
        .collect();

    let mut loop_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.iterations {
        let records: Vec<&EvaluationRecord> = history.iter().map(|h| &h.eval).collect();
        let x: Vec<Vec<f64>> = records
            .iter()
            .map(|r| cfg.bounds.to_unit(cfg.mode, &r.design.free_coords()))
            .collect();
        let targets = penalized_targets(&records, cfg.penalty_fallback);
        let (y_std, _, _) = standardize(&targets);
        let gp = GpModel::fit(&x, &y_std).map_err(|source| SolverError::Surrogate {
            evaluated: history.len(),
            source,
        })?;
        let best_std = y_std.iter().cloned().fold(f64::INFINITY, f64::min);

        let (design, ei) = propose(
            &gp,
            &cfg.bounds,
            cfg.mode,
            best_std,
            &mut loop_rng,
            cfg.n_candidates,
        );
        let eval = problem(&design);
        history.push(HistoryEntry {
            eval,
            proposal_ei: Some(ei),
        });
    }

    Ok(RunResult {
        mode: cfg.mode,
        seed: cfg.seed,
        iterations: cfg.iterations,
        n_init,
        history,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}
