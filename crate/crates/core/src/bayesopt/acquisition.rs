//! Expected-improvement acquisition and its maximizer: seeded quasi-random
//! candidates refined by Nelder–Mead, with a most-distant-point fallback
//! when the surface is degenerate.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::gp::GpModel;

/// σ below this is treated as zero and EI collapses to max(best − μ, 0).
const SIGMA_FLOOR: f64 = 1e-12;
/// Maximum candidate EI below this triggers the exploration fallback.
const DEGENERATE_EI: f64 = 1e-12;

pub(crate) fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal CDF via the Abramowitz–Stegun erf approximation
/// (absolute error below 1.5e-7).
pub(crate) fn norm_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

fn erf(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    sign * (1.0 - poly * (-x * x).exp())
}

/// Expected improvement below `best` for a posterior N(mean, sd²),
/// minimization convention. Nonnegative by construction.
pub fn ei_from_moments(mean: f64, sd: f64, best: f64) -> f64 {
    let gap = best - mean;
    if sd <= SIGMA_FLOOR {
        return gap.max(0.0);
    }
    let z = gap / sd;
    (gap * norm_cdf(z) + sd * norm_pdf(z)).max(0.0)
}

/// Expected improvement of the GP posterior at `q` against the incumbent.
pub fn expected_improvement(gp: &GpModel, q: &[f64], best: f64) -> f64 {
    let (mean, var) = gp.predict(q).expect("query dimension matches the model");
    ei_from_moments(mean, var.sqrt(), best)
}

/// A proposed next point in the unit box.
#[derive(Debug, Clone)]
pub struct UnitProposal {
    pub point: Vec<f64>,
    pub ei: f64,
}

/// Maximize EI over the unit box: `n_candidates` shifted-Halton points
/// scored, the top 5 refined by Nelder–Mead. Deterministic given the rng
/// state. When every candidate's EI is degenerate (e.g. constant
/// observations), falls back to the candidate farthest from the training
/// set.
pub fn propose_unit(
    gp: &GpModel,
    best: f64,
    rng: &mut ChaCha8Rng,
    n_candidates: usize,
) -> UnitProposal {
    let dim = gp.dim();
    let shift: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
    let candidates: Vec<Vec<f64>> = (0..n_candidates)
        .map(|i| halton_point(i + 1, &shift))
        .collect();

    let mut scored: Vec<(usize, f64)> = candidates
        .iter()
        .enumerate()
        .map(|(i, c)| (i, expected_improvement(gp, c, best)))
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));

    if scored[0].1 < DEGENERATE_EI {
        let point = most_distant(&candidates, gp.training_inputs());
        return UnitProposal { point, ei: 0.0 };
    }

    let mut best_point = candidates[scored[0].0].clone();
    let mut best_ei = scored[0].1;
    for &(idx, _) in scored.iter().take(5) {
        let start = &candidates[idx];
        let (refined, neg) = nelder_mead(
            |x| -expected_improvement(gp, x, best),
            start,
            0.05,
            60,
        );
        if -neg > best_ei {
            best_ei = -neg;
            best_point = refined;
        }
    }
    UnitProposal {
        point: best_point,
        ei: best_ei,
    }
}

fn most_distant(candidates: &[Vec<f64>], training: &[Vec<f64>]) -> Vec<f64> {
    let dist = |c: &[f64]| -> f64 {
        training
            .iter()
            .map(|t| {
                t.iter()
                    .zip(c)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min)
    };
    candidates
        .iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| {
            dist(a)
                .partial_cmp(&dist(b))
                .unwrap()
                .then(j.cmp(i))
        })
        .map(|(_, c)| c.clone())
        .expect("candidate set is never empty")
}

const HALTON_BASES: [u64; 7] = [2, 3, 5, 7, 11, 13, 17];

fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

/// Low-discrepancy point with a random shift (mod 1) per dimension.
fn halton_point(index: usize, shift: &[f64]) -> Vec<f64> {
    shift
        .iter()
        .enumerate()
        .map(|(d, s)| (halton(index as u64, HALTON_BASES[d]) + s) % 1.0)
        .collect()
}

/// Nelder–Mead minimization clamped to the unit box. Deterministic; returns
/// the best vertex after `max_iter` iterations.
pub fn nelder_mead(
    f: impl Fn(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    max_iter: usize,
) -> (Vec<f64>, f64) {
    let dim = x0.len();
    let clamp = |x: &mut Vec<f64>| {
        for v in x.iter_mut() {
            *v = v.clamp(0.0, 1.0);
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let mut base = x0.to_vec();
    clamp(&mut base);
    simplex.push((base.clone(), f(&base)));
    for d in 0..dim {
        let mut v = base.clone();
        v[d] = if v[d] + step <= 1.0 {
            v[d] + step
        } else {
            v[d] - step
        };
        let fv = f(&v);
        simplex.push((v, fv));
    }

    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let worst = simplex[dim].clone();
        let second_worst = simplex[dim - 1].1;
        let best = simplex[0].1;

        let mut centroid = vec![0.0; dim];
        for (v, _) in simplex.iter().take(dim) {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / dim as f64;
            }
        }

        let at = |coef: f64| -> (Vec<f64>, f64) {
            let mut p: Vec<f64> = centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + coef * (c - w))
                .collect();
            clamp(&mut p);
            let fp = f(&p);
            (p, fp)
        };

        let reflected = at(1.0);
        if reflected.1 < best {
            let expanded = at(2.0);
            simplex[dim] = if expanded.1 < reflected.1 {
                expanded
            } else {
                reflected
            };
        } else if reflected.1 < second_worst {
            simplex[dim] = reflected;
        } else {
            let contracted = at(-0.5);
            if contracted.1 < worst.1 {
                simplex[dim] = contracted;
            } else {
                // shrink toward the best vertex
                let anchor = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let mut v: Vec<f64> = anchor
                        .iter()
                        .zip(&item.0)
                        .map(|(a, b)| a + 0.5 * (b - a))
                        .collect();
                    clamp(&mut v);
                    let fv = f(&v);
                    *item = (v, fv);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    simplex.swap_remove(0)
}
