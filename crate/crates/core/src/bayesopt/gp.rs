//! Gaussian-process surrogate: Matérn-5/2 kernel with per-dimension length
//! scales, fitted by maximizing the log marginal likelihood over a fixed
//! multi-start grid refined by coordinate search.

use thiserror::Error;

use super::linalg::Cholesky;

/// Duplicate training rows closer than this (max-norm) are dropped.
const DEDUPE_TOL: f64 = 1e-9;
/// Initial diagonal jitter; escalated ×10 on factorization failure.
const JITTER_START: f64 = 1e-8;
const JITTER_MAX: f64 = 1e-2;

#[derive(Debug, Error)]
pub enum GpError {
    #[error("need at least 2 distinct training points, got {0}")]
    TooFewPoints(usize),
    #[error("covariance factorization failed for {n} points at jitter {jitter}")]
    Factorization { n: usize, jitter: f64 },
    #[error("input dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Kernel hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GpHyper {
    pub length_scales: Vec<f64>,
    pub signal_var: f64,
    pub noise_var: f64,
}

impl GpHyper {
    pub fn isotropic(dim: usize, length_scale: f64, signal_var: f64, noise_var: f64) -> Self {
        GpHyper {
            length_scales: vec![length_scale; dim],
            signal_var,
            noise_var,
        }
    }
}

fn matern52(r: f64) -> f64 {
    let s = 5.0_f64.sqrt() * r;
    (1.0 + s + s * s / 3.0) * (-s).exp()
}

fn kernel(a: &[f64], b: &[f64], h: &GpHyper) -> f64 {
    let mut r2 = 0.0;
    for ((&xa, &xb), &l) in a.iter().zip(b).zip(&h.length_scales) {
        let d = (xa - xb) / l;
        r2 += d * d;
    }
    h.signal_var * matern52(r2.sqrt())
}

/// A fitted Gaussian process over the unit box.
///
/// Inputs are expected normalized to [0, 1]^d and outputs standardized by
/// the caller; the model itself is unit-agnostic.
#[derive(Debug, Clone)]
pub struct GpModel {
    x: Vec<Vec<f64>>,
    hyper: GpHyper,
    chol: Cholesky,
    alpha: Vec<f64>,
    jitter: f64,
    /// Constant shift restored on prediction; nonzero only for the
    /// degenerate constant-observation fit.
    mean_offset: f64,
}

impl GpModel {
    /// Fit with hyperparameter search (multi-start grid + coordinate refine).
    pub fn fit(x: &[Vec<f64>], y: &[f64]) -> Result<GpModel, GpError> {
        let (x, y) = dedupe(x, y);
        if x.len() < 2 {
            return Err(GpError::TooFewPoints(x.len()));
        }
        let dim = x[0].len();

        // constant observations carry no signal; collapse to a flat
        // zero-variance posterior so the acquisition degenerates cleanly
        let spread = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - y.iter().cloned().fold(f64::INFINITY, f64::min);
        if spread <= 1e-12 {
            let offset = y[0];
            let centered: Vec<f64> = y.iter().map(|v| v - offset).collect();
            let mut gp = GpModel::fit_fixed_owned(
                x,
                centered,
                GpHyper::isotropic(dim, 1.0, 0.0, 1e-8),
            )?;
            gp.mean_offset = offset;
            return Ok(gp);
        }

        let mut best: Option<(f64, GpHyper)> = None;
        for &ls in &[0.2, 0.5, 1.0, 2.0, 4.0] {
            for &nv in &[1e-6, 1e-4, 1e-2] {
                let h = GpHyper::isotropic(dim, ls, 1.0, nv);
                if let Some(lml) = log_marginal(&x, &y, &h) {
                    if best.as_ref().is_none_or(|(b, _)| lml > *b) {
                        best = Some((lml, h));
                    }
                }
            }
        }
        let (mut best_lml, mut hyper) = best.ok_or(GpError::Factorization {
            n: x.len(),
            jitter: JITTER_MAX,
        })?;

        // coordinate search on log-scaled parameters, shrinking steps; each
        // step size sweeps until it stops improving
        for &step in &[2.0, 1.4, 1.15] {
            for _ in 0..4 {
                let mut improved = false;
                for p in 0..dim + 2 {
                    for &factor in &[step, 1.0 / step] {
                        let mut cand = hyper.clone();
                        match p {
                            _ if p < dim => {
                                cand.length_scales[p] =
                                    (cand.length_scales[p] * factor).clamp(1e-2, 1e2)
                            }
                            _ if p == dim => {
                                cand.signal_var = (cand.signal_var * factor).clamp(1e-4, 1e3)
                            }
                            _ => cand.noise_var = (cand.noise_var * factor).clamp(1e-9, 1.0),
                        }
                        if let Some(lml) = log_marginal(&x, &y, &cand) {
                            if lml > best_lml {
                                best_lml = lml;
                                hyper = cand;
                                improved = true;
                            }
                        }
                    }
                }
                if !improved {
                    break;
                }
            }
        }

        GpModel::fit_fixed_owned(x, y, hyper)
    }

    /// Fit with fixed hyperparameters (no search).
    pub fn fit_fixed(x: &[Vec<f64>], y: &[f64], hyper: GpHyper) -> Result<GpModel, GpError> {
        let (x, y) = dedupe(x, y);
        if x.len() < 2 {
            return Err(GpError::TooFewPoints(x.len()));
        }
        GpModel::fit_fixed_owned(x, y, hyper)
    }

    fn fit_fixed_owned(x: Vec<Vec<f64>>, y: Vec<f64>, hyper: GpHyper) -> Result<GpModel, GpError> {
        let (chol, jitter) = factor(&x, &hyper).ok_or(GpError::Factorization {
            n: x.len(),
            jitter: JITTER_MAX,
        })?;
        let alpha = chol.solve(&y);
        Ok(GpModel {
            x,
            hyper,
            chol,
            alpha,
            jitter,
            mean_offset: 0.0,
        })
    }

    pub fn training_inputs(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub fn hyper(&self) -> &GpHyper {
        &self.hyper
    }

    pub fn dim(&self) -> usize {
        self.x[0].len()
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Posterior mean and variance of the latent function at `q`.
    /// Variance is clamped at zero.
    pub fn predict(&self, q: &[f64]) -> Result<(f64, f64), GpError> {
        if q.len() != self.dim() {
            return Err(GpError::DimensionMismatch {
                expected: self.dim(),
                got: q.len(),
            });
        }
        let k_star: Vec<f64> = self.x.iter().map(|xi| kernel(xi, q, &self.hyper)).collect();
        let mean: f64 = k_star.iter().zip(&self.alpha).map(|(k, a)| k * a).sum();
        let v = self.chol.solve_lower(&k_star);
        let var = self.hyper.signal_var - v.iter().map(|x| x * x).sum::<f64>();
        Ok((mean + self.mean_offset, var.max(0.0)))
    }
}

fn dedupe(x: &[Vec<f64>], y: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut xo: Vec<Vec<f64>> = Vec::with_capacity(x.len());
    let mut yo: Vec<f64> = Vec::with_capacity(y.len());
    'outer: for (xi, &yi) in x.iter().zip(y) {
        for seen in &xo {
            let close = seen
                .iter()
                .zip(xi)
                .all(|(a, b)| (a - b).abs() <= DEDUPE_TOL);
            if close {
                continue 'outer;
            }
        }
        xo.push(xi.clone());
        yo.push(yi);
    }
    (xo, yo)
}

/// Build K + (σ_n² + jitter)·I and factorize, escalating the jitter ×10 up
/// to the cap when the factorization fails.
fn factor(x: &[Vec<f64>], h: &GpHyper) -> Option<(Cholesky, f64)> {
    let n = x.len();
    let mut base = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let k = kernel(&x[i], &x[j], h);
            base[i * n + j] = k;
            base[j * n + i] = k;
        }
    }
    let mut jitter = JITTER_START;
    while jitter <= JITTER_MAX {
        let mut a = base.clone();
        for i in 0..n {
            a[i * n + i] += h.noise_var + jitter;
        }
        if let Some(ch) = Cholesky::decompose(&a, n) {
            return Some((ch, jitter));
        }
        jitter *= 10.0;
    }
    None
}

fn log_marginal(x: &[Vec<f64>], y: &[f64], h: &GpHyper) -> Option<f64> {
    let (chol, _) = factor(x, h)?;
    let alpha = chol.solve(y);
    let fit: f64 = y.iter().zip(&alpha).map(|(yi, ai)| yi * ai).sum();
    let n = y.len() as f64;
    Some(-0.5 * fit - 0.5 * chol.log_det() - 0.5 * n * (2.0 * std::f64::consts::PI).ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_training_data_at_low_noise() {
        let x = vec![vec![0.2], vec![0.8]];
        let y = vec![1.0, -0.5];
        let gp =
            GpModel::fit_fixed(&x, &y, GpHyper::isotropic(1, 0.5, 1.0, 1e-8)).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            let (mu, _) = gp.predict(xi).unwrap();
            assert!(
                (mu - yi).abs() < 1e-6,
                "posterior mean {mu} drifted from observation {yi}"
            );
        }
    }

    #[test]
    fn constant_outputs_give_flat_posterior() {
        let x = vec![vec![0.1, 0.1], vec![0.5, 0.6], vec![0.9, 0.2]];
        let y = vec![0.0, 0.0, 0.0]; // already standardized-degenerate
        let gp = GpModel::fit(&x, &y).unwrap();
        for q in [[0.3, 0.3], [0.7, 0.9]] {
            let (mu, _) = gp.predict(&q).unwrap();
            assert!(mu.abs() < 1e-9, "mean should stay at zero, got {mu}");
        }
    }

    #[test]
    fn recovers_a_quadratic_surface() {
        // 20 samples of a smooth 2-D quadratic; posterior mean should track
        // held-out values within 5 % of the output range
        let f = |a: f64, b: f64| (a - 0.4).powi(2) + 0.5 * (b - 0.6).powi(2);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..20 {
            let a = (i as f64 * 0.618_033_988_749_895) % 1.0;
            let b = (i as f64 * 0.414_213_562_373_095) % 1.0;
            x.push(vec![a, b]);
            y.push(f(a, b));
        }
        // standardize as the optimizer would
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let sd = (y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / y.len() as f64).sqrt();
        let ys: Vec<f64> = y.iter().map(|v| (v - mean) / sd).collect();
        let gp = GpModel::fit(&x, &ys).unwrap();

        let range = 1.16; // max of f on the unit box
        for i in 0..10 {
            let a = ((i as f64 + 0.5) * 0.381_966_011_250_105) % 1.0;
            let b = ((i as f64 + 0.5) * 0.267_949_192_431_123) % 1.0;
            let (mu, _) = gp.predict(&[a, b]).unwrap();
            let got = mu * sd + mean;
            let expect = f(a, b);
            assert!(
                (got - expect).abs() < 0.05 * range,
                "held-out point ({a:.3}, {b:.3}): {got} vs {expect}"
            );
        }
    }

    #[test]
    fn posterior_variance_bounded_by_noise_at_training_points() {
        let x: Vec<Vec<f64>> = (0..12)
            .map(|i| vec![(i as f64 * 0.083) % 1.0, (i as f64 * 0.27) % 1.0])
            .collect();
        let y: Vec<f64> = (0..12).map(|i| ((i * 7) % 5) as f64 / 5.0 - 0.4).collect();
        let gp = GpModel::fit(&x, &y).unwrap();
        let budget = gp.hyper().noise_var + gp.jitter() + 1e-6;
        for xi in gp.training_inputs() {
            let (_, var) = gp.predict(xi).unwrap();
            assert!(var <= budget, "variance {var} exceeds noise budget {budget}");
        }
    }

    #[test]
    fn dedupe_drops_near_identical_rows() {
        let x = vec![vec![0.5], vec![0.5 + 1e-12], vec![0.9]];
        let y = vec![1.0, 2.0, 3.0];
        let gp = GpModel::fit(&x, &y).unwrap();
        assert_eq!(gp.training_inputs().len(), 2);
    }

    #[test]
    fn too_few_points_is_an_error() {
        let x = vec![vec![0.5]];
        let y = vec![1.0];
        assert!(matches!(
            GpModel::fit(&x, &y),
            Err(GpError::TooFewPoints(1))
        ));
    }
}
