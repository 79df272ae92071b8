//! Latin-hypercube sampling for the initial design batch.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `n` points in the unit box with one sample per stratum and dimension.
pub fn latin_hypercube(n: usize, dim: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut points = vec![vec![0.0; dim]; n];
    let mut strata: Vec<usize> = (0..n).collect();
    for d in 0..dim {
        strata.shuffle(rng);
        for (i, point) in points.iter_mut().enumerate() {
            let offset: f64 = rng.gen();
            point[d] = (strata[i] as f64 + offset) / n as f64;
        }
    }
    points
}
