//! Seeded random sampling helpers.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Uniform point in the ball of radius `r` in `ℝ^dim`.
pub fn uniform_ball<R: Rng>(dim: usize, r: f64, rng: &mut R) -> Vec<f64> {
    if dim == 0 {
        return Vec::new();
    }
    let g: Vec<f64> = (0..dim).map(|_| standard_normal(rng)).collect();
    let n = g.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let radius = r * rng.gen::<f64>().powf(1.0 / dim as f64);
    g.iter().map(|x| x * radius / n).collect()
}

/// Uniform point on the unit sphere in `ℝ^dim`.
pub fn unit_sphere<R: Rng>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..dim).map(|_| standard_normal(rng)).collect();
        let n = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            return g.iter().map(|x| x / n).collect();
        }
    }
}
