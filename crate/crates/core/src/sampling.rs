//! Seeded random sampling of vectors, sphere points, and Stiefel frames.
//!
//! Frames are drawn from the invariant measure by orthonormalizing Gaussian
//! matrices (optionally after projecting into a subspace), which is the
//! standard construction of the uniform distribution on a Stiefel manifold.

use crate::geometry::{Point, StiefelFrame};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic generator used across the crate; one seed, one stream.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal via Box–Muller, platform-deterministic.
pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| gaussian(rng))
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Uniform point on the unit sphere of R^dim.
pub fn sphere_point(rng: &mut ChaCha8Rng, dim: usize) -> Point {
    loop {
        let v = gaussian_vector(rng, dim);
        let n = v.norm();
        if n > 1e-6 {
            return v / n;
        }
    }
}

/// Uniform frame from the invariant measure on St(dim, size).
pub fn uniform_stiefel(rng: &mut ChaCha8Rng, dim: usize, size: usize) -> StiefelFrame {
    loop {
        let g = gaussian_matrix(rng, dim, size);
        if let Ok(f) = StiefelFrame::orthonormalize(&g) {
            return f;
        }
    }
}

/// Uniform frame in the orthogonal complement of `perp_to`: Gaussian columns
/// are projected into the complement before orthonormalization, realizing
/// the invariant measure on St(perp_to^⊥, size).
pub fn uniform_stiefel_in_complement(
    rng: &mut ChaCha8Rng,
    perp_to: &StiefelFrame,
    size: usize,
) -> StiefelFrame {
    let dim = perp_to.ambient_dim();
    loop {
        let g = gaussian_matrix(rng, dim, size);
        let proj = &g - perp_to.matrix() * (perp_to.matrix().transpose() * &g);
        if let Ok(f) = StiefelFrame::orthonormalize(&proj) {
            return f;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_frames_are_orthogonal_to_base() {
        let mut r = rng(11);
        let base = uniform_stiefel(&mut r, 4, 1);
        for _ in 0..20 {
            let f = uniform_stiefel_in_complement(&mut r, &base, 2);
            let cross = base.matrix().transpose() * f.matrix();
            assert!(cross.norm() < 1e-12);
        }
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let a = gaussian_vector(&mut rng(7), 5);
        let b = gaussian_vector(&mut rng(7), 5);
        assert_eq!(a, b);
    }
}
