//! Shared helpers for the benchmark targets.

use concert_core::sampling;
use concert_core::Matrix;
use rand::Rng;

pub use rand;

pub fn random_matrix(seed: u64, n: usize) -> Matrix {
    let mut rng = sampling::rng_from_seed(seed);
    Matrix::from_fn(n, n, |_, _| rng.gen_range(-2.0..2.0))
}

pub fn random_metzler(seed: u64, n: usize) -> Matrix {
    let mut rng = sampling::rng_from_seed(seed);
    Matrix::from_fn(n, n, |i, j| {
        if i == j {
            rng.gen_range(-3.0..-1.0)
        } else {
            rng.gen_range(0.0..0.5)
        }
    })
}
