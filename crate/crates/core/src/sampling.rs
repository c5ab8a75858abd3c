//! Seeded samplers used by the measure estimators and certification checks.
//!
//! Everything takes an explicit RNG so a fixed seed gives a reproducible
//! sample stream; results are combined by max/min which is order
//! independent.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw from the standard simplex (Dirichlet(1,...,1)) via
/// normalized exponentials.
pub fn dirichlet(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n).map(|_| -(rng.gen_range(1e-16..1.0f64)).ln()).collect();
    let s: f64 = x.iter().sum();
    for v in x.iter_mut() {
        *v /= s;
    }
    x
}

/// Uniform point in an axis-aligned box.
pub fn in_box(rng: &mut impl Rng, lo: &[f64], hi: &[f64]) -> Vec<f64> {
    lo.iter()
        .zip(hi)
        .map(|(&a, &b)| if a == b { a } else { rng.gen_range(a..b) })
        .collect()
}

/// Ordered pair (x, y) with x >= y, both inside the box: y is uniform and x
/// adds a Dirichlet-scaled nonnegative offset clipped to the box.
pub fn ordered_pair(rng: &mut impl Rng, lo: &[f64], hi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let y = in_box(rng, lo, hi);
    let dir = dirichlet(rng, lo.len());
    let scale = rng.gen_range(0.0..1.0f64);
    let x: Vec<f64> = y
        .iter()
        .zip(&dir)
        .zip(hi)
        .map(|((&yi, &di), &h)| (yi + scale * di * (h - lo[0]).abs().max(1.0)).min(h))
        .collect();
    (x, y)
}

/// Standard-normal vector (Box-Muller).
pub fn gaussian(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let u1: f64 = rng.gen_range(1e-16..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        })
        .collect()
}

/// Nonnegative-orthant sample set for conic measure estimation: Dirichlet
/// draws plus the coordinate axes and the all-ones vector.
pub fn conic_samples(rng: &mut impl Rng, n: usize, n_dirichlet: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(n_dirichlet + n + 1);
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        out.push(e);
    }
    out.push(vec![1.0; n]);
    for _ in 0..n_dirichlet {
        out.push(dirichlet(rng, n));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirichlet_on_simplex() {
        let mut rng = rng_from_seed(7);
        for _ in 0..100 {
            let x = dirichlet(&mut rng, 5);
            assert!(x.iter().all(|&v| v >= 0.0));
            assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ordered_pairs_are_ordered() {
        let mut rng = rng_from_seed(7);
        let lo = vec![0.0; 3];
        let hi = vec![2.0; 3];
        for _ in 0..200 {
            let (x, y) = ordered_pair(&mut rng, &lo, &hi);
            for i in 0..3 {
                assert!(x[i] >= y[i] - 1e-15);
                assert!(x[i] <= hi[i] + 1e-15 && y[i] >= lo[i] - 1e-15);
            }
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let a: Vec<f64> = dirichlet(&mut rng_from_seed(42), 4);
        let b: Vec<f64> = dirichlet(&mut rng_from_seed(42), 4);
        assert_eq!(a, b);
    }
}
