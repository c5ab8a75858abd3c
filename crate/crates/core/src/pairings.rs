//! Weak pairings for the weighted p-norm family and numerical checks of
//! Deimling's inequality and the curve norm derivative formula.
//!
//! For p in (1, inf) the pairing is
//! `||y||_{p,R}^{2-p} (Ry o |Ry|^{p-2})^T Rx`; for p = 1 it is
//! `||Ry||_1 sign(Ry)^T Rx`; for p = inf it is the maximum of
//! `(Ry)_i (Rx)_i` over the (tie-tolerant) max-index set of Ry.
//!
//! By convention `wp(x, 0) = 0` for every p: the p in (1,2) formula is 0/0
//! at y = 0 and the value 0 is the one consistent with weak homogeneity at
//! alpha = 0.

use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::linalg::ensure_finite;
use crate::norm::{p_norm, weighted_norm, NormSpec, PExp};
use crate::odesim::Trajectory;

/// Default relative tie tolerance for the max-index set.
pub const TIE_TOL: f64 = 1e-9;

/// Indices attaining the maximum absolute entry, within a relative tie
/// tolerance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MaxIndexSet {
    pub indices: Vec<usize>,
}

/// Sorted indices i with |x_i| >= (1 - tau) * max|x|. Errors on the zero
/// vector.
pub fn max_index_set(x: &[f64], tau: f64) -> Result<MaxIndexSet> {
    ensure_finite(x, "max_index_set input")?;
    let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m == 0.0 {
        return Err(CoreError::ZeroVector("max_index_set of the zero vector".into()));
    }
    let cut = (1.0 - tau) * m;
    let indices = (0..x.len()).filter(|&i| x[i].abs() >= cut).collect();
    Ok(MaxIndexSet { indices })
}

/// Weak pairing wp(x, y) for the norm described by `ns`.
pub fn wp(x: &[f64], y: &[f64], ns: &NormSpec) -> Result<f64> {
    if x.len() != y.len() {
        return Err(CoreError::DimensionMismatch { expected: y.len(), got: x.len() });
    }
    ensure_finite(x, "wp first argument")?;
    ensure_finite(y, "wp second argument")?;
    let rx = ns.apply_weight(x)?;
    let ry = ns.apply_weight(y)?;
    if ry.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    match ns.p {
        PExp::Finite(p) if p == 1.0 => {
            let n1 = p_norm(&ry, PExp::Finite(1.0));
            let dot: f64 = ry.iter().zip(&rx).map(|(&yi, &xi)| yi.signum() * xi).sum();
            Ok(n1 * dot)
        }
        PExp::Inf => {
            let set = max_index_set(&ry, TIE_TOL)?;
            Ok(set
                .indices
                .iter()
                .map(|&i| ry[i] * rx[i])
                .fold(f64::NEG_INFINITY, f64::max))
        }
        PExp::Finite(p) => {
            let ny = p_norm(&ry, PExp::Finite(p));
            // Entries with (Ry)_i = 0 contribute 0 (the y_i |y_i|^{p-2} x_i
            // limit as y_i -> 0 for p > 1).
            let dot: f64 = ry
                .iter()
                .zip(&rx)
                .map(|(&yi, &xi)| if yi == 0.0 { 0.0 } else { yi * yi.abs().powf(p - 2.0) * xi })
                .sum();
            Ok(ny.powf(2.0 - p) * dot)
        }
    }
}

/// Numerical margin/residual report shared by the pairing checks and the
/// sampling sweeps that build on them.
#[derive(Clone, Debug, Serialize)]
pub struct MarginReport {
    pub condition: String,
    pub samples: usize,
    pub worst_margin: f64,
    pub failures: Vec<Failure>,
    /// Set when the limit extrapolation did not settle; the margin is then
    /// indicative only.
    pub nonconvergent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub inputs: serde_json::Value,
    pub value: f64,
}

/// One-sided directional derivative of the norm at y in direction x,
/// estimated by forward differences over `h_schedule` with order-1
/// Richardson extrapolation on the last points.
pub fn norm_directional_derivative(
    x: &[f64],
    y: &[f64],
    ns: &NormSpec,
    h_schedule: &[f64],
) -> Result<(f64, bool)> {
    if y.iter().all(|&v| v == 0.0) {
        return Err(CoreError::ZeroVector("directional derivative at y = 0".into()));
    }
    let ny = weighted_norm(y, ns)?;
    let mut f = Vec::with_capacity(h_schedule.len());
    for &h in h_schedule {
        let yh: Vec<f64> = y.iter().zip(x).map(|(&yi, &xi)| yi + h * xi).collect();
        f.push((weighted_norm(&yh, ns)? - ny) / h);
    }
    Ok(richardson(h_schedule, &f))
}

/// Order-1 Richardson extrapolation for a halving h-schedule; returns the
/// extrapolated limit and a convergence flag.
pub fn richardson(h: &[f64], f: &[f64]) -> (f64, bool) {
    assert_eq!(h.len(), f.len());
    if f.len() < 2 {
        return (*f.last().unwrap(), false);
    }
    let start = f.len().saturating_sub(4);
    let mut extr = Vec::new();
    for k in start..f.len() - 1 {
        // f(h) ~ L + c h: with h_{k+1} = r h_k the limit is
        // (f_{k+1} - r f_k) / (1 - r).
        let r = h[k + 1] / h[k];
        extr.push((f[k + 1] - r * f[k]) / (1.0 - r));
    }
    let last = *extr.last().unwrap();
    let spread = extr
        .iter()
        .map(|v| (v - last).abs())
        .fold(0.0, f64::max);
    let scale = 1.0 + last.abs();
    (last, spread <= 1e-5 * scale)
}

/// Default halving schedule h_k = h0 * 2^-k, k = 0..steps.
pub fn default_h_schedule(h0: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|k| h0 / (1u64 << k) as f64).collect()
}

/// Checks Deimling's inequality for one (x, y) pair: the norm's directional
/// derivative times ||y|| must dominate wp(x, y). Returns the margin
/// (estimate - wp), nonnegative up to numerical tolerance when the
/// inequality holds.
pub fn check_deimling(x: &[f64], y: &[f64], ns: &NormSpec, h_schedule: &[f64]) -> Result<MarginReport> {
    let (deriv, converged) = norm_directional_derivative(x, y, ns, h_schedule)?;
    let ny = weighted_norm(y, ns)?;
    let margin = ny * deriv - wp(x, y, ns)?;
    Ok(MarginReport {
        condition: "deimling".into(),
        samples: 1,
        worst_margin: margin,
        failures: vec![],
        nonconvergent: !converged,
    })
}

/// Per-step residual of the curve norm derivative formula along a
/// trajectory: | ||x|| D+||x|| - wp(xdot, x) | at each accepted step.
///
/// Steps where the (weighted) max-index set changes between endpoints are
/// excluded for p = inf; the formula only holds almost everywhere and the
/// switches are exactly the exceptional times.
#[derive(Clone, Debug, Serialize)]
pub struct CurveNormReport {
    pub residuals: Vec<f64>,
    pub excluded: Vec<usize>,
    pub max_residual: f64,
}

pub fn check_curve_norm_derivative(traj: &Trajectory, ns: &NormSpec) -> Result<CurveNormReport> {
    let mut residuals = Vec::new();
    let mut excluded = Vec::new();
    let mut max_residual = 0.0f64;
    let n_steps = traj.times.len();
    for k in 0..n_steps {
        let x = &traj.states[k];
        let xdot = &traj.derivs[k];
        if x.iter().all(|&v| v == 0.0) {
            residuals.push(0.0);
            continue;
        }
        if ns.p.is_inf() && k + 1 < n_steps {
            let rx0 = ns.apply_weight(x)?;
            let rx1 = ns.apply_weight(&traj.states[k + 1])?;
            let s0 = max_index_set(&rx0, TIE_TOL)?;
            let s1 = max_index_set(&rx1, 0.0).unwrap_or_else(|_| s0.clone());
            if s0 != s1 {
                excluded.push(k);
                residuals.push(f64::NAN);
                continue;
            }
        }
        let h = default_h_schedule(1e-3, 8);
        let (deriv, _) = norm_directional_derivative(xdot, x, ns, &h)?;
        let nx = weighted_norm(x, ns)?;
        let r = (nx * deriv - wp(xdot, x, ns)?).abs();
        residuals.push(r);
        max_residual = max_residual.max(r);
    }
    Ok(CurveNormReport { residuals, excluded, max_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm::Weight;
    use crate::sampling;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn ns(p: PExp) -> NormSpec {
        NormSpec::identity(p)
    }

    #[test]
    fn max_index_examples() {
        assert_eq!(max_index_set(&[2.0, 1.0], 0.0).unwrap().indices, vec![0]);
        assert_eq!(max_index_set(&[1.0, 1.0], 0.0).unwrap().indices, vec![0, 1]);
        assert_eq!(
            max_index_set(&[1.0, 1.0 - 1e-12], 1e-9).unwrap().indices,
            vec![0, 1]
        );
        assert!(max_index_set(&[0.0, 0.0], 1e-9).is_err());
    }

    #[test]
    fn wp_examples() {
        // ||y||_1 sign(y)^T x with orthogonal sign pattern.
        assert_abs_diff_eq!(
            wp(&[1.0, -1.0], &[1.0, 1.0], &ns(PExp::Finite(1.0))).unwrap(),
            0.0
        );
        // p = inf: index set of y = (2,1) is {0}, value y_0 x_0 = 6.
        assert_abs_diff_eq!(wp(&[3.0, 5.0], &[2.0, 1.0], &ns(PExp::Inf)).unwrap(), 6.0);
        // wp(x, 0) = 0 by convention.
        for p in [PExp::Finite(1.0), PExp::Finite(1.5), PExp::Finite(2.0), PExp::Inf] {
            assert_eq!(wp(&[1.0, 2.0], &[0.0, 0.0], &ns(p)).unwrap(), 0.0);
        }
    }

    #[test]
    fn wp_self_pairing_is_norm_squared() {
        let mut rng = sampling::rng_from_seed(11);
        let specs = [
            ns(PExp::Finite(1.0)),
            ns(PExp::Finite(1.5)),
            ns(PExp::Finite(2.0)),
            ns(PExp::Finite(3.0)),
            ns(PExp::Inf),
            NormSpec::diagonal(PExp::Finite(2.5), vec![2.0, 0.5, 1.0, 3.0]).unwrap(),
        ];
        for _ in 0..500 {
            let x = sampling::gaussian(&mut rng, 4);
            for s in &specs {
                let n = weighted_norm(&x, s).unwrap();
                assert_abs_diff_eq!(wp(&x, &x, s).unwrap(), n * n, epsilon = 1e-9 * (1.0 + n * n));
            }
        }
    }

    #[test]
    fn wp_weak_homogeneity_and_cauchy_schwarz() {
        let mut rng = sampling::rng_from_seed(3);
        let r = crate::linalg::Matrix::from_rows(&[vec![4.0, 3.0], vec![3.0, 3.0]]).unwrap();
        let specs = [
            ns(PExp::Finite(1.0)),
            ns(PExp::Finite(2.0)),
            ns(PExp::Inf),
            NormSpec::new(PExp::Finite(3.0), Weight::General(r)).unwrap(),
        ];
        for _ in 0..500 {
            let x = sampling::gaussian(&mut rng, 2);
            let y = sampling::gaussian(&mut rng, 2);
            let a: f64 = rng.gen_range(0.0..3.0);
            for s in &specs {
                let base = wp(&x, &y, s).unwrap();
                let ax: Vec<f64> = x.iter().map(|v| a * v).collect();
                let ay: Vec<f64> = y.iter().map(|v| a * v).collect();
                let tol = 1e-12 * (1.0 + base.abs());
                assert!((wp(&ax, &y, s).unwrap() - a * base).abs() <= tol.max(1e-10));
                assert!((wp(&x, &ay, s).unwrap() - a * base).abs() <= tol.max(1e-10));
                let nx: Vec<f64> = x.iter().map(|v| -v).collect();
                let nyv: Vec<f64> = y.iter().map(|v| -v).collect();
                assert!((wp(&nx, &nyv, s).unwrap() - base).abs() <= tol.max(1e-10));
                // Cauchy-Schwarz.
                let cs = wp(&x, &x, s).unwrap().sqrt() * wp(&y, &y, s).unwrap().sqrt();
                assert!(base.abs() <= cs + 1e-9 * (1.0 + cs));
            }
        }
    }

    #[test]
    fn wp_subadditive_in_first_argument() {
        let mut rng = sampling::rng_from_seed(5);
        for _ in 0..500 {
            let x1 = sampling::gaussian(&mut rng, 3);
            let x2 = sampling::gaussian(&mut rng, 3);
            let y = sampling::gaussian(&mut rng, 3);
            let sum: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| a + b).collect();
            for p in [PExp::Finite(1.0), PExp::Finite(2.0), PExp::Finite(4.0), PExp::Inf] {
                let s = ns(p);
                let lhs = wp(&sum, &y, &s).unwrap();
                let rhs = wp(&x1, &y, &s).unwrap() + wp(&x2, &y, &s).unwrap();
                assert!(lhs <= rhs + 1e-9 * (1.0 + rhs.abs()));
            }
        }
    }

    #[test]
    fn lemma_monotonicity_for_nonnegative_weights() {
        let mut rng = sampling::rng_from_seed(9);
        let r = crate::linalg::Matrix::from_rows(&[vec![4.0, 3.0], vec![3.0, 3.0]]).unwrap();
        let specs = [
            ns(PExp::Finite(1.0)),
            ns(PExp::Finite(2.0)),
            ns(PExp::Inf),
            NormSpec::new(PExp::Finite(2.0), Weight::General(r)).unwrap(),
        ];
        for _ in 0..500 {
            let x: Vec<f64> = (0..2).map(|_| rng.gen_range(0.0..3.0)).collect();
            let y: Vec<f64> = (0..2).map(|_| rng.gen_range(0.0..3.0)).collect();
            let z: Vec<f64> = x.iter().map(|v| v + rng.gen_range(0.0..2.0)).collect();
            let neg_x: Vec<f64> = x.iter().map(|v| -v).collect();
            for s in &specs {
                // wp(-x, y) <= 0 for x, y >= 0.
                assert!(wp(&neg_x, &y, s).unwrap() <= 1e-12);
                // x <= z, y >= 0 implies wp(x, y) <= wp(z, y).
                let a = wp(&x, &y, s).unwrap();
                let b = wp(&z, &y, s).unwrap();
                assert!(a <= b + 1e-9 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn deimling_margins() {
        let h = default_h_schedule(1e-3, 10);
        let mut rng = sampling::rng_from_seed(13);
        // Equality along y itself and along -y.
        for sgn in [1.0, -1.0] {
            let y = vec![1.0, -2.0, 0.5];
            let x: Vec<f64> = y.iter().map(|v| sgn * v).collect();
            let rep = check_deimling(&x, &y, &ns(PExp::Finite(2.0)), &h).unwrap();
            assert!(rep.worst_margin.abs() < 1e-7);
        }
        for _ in 0..200 {
            let x = sampling::gaussian(&mut rng, 3);
            let y = sampling::gaussian(&mut rng, 3);
            let rep = check_deimling(&x, &y, &ns(PExp::Finite(2.0)), &h).unwrap();
            assert!(rep.worst_margin >= -1e-7);
        }
    }
}
