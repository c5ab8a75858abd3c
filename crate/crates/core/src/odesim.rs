//! Trajectory integration (Dormand-Prince 4/5 with PI step control and
//! cubic-Hermite dense output) plus empirical structural checks:
//! order preservation, positivity, and the conic Coppel bound.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::linalg::{ensure_finite, is_metzler, Matrix, Vector};
use crate::measures;
use crate::norm::{weighted_norm, NormSpec};

/// Axis-aligned box used as a sampling/trust domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl DomainBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(CoreError::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(CoreError::Precondition("box with lo > hi".into()));
        }
        Ok(DomainBox { lo, hi })
    }

    pub fn unit(n: usize) -> Self {
        DomainBox { lo: vec![0.0; n], hi: vec![1.0; n] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (lo, hi))| *v >= lo - 1e-12 && *v <= hi + 1e-12)
    }
}

type DynFn<T> = Arc<dyn Fn(f64, &[f64]) -> T + Send + Sync>;

/// Time-varying dynamics f(t, x) with optional analytic Jacobian and
/// optional conic factorization f(t, x) = A(t, x) x.
#[derive(Clone)]
pub struct VectorField {
    pub dim: usize,
    rhs: DynFn<Vector>,
    jacobian: Option<DynFn<Matrix>>,
    factorization: Option<DynFn<Matrix>>,
    pub invariant_box: Option<DomainBox>,
}

impl VectorField {
    pub fn new(dim: usize, rhs: impl Fn(f64, &[f64]) -> Vector + Send + Sync + 'static) -> Self {
        VectorField { dim, rhs: Arc::new(rhs), jacobian: None, factorization: None, invariant_box: None }
    }

    pub fn with_jacobian(
        mut self,
        jac: impl Fn(f64, &[f64]) -> Matrix + Send + Sync + 'static,
    ) -> Self {
        self.jacobian = Some(Arc::new(jac));
        self
    }

    pub fn with_factorization(
        mut self,
        a: impl Fn(f64, &[f64]) -> Matrix + Send + Sync + 'static,
    ) -> Self {
        self.factorization = Some(Arc::new(a));
        self
    }

    pub fn with_invariant_box(mut self, b: DomainBox) -> Self {
        self.invariant_box = Some(b);
        self
    }

    /// Autonomous linear field f(x) = Ax with exact Jacobian and trivial
    /// factorization.
    pub fn linear(a: Matrix) -> Self {
        assert!(a.is_square());
        let dim = a.nrows();
        let a1 = a.clone();
        let a2 = a.clone();
        let a3 = a;
        VectorField {
            dim,
            rhs: Arc::new(move |_t, x| a1.matvec(x).expect("dimension checked")),
            jacobian: Some(Arc::new(move |_t, _x| a2.clone())),
            factorization: Some(Arc::new(move |_t, _x| a3.clone())),
            invariant_box: None,
        }
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> Vector {
        (self.rhs)(t, x)
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn has_factorization(&self) -> bool {
        self.factorization.is_some()
    }

    /// Analytic Jacobian when supplied, otherwise central finite
    /// differences with step 1e-6 * (1 + |x_i|).
    pub fn jacobian(&self, t: f64, x: &[f64]) -> Matrix {
        if let Some(j) = &self.jacobian {
            return j(t, x);
        }
        let n = self.dim;
        let mut out = Matrix::zeros(n, n);
        for j in 0..n {
            let h = 1e-6 * (1.0 + x[j].abs());
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[j] += h;
            xm[j] -= h;
            let fp = self.eval(t, &xp);
            let fm = self.eval(t, &xm);
            for i in 0..n {
                out[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        out
    }

    /// The declared factorization A(t, x), if present.
    pub fn factorization(&self, t: f64, x: &[f64]) -> Option<Matrix> {
        self.factorization.as_ref().map(|a| a(t, x))
    }

    /// Average Jacobian about the origin, int_0^1 J(t, tau x) dtau, by
    /// 16-point Gauss-Legendre quadrature. Always satisfies
    /// f(t, x) - f(t, 0) = A(t, x) x for differentiable f.
    pub fn average_jacobian(&self, t: f64, x: &[f64]) -> Matrix {
        let mut acc = Matrix::zeros(self.dim, self.dim);
        for (&node, &w) in GL16_NODES.iter().zip(GL16_WEIGHTS.iter()) {
            let tau = 0.5 * (node + 1.0);
            let xt: Vec<f64> = x.iter().map(|v| tau * v).collect();
            acc = acc.add(&self.jacobian(t, &xt).scale(0.5 * w)).unwrap();
        }
        acc
    }

    /// Residual ||f(t,x) - A(t,x) x|| of a declared factorization.
    pub fn factorization_residual(&self, t: f64, x: &[f64]) -> Option<f64> {
        let a = self.factorization(t, x)?;
        let ax = a.matvec(x).ok()?;
        let f = self.eval(t, x);
        Some(
            f.iter()
                .zip(&ax)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
        )
    }
}

const GL16_NODES: [f64; 16] = [
    -0.9894009349916499, -0.9445750230732326, -0.8656312023878318, -0.7554044083550030,
    -0.6178762444026438, -0.4580167776572274, -0.2816035507792589, -0.0950125098376374,
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
    0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499,
];
const GL16_WEIGHTS: [f64; 16] = [
    0.0271524594117541, 0.0622535239386479, 0.0951585116824928, 0.1246289712555339,
    0.1495959888165767, 0.1691565193950025, 0.1826034150449236, 0.1894506104550685,
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541,
];

/// Adaptive step-size control parameters.
#[derive(Clone, Debug)]
pub struct StepControl {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl { abs_tol: 1e-9, rel_tol: 1e-8, h_init: 1e-3, h_max: 1.0, max_steps: 4_000_000 }
    }
}

/// Accepted integration nodes with stored derivatives; dense output by
/// cubic Hermite interpolation between nodes.
#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vector>,
    pub derivs: Vec<Vector>,
}

impl Trajectory {
    pub fn end_state(&self) -> &[f64] {
        self.states.last().expect("nonempty trajectory")
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("nonempty trajectory")
    }

    /// Dense evaluation at time t (clamped to the trajectory span).
    pub fn eval(&self, t: f64) -> Vector {
        let n = self.times.len();
        if t <= self.times[0] {
            return self.states[0].clone();
        }
        if t >= self.times[n - 1] {
            return self.states[n - 1].clone();
        }
        let k = match self.times.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => return self.states[i].clone(),
            Err(i) => i - 1,
        };
        let h = self.times[k + 1] - self.times[k];
        let s = (t - self.times[k]) / h;
        let (h00, h10, h01, h11) = hermite_basis(s);
        (0..self.states[k].len())
            .map(|i| {
                h00 * self.states[k][i]
                    + h10 * h * self.derivs[k][i]
                    + h01 * self.states[k + 1][i]
                    + h11 * h * self.derivs[k + 1][i]
            })
            .collect()
    }

    /// Norm of the state at every accepted node.
    pub fn norm_trace(&self, ns: &NormSpec) -> Result<Vec<f64>> {
        self.states.iter().map(|x| weighted_norm(x, ns)).collect()
    }
}

fn hermite_basis(s: f64) -> (f64, f64, f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    (
        2.0 * s3 - 3.0 * s2 + 1.0,
        s3 - 2.0 * s2 + s,
        -2.0 * s3 + 3.0 * s2,
        s3 - s2,
    )
}

// Dormand-Prince 5(4) coefficients.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [
    35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0,
    187.0 / 2100.0, 1.0 / 40.0,
];

/// Integrates the flow of `vf` from (t0, x0) to t1.
pub fn flow(vf: &VectorField, t0: f64, x0: &[f64], t1: f64, ctrl: &StepControl) -> Result<Trajectory> {
    flow_fn(vf.dim, |t, x| vf.eval(t, x), t0, x0, t1, ctrl)
}

/// Same integrator for a plain closure (no `'static` bound).
pub fn flow_fn(
    dim: usize,
    rhs: impl Fn(f64, &[f64]) -> Vector,
    t0: f64,
    x0: &[f64],
    t1: f64,
    ctrl: &StepControl,
) -> Result<Trajectory> {
    if t1 < t0 {
        return Err(CoreError::Precondition("flow requires t1 >= t0".into()));
    }
    ensure_finite(x0, "initial state")?;
    if x0.len() != dim {
        return Err(CoreError::DimensionMismatch { expected: dim, got: x0.len() });
    }
    let mut t = t0;
    let mut x = x0.to_vec();
    let mut f = rhs(t, &x);
    let mut traj = Trajectory {
        times: vec![t],
        states: vec![x.clone()],
        derivs: vec![f.clone()],
    };
    if t1 == t0 {
        return Ok(traj);
    }
    let mut h = ctrl.h_init.min(t1 - t0).min(ctrl.h_max);
    let mut err_prev: f64 = 1.0;
    let n = dim;
    for _step in 0..ctrl.max_steps {
        if t >= t1 {
            return Ok(traj);
        }
        h = h.min(t1 - t);
        if h < 1e-14 * (1.0 + t.abs()) {
            return Err(CoreError::IntegrationFailure {
                t,
                reason: format!("step underflow; last valid state {:?}", x),
            });
        }
        let mut k: Vec<Vector> = Vec::with_capacity(7);
        k.push(f.clone()); // FSAL: k1 = f(t, x)
        for i in 1..7 {
            let mut xi = x.clone();
            for (j, kj) in k.iter().enumerate() {
                let a = A[i][j.min(5)];
                if j < 6 && a != 0.0 {
                    for d in 0..n {
                        xi[d] += h * a * kj[d];
                    }
                }
            }
            k.push(rhs(t + C[i] * h, &xi));
        }
        let mut x5 = x.clone();
        let mut x4 = x.clone();
        for (j, kj) in k.iter().enumerate() {
            for d in 0..n {
                x5[d] += h * B5[j] * kj[d];
                x4[d] += h * B4[j] * kj[d];
            }
        }
        if x5.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::IntegrationFailure {
                t,
                reason: format!("state blew up; last valid state {:?}", x),
            });
        }
        let mut err_sq = 0.0;
        for d in 0..n {
            let sc = ctrl.abs_tol + ctrl.rel_tol * x[d].abs().max(x5[d].abs());
            let e = (x5[d] - x4[d]) / sc;
            err_sq += e * e;
        }
        let err = (err_sq / n as f64).sqrt().max(1e-16);
        if err <= 1.0 {
            t += h;
            x = x5;
            // FSAL: k7 is f at the new point.
            f = k[6].clone();
            traj.times.push(t);
            traj.states.push(x.clone());
            traj.derivs.push(f.clone());
            let fac = 0.9 * err.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
            h = (h * fac.clamp(0.2, 5.0)).min(ctrl.h_max);
            err_prev = err;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
    }
    Err(CoreError::IntegrationFailure { t, reason: "max step count exceeded".into() })
}

/// Order-preservation report: minimum entrywise gap between the flows of an
/// ordered pair of initial conditions.
#[derive(Clone, Debug, Serialize)]
pub struct OrderReport {
    pub min_margin: f64,
    pub t_at_min: f64,
}

pub fn check_order_preservation(
    vf: &VectorField,
    x0: &[f64],
    y0: &[f64],
    t0: f64,
    horizon: f64,
    ctrl: &StepControl,
) -> Result<OrderReport> {
    if x0.iter().zip(y0).any(|(a, b)| a > b) {
        return Err(CoreError::Precondition("check_order_preservation requires x0 <= y0".into()));
    }
    let tx = flow(vf, t0, x0, t0 + horizon, ctrl)?;
    let ty = flow(vf, t0, y0, t0 + horizon, ctrl)?;
    let mut min_margin = f64::INFINITY;
    let mut t_at_min = t0;
    for (idx, &t) in tx.times.iter().enumerate() {
        let yu = ty.eval(t);
        for d in 0..vf.dim {
            let m = yu[d] - tx.states[idx][d];
            if m < min_margin {
                min_margin = m;
                t_at_min = t;
            }
        }
    }
    Ok(OrderReport { min_margin, t_at_min })
}

/// Positivity report: worst boundary inflow f_i(t, x) at sampled points
/// with x_i = 0, and the minimum state entry along simulations from random
/// nonnegative initial conditions.
#[derive(Clone, Debug, Serialize)]
pub struct PositivityReport {
    pub min_boundary_inflow: f64,
    pub min_state_entry: f64,
    pub boundary_samples: usize,
}

pub fn check_positivity(
    vf: &VectorField,
    seed: u64,
    horizon: f64,
    ctrl: &StepControl,
) -> Result<PositivityReport> {
    use crate::sampling;
    use rand::Rng;
    let n = vf.dim;
    let bounds = vf
        .invariant_box
        .clone()
        .unwrap_or_else(|| DomainBox::unit(n));
    let mut rng = sampling::rng_from_seed(seed);
    let per_face = if n <= 10 { 100 } else { (1000 / n).max(10) };
    let mut min_inflow = f64::INFINITY;
    let mut samples = 0;
    for i in 0..n {
        for _ in 0..per_face {
            let mut x = sampling::in_box(&mut rng, &vec![0.0; n], &bounds.hi);
            x[i] = 0.0;
            let t = rng.gen_range(0.0..horizon.max(1e-12));
            let fx = vf.eval(t, &x);
            min_inflow = min_inflow.min(fx[i]);
            samples += 1;
        }
    }
    let mut min_entry = f64::INFINITY;
    for _ in 0..5 {
        let x0 = sampling::in_box(&mut rng, &vec![0.0; n], &bounds.hi);
        let traj = flow(vf, 0.0, &x0, horizon, ctrl)?;
        for s in &traj.states {
            for &v in s {
                min_entry = min_entry.min(v);
            }
        }
    }
    Ok(PositivityReport {
        min_boundary_inflow: min_inflow,
        min_state_entry: min_entry,
        boundary_samples: samples,
    })
}

/// Conic Coppel bound report for the LTV system xdot = A(t) x.
#[derive(Clone, Debug, Serialize)]
pub struct CoppelReport {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub bounds: Vec<f64>,
    /// max over the grid of ||x(t)|| / bound(t); the bound holds when this
    /// stays below 1 + 1e-6.
    pub max_ratio: f64,
    pub ok: bool,
}

pub fn coppel_check(
    afun: &(dyn Fn(f64) -> Matrix + Sync),
    x0: &[f64],
    ns: &NormSpec,
    horizon: f64,
    ctrl: &StepControl,
) -> Result<CoppelReport> {
    let n = x0.len();
    if x0.iter().any(|&v| v < 0.0) {
        return Err(CoreError::Precondition("coppel_check requires x0 >= 0".into()));
    }
    // Hypothesis check on a fixed t grid before integrating.
    for k in 0..=50 {
        let t = horizon * k as f64 / 50.0;
        let a = afun(t);
        if !is_metzler(&a, 1e-12) {
            for i in 0..n {
                for j in 0..n {
                    if i != j && a[(i, j)] < -1e-12 {
                        return Err(CoreError::NotMetzler { row: i, col: j, value: a[(i, j)] });
                    }
                }
            }
        }
    }
    let af = |t: f64, x: &[f64]| afun(t).matvec(x).expect("dimension checked");
    let traj = flow_fn(n, af, 0.0, x0, horizon, ctrl)?;
    let n0 = weighted_norm(x0, ns)?;
    let mut mu_vals = Vec::with_capacity(traj.times.len());
    for &t in &traj.times {
        mu_vals.push(measures::conic_measure(&afun(t), ns)?.value);
    }
    let mut bounds = Vec::with_capacity(traj.times.len());
    let mut integral = 0.0;
    for k in 0..traj.times.len() {
        if k > 0 {
            let dt = traj.times[k] - traj.times[k - 1];
            integral += 0.5 * dt * (mu_vals[k] + mu_vals[k - 1]);
        }
        bounds.push(integral.exp() * n0);
    }
    let norms = traj.norm_trace(ns)?;
    let mut max_ratio = 0.0f64;
    for (nk, bk) in norms.iter().zip(&bounds) {
        if *bk > 0.0 {
            max_ratio = max_ratio.max(nk / bk);
        } else if *nk > 0.0 {
            max_ratio = f64::INFINITY;
        }
    }
    if n0 == 0.0 {
        max_ratio = 0.0; // 0 <= 0 at every point
    }
    Ok(CoppelReport {
        times: traj.times,
        norms,
        bounds,
        max_ratio,
        ok: max_ratio <= 1.0 + 1e-6,
    })
}
