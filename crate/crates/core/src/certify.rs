//! Sampling-based contraction certificates.
//!
//! Each check evaluates one of the equivalent contraction conditions on a
//! finite sample set and returns a `Certificate`: either
//! "certified-at-samples" (no claim of formal verification; seeds and
//! sample counts are recorded for reproducibility) or "refuted" with a
//! concrete witness that reproduces the violation.

use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::linalg::{is_metzler, Vector};
use crate::measures;
use crate::norm::{p_norm, weighted_norm, NormSpec, PExp};
use crate::odesim::{flow, DomainBox, StepControl, Trajectory, VectorField};
use crate::pairings::{max_index_set, wp, TIE_TOL};
use crate::sampling;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CertifiedAtSamples,
    Refuted,
}

/// A concrete violation point: re-evaluating the condition at (t, x[, y])
/// reproduces `value > bound` within 2x the check tolerance.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub t: f64,
    pub x: Vector,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<Vector>,
    pub value: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub condition_id: String,
    /// The claimed rate b (contraction when negative) or -c.
    pub rate: f64,
    pub ns: NormSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainBox>,
    pub samples: usize,
    pub worst_margin: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub seed: u64,
    /// Free-form side information (e.g. cross-check sweeps).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::CertifiedAtSamples
    }
}

/// Shared knobs for the sampling checks.
#[derive(Clone, Debug)]
pub struct CertifyConfig {
    pub seed: u64,
    pub n_samples: usize,
    /// Time window over which time-varying fields are sampled.
    pub t_window: (f64, f64),
    pub t_samples: usize,
    pub step: StepControl,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig {
            seed: 0,
            n_samples: 1000,
            t_window: (0.0, 1.0),
            t_samples: 5,
            step: StepControl::default(),
        }
    }
}

fn margin_tol(scale: f64) -> f64 {
    1e-7 * scale.max(1e-12)
}

/// Margin accumulator: keeps the worst (most negative) margin and the
/// first witness whose margin dips below its tolerance.
struct MarginAcc {
    worst: f64,
    witness: Option<Witness>,
    samples: usize,
}

impl MarginAcc {
    fn new() -> Self {
        MarginAcc { worst: f64::INFINITY, witness: None, samples: 0 }
    }

    fn push(&mut self, margin: f64, tol: f64, make_witness: impl FnOnce() -> Witness) {
        self.samples += 1;
        if margin < self.worst {
            self.worst = margin;
        }
        if margin < -tol && self.witness.is_none() {
            self.witness = Some(make_witness());
        }
    }

    fn finish(self, condition_id: &str, rate: f64, ns: &NormSpec, domain: Option<DomainBox>, seed: u64) -> Certificate {
        let verdict = if self.witness.is_some() { Verdict::Refuted } else { Verdict::CertifiedAtSamples };
        Certificate {
            condition_id: condition_id.to_string(),
            rate,
            ns: ns.clone(),
            domain,
            samples: self.samples,
            worst_margin: if self.worst.is_finite() { self.worst } else { 0.0 },
            verdict,
            witness: self.witness,
            seed,
            notes: None,
        }
    }
}

fn time_grid(cfg: &CertifyConfig) -> Vec<f64> {
    let (t0, t1) = cfg.t_window;
    let k = cfg.t_samples.max(1);
    (0..k).map(|i| t0 + (t1 - t0) * i as f64 / k.max(2).saturating_sub(1) as f64).collect()
}

/// Estimates b_hat = sup over domain x time of mu+(J f(t, x)) and wraps
/// it in a certificate at that rate. With `assert_monotone`, a Jacobian
/// sample with a negative off-diagonal entry refutes instead.
pub fn certify_jacobian_conic(
    vf: &VectorField,
    domain: &DomainBox,
    ns: &NormSpec,
    assert_monotone: bool,
    cfg: &CertifyConfig,
) -> Result<Certificate> {
    let n = vf.dim;
    ns.check_dim(n)?;
    if domain.dim() != n {
        return Err(CoreError::DimensionMismatch { expected: n, got: domain.dim() });
    }
    let mut rng = sampling::rng_from_seed(cfg.seed);
    let mut points: Vec<Vector> = vec![
        domain.lo.clone(),
        domain.hi.clone(),
        domain.lo.iter().zip(&domain.hi).map(|(a, b)| 0.5 * (a + b)).collect(),
    ];
    for _ in 0..cfg.n_samples {
        points.push(sampling::in_box(&mut rng, &domain.lo, &domain.hi));
    }
    let mut b_hat = f64::NEG_INFINITY;
    let mut samples = 0;
    for t in time_grid(cfg) {
        for x in &points {
            let j = vf.jacobian(t, x);
            if assert_monotone && !is_metzler(&j, 1e-9) {
                // Find the offending entry for the witness report.
                let mut val = 0.0;
                'outer: for r in 0..n {
                    for c in 0..n {
                        if r != c && j[(r, c)] < -1e-9 {
                            val = j[(r, c)];
                            break 'outer;
                        }
                    }
                }
                return Ok(Certificate {
                    condition_id: "jacobian-conic-measure".into(),
                    rate: f64::NAN,
                    ns: ns.clone(),
                    domain: Some(domain.clone()),
                    samples,
                    worst_margin: val,
                    verdict: Verdict::Refuted,
                    witness: Some(Witness { t, x: x.clone(), y: None, value: val, bound: 0.0 }),
                    seed: cfg.seed,
                    notes: None,
                });
            }
            b_hat = b_hat.max(measures::conic_measure(&j, ns)?.value);
            samples += 1;
        }
    }
    Ok(Certificate {
        condition_id: "jacobian-conic-measure".into(),
        rate: b_hat,
        ns: ns.clone(),
        domain: Some(domain.clone()),
        samples,
        worst_margin: 0.0,
        verdict: Verdict::CertifiedAtSamples,
        witness: None,
        notes: None,
        seed: cfg.seed,
    })
}

/// Pair sampler for the ordered conditions: random ordered pairs plus
/// axis-aligned offsets (which hit the p = 1 / p = inf extreme
/// directions) and, when given, offsets along a positive ray.
fn ordered_pairs(
    rng: &mut impl rand::Rng,
    domain: &DomainBox,
    n_pairs: usize,
    ray: Option<&[f64]>,
) -> Vec<(Vector, Vector)> {
    let n = domain.dim();
    let mut out = Vec::with_capacity(n_pairs + n + 2);
    for _ in 0..n_pairs {
        out.push(sampling::ordered_pair(rng, &domain.lo, &domain.hi));
    }
    let mid: Vector = domain.lo.iter().zip(&domain.hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let span: Vector = domain.hi.iter().zip(&domain.lo).map(|(h, l)| h - l).collect();
    // Structured offsets: near-axis directions (with a small positive leak
    // into the other coordinates) approach the p = 1 supremum, and the
    // all-coordinates direction approaches the p = inf one.
    for i in 0..n {
        for &eps in &[0.0, 1e-3] {
            let x: Vector = (0..n)
                .map(|k| {
                    let d = if k == i { 0.25 } else { 0.25 * eps };
                    (mid[k] + d * span[k]).min(domain.hi[k])
                })
                .collect();
            if x.iter().zip(&mid).any(|(a, b)| a > b) {
                out.push((x, mid.clone()));
            }
        }
    }
    let x: Vector = (0..n).map(|k| (mid[k] + 0.25 * span[k]).min(domain.hi[k])).collect();
    if x.iter().zip(&mid).any(|(a, b)| a > b) {
        out.push((x, mid.clone()));
    }
    // Small axis/diagonal offsets anchored at several base points (the lo
    // corner and random draws): for state-dependent Jacobians the pairing
    // quotient of a short offset approaches the local measure, so these
    // track the supremum wherever it sits in the box.
    let mut anchors = vec![domain.lo.clone()];
    for _ in 0..6 {
        anchors.push(sampling::in_box(rng, &domain.lo, &domain.hi));
    }
    for base in anchors {
        for i in 0..=n {
            for &eps in &[0.0, 1e-3] {
                let x: Vector = (0..n)
                    .map(|k| {
                        let d = if i == n || k == i { 0.02 } else { 0.02 * eps };
                        (base[k] + d * span[k]).min(domain.hi[k])
                    })
                    .collect();
                if x.iter().zip(&base).any(|(a, b)| a > b) {
                    out.push((x, base.clone()));
                }
            }
        }
    }
    if let Some(eta) = ray {
        let c = 0.25
            * domain
                .hi
                .iter()
                .zip(&domain.lo)
                .zip(eta)
                .map(|((h, l), e)| (h - l) / e.max(1e-12))
                .fold(f64::INFINITY, f64::min);
        if c > 0.0 {
            let x: Vector = mid.iter().zip(eta).map(|(m, e)| m + c * e).collect();
            out.push((x, mid));
        }
    }
    out
}

/// One-sided Lipschitz condition wp(f(t,x) - f(t,y), x - y) <= b ||x-y||^2,
/// over ordered pairs (monotone case) or arbitrary pairs.
pub fn check_one_sided_lipschitz(
    vf: &VectorField,
    ns: &NormSpec,
    b: f64,
    domain: &DomainBox,
    ordered_only: bool,
    cfg: &CertifyConfig,
) -> Result<Certificate> {
    let n = vf.dim;
    ns.check_dim(n)?;
    let mut rng = sampling::rng_from_seed(cfg.seed);
    let pairs: Vec<(Vector, Vector)> = if ordered_only {
        ordered_pairs(&mut rng, domain, cfg.n_samples, None)
    } else {
        (0..cfg.n_samples + n)
            .map(|_| {
                (
                    sampling::in_box(&mut rng, &domain.lo, &domain.hi),
                    sampling::in_box(&mut rng, &domain.lo, &domain.hi),
                )
            })
            .collect()
    };
    let mut acc = MarginAcc::new();
    for t in time_grid(cfg) {
        for (x, y) in &pairs {
            let d: Vector = x.iter().zip(y).map(|(a, b)| a - b).collect();
            let nd = weighted_norm(&d, ns)?;
            if nd == 0.0 {
                continue;
            }
            let df: Vector = vf
                .eval(t, x)
                .iter()
                .zip(vf.eval(t, y))
                .map(|(a, b)| a - b)
                .collect();
            let lhs = wp(&df, &d, ns)?;
            let rhs = b * nd * nd;
            let margin = rhs - lhs;
            acc.push(margin, margin_tol(nd * nd), || Witness {
                t,
                x: x.clone(),
                y: Some(y.clone()),
                value: lhs,
                bound: rhs,
            });
        }
    }
    Ok(acc.finish(
        if ordered_only { "one-sided-lipschitz-ordered" } else { "one-sided-lipschitz" },
        b,
        ns,
        Some(domain.clone()),
        cfg.seed,
    ))
}

/// Norm-equivalence constant for the trajectory condition: 1 for
/// monotonic norms; otherwise (M1^{-1} M2)^2 where
/// M1 ||v|| <= ||v||_inf <= M2 ||v|| over sampled unit directions.
pub fn norm_equivalence_m(ns: &NormSpec, n: usize, seed: u64) -> Result<f64> {
    if ns.is_monotonic() {
        return Ok(1.0);
    }
    let mut rng = sampling::rng_from_seed(seed);
    let mut m1 = f64::INFINITY;
    let mut m2: f64 = 0.0;
    for k in 0..5000 {
        let v = if k < 2 * n {
            let mut e = vec![0.0; n];
            e[k / 2] = if k % 2 == 0 { 1.0 } else { -1.0 };
            e
        } else {
            sampling::gaussian(&mut rng, n)
        };
        let ni = p_norm(&v, PExp::Inf);
        let nw = weighted_norm(&v, ns)?;
        if nw == 0.0 {
            continue;
        }
        m1 = m1.min(ni / nw);
        m2 = m2.max(ni / nw);
    }
    Ok((m2 / m1).powi(2))
}

fn pair_distance_trace(
    vf: &VectorField,
    ns: &NormSpec,
    x0: &[f64],
    y0: &[f64],
    horizon: f64,
    ctrl: &StepControl,
) -> Result<(Vec<f64>, Vec<f64>, Trajectory, Trajectory)> {
    let tx = flow(vf, 0.0, x0, horizon, ctrl)?;
    let ty = flow(vf, 0.0, y0, horizon, ctrl)?;
    // Early grid points expose rate violations near t = 0; uniform tail
    // covers the window.
    let mut grid: Vec<f64> = vec![0.0, 1e-3, 3e-3, 0.01, 0.03, 0.1];
    let k = 60;
    for i in 1..=k {
        grid.push(horizon * i as f64 / k as f64);
    }
    grid.retain(|&t| t <= horizon);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut dist = Vec::with_capacity(grid.len());
    for &t in &grid {
        let a = tx.eval(t);
        let b = ty.eval(t);
        let d: Vector = a.iter().zip(&b).map(|(p, q)| p - q).collect();
        dist.push(weighted_norm(&d, ns)?);
    }
    Ok((grid, dist, tx, ty))
}

/// Trajectory condition: distance(t) <= M e^{b (t-s)} distance(s) for all
/// grid times s <= t along each simulated pair.
pub fn check_trajectory_contraction(
    vf: &VectorField,
    ns: &NormSpec,
    b: f64,
    pairs: &[(Vector, Vector)],
    horizon: f64,
    cfg: &CertifyConfig,
) -> Result<Certificate> {
    let m = norm_equivalence_m(ns, vf.dim, cfg.seed)?;
    let mut acc = MarginAcc::new();
    for (x0, y0) in pairs {
        let (grid, dist, _, _) = pair_distance_trace(vf, ns, x0, y0, horizon, &cfg.step)?;
        for s in 0..grid.len() {
            for t in s..grid.len() {
                let bound = m * (b * (grid[t] - grid[s])).exp() * dist[s];
                let margin = bound * (1.0 + 1e-5) - dist[t];
                acc.push(margin, margin_tol(dist[s]), || Witness {
                    t: grid[t],
                    x: x0.clone(),
                    y: Some(y0.clone()),
                    value: dist[t],
                    bound,
                });
            }
        }
    }
    Ok(acc.finish("trajectory-contraction", b, ns, None, cfg.seed))
}

/// Dini condition: D+ distance(t) <= b distance(t) along each pair,
/// evaluated by a small forward difference on the dense output.
pub fn check_dini_contraction(
    vf: &VectorField,
    ns: &NormSpec,
    b: f64,
    pairs: &[(Vector, Vector)],
    horizon: f64,
    cfg: &CertifyConfig,
) -> Result<Certificate> {
    let mut acc = MarginAcc::new();
    for (x0, y0) in pairs {
        let (grid, dist, tx, ty) = pair_distance_trace(vf, ns, x0, y0, horizon, &cfg.step)?;
        for (i, &t) in grid.iter().enumerate() {
            if t + 1e-5 > horizon {
                continue;
            }
            let h = 1e-6 * (1.0 + t);
            let a = tx.eval(t + h);
            let c = ty.eval(t + h);
            let d: Vector = a.iter().zip(&c).map(|(p, q)| p - q).collect();
            let dini = (weighted_norm(&d, ns)? - dist[i]) / h;
            let margin = b * dist[i] - dini;
            acc.push(margin, 1e-4 * (1.0 + dist[i]) * (1.0 + b.abs()), || Witness {
                t,
                x: x0.clone(),
                y: Some(y0.clone()),
                value: dini,
                bound: b * dist[i],
            });
        }
    }
    Ok(acc.finish("dini-contraction", b, ns, None, cfg.seed))
}

/// Weighted-l1 linear-functional condition. Monotone mode:
/// eta^T (f(t,x) - f(t,y)) <= b eta^T (x - y) over ordered pairs.
/// Positive mode: eta^T f(t,x) <= b eta^T x over x >= 0.
pub fn check_l1_eta(
    vf: &VectorField,
    eta: &[f64],
    b: f64,
    domain: &DomainBox,
    monotone: bool,
    cfg: &CertifyConfig,
) -> Result<Certificate> {
    let n = vf.dim;
    if eta.len() != n {
        return Err(CoreError::DimensionMismatch { expected: n, got: eta.len() });
    }
    if eta.iter().any(|&v| v <= 0.0) {
        return Err(CoreError::Precondition("eta must be positive".into()));
    }
    let ns = NormSpec::diagonal(PExp::Finite(1.0), eta.to_vec())?;
    let mut rng = sampling::rng_from_seed(cfg.seed);
    let mut acc = MarginAcc::new();
    let dot = |v: &[f64]| -> f64 { v.iter().zip(eta).map(|(a, e)| a * e).sum() };
    if monotone {
        let pairs = ordered_pairs(&mut rng, domain, cfg.n_samples, Some(eta));
        for t in time_grid(cfg) {
            for (x, y) in &pairs {
                let d: Vector = x.iter().zip(y).map(|(a, b)| a - b).collect();
                let scale = dot(&d);
                if scale == 0.0 {
                    continue;
                }
                let df: Vector = vf.eval(t, x).iter().zip(vf.eval(t, y)).map(|(a, b)| a - b).collect();
                let margin = b * scale - dot(&df);
                acc.push(margin, margin_tol(scale), || Witness {
                    t,
                    x: x.clone(),
                    y: Some(y.clone()),
                    value: dot(&df),
                    bound: b * scale,
                });
            }
        }
        Ok(acc.finish("l1-eta-ordered", b, &ns, Some(domain.clone()), cfg.seed))
    } else {
        for t in time_grid(cfg) {
            for _ in 0..cfg.n_samples {
                let x = sampling::in_box(&mut rng, &vec![0.0; n], &domain.hi);
                let scale = dot(&x);
                if scale == 0.0 {
                    continue;
                }
                let fx = vf.eval(t, &x);
                let margin = b * scale - dot(&fx);
                acc.push(margin, margin_tol(scale), || Witness {
                    t,
                    x: x.clone(),
                    y: None,
                    value: dot(&fx),
                    bound: b * scale,
                });
            }
        }
        Ok(acc.finish("l1-eta-positive", b, &ns, Some(domain.clone()), cfg.seed))
    }
}

/// Weighted-linf componentwise condition. Monotone mode: for pairs
/// x = y + c eta, c > 0: f(t,x) - f(t,y) <= b (x - y) entrywise.
/// Positive mode: f_i(t,x) <= b x_i on the tolerant max-index set of
/// [eta] x.
pub fn check_linf_eta(
    vf: &VectorField,
    eta: &[f64],
    b: f64,
    domain: &DomainBox,
    monotone: bool,
    cfg: &CertifyConfig,
) -> Result<Certificate> {
    let n = vf.dim;
    if eta.len() != n {
        return Err(CoreError::DimensionMismatch { expected: n, got: eta.len() });
    }
    if eta.iter().any(|&v| v <= 0.0) {
        return Err(CoreError::Precondition("eta must be positive".into()));
    }
    let inv: Vec<f64> = eta.iter().map(|v| 1.0 / v).collect();
    let ns = NormSpec::diagonal(PExp::Inf, inv)?;
    let mut rng = sampling::rng_from_seed(cfg.seed);
    let mut acc = MarginAcc::new();
    if monotone {
        let span = domain
            .hi
            .iter()
            .zip(&domain.lo)
            .zip(eta)
            .map(|((h, l), e)| (h - l) / e)
            .fold(f64::INFINITY, f64::min);
        for t in time_grid(cfg) {
            for _ in 0..cfg.n_samples {
                let y = sampling::in_box(&mut rng, &domain.lo, &domain.hi);
                let head: f64 = y
                    .iter()
                    .zip(&domain.hi)
                    .zip(eta)
                    .map(|((yi, hi), e)| (hi - yi) / e)
                    .fold(span, f64::min);
                if head <= 0.0 {
                    continue;
                }
                let c = rand::Rng::gen_range(&mut rng, 0.0..head);
                if c == 0.0 {
                    continue;
                }
                let x: Vector = y.iter().zip(eta).map(|(yi, e)| yi + c * e).collect();
                let fx = vf.eval(t, &x);
                let fy = vf.eval(t, &y);
                for i in 0..n {
                    let lhs = fx[i] - fy[i];
                    let rhs = b * c * eta[i];
                    acc.push(rhs - lhs, margin_tol(c * eta[i]), || Witness {
                        t,
                        x: x.clone(),
                        y: Some(y.clone()),
                        value: lhs,
                        bound: rhs,
                    });
                }
            }
        }
        Ok(acc.finish("linf-eta-ray", b, &ns, Some(domain.clone()), cfg.seed))
    } else {
        for t in time_grid(cfg) {
            for _ in 0..cfg.n_samples {
                let x = sampling::in_box(&mut rng, &vec![0.0; n], &domain.hi);
                let scaled: Vector = x.iter().zip(eta).map(|(a, e)| a * e).collect();
                let idx = match max_index_set(&scaled, TIE_TOL) {
                    Ok(s) => s.indices,
                    Err(_) => continue, // zero vector
                };
                let fx = vf.eval(t, &x);
                for i in idx {
                    let margin = b * x[i] - fx[i];
                    acc.push(margin, margin_tol(x[i].abs()), || Witness {
                        t,
                        x: x.clone(),
                        y: None,
                        value: fx[i],
                        bound: b * x[i],
                    });
                }
            }
        }
        Ok(acc.finish("linf-eta-positive", b, &ns, Some(domain.clone()), cfg.seed))
    }
}

/// Equilibrium contraction about the origin:
/// wp(f(t,x), x) <= b ||x||^2 over x >= 0, plus the companion trajectory
/// bound ||phi(t)|| <= e^{b (t-s)} ||phi(s)||.
pub fn check_equilibrium_contraction(
    vf: &VectorField,
    ns: &NormSpec,
    b: f64,
    domain: &DomainBox,
    cfg: &CertifyConfig,
) -> Result<Certificate> {
    let n = vf.dim;
    ns.check_dim(n)?;
    let zero = vec![0.0; n];
    for t in time_grid(cfg) {
        let f0 = vf.eval(t, &zero);
        let r = p_norm(&f0, PExp::Finite(2.0));
        if r > 1e-10 {
            return Err(CoreError::Precondition(format!(
                "origin is not an equilibrium: ||f({t}, 0)|| = {r:.3e}; shift coordinates first"
            )));
        }
    }
    let mut rng = sampling::rng_from_seed(cfg.seed);
    let mut acc = MarginAcc::new();
    for t in time_grid(cfg) {
        for k in 0..cfg.n_samples + n {
            let x = if k < n {
                let mut e = vec![0.0; n];
                e[k] = domain.hi[k];
                e
            } else {
                sampling::in_box(&mut rng, &vec![0.0; n], &domain.hi)
            };
            let nx = weighted_norm(&x, ns)?;
            if nx == 0.0 {
                continue;
            }
            let fx = vf.eval(t, &x);
            let lhs = wp(&fx, &x, ns)?;
            let rhs = b * nx * nx;
            acc.push(rhs - lhs, margin_tol(nx * nx), || Witness {
                t,
                x: x.clone(),
                y: None,
                value: lhs,
                bound: rhs,
            });
        }
    }
    // Companion trajectory bound from a few sampled starts.
    let horizon = (cfg.t_window.1 - cfg.t_window.0).max(1.0) * 3.0;
    for _ in 0..3 {
        let x0 = sampling::in_box(&mut rng, &vec![0.0; n], &domain.hi);
        let traj = flow(vf, 0.0, &x0, horizon, &cfg.step)?;
        let norms = traj.norm_trace(ns)?;
        for s in (0..traj.times.len()).step_by(7) {
            for t in (s..traj.times.len()).step_by(7) {
                let bound = (b * (traj.times[t] - traj.times[s])).exp() * norms[s];
                let margin = bound * (1.0 + 1e-5) - norms[t];
                acc.push(margin, margin_tol(norms[s]), || Witness {
                    t: traj.times[t],
                    x: x0.clone(),
                    y: None,
                    value: norms[t],
                    bound,
                });
            }
        }
    }
    Ok(acc.finish("equilibrium-contraction", b, ns, Some(domain.clone()), cfg.seed))
}

/// Factored condition mu+(A(t,x)) <= b over samples, where A is the
/// declared factorization or the average Jacobian about the origin.
pub fn check_factored_conic(
    vf: &VectorField,
    ns: &NormSpec,
    b: f64,
    domain: &DomainBox,
    cfg: &CertifyConfig,
) -> Result<Certificate> {
    let n = vf.dim;
    ns.check_dim(n)?;
    let mut rng = sampling::rng_from_seed(cfg.seed);
    let mut acc = MarginAcc::new();
    for t in time_grid(cfg) {
        for _ in 0..cfg.n_samples.min(200) {
            let x = sampling::in_box(&mut rng, &vec![0.0; n], &domain.hi);
            let a = match vf.factorization(t, &x) {
                Some(a) => {
                    // The declared factorization must reproduce the field.
                    let res = vf.factorization_residual(t, &x).unwrap_or(f64::INFINITY);
                    let scale = p_norm(&x, PExp::Finite(2.0));
                    if res > 1e-6 * (1.0 + scale) {
                        return Err(CoreError::Precondition(format!(
                            "declared factorization residual {res:.3e} at x = {x:?}"
                        )));
                    }
                    a
                }
                None => vf.average_jacobian(t, &x),
            };
            let mu = measures::conic_measure(&a, ns)?.value;
            acc.push(b - mu, 1e-9, || Witness { t, x: x.clone(), y: None, value: mu, bound: b });
        }
    }
    Ok(acc.finish("factored-conic-measure", b, ns, Some(domain.clone()), cfg.seed))
}

/// Convenience: re-evaluate a refuted one-sided-Lipschitz-style witness.
pub fn witness_violation(vf: &VectorField, ns: &NormSpec, b: f64, w: &Witness) -> Result<f64> {
    match &w.y {
        Some(y) => {
            let d: Vector = w.x.iter().zip(y).map(|(a, b)| a - b).collect();
            let nd = weighted_norm(&d, ns)?;
            let df: Vector = vf.eval(w.t, &w.x).iter().zip(vf.eval(w.t, y)).map(|(a, b)| a - b).collect();
            Ok(wp(&df, &d, ns)? - b * nd * nd)
        }
        None => {
            let nx = weighted_norm(&w.x, ns)?;
            Ok(wp(&vf.eval(w.t, &w.x), &w.x, ns)? - b * nx * nx)
        }
    }
}
