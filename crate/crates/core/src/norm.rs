//! Weighted p-norm specifications.
//!
//! A [`NormSpec`] is an exponent `p` in `[1, inf]` (infinity is a distinct
//! enum variant, never a large float) together with a weight: identity, a
//! positive diagonal, or a general nonnegative invertible matrix.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::linalg::{ensure_finite, is_nonnegative, Matrix};

/// Condition-number threshold for accepting a general weight matrix.
pub const COND_LIMIT: f64 = 1e12;

/// Norm exponent in `[1, inf]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PExp {
    Finite(f64),
    Inf,
}

impl Serialize for PExp {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PExp::Finite(p) => s.serialize_f64(*p),
            PExp::Inf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for PExp {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Ok(PExp::Finite(p)),
            Raw::Str(s) if s == "inf" || s == "infinity" => Ok(PExp::Inf),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("invalid exponent {s:?}"))),
        }
    }
}

impl PExp {
    pub fn validate(self) -> Result<()> {
        match self {
            PExp::Finite(p) if p.is_finite() && p >= 1.0 => Ok(()),
            PExp::Inf => Ok(()),
            PExp::Finite(p) => Err(CoreError::InvalidNormSpec(format!("p = {p} is not in [1, inf]"))),
        }
    }

    pub fn is_inf(self) -> bool {
        matches!(self, PExp::Inf)
    }
}

impl std::fmt::Display for PExp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PExp::Finite(p) => write!(f, "{p}"),
            PExp::Inf => write!(f, "inf"),
        }
    }
}

/// The conjugate exponent q with 1/p + 1/q = 1 (convention 1/inf = 0).
pub fn conjugate_exponent(p: PExp) -> PExp {
    match p {
        PExp::Inf => PExp::Finite(1.0),
        PExp::Finite(p) if p == 1.0 => PExp::Inf,
        PExp::Finite(p) => PExp::Finite(p / (p - 1.0)),
    }
}

/// Weight matrix of a weighted p-norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Weight {
    #[serde(rename = "identity")]
    Identity,
    #[serde(rename = "diag")]
    Diagonal(Vec<f64>),
    #[serde(rename = "general")]
    General(Matrix),
}

/// A weighted p-norm ||x||_{p,W} = ||Wx||_p.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormSpec {
    pub p: PExp,
    pub weight: Weight,
    #[serde(skip)]
    weight_inv: Option<Matrix>,
}

impl<'de> Deserialize<'de> for NormSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            p: PExp,
            weight: Weight,
        }
        let raw = Raw::deserialize(d)?;
        NormSpec::new(raw.p, raw.weight).map_err(serde::de::Error::custom)
    }
}

impl NormSpec {
    pub fn new(p: PExp, weight: Weight) -> Result<Self> {
        p.validate()?;
        let weight_inv = match &weight {
            Weight::Identity => None,
            Weight::Diagonal(d) => {
                if d.is_empty() {
                    return Err(CoreError::InvalidNormSpec("empty diagonal weight".into()));
                }
                ensure_finite(d, "diagonal weight")?;
                if d.iter().any(|&v| v <= 0.0) {
                    return Err(CoreError::InvalidNormSpec(
                        "diagonal weight entries must be strictly positive".into(),
                    ));
                }
                None
            }
            Weight::General(r) => {
                if !r.is_square() {
                    return Err(CoreError::InvalidNormSpec("general weight must be square".into()));
                }
                if !is_nonnegative(r, 0.0) {
                    return Err(CoreError::InvalidNormSpec(
                        "general weight must be entrywise nonnegative".into(),
                    ));
                }
                let inv = r.inverse().map_err(|_| CoreError::Singular { cond: f64::INFINITY })?;
                let cond = r.inf_norm() * inv.inf_norm();
                if !cond.is_finite() || cond > COND_LIMIT {
                    return Err(CoreError::Singular { cond });
                }
                Some(inv)
            }
        };
        Ok(NormSpec { p, weight, weight_inv })
    }

    pub fn identity(p: PExp) -> Self {
        NormSpec::new(p, Weight::Identity).unwrap()
    }

    pub fn diagonal(p: PExp, eta: Vec<f64>) -> Result<Self> {
        NormSpec::new(p, Weight::Diagonal(eta))
    }

    /// Dimension constraint imposed by the weight, if any.
    pub fn dim(&self) -> Option<usize> {
        match &self.weight {
            Weight::Identity => None,
            Weight::Diagonal(d) => Some(d.len()),
            Weight::General(r) => Some(r.nrows()),
        }
    }

    pub fn check_dim(&self, n: usize) -> Result<()> {
        match self.dim() {
            Some(d) if d != n => Err(CoreError::DimensionMismatch { expected: d, got: n }),
            _ => Ok(()),
        }
    }

    /// A norm is monotonic (|x| <= |y| implies ||x|| <= ||y||) exactly when
    /// the weight is identity or positive diagonal.
    pub fn is_monotonic(&self) -> bool {
        !matches!(self.weight, Weight::General(_))
    }

    /// Wx for the weight matrix W.
    pub fn apply_weight(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x.len())?;
        match &self.weight {
            Weight::Identity => Ok(x.to_vec()),
            Weight::Diagonal(d) => Ok(d.iter().zip(x).map(|(w, v)| w * v).collect()),
            Weight::General(r) => r.matvec(x),
        }
    }

    /// W A W^{-1}, the similarity transform used by measure formulas.
    pub fn similarity(&self, a: &Matrix) -> Result<Matrix> {
        if let Some(d) = self.dim() {
            if d != a.nrows() {
                return Err(CoreError::DimensionMismatch { expected: d, got: a.nrows() });
            }
        }
        match &self.weight {
            Weight::Identity => Ok(a.clone()),
            Weight::Diagonal(eta) => Ok(Matrix::from_fn(a.nrows(), a.ncols(), |i, j| {
                a[(i, j)] * eta[i] / eta[j]
            })),
            Weight::General(r) => r.matmul(a)?.matmul(self.weight_inv.as_ref().unwrap()),
        }
    }

    /// Same exponent, identity weight.
    pub fn unweighted(&self) -> NormSpec {
        NormSpec::identity(self.p)
    }
}

/// ||Wx||_p for the given spec. Zero exactly for x = 0.
pub fn weighted_norm(x: &[f64], ns: &NormSpec) -> Result<f64> {
    ensure_finite(x, "weighted_norm input")?;
    let wx = ns.apply_weight(x)?;
    Ok(p_norm(&wx, ns.p))
}

/// Unweighted p-norm of a raw slice.
pub fn p_norm(x: &[f64], p: PExp) -> f64 {
    match p {
        PExp::Inf => x.iter().fold(0.0, |m, v| m.max(v.abs())),
        PExp::Finite(p) if p == 1.0 => x.iter().map(|v| v.abs()).sum(),
        PExp::Finite(p) if p == 2.0 => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
        PExp::Finite(p) => {
            // Scale by the max to avoid overflow in the power sum.
            let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if m == 0.0 {
                return 0.0;
            }
            m * x.iter().map(|v| (v.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
        }
    }
}
