//! Linear, Tchebycheff and smooth Tchebycheff scalarizations of a value vector.
//!
//! Tchebycheff-type scalarizations are minimized; they measure the
//! preference-weighted shortfall of `v` from the per-objective optima
//! `v_star` plus a small regularizer `iota`.

use serde::{Deserialize, Serialize};

use crate::error::{config, domain, shape, MorlError, Result};
use crate::momdp::ValueVector;

/// Default regularizer added to every objective's gap.
pub const DEFAULT_IOTA: f64 = 1e-3;

const SIMPLEX_TOL: f64 = 1e-12;

/// A preference vector `λ` on the probability simplex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Preference {
    lambda: Vec<f64>,
    interior: bool,
}

impl Preference {
    pub fn new(lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(shape("preference needs at least one entry"));
        }
        if lambda.iter().any(|&l| !(l >= 0.0)) {
            return Err(domain(format!("preference {lambda:?} has negative entries")));
        }
        let total: f64 = lambda.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(domain(format!("preference {lambda:?} sums to {total}, not 1")));
        }
        let interior = lambda.iter().all(|&l| l > 0.0);
        Ok(Self { lambda, interior })
    }

    /// Normalizes non-negative weights onto the simplex.
    pub fn normalized(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(domain("preference weights must have positive sum"));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(m: usize) -> Self {
        Self {
            lambda: vec![1.0 / m as f64; m],
            interior: true,
        }
    }

    pub fn one_hot(m: usize, i: usize) -> Self {
        let mut lambda = vec![0.0; m];
        lambda[i] = 1.0;
        Self {
            lambda,
            interior: m == 1,
        }
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// True when every entry is strictly positive.
    pub fn is_interior(&self) -> bool {
        self.interior
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }
}

impl TryFrom<Vec<f64>> for Preference {
    type Error = MorlError;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Preference> for Vec<f64> {
    fn from(p: Preference) -> Self {
        p.lambda
    }
}

/// Reference point and smoothing parameters shared by a family of evaluations.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarizationContext {
    v_star: ValueVector,
    iota: f64,
    mu: Option<f64>,
}

impl ScalarizationContext {
    pub fn new(v_star: ValueVector, iota: f64, mu: Option<f64>) -> Result<Self> {
        if !(iota > 0.0) {
            return Err(config(format!("iota must be positive, got {iota}")));
        }
        if let Some(mu) = mu {
            if !(mu > 0.0) {
                return Err(config(format!("mu must be positive, got {mu}")));
            }
        }
        Ok(Self { v_star, iota, mu })
    }

    pub fn v_star(&self) -> &ValueVector {
        &self.v_star
    }

    pub fn iota(&self) -> f64 {
        self.iota
    }

    pub fn mu(&self) -> Option<f64> {
        self.mu
    }

    fn require_mu(&self) -> Result<f64> {
        self.mu
            .ok_or_else(|| config("smooth Tchebycheff needs a smoothing parameter mu"))
    }

    /// The gaps `v_star_i + iota - v_i`, all required to be non-negative.
    pub fn gaps(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.v_star.len() {
            return Err(shape(format!(
                "value has {} objectives, reference has {}",
                v.len(),
                self.v_star.len()
            )));
        }
        let gaps: Vec<f64> = self
            .v_star
            .iter()
            .zip(v)
            .map(|(star, x)| star + self.iota - x)
            .collect();
        if let Some(i) = gaps.iter().position(|&g| g < 0.0) {
            return Err(domain(format!(
                "objective {i} value {} exceeds reference {} plus iota",
                v[i], self.v_star[i]
            )));
        }
        Ok(gaps)
    }

    fn weighted_gaps(&self, pref: &Preference, v: &[f64]) -> Result<Vec<f64>> {
        if pref.len() != self.v_star.len() {
            return Err(shape("preference length differs from the number of objectives"));
        }
        Ok(self
            .gaps(v)?
            .iter()
            .zip(pref.lambda())
            .map(|(g, l)| l * g)
            .collect())
    }
}

/// `λᵀ v`.
pub fn linear(pref: &Preference, v: &[f64]) -> Result<f64> {
    if pref.len() != v.len() {
        return Err(shape("preference and value lengths differ"));
    }
    Ok(pref.lambda().iter().zip(v).map(|(l, x)| l * x).sum())
}

/// `max_i λ_i (v_star_i + ι − v_i)`.
pub fn tch(pref: &Preference, ctx: &ScalarizationContext, v: &[f64]) -> Result<f64> {
    Ok(tch_via_weights(pref, ctx, v)?.0)
}

/// `μ log Σ_i exp(λ_i (v_star_i + ι − v_i) / μ)`, evaluated with a max shift.
pub fn stch(pref: &Preference, ctx: &ScalarizationContext, v: &[f64]) -> Result<f64> {
    let mu = ctx.require_mu()?;
    let z = ctx.weighted_gaps(pref, v)?;
    Ok(log_sum_exp(&z, mu))
}

/// `μ log Σ exp(z_i / μ)`; never below `max z` and never above `max z + μ log m`.
pub(crate) fn log_sum_exp(z: &[f64], mu: f64) -> f64 {
    let top = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = z.iter().map(|x| ((x - top) / mu).exp()).sum();
    top + mu * sum.ln()
}

/// Tchebycheff value as a maximum over the simplex: returns the largest
/// weighted gap and the one-hot maximizer, ties going to the lowest index.
pub fn tch_via_weights(
    pref: &Preference,
    ctx: &ScalarizationContext,
    v: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let z = ctx.weighted_gaps(pref, v)?;
    let mut best = 0;
    for (i, &x) in z.iter().enumerate() {
        if x > z[best] {
            best = i;
        }
    }
    let mut w = vec![0.0; z.len()];
    w[best] = 1.0;
    Ok((z[best], w))
}

/// Maximizer of `Σ w_i λ_i gap_i − μ Σ w_i log w_i` over the simplex:
/// the softmax of the weighted gaps at temperature `μ`.
pub fn stch_optimal_weights(pref: &Preference, ctx: &ScalarizationContext, v: &[f64]) -> Result<Vec<f64>> {
    let mu = ctx.require_mu()?;
    let z = ctx.weighted_gaps(pref, v)?;
    Ok(softmax(z.iter().map(|x| x / mu)))
}

/// `Σ w_i λ_i gap_i − μ Σ w_i log w_i`, with `0 log 0 = 0`.
pub fn stch_regularized_objective(
    w: &[f64],
    pref: &Preference,
    ctx: &ScalarizationContext,
    v: &[f64],
) -> Result<f64> {
    let mu = ctx.require_mu()?;
    let z = ctx.weighted_gaps(pref, v)?;
    if w.len() != z.len() {
        return Err(shape("weight vector length differs from the number of objectives"));
    }
    let linear: f64 = w.iter().zip(&z).map(|(a, b)| a * b).sum();
    let entropy: f64 = w.iter().filter(|&&x| x > 0.0).map(|x| -x * x.ln()).sum();
    Ok(linear + mu * entropy)
}

/// Normalized exponentials of the given logits.
pub(crate) fn softmax(logits: impl Iterator<Item = f64>) -> Vec<f64> {
    let logits: Vec<f64> = logits.collect();
    let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|x| (x - top).exp()).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|x| x / total).collect()
}

/// The preference under which `v` has equal weighted gaps on every
/// objective: `λ_i ∝ 1 / (v_star_i + ι − v_i)`.
pub fn canonical_preference(v_star: &[f64], v: &[f64], iota: f64) -> Result<Preference> {
    if v_star.len() != v.len() {
        return Err(shape("reference and value lengths differ"));
    }
    if !(iota > 0.0) {
        return Err(config(format!("iota must be positive, got {iota}")));
    }
    let mut recip = Vec::with_capacity(v.len());
    for (i, (star, x)) in v_star.iter().zip(v).enumerate() {
        let gap = star + iota - x;
        if !(gap > 0.0) {
            return Err(domain(format!("objective {i} has non-positive gap {gap}")));
        }
        recip.push(1.0 / gap);
    }
    Preference::normalized(&recip)
}
