use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{config, shape, Result};
use crate::scalarization::{softmax, Preference};

/// Point on the simplex weighting the objectives inside the min-max-max
/// reformulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn uniform(m: usize) -> Self {
        Self(vec![1.0 / m as f64; m])
    }

    /// Accepts any non-negative vector summing to one within `1e-10`.
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() || w.iter().any(|&x| !(x >= 0.0)) {
            return Err(config("weights must be non-negative and non-empty"));
        }
        if (w.iter().sum::<f64>() - 1.0).abs() > 1e-10 {
            return Err(config("weights must sum to one"));
        }
        Ok(Self(w))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for WeightVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

fn check_lengths(w: &WeightVector, pref: &Preference, gap: &[f64]) -> Result<()> {
    if w.len() != pref.len() || gap.len() != pref.len() {
        return Err(shape("weights, preference and gaps must have one entry per objective"));
    }
    Ok(())
}

/// Multiplicative-weights ascent: `w'_i ∝ w_i exp(η λ_i gap_i)`.
pub fn mirror_step_tch(w: &WeightVector, pref: &Preference, gap: &[f64], eta: f64) -> Result<WeightVector> {
    check_lengths(w, pref, gap)?;
    if !(eta >= 0.0) {
        return Err(config(format!("step size must be non-negative, got {eta}")));
    }
    if eta == 0.0 {
        return Ok(w.clone());
    }
    let logits = w
        .iter()
        .zip(pref.lambda())
        .zip(gap)
        .map(|((wi, l), g)| wi.ln() + eta * l * g);
    Ok(WeightVector(softmax(logits)))
}

/// Mix toward uniform, then `w'_i ∝ w̃_i^{1−μη} exp(η λ_i gap_i)`.
pub fn mirror_step_stch(
    w: &WeightVector,
    pref: &Preference,
    gap: &[f64],
    eta: f64,
    mu: f64,
    alpha: f64,
) -> Result<WeightVector> {
    check_lengths(w, pref, gap)?;
    if !(eta >= 0.0) || !(mu >= 0.0) {
        return Err(config("step size and mu must be non-negative"));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(config(format!("mixing weight must lie in [0, 1], got {alpha}")));
    }
    let decay = 1.0 - mu * eta;
    if decay < 0.0 {
        return Err(config(format!("mu * eta = {} exceeds 1", mu * eta)));
    }
    let m = w.len() as f64;
    let mixed: Vec<f64> = w.iter().map(|x| (1.0 - alpha) * x + alpha / m).collect();
    if eta == 0.0 {
        return Ok(WeightVector(mixed));
    }
    let logits = mixed
        .iter()
        .zip(pref.lambda())
        .zip(gap)
        .map(|((wi, l), g)| {
            let prior = if decay == 0.0 { 0.0 } else { decay * wi.ln() };
            prior + eta * l * g
        });
    Ok(WeightVector(softmax(logits)))
}
