//! Scores that combine a logit-based and a feature-based signal: VIM and
//! SIRC.

use crate::error::{Error, Result};

use super::feature::{residual_norm, residual_score, PrincipalBasis};
use super::logit::{energy, max_logit};

/// Upper bound on the SIRC exponent so `exp` stays finite.
const MAX_EXPONENT: f64 = 700.0;

/// `energy(z) + alpha * residual_score(f)`.
pub fn vim(logits: &[f64], feature: &[f64], basis: &PrincipalBasis, alpha: f64) -> Result<f64> {
    Ok(energy(logits, 1.0)? + alpha * residual_score(feature, basis)?)
}

/// Mean max-logit over mean residual norm on the fit set.
pub fn fit_vim_alpha(logits: &[Vec<f64>], features: &[Vec<f64>], basis: &PrincipalBasis) -> Result<f64> {
    if logits.is_empty() || logits.len() != features.len() {
        return Err(Error::InvalidArgument(
            "VIM needs aligned, non-empty fit logits and features".into(),
        ));
    }
    let n = logits.len() as f64;
    let mean_logit = logits.iter().map(|z| max_logit(z)).sum::<f64>() / n;
    let mut mean_residual = 0.0;
    for f in features {
        mean_residual += residual_norm(f, basis)?;
    }
    mean_residual /= n;
    let alpha = mean_logit / mean_residual;
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "VIM scale must be positive and finite, got {alpha}"
        )));
    }
    Ok(alpha)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SircParams {
    pub a: f64,
    pub b: f64,
}

/// `a = mean - 3 std`, `b = 1 / std` of the secondary score on the fit set
/// (population standard deviation).
pub fn fit_sirc_params(secondary: &[f64]) -> Result<SircParams> {
    if secondary.is_empty() {
        return Err(Error::EmptyScores);
    }
    let n = secondary.len() as f64;
    let mean = secondary.iter().sum::<f64>() / n;
    let var = secondary.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if !(std > 0.0 && std.is_finite()) {
        return Err(Error::DegenerateSpread);
    }
    Ok(SircParams {
        a: mean - 3.0 * std,
        b: 1.0 / std,
    })
}

/// `-(s1_max - s1) * (1 + exp(-b (s2 - a)))`.
pub fn sirc_combine(s1: f64, s1_max: f64, s2: f64, params: SircParams) -> f64 {
    let exponent = (-params.b * (s2 - params.a)).min(MAX_EXPONENT);
    -(s1_max - s1) * (1.0 + exponent.exp())
}
