//! Scores computed from a logit vector: MSP, max-logit, energy, negative
//! entropy and KL matching to class templates.

use crate::error::{Error, Result};

/// Probability floor applied before any logarithm of a probability.
pub const PROB_EPS: f64 = 1e-12;

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Maximum softmax probability.
pub fn msp(logits: &[f64]) -> f64 {
    softmax(logits).into_iter().fold(0.0, f64::max)
}

pub fn max_logit(logits: &[f64]) -> f64 {
    logits.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// `T * log(sum_k exp(z_k / T))`.
pub fn energy(logits: &[f64], temperature: f64) -> Result<f64> {
    if temperature.is_nan() || temperature <= 0.0 {
        return Err(Error::NonPositiveTemperature(temperature));
    }
    let scaled_max = max_logit(logits) / temperature;
    let sum: f64 = logits
        .iter()
        .map(|&z| (z / temperature - scaled_max).exp())
        .sum();
    Ok(temperature * (scaled_max + sum.ln()))
}

/// `sum_k p_k log p_k` of the softmax, with `0 log 0 = 0`.
pub fn neg_entropy(logits: &[f64]) -> f64 {
    softmax(logits)
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| p * p.ln())
        .sum()
}

/// Clamps to `[PROB_EPS, 1]` and renormalizes.
pub fn clamp_probs(probs: &[f64]) -> Vec<f64> {
    let clamped: Vec<f64> = probs.iter().map(|p| p.clamp(PROB_EPS, 1.0)).collect();
    let total: f64 = clamped.iter().sum();
    clamped.into_iter().map(|p| p / total).collect()
}

fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(&a, &b)| a * (a / b).ln()).sum()
}

/// Mean (clamped) softmax vector of the fit samples predicted into each class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassTemplates {
    templates: Vec<Vec<f64>>,
}

impl ClassTemplates {
    pub fn new(templates: Vec<Vec<f64>>) -> Result<Self> {
        let width = templates.first().map(Vec::len).unwrap_or(0);
        if width == 0 || templates.iter().any(|t| t.len() != width) {
            return Err(Error::InvalidArgument("templates must share a non-zero width".into()));
        }
        Ok(ClassTemplates {
            templates: templates.iter().map(|t| clamp_probs(t)).collect(),
        })
    }

    pub fn templates(&self) -> &[Vec<f64>] {
        &self.templates
    }
}

pub fn fit_class_templates(probs: &[Vec<f64>], predictions: &[usize]) -> Result<ClassTemplates> {
    let classes = probs.first().map(Vec::len).ok_or(Error::EmptyScores)?;
    if predictions.len() != probs.len() {
        return Err(Error::InvalidArgument("one prediction per probability vector".into()));
    }
    let mut sums = vec![vec![0.0; classes]; classes];
    let mut counts = vec![0usize; classes];
    for (p, &k) in probs.iter().zip(predictions) {
        if p.len() != classes || k >= classes {
            return Err(Error::InvalidArgument("inconsistent class count".into()));
        }
        for (s, v) in sums[k].iter_mut().zip(clamp_probs(p)) {
            *s += v;
        }
        counts[k] += 1;
    }
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyClassTemplate(empty));
    }
    let templates = sums
        .into_iter()
        .zip(counts)
        .map(|(s, c)| s.into_iter().map(|v| v / c as f64).collect())
        .collect();
    ClassTemplates::new(templates)
}

/// `-min_k KL(p || template_k)`.
pub fn klm(probs: &[f64], templates: &ClassTemplates) -> f64 {
    let p = clamp_probs(probs);
    -templates
        .templates
        .iter()
        .map(|t| kl(&p, t))
        .fold(f64::INFINITY, f64::min)
}
