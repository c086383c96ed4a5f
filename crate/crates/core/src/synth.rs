//! Seeded synthetic evaluation sets.
//!
//! Three populations (ID-correct, ID-misclassified, OOD) each draw their
//! `(s_id, s_ood)` score pair from a bivariate Gaussian. Draw order is
//! correct, then wrong, then OOD, from a single ChaCha stream seeded by
//! `seed`, so a config reproduces the same set bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::{EvalSet, Population};
use crate::error::{Error, Result};

pub const ID_CHANNEL: &str = "s_id";
pub const OOD_CHANNEL: &str = "s_ood";

/// Bivariate Gaussian over `(s_id, s_ood)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian2 {
    pub mean: [f64; 2],
    pub std: [f64; 2],
    pub corr: f64,
}

impl Gaussian2 {
    pub fn new(mean: [f64; 2], std: [f64; 2], corr: f64) -> Self {
        Gaussian2 { mean, std, corr }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !self.mean.iter().all(|m| m.is_finite()) {
            return Err(Error::InvalidConfig(format!("{name}: means must be finite")));
        }
        if !self.std.iter().all(|s| s.is_finite() && *s > 0.0) {
            return Err(Error::InvalidConfig(format!("{name}: stds must be positive")));
        }
        if !(self.corr > -1.0 && self.corr < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "{name}: correlation must lie in (-1, 1)"
            )));
        }
        Ok(())
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        let z1: f64 = StandardNormal.sample(rng);
        let z2: f64 = StandardNormal.sample(rng);
        let a = self.mean[0] + self.std[0] * z1;
        let b = self.mean[1]
            + self.std[1] * (self.corr * z1 + (1.0 - self.corr * self.corr).sqrt() * z2);
        (a, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// OOD overlaps ID-correct on `s_ood`.
    Near,
    /// OOD sits 6 standard deviations below ID on `s_ood`.
    Far,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_id: usize,
    pub n_ood: usize,
    pub id_accuracy: f64,
    pub correct: Gaussian2,
    pub wrong: Gaussian2,
    pub ood: Gaussian2,
    pub seed: u64,
}

impl SynthConfig {
    // ID-correct sits high on s_id, misclassified ID low; both share s_ood.
    // OOD is overconfident on s_id, so s_id alone cannot reject it.
    const CORRECT: Gaussian2 = Gaussian2 {
        mean: [1.5, 0.0],
        std: [1.0, 1.0],
        corr: 0.2,
    };
    const WRONG: Gaussian2 = Gaussian2 {
        mean: [-0.5, 0.0],
        std: [1.0, 1.0],
        corr: 0.2,
    };

    pub fn far(n_id: usize, n_ood: usize, id_accuracy: f64, seed: u64) -> Self {
        SynthConfig {
            n_id,
            n_ood,
            id_accuracy,
            correct: Self::CORRECT,
            wrong: Self::WRONG,
            ood: Gaussian2::new([1.0, -6.0], [1.0, 1.0], 0.0),
            seed,
        }
    }

    pub fn near(n_id: usize, n_ood: usize, id_accuracy: f64, seed: u64) -> Self {
        SynthConfig {
            ood: Gaussian2::new([1.0, -0.25], [1.0, 1.0], 0.0),
            ..Self::far(n_id, n_ood, id_accuracy, seed)
        }
    }

    pub fn preset(preset: Preset, n_id: usize, n_ood: usize, id_accuracy: f64, seed: u64) -> Result<Self> {
        match preset {
            Preset::Near => Ok(Self::near(n_id, n_ood, id_accuracy, seed)),
            Preset::Far => Ok(Self::far(n_id, n_ood, id_accuracy, seed)),
            Preset::Custom => Err(Error::InvalidConfig(
                "the custom preset needs an explicit config".into(),
            )),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_id == 0 {
            return Err(Error::InvalidConfig("n_id must be at least 1".into()));
        }
        if !(self.id_accuracy > 0.0 && self.id_accuracy <= 1.0) {
            return Err(Error::InvalidConfig("id_accuracy must lie in (0, 1]".into()));
        }
        self.correct.validate("correct")?;
        self.wrong.validate("wrong")?;
        self.ood.validate("ood")
    }

    pub fn n_correct(&self) -> usize {
        ((self.n_id as f64 * self.id_accuracy).round() as usize).min(self.n_id)
    }
}

pub fn generate(config: &SynthConfig) -> Result<EvalSet> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n_correct = config.n_correct();
    let plan = [
        (Population::IdCorrect, n_correct, &config.correct, "id"),
        (Population::IdWrong, config.n_id - n_correct, &config.wrong, "id"),
        (Population::Ood, config.n_ood, &config.ood, "ood"),
    ];
    let total = config.n_id + config.n_ood;
    let mut sample_ids = Vec::with_capacity(total);
    let mut populations = Vec::with_capacity(total);
    let mut s_id = Vec::with_capacity(total);
    let mut s_ood = Vec::with_capacity(total);
    let mut counters = [0usize; 2];
    for (population, count, dist, prefix) in plan {
        for _ in 0..count {
            let (a, b) = dist.sample(&mut rng);
            let counter = &mut counters[usize::from(prefix == "ood")];
            sample_ids.push(format!("{prefix}-{counter:06}"));
            *counter += 1;
            populations.push(population);
            s_id.push(a);
            s_ood.push(b);
        }
    }
    EvalSet::from_columns(
        sample_ids,
        populations,
        vec![(ID_CHANNEL.into(), s_id), (OOD_CHANNEL.into(), s_ood)],
    )
}
