//! Evaluation samples, the immutable [`EvalSet`], and the acceptance rule.
//!
//! A sample is accepted at a threshold pair when both of its scores reach
//! their thresholds (`s_ood >= tau_ood && s_id >= tau_id`). Every metric in
//! the crate is built on that rule.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Id,
    Ood,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Id => "id",
            Origin::Ood => "ood",
        }
    }
}

/// Which of the three failure-accounting populations a sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Population {
    IdCorrect,
    IdWrong,
    Ood,
}

impl Population {
    pub fn origin(self) -> Origin {
        match self {
            Population::IdCorrect | Population::IdWrong => Origin::Id,
            Population::Ood => Origin::Ood,
        }
    }

    pub fn correct(self) -> Option<bool> {
        match self {
            Population::IdCorrect => Some(true),
            Population::IdWrong => Some(false),
            Population::Ood => None,
        }
    }

    pub(crate) fn index(self) -> usize {
        match self {
            Population::IdCorrect => 0,
            Population::IdWrong => 1,
            Population::Ood => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub sample_id: String,
    pub origin: Origin,
    /// Present iff `origin` is [`Origin::Id`].
    pub correct: Option<bool>,
    pub scores: IndexMap<String, f64>,
}

impl SampleRecord {
    pub fn id(sample_id: impl Into<String>, correct: bool) -> Self {
        SampleRecord {
            sample_id: sample_id.into(),
            origin: Origin::Id,
            correct: Some(correct),
            scores: IndexMap::new(),
        }
    }

    pub fn ood(sample_id: impl Into<String>) -> Self {
        SampleRecord {
            sample_id: sample_id.into(),
            origin: Origin::Ood,
            correct: None,
            scores: IndexMap::new(),
        }
    }

    pub fn with_score(mut self, channel: impl Into<String>, value: f64) -> Self {
        self.scores.insert(channel.into(), value);
        self
    }
}

/// Immutable, column-oriented collection of evaluation samples.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSet {
    sample_ids: Vec<String>,
    populations: Vec<Population>,
    channel_names: Vec<String>,
    columns: Vec<Vec<f64>>,
    n_id: usize,
    n_ood: usize,
}

impl EvalSet {
    /// Validates `records` and builds the set. Record order is preserved and
    /// channel order follows the first record.
    pub fn from_records(records: Vec<SampleRecord>) -> Result<Self> {
        let first = records.first().ok_or(Error::EmptySet)?;
        let channel_names: Vec<String> = first.scores.keys().cloned().collect();
        let mut columns = vec![Vec::with_capacity(records.len()); channel_names.len()];
        let mut sample_ids = Vec::with_capacity(records.len());
        let mut populations = Vec::with_capacity(records.len());

        for (index, record) in records.into_iter().enumerate() {
            let population = match (record.origin, record.correct) {
                (Origin::Id, Some(true)) => Population::IdCorrect,
                (Origin::Id, Some(false)) => Population::IdWrong,
                (Origin::Id, None) => {
                    return Err(Error::MissingCorrectness {
                        index,
                        sample_id: record.sample_id,
                    })
                }
                (Origin::Ood, None) => Population::Ood,
                (Origin::Ood, Some(_)) => {
                    return Err(Error::UnexpectedCorrectness {
                        index,
                        sample_id: record.sample_id,
                    })
                }
            };
            if record.scores.len() != channel_names.len()
                || !channel_names.iter().all(|c| record.scores.contains_key(c))
            {
                return Err(Error::MixedSchema {
                    index,
                    sample_id: record.sample_id,
                });
            }
            for (column, name) in columns.iter_mut().zip(&channel_names) {
                let value = record.scores[name];
                if !value.is_finite() {
                    return Err(Error::NonFiniteScore {
                        index,
                        sample_id: record.sample_id,
                        channel: name.clone(),
                    });
                }
                column.push(value);
            }
            populations.push(population);
            sample_ids.push(record.sample_id);
        }
        Self::assemble(sample_ids, populations, channel_names, columns)
    }

    /// Builds a set from already column-shaped data.
    pub fn from_columns(
        sample_ids: Vec<String>,
        populations: Vec<Population>,
        channels: Vec<(String, Vec<f64>)>,
    ) -> Result<Self> {
        if populations.is_empty() {
            return Err(Error::EmptySet);
        }
        if sample_ids.len() != populations.len() {
            return Err(Error::InvalidArgument(format!(
                "{} sample ids for {} samples",
                sample_ids.len(),
                populations.len()
            )));
        }
        let mut names = Vec::with_capacity(channels.len());
        let mut columns = Vec::with_capacity(channels.len());
        for (name, column) in channels {
            if names.contains(&name) {
                return Err(Error::InvalidArgument(format!("duplicate channel `{name}`")));
            }
            if column.len() != populations.len() {
                return Err(Error::MixedSchema {
                    index: column.len().min(populations.len()),
                    sample_id: sample_ids
                        .get(column.len().min(populations.len()))
                        .cloned()
                        .unwrap_or_default(),
                });
            }
            if let Some(index) = column.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteScore {
                    index,
                    sample_id: sample_ids[index].clone(),
                    channel: name,
                });
            }
            names.push(name);
            columns.push(column);
        }
        Self::assemble(sample_ids, populations, names, columns)
    }

    fn assemble(
        sample_ids: Vec<String>,
        populations: Vec<Population>,
        channel_names: Vec<String>,
        columns: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n_ood = populations.iter().filter(|p| **p == Population::Ood).count();
        let n_id = populations.len() - n_ood;
        if n_id == 0 {
            return Err(Error::EmptyIdPopulation);
        }
        Ok(EvalSet {
            sample_ids,
            populations,
            channel_names,
            columns,
            n_id,
            n_ood,
        })
    }

    pub fn len(&self) -> usize {
        self.populations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.populations.is_empty()
    }

    pub fn n_id(&self) -> usize {
        self.n_id
    }

    pub fn n_ood(&self) -> usize {
        self.n_ood
    }

    /// Number of misclassified ID samples.
    pub fn id_errors(&self) -> usize {
        self.populations
            .iter()
            .filter(|p| **p == Population::IdWrong)
            .count()
    }

    pub fn id_accuracy(&self) -> f64 {
        (self.n_id - self.id_errors()) as f64 / self.n_id as f64
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn populations(&self) -> &[Population] {
        &self.populations
    }

    pub fn channel(&self, name: &str) -> Result<&[f64]> {
        self.channel_names
            .iter()
            .position(|c| c == name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| Error::UnknownChannel(name.to_string()))
    }

    /// Scores of one channel split into (ID, OOD) lists.
    pub fn split_channel(&self, name: &str) -> Result<(Vec<f64>, Vec<f64>)> {
        let column = self.channel(name)?;
        let mut id = Vec::with_capacity(self.n_id);
        let mut ood = Vec::with_capacity(self.n_ood);
        for (&value, population) in column.iter().zip(&self.populations) {
            match population.origin() {
                Origin::Id => id.push(value),
                Origin::Ood => ood.push(value),
            }
        }
        Ok((id, ood))
    }

    /// The accept-all threshold of a channel: its minimum minus one.
    pub fn sentinel(&self, name: &str) -> Result<f64> {
        Ok(sentinel_below(self.channel(name)?))
    }

    pub fn record(&self, index: usize) -> SampleRecord {
        let population = self.populations[index];
        SampleRecord {
            sample_id: self.sample_ids[index].clone(),
            origin: population.origin(),
            correct: population.correct(),
            scores: self
                .channel_names
                .iter()
                .zip(&self.columns)
                .map(|(name, column)| (name.clone(), column[index]))
                .collect(),
        }
    }

    pub fn records(&self) -> impl Iterator<Item = SampleRecord> + '_ {
        (0..self.len()).map(|i| self.record(i))
    }

    /// Returns a copy with an extra (or replaced) channel.
    pub fn with_channel(&self, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        let mut channels: Vec<(String, Vec<f64>)> = self
            .channel_names
            .iter()
            .cloned()
            .zip(self.columns.iter().cloned())
            .filter(|(c, _)| *c != name)
            .collect();
        channels.push((name, values));
        Self::from_columns(self.sample_ids.clone(), self.populations.clone(), channels)
    }

    /// Returns a copy with records reordered by `order` (a permutation of indices).
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.len() {
            return Err(Error::InvalidArgument("permutation length mismatch".into()));
        }
        let sample_ids = order.iter().map(|&i| self.sample_ids[i].clone()).collect();
        let populations = order.iter().map(|&i| self.populations[i]).collect();
        let channels = self
            .channel_names
            .iter()
            .zip(&self.columns)
            .map(|(name, column)| (name.clone(), order.iter().map(|&i| column[i]).collect()))
            .collect();
        Self::from_columns(sample_ids, populations, channels)
    }
}

pub(crate) fn sentinel_below(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::INFINITY, f64::min) - 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPair {
    pub tau_id: f64,
    pub tau_ood: f64,
}

impl ThresholdPair {
    pub fn new(tau_id: f64, tau_ood: f64) -> Self {
        ThresholdPair { tau_id, tau_ood }
    }

    /// Sentinel thresholds on both channels.
    pub fn accept_all(set: &EvalSet, ch_id: &str, ch_ood: &str) -> Result<Self> {
        Ok(ThresholdPair {
            tau_id: set.sentinel(ch_id)?,
            tau_ood: set.sentinel(ch_ood)?,
        })
    }
}

/// Indices of samples with `s_ood >= tau_ood` and `s_id >= tau_id`.
pub fn acceptance_set(
    set: &EvalSet,
    ch_id: &str,
    ch_ood: &str,
    pair: ThresholdPair,
) -> Result<Vec<usize>> {
    let s_id = set.channel(ch_id)?;
    let s_ood = set.channel(ch_ood)?;
    Ok(s_id
        .iter()
        .zip(s_ood)
        .enumerate()
        .filter(|(_, (&a, &b))| a >= pair.tau_id && b >= pair.tau_ood)
        .map(|(i, _)| i)
        .collect())
}
