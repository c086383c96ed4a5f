//! Candidate thresholds per score channel.
//!
//! Each axis is a strictly increasing list of thresholds. When an axis
//! carries a sentinel it is the first entry, sitting one unit below the
//! channel minimum, so the accept-all operating point is always reachable.

use serde::{Deserialize, Serialize};

use crate::dataset::{sentinel_below, EvalSet};
use crate::error::{Error, Result};

pub const DEFAULT_T_GRID: usize = 512;

/// How thresholds are drawn from a channel's empirical scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "t_grid")]
pub enum GridSpec {
    /// Every distinct empirical value.
    Exhaustive,
    /// `t` equally spaced nearest-rank quantiles.
    Quantile(usize),
}

impl GridSpec {
    /// `0` selects the exhaustive grid.
    pub fn from_count(t_grid: usize) -> Self {
        if t_grid == 0 {
            GridSpec::Exhaustive
        } else {
            GridSpec::Quantile(t_grid)
        }
    }

    pub fn axis(self, scores: &[f64], include_sentinel: bool) -> Result<ThresholdAxis> {
        let thresholds = match self {
            GridSpec::Exhaustive => exhaustive_grid(scores, include_sentinel)?,
            GridSpec::Quantile(t) => quantile_grid(scores, t, include_sentinel)?,
        };
        Ok(ThresholdAxis {
            thresholds,
            has_sentinel: include_sentinel,
        })
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Quantile(DEFAULT_T_GRID)
    }
}

/// Nearest-rank quantile thresholds: for `k = 1..=t_grid` the value of rank
/// `ceil(k * n / t_grid)` in the sorted scores, deduplicated. When `t_grid`
/// reaches the number of distinct values the result is every distinct value.
pub fn quantile_grid(scores: &[f64], t_grid: usize, include_sentinel: bool) -> Result<Vec<f64>> {
    if t_grid == 0 {
        return Err(Error::EmptyGrid("threshold"));
    }
    let sorted = sorted_finite(scores)?;
    let mut distinct = sorted.clone();
    distinct.dedup();
    let mut out = Vec::with_capacity(t_grid.min(distinct.len()) + 1);
    if include_sentinel {
        out.push(sentinel_below(&sorted));
    }
    if t_grid >= distinct.len() {
        out.extend(distinct);
        return Ok(out);
    }
    let n = sorted.len();
    let start = out.len();
    for k in 1..=t_grid {
        let rank = (k * n).div_ceil(t_grid);
        let value = sorted[rank - 1];
        if out.len() == start || *out.last().unwrap() < value {
            out.push(value);
        }
    }
    Ok(out)
}

/// Every distinct value, ascending, optionally preceded by the sentinel.
pub fn exhaustive_grid(scores: &[f64], include_sentinel: bool) -> Result<Vec<f64>> {
    let mut sorted = sorted_finite(scores)?;
    let sentinel = sentinel_below(&sorted);
    sorted.dedup();
    if include_sentinel {
        sorted.insert(0, sentinel);
    }
    Ok(sorted)
}

fn sorted_finite(scores: &[f64]) -> Result<Vec<f64>> {
    if scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidArgument("scores must be finite".into()));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdAxis {
    thresholds: Vec<f64>,
    has_sentinel: bool,
}

impl ThresholdAxis {
    /// `thresholds` must be finite, strictly increasing and non-empty. When
    /// `has_sentinel` is set the first entry is treated as accept-all.
    pub fn new(thresholds: Vec<f64>, has_sentinel: bool) -> Result<Self> {
        Self::checked(thresholds, has_sentinel, "threshold")
    }

    fn checked(thresholds: Vec<f64>, has_sentinel: bool, axis: &'static str) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(Error::EmptyGrid(axis));
        }
        let ordered = thresholds.iter().all(|t| t.is_finite())
            && thresholds.windows(2).all(|w| w[0] < w[1]);
        if !ordered {
            return Err(Error::UnsortedGrid(axis));
        }
        Ok(ThresholdAxis {
            thresholds,
            has_sentinel,
        })
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    pub fn has_sentinel(&self) -> bool {
        self.has_sentinel
    }

    pub fn is_sentinel(&self, index: usize) -> bool {
        self.has_sentinel && index == 0
    }

    /// Index of the largest threshold `<= score`; a score is accepted at
    /// threshold `t` iff its bucket is `>= t`. `None` when the score sits
    /// below every threshold.
    pub fn bucket(&self, score: f64) -> Option<usize> {
        self.thresholds
            .partition_point(|&t| t <= score)
            .checked_sub(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdGrid {
    pub id: ThresholdAxis,
    pub ood: ThresholdAxis,
}

impl ThresholdGrid {
    pub fn new(id: ThresholdAxis, ood: ThresholdAxis) -> Self {
        ThresholdGrid { id, ood }
    }

    /// Explicit thresholds with no sentinel on either axis.
    pub fn from_thresholds(id: Vec<f64>, ood: Vec<f64>) -> Result<Self> {
        Ok(ThresholdGrid {
            id: ThresholdAxis::checked(id, false, "id")?,
            ood: ThresholdAxis::checked(ood, false, "ood")?,
        })
    }

    pub fn build(
        set: &EvalSet,
        ch_id: &str,
        ch_ood: &str,
        spec: GridSpec,
        sentinels: bool,
    ) -> Result<Self> {
        Ok(ThresholdGrid {
            id: spec.axis(set.channel(ch_id)?, sentinels)?,
            ood: spec.axis(set.channel(ch_ood)?, sentinels)?,
        })
    }

    /// All distinct empirical values plus sentinels on both axes.
    pub fn exhaustive(set: &EvalSet, ch_id: &str, ch_ood: &str) -> Result<Self> {
        Self::build(set, ch_id, ch_ood, GridSpec::Exhaustive, true)
    }

    pub fn pairs(&self) -> usize {
        self.id.len() * self.ood.len()
    }
}
