//! Coverage binning and risk-coverage integration shared by AURC and DS-AURC.
//!
//! `[0, 1]` is split into `k` equal bins; bin `b` holds coverages in
//! `[b/k, (b+1)/k)`, with coverage 1 folded into the last bin. Each bin keeps
//! the minimum risk of the points that land in it. Empty bins between two
//! filled ones are linearly interpolated by bin index, empty bins at either
//! end copy the nearest filled value, and the area is the left-Riemann sum
//! `sum(risk_b) / k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_K_BINS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskCoveragePoint {
    pub coverage: f64,
    pub risk: f64,
    pub threshold: f64,
}

#[inline]
pub fn coverage_bin(coverage: f64, k_bins: usize) -> usize {
    ((coverage * k_bins as f64) as usize).min(k_bins - 1)
}

/// Running per-bin minimum.
#[derive(Debug, Clone)]
pub struct BinAccumulator {
    mins: Vec<f64>,
}

impl BinAccumulator {
    pub fn new(k_bins: usize) -> Result<Self> {
        if k_bins == 0 {
            return Err(Error::InvalidArgument("k_bins must be at least 1".into()));
        }
        Ok(BinAccumulator {
            mins: vec![f64::INFINITY; k_bins],
        })
    }

    pub fn k_bins(&self) -> usize {
        self.mins.len()
    }

    #[inline]
    pub fn push(&mut self, coverage: f64, risk: f64) {
        let bin = coverage_bin(coverage, self.mins.len());
        if risk < self.mins[bin] {
            self.mins[bin] = risk;
        }
    }

    /// Folds another accumulator over the same bins into this one.
    pub fn merge(&mut self, other: &BinAccumulator) {
        for (a, &b) in self.mins.iter_mut().zip(&other.mins) {
            if b < *a {
                *a = b;
            }
        }
    }

    pub fn finish(self) -> Result<BinnedCurve> {
        BinnedCurve::from_mins(self.mins)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedCurve {
    k_bins: usize,
    risk: Vec<f64>,
    filled: Vec<bool>,
}

impl BinnedCurve {
    pub fn from_points(points: impl IntoIterator<Item = (f64, f64)>, k_bins: usize) -> Result<Self> {
        let mut acc = BinAccumulator::new(k_bins)?;
        for (coverage, risk) in points {
            acc.push(coverage, risk);
        }
        acc.finish()
    }

    fn from_mins(mut risk: Vec<f64>) -> Result<Self> {
        let filled: Vec<bool> = risk.iter().map(|r| r.is_finite()).collect();
        let anchors: Vec<usize> = (0..risk.len()).filter(|&b| filled[b]).collect();
        let (&first, &last) = match (anchors.first(), anchors.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(Error::NoPoints),
        };
        for b in 0..first {
            risk[b] = risk[first];
        }
        for b in last + 1..risk.len() {
            risk[b] = risk[last];
        }
        for w in anchors.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let span = (hi - lo) as f64;
            for b in lo + 1..hi {
                let t = (b - lo) as f64 / span;
                risk[b] = risk[lo] + (risk[hi] - risk[lo]) * t;
            }
        }
        Ok(BinnedCurve {
            k_bins: risk.len(),
            risk,
            filled,
        })
    }

    pub fn k_bins(&self) -> usize {
        self.k_bins
    }

    /// Per-bin risk after filling.
    pub fn risk(&self) -> &[f64] {
        &self.risk
    }

    /// Which bins received at least one point.
    pub fn filled(&self) -> &[bool] {
        &self.filled
    }

    /// `[lo, hi)` coverage edges of a bin.
    pub fn edges(&self, bin: usize) -> (f64, f64) {
        let k = self.k_bins as f64;
        (bin as f64 / k, (bin + 1) as f64 / k)
    }

    pub fn area(&self) -> f64 {
        self.risk.iter().sum::<f64>() / self.k_bins as f64
    }
}

/// Area under a binned risk-coverage curve.
pub fn aurc(points: &[RiskCoveragePoint], k_bins: usize) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::NoPoints);
    }
    Ok(BinnedCurve::from_points(points.iter().map(|p| (p.coverage, p.risk)), k_bins)?.area())
}
