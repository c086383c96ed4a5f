//! Brute-force reference implementations.
//!
//! Nothing here reuses the grid, sweep or binning code: every pair of
//! distinct empirical values (plus the accept-all sentinel) is enumerated and
//! every sample rescanned. Used to cross-check the fast paths and behind the
//! CLI's hidden `--oracle` flag.

use crate::dataset::{EvalSet, Population, ThresholdPair};
use crate::error::{Error, Result};

pub const DEFAULT_CAP: usize = 500;

fn check_cap(set: &EvalSet, cap: usize) -> Result<()> {
    if set.len() > cap {
        return Err(Error::CapExceeded {
            cap,
            len: set.len(),
        });
    }
    Ok(())
}

/// Sentinel first, then every distinct value ascending.
fn candidate_thresholds(values: &[f64]) -> Vec<f64> {
    let mut lowest = values[0];
    for &v in values {
        if v < lowest {
            lowest = v;
        }
    }
    let mut out = vec![lowest - 1.0];
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for v in sorted {
        if *out.last().unwrap() != v {
            out.push(v);
        }
    }
    out
}

/// `(true accepts, accepted ID, accepted OOD)` at one pair by direct scan.
pub fn oracle_counts(
    set: &EvalSet,
    ch_id: &str,
    ch_ood: &str,
    pair: ThresholdPair,
) -> Result<(u64, u64, u64)> {
    let s_id = set.channel(ch_id)?;
    let s_ood = set.channel(ch_ood)?;
    let (mut ta, mut acc_id, mut acc_ood) = (0, 0, 0);
    for i in 0..set.len() {
        if !(s_id[i] >= pair.tau_id && s_ood[i] >= pair.tau_ood) {
            continue;
        }
        match set.populations()[i] {
            Population::IdCorrect => {
                ta += 1;
                acc_id += 1;
            }
            Population::IdWrong => acc_id += 1,
            Population::Ood => acc_ood += 1,
        }
    }
    Ok((ta, acc_id, acc_ood))
}

pub fn oracle_ds_f1(set: &EvalSet, ch_id: &str, ch_ood: &str) -> Result<(f64, ThresholdPair)> {
    oracle_ds_f1_capped(set, ch_id, ch_ood, DEFAULT_CAP)
}

/// Exact maximum F1 over all empirical threshold pairs; ties resolved to the
/// smallest `(tau_ood, tau_id)`.
pub fn oracle_ds_f1_capped(
    set: &EvalSet,
    ch_id: &str,
    ch_ood: &str,
    cap: usize,
) -> Result<(f64, ThresholdPair)> {
    check_cap(set, cap)?;
    let id_candidates = candidate_thresholds(set.channel(ch_id)?);
    let ood_candidates = candidate_thresholds(set.channel(ch_ood)?);
    let n_id = set.n_id() as u64;
    // F1 = 2 ta / (accepted + n_id); candidates are ranked on that exact
    // fraction so rounding in the reported value cannot break ties.
    let mut best: Option<(u64, u64, ThresholdPair)> = None;
    for &tau_ood in &ood_candidates {
        for &tau_id in &id_candidates {
            let pair = ThresholdPair::new(tau_id, tau_ood);
            let (ta, acc_id, acc_ood) = oracle_counts(set, ch_id, ch_ood, pair)?;
            let (num, den) = (2 * ta, acc_id + acc_ood + n_id);
            let better = match best {
                None => true,
                Some((b_num, b_den, _)) => num as u128 * b_den as u128 > b_num as u128 * den as u128,
            };
            if better {
                best = Some((num, den, pair));
            }
        }
    }
    let (ta2, _, pair) = best.expect("the sentinel pair is always a candidate");
    let (ta, acc_id, acc_ood) = oracle_counts(set, ch_id, ch_ood, pair)?;
    debug_assert_eq!(ta2, 2 * ta);
    let accepted = (acc_id + acc_ood) as f64;
    let f1 = if ta == 0 {
        0.0
    } else {
        let precision = ta as f64 / accepted;
        let recall = ta as f64 / n_id as f64;
        2.0 * precision * recall / (precision + recall)
    };
    Ok((f1, pair))
}

pub fn oracle_ds_aurc(set: &EvalSet, ch_id: &str, ch_ood: &str, k_bins: usize) -> Result<f64> {
    oracle_ds_aurc_capped(set, ch_id, ch_ood, k_bins, DEFAULT_CAP)
}

/// Exhaustive pair enumeration, per-bin minimum risk, nearest-neighbour
/// linear fill of empty bins, left-Riemann integral.
pub fn oracle_ds_aurc_capped(
    set: &EvalSet,
    ch_id: &str,
    ch_ood: &str,
    k_bins: usize,
    cap: usize,
) -> Result<f64> {
    check_cap(set, cap)?;
    if k_bins == 0 {
        return Err(Error::InvalidArgument("k_bins must be at least 1".into()));
    }
    let id_candidates = candidate_thresholds(set.channel(ch_id)?);
    let ood_candidates = candidate_thresholds(set.channel(ch_ood)?);
    let n_id = set.n_id() as f64;
    let mut bins: Vec<Option<f64>> = vec![None; k_bins];
    for &tau_ood in &ood_candidates {
        for &tau_id in &id_candidates {
            let (ta, acc_id, acc_ood) =
                oracle_counts(set, ch_id, ch_ood, ThresholdPair::new(tau_id, tau_ood))?;
            let accepted = acc_id + acc_ood;
            let risk = if accepted == 0 {
                0.0
            } else {
                (acc_id - ta + acc_ood) as f64 / accepted as f64
            };
            let coverage = acc_id as f64 / n_id;
            let mut b = (coverage * k_bins as f64).floor() as usize;
            if b >= k_bins {
                b = k_bins - 1;
            }
            bins[b] = Some(match bins[b] {
                Some(r) if r <= risk => r,
                _ => risk,
            });
        }
    }
    let mut total = 0.0;
    for b in 0..k_bins {
        let value = match bins[b] {
            Some(r) => r,
            None => {
                let left = (0..b).rev().find_map(|l| bins[l].map(|r| (l, r)));
                let right = (b + 1..k_bins).find_map(|h| bins[h].map(|r| (h, r)));
                match (left, right) {
                    (Some((l, rl)), Some((h, rh))) => {
                        rl + (rh - rl) * ((b - l) as f64 / (h - l) as f64)
                    }
                    (Some((_, r)), None) | (None, Some((_, r))) => r,
                    (None, None) => unreachable!("the sentinel pair always lands in a bin"),
                }
            }
        };
        total += value;
    }
    Ok(total / k_bins as f64)
}

/// `O(n m)` pairwise comparison with half credit for ties.
pub fn oracle_auroc(id: &[f64], ood: &[f64]) -> Result<f64> {
    if id.is_empty() {
        return Err(Error::EmptySide("id"));
    }
    if ood.is_empty() {
        return Err(Error::EmptySide("ood"));
    }
    let mut credit = 0.0;
    for &a in id {
        for &b in ood {
            if a > b {
                credit += 1.0;
            } else if a == b {
                credit += 0.5;
            }
        }
    }
    Ok(credit / (id.len() as f64 * ood.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::SampleRecord;
    use crate::fixtures;

    #[test]
    fn fixture_ds_f1() {
        let set = fixtures::five_sample();
        let (value, pair) = oracle_ds_f1(&set, "s_id", "s_ood").unwrap();
        approx::assert_abs_diff_eq!(value, 0.8, epsilon = 1e-15);
        assert_eq!(pair, ThresholdPair::new(0.8, 0.1));
    }

    #[test]
    fn single_correct_sample() {
        let set = EvalSet::from_records(vec![SampleRecord::id("a", true)
            .with_score("s", 0.4)
            .with_score("t", 0.1)])
        .unwrap();
        assert_eq!(oracle_ds_f1(&set, "s", "t").unwrap().0, 1.0);
        assert_eq!(oracle_ds_aurc(&set, "s", "t", 5).unwrap(), 0.0);
    }

    #[test]
    fn all_correct_no_ood_has_zero_area() {
        let records = (0..6)
            .map(|i| {
                SampleRecord::id(i.to_string(), true)
                    .with_score("s", i as f64)
                    .with_score("t", (6 - i) as f64)
            })
            .collect();
        let set = EvalSet::from_records(records).unwrap();
        assert_eq!(oracle_ds_aurc(&set, "s", "t", 10).unwrap(), 0.0);
    }

    #[test]
    fn constant_channels_give_one_point() {
        let records = vec![
            SampleRecord::id("a", true).with_score("s", 1.0).with_score("t", 2.0),
            SampleRecord::id("b", false).with_score("s", 1.0).with_score("t", 2.0),
            SampleRecord::ood("c").with_score("s", 1.0).with_score("t", 2.0),
        ];
        let set = EvalSet::from_records(records).unwrap();
        // only the accept-all point exists: coverage 1, risk 2/3
        approx::assert_abs_diff_eq!(oracle_ds_aurc(&set, "s", "t", 4).unwrap(), 2.0 / 3.0);
    }

    #[test]
    fn auroc_extremes() {
        assert_eq!(oracle_auroc(&[3.0, 4.0], &[1.0, 2.0]).unwrap(), 1.0);
        assert_eq!(oracle_auroc(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 0.0);
        assert_eq!(oracle_auroc(&[1.0, 1.0], &[1.0]).unwrap(), 0.5);
    }

    #[test]
    fn cap_is_enforced() {
        let set = fixtures::five_sample();
        assert!(matches!(
            oracle_ds_f1_capped(&set, "s_id", "s_ood", 4),
            Err(Error::CapExceeded { cap: 4, len: 5 })
        ));
    }
}
