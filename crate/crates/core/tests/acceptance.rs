//! Acceptance gate: one PASS/FAIL line per criterion.
//!
//! Exits nonzero when a criterion fails, except for sub-checks listed in
//! `KNOWN_UNATTAINABLE`, which still print FAIL but do not fail the run.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use dualscore::dataset::Population;
use dualscore::detection::{auroc, fpr_at_95_tpr};
use dualscore::oracle::{oracle_auroc, oracle_counts, oracle_ds_aurc, oracle_ds_f1};
use dualscore::report::{cell, render_markdown, select_report, Metric, MetricReport};
use dualscore::scoring::{energy, msp};
use dualscore::single::id_only_selective_risk;
use dualscore::synth::{Gaussian2, ID_CHANNEL as S_ID, OOD_CHANNEL as S_OOD};
use dualscore::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{StandardNormal, Uniform};
use rayon::prelude::*;

/// Sub-checks whose stated target contradicts the data it is stated for.
/// The fixture's OOD channel alone reaches F1 0.8 at tau 0.8 (accepting
/// A and B: precision 1, recall 2/3), so 2/3 cannot be its best single F1.
const KNOWN_UNATTAINABLE: &[&str] = &["fixture: best single F1 on s_ood = 2/3"];

const EPS: f64 = 1e-12;

struct Outcome {
    name: &'static str,
    failed: Vec<String>,
    detail: String,
}

impl Outcome {
    fn new(name: &'static str) -> Self {
        Outcome {
            name,
            failed: Vec::new(),
            detail: String::new(),
        }
    }

    fn check(&mut self, label: impl Into<String>, ok: bool) {
        if !ok {
            self.failed.push(label.into());
        }
    }
}

fn exhaustive_axis(set: &EvalSet, channel: &str) -> ThresholdAxis {
    GridSpec::Exhaustive.axis(set.channel(channel).unwrap(), true).unwrap()
}

fn exhaustive_ds(set: &EvalSet, a: &str, b: &str, k_bins: usize) -> (f64, ThresholdPair, f64) {
    let sweep = DoubleSweep::new(set, a, b, ThresholdGrid::exhaustive(set, a, b).unwrap()).unwrap();
    let best = sweep.best_f1();
    (best.value, best.pair, sweep.binned_risk(k_bins).unwrap().area())
}

fn single_pair(set: &EvalSet, channel: &str, k_bins: usize) -> (f64, f64) {
    let axis = exhaustive_axis(set, channel);
    (
        best_f1_single(set, channel, &axis).unwrap().0,
        channel_aurc(set, channel, &axis, k_bins).unwrap(),
    )
}

fn random_gaussian(rng: &mut ChaCha8Rng) -> Gaussian2 {
    Gaussian2::new(
        [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)],
        [rng.random_range(0.3..2.0), rng.random_range(0.3..2.0)],
        rng.random_range(-0.6..0.6),
    )
}

/// Random population sizes, accuracy and score distributions; `n` samples.
fn varied_config(seed: u64, n: usize, n_ood: Option<usize>) -> SynthConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let n_ood = n_ood.unwrap_or_else(|| rng.random_range(0..=n * 3 / 4));
    SynthConfig {
        n_id: n - n_ood,
        n_ood,
        id_accuracy: rng.random_range(0.3..1.0),
        correct: random_gaussian(&mut rng),
        wrong: random_gaussian(&mut rng),
        ood: random_gaussian(&mut rng),
        seed,
    }
}

fn dominance() -> Outcome {
    let mut out = Outcome::new("dominance");
    let start = Instant::now();
    let violations: Vec<String> = (0..1000u64)
        .into_par_iter()
        .flat_map_iter(|seed| {
            let set = generate(&varied_config(seed, 200, None)).unwrap();
            let (f1, _, aurc) = exhaustive_ds(&set, S_ID, S_OOD, DEFAULT_K_BINS);
            let mut bad = Vec::new();
            for channel in [S_ID, S_OOD] {
                let (single_f1, single_aurc) = single_pair(&set, channel, DEFAULT_K_BINS);
                if f1 < single_f1 - EPS {
                    bad.push(format!("seed {seed}: DS-F1 {f1} < F1({channel}) {single_f1}"));
                }
                if aurc > single_aurc + EPS {
                    bad.push(format!("seed {seed}: DS-AURC {aurc} > AURC({channel}) {single_aurc}"));
                }
            }
            bad
        })
        .collect();
    let elapsed = start.elapsed();
    out.detail = format!(
        "1000 datasets of 200 samples, {} violations, {:.1} s (limit 60 s)",
        violations.len(),
        elapsed.as_secs_f64()
    );
    for v in violations.into_iter().take(5) {
        out.check(v, false);
    }
    out.check("runtime within 60 s", elapsed <= Duration::from_secs(60));
    out
}

fn reduction() -> Outcome {
    let mut out = Outcome::new("reduction");
    let mut sets_checked = 0usize;
    for seed in 0..200u64 {
        // no OOD: every acceptance set has the same risk under both definitions
        let set = generate(&varied_config(seed, 200, Some(0))).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut accepted_sets: Vec<Vec<usize>> = (0..50)
            .map(|_| (0..set.len()).filter(|_| rng.random_bool(0.5)).collect())
            .collect();
        for channel in [S_ID, S_OOD] {
            let scores = set.channel(channel).unwrap();
            for &tau in exhaustive_axis(&set, channel).thresholds() {
                accepted_sets.push((0..set.len()).filter(|&i| scores[i] >= tau).collect());
            }
        }
        for accepted in &accepted_sets {
            out.check(
                format!("seed {seed}: risk differs without OOD"),
                selective_risk(&set, accepted) == id_only_selective_risk(&set, accepted),
            );
        }
        sets_checked += accepted_sets.len();

        // constant second channel: DS metrics collapse to the first channel
        let base = generate(&varied_config(seed + 10_000, 200, None)).unwrap();
        let flat = base.with_channel(S_OOD, vec![0.5; base.len()]).unwrap();
        let (f1, _, aurc) = exhaustive_ds(&flat, S_ID, S_OOD, DEFAULT_K_BINS);
        let (single_f1, single_aurc) = single_pair(&flat, S_ID, DEFAULT_K_BINS);
        out.check(format!("seed {seed}: DS-F1 != F1 with constant OOD channel"), (f1 - single_f1).abs() <= EPS);
        out.check(
            format!("seed {seed}: DS-AURC != AURC with constant OOD channel"),
            (aurc - single_aurc).abs() <= EPS,
        );
    }
    out.detail = format!("200 OOD-free sets ({sets_checked} acceptance sets), 200 constant-channel sets");
    out
}

/// Random instance of 2..=200 samples; odd seeds put scores on a coarse
/// lattice so ties are frequent.
fn random_instance(seed: u64) -> EvalSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=200usize);
    let tied = seed % 2 == 1;
    let draw = |rng: &mut ChaCha8Rng| -> f64 {
        if tied {
            f64::from(rng.random_range(0..10i32)) / 4.0
        } else {
            rng.sample(StandardNormal)
        }
    };
    let mut populations = Vec::with_capacity(n);
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for i in 0..n {
        populations.push(match (i, rng.random_range(0..3)) {
            (0, _) | (_, 0) => Population::IdCorrect,
            (_, 1) => Population::IdWrong,
            _ => Population::Ood,
        });
        a.push(draw(&mut rng));
        b.push(draw(&mut rng));
    }
    EvalSet::from_columns(
        (0..n).map(|i| format!("x{i}")).collect(),
        populations,
        vec![("a".into(), a), ("b".into(), b)],
    )
    .unwrap()
}

fn oracle_equivalence() -> Outcome {
    let mut out = Outcome::new("oracle-equivalence");
    let failures: Vec<String> = (0..500u64)
        .into_par_iter()
        .flat_map_iter(|seed| {
            let set = random_instance(seed);
            let mut bad = Vec::new();
            let grid = ThresholdGrid::exhaustive(&set, "a", "b").unwrap();
            let tables = ds_sweep_fast(&set, "a", "b", &grid).unwrap();
            'pairs: for (i, &tau_id) in grid.id.thresholds().iter().enumerate() {
                for (j, &tau_ood) in grid.ood.thresholds().iter().enumerate() {
                    let c = tables.counts(i, j);
                    let expected = oracle_counts(&set, "a", "b", ThresholdPair::new(tau_id, tau_ood)).unwrap();
                    if (c.ta, c.accepted_id, c.accepted_ood) != expected {
                        bad.push(format!("seed {seed}: counts differ at ({tau_id}, {tau_ood})"));
                        break 'pairs;
                    }
                }
            }
            let fast = ds_f1(&set, "a", "b", &grid, false).unwrap();
            let (f1, pair) = oracle_ds_f1(&set, "a", "b").unwrap();
            if (fast.value - f1).abs() > EPS || fast.best_pair != Some(pair) {
                bad.push(format!("seed {seed}: DS-F1 {} vs oracle {f1}", fast.value));
            }
            for k_bins in [3, DEFAULT_K_BINS] {
                let fast = ds_aurc(&set, "a", "b", &grid, k_bins, false).unwrap().value;
                let slow = oracle_ds_aurc(&set, "a", "b", k_bins).unwrap();
                if (fast - slow).abs() > EPS {
                    bad.push(format!("seed {seed}: DS-AURC(K={k_bins}) {fast} vs oracle {slow}"));
                }
            }
            let (id, ood) = set.split_channel("a").unwrap();
            if !ood.is_empty() {
                let (fast, slow) = (auroc(&id, &ood).unwrap(), oracle_auroc(&id, &ood).unwrap());
                if (fast - slow).abs() > EPS {
                    bad.push(format!("seed {seed}: AUROC {fast} vs oracle {slow}"));
                }
            }
            bad
        })
        .collect();
    out.detail = format!("500 instances, {} mismatches", failures.len());
    for f in failures.into_iter().take(5) {
        out.check(f, false);
    }
    out
}

fn fixture() -> Outcome {
    let mut out = Outcome::new("fixture");
    let set = fixtures::five_sample();
    let (f1, best, _) = exhaustive_ds(&set, S_ID, S_OOD, DEFAULT_K_BINS);
    let target = ThresholdPair::new(0.75, 0.5);
    let at_target = confusion_counts(&set, S_ID, S_OOD, target).unwrap();
    out.check("fixture: DS-F1 = 0.8", f1 == 0.8);
    out.check("fixture: F1 at (0.75, 0.5) = 0.8", at_target.f1() == 0.8);
    // (0.75, 0.5) is not an empirical value pair; the reported optimum must
    // accept exactly the same samples
    out.check(
        "fixture: optimum accepts the same set as (0.75, 0.5)",
        acceptance_set(&set, S_ID, S_OOD, best).unwrap() == acceptance_set(&set, S_ID, S_OOD, target).unwrap(),
    );
    let single_id = single_pair(&set, S_ID, DEFAULT_K_BINS).0;
    let single_ood = single_pair(&set, S_OOD, DEFAULT_K_BINS).0;
    out.check("fixture: best single F1 on s_id = 2/3", (single_id - 2.0 / 3.0).abs() <= EPS);
    out.check("fixture: best single F1 on s_ood = 2/3", (single_ood - 2.0 / 3.0).abs() <= EPS);
    let all: Vec<usize> = (0..set.len()).collect();
    out.check("fixture: accept-all risk = 0.6", (selective_risk(&set, &all) - 0.6).abs() <= EPS);
    let grid = ThresholdGrid::exhaustive(&set, S_ID, S_OOD).unwrap();
    let tables = ds_sweep_fast(&set, S_ID, S_OOD, &grid).unwrap();
    let mut identities = true;
    for i in 0..tables.id_len() {
        for j in 0..tables.ood_len() {
            let c = tables.counts(i, j);
            identities &= c.ta + c.fr == 3 && c.ta + c.fa == c.accepted_total;
        }
    }
    out.check("fixture: TA+FR=3 and TA+FA=|A| at every pair", identities);
    out.detail = format!(
        "DS-F1 {f1} at ({}, {}), single F1 s_id {single_id:.4} s_ood {single_ood:.4}",
        best.tau_id, best.tau_ood
    );
    out
}

fn transfer_protocol() -> Outcome {
    let mut out = Outcome::new("threshold-transfer");
    let runs: Vec<(f64, f64, f64, bool)> = (0..100u64)
        .into_par_iter()
        .map(|run| {
            let val = generate(&SynthConfig::far(1000, 1000, 0.8, 2 * run)).unwrap();
            let test = generate(&SynthConfig::far(1000, 1000, 0.8, 2 * run + 1)).unwrap();
            let report = select_report(&val, &test, S_ID, S_OOD, &Mode::ALL, GridSpec::Exhaustive).unwrap();
            let f1 = |m: Mode| report.selection.iter().find(|s| s.mode == m).unwrap();
            let opt_ok = report.selection.iter().all(|s| s.test_opt_f1.raw >= s.transfer_f1.raw);
            (
                f1(Mode::Double).transfer_f1.raw,
                f1(Mode::IdOnly).transfer_f1.raw,
                f1(Mode::OodOnly).transfer_f1.raw,
                opt_ok,
            )
        })
        .collect();
    let wins = runs.iter().filter(|(d, i, o, _)| d >= i && d >= o).count();
    let opt_ok = runs.iter().filter(|r| r.3).count();
    let mean = |k: fn(&(f64, f64, f64, bool)) -> f64| runs.iter().map(k).sum::<f64>() / runs.len() as f64;
    out.check("double transfer >= both single transfers in >= 95 runs", wins >= 95);
    out.check("test-optimal >= transferred in every run", opt_ok == runs.len());
    out.detail = format!(
        "double wins {wins}/100, test-opt >= transfer {opt_ok}/100, mean test F1 double {:.2} id {:.2} ood {:.2}",
        100.0 * mean(|r| r.0),
        100.0 * mean(|r| r.1),
        100.0 * mean(|r| r.2)
    );
    out
}

/// DS-F1 minus the better single-channel F1, on the default quantile grid.
fn gain(set: &EvalSet) -> f64 {
    let grid = ThresholdGrid::build(set, S_ID, S_OOD, GridSpec::default(), true).unwrap();
    let ds = ds_f1(set, S_ID, S_OOD, &grid, false).unwrap().value;
    let single = [S_ID, S_OOD]
        .iter()
        .map(|c| {
            let axis = GridSpec::default().axis(set.channel(c).unwrap(), true).unwrap();
            best_f1_single(set, c, &axis).unwrap().0
        })
        .fold(f64::NEG_INFINITY, f64::max);
    ds - single
}

/// `P(X >= k)` for `X ~ Binomial(n, 1/2)`.
fn sign_test_p(k: usize, n: usize) -> f64 {
    let mut coefficient = 1.0f64;
    let mut tail = 0.0;
    for i in 0..=n {
        if i >= k {
            tail += coefficient;
        }
        coefficient = coefficient * (n - i) as f64 / (i + 1) as f64;
    }
    tail / 2f64.powi(n as i32)
}

fn near_far_gap() -> Outcome {
    let mut out = Outcome::new("near-far-gap");
    let gaps: Vec<(f64, f64)> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let far = generate(&SynthConfig::far(1000, 1000, 0.8, seed)).unwrap();
            let near = generate(&SynthConfig::near(1000, 1000, 0.8, seed)).unwrap();
            (gain(&far), gain(&near))
        })
        .collect();
    let positive = gaps.iter().filter(|(f, n)| f > n).count();
    let trials = gaps.iter().filter(|(f, n)| f != n).count();
    let p = sign_test_p(positive, trials);
    let mean_far = gaps.iter().map(|g| g.0).sum::<f64>() / 100.0;
    let mean_near = gaps.iter().map(|g| g.1).sum::<f64>() / 100.0;
    out.check("mean far gain exceeds mean near gain", mean_far > mean_near);
    out.check("one-sided sign test p < 0.01", p < 0.01);
    out.detail = format!(
        "mean gain far {:.2} vs near {:.2} (x100), far larger in {positive}/{trials} seeds, p = {p:.3e}",
        100.0 * mean_far,
        100.0 * mean_near
    );
    out
}

fn metrics_of(report: &MetricReport) -> Vec<(Metric, f64)> {
    let mut all = Vec::new();
    for s in report.single.values() {
        all.push((s.f1, 100.0));
        all.push((s.aurc, 1000.0));
        for m in [s.auroc, s.fpr_at_95_tpr, s.aupr].into_iter().flatten() {
            all.push((m, 100.0));
        }
    }
    if let Some(d) = &report.double {
        all.push((d.ds_f1, 100.0));
        all.push((d.ds_aurc, 1000.0));
    }
    for s in &report.selection {
        all.extend([(s.val_f1, 100.0), (s.transfer_f1, 100.0), (s.test_opt_f1, 100.0)]);
    }
    all
}

fn display_scaling() -> Outcome {
    let mut out = Outcome::new("display-scaling");
    let synth = generate(&SynthConfig::near(500, 300, 0.7, 3)).unwrap();
    let mut reports = Vec::new();
    for set in [fixtures::five_sample(), synth.clone()] {
        reports.push(evaluate(&set, &EvalOptions::new(S_ID, S_OOD)).unwrap().report);
    }
    reports.push(select_report(&synth, &synth, S_ID, S_OOD, &Mode::ALL, GridSpec::default()).unwrap());
    let mut checked = 0;
    for report in &reports {
        for (m, scale) in metrics_of(report) {
            out.check(format!("display {} != raw {} x {scale}", m.display, m.raw), m.display == m.raw * scale);
            checked += 1;
        }
    }
    out.check("AURC 0.20238 prints 202.38", cell(Some(&Metric::permille(0.20238))) == "202.38");
    out.check("rate 0.6742 prints 67.42", cell(Some(&Metric::percent(0.6742))) == "67.42");
    let md = render_markdown(&reports[0]);
    out.check("fixture table shows DS-F1 80.00", md.contains("| 80.00 |"));
    out.detail = format!("{checked} report values, two-decimal cells");
    out
}

fn scoring_sanity() -> Outcome {
    let mut out = Outcome::new("scoring-sanity");
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let high = Uniform::new(1.0, 2.0).unwrap();
    let low = Uniform::new(-2.0, -1.0).unwrap();
    let id: Vec<f64> = (0..1000).map(|_| rng.sample(high)).collect();
    let ood: Vec<f64> = (0..1000).map(|_| rng.sample(low)).collect();
    let separated = (auroc(&id, &ood).unwrap(), fpr_at_95_tpr(&id, &ood).unwrap());
    out.check("separated: AUROC 1.0", separated.0 == 1.0);
    out.check("separated: FPR@95 0.0", separated.1 == 0.0);

    let a: Vec<f64> = (0..10_000).map(|_| rng.sample(StandardNormal)).collect();
    let b: Vec<f64> = (0..10_000).map(|_| rng.sample(StandardNormal)).collect();
    let identical = auroc(&a, &b).unwrap();
    out.check("identical: AUROC within 0.5 +- 0.02", (identical - 0.5).abs() <= 0.02);

    let (mut energy_err, mut msp_err) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let classes = rng.random_range(2..=100usize);
        let z: Vec<f64> = (0..classes).map(|_| 3.0 * rng.sample::<f64, _>(StandardNormal)).collect();
        let c = rng.random_range(-10.0..10.0);
        let shifted: Vec<f64> = z.iter().map(|v| v + c).collect();
        energy_err = energy_err.max((energy(&shifted, 1.0).unwrap() - energy(&z, 1.0).unwrap() - c).abs());
        msp_err = msp_err.max((msp(&shifted) - msp(&z)).abs());
    }
    out.check("energy shift equivariance to 1e-12", energy_err <= EPS);
    out.check("msp shift invariance to 1e-12", msp_err <= EPS);
    out.detail = format!(
        "separated AUROC {} FPR@95 {}, identical AUROC {identical:.4}, max shift error energy {energy_err:.1e} msp {msp_err:.1e}",
        separated.0, separated.1
    );
    out
}

/// Best of three wall-clock runs of grid construction, DS-F1 and DS-AURC.
fn time_double_metrics(set: &EvalSet) -> (Duration, f64, f64) {
    let mut best = Duration::MAX;
    let mut values = (0.0, 0.0);
    for _ in 0..3 {
        let start = Instant::now();
        let grid = ThresholdGrid::build(set, S_ID, S_OOD, GridSpec::Quantile(256), true).unwrap();
        let sweep = DoubleSweep::new(set, S_ID, S_OOD, grid).unwrap();
        let f1 = sweep.best_f1().value;
        let aurc = sweep.binned_risk(DEFAULT_K_BINS).unwrap().area();
        best = best.min(start.elapsed());
        values = (f1, aurc);
    }
    (best, values.0, values.1)
}

fn performance() -> Outcome {
    let mut out = Outcome::new("performance");
    let set = generate(&SynthConfig::far(50_000, 50_000, 0.8, 1)).unwrap();
    let doubled = generate(&SynthConfig::far(100_000, 100_000, 0.8, 2)).unwrap();
    let (t1, f1, aurc) = time_double_metrics(&set);
    let (t2, _, _) = time_double_metrics(&doubled);
    let ratio = t2.as_secs_f64() / t1.as_secs_f64();
    // the full report adds per-channel metrics on top of the double sweep
    let mut options = EvalOptions::new(S_ID, S_OOD);
    options.grid = GridSpec::Quantile(256);
    let start = Instant::now();
    evaluate(&set, &options).unwrap();
    let full = start.elapsed();
    out.check("N=100k within 5 s single-threaded", t1 <= Duration::from_secs(5));
    out.check("N=100k full report within 5 s single-threaded", full <= Duration::from_secs(5));
    out.check("doubling N less than triples runtime", ratio < 3.0);
    out.detail = format!(
        "N=100k: {:.0} ms (DS-F1 {:.4}, DS-AURC {:.4}), full report {:.0} ms; N=200k: {:.0} ms; ratio {ratio:.2}",
        t1.as_secs_f64() * 1e3,
        f1,
        aurc,
        full.as_secs_f64() * 1e3,
        t2.as_secs_f64() * 1e3
    );
    out
}

fn main() -> ExitCode {
    let criteria: [fn() -> Outcome; 9] = [
        dominance,
        reduction,
        oracle_equivalence,
        fixture,
        transfer_protocol,
        near_far_gap,
        display_scaling,
        scoring_sanity,
        performance,
    ];
    let mut blocking = 0;
    let mut failed = 0;
    for (i, criterion) in criteria.iter().enumerate() {
        let outcome = criterion();
        let status = if outcome.failed.is_empty() { "PASS" } else { "FAIL" };
        println!("{status} {}. {}: {}", i + 1, outcome.name, outcome.detail);
        for f in &outcome.failed {
            let known = KNOWN_UNATTAINABLE.contains(&f.as_str());
            println!("     failed: {f}{}", if known { " (known unattainable)" } else { "" });
            if !known {
                blocking += 1;
            }
        }
        failed += usize::from(!outcome.failed.is_empty());
    }
    println!(
        "{} of {} criteria passed; {blocking} blocking failures",
        criteria.len() - failed,
        criteria.len()
    );
    if blocking == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
