//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use colsel::emd::{emd_minimize, EmdConfig, SimplexPoint, StepMode, SubgradientSample};
use colsel::experiments::{check_inf1_reduction, check_inf2_reduction};
use colsel::grothendieck::{groth_optimal_alpha, groth_objective};
use colsel::matcore::column_submatrix;
use colsel::pietsch::pietsch_optimal_alpha;
use colsel::select::{bt_select, kt_select, SelectConfig, SelectionReport};
use colsel::{FactorizeOptions, K_P};
use common::*;
use rand::Rng;

/// Relative tolerance on the bracket search.
const BRACKET_REL_TOL: f64 = 0.05;
/// Published upper bound on the real Grothendieck constant.
const K_G_BOUND: f64 = 1.783;
/// Rounding slack when comparing a bracket end with the exact norm.
const BRACKET_SLACK: f64 = 1e-9;
/// Agreement between the branch formula and the assembled block matrix.
const BLOCK_TOL: f64 = 1e-9;
/// Rounding slack on the acceptance thresholds when rechecked independently.
const METRIC_SLACK: f64 = 1e-9;
const KT_NORM: f64 = 15.0;
/// Fraction of runs that must reach half the stable rank.
const KT_CARDINALITY_RATE: f64 = 0.60;
/// Regime constant for the `s / 9` check: `s <= ceil(0.25 st.rank)`.
const INF1_REGIME: f64 = 0.25;
const EXPERIMENT_TRIALS: usize = 500;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn criterion_1() -> Outcome {
    let opts = FactorizeOptions::default();
    let mut rng = rng(1001);
    let mut failures = Vec::new();
    let (mut worst_p, mut worst_g): (f64, f64) = (0.0, 0.0);
    for k in 0..50 {
        let s = 2 + k % 11;
        let b = gaussian(8, s, &mut rng);
        let exact = brute_inf2(&b);
        let br = pietsch_optimal_alpha(&dense(&b), BRACKET_REL_TOL, &opts);
        match br {
            Ok(br) => {
                worst_p = worst_p.max(br.alpha_hi / exact);
                if !(br.alpha_lo <= exact * (1.0 + BRACKET_SLACK)
                    && exact <= br.alpha_hi * (1.0 + BRACKET_SLACK)
                    && br.alpha_hi <= K_P * (1.0 + BRACKET_REL_TOL) * exact)
                {
                    failures.push(format!("inf2 #{k}"));
                }
            }
            Err(e) => failures.push(format!("inf2 #{k}: {e}")),
        }

        let g = symmetric_gaussian(s, &mut rng);
        let exact = brute_inf1(&g);
        match groth_optimal_alpha(&dense(&g), BRACKET_REL_TOL, &opts) {
            Ok(br) => {
                worst_g = worst_g.max(br.alpha_hi / exact);
                if !(br.alpha_lo <= exact * (1.0 + BRACKET_SLACK)
                    && exact <= br.alpha_hi * (1.0 + BRACKET_SLACK)
                    && br.alpha_hi <= K_G_BOUND * (1.0 + BRACKET_REL_TOL) * exact)
                {
                    failures.push(format!("inf1 #{k}"));
                }
            }
            Err(e) => failures.push(format!("inf1 #{k}: {e}")),
        }
    }
    outcome(
        failures.is_empty(),
        format!("50 + 50 brackets, worst upper/exact {worst_p:.4} (inf2), {worst_g:.4} (inf1); failures {failures:?}"),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = rng(1002);
    let mut mismatches = 0;
    for feasible in [true, false] {
        for _ in 0..100 {
            let (psd, bounded) = pietsch_equivalence_case(&mut rng, feasible);
            mismatches += usize::from(psd != bounded);
            let (psd, bounded) = groth_equivalence_case(&mut rng, feasible);
            mismatches += usize::from(psd != bounded);
        }
    }
    outcome(mismatches == 0, format!("400 instances, {mismatches} mismatches at tolerance {EQUIVALENCE_TOL:e}"))
}

fn criterion_3() -> Outcome {
    let mut rng = rng(1003);
    let mut runs = 0;
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for s in [2usize, 8, 32] {
        for horizon in [100usize, 1000] {
            for _ in 0..10 {
                let c: Vec<f64> = (0..s).map(|_| rng.random_range(-1.0..1.0)).collect();
                let lipschitz = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                let min = c.iter().copied().fold(f64::INFINITY, f64::min);
                let objective = |p: &SimplexPoint| {
                    Ok(SubgradientSample {
                        value: p.weights().iter().zip(&c).map(|(w, x)| w * x).sum(),
                        subgradient: c.clone(),
                    })
                };
                let run = emd_minimize(objective, s, &EmdConfig::new(horizon, StepMode::FixedHorizon)).unwrap();
                let bound = (2.0 * lipschitz * lipschitz * (s as f64).ln() / horizon as f64).sqrt();
                let gap = run.best_value - min;
                worst = worst.max(gap / bound);
                violations += usize::from(gap > bound);
                runs += 1;
            }
        }
    }
    outcome(violations == 0, format!("{runs} runs, worst gap/bound {worst:.4}, {violations} violations"))
}

fn duplicate_free(tau: &[usize], m: usize) -> bool {
    tau.iter().all(|&j| !(j < m && tau.contains(&(j + m))))
}

/// Every logged candidate keeps at least half of its sample.
fn candidates_large_enough(report: &SelectionReport) -> (usize, usize) {
    let mut total = 0;
    let mut bad = 0;
    for entry in &report.per_round_log {
        if let Some(size) = entry.candidate_size {
            total += 1;
            bad += usize::from(size < entry.s.div_ceil(2));
        }
    }
    (total, bad)
}

struct Cardinality {
    candidates: usize,
    violations: usize,
}

fn criterion_4(card: &mut Cardinality) -> Outcome {
    let cfg = SelectConfig::default();
    let mut unsound = 0;
    let mut large = 0;
    for seed in 0..100u64 {
        let a = dense(&standardized_gaussian(32, 64, &mut rng(4000 + seed)));
        let r = kt_select(&a, seed, &cfg).unwrap();
        let norm = jacobi_spectral_norm(&column_submatrix(&a, &r.tau).unwrap().to_rows());
        unsound += usize::from(norm > KT_NORM * (1.0 + METRIC_SLACK));
        large += usize::from(r.tau.len() as f64 >= r.stable_rank / 2.0);
        let (t, b) = candidates_large_enough(&r);
        card.candidates += t;
        card.violations += b;
    }
    let rate = large as f64 / 100.0;
    outcome(
        unsound == 0 && rate >= KT_CARDINALITY_RATE,
        format!("norm bound violated in {unsound}/100, |tau| >= st.rank/2 in {large}/100 (need {KT_CARDINALITY_RATE})"),
    )
}

fn criterion_5(card: &mut Cardinality) -> Outcome {
    let cfg = SelectConfig::default();
    let kappa_max = 3f64.sqrt() * (1.0 + METRIC_SLACK);
    let m = 8;
    let di = dense(&double_identity(m));
    let mut unsound = 0;
    let mut duplicates = 0;
    let mut sizes = Vec::new();
    for seed in 0..100u64 {
        let r = bt_select(&di, seed, &cfg).unwrap();
        unsound += usize::from(jacobi_condition(&column_submatrix(&di, &r.tau).unwrap().to_rows()) > kappa_max);
        duplicates += usize::from(!duplicate_free(r.tau.indices(), m));
        sizes.push(r.tau.len());
        let (t, b) = candidates_large_enough(&r);
        card.candidates += t;
        card.violations += b;
    }
    for seed in 0..100u64 {
        let a = dense(&standardized_gaussian(16, 48, &mut rng(5000 + seed)));
        let r = bt_select(&a, seed, &cfg).unwrap();
        unsound += usize::from(jacobi_condition(&column_submatrix(&a, &r.tau).unwrap().to_rows()) > kappa_max);
        let (t, b) = candidates_large_enough(&r);
        card.candidates += t;
        card.violations += b;
    }
    let mean = sizes.iter().sum::<usize>() as f64 / sizes.len() as f64;
    outcome(
        unsound == 0 && duplicates == 0,
        format!("kappa bound violated in {unsound}/200, duplicate pairs in {duplicates}/100, mean |tau| on double identity {mean:.2}"),
    )
}

fn criterion_6(card: &Cardinality) -> Outcome {
    outcome(
        card.violations == 0 && card.candidates > 0,
        format!("{} candidates from criteria 4-5, {} below ceil(s/2)", card.candidates, card.violations),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = rng(1007);
    let matrices = vec![
        ("double identity 8x16", dense(&double_identity(8))),
        ("gaussian 8x16", dense(&standardized_gaussian(8, 16, &mut rng))),
        ("gaussian 64x16", dense(&standardized_gaussian(64, 16, &mut rng))),
        ("gaussian 6x12", dense(&standardized_gaussian(6, 12, &mut rng))),
    ];
    let mut failures = Vec::new();
    let (mut small2, mut small1) = (0, 0);
    for (k, (name, a)) in matrices.iter().enumerate() {
        for (d, delta) in [0.25, 0.5].into_iter().enumerate() {
            let seed = 70 + 10 * k as u64 + d as u64;
            let r = check_inf2_reduction(a, delta, EXPERIMENT_TRIALS, seed).unwrap();
            if !r.independent.pass {
                failures.push(format!("{name} delta {delta}: bound"));
            }
            if !r.fixed_size.pass {
                failures.push(format!("{name} delta {delta}: poissonization"));
            }
            if let Some(x) = &r.small_sample {
                small2 += 1;
                if !x.pass {
                    failures.push(format!("{name} delta {delta}: 7 sqrt(s)"));
                }
            }
        }
        for (d, delta) in [0.125, 0.25, 0.5].into_iter().enumerate() {
            let seed = 90 + 10 * k as u64 + d as u64;
            let r = check_inf1_reduction(a, delta, EXPERIMENT_TRIALS, seed, Some(INF1_REGIME)).unwrap();
            if !r.fixed_size.pass {
                failures.push(format!("{name} delta {delta}: inf1 poissonization"));
            }
            if let Some(x) = &r.small_sample {
                small1 += 1;
                if !x.pass {
                    failures.push(format!("{name} delta {delta}: s/9"));
                }
            }
        }
    }
    outcome(
        failures.is_empty() && small2 > 0 && small1 > 0,
        format!("4 matrices; 7 sqrt(s) checked {small2} times, s/9 checked {small1} times; failures {failures:?}"),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = rng(1008);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let s = rng.random_range(1..=10);
        let g = symmetric_gaussian(s, &mut rng);
        let alpha = rng.random_range(0.1..5.0);
        let f = random_simplex(s, &mut rng);
        let value = groth_objective(&dense(&g), alpha, &SimplexPoint::from_weights(f.clone()).unwrap())
            .unwrap()
            .value;
        let block = jacobi_max(&block_matrix(&g, &f, alpha));
        worst = worst.max((value - block).abs() / block.abs().max(1.0));
    }
    outcome(worst <= BLOCK_TOL, format!("100 instances, worst relative difference {worst:.2e}"))
}

fn criterion_9() -> Outcome {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let path = |n: &str| fixtures.join(n).to_str().unwrap().to_string();
    let runs: Vec<Vec<String>> = vec![
        vec!["kt".into(), "--seed".into(), "7".into(), path("gauss16x32.csv")],
        vec!["bt".into(), "--seed".into(), "7".into(), path("double_identity8.csv")],
        vec!["norm".into(), "--kind".into(), "inf2".into(), path("b4x6.csv")],
        vec!["experiment".into(), "--delta".into(), "0.5".into(), "--seed".into(), "3".into(), path("double_identity8.csv")],
        vec!["bt".into(), "--seed".into(), "5".into(), "--threads".into(), "2".into(), path("gauss16x32.csv")],
    ];
    let mut differing = Vec::new();
    for args in &runs {
        let once = || Command::new(env!("CARGO_BIN_EXE_colsel")).args(args).output().expect("binary runs");
        let (a, b) = (once(), once());
        if !(a.status.success() && b.status.success() && a.stdout == b.stdout && !a.stdout.is_empty()) {
            differing.push(args[0].clone());
        }
    }
    outcome(differing.is_empty(), format!("{} commands run twice, differing: {differing:?}", runs.len()))
}

fn report(n: usize, o: &Outcome, elapsed: Duration, budget: Option<Duration>) -> bool {
    let timing = match budget {
        Some(b) => format!("{:.1}s of {}s budget", elapsed.as_secs_f64(), b.as_secs()),
        None => format!("{:.1}s", elapsed.as_secs_f64()),
    };
    let verdict = if o.pass { "PASS" } else { "FAIL" };
    println!("criterion {n}: {verdict} ({timing}) {}", o.detail);
    o.pass
}

fn timed<F: FnOnce() -> Outcome>(f: F) -> (Outcome, Duration) {
    let start = Instant::now();
    let o = f();
    (o, start.elapsed())
}

fn main() -> ExitCode {
    // Runtime targets are reported, not enforced.
    let secs = Duration::from_secs;
    let mut card = Cardinality {
        candidates: 0,
        violations: 0,
    };
    let mut all = true;
    let (o, t) = timed(criterion_1);
    all &= report(1, &o, t, Some(secs(60)));
    let (o, t) = timed(criterion_2);
    all &= report(2, &o, t, Some(secs(10)));
    let (o, t) = timed(criterion_3);
    all &= report(3, &o, t, Some(secs(5)));
    let (o, t) = timed(|| criterion_4(&mut card));
    all &= report(4, &o, t, Some(secs(300)));
    let (o, t) = timed(|| criterion_5(&mut card));
    all &= report(5, &o, t, Some(secs(300)));
    let (o, t) = timed(|| criterion_6(&card));
    all &= report(6, &o, t, None);
    let (o, t) = timed(criterion_7);
    all &= report(7, &o, t, Some(secs(120)));
    let (o, t) = timed(criterion_8);
    all &= report(8, &o, t, Some(secs(5)));
    let (o, t) = timed(criterion_9);
    all &= report(9, &o, t, None);
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
