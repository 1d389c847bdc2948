//! Acceptance suite. Prints one line per criterion and exits nonzero when
//! the set of failing criteria differs from the documented one.
//!
//! Criterion 11 needs a user-supplied vote file:
//! `POLYMATRIX_VOTES=<csv>` with optional `POLYMATRIX_POA_EXPECTED` (default 1.9),
//! `POLYMATRIX_VOTE_RULE` (default supreme-court) and `POLYMATRIX_LAMBDA`.

mod common;

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::Instant;

use common::*;
use nalgebra::DMatrix;
use polymatrix_core::ensembles::{hard_game, HardEnsembleSpec};
use polymatrix_core::experiments::{
    draw_game, evaluate_learned, phase_transition_sweep, sample_count, ExperimentSpec, GameFamily,
};
use polymatrix_core::game::linear::{featurize, pack_parameters};
use polymatrix_core::game::{check_separability, enumerate_psne, price_of_anarchy, PolymatrixGame};
use polymatrix_core::learner::diagnostics::{
    diagonal_block_bound, max_eigen, max_eigenvalue, min_eigen, min_eigen_identifiable,
    min_eigenvalue, HessianSource,
};
use polymatrix_core::learner::{
    fit_game, gradient, group_prox, hessian, lambda_schedule, LearnerConfig, DEFAULT_HESSIAN_CAP,
};
use polymatrix_core::votes::{ingest_votes, IngestOptions, VoteMappingRule};
use polymatrix_core::{
    Dataset, GroupLayout, GroupedParameterVector, NoiseModel, ObservationModel, PmfTable,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Criteria known not to hold as literally stated.
const EXPECTED_FAILURES: &[u32] = &[5];

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn random_theta(
    r: &mut ChaCha8Rng,
    counts: &[usize],
    i: usize,
    scale: f64,
) -> GroupedParameterVector {
    let l = Arc::new(GroupLayout::new(counts, i).unwrap());
    let v = (0..l.len())
        .map(|_| r.random_range(-scale..scale))
        .collect();
    GroupedParameterVector::from_values(l, v).unwrap()
}

fn random_data(r: &mut ChaCha8Rng, counts: &[usize], n: usize) -> Dataset {
    let rows = (0..n)
        .map(|_| counts.iter().map(|&m| r.random_range(0..m)).collect())
        .collect();
    Dataset::new(counts.to_vec(), rows).unwrap()
}

fn phase_transition() -> Outcome {
    let spec = ExperimentSpec {
        c_grid: vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
        ..Default::default()
    };
    let report = phase_transition_sweep(&spec).unwrap();
    let probs: Vec<f64> = report.rows.iter().map(|r| r.probability()).collect();
    let drops: Vec<f64> = probs
        .windows(2)
        .filter(|w| w[1] < w[0])
        .map(|w| w[0] - w[1])
        .collect();
    let monotone = drops.len() <= 1 && drops.iter().all(|&d| d <= 0.1);
    let low = probs[0];
    let high = *probs.last().unwrap();
    let golden = report.to_csv(&spec.echo(), false) == include_str!("golden/phase_transition.csv");
    verdict(
        low <= 0.3 && high >= 0.8 && monotone && golden,
        format!(
            "probabilities {:?} over c {:?}, golden match {golden}",
            probs, spec.c_grid
        ),
    )
}

fn hard_uniqueness() -> Outcome {
    let mut r = rng(1002);
    let mut specs = 0;
    let mut bad = 0;
    while specs < 50 {
        let p = r.random_range(3..=14);
        let m = r.random_range(2..=4);
        if (m as f64).powi(p as i32) > (1u64 << 20) as f64 {
            continue;
        }
        let d = r.random_range(2..=p);
        let spec = HardEnsembleSpec::random(p, d, m, specs).unwrap();
        let ne = enumerate_psne(&hard_game(&spec).unwrap()).unwrap();
        let mut expected = vec![count_majority(&spec.target); p];
        for (&i, &a) in spec.influential.iter().zip(&spec.target) {
            expected[i] = a;
        }
        if ne.len() != 1 || ne.profiles()[0].to_vec() != expected {
            bad += 1;
        }
        specs += 1;
    }
    verdict(bad == 0, format!("{specs} specs, {bad} mismatches"))
}

fn gradient_check() -> Outcome {
    let mut r = rng(1003);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let counts = random_counts(&mut r, 2..=5, 4);
        let i = r.random_range(0..counts.len());
        let t = random_theta(&mut r, &counts, i, 1.0);
        let d = random_data(&mut r, &counts, 40);
        let rows: Vec<Vec<usize>> = d.iter().map(|x| x.to_vec()).collect();
        let g = gradient(&t, &d).unwrap();
        let fd = fd_gradient(|th| naive_loss(&counts, i, th, &rows), t.values(), 1e-5);
        for (a, b) in g.values().iter().zip(&fd) {
            worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(1e-3));
        }
    }
    verdict(worst <= 1e-5, format!("max relative error {worst:.2e}"))
}

fn hessian_check() -> Outcome {
    let mut min_eig = f64::INFINITY;
    let mut worst_ratio = f64::NEG_INFINITY;
    let mut fd_err = 0.0f64;
    for seed in 0..20 {
        let (g, _) = draw_game(&GameFamily::random(5, 2, 3), 2000 + seed).unwrap();
        let data = ObservationModel::new(&g, NoiseModel::local_uniform(5, 0.6))
            .unwrap()
            .sample(200, seed)
            .unwrap();
        for i in 0..5 {
            let t = pack_parameters(&g, i).unwrap();
            let h = hessian(&t, &data).unwrap();
            let m = h.matrix();
            min_eig = min_eig.min(min_eigenvalue(m));
            let top = max_eigen(&t, HessianSource::Data(&data), true, DEFAULT_HESSIAN_CAP).unwrap();
            worst_ratio = worst_ratio.max(top - (g.degree(i) as f64 + 1.0));
            for k in 0..t.values().len() {
                let col = fd_gradient(
                    |th| {
                        let p =
                            GroupedParameterVector::from_values(t.layout().clone(), th.to_vec())
                                .unwrap();
                        gradient(&p, &data).unwrap().values()[k]
                    },
                    t.values(),
                    1e-5,
                );
                for (l, v) in col.iter().enumerate() {
                    fd_err = fd_err.max((m[(k, l)] - v).abs());
                }
            }
        }
    }
    verdict(
        min_eig >= -1e-9 && worst_ratio <= 1e-9 && fd_err <= 1e-4,
        format!(
            "min eigenvalue {min_eig:.2e}, max(lambda_max - (d_i + 1)) {worst_ratio:.3}, finite-difference error {fd_err:.2e}"
        ),
    )
}

fn strong_convexity() -> Outcome {
    let mut plain = f64::INFINITY;
    let mut ident = f64::INFINITY;
    let mut games = 0;
    let mut seed = 0;
    while games < 10 {
        let (g, _) = draw_game(&GameFamily::random(4, 1, 3), 5000 + seed).unwrap();
        seed += 1;
        let pmf = ObservationModel::new(&g, NoiseModel::Global { q: 0.7 })
            .unwrap()
            .pmf_table();
        for i in 0..4 {
            let t = pack_parameters(&g, i).unwrap();
            let src = HessianSource::Pmf(&pmf);
            plain = plain.min(min_eigen(&t, src, true, DEFAULT_HESSIAN_CAP).unwrap());
            ident = ident.min(
                min_eigen_identifiable(&t, HessianSource::Pmf(&pmf), true, DEFAULT_HESSIAN_CAP)
                    .unwrap(),
            );
        }
        games += 1;
    }
    // The literal check cannot pass: adding a constant to the intercept of
    // every own strategy leaves the softmax unchanged, so the Hessian always
    // has that null direction.
    verdict(
        plain > 1e-8,
        format!(
            "support Hessian lambda_min {plain:.2e} (null direction from shift invariance); on the identifiable subspace lambda_min {ident:.3e} ({})",
            if ident > 1e-8 { "PASS" } else { "FAIL" }
        ),
    )
}

fn prox_check() -> Outcome {
    let mut r = rng(1006);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let len = r.random_range(1..=9);
        let l = Arc::new(GroupLayout::new(&[len], 0).unwrap());
        let v: Vec<f64> = (0..len).map(|_| r.random_range(-2.0..2.0)).collect();
        let t = GroupedParameterVector::from_values(l, v.clone()).unwrap();
        let thr = r.random_range(0.0..3.0);
        let out = group_prox(&t, thr).unwrap();
        for (a, b) in out.group(0).iter().zip(numeric_prox(&v, thr)) {
            worst = worst.max((a - b).abs());
        }
    }
    verdict(
        worst <= 1e-6,
        format!("100 groups, max deviation {worst:.2e}"),
    )
}

fn payoff_transfer() -> Outcome {
    let mut r = rng(1007);
    let mut violations = 0;
    for _ in 0..1000 {
        let counts = random_counts(&mut r, 2..=6, 4);
        let i = r.random_range(0..counts.len());
        let theta = random_theta(&mut r, &counts, i, 3.0);
        let scale = r.random_range(0.0..2.0);
        let delta = random_theta(&mut r, &counts, i, scale);
        let x: Vec<usize> = counts.iter().map(|&m| r.random_range(0..m)).collect();
        let f = featurize(&counts, i, x[i], &x).unwrap();
        let perturbed: Vec<f64> = theta
            .values()
            .iter()
            .zip(delta.values())
            .map(|(a, b)| a + b)
            .collect();
        let perturbed =
            GroupedParameterVector::from_values(theta.layout().clone(), perturbed).unwrap();
        let change = (f.dot(&perturbed) - f.dot(&theta)).abs();
        let linear = f.dot(&delta).abs();
        if linear > delta.norm_12() || change > delta.norm_12() * (1.0 + 1e-12) {
            violations += 1;
        }
    }
    verdict(
        violations == 0,
        format!("1000 triples, {violations} violations"),
    )
}

/// Smallest best-response gain over non-equilibrium profiles.
fn min_regret(g: &PolymatrixGame) -> f64 {
    let mut best = f64::INFINITY;
    for x in all_profiles(g.strategy_counts()) {
        let regret = (0..g.num_players())
            .map(|i| {
                let here = g.payoff_at(i, x[i], &x);
                (0..g.strategy_counts()[i])
                    .map(|a| g.payoff_at(i, a, &x) - here)
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if regret > 0.0 {
            best = best.min(regret);
        }
    }
    best
}

fn end_to_end() -> Outcome {
    let (p, d, m, delta) = (6, 2, 3, 0.01);
    let spec = HardEnsembleSpec::random(p, d, m, 808).unwrap();
    let g = hard_game(&spec).unwrap();
    let eps = 0.5 * min_regret(&g);
    let separable = check_separability(&g, eps).unwrap();
    let n = sample_count(1.0, p, d, delta).unwrap();
    let lambda = lambda_schedule(n, p, d, 0.0, delta).unwrap();
    let model = ObservationModel::new(&g, NoiseModel::local_uniform(p, 0.9)).unwrap();
    let config = LearnerConfig {
        lambda,
        delta,
        ..Default::default()
    };
    let mut equal = 0;
    for seed in 0..20 {
        let data = model.sample(n, 9000 + seed).unwrap();
        let learned = fit_game(&data, &config).unwrap();
        if evaluate_learned(&g, &learned).unwrap().equal {
            equal += 1;
        }
    }
    verdict(
        separable && equal >= 18,
        format!("p={p} d={d} n={n} lambda={lambda:.4} separable at eps={eps:.4}: {separable}, equal in {equal}/20"),
    )
}

fn sampler_fidelity() -> Outcome {
    let mut b = PolymatrixGame::builder(vec![2, 2]).unwrap();
    b.set_edge(0, 1, &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    b.set_edge(1, 0, &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let g = b.build().unwrap();
    let mut worst = 0.0f64;
    for (k, noise) in [
        NoiseModel::Global { q: 0.6 },
        NoiseModel::Local { q: vec![0.7, 0.8] },
    ]
    .into_iter()
    .enumerate()
    {
        let m = ObservationModel::new(&g, noise).unwrap();
        let data = m.sample(100_000, 1009 + k as u64).unwrap();
        let tv = PmfTable::empirical(&data)
            .unwrap()
            .total_variation(&m.pmf_table())
            .unwrap();
        worst = worst.max(tv);
    }
    verdict(worst <= 0.01, format!("max total variation {worst:.4}"))
}

fn block_psd() -> Outcome {
    let mut r = rng(1010);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let blocks: Vec<usize> = (0..r.random_range(1..6))
            .map(|_| r.random_range(1..5))
            .collect();
        let n: usize = blocks.iter().sum();
        let rank = r.random_range(1..=n + 2);
        let b = DMatrix::from_fn(n, rank, |_, _| r.random_range(-1.0..1.0));
        let x = &b * b.transpose();
        let mut ranges = Vec::new();
        let mut start = 0;
        for &len in &blocks {
            ranges.push(start..start + len);
            start += len;
        }
        worst = worst.max(max_eigenvalue(&x) - diagonal_block_bound(&x, &ranges));
    }
    verdict(
        worst <= 1e-9,
        format!("max(lambda_max - sum of block maxima) {worst:.3}"),
    )
}

fn real_data_poa() -> Outcome {
    let Ok(path) = std::env::var("POLYMATRIX_VOTES") else {
        return Outcome::Skip("set POLYMATRIX_VOTES to a vote CSV to run".into());
    };
    let expected: f64 = std::env::var("POLYMATRIX_POA_EXPECTED")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(1.9);
    let rule = std::env::var("POLYMATRIX_VOTE_RULE").unwrap_or_else(|_| "supreme-court".into());
    let run = || -> polymatrix_core::Result<f64> {
        let text = std::fs::read_to_string(&path)?;
        let table = ingest_votes(
            &text,
            &VoteMappingRule::by_name(&rule)?,
            IngestOptions::default(),
        )?;
        let p = table.players.len();
        let lambda = match std::env::var("POLYMATRIX_LAMBDA")
            .ok()
            .and_then(|v| v.parse().ok())
        {
            Some(l) => l,
            None => lambda_schedule(table.dataset.len(), p, p - 1, 0.0, 0.01)?,
        };
        let model = fit_game(
            &table.dataset,
            &LearnerConfig {
                lambda,
                ..Default::default()
            },
        )?;
        let ne = enumerate_psne(&model.game)?;
        Ok(price_of_anarchy(&model.game, &ne)?.ratio)
    };
    match run() {
        Ok(poa) => verdict(
            (poa - expected).abs() <= 0.1,
            format!("PoA {poa:.4}, expected {expected}"),
        ),
        Err(e) => Outcome::Fail(format!("error: {e}")),
    }
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "phase transition", phase_transition),
        (2, "hard-ensemble uniqueness", hard_uniqueness),
        (3, "gradient correctness", gradient_check),
        (4, "Hessian properties", hessian_check),
        (5, "population strong convexity", strong_convexity),
        (6, "prox correctness", prox_check),
        (7, "payoff-transfer bound", payoff_transfer),
        (8, "end-to-end recovery", end_to_end),
        (9, "sampler fidelity", sampler_fidelity),
        (10, "block-PSD bound", block_psd),
        (11, "real-data PoA", real_data_poa),
    ];
    let filter: Option<BTreeSet<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let mut failed = BTreeSet::new();
    let mut ran = BTreeSet::new();
    for (id, name, check) in criteria {
        if filter.as_ref().is_some_and(|f| !f.contains(&id)) {
            continue;
        }
        ran.insert(id);
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed.insert(id);
                ("FAIL", d)
            }
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!("criterion {id} ({name}): {tag} {detail} [{secs:.1}s]");
    }
    let expected: BTreeSet<u32> = EXPECTED_FAILURES
        .iter()
        .copied()
        .filter(|c| ran.contains(c))
        .collect();
    if failed == expected {
        println!("acceptance: failures match the documented set {expected:?}");
    } else {
        println!("acceptance: unexpected failures {failed:?}, documented {expected:?}");
        std::process::exit(1);
    }
}
