//! Independent reference computations used as test oracles. Nothing here
//! calls the library's payoff, feature, softmax or enumeration code.
#![allow(dead_code)]

use polymatrix_core::game::PolymatrixGame;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every profile in lexicographic order, first player most significant.
pub fn all_profiles(counts: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &m in counts {
        let mut next = Vec::with_capacity(out.len() * m);
        for prefix in &out {
            for s in 0..m {
                let mut v = prefix.clone();
                v.push(s);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// `u^i(x)` by re-summing the stored matrices.
pub fn direct_payoff(game: &PolymatrixGame, i: usize, x: &[usize]) -> f64 {
    let counts = game.strategy_counts();
    let mut total = game.individual(i)[x[i]];
    for e in game.incoming(i) {
        let row = &e.payoffs[x[i] * counts[e.source]..(x[i] + 1) * counts[e.source]];
        total += row[x[e.source]];
    }
    total
}

pub fn direct_payoff_with(game: &PolymatrixGame, i: usize, a: usize, x: &[usize]) -> f64 {
    let mut y = x.to_vec();
    y[i] = a;
    direct_payoff(game, i, &y)
}

pub fn brute_best_responses(game: &PolymatrixGame, i: usize, x: &[usize]) -> Vec<usize> {
    let m = game.strategy_counts()[i];
    let u: Vec<f64> = (0..m).map(|a| direct_payoff_with(game, i, a, x)).collect();
    let best = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (0..m).filter(|&a| u[a] == best).collect()
}

pub fn brute_is_eps_ne(game: &PolymatrixGame, x: &[usize], eps: f64) -> bool {
    (0..game.num_players()).all(|i| {
        let own = direct_payoff(game, i, x);
        (0..game.strategy_counts()[i]).all(|a| direct_payoff_with(game, i, a, x) <= own + eps)
    })
}

pub fn brute_eps_ne(game: &PolymatrixGame, eps: f64) -> Vec<Vec<usize>> {
    all_profiles(game.strategy_counts())
        .into_iter()
        .filter(|x| brute_is_eps_ne(game, x, eps))
        .collect()
}

/// Shifted welfare oracle: every entry of every stored payoff table is
/// raised by the same constant.
pub fn brute_welfare(game: &PolymatrixGame, x: &[usize]) -> f64 {
    let mut min = f64::INFINITY;
    for i in 0..game.num_players() {
        for &v in game.individual(i) {
            min = min.min(v);
        }
        for e in game.incoming(i) {
            for &v in &e.payoffs {
                min = min.min(v);
            }
        }
    }
    let c = if min < 0.0 { -min } else { 0.0 };
    (0..game.num_players())
        .map(|i| direct_payoff(game, i, x) + c * (1 + game.incoming(i).len()) as f64)
        .sum()
}

/// Feature vector built directly from the block definitions.
pub fn manual_features(counts: &[usize], i: usize, a: usize, x: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; counts[i]];
    out[a] = 1.0;
    for (j, &mj) in counts.iter().enumerate() {
        if j == i {
            continue;
        }
        let mut block = vec![0.0; counts[i] * mj];
        block[a * mj + x[j]] = 1.0;
        out.extend(block);
    }
    out
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Softmax by plain exponent ratios (fine for small parameters).
pub fn naive_softmax(counts: &[usize], i: usize, theta: &[f64], x: &[usize]) -> Vec<f64> {
    let e: Vec<f64> = (0..counts[i])
        .map(|a| dot(theta, &manual_features(counts, i, a, x)).exp())
        .collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|v| v / z).collect()
}

pub fn naive_loss(counts: &[usize], i: usize, theta: &[f64], data: &[Vec<usize>]) -> f64 {
    data.iter()
        .map(|x| -naive_softmax(counts, i, theta, x)[x[i]].ln())
        .sum::<f64>()
        / data.len() as f64
}

/// Central finite differences of `f` at `x`.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|k| {
            y[k] = x[k] + h;
            let up = f(&y);
            y[k] = x[k] - h;
            let down = f(&y);
            y[k] = x[k];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Minimizer of `½‖u - v‖² + t‖u‖` found numerically. By rotational
/// symmetry the minimizer lies on the ray through `v`, so a golden-section
/// search over the radius suffices.
pub fn numeric_prox(v: &[f64], t: f64) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return vec![0.0; v.len()];
    }
    let obj = |s: f64| 0.5 * (s - norm) * (s - norm) + t * s;
    let (mut lo, mut hi) = (0.0f64, norm);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if obj(a) <= obj(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let s = 0.5 * (lo + hi);
    let s = if obj(0.0) <= obj(s) { 0.0 } else { s };
    v.iter().map(|x| x * s / norm).collect()
}

/// Majority by explicit counting, ties to the lowest strategy.
pub fn count_majority(a: &[usize]) -> usize {
    let mut best = (0usize, usize::MAX);
    let mut values: Vec<usize> = a.to_vec();
    values.sort_unstable();
    values.dedup();
    for s in values {
        let c = a.iter().filter(|&&v| v == s).count();
        if c > best.0 {
            best = (c, s);
        }
    }
    best.1
}

/// Small random game with arbitrary structure.
pub fn random_dense_game(
    rng: &mut ChaCha8Rng,
    counts: Vec<usize>,
    edge_prob: f64,
) -> PolymatrixGame {
    let p = counts.len();
    let mut b = PolymatrixGame::builder(counts.clone()).unwrap();
    for i in 0..p {
        let ind: Vec<f64> = (0..counts[i])
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        b.set_individual(i, ind).unwrap();
        for j in 0..p {
            if j != i && rng.random::<f64>() < edge_prob {
                let m: Vec<f64> = (0..counts[i] * counts[j])
                    .map(|_| rng.random_range(-2.0..2.0))
                    .collect();
                b.set_edge_flat(i, j, m).unwrap();
            }
        }
    }
    b.build().unwrap()
}

pub fn random_counts(
    rng: &mut ChaCha8Rng,
    players: std::ops::RangeInclusive<usize>,
    max_m: usize,
) -> Vec<usize> {
    let p = rng.random_range(players);
    (0..p).map(|_| rng.random_range(2..=max_m)).collect()
}
