mod common;

use common::*;
use polymatrix_core::ensembles::{hard_game, maj, random_game, HardEnsembleSpec, RandomGameSpec};
use polymatrix_core::game::{best_responses, enumerate_psne};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn random_game_structure_over_many_seeds() {
    for seed in 0..100 {
        let spec = RandomGameSpec::new(6, 3, 3, seed);
        let g = random_game(&spec).unwrap();
        for i in 0..6 {
            assert_eq!(g.degree(i), 3);
            assert!(g.individual(i).iter().all(|&v| v == 0.0));
            for e in g.incoming(i) {
                assert_ne!(e.source, i);
                assert!(e.payoffs[6..9].iter().all(|&v| v == 0.0));
            }
        }
        assert_eq!(g, random_game(&spec).unwrap());
    }
}

#[test]
fn random_game_entry_moments() {
    let mut draws = Vec::new();
    let mut seed = 0;
    while draws.len() < 100_000 {
        let g = random_game(&RandomGameSpec::new(8, 7, 3, seed)).unwrap();
        for i in 0..8 {
            for e in g.incoming(i) {
                draws.extend_from_slice(&e.payoffs[..6]);
            }
        }
        seed += 1;
    }
    let n = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let var = draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    // standard errors of the mean and of the variance for a normal sample
    let se_mean = (2.0 / n).sqrt();
    let se_var = 2.0 * (2.0 / (n - 1.0)).sqrt();
    assert!(mean.abs() <= 3.0 * se_mean, "{mean}");
    assert!((var - 2.0).abs() <= 3.0 * se_var, "{var}");
}

#[test]
fn maj_examples_and_counting_oracle() {
    assert_eq!(maj(&[0, 1, 1]).unwrap(), 1);
    assert_eq!(maj(&[0, 1]).unwrap(), 0);
    let mut r = rng(41);
    for _ in 0..1000 {
        let len = r.random_range(1..9);
        let a: Vec<usize> = (0..len).map(|_| r.random_range(0..4)).collect();
        assert_eq!(maj(&a).unwrap(), count_majority(&a));
    }
}

#[test]
fn hard_game_payoffs_follow_the_construction() {
    let spec = HardEnsembleSpec::random(6, 3, 3, 77).unwrap();
    let g = hard_game(&spec).unwrap();
    let mut r = rng(42);
    for _ in 0..200 {
        let x: Vec<usize> = (0..6).map(|_| r.random_range(0..3)).collect();
        for j in 0..6 {
            let expected = if let Some(k) = spec.influential.iter().position(|&i| i == j) {
                // influential: only the own target matters
                assert_eq!(best_responses(&g, j, &x).unwrap(), vec![spec.target[k]]);
                if x[j] == spec.target[k] {
                    1.0
                } else {
                    0.0
                }
            } else {
                let matches = spec.influential.iter().filter(|&&i| x[i] == x[j]).count() as f64;
                matches + 1.0 / (2.0 * (x[j] + 1) as f64)
            };
            assert!((g.payoff(j, &x).unwrap() - expected).abs() < 1e-12);
            assert!((direct_payoff(&g, j, &x) - expected).abs() < 1e-12);
        }
        // only edges from influential sources into the rest
        for (i, j) in g.edges() {
            assert!(spec.influential.contains(&j) && !spec.influential.contains(&i));
        }
    }
}

#[test]
fn hard_game_unique_equilibrium_on_random_specs() {
    let mut r = rng(43);
    for k in 0..50 {
        let p = r.random_range(3..=8);
        let d = r.random_range(2..=p);
        let m = r.random_range(2..=3);
        let spec = HardEnsembleSpec::random(p, d, m, k).unwrap();
        let ne = enumerate_psne(&hard_game(&spec).unwrap()).unwrap();
        let majority = count_majority(&spec.target);
        let mut expected = vec![majority; p];
        for (&i, &a) in spec.influential.iter().zip(&spec.target) {
            expected[i] = a;
        }
        assert_eq!(ne.len(), 1);
        assert_eq!(ne.profiles()[0].to_vec(), expected);
        assert_eq!(spec.equilibrium().unwrap().to_vec(), expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn prop_random_game_in_degree(p in 2usize..9, seed in any::<u64>(), dfrac in 0.0f64..1.0) {
        let d = 1 + ((p - 1) as f64 * dfrac) as usize;
        let d = d.min(p - 1);
        let g = random_game(&RandomGameSpec::new(p, d, 3, seed)).unwrap();
        for i in 0..p {
            prop_assert_eq!(g.degree(i), d);
        }
    }

    #[test]
    fn prop_hard_game_uniqueness(p in 2usize..7, m in 2usize..4, seed in any::<u64>(), dfrac in 0.0f64..1.0) {
        let d = (2 + ((p - 1) as f64 * dfrac) as usize).min(p);
        let spec = HardEnsembleSpec::random(p, d, m, seed).unwrap();
        let g = hard_game(&spec).unwrap();
        let ne = enumerate_psne(&g).unwrap();
        prop_assert_eq!(ne.len(), 1);
        prop_assert_eq!(&ne.profiles()[0], &spec.equilibrium().unwrap());
        prop_assert_eq!(g, hard_game(&spec).unwrap());
    }
}
