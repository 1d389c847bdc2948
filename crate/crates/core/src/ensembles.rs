//! Synthetic game families.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::game::{PolymatrixGame, StrategyProfile};

/// Random sparse games: every player has exactly `d` in-neighbours, zero
/// individual payoffs, and Gaussian edge payoffs with the last row zeroed.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomGameSpec {
    pub players: usize,
    pub degree: usize,
    pub strategies: usize,
    pub payoff_std: f64,
    pub seed: u64,
}

impl RandomGameSpec {
    pub fn new(players: usize, degree: usize, strategies: usize, seed: u64) -> Self {
        RandomGameSpec {
            players,
            degree,
            strategies,
            payoff_std: std::f64::consts::SQRT_2,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree < 1 || self.degree >= self.players {
            return Err(Error::InvalidParameter(format!(
                "degree must lie in [1, {}] for {} players, got {}",
                self.players.saturating_sub(1),
                self.players,
                self.degree
            )));
        }
        if self.strategies < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 strategies, got {}",
                self.strategies
            )));
        }
        if !(self.payoff_std > 0.0 && self.payoff_std.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "payoff std must be positive, got {}",
                self.payoff_std
            )));
        }
        Ok(())
    }

    pub fn echo(&self) -> Vec<String> {
        vec![
            "family = random".to_string(),
            format!("p = {}", self.players),
            format!("d = {}", self.degree),
            format!("m = {}", self.strategies),
            format!("payoff_std = {}", self.payoff_std),
            format!("seed = {}", self.seed),
        ]
    }
}

pub fn random_game(spec: &RandomGameSpec) -> Result<PolymatrixGame> {
    spec.validate()?;
    let (p, m) = (spec.players, spec.strategies);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal =
        Normal::new(0.0, spec.payoff_std).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut b = PolymatrixGame::builder(vec![m; p])?;
    for i in 0..p {
        let mut sources: Vec<usize> = sample(&mut rng, p - 1, spec.degree)
            .into_iter()
            .map(|k| if k >= i { k + 1 } else { k })
            .collect();
        sources.sort_unstable();
        for j in sources {
            let mut payoffs = vec![0.0; m * m];
            for v in payoffs.iter_mut().take((m - 1) * m) {
                *v = normal.sample(&mut rng);
            }
            b.set_edge_flat(i, j, payoffs)?;
        }
    }
    b.build()
}

/// Most frequent strategy; ties go to the lowest strategy.
pub fn maj(a: &[usize]) -> Result<usize> {
    let top = *a
        .iter()
        .max()
        .ok_or_else(|| Error::InvalidInput("majority of an empty vector".into()))?;
    let mut counts = vec![0usize; top + 1];
    for &s in a {
        counts[s] += 1;
    }
    let best = *counts.iter().max().unwrap();
    Ok(counts.iter().position(|&c| c == best).unwrap())
}

/// The bipartite restricted ensemble with a known unique equilibrium.
///
/// Influential players only care about matching their target strategy.
/// Every other player is paid one unit per influential player it agrees
/// with, plus a small bonus `1/(2x)` favouring low strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct HardEnsembleSpec {
    pub players: usize,
    pub strategies: usize,
    /// Influential players, 0-indexed, sorted.
    pub influential: Vec<usize>,
    /// Target strategy of each influential player, 0-indexed.
    pub target: Vec<usize>,
    pub seed: u64,
}

impl HardEnsembleSpec {
    /// Draws the influential set and a valid target from `seed`.
    pub fn random(players: usize, degree: usize, strategies: usize, seed: u64) -> Result<Self> {
        if degree < 2 || degree > players {
            return Err(Error::InvalidParameter(format!(
                "influential set size must lie in [2, {players}], got {degree}"
            )));
        }
        if strategies < 2 {
            return Err(Error::InvalidParameter(
                "need at least 2 strategies for two distinct targets".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut influential = sample(&mut rng, players, degree).into_vec();
        influential.sort_unstable();
        let target = loop {
            let t: Vec<usize> = (0..degree)
                .map(|_| rng.random_range(0..strategies))
                .collect();
            if t.iter().any(|&s| s != t[0]) {
                break t;
            }
        };
        let spec = HardEnsembleSpec {
            players,
            strategies,
            influential,
            target,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn degree(&self) -> usize {
        self.influential.len()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.influential.len();
        if d != self.target.len() {
            return Err(Error::InvalidParameter(format!(
                "{} influential players but {} targets",
                d,
                self.target.len()
            )));
        }
        if self.strategies < 2 {
            return Err(Error::InvalidParameter("need at least 2 strategies".into()));
        }
        if self.influential.windows(2).any(|w| w[0] >= w[1])
            || self.influential.iter().any(|&i| i >= self.players)
        {
            return Err(Error::InvalidParameter(
                "influential players must be distinct, sorted and in range".into(),
            ));
        }
        if self.target.iter().any(|&s| s >= self.strategies) {
            return Err(Error::InvalidParameter(
                "target strategy out of range".into(),
            ));
        }
        if !self.target.iter().any(|&s| s != self.target[0]) {
            return Err(Error::InvalidParameter(
                "target needs at least two distinct strategies".into(),
            ));
        }
        Ok(())
    }

    /// The unique equilibrium: targets on the influential set, their
    /// majority everywhere else.
    pub fn equilibrium(&self) -> Result<StrategyProfile> {
        self.validate()?;
        let majority = maj(&self.target)?;
        let mut x = vec![majority; self.players];
        for (&i, &a) in self.influential.iter().zip(&self.target) {
            x[i] = a;
        }
        Ok(StrategyProfile::new(x))
    }

    pub fn echo(&self) -> Vec<String> {
        let infl: Vec<_> = self
            .influential
            .iter()
            .map(|i| (i + 1).to_string())
            .collect();
        let target: Vec<_> = self.target.iter().map(|s| (s + 1).to_string()).collect();
        vec![
            "family = hard".to_string(),
            format!("p = {}", self.players),
            format!("d = {}", self.influential.len()),
            format!("m = {}", self.strategies),
            format!("influential = {}", infl.join(" ")),
            format!("target = {}", target.join(" ")),
            format!("seed = {}", self.seed),
        ]
    }
}

pub fn hard_game(spec: &HardEnsembleSpec) -> Result<PolymatrixGame> {
    spec.validate()?;
    let m = spec.strategies;
    let mut b = PolymatrixGame::builder(vec![m; spec.players])?;
    let mut is_influential = vec![false; spec.players];
    for (&i, &a) in spec.influential.iter().zip(&spec.target) {
        is_influential[i] = true;
        let mut v = vec![0.0; m];
        v[a] = 1.0;
        b.set_individual(i, v)?;
    }
    let identity: Vec<f64> = (0..m * m)
        .map(|k| if k / m == k % m { 1.0 } else { 0.0 })
        .collect();
    for j in (0..spec.players).filter(|&j| !is_influential[j]) {
        b.set_individual(j, (1..=m).map(|x| 1.0 / (2.0 * x as f64)).collect())?;
        for &i in &spec.influential {
            b.set_edge_flat(j, i, identity.clone())?;
        }
    }
    b.build()
}
