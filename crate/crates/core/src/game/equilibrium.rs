use rayon::prelude::*;

use super::{validate_profile, PolymatrixGame, StrategyProfile};
use crate::error::{Error, Result};

/// Default limit on `prod m_i` for brute-force enumeration.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 24;

/// A set of (ε-)equilibrium profiles in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct PsneSet {
    profiles: Vec<StrategyProfile>,
    epsilon: f64,
}

impl PsneSet {
    /// Builds a set from arbitrary profiles; sorts and removes duplicates.
    pub fn from_profiles(mut profiles: Vec<StrategyProfile>, epsilon: f64) -> Self {
        profiles.sort();
        profiles.dedup();
        PsneSet { profiles, epsilon }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn profiles(&self) -> &[StrategyProfile] {
        &self.profiles
    }

    pub fn iter(&self) -> impl Iterator<Item = &StrategyProfile> {
        self.profiles.iter()
    }

    pub fn contains(&self, x: &[usize]) -> bool {
        self.profiles
            .binary_search_by(|p| p.as_ref().cmp(x))
            .is_ok()
    }

    /// Set inclusion, ignoring `epsilon`.
    pub fn is_subset_of(&self, other: &PsneSet) -> bool {
        self.profiles.iter().all(|x| other.contains(x))
    }

    /// Set equality, ignoring `epsilon`.
    pub fn same_profiles(&self, other: &PsneSet) -> bool {
        self.profiles == other.profiles
    }
}

impl AsRef<[usize]> for StrategyProfile {
    fn as_ref(&self) -> &[usize] {
        self
    }
}

fn check_epsilon(eps: f64) -> Result<()> {
    if eps >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "epsilon must be non-negative, got {eps}"
        )))
    }
}

/// Every maximizer of `a -> u^i(a, x_{-i})`, ties included.
pub fn best_responses(game: &PolymatrixGame, i: usize, x: &[usize]) -> Result<Vec<usize>> {
    game.check_player(i)?;
    validate_profile(x, game.strategy_counts())?;
    let u = game.payoff_vector(i, x);
    let best = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((0..u.len()).filter(|&a| u[a] == best).collect())
}

pub fn is_psne(game: &PolymatrixGame, x: &[usize]) -> Result<bool> {
    is_eps_ne(game, x, 0.0)
}

/// True if no player gains more than `eps` by a unilateral deviation.
pub fn is_eps_ne(game: &PolymatrixGame, x: &[usize], eps: f64) -> Result<bool> {
    check_epsilon(eps)?;
    validate_profile(x, game.strategy_counts())?;
    Ok(eps_ne_unchecked(game, x, eps))
}

pub(crate) fn eps_ne_unchecked(game: &PolymatrixGame, x: &[usize], eps: f64) -> bool {
    (0..game.num_players()).all(|i| {
        let own = game.payoff_at(i, x[i], x);
        (0..game.strategy_counts()[i]).all(|a| own >= game.payoff_at(i, a, x) - eps)
    })
}

pub fn enumerate_psne(game: &PolymatrixGame) -> Result<PsneSet> {
    enumerate_eps_ne_capped(game, 0.0, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_psne_capped(game: &PolymatrixGame, cap: u128) -> Result<PsneSet> {
    enumerate_eps_ne_capped(game, 0.0, cap)
}

pub fn enumerate_eps_ne(game: &PolymatrixGame, eps: f64) -> Result<PsneSet> {
    enumerate_eps_ne_capped(game, eps, DEFAULT_ENUMERATION_CAP)
}

/// Brute-force scan of the profile space. Work is split across the rayon
/// pool; the result order is lexicographic regardless of scheduling.
pub fn enumerate_eps_ne_capped(game: &PolymatrixGame, eps: f64, cap: u128) -> Result<PsneSet> {
    check_epsilon(eps)?;
    let space = game.profile_space();
    let size = space.size_capped(cap)?;
    let p = game.num_players();
    let profiles = (0..size)
        .into_par_iter()
        .map_init(
            || vec![0usize; p],
            |buf, k| {
                space.decode_into(k, buf);
                eps_ne_unchecked(game, buf, eps).then(|| StrategyProfile::new(buf.clone()))
            },
        )
        .flatten()
        .collect();
    Ok(PsneSet {
        profiles,
        epsilon: eps,
    })
}

pub fn check_separability(game: &PolymatrixGame, eps: f64) -> Result<bool> {
    check_separability_capped(game, eps, DEFAULT_ENUMERATION_CAP)
}

/// True if every equilibrium strategy beats, by more than `eps`, each
/// deviation that leaves the equilibrium set.
pub fn check_separability_capped(game: &PolymatrixGame, eps: f64, cap: u128) -> Result<bool> {
    check_epsilon(eps)?;
    let ne = enumerate_psne_capped(game, cap)?;
    let mut y = Vec::with_capacity(game.num_players());
    for x in ne.iter() {
        for i in 0..game.num_players() {
            let own = game.payoff_at(i, x[i], x);
            for a in (0..game.strategy_counts()[i]).filter(|&a| a != x[i]) {
                y.clear();
                y.extend_from_slice(x);
                y[i] = a;
                if !ne.contains(&y) && own <= game.payoff_at(i, a, x) + eps {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
