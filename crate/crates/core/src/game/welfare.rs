use super::{validate_profile, PolymatrixGame, PsneSet, StrategyProfile};
use crate::error::{Error, Result};

/// Global shift making every stored payoff entry non-negative.
pub fn welfare_shift(game: &PolymatrixGame) -> f64 {
    let min = game.min_entry();
    if min < 0.0 {
        -min
    } else {
        0.0
    }
}

/// Sum of all players' payoffs after the global non-negativity shift.
pub fn welfare(game: &PolymatrixGame, x: &[usize]) -> Result<f64> {
    validate_profile(x, game.strategy_counts())?;
    Ok(shifted_welfare(game, x, welfare_shift(game)))
}

fn shifted_welfare(game: &PolymatrixGame, x: &[usize], shift: f64) -> f64 {
    (0..game.num_players())
        .map(|i| game.payoff_at(i, x[i], x) + shift * (1 + game.degree(i)) as f64)
        .sum()
}

/// Welfare extremes and their ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct PoaReport {
    pub shift: f64,
    pub max_welfare: f64,
    pub max_profile: StrategyProfile,
    pub min_equilibrium_welfare: f64,
    pub min_equilibrium_profile: StrategyProfile,
    pub ratio: f64,
}

/// `max_{x in A} W(x) / min_{x in NE} W(x)` with welfare shifted as in [`welfare`].
///
/// Scans the whole profile space; the caller is expected to have enumerated
/// `psne` under the same cap.
pub fn price_of_anarchy(game: &PolymatrixGame, psne: &PsneSet) -> Result<PoaReport> {
    if psne.is_empty() {
        return Err(Error::InvalidInput(
            "price of anarchy needs a nonempty equilibrium set".into(),
        ));
    }
    let shift = welfare_shift(game);
    let space = game.profile_space();
    space.size_capped(super::DEFAULT_ENUMERATION_CAP)?;

    let mut max_welfare = f64::NEG_INFINITY;
    let mut max_profile = Vec::new();
    for x in space.iter() {
        let w = shifted_welfare(game, &x, shift);
        if w > max_welfare {
            max_welfare = w;
            max_profile = x;
        }
    }

    let mut min_eq = f64::INFINITY;
    let mut min_profile = None;
    for x in psne.iter() {
        validate_profile(x, game.strategy_counts())?;
        let w = shifted_welfare(game, x, shift);
        if w < min_eq {
            min_eq = w;
            min_profile = Some(x.clone());
        }
    }

    if min_eq == 0.0 {
        return Err(Error::DegeneratePoa {
            numerator: max_welfare,
            denominator: min_eq,
        });
    }
    Ok(PoaReport {
        shift,
        max_welfare,
        max_profile: StrategyProfile::new(max_profile),
        min_equilibrium_welfare: min_eq,
        min_equilibrium_profile: min_profile.expect("nonempty set"),
        ratio: max_welfare / min_eq,
    })
}
