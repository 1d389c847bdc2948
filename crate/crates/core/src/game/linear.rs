//! Linear form of polymatrix payoffs: `u^i(x) = (θ^i)ᵀ f^i(x_i, x_{-i})`.

use std::sync::Arc;

use super::{validate_profile, Edge, GameBuilder, PolymatrixGame};
use crate::error::{Error, Result};
use crate::params::{GroupLayout, GroupedParameterVector};

/// Indicator features `f^i(a, x_{-i})`, one block per group.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    layout: Arc<GroupLayout>,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn layout(&self) -> &GroupLayout {
        &self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn block(&self, g: usize) -> &[f64] {
        &self.values[self.layout.range(g)]
    }

    pub fn dot(&self, theta: &GroupedParameterVector) -> f64 {
        self.values
            .iter()
            .zip(theta.values())
            .map(|(f, t)| f * t)
            .sum()
    }
}

/// Features of player `i` playing `a` against the others in `x`.
/// `x[i]` is ignored.
pub fn featurize(counts: &[usize], i: usize, a: usize, x: &[usize]) -> Result<FeatureVector> {
    let layout = Arc::new(GroupLayout::new(counts, i)?);
    if a >= counts[i] {
        return Err(Error::InvalidInput(format!(
            "strategy {} of player {} out of range 1..={}",
            a + 1,
            i + 1,
            counts[i]
        )));
    }
    let mut full = x.to_vec();
    if let Some(own) = full.get_mut(i) {
        *own = a;
    }
    validate_profile(&full, counts)?;
    let mut values = vec![0.0; layout.len()];
    for k in layout.active_indices(a, &full) {
        values[k] = 1.0;
    }
    Ok(FeatureVector { layout, values })
}

/// `θ^i` holding player `i`'s payoffs; groups of non-neighbours are zero.
pub fn pack_parameters(game: &PolymatrixGame, i: usize) -> Result<GroupedParameterVector> {
    game.check_player(i)?;
    let layout = Arc::new(GroupLayout::new(game.strategy_counts(), i)?);
    let mut theta = GroupedParameterVector::zeros(layout.clone());
    theta.group_mut(0).copy_from_slice(game.individual(i));
    for e in game.incoming(i) {
        theta
            .group_mut(layout.group_of(e.source))
            .copy_from_slice(&e.payoffs);
    }
    Ok(theta)
}

/// Player payoffs recovered from a parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayerPayoffs {
    pub owner: usize,
    pub individual: Vec<f64>,
    /// Nonzero pairwise blocks, sorted by source.
    pub incoming: Vec<Edge>,
}

pub fn unpack_parameters(theta: &GroupedParameterVector) -> PlayerPayoffs {
    let layout = theta.layout();
    let incoming = (1..layout.num_groups())
        .filter(|&g| theta.group(g).iter().any(|&v| v != 0.0))
        .map(|g| Edge {
            source: layout.group_player(g).unwrap(),
            payoffs: theta.group(g).to_vec(),
        })
        .collect();
    PlayerPayoffs {
        owner: layout.owner(),
        individual: theta.group(0).to_vec(),
        incoming,
    }
}

/// Assembles a game from one parameter vector per player.
pub fn game_from_parameters(thetas: &[GroupedParameterVector]) -> Result<PolymatrixGame> {
    let first = thetas
        .first()
        .ok_or_else(|| Error::InvalidInput("no parameter vectors".into()))?;
    let counts = first.layout().counts().to_vec();
    if thetas.len() != counts.len() {
        return Err(Error::InvalidInput(format!(
            "expected {} parameter vectors, got {}",
            counts.len(),
            thetas.len()
        )));
    }
    let mut b = GameBuilder::new(counts.clone())?;
    for (i, theta) in thetas.iter().enumerate() {
        if theta.owner() != i || theta.layout().counts() != counts.as_slice() {
            return Err(Error::InvalidInput(format!(
                "parameter vector {} has a mismatched layout",
                i + 1
            )));
        }
        let pp = unpack_parameters(theta);
        b.set_individual(i, pp.individual)?;
        for e in pp.incoming {
            b.set_edge_flat(i, e.source, e.payoffs)?;
        }
    }
    b.build()
}
