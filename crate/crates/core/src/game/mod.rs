//! Polymatrix games: representation, payoff evaluation, and equilibrium
//! enumeration.
//!
//! Players and strategies are 0-indexed everywhere inside the library. The
//! text formats and [`StrategyProfile`]'s `Display` use 1-indexed values.

mod equilibrium;
mod format;
pub mod linear;
mod space;
mod welfare;

pub use equilibrium::{
    best_responses, check_separability, check_separability_capped, enumerate_eps_ne,
    enumerate_eps_ne_capped, enumerate_psne, enumerate_psne_capped, is_eps_ne, is_psne, PsneSet,
    DEFAULT_ENUMERATION_CAP,
};
pub use format::{format_real, parse_game, parse_game_sections};
pub use space::ProfileSpace;
pub use welfare::{price_of_anarchy, welfare, welfare_shift, PoaReport};

use std::fmt;
use std::ops::Deref;

use crate::error::{Error, Result};

/// One pure strategy per player, 0-indexed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StrategyProfile(Vec<usize>);

impl StrategyProfile {
    pub fn new(strategies: Vec<usize>) -> Self {
        StrategyProfile(strategies)
    }

    /// Builds a profile from 1-indexed strategies.
    pub fn from_one_based(strategies: &[usize]) -> Result<Self> {
        strategies
            .iter()
            .map(|&s| {
                s.checked_sub(1)
                    .ok_or_else(|| Error::InvalidInput("strategies are 1-indexed".into()))
            })
            .collect::<Result<Vec<_>>>()
            .map(StrategyProfile)
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|s| s + 1).collect()
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }

    /// Checks length and ranges against `counts`.
    pub fn validate(&self, counts: &[usize]) -> Result<()> {
        validate_profile(&self.0, counts)
    }
}

impl Deref for StrategyProfile {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for StrategyProfile {
    fn from(v: Vec<usize>) -> Self {
        StrategyProfile(v)
    }
}

impl fmt::Display for StrategyProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, s) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", s + 1)?;
        }
        write!(f, ")")
    }
}

pub(crate) fn validate_profile(x: &[usize], counts: &[usize]) -> Result<()> {
    if x.len() != counts.len() {
        return Err(Error::InvalidInput(format!(
            "profile has {} entries, game has {} players",
            x.len(),
            counts.len()
        )));
    }
    for (i, (&s, &m)) in x.iter().zip(counts).enumerate() {
        if s >= m {
            return Err(Error::InvalidInput(format!(
                "strategy {} of player {} out of range 1..={}",
                s + 1,
                i + 1,
                m
            )));
        }
    }
    Ok(())
}

/// Pairwise payoff matrix `u^{i,j}` stored at its destination player `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    /// The influencing player `j`.
    pub source: usize,
    /// Row-major `m_i x m_j` payoffs, rows indexed by the destination's strategy.
    pub payoffs: Vec<f64>,
}

impl Edge {
    #[inline]
    pub fn get(&self, own: usize, other: usize, other_count: usize) -> f64 {
        self.payoffs[own * other_count + other]
    }
}

/// A polymatrix game.
///
/// Edge `(i, j)` means player `j` influences player `i`'s payoff; matrices
/// are kept per destination so evaluating `u^i` touches only `Nb_i`.
/// The value is immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct PolymatrixGame {
    counts: Vec<usize>,
    individual: Vec<Vec<f64>>,
    incoming: Vec<Vec<Edge>>,
}

impl PolymatrixGame {
    /// The all-zero game with the given strategy counts.
    pub fn zero(counts: Vec<usize>) -> Result<Self> {
        GameBuilder::new(counts)?.build()
    }

    pub fn builder(counts: Vec<usize>) -> Result<GameBuilder> {
        GameBuilder::new(counts)
    }

    pub fn num_players(&self) -> usize {
        self.counts.len()
    }

    pub fn strategy_counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn individual(&self, i: usize) -> &[f64] {
        &self.individual[i]
    }

    /// Incoming edges of `i`, sorted by source.
    pub fn incoming(&self, i: usize) -> &[Edge] {
        &self.incoming[i]
    }

    pub fn edge(&self, i: usize, j: usize) -> Option<&Edge> {
        self.incoming
            .get(i)?
            .binary_search_by_key(&j, |e| e.source)
            .ok()
            .map(|k| &self.incoming[i][k])
    }

    /// All edges `(i, j)` in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.incoming
            .iter()
            .enumerate()
            .flat_map(|(i, es)| es.iter().map(move |e| (i, e.source)))
            .collect()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.incoming[i].len()
    }

    pub fn max_degree(&self) -> usize {
        self.incoming.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn max_strategies(&self) -> usize {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    pub fn profile_space(&self) -> ProfileSpace {
        ProfileSpace::new(self.counts.clone())
    }

    fn check_player(&self, i: usize) -> Result<()> {
        if i >= self.counts.len() {
            return Err(Error::InvalidInput(format!(
                "player {} out of range 1..={}",
                i + 1,
                self.counts.len()
            )));
        }
        Ok(())
    }

    /// Total payoff `u^i(x)`.
    pub fn payoff(&self, i: usize, x: &[usize]) -> Result<f64> {
        self.check_player(i)?;
        validate_profile(x, &self.counts)?;
        Ok(self.payoff_at(i, x[i], x))
    }

    /// Payoff of `i` when it plays `own` and everyone else plays as in `x`.
    /// Inputs are not validated.
    #[inline]
    pub fn payoff_at(&self, i: usize, own: usize, x: &[usize]) -> f64 {
        let mut total = self.individual[i][own];
        for e in &self.incoming[i] {
            total += e.get(own, x[e.source], self.counts[e.source]);
        }
        total
    }

    /// `u^i(a, x_{-i})` for every strategy `a` of player `i`.
    pub fn payoff_vector(&self, i: usize, x: &[usize]) -> Vec<f64> {
        (0..self.counts[i])
            .map(|a| self.payoff_at(i, a, x))
            .collect()
    }

    /// Smallest stored payoff entry over individual and pairwise payoffs.
    pub fn min_entry(&self) -> f64 {
        let ind = self.individual.iter().flatten();
        let pair = self
            .incoming
            .iter()
            .flatten()
            .flat_map(|e| e.payoffs.iter());
        ind.chain(pair).copied().fold(f64::INFINITY, f64::min)
    }

    /// Same game with players relabelled: new player `perm[i]` is old player `i`.
    pub fn permute_players(&self, perm: &[usize]) -> Result<Self> {
        let p = self.num_players();
        check_permutation(perm, p)?;
        let mut counts = vec![0; p];
        for i in 0..p {
            counts[perm[i]] = self.counts[i];
        }
        let mut b = GameBuilder::new(counts)?;
        for i in 0..p {
            b.set_individual(perm[i], self.individual[i].clone())?;
            for e in &self.incoming[i] {
                b.set_edge_flat(perm[i], perm[e.source], e.payoffs.clone())?;
            }
        }
        b.build()
    }

    /// Same game with player `i`'s strategies relabelled: new label `perm[a]` is old `a`.
    pub fn permute_strategies(&self, i: usize, perm: &[usize]) -> Result<Self> {
        self.check_player(i)?;
        let mi = self.counts[i];
        check_permutation(perm, mi)?;
        let mut b = GameBuilder::new(self.counts.clone())?;
        for k in 0..self.num_players() {
            let mut ind = self.individual[k].clone();
            if k == i {
                for a in 0..mi {
                    ind[perm[a]] = self.individual[k][a];
                }
            }
            b.set_individual(k, ind)?;
            for e in &self.incoming[k] {
                let mk = self.counts[k];
                let mj = self.counts[e.source];
                let mut m = e.payoffs.clone();
                for r in 0..mk {
                    for c in 0..mj {
                        let (nr, nc) = (
                            if k == i { perm[r] } else { r },
                            if e.source == i { perm[c] } else { c },
                        );
                        m[nr * mj + nc] = e.payoffs[r * mj + c];
                    }
                }
                b.set_edge_flat(k, e.source, m)?;
            }
        }
        b.build()
    }
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::InvalidInput("permutation has wrong length".into()));
    }
    for &v in perm {
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return Err(Error::InvalidInput("not a permutation".into()));
        }
    }
    Ok(())
}

/// Incremental constructor for [`PolymatrixGame`].
///
/// All-zero pairwise matrices are dropped at build time, so an edge exists
/// exactly when its matrix has a nonzero entry.
#[derive(Debug, Clone)]
pub struct GameBuilder {
    counts: Vec<usize>,
    individual: Vec<Vec<f64>>,
    incoming: Vec<Vec<Edge>>,
}

impl GameBuilder {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidInput(
                "a game needs at least one player".into(),
            ));
        }
        if let Some(i) = counts.iter().position(|&m| m == 0) {
            return Err(Error::InvalidInput(format!(
                "player {} has no strategies",
                i + 1
            )));
        }
        let individual = counts.iter().map(|&m| vec![0.0; m]).collect();
        let incoming = vec![Vec::new(); counts.len()];
        Ok(GameBuilder {
            counts,
            individual,
            incoming,
        })
    }

    fn check_player(&self, i: usize) -> Result<()> {
        if i >= self.counts.len() {
            return Err(Error::InvalidInput(format!(
                "player {} out of range 1..={}",
                i + 1,
                self.counts.len()
            )));
        }
        Ok(())
    }

    pub fn set_individual(&mut self, i: usize, values: Vec<f64>) -> Result<&mut Self> {
        self.check_player(i)?;
        if values.len() != self.counts[i] {
            return Err(Error::InvalidInput(format!(
                "individual payoffs of player {} need {} values, got {}",
                i + 1,
                self.counts[i],
                values.len()
            )));
        }
        check_finite(&values)?;
        self.individual[i] = values;
        Ok(self)
    }

    /// Sets `u^{i,j}` from rows indexed by `i`'s strategy.
    pub fn set_edge(&mut self, i: usize, j: usize, rows: &[Vec<f64>]) -> Result<&mut Self> {
        self.check_player(i)?;
        self.check_player(j)?;
        if rows.len() != self.counts[i] || rows.iter().any(|r| r.len() != self.counts[j]) {
            return Err(Error::InvalidInput(format!(
                "edge ({}, {}) needs a {}x{} matrix",
                i + 1,
                j + 1,
                self.counts[i],
                self.counts[j]
            )));
        }
        self.set_edge_flat(i, j, rows.concat())
    }

    /// Sets `u^{i,j}` from a row-major buffer.
    pub fn set_edge_flat(&mut self, i: usize, j: usize, payoffs: Vec<f64>) -> Result<&mut Self> {
        self.check_player(i)?;
        self.check_player(j)?;
        if i == j {
            return Err(Error::InvalidInput(format!(
                "self edge ({}, {}) is not allowed",
                i + 1,
                j + 1
            )));
        }
        if payoffs.len() != self.counts[i] * self.counts[j] {
            return Err(Error::InvalidInput(format!(
                "edge ({}, {}) needs {} entries, got {}",
                i + 1,
                j + 1,
                self.counts[i] * self.counts[j],
                payoffs.len()
            )));
        }
        check_finite(&payoffs)?;
        let list = &mut self.incoming[i];
        match list.binary_search_by_key(&j, |e| e.source) {
            Ok(k) => list[k].payoffs = payoffs,
            Err(k) => list.insert(k, Edge { source: j, payoffs }),
        }
        Ok(self)
    }

    pub fn build(&self) -> Result<PolymatrixGame> {
        let incoming = self
            .incoming
            .iter()
            .map(|es| {
                es.iter()
                    .filter(|e| e.payoffs.iter().any(|&v| v != 0.0))
                    .cloned()
                    .collect()
            })
            .collect();
        Ok(PolymatrixGame {
            counts: self.counts.clone(),
            individual: self.individual.clone(),
            incoming,
        })
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput("payoff entries must be finite".into()))
    }
}
