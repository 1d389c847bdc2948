//! Grouped parameter vectors for one player's linear-form payoff.
//!
//! For player `i` the groups are, in order: the individual block (length
//! `m_i`), then one pairwise block per other player `j` in increasing `j`
//! (length `m_i * m_j`, row-major in `(own, other)`).

use std::sync::Arc;

use crate::error::{Error, Result};

/// Block structure of `θ^i` and `f^i` for a fixed player.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupLayout {
    owner: usize,
    counts: Vec<usize>,
    /// Start offset of each group; one extra entry holds the total length.
    offsets: Vec<usize>,
}

impl GroupLayout {
    pub fn new(counts: &[usize], owner: usize) -> Result<Self> {
        if owner >= counts.len() {
            return Err(Error::InvalidInput(format!(
                "player {} out of range 1..={}",
                owner + 1,
                counts.len()
            )));
        }
        let mi = counts[owner];
        let mut offsets = vec![0, mi];
        for (j, &mj) in counts.iter().enumerate() {
            if j != owner {
                offsets.push(offsets.last().unwrap() + mi * mj);
            }
        }
        Ok(GroupLayout {
            owner,
            counts: counts.to_vec(),
            offsets,
        })
    }

    pub fn owner(&self) -> usize {
        self.owner
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn own_count(&self) -> usize {
        self.counts[self.owner]
    }

    /// Number of groups, always `p`.
    pub fn num_groups(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Total parameter count `m_i + sum_{j != i} m_i m_j`.
    pub fn len(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self, g: usize) -> std::ops::Range<usize> {
        self.offsets[g]..self.offsets[g + 1]
    }

    pub fn offset(&self, g: usize) -> usize {
        self.offsets[g]
    }

    /// Player addressed by group `g`; `None` for the individual block.
    pub fn group_player(&self, g: usize) -> Option<usize> {
        match g {
            0 => None,
            g if g <= self.owner => Some(g - 1),
            g => Some(g),
        }
    }

    /// Group holding the pairwise block for player `j != owner`.
    pub fn group_of(&self, j: usize) -> usize {
        debug_assert_ne!(j, self.owner);
        if j < self.owner {
            j + 1
        } else {
            j
        }
    }

    /// Flat index of the single active feature of each group for own
    /// strategy `a` against profile `x` (the owner's entry of `x` is ignored).
    pub fn active_indices<'a>(
        &'a self,
        a: usize,
        x: &'a [usize],
    ) -> impl Iterator<Item = usize> + 'a {
        let head = std::iter::once(a);
        let pairs = (1..self.num_groups()).map(move |g| {
            let j = self.group_player(g).unwrap();
            self.offsets[g] + a * self.counts[j] + x[j]
        });
        head.chain(pairs)
    }

    /// `θᵀ f^i(a, x_{-i})`.
    #[inline]
    pub fn score(&self, theta: &[f64], a: usize, x: &[usize]) -> f64 {
        let mut s = theta[a];
        for g in 1..self.num_groups() {
            let j = self.group_player(g).unwrap();
            s += theta[self.offsets[g] + a * self.counts[j] + x[j]];
        }
        s
    }
}

/// `θ^i`: one player's parameters laid out by [`GroupLayout`].
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedParameterVector {
    layout: Arc<GroupLayout>,
    values: Vec<f64>,
}

impl GroupedParameterVector {
    pub fn zeros(layout: Arc<GroupLayout>) -> Self {
        let values = vec![0.0; layout.len()];
        GroupedParameterVector { layout, values }
    }

    pub fn from_values(layout: Arc<GroupLayout>, values: Vec<f64>) -> Result<Self> {
        if values.len() != layout.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} parameters, got {}",
                layout.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("parameters must be finite".into()));
        }
        Ok(GroupedParameterVector { layout, values })
    }

    pub fn layout(&self) -> &Arc<GroupLayout> {
        &self.layout
    }

    pub fn owner(&self) -> usize {
        self.layout.owner()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn group(&self, g: usize) -> &[f64] {
        &self.values[self.layout.range(g)]
    }

    pub fn group_mut(&mut self, g: usize) -> &mut [f64] {
        let r = self.layout.range(g);
        &mut self.values[r]
    }

    pub fn group_norms(&self) -> Vec<f64> {
        (0..self.layout.num_groups())
            .map(|g| l2(self.group(g)))
            .collect()
    }

    /// `‖θ‖_{1,2}`: sum of group Euclidean norms.
    pub fn norm_12(&self) -> f64 {
        self.group_norms().iter().sum()
    }

    /// `‖θ‖_{∞,2}`: largest group Euclidean norm.
    pub fn norm_inf2(&self) -> f64 {
        self.group_norms().into_iter().fold(0.0, f64::max)
    }

    /// Indices of groups with nonzero norm.
    pub fn support(&self) -> Vec<usize> {
        (0..self.layout.num_groups())
            .filter(|&g| self.group(g).iter().any(|&v| v != 0.0))
            .collect()
    }

    /// `θᵀ f^i(a, x_{-i})`.
    pub fn score(&self, a: usize, x: &[usize]) -> f64 {
        self.layout.score(&self.values, a, x)
    }

    /// Elementwise `self - other`; layouts must match.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        if self.layout != other.layout {
            return Err(Error::InvalidInput("parameter layouts differ".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(GroupedParameterVector {
            layout: self.layout.clone(),
            values,
        })
    }
}

pub(crate) fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
