//! Spectral diagnostics of the per-player Hessian.
//!
//! The Hessian of the softmax loss always has a null space: adding the same
//! amount to every strategy's score in a context leaves the loss unchanged
//! (the all-ones direction of the individual block is one such direction).
//! [`min_eigen`] reports the plain smallest eigenvalue, which is therefore
//! zero up to rounding; [`min_eigen_identifiable`] restricts to the
//! orthogonal complement of that structural null space.

use std::ops::Range;

use nalgebra::{DMatrix, SymmetricEigen};

use super::objective::{hessian_capped, population_hessian, BlockHessian};
use crate::error::Result;
use crate::game::ProfileSpace;
use crate::observation::{Dataset, PmfTable};
use crate::params::{GroupLayout, GroupedParameterVector};

/// Where the Hessian expectation is taken.
#[derive(Debug, Clone, Copy)]
pub enum HessianSource<'a> {
    /// Average over a dataset.
    Data(&'a Dataset),
    /// Exact expectation under a distribution.
    Pmf(&'a PmfTable),
}

fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let sym = (m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    symmetric_eigenvalues(m).first().copied().unwrap_or(0.0)
}

pub fn max_eigenvalue(m: &DMatrix<f64>) -> f64 {
    symmetric_eigenvalues(m).last().copied().unwrap_or(0.0)
}

/// `sum_k λ_max(X_kk)` over the given diagonal blocks.
pub fn diagonal_block_bound(m: &DMatrix<f64>, blocks: &[Range<usize>]) -> f64 {
    blocks
        .iter()
        .map(|r| max_eigenvalue(&m.view((r.start, r.start), (r.len(), r.len())).into_owned()))
        .sum()
}

/// Group 0 plus every group of `θ` with a nonzero entry.
pub fn support_groups(theta: &GroupedParameterVector) -> Vec<usize> {
    let mut s = theta.support();
    if s.first() != Some(&0) {
        s.insert(0, 0);
    }
    s
}

pub fn hessian_from(
    theta: &GroupedParameterVector,
    source: HessianSource<'_>,
    cap: usize,
) -> Result<BlockHessian> {
    match source {
        HessianSource::Data(d) => hessian_capped(theta, d, cap),
        HessianSource::Pmf(p) => population_hessian(theta, p, cap),
    }
}

fn groups_for(theta: &GroupedParameterVector, support_only: bool) -> Vec<usize> {
    if support_only {
        support_groups(theta)
    } else {
        (0..theta.layout().num_groups()).collect()
    }
}

/// `λ_min` of the (optionally support-restricted) Hessian at `θ`.
pub fn min_eigen(
    theta: &GroupedParameterVector,
    source: HessianSource<'_>,
    support_only: bool,
    cap: usize,
) -> Result<f64> {
    let h = hessian_from(theta, source, cap)?;
    Ok(min_eigenvalue(
        &h.restrict(&groups_for(theta, support_only)),
    ))
}

/// `λ_max` of the (optionally support-restricted) Hessian at `θ`.
pub fn max_eigen(
    theta: &GroupedParameterVector,
    source: HessianSource<'_>,
    support_only: bool,
    cap: usize,
) -> Result<f64> {
    let h = hessian_from(theta, source, cap)?;
    Ok(max_eigenvalue(
        &h.restrict(&groups_for(theta, support_only)),
    ))
}

/// Orthonormal basis (columns) of the directions that change some score
/// difference `θᵀ(f(a, x) - f(a', x))`, restricted to `groups`.
pub fn identifiable_basis(layout: &GroupLayout, groups: &[usize]) -> DMatrix<f64> {
    let idx: Vec<usize> = groups.iter().flat_map(|&g| layout.range(g)).collect();
    let mut pos = vec![usize::MAX; layout.len()];
    for (k, &i) in idx.iter().enumerate() {
        pos[i] = k;
    }
    let players: Vec<usize> = groups
        .iter()
        .filter_map(|&g| layout.group_player(g))
        .collect();
    let counts: Vec<usize> = players.iter().map(|&j| layout.counts()[j]).collect();
    let mi = layout.own_count();
    let dim = idx.len();

    // Covariance of the restricted features under uniform strategies and
    // uniform contexts; its range is the identifiable subspace.
    let mut reference = DMatrix::zeros(dim, dim);
    let contexts = ProfileSpace::new(counts);
    let mut x = vec![0usize; layout.counts().len()];
    let mut total = 0.0;
    for ctx in contexts.iter() {
        for (&j, &s) in players.iter().zip(&ctx) {
            x[j] = s;
        }
        let feats: Vec<Vec<usize>> = (0..mi)
            .map(|a| {
                layout
                    .active_indices(a, &x)
                    .filter(|&k| pos[k] != usize::MAX)
                    .map(|k| pos[k])
                    .collect()
            })
            .collect();
        let w = 1.0 / mi as f64;
        let mut mean = vec![0.0; dim];
        for f in &feats {
            for &k in f {
                mean[k] += w;
            }
            for &k in f {
                for &l in f {
                    reference[(k, l)] += w;
                }
            }
        }
        for k in 0..dim {
            if mean[k] != 0.0 {
                for l in 0..dim {
                    reference[(k, l)] -= mean[k] * mean[l];
                }
            }
        }
        total += 1.0;
    }
    reference /= total;
    let eig = SymmetricEigen::new(reference);
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..dim)
        .filter(|&k| eig.eigenvalues[k] > 1e-9 * top.max(1e-300))
        .collect();
    DMatrix::from_fn(dim, keep.len(), |r, c| eig.eigenvectors[(r, keep[c])])
}

/// `λ_min` of the Hessian on the identifiable subspace.
pub fn min_eigen_identifiable(
    theta: &GroupedParameterVector,
    source: HessianSource<'_>,
    support_only: bool,
    cap: usize,
) -> Result<f64> {
    let h = hessian_from(theta, source, cap)?;
    let groups = groups_for(theta, support_only);
    let q = identifiable_basis(theta.layout(), &groups);
    let reduced = q.transpose() * h.restrict(&groups) * &q;
    Ok(min_eigenvalue(&reduced))
}
