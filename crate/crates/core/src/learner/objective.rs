//! One-versus-rest multinomial logistic loss of a single player.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::game::validate_profile;
use crate::observation::{Dataset, PmfTable};
use crate::params::{GroupLayout, GroupedParameterVector};

/// Writes `σ^i(a, x_{-i}; θ)` for every `a` into `out` and returns the
/// log-partition `log sum_a exp(θᵀ f^i(a, x_{-i}))`.
pub(crate) fn softmax_into(
    layout: &GroupLayout,
    theta: &[f64],
    x: &[usize],
    out: &mut [f64],
) -> f64 {
    let mut max = f64::NEG_INFINITY;
    for (a, slot) in out.iter_mut().enumerate() {
        *slot = layout.score(theta, a, x);
        max = max.max(*slot);
    }
    let mut sum = 0.0;
    for v in out.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in out.iter_mut() {
        *v /= sum;
    }
    max + sum.ln()
}

fn check_profile(theta: &GroupedParameterVector, x: &[usize]) -> Result<()> {
    validate_profile(x, theta.layout().counts())
}

/// `σ^i(a, x_{-i}; θ)` for all `a`.
pub fn softmax(theta: &GroupedParameterVector, x: &[usize]) -> Result<Vec<f64>> {
    check_profile(theta, x)?;
    let mut out = vec![0.0; theta.layout().own_count()];
    softmax_into(theta.layout(), theta.values(), x, &mut out);
    Ok(out)
}

/// `σ^i(a, x_{-i}; θ)`: probability the softmax model assigns to `a`.
pub fn softmax_sigma(theta: &GroupedParameterVector, x: &[usize], a: usize) -> Result<f64> {
    let s = softmax(theta, x)?;
    s.get(a).copied().ok_or_else(|| {
        Error::InvalidInput(format!("strategy {} out of range 1..={}", a + 1, s.len()))
    })
}

/// `ℓ^i(x; θ) = -θᵀ f^i(x_i, x_{-i}) + log sum_a exp(θᵀ f^i(a, x_{-i}))`.
pub fn sample_loss(theta: &GroupedParameterVector, x: &[usize]) -> Result<f64> {
    check_profile(theta, x)?;
    let layout = theta.layout();
    let mut buf = vec![0.0; layout.own_count()];
    let lse = softmax_into(layout, theta.values(), x, &mut buf);
    let own = layout.score(theta.values(), x[layout.owner()], x);
    Ok((lse - own).max(0.0))
}

/// Per-sample gradient of `ℓ^i`.
pub fn sample_gradient(
    theta: &GroupedParameterVector,
    x: &[usize],
) -> Result<GroupedParameterVector> {
    check_profile(theta, x)?;
    let mut g = GroupedParameterVector::zeros(theta.layout().clone());
    let mut buf = vec![0.0; theta.layout().own_count()];
    accumulate_gradient(
        theta.layout(),
        theta.values(),
        x,
        1.0,
        &mut buf,
        g.values_mut(),
    );
    Ok(g)
}

/// Adds `w * ∇ℓ^i(x; θ)` to `grad` and returns `w * ℓ^i(x; θ)`.
#[inline]
fn accumulate_gradient(
    layout: &GroupLayout,
    theta: &[f64],
    x: &[usize],
    w: f64,
    sigma: &mut [f64],
    grad: &mut [f64],
) -> f64 {
    let owner = layout.owner();
    let lse = softmax_into(layout, theta, x, sigma);
    let loss = lse - layout.score(theta, x[owner], x);
    for (a, &s) in sigma.iter().enumerate() {
        let r = w * (s - if a == x[owner] { 1.0 } else { 0.0 });
        for k in layout.active_indices(a, x) {
            grad[k] += r;
        }
    }
    w * loss.max(0.0)
}

/// Empirical loss of one player over a dataset, with duplicate profiles
/// collapsed into weights. This is what the solver evaluates.
#[derive(Debug, Clone)]
pub struct PlayerObjective {
    layout: Arc<GroupLayout>,
    rows: Vec<(Vec<usize>, f64)>,
}

impl PlayerObjective {
    pub fn new(data: &Dataset, player: usize) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::InvalidInput("dataset is empty".into()));
        }
        let layout = Arc::new(GroupLayout::new(data.strategy_counts(), player)?);
        let n = data.len() as f64;
        let rows = data
            .compressed()
            .into_iter()
            .map(|(x, c)| (x.to_vec(), c as f64 / n))
            .collect();
        Ok(PlayerObjective { layout, rows })
    }

    pub fn layout(&self) -> &Arc<GroupLayout> {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.len()
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        let owner = self.layout.owner();
        let mut buf = vec![0.0; self.layout.own_count()];
        self.rows
            .iter()
            .map(|(x, w)| {
                let lse = softmax_into(&self.layout, theta, x, &mut buf);
                w * (lse - self.layout.score(theta, x[owner], x)).max(0.0)
            })
            .sum()
    }

    /// Loss value; overwrites `grad` with the gradient.
    pub fn value_and_gradient(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut buf = vec![0.0; self.layout.own_count()];
        self.rows
            .iter()
            .map(|(x, w)| accumulate_gradient(&self.layout, theta, x, *w, &mut buf, grad))
            .sum()
    }
}

fn check_layout(theta: &GroupedParameterVector, data: &Dataset) -> Result<()> {
    if theta.layout().counts() != data.strategy_counts() {
        return Err(Error::InvalidInput(
            "parameter layout does not match the dataset's strategy counts".into(),
        ));
    }
    if data.is_empty() {
        return Err(Error::InvalidInput("dataset is empty".into()));
    }
    Ok(())
}

/// `L^i(D; θ) = (1/n) sum_l ℓ^i(x^(l); θ)`.
pub fn empirical_loss(theta: &GroupedParameterVector, data: &Dataset) -> Result<f64> {
    check_layout(theta, data)?;
    Ok(PlayerObjective::new(data, theta.owner())?.value(theta.values()))
}

/// `∇L^i(D; θ)` in the same group layout as `θ`.
pub fn gradient(theta: &GroupedParameterVector, data: &Dataset) -> Result<GroupedParameterVector> {
    check_layout(theta, data)?;
    let obj = PlayerObjective::new(data, theta.owner())?;
    let mut g = GroupedParameterVector::zeros(theta.layout().clone());
    obj.value_and_gradient(theta.values(), g.values_mut());
    Ok(g)
}

/// Default bound on Hessian dimension for dense diagnostics.
pub const DEFAULT_HESSIAN_CAP: usize = 4096;

/// Dense Hessian of one player's loss with its group layout.
#[derive(Debug, Clone)]
pub struct BlockHessian {
    layout: Arc<GroupLayout>,
    matrix: DMatrix<f64>,
}

impl BlockHessian {
    pub fn layout(&self) -> &GroupLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// The `(g, h)` block.
    pub fn block(&self, g: usize, h: usize) -> DMatrix<f64> {
        let (rg, rh) = (self.layout.range(g), self.layout.range(h));
        self.matrix
            .view((rg.start, rh.start), (rg.len(), rh.len()))
            .into_owned()
    }

    /// Principal submatrix over the listed groups.
    pub fn restrict(&self, groups: &[usize]) -> DMatrix<f64> {
        let idx: Vec<usize> = groups.iter().flat_map(|&g| self.layout.range(g)).collect();
        DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.matrix[(idx[r], idx[c])])
    }
}

/// Adds `w * H^i(x; θ)` to `h`.
fn accumulate_hessian(
    layout: &GroupLayout,
    theta: &[f64],
    x: &[usize],
    w: f64,
    h: &mut DMatrix<f64>,
) {
    let mi = layout.own_count();
    let mut sigma = vec![0.0; mi];
    softmax_into(layout, theta, x, &mut sigma);
    let active: Vec<Vec<usize>> = (0..mi)
        .map(|a| layout.active_indices(a, x).collect())
        .collect();
    // sum_a σ_a f_a f_aᵀ
    for (a, idx) in active.iter().enumerate() {
        let s = w * sigma[a];
        for &k in idx {
            for &l in idx {
                h[(k, l)] += s;
            }
        }
    }
    // - μ μᵀ with μ = sum_a σ_a f_a
    let mut mu: Vec<(usize, f64)> = Vec::with_capacity(mi * layout.num_groups());
    for (a, idx) in active.iter().enumerate() {
        for &k in idx {
            mu.push((k, sigma[a]));
        }
    }
    mu.sort_by_key(|e| e.0);
    mu.dedup_by(|b, a| {
        if a.0 == b.0 {
            a.1 += b.1;
            true
        } else {
            false
        }
    });
    for &(k, vk) in &mu {
        for &(l, vl) in &mu {
            h[(k, l)] -= w * vk * vl;
        }
    }
}

fn check_dim(layout: &GroupLayout, cap: usize) -> Result<()> {
    if layout.len() > cap {
        return Err(Error::DimensionCap {
            dim: layout.len(),
            cap,
        });
    }
    Ok(())
}

/// Empirical Hessian `(1/n) sum_l H^i(x^(l); θ)`.
pub fn hessian(theta: &GroupedParameterVector, data: &Dataset) -> Result<BlockHessian> {
    hessian_capped(theta, data, DEFAULT_HESSIAN_CAP)
}

pub fn hessian_capped(
    theta: &GroupedParameterVector,
    data: &Dataset,
    cap: usize,
) -> Result<BlockHessian> {
    check_layout(theta, data)?;
    let layout = theta.layout().clone();
    check_dim(&layout, cap)?;
    let mut h = DMatrix::zeros(layout.len(), layout.len());
    let n = data.len() as f64;
    for (x, c) in data.compressed() {
        accumulate_hessian(&layout, theta.values(), x, c as f64 / n, &mut h);
    }
    Ok(BlockHessian { layout, matrix: h })
}

/// Expected Hessian `sum_x P(x) H^i(x; θ)` under a probability table.
pub fn population_hessian(
    theta: &GroupedParameterVector,
    pmf: &PmfTable,
    cap: usize,
) -> Result<BlockHessian> {
    if theta.layout().counts() != pmf.space().counts() {
        return Err(Error::InvalidInput(
            "parameter layout does not match the distribution".into(),
        ));
    }
    let layout = theta.layout().clone();
    check_dim(&layout, cap)?;
    let mut h = DMatrix::zeros(layout.len(), layout.len());
    for (x, &w) in pmf.space().iter().zip(pmf.probs()) {
        if w > 0.0 {
            accumulate_hessian(&layout, theta.values(), &x, w, &mut h);
        }
    }
    Ok(BlockHessian { layout, matrix: h })
}
