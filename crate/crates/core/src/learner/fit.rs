use std::fmt::Write as _;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::objective::PlayerObjective;
use super::solver::{
    accelerated_proximal_gradient, GroupPenalty, SmoothObjective, SolverOptions, StepRule,
};
use crate::error::{Error, Result};
use crate::game::linear::game_from_parameters;
use crate::game::{format_real, PolymatrixGame};
use crate::observation::Dataset;
use crate::params::GroupedParameterVector;

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerConfig {
    /// Weight of the `ℓ_{1,2}` penalty.
    pub lambda: f64,
    /// Assumed expected-gradient norm `ν` for schedules.
    pub nu_estimate: f64,
    /// Failure probability for schedules.
    pub delta: f64,
    pub max_iterations: usize,
    /// Stop when the proximal-gradient mapping norm falls below this.
    pub tolerance: f64,
    /// Edge cutoff, relative to the player's largest group norm.
    pub edge_threshold: f64,
    pub step_rule: StepRule,
    /// Leave the individual block unpenalized.
    pub exempt_intercept: bool,
    /// Wall-clock limit for one `fit_game` call.
    pub time_limit: Option<Duration>,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            lambda: 0.01,
            nu_estimate: 0.0,
            delta: 0.01,
            max_iterations: 5000,
            tolerance: 1e-6,
            edge_threshold: 1e-6,
            step_rule: StepRule::Backtracking,
            exempt_intercept: false,
            time_limit: None,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda must be finite and non-negative, got {}",
                self.lambda
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if !(self.edge_threshold >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "edge threshold must be non-negative, got {}",
                self.edge_threshold
            )));
        }
        if !(self.nu_estimate >= 0.0) {
            return Err(Error::InvalidParameter("nu must be non-negative".into()));
        }
        Ok(())
    }

    /// `key = value` lines echoing every setting.
    pub fn echo(&self) -> Vec<String> {
        vec![
            format!("lambda = {}", format_real(self.lambda)),
            format!("nu = {}", format_real(self.nu_estimate)),
            format!("delta = {}", format_real(self.delta)),
            format!("max_iterations = {}", self.max_iterations),
            format!("tolerance = {}", format_real(self.tolerance)),
            format!("edge_threshold = {}", format_real(self.edge_threshold)),
            format!(
                "step_rule = {}",
                match self.step_rule {
                    StepRule::Backtracking => "backtracking",
                    StepRule::FixedLipschitz => "fixed",
                }
            ),
            format!("exempt_intercept = {}", self.exempt_intercept),
        ]
    }
}

/// Result of fitting one player.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayerFit {
    pub theta: GroupedParameterVector,
    /// Regularized objective at `theta`.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub timed_out: bool,
    /// `‖∇L^i(θ̂)‖_{∞,2}` of the smooth part.
    pub gradient_norm: f64,
    /// Objective after each accepted solver step.
    pub history: Vec<f64>,
}

impl SmoothObjective for PlayerObjective {
    fn value(&self, x: &[f64]) -> f64 {
        PlayerObjective::value(self, x)
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        PlayerObjective::value_and_gradient(self, x, grad)
    }
}

fn penalty_for(obj: &PlayerObjective, config: &LearnerConfig) -> GroupPenalty {
    let layout = obj.layout();
    let groups: Vec<_> = (0..layout.num_groups()).map(|g| layout.range(g)).collect();
    let weights = (0..layout.num_groups())
        .map(|g| {
            if g == 0 && config.exempt_intercept {
                0.0
            } else {
                config.lambda
            }
        })
        .collect();
    GroupPenalty { groups, weights }
}

/// Regularized objective `L^i(θ) + λ ‖θ‖_{1,2}` for the given config.
pub fn regularized_objective(
    theta: &GroupedParameterVector,
    data: &Dataset,
    config: &LearnerConfig,
) -> Result<f64> {
    let obj = PlayerObjective::new(data, theta.owner())?;
    if obj.layout() != theta.layout() {
        return Err(Error::InvalidInput(
            "parameter layout does not match data".into(),
        ));
    }
    Ok(obj.value(theta.values()) + penalty_for(&obj, config).value(theta.values()))
}

/// Minimizes player `i`'s regularized loss with accelerated proximal gradient.
pub fn fit_player(data: &Dataset, i: usize, config: &LearnerConfig) -> Result<PlayerFit> {
    fit_player_until(data, i, config, None)
}

fn fit_player_until(
    data: &Dataset,
    i: usize,
    config: &LearnerConfig,
    deadline: Option<Instant>,
) -> Result<PlayerFit> {
    config.validate()?;
    let obj = PlayerObjective::new(data, i)?;
    let penalty = penalty_for(&obj, config);
    let opts = SolverOptions {
        max_iterations: config.max_iterations,
        tolerance: config.tolerance,
        step_rule: config.step_rule,
        initial_step: 1.0,
        // λ_max of the loss Hessian is at most the number of groups
        lipschitz: obj.layout().num_groups() as f64,
        deadline,
    };
    let r = accelerated_proximal_gradient(&obj, &penalty, vec![0.0; obj.dim()], &opts);
    let theta = GroupedParameterVector::from_values(obj.layout().clone(), r.x)?;
    let mut grad = vec![0.0; obj.dim()];
    obj.value_and_gradient(theta.values(), &mut grad);
    let gradient_norm =
        GroupedParameterVector::from_values(obj.layout().clone(), grad)?.norm_inf2();
    Ok(PlayerFit {
        theta,
        objective: r.objective,
        iterations: r.iterations,
        converged: r.converged,
        timed_out: r.timed_out,
        gradient_norm,
        history: r.history,
    })
}

/// A game learned from data.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedModel {
    pub fits: Vec<PlayerFit>,
    /// Recovered edges `(i, j)`, lexicographic.
    pub edges: Vec<(usize, usize)>,
    /// Game assembled from the thresholded parameters.
    pub game: PolymatrixGame,
    pub lambda: f64,
    pub edge_threshold: f64,
}

impl LearnedModel {
    pub fn thetas(&self) -> Vec<&GroupedParameterVector> {
        self.fits.iter().map(|f| &f.theta).collect()
    }

    pub fn converged(&self) -> bool {
        self.fits.iter().all(|f| f.converged)
    }

    pub fn timed_out(&self) -> bool {
        self.fits.iter().any(|f| f.timed_out)
    }

    /// Game file text followed by a `diagnostics` section.
    pub fn to_text(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            let _ = writeln!(out, "# {c}");
        }
        out.push_str(&self.game.to_string());
        let _ = writeln!(out, "diagnostics");
        let _ = writeln!(out, "lambda {}", format_real(self.lambda));
        let _ = writeln!(out, "edge_threshold {}", format_real(self.edge_threshold));
        for (i, f) in self.fits.iter().enumerate() {
            let _ = writeln!(
                out,
                "player {} objective {} iterations {} gradient_norm {} converged {} timed_out {}",
                i + 1,
                format_real(f.objective),
                f.iterations,
                format_real(f.gradient_norm),
                f.converged,
                f.timed_out
            );
            let norms: Vec<_> = f.theta.group_norms().into_iter().map(format_real).collect();
            let _ = writeln!(out, "group_norms {} {}", i + 1, norms.join(" "));
        }
        out
    }
}

/// Fits every player independently (in parallel) and assembles `Ĝ`.
pub fn fit_game(data: &Dataset, config: &LearnerConfig) -> Result<LearnedModel> {
    config.validate()?;
    let deadline = config.time_limit.map(|t| Instant::now() + t);
    let fits = (0..data.num_players())
        .into_par_iter()
        .map(|i| fit_player_until(data, i, config, deadline))
        .collect::<Result<Vec<_>>>()?;

    let mut edges = Vec::new();
    let mut kept = Vec::with_capacity(fits.len());
    for (i, f) in fits.iter().enumerate() {
        let norms = f.theta.group_norms();
        let largest = norms.iter().copied().fold(0.0, f64::max);
        let mut cutoff = config.edge_threshold * largest;
        if cutoff.is_nan() {
            cutoff = f64::INFINITY;
        }
        let layout = f.theta.layout().clone();
        let mut t = f.theta.clone();
        for (g, &norm) in norms.iter().enumerate().skip(1) {
            if norm > cutoff {
                edges.push((i, layout.group_player(g).unwrap()));
            } else {
                t.group_mut(g).iter_mut().for_each(|v| *v = 0.0);
            }
        }
        kept.push(t);
    }
    edges.sort_unstable();
    let game = game_from_parameters(&kept)?;
    debug_assert_eq!(game.edges(), edges);
    Ok(LearnedModel {
        fits,
        edges,
        game,
        lambda: config.lambda,
        edge_threshold: config.edge_threshold,
    })
}

/// Shared zero parameters for every player of a dataset.
pub fn zero_parameters(counts: &[usize]) -> Result<Vec<GroupedParameterVector>> {
    (0..counts.len())
        .map(|i| {
            Ok(GroupedParameterVector::zeros(Arc::new(
                crate::params::GroupLayout::new(counts, i)?,
            )))
        })
        .collect()
}
