//! Per-player group-lasso multinomial logistic regression.

pub mod diagnostics;
mod fit;
mod objective;
mod prox;
mod schedule;
pub mod solver;

pub use fit::{
    fit_game, fit_player, regularized_objective, zero_parameters, LearnedModel, LearnerConfig,
    PlayerFit,
};
pub use objective::{
    empirical_loss, gradient, hessian, hessian_capped, population_hessian, sample_gradient,
    sample_loss, softmax, softmax_sigma, BlockHessian, PlayerObjective, DEFAULT_HESSIAN_CAP,
};
pub use prox::group_prox;
pub use schedule::{epsilon_bound, lambda_schedule, sample_schedule};
pub use solver::StepRule;
