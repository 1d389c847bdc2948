//! Recovery experiments: single trials, phase-transition sweeps, and the
//! equilibrium-transfer evaluation of a learned game against the truth.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ensembles::{hard_game, random_game, HardEnsembleSpec, RandomGameSpec};
use crate::error::{Error, Result};
use crate::game::linear::pack_parameters;
use crate::game::{
    check_separability_capped, enumerate_eps_ne_capped, enumerate_psne_capped, format_real,
    PolymatrixGame, PsneSet, DEFAULT_ENUMERATION_CAP,
};
use crate::learner::{fit_game, lambda_schedule, LearnedModel, LearnerConfig};
use crate::observation::{NoiseModel, ObservationModel};

/// `round(10^c (d+1)^2 log(2p(d+1)/δ))`, at least 1.
pub fn sample_count(c: f64, p: usize, d: usize, delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if p == 0 || !c.is_finite() {
        return Err(Error::InvalidParameter("need p >= 1 and finite c".into()));
    }
    let d1 = d as f64 + 1.0;
    let n = 10f64.powf(c) * d1 * d1 * (2.0 * p as f64 * d1 / delta).ln();
    if !(n < usize::MAX as f64) {
        return Err(Error::InvalidParameter(format!(
            "sample count {n} is too large"
        )));
    }
    Ok((n.round() as usize).max(1))
}

/// Which synthetic family a trial draws its game from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GameFamily {
    Random {
        players: usize,
        degree: usize,
        strategies: usize,
        payoff_std: f64,
    },
    Hard {
        players: usize,
        degree: usize,
        strategies: usize,
    },
}

impl GameFamily {
    pub fn random(players: usize, degree: usize, strategies: usize) -> Self {
        GameFamily::Random {
            players,
            degree,
            strategies,
            payoff_std: std::f64::consts::SQRT_2,
        }
    }

    pub fn players(&self) -> usize {
        match *self {
            GameFamily::Random { players, .. } | GameFamily::Hard { players, .. } => players,
        }
    }

    pub fn degree(&self) -> usize {
        match *self {
            GameFamily::Random { degree, .. } | GameFamily::Hard { degree, .. } => degree,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GameFamily::Random { .. } => "random",
            GameFamily::Hard { .. } => "hard",
        }
    }
}

/// Attempts at drawing a random game that has at least one equilibrium.
const MAX_GAME_DRAWS: usize = 1000;

/// Draws a game of the family from `seed`. Random games without a pure
/// equilibrium are redrawn from the same stream.
pub fn draw_game(family: &GameFamily, seed: u64) -> Result<(PolymatrixGame, PsneSet)> {
    match *family {
        GameFamily::Random {
            players,
            degree,
            strategies,
            payoff_std,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..MAX_GAME_DRAWS {
                let spec = RandomGameSpec {
                    players,
                    degree,
                    strategies,
                    payoff_std,
                    seed: rng.random(),
                };
                let g = random_game(&spec)?;
                let ne = enumerate_psne_capped(&g, DEFAULT_ENUMERATION_CAP)?;
                if !ne.is_empty() {
                    return Ok((g, ne));
                }
            }
            Err(Error::ModelUndefined(format!(
                "no game with a pure equilibrium in {MAX_GAME_DRAWS} draws"
            )))
        }
        GameFamily::Hard {
            players,
            degree,
            strategies,
        } => {
            let g = hard_game(&HardEnsembleSpec::random(
                players, degree, strategies, seed,
            )?)?;
            let ne = enumerate_psne_capped(&g, DEFAULT_ENUMERATION_CAP)?;
            Ok((g, ne))
        }
    }
}

/// Noise model independent of the player count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSpec {
    Global {
        q: f64,
    },
    /// The same fidelity for every player.
    Local {
        q: f64,
    },
}

impl NoiseSpec {
    pub fn model(&self, players: usize) -> NoiseModel {
        match *self {
            NoiseSpec::Global { q } => NoiseModel::Global { q },
            NoiseSpec::Local { q } => NoiseModel::local_uniform(players, q),
        }
    }

    pub fn echo(&self) -> String {
        match self {
            NoiseSpec::Global { q } => format!("noise = global, q = {}", format_real(*q)),
            NoiseSpec::Local { q } => format!("noise = local, qi = {}", format_real(*q)),
        }
    }
}

/// How λ is picked for each trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaMode {
    /// The theory schedule at the trial's `n`, with the config's `ν`.
    Theory,
    Fixed(f64),
}

impl LambdaMode {
    pub fn echo(&self) -> String {
        match self {
            LambdaMode::Theory => "lambda = theory".into(),
            LambdaMode::Fixed(v) => format!("lambda = {}", format_real(*v)),
        }
    }
}

/// Everything a trial needs besides `c` and its seed.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub family: GameFamily,
    pub noise: NoiseSpec,
    pub delta: f64,
    pub lambda_mode: LambdaMode,
    pub learner: LearnerConfig,
    /// Wall-clock budget for the fit.
    pub timeout: Option<Duration>,
}

impl TrialConfig {
    pub fn new(family: GameFamily, noise: NoiseSpec) -> Self {
        TrialConfig {
            family,
            noise,
            delta: 0.01,
            lambda_mode: LambdaMode::Theory,
            learner: LearnerConfig::default(),
            timeout: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub seed: u64,
    pub c: f64,
    pub n: usize,
    pub lambda: f64,
    /// `NE(Ĝ) = NE(G)`.
    pub recovered: bool,
    pub true_equilibria: usize,
    pub learned_equilibria: usize,
    pub evaluation: Option<TransferEvaluation>,
    pub converged: bool,
    pub timed_out: bool,
    pub fit_seconds: f64,
    /// Set when the trial could not run to completion.
    pub error: Option<String>,
}

impl TrialRecord {
    /// A trial counts as a success only if it finished in time and recovered.
    pub fn success(&self) -> bool {
        self.recovered && !self.timed_out && self.error.is_none()
    }
}

/// One trial: draw a game, sample `n` profiles, fit, and compare equilibria.
/// Never fails; problems are reported through the record's flags.
pub fn recovery_trial(config: &TrialConfig, c: f64, seed: u64) -> TrialRecord {
    let mut record = TrialRecord {
        seed,
        c,
        n: 0,
        lambda: f64::NAN,
        recovered: false,
        true_equilibria: 0,
        learned_equilibria: 0,
        evaluation: None,
        converged: false,
        timed_out: false,
        fit_seconds: 0.0,
        error: None,
    };
    if let Err(e) = run_trial(config, c, seed, &mut record) {
        record.error = Some(e.to_string());
    }
    record
}

fn run_trial(config: &TrialConfig, c: f64, seed: u64, record: &mut TrialRecord) -> Result<()> {
    let p = config.family.players();
    let d = config.family.degree();
    let n = sample_count(c, p, d, config.delta)?;
    record.n = n;
    let lambda = match config.lambda_mode {
        LambdaMode::Theory => lambda_schedule(n, p, d, config.learner.nu_estimate, config.delta)?,
        LambdaMode::Fixed(v) => v,
    };
    record.lambda = lambda;

    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    let (game, ne) = draw_game(&config.family, seeds.random())?;
    record.true_equilibria = ne.len();
    let model = ObservationModel::from_equilibria(
        game.strategy_counts().to_vec(),
        ne.clone(),
        config.noise.model(p),
    )?;
    let data = model.sample(n, seeds.random())?;

    let learner = LearnerConfig {
        lambda,
        time_limit: config.timeout,
        ..config.learner.clone()
    };
    let start = Instant::now();
    let learned = fit_game(&data, &learner)?;
    record.fit_seconds = start.elapsed().as_secs_f64();
    record.converged = learned.converged();
    record.timed_out = learned.timed_out();

    let learned_ne = enumerate_psne_capped(&learned.game, DEFAULT_ENUMERATION_CAP)?;
    record.learned_equilibria = learned_ne.len();
    record.recovered = learned_ne.same_profiles(&ne);
    record.evaluation = Some(evaluate_transfer(&game, &learned.game)?);
    Ok(())
}

/// Parameters of a phase-transition sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub players: Vec<usize>,
    pub degrees: Vec<usize>,
    pub strategies: usize,
    pub hard_family: bool,
    pub noise: NoiseSpec,
    pub trials: usize,
    pub c_grid: Vec<f64>,
    pub delta: f64,
    pub seed: u64,
    pub lambda_mode: LambdaMode,
    pub learner: LearnerConfig,
    pub timeout: Option<Duration>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            players: vec![7],
            degrees: vec![1],
            strategies: 3,
            hard_family: false,
            noise: NoiseSpec::Local { q: 0.6 },
            trials: 40,
            c_grid: vec![0.0, 1.0, 2.0, 3.0],
            delta: 0.01,
            seed: 1,
            lambda_mode: LambdaMode::Theory,
            learner: LearnerConfig::default(),
            timeout: None,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.c_grid.is_empty() || self.c_grid.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(
                "c grid must be nonempty and finite".into(),
            ));
        }
        if self.players.is_empty() || self.degrees.is_empty() {
            return Err(Error::InvalidParameter(
                "p and d lists must be nonempty".into(),
            ));
        }
        self.learner.validate()
    }

    fn family(&self, p: usize, d: usize) -> GameFamily {
        if self.hard_family {
            GameFamily::Hard {
                players: p,
                degree: d,
                strategies: self.strategies,
            }
        } else {
            GameFamily::random(p, d, self.strategies)
        }
    }

    pub fn echo(&self) -> Vec<String> {
        let join = |v: &[usize]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let grid: Vec<_> = self.c_grid.iter().map(|&c| format_real(c)).collect();
        let mut out = vec![
            format!(
                "family = {}",
                if self.hard_family { "hard" } else { "random" }
            ),
            format!("p = {}", join(&self.players)),
            format!("d = {}", join(&self.degrees)),
            format!("m = {}", self.strategies),
            self.noise.echo(),
            format!("trials = {}", self.trials),
            format!("c_grid = {}", grid.join(" ")),
            format!("delta = {}", format_real(self.delta)),
            format!("seed = {}", self.seed),
            self.lambda_mode.echo(),
        ];
        out.extend(
            self.learner
                .echo()
                .into_iter()
                .filter(|l| !l.starts_with("lambda ") && !l.starts_with("delta ")),
        );
        if let Some(t) = self.timeout {
            out.push(format!(
                "timeout_seconds = {}",
                format_real(t.as_secs_f64())
            ));
        }
        out
    }
}

/// Aggregate for one `(p, d, c)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub players: usize,
    pub degree: usize,
    pub c: f64,
    pub n: usize,
    pub trials: usize,
    pub recovered: usize,
    pub timed_out: usize,
    pub failed: usize,
    pub mean_fit_seconds: f64,
}

impl SweepRow {
    pub fn probability(&self) -> f64 {
        self.recovered as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialKey {
    pub players: usize,
    pub degree: usize,
    pub c: f64,
    pub trial: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub rows: Vec<SweepRow>,
    pub trials: Vec<(TrialKey, TrialRecord)>,
}

impl ExperimentReport {
    /// Summary CSV. Timing varies between runs, so it can be masked to keep
    /// the bytes reproducible.
    pub fn to_csv(&self, comments: &[String], timing: bool) -> String {
        let mut out = String::new();
        for c in comments {
            let _ = writeln!(out, "# {c}");
        }
        let _ = writeln!(out, "p,d,c,n,trials,recovered,probability,mean_fit_seconds");
        for r in &self.rows {
            let secs = if timing {
                format!("{:.6}", r.mean_fit_seconds)
            } else {
                "NA".into()
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.players,
                r.degree,
                format_real(r.c),
                r.n,
                r.trials,
                r.recovered,
                format_real(r.probability()),
                secs
            );
        }
        out
    }

    /// Per-trial detail CSV.
    pub fn trials_csv(&self, comments: &[String], timing: bool) -> String {
        let mut out = String::new();
        for c in comments {
            let _ = writeln!(out, "# {c}");
        }
        let _ = writeln!(
            out,
            "p,d,c,trial,seed,n,lambda,recovered,true_ne,learned_ne,epsilon,eps_contained,max_payoff_error,converged,timed_out,fit_seconds,error"
        );
        for (k, t) in &self.trials {
            let (eps, contained, err) = match &t.evaluation {
                Some(e) => (
                    format_real(e.epsilon),
                    e.learned_in_true_eps.to_string(),
                    format_real(e.max_payoff_error),
                ),
                None => ("NA".into(), "NA".into(), "NA".into()),
            };
            let secs = if timing {
                format!("{:.6}", t.fit_seconds)
            } else {
                "NA".into()
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                k.players,
                k.degree,
                format_real(k.c),
                k.trial,
                t.seed,
                t.n,
                format_real(t.lambda),
                t.recovered,
                t.true_equilibria,
                t.learned_equilibria,
                eps,
                contained,
                err,
                t.converged,
                t.timed_out,
                secs,
                t.error.as_deref().unwrap_or("").replace(',', ";")
            );
        }
        out
    }
}

/// Runs every `(p, d, c, trial)` cell. Trial `t` uses seed `base ^ t` for
/// every `(p, d, c)`, so cells share games and samples grow by prefix.
pub fn phase_transition_sweep(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let mut keys = Vec::new();
    for &p in &spec.players {
        for &d in &spec.degrees {
            for &c in &spec.c_grid {
                for trial in 0..spec.trials {
                    keys.push(TrialKey {
                        players: p,
                        degree: d,
                        c,
                        trial,
                    });
                }
            }
        }
    }
    let trials: Vec<(TrialKey, TrialRecord)> = keys
        .into_par_iter()
        .map(|k| {
            let config = TrialConfig {
                family: spec.family(k.players, k.degree),
                noise: spec.noise,
                delta: spec.delta,
                lambda_mode: spec.lambda_mode,
                learner: spec.learner.clone(),
                timeout: spec.timeout,
            };
            let rec = recovery_trial(&config, k.c, spec.seed ^ k.trial as u64);
            (k, rec)
        })
        .collect();

    let rows = trials
        .chunks(spec.trials)
        .map(|chunk| {
            let k = &chunk[0].0;
            let recs = chunk.iter().map(|(_, r)| r);
            SweepRow {
                players: k.players,
                degree: k.degree,
                c: k.c,
                n: chunk[0].1.n,
                trials: chunk.len(),
                recovered: recs.clone().filter(|r| r.success()).count(),
                timed_out: recs.clone().filter(|r| r.timed_out).count(),
                failed: recs.clone().filter(|r| r.error.is_some()).count(),
                mean_fit_seconds: recs.map(|r| r.fit_seconds).sum::<f64>() / chunk.len() as f64,
            }
        })
        .collect();
    Ok(ExperimentReport {
        spec: spec.clone(),
        rows,
        trials,
    })
}

/// How well a learned game transfers the true game's equilibria.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferEvaluation {
    /// `‖θ̂^i - θ^i‖_{1,2}` per player.
    pub parameter_errors: Vec<f64>,
    /// Largest `|û^i(x) - u^i(x)|` over players and profiles.
    pub max_payoff_error: f64,
    /// `max_payoff_error <= max_i parameter_errors[i]` (up to rounding).
    pub payoff_bound_holds: bool,
    /// `2 max_i ‖θ̂^i - θ^i‖_{1,2}`.
    pub epsilon: f64,
    pub learned_in_true_eps: bool,
    pub true_in_learned_eps: bool,
    /// Separability of the true game at `epsilon`.
    pub separable: bool,
    pub equal: bool,
    pub true_equilibria: PsneSet,
    pub learned_equilibria: PsneSet,
}

impl TransferEvaluation {
    pub fn max_parameter_error(&self) -> f64 {
        self.parameter_errors.iter().copied().fold(0.0, f64::max)
    }

    /// The containments follow from the payoff bound, and separability
    /// forces equality.
    pub fn consistent(&self) -> bool {
        (!self.payoff_bound_holds || (self.learned_in_true_eps && self.true_in_learned_eps))
            && (!self.separable || self.equal)
    }

    pub fn to_text(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            let _ = writeln!(out, "# {c}");
        }
        let errs: Vec<_> = self
            .parameter_errors
            .iter()
            .map(|&b| format_real(b))
            .collect();
        let _ = writeln!(out, "parameter_errors {}", errs.join(" "));
        let _ = writeln!(
            out,
            "max_payoff_error {}",
            format_real(self.max_payoff_error)
        );
        let _ = writeln!(out, "payoff_bound_holds {}", self.payoff_bound_holds);
        let _ = writeln!(out, "epsilon {}", format_real(self.epsilon));
        let _ = writeln!(out, "learned_in_true_eps {}", self.learned_in_true_eps);
        let _ = writeln!(out, "true_in_learned_eps {}", self.true_in_learned_eps);
        let _ = writeln!(out, "separable {}", self.separable);
        let _ = writeln!(out, "equal {}", self.equal);
        for (name, set) in [
            ("true", &self.true_equilibria),
            ("learned", &self.learned_equilibria),
        ] {
            let _ = writeln!(out, "{name}_equilibria {}", set.len());
            for x in set.iter() {
                let _ = writeln!(out, "{x}");
            }
        }
        out
    }
}

/// Compares `learned` with `truth` via parameter distance, payoff error,
/// ε-equilibrium containments and separability.
pub fn evaluate_transfer(
    truth: &PolymatrixGame,
    learned: &PolymatrixGame,
) -> Result<TransferEvaluation> {
    evaluate_transfer_capped(truth, learned, DEFAULT_ENUMERATION_CAP)
}

pub fn evaluate_transfer_capped(
    truth: &PolymatrixGame,
    learned: &PolymatrixGame,
    cap: u128,
) -> Result<TransferEvaluation> {
    if truth.strategy_counts() != learned.strategy_counts() {
        return Err(Error::InvalidInput(
            "games have different strategy counts".into(),
        ));
    }
    let p = truth.num_players();
    let parameter_errors = (0..p)
        .map(|i| {
            let a = pack_parameters(truth, i)?;
            let b = pack_parameters(learned, i)?;
            Ok(b.difference(&a)?.norm_12())
        })
        .collect::<Result<Vec<_>>>()?;
    let max_b = parameter_errors.iter().copied().fold(0.0, f64::max);

    let space = truth.profile_space();
    let size = space.size_capped(cap)?;
    let (max_payoff_error, scale) = (0..size)
        .into_par_iter()
        .map_init(
            || vec![0usize; p],
            |x, k| {
                space.decode_into(k, x);
                (0..p).fold((0.0f64, 0.0f64), |(e, s), i| {
                    let u = truth.payoff_at(i, x[i], x);
                    let v = learned.payoff_at(i, x[i], x);
                    (e.max((u - v).abs()), s.max(u.abs()).max(v.abs()))
                })
            },
        )
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    // both payoffs are sums of at most p terms; allow their rounding
    let slack = 4.0 * f64::EPSILON * (p as f64 + 1.0) * scale;
    let payoff_bound_holds = max_payoff_error <= max_b + slack;

    let epsilon = 2.0 * max_b;
    let true_ne = enumerate_psne_capped(truth, cap)?;
    let learned_ne = enumerate_psne_capped(learned, cap)?;
    let true_eps = enumerate_eps_ne_capped(truth, epsilon, cap)?;
    let learned_eps = enumerate_eps_ne_capped(learned, epsilon, cap)?;
    Ok(TransferEvaluation {
        parameter_errors,
        max_payoff_error,
        payoff_bound_holds,
        epsilon,
        learned_in_true_eps: learned_ne.is_subset_of(&true_eps),
        true_in_learned_eps: true_ne.is_subset_of(&learned_eps),
        separable: check_separability_capped(truth, epsilon, cap)?,
        equal: true_ne.same_profiles(&learned_ne),
        true_equilibria: true_ne,
        learned_equilibria: learned_ne,
    })
}

/// [`evaluate_transfer`] on a fitted model.
pub fn evaluate_learned(
    truth: &PolymatrixGame,
    learned: &LearnedModel,
) -> Result<TransferEvaluation> {
    evaluate_transfer(truth, &learned.game)
}
