mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polymatrix_core::ensembles::{hard_game, random_game, HardEnsembleSpec, RandomGameSpec};
use polymatrix_core::experiments::{
    evaluate_transfer, phase_transition_sweep, ExperimentSpec, LambdaMode, NoiseSpec,
};
use polymatrix_core::game::{
    enumerate_eps_ne, enumerate_psne, format_real, parse_game_sections, price_of_anarchy,
};
use polymatrix_core::learner::{fit_game, lambda_schedule, LearnerConfig, StepRule};
use polymatrix_core::votes::{ingest_votes, IngestOptions, VoteMappingRule};
use polymatrix_core::{Dataset, Error, NoiseModel, ObservationModel, PolymatrixGame, VERSION};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  usage error (unknown flag, bad value)
  3  parse error in an input file
  4  capacity exceeded (profile space or Hessian dimension)
  5  numeric failure (undefined noise model, infeasible schedule, degenerate PoA)
  6  i/o error (missing or unwritable file)

Errors are printed to stderr as one line: error: kind=<kind> message=<text>";

#[derive(Parser, Debug)]
#[command(
    name = "polymatrix",
    version,
    about = "Generate, sample, learn and analyse sparse polymatrix games",
    after_help = EXIT_CODES,
    args_override_self = true
)]
struct Cli {
    /// Base seed for every random draw.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Output path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// `key = value` file with defaults for any long flag; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads; 0 uses all available cores.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a random sparse polymatrix game.
    Generate(GenerateArgs),
    /// Build a game from the hard ensemble with a unique equilibrium.
    HardEnsemble(HardArgs),
    /// Sample observed profiles from a game under a noise model.
    Sample(SampleArgs),
    /// Learn a game from a dataset.
    Learn(LearnArgs),
    /// Enumerate pure (or epsilon) Nash equilibria of a game.
    Psne(PsneArgs),
    /// Compare a learned game with the true one.
    Compare(CompareArgs),
    /// Welfare extremes and price of anarchy.
    Poa(PoaArgs),
    /// Run a phase-transition sweep and write its CSV table.
    Experiment(ExperimentArgs),
    /// Convert a roll-call CSV into a dataset.
    Ingest(IngestArgs),
}

const SUBCOMMANDS: &[&str] = &[
    "generate",
    "hard-ensemble",
    "sample",
    "learn",
    "psne",
    "compare",
    "poa",
    "experiment",
    "ingest",
];

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Number of players.
    #[arg(long)]
    p: usize,
    /// In-degree of every player.
    #[arg(long)]
    d: usize,
    /// Strategies per player.
    #[arg(long, default_value_t = 3)]
    m: usize,
    /// Standard deviation of edge payoffs.
    #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
    payoff_std: f64,
}

#[derive(Args, Debug)]
struct HardArgs {
    #[arg(long)]
    p: usize,
    /// Number of influential players.
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 3)]
    m: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum NoiseKind {
    Global,
    Local,
}

#[derive(Args, Debug)]
struct NoiseArgs {
    #[arg(long, value_enum, default_value_t = NoiseKind::Local)]
    noise: NoiseKind,
    /// Weight on the equilibrium set (global noise).
    #[arg(long, default_value_t = 0.9)]
    q: f64,
    /// Per-player fidelity (local noise): one value, or one per player separated by commas.
    #[arg(long, value_delimiter = ',', default_value = "0.9")]
    qi: Vec<f64>,
}

impl NoiseArgs {
    fn model(&self, players: usize) -> Result<NoiseModel, Error> {
        Ok(match self.noise {
            NoiseKind::Global => NoiseModel::Global { q: self.q },
            NoiseKind::Local => match self.qi.len() {
                1 => NoiseModel::local_uniform(players, self.qi[0]),
                k if k == players => NoiseModel::Local { q: self.qi.clone() },
                k => {
                    return Err(Error::InvalidParameter(format!(
                        "--qi has {k} values for {players} players"
                    )))
                }
            },
        })
    }

    fn echo(&self) -> Vec<String> {
        match self.noise {
            NoiseKind::Global => vec![
                "noise = global".into(),
                format!("q = {}", format_real(self.q)),
            ],
            NoiseKind::Local => {
                let q: Vec<_> = self.qi.iter().map(|&v| format_real(v)).collect();
                vec!["noise = local".into(), format!("qi = {}", q.join(","))]
            }
        }
    }
}

#[derive(Args, Debug)]
struct SampleArgs {
    /// Game file.
    #[arg(long)]
    game: PathBuf,
    /// Number of samples.
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    noise: NoiseArgs,
}

#[derive(Args, Debug)]
struct SolverArgs {
    /// Failure probability used by the theory schedules.
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    /// Assumed expected-gradient norm for the theory schedule.
    #[arg(long, default_value_t = 0.0)]
    nu: f64,
    #[arg(long, default_value_t = 5000)]
    max_iterations: usize,
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
    /// Edge cutoff relative to the player's largest group norm.
    #[arg(long, default_value_t = 1e-6)]
    edge_threshold: f64,
    #[arg(long, value_enum, default_value_t = StepArg::Backtracking)]
    step_rule: StepArg,
    /// Leave the individual payoff block unpenalized.
    #[arg(long)]
    exempt_intercept: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum StepArg {
    Backtracking,
    Fixed,
}

impl SolverArgs {
    fn config(&self, lambda: f64) -> LearnerConfig {
        LearnerConfig {
            lambda,
            nu_estimate: self.nu,
            delta: self.delta,
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
            edge_threshold: self.edge_threshold,
            step_rule: match self.step_rule {
                StepArg::Backtracking => StepRule::Backtracking,
                StepArg::Fixed => StepRule::FixedLipschitz,
            },
            exempt_intercept: self.exempt_intercept,
            time_limit: None,
        }
    }
}

/// `--lambda` value: a number or `theory`.
#[derive(Clone, Copy, Debug, PartialEq)]
enum LambdaArg {
    Theory,
    Fixed(f64),
}

fn parse_lambda(s: &str) -> Result<LambdaArg, String> {
    if s == "theory" {
        return Ok(LambdaArg::Theory);
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(LambdaArg::Fixed(v)),
        _ => Err(format!(
            "expected a non-negative number or `theory`, got `{s}`"
        )),
    }
}

#[derive(Args, Debug)]
struct LearnArgs {
    /// Dataset CSV.
    #[arg(long)]
    data: PathBuf,
    /// Regularization weight, or `theory` for the schedule with the given nu and delta.
    #[arg(long, value_parser = parse_lambda, default_value = "theory")]
    lambda: LambdaArg,
    /// Degree bound used by the theory schedule; defaults to p - 1.
    #[arg(long)]
    d: Option<usize>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct PsneArgs {
    #[arg(long)]
    game: PathBuf,
    /// Enumerate epsilon-equilibria instead.
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Reference game file.
    #[arg(long)]
    truth: PathBuf,
    /// Learned game or model file.
    #[arg(long)]
    learned: PathBuf,
}

#[derive(Args, Debug)]
struct PoaArgs {
    /// Game or model file.
    #[arg(long)]
    game: PathBuf,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// Player counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "7")]
    p: Vec<usize>,
    /// Degrees, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    d: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    m: usize,
    /// Use the hard ensemble instead of random games.
    #[arg(long)]
    hard: bool,
    #[arg(long, value_enum, default_value_t = NoiseKind::Local)]
    noise: NoiseKind,
    #[arg(long, default_value_t = 0.9)]
    q: f64,
    #[arg(long, default_value_t = 0.6)]
    qi: f64,
    #[arg(long, default_value_t = 40)]
    trials: usize,
    /// Sample-size exponents, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,1.5,2,2.5,3")]
    c_grid: Vec<f64>,
    #[arg(long, value_parser = parse_lambda, default_value = "theory")]
    lambda: LambdaArg,
    /// Per-trial wall-clock limit in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// Include mean fit time; off by default so reports are byte-stable.
    #[arg(long)]
    timing: bool,
    /// Also write per-trial rows to this CSV.
    #[arg(long)]
    trials_out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct IngestArgs {
    /// Roll-call CSV with a header row of player names.
    #[arg(long)]
    votes: PathBuf,
    /// Built-in mapping: supreme-court, senate or un.
    #[arg(long, default_value = "supreme-court")]
    rule: String,
    /// Mapping file of `code = strategy` lines; overrides --rule.
    #[arg(long)]
    rule_file: Option<PathBuf>,
    /// Treat empty or missing cells as abstentions.
    #[arg(long)]
    fill_abstain: bool,
}

struct Failure {
    code: u8,
    kind: String,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidInput(_) | Error::InvalidParameter(_) => 2,
            Error::Parse { .. } | Error::Cell { .. } => 3,
            Error::Capacity { .. } | Error::DimensionCap { .. } => 4,
            Error::ModelUndefined(_)
            | Error::InvalidDistribution(_)
            | Error::DegeneratePoa { .. }
            | Error::ScheduleInfeasible(_) => 5,
            Error::Io(_) => 6,
        };
        Failure {
            code,
            kind: e.kind().to_string(),
            message: e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())).into())
}

/// Parses a file prefixing errors with its path.
fn in_file<T>(path: &Path, r: polymatrix_core::Result<T>) -> CliResult<T> {
    r.map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn read_game(path: &Path) -> CliResult<PolymatrixGame> {
    let text = read(path)?;
    // model files carry a diagnostics section after the game
    in_file(path, parse_game_sections(&text).map(|(g, _)| g))
}

fn header(command: &str, seed: u64, config: &[String]) -> Vec<String> {
    let mut out = vec![
        format!("polymatrix {VERSION}"),
        format!("command = {command}"),
    ];
    out.extend(config.iter().cloned());
    out.push(format!("seed = {seed}"));
    out
}

fn comment_block(lines: &[String]) -> String {
    lines.iter().map(|l| format!("# {l}\n")).collect()
}

fn emit(out: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display())).into())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn resolve_lambda(
    arg: LambdaArg,
    n: usize,
    p: usize,
    d: usize,
    nu: f64,
    delta: f64,
) -> CliResult<f64> {
    Ok(match arg {
        LambdaArg::Fixed(v) => v,
        LambdaArg::Theory => lambda_schedule(n, p, d, nu, delta)?,
    })
}

fn run(cli: Cli) -> CliResult<()> {
    let seed = cli.seed;
    let out = &cli.out;
    match cli.command {
        Command::Generate(a) => {
            let spec = RandomGameSpec {
                players: a.p,
                degree: a.d,
                strategies: a.m,
                payoff_std: a.payoff_std,
                seed,
            };
            let game = random_game(&spec)?;
            let mut cfg = spec.echo();
            cfg.retain(|l| !l.starts_with("seed"));
            emit(
                out,
                &(comment_block(&header("generate", seed, &cfg)) + &game.to_string()),
            )
        }
        Command::HardEnsemble(a) => {
            let spec = HardEnsembleSpec::random(a.p, a.d, a.m, seed)?;
            let game = hard_game(&spec)?;
            let mut cfg = spec.echo();
            cfg.retain(|l| !l.starts_with("seed"));
            cfg.push(format!("equilibrium = {}", spec.equilibrium()?));
            emit(
                out,
                &(comment_block(&header("hard-ensemble", seed, &cfg)) + &game.to_string()),
            )
        }
        Command::Sample(a) => {
            let game = read_game(&a.game)?;
            let model = ObservationModel::new(&game, a.noise.model(game.num_players())?)?;
            let data = model.sample(a.n, seed)?;
            let mut cfg = vec![
                format!("game = {}", a.game.display()),
                format!("n = {}", a.n),
            ];
            cfg.extend(a.noise.echo());
            emit(out, &data.to_csv(&header("sample", seed, &cfg)))
        }
        Command::Learn(a) => {
            let data = in_file(&a.data, Dataset::from_csv(&read(&a.data)?))?;
            let p = data.num_players();
            let d = a.d.unwrap_or(p.saturating_sub(1));
            let lambda = resolve_lambda(a.lambda, data.len(), p, d, a.solver.nu, a.solver.delta)?;
            let config = a.solver.config(lambda);
            let model = fit_game(&data, &config)?;
            let mut cfg = vec![
                format!("data = {}", a.data.display()),
                format!("n = {}", data.len()),
                match a.lambda {
                    LambdaArg::Theory => format!("lambda_mode = theory, d = {d}"),
                    LambdaArg::Fixed(_) => "lambda_mode = fixed".into(),
                },
            ];
            cfg.extend(config.echo());
            emit(out, &model.to_text(&header("learn", seed, &cfg)))
        }
        Command::Psne(a) => {
            let game = read_game(&a.game)?;
            let set = if a.eps > 0.0 {
                enumerate_eps_ne(&game, a.eps)?
            } else {
                enumerate_psne(&game)?
            };
            let cfg = vec![
                format!("game = {}", a.game.display()),
                format!("eps = {}", format_real(a.eps)),
            ];
            let mut text = comment_block(&header("psne", seed, &cfg));
            text += &format!("equilibria {}\n", set.len());
            for x in set.iter() {
                text += &format!("{x}\n");
            }
            emit(out, &text)
        }
        Command::Compare(a) => {
            let truth = read_game(&a.truth)?;
            let learned = read_game(&a.learned)?;
            let eval = evaluate_transfer(&truth, &learned)?;
            let cfg = vec![
                format!("truth = {}", a.truth.display()),
                format!("learned = {}", a.learned.display()),
            ];
            emit(out, &eval.to_text(&header("compare", seed, &cfg)))
        }
        Command::Poa(a) => {
            let game = read_game(&a.game)?;
            let ne = enumerate_psne(&game)?;
            let r = price_of_anarchy(&game, &ne)?;
            let cfg = vec![format!("game = {}", a.game.display())];
            let mut text = comment_block(&header("poa", seed, &cfg));
            text += &format!("equilibria {}\n", ne.len());
            text += &format!("shift {}\n", format_real(r.shift));
            text += &format!(
                "max_welfare {} {}\n",
                format_real(r.max_welfare),
                r.max_profile
            );
            text += &format!(
                "min_equilibrium_welfare {} {}\n",
                format_real(r.min_equilibrium_welfare),
                r.min_equilibrium_profile
            );
            text += &format!("ratio {}\n", format_real(r.ratio));
            emit(out, &text)
        }
        Command::Experiment(a) => {
            let spec = ExperimentSpec {
                players: a.p,
                degrees: a.d,
                strategies: a.m,
                hard_family: a.hard,
                noise: match a.noise {
                    NoiseKind::Global => NoiseSpec::Global { q: a.q },
                    NoiseKind::Local => NoiseSpec::Local { q: a.qi },
                },
                trials: a.trials,
                c_grid: a.c_grid,
                delta: a.solver.delta,
                seed,
                lambda_mode: match a.lambda {
                    LambdaArg::Theory => LambdaMode::Theory,
                    LambdaArg::Fixed(v) => LambdaMode::Fixed(v),
                },
                learner: a.solver.config(0.0),
                timeout: a.timeout.map(Duration::from_secs_f64),
            };
            if a.timeout.is_some_and(|t| !t.is_finite() || t < 0.0) {
                return Err(Error::InvalidParameter(
                    "timeout must be a non-negative number".into(),
                )
                .into());
            }
            let report = phase_transition_sweep(&spec)?;
            let mut cfg = spec.echo();
            cfg.retain(|l| !l.starts_with("seed"));
            let comments = header("experiment", seed, &cfg);
            if let Some(path) = &a.trials_out {
                emit(&Some(path.clone()), &report.trials_csv(&comments, a.timing))?;
            }
            emit(out, &report.to_csv(&comments, a.timing))
        }
        Command::Ingest(a) => {
            let rule = match &a.rule_file {
                Some(f) => in_file(
                    f,
                    VoteMappingRule::parse(f.display().to_string(), &read(f)?),
                )?,
                None => VoteMappingRule::by_name(&a.rule)?,
            };
            let table = in_file(
                &a.votes,
                ingest_votes(
                    &read(&a.votes)?,
                    &rule,
                    IngestOptions {
                        fill_abstain: a.fill_abstain,
                    },
                ),
            )?;
            let cfg = vec![
                format!("votes = {}", a.votes.display()),
                format!("rule = {}", rule.name()),
                format!("fill_abstain = {}", a.fill_abstain),
                format!("filled = {}", table.filled),
                format!("players = {}", table.players.join(",")),
            ];
            emit(out, &table.dataset.to_csv(&header("ingest", seed, &cfg)))
        }
    }
}

fn fail(f: Failure) -> ExitCode {
    let message = f.message.replace('\n', " ");
    eprintln!("error: kind={} message={}", f.kind, message.trim());
    ExitCode::from(f.code)
}

fn main() -> ExitCode {
    let mut args: Vec<String> = std::env::args().collect();
    if let Some(path) = config::config_path(&args) {
        match config::read_config(Path::new(&path)) {
            Ok(pairs) => args = config::splice(args, &pairs, SUBCOMMANDS),
            Err(e) => return fail(e.into()),
        }
    }
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                eprint!("{e}");
                return ExitCode::from(2);
            }
            let text = e.to_string();
            let first = text
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            return fail(Failure {
                code: 2,
                kind: "usage".into(),
                message: first.to_string(),
            });
        }
    };
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            return fail(Failure {
                code: 2,
                kind: "usage".into(),
                message: e.to_string(),
            });
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => fail(f),
    }
}
