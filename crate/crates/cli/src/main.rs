use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use arlcp::analysis::{analyze_corpus, DEFAULT_BIN_WIDTH};
use arlcp::config::{PenaltyOverrides, ToolkitConfig};
use arlcp::metrics::{compute_eval_metrics, runs_from_corpus};
use arlcp::report;
use arlcp::reward::score_corpus;
use arlcp::sim::{self, oracle_ranking, run_training, summarize, RewardMode, SimConfig};
use arlcp::{Error, ExecMode, Rollout, TriggerLexicon};

const EXIT_FAILURE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_EMPTY: u8 = 3;
const EXIT_CONFIG: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "arlcp",
    version,
    about = "Adaptive reflection and length penalty toolkit"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Simulator seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    n1: Option<u64>,
    #[arg(long, global = true)]
    n2: Option<u64>,
    #[arg(long, global = true)]
    lambda1: Option<f64>,
    #[arg(long, global = true)]
    lambda2: Option<f64>,
    #[arg(long, global = true)]
    lambda3: Option<f64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Reflection-trigger override file: one phrase per line, `#` comments.
    #[arg(long, global = true)]
    lexicon: Option<PathBuf>,
    /// Add leave-one-out advantages (per prompt group) to scored records.
    #[arg(long, global = true)]
    emit_advantages: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score a rollout corpus with the composite reward.
    Score { input: PathBuf },
    /// Reflection-count statistics of a corpus.
    Analyze {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BIN_WIDTH)]
        bin_width: u64,
    },
    /// Run the synthetic policy-gradient trainer.
    TrainSim {
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Monte-Carlo samples per archetype for the expected-reward oracle.
        #[arg(long, default_value_t = 100_000)]
        oracle_samples: usize,
    },
    /// pass@1 accuracy and mean length, optionally against a baseline corpus.
    Eval {
        input: PathBuf,
        #[arg(long)]
        baseline: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Arlcp,
    AccuracyOnly,
}

impl From<Mode> for RewardMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Arlcp => RewardMode::Arlcp,
            Mode::AccuracyOnly => RewardMode::AccuracyOnly,
        }
    }
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code,
            error: error.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } | Error::DuplicateRecord { .. } | Error::InvalidRecord(_) => {
                EXIT_PARSE
            }
            Error::Config(_) => EXIT_CONFIG,
            _ => EXIT_FAILURE,
        };
        Failure::new(code, e)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure {
            code: EXIT_FAILURE,
            error,
        }
    }
}

type CmdResult<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn load_config(global: &GlobalArgs) -> CmdResult<ToolkitConfig> {
    let mut cfg = match &global.config {
        Some(path) => ToolkitConfig::load(path).map_err(|e| Failure::new(EXIT_CONFIG, e))?,
        None => ToolkitConfig::default(),
    };
    cfg.apply_overrides(&PenaltyOverrides {
        n1: global.n1,
        n2: global.n2,
        lambda1: global.lambda1,
        lambda2: global.lambda2,
        lambda3: global.lambda3,
        alpha: global.alpha,
    });
    if let Some(dir) = &global.output_dir {
        cfg.output_dir = dir.clone();
    }
    if let Some(path) = &global.lexicon {
        cfg.lexicon_path = Some(path.clone());
    }
    cfg.penalty
        .validate()
        .map_err(|e| Failure::new(EXIT_CONFIG, e))?;
    Ok(cfg)
}

fn load_lexicon(cfg: &ToolkitConfig) -> CmdResult<TriggerLexicon> {
    match &cfg.lexicon_path {
        Some(path) => TriggerLexicon::from_file(path).map_err(|e| Failure::new(EXIT_CONFIG, e)),
        None => Ok(TriggerLexicon::default()),
    }
}

fn load_corpus(path: &Path) -> CmdResult<Vec<Rollout>> {
    let rollouts = arlcp::parse_trace_file(path).map_err(|e| {
        let code = if matches!(e, Error::Io { .. }) {
            EXIT_FAILURE
        } else {
            EXIT_PARSE
        };
        Failure::new(
            code,
            anyhow!(e).context(format!("reading corpus {}", path.display())),
        )
    })?;
    if rollouts.is_empty() {
        return Err(Failure::new(
            EXIT_EMPTY,
            anyhow!("corpus {} is empty", path.display()),
        ));
    }
    Ok(rollouts)
}

/// Writes every file through a temporary in the output directory, renaming
/// only once all contents exist, so a failed command leaves no partial output.
fn write_outputs(dir: &Path, files: &[(&str, String)]) -> CmdResult {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut staged = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let mut tmp =
            tempfile::NamedTempFile::new_in(dir).with_context(|| format!("staging {name}"))?;
        tmp.write_all(contents.as_bytes())
            .and_then(|_| tmp.flush())
            .with_context(|| format!("writing {name}"))?;
        staged.push((tmp, dir.join(name)));
    }
    for (tmp, target) in staged {
        tmp.persist(&target)
            .map_err(|e| anyhow!(e.error))
            .with_context(|| format!("writing {}", target.display()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    let mut cfg = load_config(&cli.global)?;
    match cli.command {
        Command::Score { input } => {
            let lexicon = load_lexicon(&cfg)?;
            let rollouts = load_corpus(&input)?;
            let groups = score_corpus(&rollouts, &lexicon, &cfg.penalty, ExecMode::Parallel)?;
            write_outputs(
                &cfg.output_dir,
                &[
                    (
                        "scored.jsonl",
                        report::scored_jsonl(&groups, cli.global.emit_advantages),
                    ),
                    ("summary.csv", report::group_summary_csv(&groups)),
                    ("effective_config.toml", cfg.to_toml_string()),
                ],
            )?;
            println!(
                "scored {} rollouts in {} prompt groups -> {}",
                rollouts.len(),
                groups.len(),
                cfg.output_dir.display()
            );
        }
        Command::Analyze { input, bin_width } => {
            let lexicon = load_lexicon(&cfg)?;
            let rollouts = load_corpus(&input)?;
            let analysis = analyze_corpus(&rollouts, &lexicon, bin_width, ExecMode::Parallel)
                .map_err(|e| Failure::new(EXIT_CONFIG, e))?;
            let mut files = report::analysis_csvs(&analysis);
            files.push(("effective_config.toml", cfg.to_toml_string()));
            write_outputs(&cfg.output_dir, &files)?;
            println!(
                "analyzed {} rollouts -> {}",
                rollouts.len(),
                cfg.output_dir.display()
            );
        }
        Command::TrainSim {
            steps,
            mode,
            oracle_samples,
        } => {
            let mut sim_cfg = cfg.sim_config().unwrap_or_else(|| SimConfig {
                penalty: cfg.penalty,
                ..SimConfig::benchmark()
            });
            if let Some(steps) = steps {
                sim_cfg.steps = steps;
            }
            if let Some(mode) = mode {
                sim_cfg.reward_mode = mode.into();
            }
            if let Some(seed) = cli.global.seed {
                sim_cfg.seed = seed;
            }
            sim_cfg
                .validate()
                .map_err(|e| Failure::new(EXIT_CONFIG, e))?;
            if oracle_samples == 0 {
                return Err(Failure::new(
                    EXIT_CONFIG,
                    anyhow!("--oracle-samples must be positive"),
                ));
            }
            cfg.sim = Some(sim_cfg.clone());

            let run = run_training(&sim_cfg)?;
            let oracle = oracle_ranking(
                &sim_cfg,
                oracle_samples,
                sim::oracle_seed(sim_cfg.seed),
                ExecMode::Parallel,
            )?;
            let summary = summarize(&sim_cfg, &run, oracle);
            let names: Vec<String> = sim_cfg.archetypes.iter().map(|a| a.name.clone()).collect();
            write_outputs(
                &cfg.output_dir,
                &[
                    ("trace.csv", report::trace_csv(&names, &run.trace)),
                    ("summary.csv", report::training_summary_csv(&summary)),
                    (
                        "summary.json",
                        serde_json::to_string_pretty(&summary).context("serializing summary")?
                            + "\n",
                    ),
                    ("effective_config.toml", cfg.to_toml_string()),
                ],
            )?;
            println!(
                "{} steps, final probabilities {:?}, oracle best {:?}, converged: {}",
                run.trace.len(),
                summary
                    .final_probabilities
                    .iter()
                    .map(|p| report::fmt9(*p))
                    .collect::<Vec<_>>(),
                names[summary.oracle_argmax],
                summary.converged
            );
        }
        Command::Eval { input, baseline } => {
            let lexicon = load_lexicon(&cfg)?;
            let rollouts = load_corpus(&input)?;
            let runs = runs_from_corpus(&rollouts, &lexicon, ExecMode::Parallel)?;
            let base_report = match &baseline {
                Some(path) => {
                    let base = load_corpus(path)?;
                    let base_runs = runs_from_corpus(&base, &lexicon, ExecMode::Parallel)?;
                    Some(compute_eval_metrics(&base_runs, None)?)
                }
                None => None,
            };
            let report_ = compute_eval_metrics(&runs, base_report.as_ref())?;
            write_outputs(
                &cfg.output_dir,
                &[
                    ("eval.csv", report::eval_csv(&report_, base_report.as_ref())),
                    (
                        "eval_report.json",
                        serde_json::to_string_pretty(&report_).context("serializing report")?
                            + "\n",
                    ),
                    ("effective_config.toml", cfg.to_toml_string()),
                ],
            )?;
            println!(
                "evaluated {} datasets -> {}",
                report_.per_dataset.len(),
                cfg.output_dir.display()
            );
        }
    }
    Ok(())
}
