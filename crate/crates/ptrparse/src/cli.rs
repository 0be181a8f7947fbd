//! `ptrparse` subcommands. Exit codes: 0 success, 1 a check or comparison
//! failed, 2 usage or I/O error.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use ptrparse_core::config::{CyclePolicy, Mode, RunConfig};
use ptrparse_core::eval::{aggregate_runs, score};
use ptrparse_core::l2r::{oracle_actions, L2RState};
use ptrparse_core::sentence::{PunctMode, Sentence};
use ptrparse_core::topdown::{td_oracle, TopDownState};
use ptrparse_core::train::TrainError;
use ptrparse_core::transition::TransitionState;
use ptrparse_core::tree::DependencyTree;

use crate::checkpoint::Checkpoint;
use crate::compare::{compare_systems, CompareSettings};
use crate::conllu;
use crate::pipeline::{parse_treebank, train_model, EpochRecord, StatsRecord};

/// Overrides the default output directory of `train`.
pub const OUT_DIR_ENV: &str = "PTRPARSE_OUT_DIR";
pub const CHECKPOINT_FILE: &str = "model.ckpt";
pub const METRICS_FILE: &str = "metrics.tsv";

#[derive(Debug, Parser)]
#[command(name = "ptrparse", version, about = "Pointer-network dependency parser")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model and keep the checkpoint with the best evaluation UAS.
    Train(TrainArgs),
    /// Parse a CoNLL-U file with a trained checkpoint.
    Parse(ParseArgs),
    /// Score predicted CoNLL-U files against a gold file.
    Eval(EvalArgs),
    /// Compare accuracy, steps and speed of an L2R and a top-down checkpoint.
    Compare(CompareArgs),
    /// Replay gold trees through both transition oracles.
    OracleCheck(OracleCheckArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub train: PathBuf,
    /// Evaluated after every epoch; the training set is used when absent.
    #[arg(long)]
    pub dev: Option<PathBuf>,
    /// Output directory (default: $PTRPARSE_OUT_DIR or the current directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// File of `key = value` lines; flags take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Any configuration key, as KEY=VALUE. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Accepted for symmetry; training is single-threaded.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    /// Defaults to standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub beam: usize,
    #[arg(long, default_value_t = CyclePolicy::Forbid)]
    pub cycle_policy: CyclePolicy,
    /// JSON-lines file with per-sentence step counts and timings.
    #[arg(long)]
    pub stats: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub gold: PathBuf,
    /// One file per run; several runs are also aggregated.
    #[arg(long, required = true)]
    pub pred: Vec<PathBuf>,
    #[arg(long, default_value_t = PunctMode::Ud)]
    pub punct: PunctMode,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub l2r: PathBuf,
    #[arg(long)]
    pub topdown: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub beam: usize,
    #[arg(long, default_value_t = CyclePolicy::Forbid)]
    pub cycle_policy: CyclePolicy,
    #[arg(long, default_value_t = PunctMode::Ud)]
    pub punct: PunctMode,
    /// Timed passes per system; the fastest is reported.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    /// Also write the report as JSON to this path.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleCheckArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(anyhow::Error),
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Usage(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(e) => write!(f, "{:#}", e),
            CliError::Failed(msg) => f.write_str(msg),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e);
            e.exit_code()
        }
    }
}

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Train(a) => train(a),
        Command::Parse(a) => parse(a),
        Command::Eval(a) => eval(a),
        Command::Compare(a) => compare(a),
        Command::OracleCheck(a) => oracle_check(a),
    }
}

fn load(path: &Path) -> anyhow::Result<Vec<Sentence>> {
    conllu::read_path(path).with_context(|| format!("reading {}", path.display()))
}

fn load_checkpoint(path: &Path) -> anyhow::Result<Checkpoint> {
    Checkpoint::load(path).with_context(|| format!("loading checkpoint {}", path.display()))
}

/// Defaults, then the config file, then explicit flags.
pub fn resolve_config(a: &TrainArgs) -> anyhow::Result<RunConfig> {
    let mut config = RunConfig::default();
    if let Some(path) = &a.config {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        config
            .apply_text(&text)
            .map_err(|e| anyhow!("{}: {}", path.display(), e))?;
    }
    if let Some(m) = a.mode {
        config.mode = m;
    }
    if let Some(e) = a.epochs {
        config.epochs = e;
    }
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if let Some(b) = a.batch_size {
        config.set("batch_size", &b.to_string()).map_err(|e| anyhow!("{}", e))?;
    }
    if let Some(lr) = a.learning_rate {
        config.optimizer.learning_rate = lr;
    }
    for item in &a.overrides {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| anyhow!("--set expects KEY=VALUE, got {:?}", item))?;
        config.set(key.trim(), value).map_err(|e| anyhow!("{}", e))?;
    }
    Ok(config)
}

fn output_dir(flag: &Option<PathBuf>) -> PathBuf {
    flag.clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn train(a: TrainArgs) -> Result<(), CliError> {
    let config = resolve_config(&a)?;
    let train_set = load(&a.train)?;
    if train_set.is_empty() {
        return Err(anyhow!("{} contains no sentences", a.train.display()).into());
    }
    let dev = match &a.dev {
        Some(p) => load(p)?,
        None => train_set.clone(),
    };
    let out = output_dir(&a.out);
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let metrics_path = out.join(METRICS_FILE);
    let mut metrics = std::fs::File::create(&metrics_path)
        .with_context(|| format!("creating {}", metrics_path.display()))?;
    writeln!(metrics, "{}", EpochRecord::HEADER).context("writing metrics")?;
    let mut write_error = None;
    let outcome = train_model(&train_set, &dev, &config, |r| {
        println!(
            "epoch {:>3}  loss {:>10.4}  uas {:>6.2}  las {:>6.2}",
            r.epoch, r.loss, r.uas, r.las
        );
        if let Err(e) = writeln!(metrics, "{}", r.tsv()) {
            write_error = Some(e);
            return true;
        }
        false
    })
    .map_err(|e| match e {
        TrainError::Diverged { .. } => CliError::Failed(format!("training failed: {}", e)),
        _ => CliError::Usage(anyhow!("training failed: {}", e)),
    })?;
    if let Some(e) = write_error {
        return Err(anyhow!("writing {}: {}", metrics_path.display(), e).into());
    }
    let ckpt_path = out.join(CHECKPOINT_FILE);
    outcome
        .best
        .save(&ckpt_path)
        .with_context(|| format!("writing {}", ckpt_path.display()))?;
    println!(
        "best epoch {} saved to {}; metrics in {}",
        outcome.best_epoch,
        ckpt_path.display(),
        metrics_path.display()
    );
    Ok(())
}

fn parse(a: ParseArgs) -> Result<(), CliError> {
    if a.beam == 0 {
        return Err(anyhow!("--beam must be at least 1").into());
    }
    let ckpt = load_checkpoint(&a.model)?;
    let sentences = load(&a.input)?;
    let parsed = parse_treebank(&ckpt, &sentences, a.beam, a.cycle_policy, a.threads);
    let trees: Vec<DependencyTree> = parsed.iter().map(|p| p.output.tree.clone()).collect();
    match &a.output {
        Some(path) => {
            let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            conllu::write_conllu(std::io::BufWriter::new(file), &sentences, Some(&trees))
                .map_err(anyhow::Error::from)?;
        }
        None => {
            let stdout = std::io::stdout();
            conllu::write_conllu(stdout.lock(), &sentences, Some(&trees)).map_err(anyhow::Error::from)?;
        }
    }
    if let Some(path) = &a.stats {
        let mut out = std::io::BufWriter::new(
            std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
        );
        for (s, p) in sentences.iter().zip(&parsed) {
            let line = serde_json::to_string(&StatsRecord::new(s, p)).context("serialising stats")?;
            writeln!(out, "{}", line).context("writing stats")?;
        }
        out.flush().context("writing stats")?;
    }
    let repaired = parsed.iter().filter(|p| p.output.repaired).count();
    if a.cycle_policy == CyclePolicy::PostFix && ckpt.config.mode == Mode::L2r {
        eprintln!(
            "repaired {} of {} sentences ({:.2}%)",
            repaired,
            sentences.len(),
            100.0 * repaired as f64 / sentences.len().max(1) as f64
        );
    }
    Ok(())
}

fn eval(a: EvalArgs) -> Result<(), CliError> {
    let gold = load(&a.gold)?;
    let mut runs = Vec::new();
    for path in &a.pred {
        let pred = load(path)?;
        let trees: Vec<DependencyTree> = pred.iter().map(|s| s.gold_tree()).collect();
        let scores = score(&gold, &trees, a.punct).map_err(|e| anyhow!("{}: {}", path.display(), e))?;
        runs.push((path.display().to_string(), scores));
    }
    let only: Vec<_> = runs.iter().map(|(_, s)| *s).collect();
    let agg = aggregate_runs(&only).expect("at least one run");
    if a.json {
        let value = serde_json::json!({
            "runs": runs.iter().map(|(p, s)| serde_json::json!({
                "file": p, "uas": s.uas, "las": s.las,
                "scored": s.counts.scored,
                "correct_heads": s.counts.correct_heads,
                "correct_labeled": s.counts.correct_labeled,
            })).collect::<Vec<_>>(),
            "uas": {"mean": agg.0.mean, "stddev": agg.0.stddev},
            "las": {"mean": agg.1.mean, "stddev": agg.1.stddev},
        });
        println!("{}", serde_json::to_string_pretty(&value).context("serialising")?);
    } else {
        for (p, s) in &runs {
            println!(
                "{}: UAS {:.2} LAS {:.2} ({} scored tokens)",
                p, s.uas, s.las, s.counts.scored
            );
        }
        if runs.len() > 1 {
            println!(
                "mean over {} runs: UAS {:.2} ± {:.2}  LAS {:.2} ± {:.2}",
                runs.len(),
                agg.0.mean,
                agg.0.stddev,
                agg.1.mean,
                agg.1.stddev
            );
        }
    }
    Ok(())
}

fn compare(a: CompareArgs) -> Result<(), CliError> {
    if a.beam == 0 {
        return Err(anyhow!("--beam must be at least 1").into());
    }
    let l2r = load_checkpoint(&a.l2r)?;
    let topdown = load_checkpoint(&a.topdown)?;
    let sentences = load(&a.input)?;
    let settings = CompareSettings {
        beam: a.beam,
        policy: a.cycle_policy,
        punct: a.punct,
        repeats: a.repeats,
    };
    let report = compare_systems(&sentences, &l2r, &topdown, &settings).map_err(anyhow::Error::from)?;
    print!("{}", report.to_text());
    if let Some(path) = &a.json {
        std::fs::write(path, report.to_json()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

/// Result of replaying one treebank through one oracle.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReplaySummary {
    pub sentences: usize,
    pub steps: usize,
    pub expected_steps: usize,
    pub failures: Vec<String>,
}

fn replay<S: TransitionState>(mut state: S, actions: &[usize]) -> Option<Vec<usize>> {
    for &a in actions {
        if state.is_terminal() || !state.candidates().contains(&a) {
            return None;
        }
        state.apply(a).ok()?;
    }
    if state.is_terminal() {
        state.heads()
    } else {
        None
    }
}

pub fn replay_treebank(sentences: &[Sentence], mode: Mode) -> ReplaySummary {
    let mut summary = ReplaySummary::default();
    for (k, s) in sentences.iter().enumerate() {
        let gold = s.heads();
        let n = gold.len();
        summary.sentences += 1;
        let (actions, rebuilt, expected) = match mode {
            Mode::L2r => {
                let actions = oracle_actions(&gold).ok();
                let rebuilt = actions
                    .as_ref()
                    .and_then(|a| replay(L2RState::new(n).ok()?, a));
                (actions, rebuilt, n)
            }
            Mode::TopDown => {
                let actions = td_oracle(&gold).ok();
                let rebuilt = actions
                    .as_ref()
                    .and_then(|a| replay(TopDownState::new(n).ok()?, a));
                (actions, rebuilt, 2 * n - 1)
            }
        };
        summary.expected_steps += expected;
        let steps = actions.as_ref().map_or(0, Vec::len);
        summary.steps += steps;
        if rebuilt.as_deref() != Some(&gold[..]) || steps != expected {
            summary
                .failures
                .push(s.id.clone().unwrap_or_else(|| format!("#{}", k + 1)));
        }
    }
    summary
}

fn oracle_check(a: OracleCheckArgs) -> Result<(), CliError> {
    let mut sentences = Vec::new();
    for path in &a.inputs {
        sentences.extend(load(path)?);
    }
    let mut failed = Vec::new();
    for (mode, name, formula) in [(Mode::L2r, "l2r", "Σn"), (Mode::TopDown, "topdown", "Σ(2n−1)")] {
        let s = replay_treebank(&sentences, mode);
        if s.failures.is_empty() {
            println!(
                "{}: {} sentences, all reconstructed, steps = {} = {}",
                name, s.sentences, formula, s.steps
            );
        } else {
            println!(
                "{}: {} sentences, {} failed: {}",
                name,
                s.sentences,
                s.failures.len(),
                s.failures.join(", ")
            );
            failed.push(name);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("oracle replay failed for {}", failed.join(" and "))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        std::fs::write(&cfg, "mode = topdown\nepochs = 7\nseed = 3\n").unwrap();
        let cli = Cli::try_parse_from([
            "ptrparse",
            "train",
            "--train",
            "x.conllu",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "9",
            "--set",
            "word_dim=12",
        ])
        .unwrap();
        let Command::Train(args) = cli.command else { panic!() };
        let c = resolve_config(&args).unwrap();
        assert_eq!(c.mode, Mode::TopDown);
        assert_eq!(c.epochs, 7);
        assert_eq!(c.seed, 9);
        assert_eq!(c.dims.word_dim, 12);
    }

    #[test]
    fn bad_override_is_rejected() {
        let cli = Cli::try_parse_from(["ptrparse", "train", "--train", "x", "--set", "nonsense=1"]).unwrap();
        let Command::Train(args) = cli.command else { panic!() };
        assert!(resolve_config(&args).is_err());
    }
}
