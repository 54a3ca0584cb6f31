mod commands;
mod config;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dialdep::label::DependencyLabel;

use crate::config::{FileConfig, Overrides, Settings};

/// Dialogue-level dependency parsing toolkit.
#[derive(Debug, Parser)]
#[command(name = "dialdep", version)]
pub struct Cli {
    /// Random seed for synthetic data.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Confidence threshold for pseudo-label selection.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Minimum head distance for transforming labels.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// TOML file with default settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for per-dialogue work.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Human-readable report on stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Pre,
    Post,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ViewArg {
    S,
    T,
}

/// Where EDU signals come from.
#[derive(Debug, Args)]
pub struct SignalArgs {
    /// Signal lexicon (word TAB signal); defaults to the built-in lexicon.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Per-EDU signal or word distributions (JSON lines) instead of lexicon lookup.
    #[arg(long)]
    distributions: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check treebank files; prints OK.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Corpus and per-label statistics.
    Stats { file: PathBuf },
    /// EDU spans of every utterance.
    Segment {
        file: PathBuf,
        /// Ignore the file's trees (punctuation cuts only).
        #[arg(long)]
        no_deps: bool,
        /// Score the spans against EDUs read off the file's annotation.
        #[arg(long)]
        eval: bool,
    },
    /// Signal of every EDU.
    DetectSignals {
        file: PathBuf,
        #[command(flatten)]
        signals: SignalArgs,
    },
    /// Rewrite syntactic trees into dialogue trees.
    Transform {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "post")]
        mode: ModeArg,
        #[command(flatten)]
        signals: SignalArgs,
        /// Write the transformation log (JSON lines) here.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Write the result here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Keep scored utterances above the confidence threshold.
    Filter {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long, value_enum, default_value = "s")]
        view: ViewArg,
        /// Predicted treebank matching the scores; enables --out.
        #[arg(long)]
        pred: Option<PathBuf>,
        /// Write the kept utterances as a treebank.
        #[arg(long, requires = "pred")]
        out: Option<PathBuf>,
        /// Self-training rounds; only one is possible without a trainer.
        #[arg(long, default_value_t = 1)]
        iterations: usize,
    },
    /// Merge the selections of two parsers.
    Merge {
        #[arg(long)]
        scores_s: PathBuf,
        #[arg(long)]
        scores_t: PathBuf,
        #[arg(long, requires = "pred_t")]
        pred_s: Option<PathBuf>,
        #[arg(long, requires = "pred_s")]
        pred_t: Option<PathBuf>,
        #[arg(long, requires = "pred_s")]
        out: Option<PathBuf>,
    },
    /// UAS/LAS against gold.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        by_label: bool,
    },
    /// How well a syntactic label stands in for inter-EDU labels.
    Match {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        syn_label: DependencyLabel,
        /// Score a single inter-EDU label instead of ranking.
        #[arg(long)]
        inter_label: Option<DependencyLabel>,
        #[arg(long, default_value_t = 5)]
        top: usize,
    },
    /// Per-label agreement between gold inter-EDU labels and EDU signals.
    SignalMatch {
        gold: PathBuf,
        #[command(flatten)]
        signals: SignalArgs,
    },
    /// Kept-data size across thresholds.
    Sweep {
        #[arg(long, required_unless_present = "synthetic")]
        scores_s: Option<PathBuf>,
        #[arg(long)]
        scores_t: Option<PathBuf>,
        /// Use this many generated dialogues (seeded) instead of score files.
        #[arg(long, conflicts_with_all = ["scores_s", "scores_t"])]
        synthetic: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        from: f64,
        #[arg(long, default_value_t = 1.0)]
        to: f64,
        #[arg(long, default_value_t = 20)]
        steps: usize,
    },
    /// Draw dialogue trees as indented text.
    Render {
        file: PathBuf,
        #[arg(long)]
        dialogue: Option<String>,
    },
}

/// Raised for problems with the invocation itself (exit code 1).
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn settings(cli: &Cli) -> anyhow::Result<Settings> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    Settings::resolve(
        file,
        Overrides {
            seed: cli.seed,
            epsilon: cli.epsilon,
            k: cli.k,
            jobs: cli.jobs,
            verbose: cli.verbose,
        },
    )
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let settings = match settings(&cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    match commands::run(&cli.command, &settings) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
