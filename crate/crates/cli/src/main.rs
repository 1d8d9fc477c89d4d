//! `singable`: data preparation, training, constraint extraction, rhyme
//! ranking, translation and evaluation from the command line.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

mod commands;
mod error;

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(name = "singable", version, about = "Singable lyric translation toolkit")]
pub struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Target-language profile: `zh-cmn`, `en`, or a profile file.
    #[arg(long, global = true, default_value = "zh-cmn")]
    pub profile: String,
    /// Worker threads for parallel steps (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Write JSON lines instead of plain text.
    #[arg(long, global = true)]
    pub jsonl: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalize a parallel corpus and write training examples.
    PrepareData(PrepareData),
    /// Mask one span per line for denoising.
    Corrupt(Corrupt),
    /// Pair target lines with the output of an external reverse translator.
    Backtranslate(Backtranslate),
    /// Fit an n-gram model on prepared examples.
    Train(Train),
    /// Read length and boundary constraints off a melody file.
    ExtractBoundaries(ExtractBoundaries),
    /// Rank end-rhyme classes for a paragraph of source lines.
    RankRhymes(RankRhymes),
    /// Translate source lines under constraints.
    Translate(Translate),
    /// Score hypotheses against constraints and references.
    Evaluate(Evaluate),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Placement {
    EncPref,
    DecPref,
    DecEmb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Normal,
    Reverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ViewArg {
    Aligned,
    Sequence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Prompt,
    Biased,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum JudgeArg {
    Lexicon,
    Token,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PrepareData {
    /// Tab-separated `source<TAB>target` lines.
    #[arg(long, conflicts_with_all = ["sources", "targets"], required_unless_present = "sources")]
    pub pairs: Option<PathBuf>,
    /// Source side of an aligned corpus.
    #[arg(long, requires = "targets")]
    pub sources: Option<PathBuf>,
    /// Target side of an aligned corpus.
    #[arg(long, requires = "sources")]
    pub targets: Option<PathBuf>,
    #[arg(long, default_value = "en")]
    pub source_profile: String,
    #[arg(long, value_enum, default_value_t = Placement::DecPref)]
    pub placement: Placement,
    #[arg(long, value_enum, default_value_t = DirectionArg::Reverse)]
    pub direction: DirectionArg,
    /// Fraction of examples whose rhyme prompt is replaced by rhy_0, as a
    /// decimal or `p/q`.
    #[arg(long, default_value = "1/15", value_parser = parse_rate)]
    pub null_rhyme_rate: f64,
    /// Also write the normalized source of each example, one per line.
    #[arg(long)]
    pub sources_out: Option<PathBuf>,
    /// Also write the normalized target of each example, one per line.
    #[arg(long)]
    pub targets_out: Option<PathBuf>,
    /// Also write the constraint line of each example.
    #[arg(long)]
    pub constraints_out: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct Corrupt {
    /// One sentence per line.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct Backtranslate {
    /// Target-language lines.
    #[arg(long)]
    pub input: PathBuf,
    /// Shell command reading lines on stdin and writing one translation per
    /// line.
    #[arg(long)]
    pub cmd: String,
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    pub batch_size: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct Train {
    /// Training examples written by `prepare-data`.
    #[arg(long)]
    pub examples: PathBuf,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = ViewArg::Aligned)]
    pub view: ViewArg,
    /// Hash buckets for source conditioning (0 disables it).
    #[arg(long, default_value_t = 1024)]
    pub source_buckets: u32,
}

#[derive(Debug, Args)]
pub struct ExtractBoundaries {
    /// Melody document (melody-json).
    pub melody: PathBuf,
    /// Shortest rest, in beats, that counts as a pause.
    #[arg(long, default_value = "0")]
    pub min_rest: String,
    /// Semitone margin for high notes.
    #[arg(long, default_value_t = 3, conflicts_with = "no_high_notes")]
    pub high_note_threshold: i32,
    /// Only downbeats are highlighted.
    #[arg(long)]
    pub no_high_notes: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct Constrained {
    /// Model file written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// Source lines.
    #[arg(long)]
    pub input: PathBuf,
    /// Constraint lines parallel to the input; derived from the source
    /// lines when absent.
    #[arg(long)]
    pub constraints: Option<PathBuf>,
    #[arg(long, default_value = "en")]
    pub source_profile: String,
    #[arg(long, value_enum, default_value_t = Placement::DecPref)]
    pub placement: Placement,
}

#[derive(Debug, Args)]
pub struct RankRhymes {
    #[command(flatten)]
    pub common: Constrained,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct Translate {
    #[command(flatten)]
    pub common: Constrained,
    /// Rhyme class for constraints derived from the source (0 = none).
    #[arg(long, default_value_t = 0, conflicts_with = "constraints")]
    pub rhyme: u8,
    #[arg(long, value_enum, default_value_t = ModeArg::Prompt)]
    pub mode: ModeArg,
    /// Decoding direction; must match the model.
    #[arg(long, value_enum)]
    pub direction: Option<DirectionArg>,
    #[arg(long, default_value_t = 5)]
    pub beam_size: usize,
    /// Longest output in tokens, end marker included.
    #[arg(long, default_value_t = 30)]
    pub max_len: usize,
    /// Only finish hypotheses whose syllable count equals the constraint.
    #[arg(long)]
    pub hard_length: bool,
    #[arg(long, default_value_t = 0.0)]
    pub rhyme_bonus: f64,
    #[arg(long, default_value_t = 0.0)]
    pub boundary_bonus: f64,
    #[arg(long, value_enum, default_value_t = JudgeArg::Lexicon)]
    pub judge: JudgeArg,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct Evaluate {
    #[arg(long)]
    pub hypotheses: PathBuf,
    #[arg(long)]
    pub references: Option<PathBuf>,
    #[arg(long)]
    pub constraints: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

fn parse_rate(s: &str) -> Result<f64, String> {
    let value = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| format!("bad rate {s:?}"))?;
            let q: f64 = q.trim().parse().map_err(|_| format!("bad rate {s:?}"))?;
            p / q
        }
        None => s.trim().parse().map_err(|_| format!("bad rate {s:?}"))?,
    };
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(format!("rate {s} is outside [0, 1]"))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Command::Translate(t) = &cli.command {
        if t.mode == ModeArg::Prompt && (t.rhyme_bonus != 0.0 || t.boundary_bonus != 0.0) {
            Cli::command()
                .error(
                    clap::error::ErrorKind::ArgumentConflict,
                    "--rhyme-bonus and --boundary-bonus need --mode biased",
                )
                .exit();
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {e}", e.kind());
            ExitCode::from(1)
        }
    }
}
