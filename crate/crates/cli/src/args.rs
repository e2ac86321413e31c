use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "orfocus", version, about = "Visual-attention analytics from onfocus prediction logs")]
pub struct Cli {
    /// TOML file with default fusion and segmentation settings.
    #[arg(long, global = true, env = "ORFOCUS_CONFIG")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fuse, segment and summarize one session.
    Analyze(AnalyzeArgs),
    /// Framework vs human observer tables across sessions.
    Compare(CompareArgs),
    /// Frame-level accuracy/F1 against human labels with k-fold reporting.
    Evaluate(EvaluateArgs),
    /// Gantt-style task timeline with a gaze track.
    Timeline(TimelineArgs),
    /// Write a synthetic session directory.
    Synth(SynthArgs),
    /// Data-hygiene report for a frame log.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FramesFormat {
    Jsonl,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Pairing {
    Strict,
    Truncate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FrequencyModeArg {
    Phase,
    Window,
}

#[derive(Debug, Clone, Args)]
pub struct FusionArgs {
    /// Minimum eye-context confidence for an onfocus face (inclusive).
    #[arg(long)]
    pub onfocus_threshold: Option<f64>,
    /// In-frame attention at or above which a face is gated out.
    #[arg(long)]
    pub in_frame_threshold: Option<f64>,
    /// any_face, largest_face, or tracked:<face id>.
    #[arg(long)]
    pub aggregation: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SegArgs {
    /// Merge events separated by at most this many seconds.
    #[arg(long)]
    pub max_gap: Option<f64>,
    /// Drop merged events shorter than this many seconds.
    #[arg(long)]
    pub min_duration: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct PhaseArgs {
    #[arg(long, requires = "phase_end")]
    pub phase_start: Option<f64>,
    #[arg(long, requires = "phase_start")]
    pub phase_end: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub frames: PathBuf,
    /// Frame log format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    pub frames_format: Option<FramesFormat>,
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["csv", "json", "svg"])]
    pub format: Vec<OutputFormat>,
    #[arg(long, value_enum, default_value = "truncate")]
    pub pairing: Pairing,
    #[arg(long, value_enum, default_value = "phase")]
    pub frequency_mode: FrequencyModeArg,
    #[command(flatten)]
    pub phase: PhaseArgs,
    #[command(flatten)]
    pub fusion: FusionArgs,
    #[command(flatten)]
    pub seg: SegArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Frame logs, one per session; paired by position with --annotations.
    #[arg(long = "frames", required = true, num_args = 1..)]
    pub frames: Vec<PathBuf>,
    #[arg(long = "annotations", required = true, num_args = 1..)]
    pub annotations: Vec<PathBuf>,
    #[arg(long, value_enum)]
    pub frames_format: Option<FramesFormat>,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["csv", "json"])]
    pub format: Vec<OutputFormat>,
    /// Annotation behavior holding human-labeled monitor interactions.
    #[arg(long, default_value = "Monitor interaction")]
    pub human_behavior: String,
    /// Task behaviors for the task-context overlap table.
    #[arg(long = "task-behavior", default_values = ["Airway manipulation"])]
    pub task_behaviors: Vec<String>,
    #[arg(long, value_enum, default_value = "truncate")]
    pub pairing: Pairing,
    #[arg(long, value_enum, default_value = "phase")]
    pub frequency_mode: FrequencyModeArg,
    #[command(flatten)]
    pub fusion: FusionArgs,
    #[command(flatten)]
    pub seg: SegArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub frames: PathBuf,
    #[arg(long, value_enum)]
    pub frames_format: Option<FramesFormat>,
    /// CSV with columns frame_index,label (label: onfocus/out_of_focus, 1/0 or true/false).
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "Complete pipeline")]
    pub model: String,
    #[arg(long, default_value = "Medical simulations")]
    pub dataset: String,
    #[command(flatten)]
    pub fusion: FusionArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TimelineArgs {
    #[arg(long)]
    pub frames: PathBuf,
    #[arg(long, value_enum)]
    pub frames_format: Option<FramesFormat>,
    #[arg(long)]
    pub annotations: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value = "truncate")]
    pub pairing: Pairing,
    #[command(flatten)]
    pub fusion: FusionArgs,
    #[command(flatten)]
    pub seg: SegArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    /// JSON file with a full generator configuration; flags override its fields.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub session_id: Option<String>,
    #[arg(long)]
    pub camera_id: Option<String>,
    #[arg(long)]
    pub phase_duration: Option<f64>,
    #[arg(long)]
    pub fps: Option<f64>,
    /// Gaze events per 5 minutes.
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long)]
    pub mean_duration: Option<f64>,
    #[arg(long)]
    pub jitter: Option<f64>,
    #[arg(long)]
    pub flip_probability: Option<f64>,
    #[arg(long)]
    pub distractors: Option<usize>,
    /// Scripted task as BEHAVIOR:START:END (seconds); repeatable.
    #[arg(long = "task")]
    pub tasks: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub frames: PathBuf,
    #[arg(long, value_enum)]
    pub frames_format: Option<FramesFormat>,
    /// Also write validation.json here.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}
