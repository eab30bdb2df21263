use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use stereo_decorr::audio::SampleFormat;
use stereo_decorr::{Algorithm, PresetId};

#[derive(Debug, Parser)]
#[command(
    name = "decorr",
    version,
    about = "Stereo decorrelation for acoustic echo cancellation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decorrelate a WAV file (mono input is duplicated to stereo).
    Process(ProcessArgs),
    /// Measure squared coherence between two channels or two files.
    Measure(MeasureArgs),
    /// Run presets over every WAV file in a directory and rank them.
    Compare(CompareArgs),
    /// Stereo echo-path identification with and without decorrelation.
    AecDemo(AecDemoArgs),
}

#[derive(Debug, Args)]
pub struct SeedArg {
    /// Master seed; falls back to DECORR_SEED, then 0.
    #[arg(long, env = "DECORR_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ProcessArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    #[arg(long, conflicts_with = "params", value_parser = parse_preset)]
    pub preset: Option<PresetId>,
    /// Explicit algorithm, e.g. `proposed:beta=0.36,gamma=1`,
    /// `smoothed_abs:alpha=0.3` or `allpass1:alpha_min=-0.985`.
    #[arg(long, value_parser = parse_algorithm)]
    pub params: Option<Algorithm>,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Output sample format.
    #[arg(long, value_enum, default_value_t = OutFormat::Float32)]
    pub format: OutFormat,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// A stereo file, or the first of two mono files.
    pub first: PathBuf,
    pub second: Option<PathBuf>,
    #[arg(long, conflicts_with = "csv")]
    pub json: bool,
    /// One row per frequency bin instead of the JSON report.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub corpus: PathBuf,
    #[arg(long, value_delimiter = ',', value_parser = parse_preset, default_value = "P1,P2,P3,P4,P5,P6")]
    pub presets: Vec<PresetId>,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AecDemoArgs {
    /// Preset applied before playback, or `none`.
    #[arg(long, default_value = "P2", value_parser = parse_optional_preset)]
    pub preset: DemoPreset,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Misalignment trace CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Far-end length in seconds.
    #[arg(long, default_value_t = 10.0)]
    pub duration: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct DemoPreset(pub Option<PresetId>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Pcm16,
    Pcm24,
    Float32,
}

impl From<OutFormat> for SampleFormat {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Pcm16 => SampleFormat::Pcm16,
            OutFormat::Pcm24 => SampleFormat::Pcm24,
            OutFormat::Float32 => SampleFormat::Float32,
        }
    }
}

fn parse_preset(s: &str) -> Result<PresetId, String> {
    s.trim()
        .parse()
        .map_err(|e: stereo_decorr::Error| e.to_string())
}

fn parse_optional_preset(s: &str) -> Result<DemoPreset, String> {
    if s.eq_ignore_ascii_case("none") {
        Ok(DemoPreset(None))
    } else {
        parse_preset(s).map(|p| DemoPreset(Some(p)))
    }
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: stereo_decorr::Error| e.to_string())
}
