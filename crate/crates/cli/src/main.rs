//! `oriperc`: reproducible random-oriented percolation experiments.
//!
//! Exit codes: 0 success, 1 a checked property was violated, 2 usage error.

mod commands;
mod grid;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "oriperc", version, about = "Random-oriented percolation experiments", args_override_self = true)]
pub struct Cli {
    /// Worker threads (default: all cores). ORIPERC_THREADS takes precedence.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Reach probability over a parameter grid and a list of sizes.
    Sweep(SweepArgs),
    /// Exact probability of an event by full enumeration of a small region.
    Oracle(OracleArgs),
    /// Exhaustive check of the quadrant primal/dual complementarity.
    DualCheck(DualCheckArgs),
    /// Probability of an encircling dual circuit in an annulus (H-model).
    Circuit(CircuitArgs),
    /// Planar vs slab vs enriched-plane reach.
    Slab(SlabArgs),
    /// Self-avoiding walk counts.
    Saw(SawArgs),
    /// SVG snapshot of one sample.
    Render(RenderArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelName {
    Grimmett,
    H,
    Ne,
    Slab,
    Arcs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Event {
    Reach,
    Bplus,
    Circuit,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Highlight {
    Path,
    Circuit,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub model: ModelName,
    /// start:stop:step or a single value
    #[arg(long)]
    pub p: Option<String>,
    /// Forward-arc probability grid (arcs model).
    #[arg(long)]
    pub a: Option<String>,
    /// Backward-arc probability grid (arcs model).
    #[arg(long)]
    pub b: Option<String>,
    /// Comma-separated box sizes.
    #[arg(long)]
    pub sizes: String,
    #[arg(long, default_value_t = 1000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Share per-edge uniforms across the p grid.
    #[arg(long)]
    pub common_random_numbers: bool,
    /// Use only the probability-p arcs (outward arcs for the H-model).
    #[arg(long)]
    pub outward_only: bool,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long, value_enum)]
    pub model: ModelName,
    /// box:N, quad:N or annulus:N:M
    #[arg(long)]
    pub region: String,
    #[arg(long, value_enum, default_value_t = Event::Reach)]
    pub event: Event,
    #[arg(long)]
    pub p: f64,
    /// Start column a of D(a) for bplus.
    #[arg(long, default_value_t = 1)]
    pub start: i32,
    /// Inner rim of the circuit annulus (0: around the origin).
    #[arg(long, default_value_t = 0)]
    pub inner: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DualCheckArgs {
    /// Quadrant window size.
    #[arg(long, default_value_t = 2)]
    pub size: u32,
    /// Per-configuration JSON-lines records.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CircuitArgs {
    #[arg(long)]
    pub p: String,
    #[arg(long, default_value_t = 4)]
    pub inner: u32,
    #[arg(long, default_value_t = 32)]
    pub outer: u32,
    #[arg(long, default_value_t = 1000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SlabArgs {
    #[arg(long)]
    pub p: String,
    #[arg(long)]
    pub sizes: String,
    #[arg(long, default_value_t = 1000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SawArgs {
    #[arg(long, default_value_t = 14)]
    pub max_len: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    #[arg(long, value_enum)]
    pub model: ModelName,
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long, default_value_t = 8)]
    pub size: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub highlight: Option<Highlight>,
}

#[derive(Args, Debug)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Write to this path instead of the recorded one.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    ExitCode::from(commands::run(argv))
}
