//! `crosswalk`: tile, detect, export, evaluate, and inspect the attention blocks.

mod commands;
mod external;
mod settings;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use settings::{Flags, Settings};

#[derive(Debug, Parser)]
#[command(name = "crosswalk", version, about = "Oriented crosswalk detection over large aerial rasters")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    flags: Flags,
    /// Log progress to stderr (repeat for more detail)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Print the tile plan for a raster (or a --width x --height extent)
    Tile,
    /// Run sliced detection and write merged detections
    Detect,
    /// Convert detections into a shapefile set and GeoJSON
    Export,
    /// Score detections against oriented-box labels
    Evaluate,
    /// Run the pooling and attention blocks on seeded input and check their invariants
    DemoModules,
}

/// A failed run: message for stderr and the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub const INPUT: u8 = 2;
    pub const RUNTIME: u8 = 3;
    pub const INVARIANT: u8 = 4;

    pub fn input(message: impl Into<String>) -> Self {
        Self { code: Self::INPUT, message: message.into() }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Self { code: Self::RUNTIME, message: message.into() }
    }

    pub fn invariant(message: impl Into<String>) -> Self {
        Self { code: Self::INVARIANT, message: message.into() }
    }
}

impl From<crosswalk_core::Error> for Failure {
    fn from(e: crosswalk_core::Error) -> Self {
        use crosswalk_core::Error as E;
        match e {
            E::TileFailures(list) => {
                let mut msg = format!("{} tile(s) failed:", list.len());
                for (tile, why) in list {
                    msg.push_str(&format!("\n  tile {tile}: {why}"));
                }
                Failure::runtime(msg)
            }
            e @ E::Backend { .. } => Failure::runtime(e.to_string()),
            e => Failure::input(e.to_string()),
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let settings = Settings::load(&cli.flags)?;
    match cli.command {
        Cmd::Tile => commands::tile(&settings),
        Cmd::Detect => commands::detect(&settings),
        Cmd::Export => commands::export(&settings),
        Cmd::Evaluate => commands::evaluate(&settings),
        Cmd::DemoModules => commands::demo_modules(&settings),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
