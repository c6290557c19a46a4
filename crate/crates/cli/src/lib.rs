//! The `romp` command: train context tables, recompress and restore JPEG
//! files, benchmark a corpus, and estimate deployment benefits.

mod bench;
mod codec;
mod estimate;
mod output;
mod train;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use romp_core::Error;

pub use output::Format;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const UNSUPPORTED: i32 = 2;
    pub const CORRUPT: i32 = 3;
    pub const VERIFICATION: i32 = 4;
}

#[derive(Debug, Parser)]
#[command(name = "romp", version, about = "Context-modeled lossless recompression for baseline JPEG")]
pub struct Cli {
    /// Report format on standard output.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// More diagnostics on standard error.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a context table set on a directory of JPEG files.
    Train(train::TrainArgs),
    /// Recompress a JPEG file into a ROMP container.
    Encode(codec::EncodeArgs),
    /// Restore the JPEG file from a ROMP container.
    Decode(codec::DecodeArgs),
    /// Measure compression and speed over a directory of JPEG files.
    Bench(bench::BenchArgs),
    /// Estimate cache, bandwidth, storage and latency effects.
    Estimate(estimate::EstimateArgs),
}

#[derive(Debug, Args)]
pub struct TablesArg {
    /// Table set file.
    #[arg(long, env = "ROMP_TABLES")]
    pub tables: PathBuf,
}

/// A failed command: the exit code and the message for standard error.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(exit::USAGE, message)
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Self::usage(format!("{}: {e}", path.display()))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::UnsupportedMode(_) => exit::UNSUPPORTED,
            Error::Io(_) | Error::InvalidParams(_) | Error::InsufficientSamples(_) => exit::USAGE,
            // Corrupt inputs and coefficient data the JPEG tables cannot
            // express are both data errors.
            _ => exit::CORRUPT,
        };
        Self::new(code, e.to_string())
    }
}

pub type CmdResult = Result<(), Failure>;

pub(crate) fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::io(path, e))
}

pub(crate) fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| Failure::io(path, e))
}

pub(crate) fn load_tables(path: &Path) -> Result<romp_core::ContextTableSet, Failure> {
    let bytes = read(path)?;
    Ok(romp_core::ContextTableSet::from_bytes(&bytes)?)
}

pub(crate) fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// JPEG files directly inside `dir`, sorted by name.
pub(crate) fn jpeg_files(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let entries = std::fs::read_dir(dir).map_err(|e| Failure::io(dir, e))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| e.eq_ignore_ascii_case("jpg") || e.eq_ignore_ascii_case("jpeg"))
        })
        .collect();
    files.sort();
    Ok(files)
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code. Diagnostics go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    let out = output::Output { format: cli.format, verbose: cli.verbose };
    let result = match &cli.command {
        Command::Train(a) => train::run(a, &out),
        Command::Encode(a) => codec::encode(a, &out),
        Command::Decode(a) => codec::decode(a, &out),
        Command::Bench(a) => bench::run(a, &out),
        Command::Estimate(a) => estimate::run(a, &out),
    };
    match result {
        Ok(()) => exit::OK,
        Err(f) => {
            eprintln!("romp: {}", f.message);
            f.code
        }
    }
}
