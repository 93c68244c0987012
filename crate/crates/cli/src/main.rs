use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Exit statuses.
pub mod exit {
    pub const OK: u8 = 0;
    pub const INVALID: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const IO: u8 = 3;
}

#[derive(Parser)]
#[command(name = "matchkit", version, about = "Read, check, convert and serve match alignment files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Common {
    /// Reject malformed lines instead of repairing them.
    #[arg(long)]
    strict: bool,
    /// Machine-readable JSON output.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Pianoroll,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Score,
    Performance,
    Joined,
}

#[derive(Subcommand)]
enum Command {
    /// Check files or directories (recursing into *.match).
    Validate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Line counts, alignment counts, spans and mean tempo.
    Stats {
        path: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Rewrite a file in canonical form (in place unless --out).
    Fmt {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Export the performance as a Standard MIDI File.
    ToMidi {
        path: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Format 1, one track per track field.
        #[arg(long)]
        multi_track: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Export a note array (CSV/JSON) or a pianoroll (JSON).
    Export {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long, value_enum, default_value = "joined")]
        side: SideArg,
        /// Pianoroll bin width (seconds or beats).
        #[arg(long)]
        resolution: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Local tempo between consecutive time-alignment anchors.
    Tempo {
        path: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Show repetition sections, or translate a beat position.
    Unfold {
        path: PathBuf,
        /// Unfolded beat to map to the original score.
        #[arg(long, allow_negative_numbers = true, conflicts_with = "original")]
        beat: Option<f64>,
        /// Original beat to map to every unfolded occurrence.
        #[arg(long, allow_negative_numbers = true)]
        original: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Render the alignment as SVG.
    Plot {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1000.0)]
        width: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Run the HTTP edit service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Persist sessions in this directory.
        #[arg(long)]
        state_dir: Option<PathBuf>,
        /// Largest accepted request body in bytes.
        #[arg(long, default_value_t = matchkit_service::DEFAULT_MAX_BODY)]
        max_body: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MATCHKIT_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { exit::OK });
        }
    };
    ExitCode::from(commands::run(cli.command))
}
