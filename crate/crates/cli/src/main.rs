use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use readforge_cli::{cmd_compile, cmd_history_add, cmd_serve, cmd_validate, default_fetcher};

/// Compile annotated reading texts and a reading history into a static site.
#[derive(Parser)]
#[command(name = "readforge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the site for the current reading history.
    Compile { project: PathBuf },
    /// Manage the reading history.
    History {
        #[command(subcommand)]
        action: HistoryAction,
    },
    /// Check texts, manifests and the history without writing output.
    Validate { project: PathBuf },
    /// Serve the compiled site locally.
    Serve {
        project: PathBuf,
        #[arg(long)]
        port: u16,
        /// Event log file, appended to only when logging is enabled.
        #[arg(long)]
        log: PathBuf,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

#[derive(Subcommand)]
enum HistoryAction {
    /// Record a text as read.
    Add { project: PathBuf, text_id: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut err = std::io::stderr().lock();
    let code = match cli.command {
        Command::Compile { project } => cmd_compile(&project, default_fetcher().as_ref(), &mut err),
        Command::History { action: HistoryAction::Add { project, text_id } } => {
            cmd_history_add(&project, &text_id, &mut err)
        }
        Command::Validate { project } => cmd_validate(&project, default_fetcher().as_ref(), &mut err),
        Command::Serve { project, port, log, host } => cmd_serve(&project, &host, port, &log, &mut err),
    };
    ExitCode::from(code as u8)
}
