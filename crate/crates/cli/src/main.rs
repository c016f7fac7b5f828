use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use moira_cli::{cmd_interpret, cmd_repl, cmd_run_rules, Format, Input, Paths, Repl};
use moira_core::hub::{Hub, HubConfig};
use moira_core::persist;
use moira_core::tasking::{parse_modes, TaskingConfig};

#[derive(Parser)]
#[command(name = "moira", version, about = "Talk to a Controlled English knowledge base")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Files {
    /// Conceptual model (CE); defaults to the bundled one.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Fusion rules.
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Gist templates.
    #[arg(long)]
    templates: Option<PathBuf>,
    /// Sensing asset catalogue (CE).
    #[arg(long)]
    catalogue: Option<PathBuf>,
}

impl Files {
    fn paths(&self) -> Paths {
        Paths {
            model: self.model.clone(),
            rules: self.rules.clone(),
            templates: self.templates.clone(),
            catalogue: self.catalogue.clone(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Interpret one submission per line and summarise the scores.
    Interpret {
        /// Input file; `-` or nothing reads standard input.
        input: Option<PathBuf>,
        /// Conceptual model (CE) whose lexicon is used.
        #[arg(long)]
        model: Option<PathBuf>,
        /// `text` or `json`.
        #[arg(long, default_value = "text")]
        format: Format,
    },
    /// Load CE facts, run the rules to a fixpoint and explain what was inferred.
    RunRules {
        /// CE files with facts.
        facts: Vec<PathBuf>,
        #[command(flatten)]
        files: Files,
        #[arg(long, default_value = "text")]
        format: Format,
        /// Save the resulting knowledge base here.
        #[arg(long)]
        kb_out: Option<PathBuf>,
    },
    /// Chat with Moira as a participant.
    Repl {
        #[command(flatten)]
        files: Files,
        /// Start from a saved knowledge base instead of the model alone.
        #[arg(long)]
        kb: Option<PathBuf>,
        /// Save the knowledge base here on quit.
        #[arg(long)]
        kb_out: Option<PathBuf>,
        #[arg(long, default_value = "analyst")]
        role: String,
        #[arg(long, default_value = "operator")]
        user: String,
        /// Spatial area reported as your location.
        #[arg(long)]
        location: Option<String>,
        /// Assignment modes, e.g. `high=auto,medium=authorize`.
        #[arg(long)]
        modes: Option<String>,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match cli.command {
        Command::Interpret { input, model, format } => {
            cmd_interpret(model.as_deref(), &Input::from_arg(input.as_deref()), format, &mut out)?;
        }
        Command::RunRules {
            facts,
            files,
            format,
            kb_out,
        } => {
            cmd_run_rules(&files.paths(), &facts, format, kb_out.as_deref(), &mut out)?;
        }
        Command::Repl {
            files,
            kb,
            kb_out,
            role,
            user,
            location,
            modes,
        } => {
            let mut tasking = TaskingConfig::default();
            if let Some(m) = modes {
                tasking.modes = parse_modes(&m).map_err(anyhow::Error::msg).context("--modes")?;
            }
            let sources = files.paths().sources()?;
            let mut hub = Hub::from_sources(&sources, tasking, HubConfig::default())?;
            if let Some(path) = kb {
                hub.set_kb(persist::load_from(&path).with_context(|| format!("loading {}", path.display()))?);
            }
            let repl = Repl::new(hub, &user, &role, location.as_deref())?;
            cmd_repl(repl, io::stdin().lock(), &mut out, kb_out.as_deref(), chrono::Utc::now)?;
        }
    }
    out.flush()?;
    Ok(())
}
