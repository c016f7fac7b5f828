//! The `moira` command line: batch interpretation with summary statistics,
//! one-shot rule runs, and an interactive shell that plays a participant in
//! the conversation hub.

mod interpret;
mod repl;
mod rules;

use std::fmt;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use moira_core::ce::LoadError;
use moira_core::fusion::FusionError;
use moira_core::hub::{HubError, Sources};
use moira_core::persist::PersistError;

pub use interpret::{cmd_interpret, render_report};
pub use repl::{cmd_repl, Repl, Step};
pub use rules::{cmd_run_rules, RulesOutcome};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Load {
        path: PathBuf,
        #[source]
        source: LoadError,
    },
    #[error(transparent)]
    Hub(#[from] HubError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Persist(#[from] PersistError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("output: {0}")]
    Output(#[source] std::io::Error),
}

pub(crate) fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Where submissions come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Input {
    Stdin,
    Path(PathBuf),
    Text(String),
}

impl Input {
    /// `-` or nothing means standard input.
    pub fn from_arg(arg: Option<&Path>) -> Input {
        match arg {
            Some(p) if p != Path::new("-") => Input::Path(p.to_path_buf()),
            _ => Input::Stdin,
        }
    }

    pub fn read(&self) -> Result<String, CliError> {
        match self {
            Input::Stdin => {
                let mut s = String::new();
                std::io::stdin().read_to_string(&mut s).map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdin>"),
                    source,
                })?;
                Ok(s)
            }
            Input::Path(p) => read(p),
            Input::Text(t) => Ok(t.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Text,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format '{s}' (expected text or json)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Text => "text",
            Format::Json => "json",
        })
    }
}

/// Files overriding the bundled model, rules, gist templates and asset
/// catalogue.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Paths {
    pub model: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    pub templates: Option<PathBuf>,
    pub catalogue: Option<PathBuf>,
}

impl Paths {
    pub fn sources(&self) -> Result<Sources, CliError> {
        let load = |p: &Option<PathBuf>| p.as_deref().map(read).transpose();
        Ok(Sources {
            model: load(&self.model)?,
            rules: load(&self.rules)?,
            templates: load(&self.templates)?,
            catalogue: load(&self.catalogue)?,
        })
    }
}
