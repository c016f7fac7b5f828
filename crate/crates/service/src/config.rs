//! Settings read from the environment.
//!
//! | variable          | meaning                                    | default          |
//! |-------------------|--------------------------------------------|------------------|
//! | `MOIRA_LISTEN`    | address to listen on                       | `127.0.0.1:8080` |
//! | `MOIRA_KB`        | knowledge base file, loaded and kept saved | none (in memory) |
//! | `MOIRA_MODEL`     | conceptual model (CE)                      | bundled          |
//! | `MOIRA_RULES`     | fusion rules                               | bundled          |
//! | `MOIRA_TEMPLATES` | gist templates                             | bundled          |
//! | `MOIRA_CATALOGUE` | sensing asset catalogue (CE)               | bundled          |
//! | `MOIRA_MODES`     | assignment modes, `high=auto,low=authorize`| high auto, rest authorize |

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::PathBuf;

use thiserror::Error;

use moira_core::hub::{Hub, HubConfig, HubError, Sources};
use moira_core::persist::{self, PersistError};
use moira_core::tasking::{parse_modes, Mode, Priority, TaskingConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{var}: {message}")]
    Invalid { var: &'static str, message: String },
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Hub(#[from] HubError),
    #[error("{path}: {source}")]
    Kb {
        path: PathBuf,
        #[source]
        source: PersistError,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    pub kb_path: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    pub templates: Option<PathBuf>,
    pub catalogue: Option<PathBuf>,
    pub modes: BTreeMap<Priority, Mode>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            kb_path: None,
            model: None,
            rules: None,
            templates: None,
            catalogue: None,
            modes: TaskingConfig::default().modes,
        }
    }
}

impl ServiceConfig {
    /// Reads the `MOIRA_*` variables.
    pub fn from_env() -> Result<Self, ConfigError> {
        Self::from_vars(std::env::vars())
    }

    pub fn from_vars<I, K, V>(vars: I) -> Result<Self, ConfigError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: Into<String>,
    {
        let mut config = ServiceConfig::default();
        for (k, v) in vars {
            let v: String = v.into();
            let path = || Some(PathBuf::from(&v));
            match k.as_ref() {
                "MOIRA_LISTEN" => {
                    config.listen = v.parse().map_err(|e| ConfigError::Invalid {
                        var: "MOIRA_LISTEN",
                        message: format!("'{v}': {e}"),
                    })?
                }
                "MOIRA_KB" => config.kb_path = path(),
                "MOIRA_MODEL" => config.model = path(),
                "MOIRA_RULES" => config.rules = path(),
                "MOIRA_TEMPLATES" => config.templates = path(),
                "MOIRA_CATALOGUE" => config.catalogue = path(),
                "MOIRA_MODES" => {
                    config.modes = parse_modes(&v).map_err(|message| ConfigError::Invalid {
                        var: "MOIRA_MODES",
                        message,
                    })?
                }
                _ => {}
            }
        }
        Ok(config)
    }

    fn read(path: &Option<PathBuf>) -> Result<Option<String>, ConfigError> {
        path.as_ref()
            .map(|p| {
                std::fs::read_to_string(p).map_err(|source| ConfigError::Read {
                    path: p.clone(),
                    source,
                })
            })
            .transpose()
    }

    /// A hub built from the configured files. A knowledge base file that
    /// exists replaces the model-only knowledge base.
    pub fn hub(&self) -> Result<Hub, ConfigError> {
        let sources = Sources {
            model: Self::read(&self.model)?,
            rules: Self::read(&self.rules)?,
            templates: Self::read(&self.templates)?,
            catalogue: Self::read(&self.catalogue)?,
        };
        let tasking = TaskingConfig {
            modes: self.modes.clone(),
            ..TaskingConfig::default()
        };
        let mut hub = Hub::from_sources(&sources, tasking, HubConfig::default())?;
        if let Some(path) = self.kb_path.as_ref().filter(|p| p.exists()) {
            let kb = persist::load_from(path).map_err(|source| ConfigError::Kb {
                path: path.clone(),
                source,
            })?;
            hub.set_kb(kb);
        }
        Ok(hub)
    }
}
