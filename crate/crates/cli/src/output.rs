use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use hitstat::thermo::fmt_num;
use serde_json::json;

use crate::config::RunConfig;
use crate::CliError;

/// Environment variable that overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "HITSTAT_OUTPUT_DIR";

pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn create(configured: &Path) -> Result<Output, CliError> {
        let dir = std::env::var_os(OUTPUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| configured.to_path_buf());
        fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Output { dir })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&self, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }

    /// The resolved config and a metadata record, written before any compute.
    pub fn record_run(&self, command: &str, config: &RunConfig) -> Result<(), CliError> {
        let resolved = toml::to_string(config).map_err(|e| CliError::Config(e.to_string()))?;
        self.write("config.resolved.toml", resolved)?;
        let started = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        let meta = json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": config.seed,
            "started_unix": started,
        });
        self.write("run.meta.json", pretty(&meta))?;
        Ok(())
    }
}

pub fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json values serialize");
    s.push('\n');
    s
}

/// A versioned CSV table.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(columns: &[&str]) -> Csv {
        Csv {
            text: format!("# schema=1\n{}\n", columns.join(",")),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn num(v: f64) -> String {
    fmt_num(v)
}

pub fn opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}
