use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use gridshield_core::milp::PlanningConfig;
use serde::Serialize;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Record of one command run: what went in, what came out and how long each
/// phase took.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// Arguments after the program name, as given, and the directory they were given in.
    pub args: Vec<String>,
    pub cwd: PathBuf,
    pub inputs: BTreeMap<String, PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<PlanningConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backend: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
    pub outputs: BTreeMap<String, PathBuf>,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
    #[serde(skip)]
    started: Option<Instant>,
}

impl RunManifest {
    pub fn start(command: &str) -> Self {
        RunManifest {
            tool: "gridshield",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            args: std::env::args().skip(1).collect(),
            cwd: std::env::current_dir().unwrap_or_default(),
            inputs: BTreeMap::new(),
            config: None,
            seed: None,
            backend: None,
            status: None,
            outputs: BTreeMap::new(),
            timings: BTreeMap::new(),
            started: Some(Instant::now()),
        }
    }

    pub fn input(&mut self, role: &str, path: &Path) {
        self.inputs.insert(role.to_string(), absolute(path));
    }

    pub fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let t0 = Instant::now();
        let out = f();
        *self.timings.entry(phase.to_string()).or_default() += t0.elapsed().as_secs_f64();
        out
    }

    /// Writes `contents` to `dir/name` atomically and records it as an output.
    pub fn output(&mut self, role: &str, dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
        let path = dir.join(name);
        write_atomic(&path, contents)?;
        self.outputs.insert(role.to_string(), absolute(&path));
        Ok(path)
    }

    /// Writes the manifest itself as the last file of the run.
    pub fn finish(mut self, dir: &Path) -> Result<PathBuf> {
        if let Some(t0) = self.started {
            self.timings.insert("total".into(), t0.elapsed().as_secs_f64());
        }
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&self)? + "\n";
        write_atomic(&path, &text)?;
        Ok(path)
    }
}

fn absolute(path: &Path) -> PathBuf {
    std::path::absolute(path).unwrap_or_else(|_| path.to_path_buf())
}

/// Temp file in the target directory, then rename over the target.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp =
        tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a temp file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
