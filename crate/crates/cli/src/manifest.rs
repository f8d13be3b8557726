use std::path::{Path, PathBuf};

use serde::Serialize;

#[derive(Serialize)]
pub struct Tolerances {
    pub tol: f64,
    pub inequality: f64,
    pub lp_feasibility: f64,
}

/// Written as `manifest.json` next to every run's results. Contains no
/// timestamps, so identical runs give identical files.
#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub seed: u64,
    pub seed_hex: String,
    pub tolerances: Tolerances,
    pub version: &'static str,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub pass: bool,
}

impl RunManifest {
    pub fn new(
        command: String,
        seed: u64,
        tol: f64,
        inputs: Vec<String>,
        outputs: &[PathBuf],
        pass: bool,
    ) -> Self {
        RunManifest {
            command,
            seed,
            seed_hex: format!("{seed:#x}"),
            tolerances: Tolerances {
                tol,
                inequality: noisecontent::compat::INEQUALITY_TOL,
                lp_feasibility: noisecontent::compat::LP_TOL,
            },
            version: env!("CARGO_PKG_VERSION"),
            inputs,
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
            pass,
        }
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        write_json(&dir.join("manifest.json"), self)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    text.push('\n');
    std::fs::write(path, text)
}
