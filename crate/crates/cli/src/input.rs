use std::fmt;
use std::path::Path;

use noisecontent::{Effect, HermitianMatrix, Observable, StateSpace};
use serde::Deserialize;

#[derive(Debug)]
pub enum LoadError {
    Io(std::io::Error),
    Parse(String),
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Io(e) => write!(f, "cannot read file: {e}"),
            LoadError::Parse(e) => write!(f, "cannot parse observable: {e}"),
        }
    }
}

/// PPOVM file layout. A `rho` field is accepted and ignored: validation
/// derives the normalization state from the effects.
#[derive(Deserialize)]
struct PpovmFile {
    #[serde(rename = "dimA")]
    dim_a: usize,
    #[serde(rename = "dimB")]
    dim_b: usize,
    effects: Vec<HermitianMatrix>,
    outcomes: Option<Vec<u64>>,
}

impl PpovmFile {
    fn into_observable(self) -> Result<Observable, String> {
        let space = StateSpace::process(self.dim_a, self.dim_b).map_err(|e| e.to_string())?;
        let outcomes = self
            .outcomes
            .unwrap_or_else(|| (0..self.effects.len() as u64).collect());
        if outcomes.len() != self.effects.len() {
            return Err(format!(
                "{} outcomes for {} effects",
                outcomes.len(),
                self.effects.len()
            ));
        }
        let pairs = outcomes
            .into_iter()
            .zip(self.effects)
            .map(|(x, op)| (x, Effect::Process { op }))
            .collect();
        Observable::new(space, pairs).map_err(|e| e.to_string())
    }
}

/// Reads an observable file, or a PPOVM file with `dimA`, `dimB`, `rho`
/// and `effects`. Normalization is checked by the caller.
pub fn load_observable(path: &Path) -> Result<Observable, LoadError> {
    let text = std::fs::read_to_string(path).map_err(LoadError::Io)?;
    parse_observable(&text).map_err(LoadError::Parse)
}

pub fn parse_observable(text: &str) -> Result<Observable, String> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if value.get("dimA").is_some() {
        let file: PpovmFile = serde_json::from_value(value).map_err(|e| e.to_string())?;
        return file.into_observable();
    }
    serde_json::from_value(value).map_err(|e| e.to_string())
}
