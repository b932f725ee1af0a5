//! Run configuration: defaults, optional `key = value` config file,
//! command-line flags. Flags override the file; the file overrides
//! the defaults.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use grometrics::{Distance, Linkage};

use crate::CliError;

/// Fully resolved configuration for one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub world: Option<PathBuf>,
    pub entities: Option<PathBuf>,
    pub econ: Option<PathBuf>,
    pub exclude: Option<PathBuf>,
    pub scheme: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub min_docs: u64,
    pub linkage: Linkage,
    pub distance: Distance,
    pub out: PathBuf,
    pub seed: u64,
    /// Optional descending thresholds annotating the ranking summary
    /// with index bands.
    pub bands: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            world: None,
            entities: None,
            econ: None,
            exclude: None,
            scheme: None,
            corpus: None,
            min_docs: grometrics::DEFAULT_MIN_DOCS,
            linkage: Linkage::Average,
            distance: Distance::OneMinusPearson,
            out: PathBuf::from("out"),
            seed: 0,
            bands: Vec::new(),
        }
    }
}

pub fn parse_linkage(s: &str) -> Result<Linkage, CliError> {
    match s {
        "average" => Ok(Linkage::Average),
        "complete" => Ok(Linkage::Complete),
        "ward" => Ok(Linkage::Ward),
        other => Err(CliError::usage(format!(
            "unknown linkage `{other}` (expected average, complete or ward)"
        ))),
    }
}

pub fn parse_distance(s: &str) -> Result<Distance, CliError> {
    match s {
        "euclidean" => Ok(Distance::Euclidean),
        "one_minus_pearson" => Ok(Distance::OneMinusPearson),
        other => Err(CliError::usage(format!(
            "unknown distance `{other}` (expected euclidean or one_minus_pearson)"
        ))),
    }
}

fn parse_bands(s: &str) -> Result<Vec<f64>, CliError> {
    let mut bands = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let value: f64 = part
            .parse()
            .map_err(|_| CliError::usage(format!("bands: `{part}` is not a number")))?;
        if !value.is_finite() || value <= 0.0 {
            return Err(CliError::usage(format!("bands: `{part}` must be positive")));
        }
        bands.push(value);
    }
    let mut sorted = bands.clone();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    if sorted != bands {
        return Err(CliError::usage(
            "bands must be listed in descending order".to_string(),
        ));
    }
    Ok(bands)
}

/// Reads a `key = value` config file. `#` starts a comment; blank
/// lines are skipped; dashes and underscores in keys are equivalent.
pub fn read_config_file(path: &PathBuf) -> Result<BTreeMap<String, String>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::usage(format!(
                "config {}:{}: expected `key = value`",
                path.display(),
                idx + 1
            ))
        })?;
        let key = key.trim().replace('-', "_");
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

/// Applies config-file entries onto the defaults. Unknown keys are
/// usage errors so typos never pass silently.
pub fn apply_config_file(
    config: &mut RunConfig,
    entries: &BTreeMap<String, String>,
) -> Result<(), CliError> {
    for (key, value) in entries {
        match key.as_str() {
            "world" => config.world = Some(PathBuf::from(value)),
            "entities" => config.entities = Some(PathBuf::from(value)),
            "econ" => config.econ = Some(PathBuf::from(value)),
            "exclude" => config.exclude = Some(PathBuf::from(value)),
            "scheme" => config.scheme = Some(PathBuf::from(value)),
            "corpus" => config.corpus = Some(PathBuf::from(value)),
            "out" => config.out = PathBuf::from(value),
            "min_docs" => {
                config.min_docs = value.parse().map_err(|_| {
                    CliError::usage(format!(
                        "config: min_docs must be an integer, got `{value}`"
                    ))
                })?;
            }
            "seed" => {
                config.seed = value.parse().map_err(|_| {
                    CliError::usage(format!("config: seed must be an integer, got `{value}`"))
                })?;
            }
            "linkage" => config.linkage = parse_linkage(value)?,
            "distance" => config.distance = parse_distance(value)?,
            "bands" => config.bands = parse_bands(value)?,
            other => {
                return Err(CliError::usage(format!("config: unknown key `{other}`")));
            }
        }
    }
    Ok(())
}
