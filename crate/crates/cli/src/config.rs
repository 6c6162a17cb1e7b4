//! Run configuration read from TOML.
//!
//! ```toml
//! group = "heis1"          # built-in name or path to a group file
//! seed = 42
//! verbosity = "info"
//!
//! [tolerances]
//! i = 1e-8
//! "iii.jacobian" = 1e-6
//!
//! [output]
//! report = "report.txt"
//! csv = "curves.csv"
//! svg = "curves.svg"
//! ```
//!
//! Command-line flags override the file. The file path comes from
//! `--config` or the `CARNOT_CONFIG` environment variable.

use std::collections::BTreeMap;
use std::hash::{BuildHasher, Hasher};
use std::path::{Path, PathBuf};

use serde::Deserialize;

pub const CONFIG_ENV: &str = "CARNOT_CONFIG";

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub group: Option<String>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub output: OutputPaths,
    pub verbosity: Option<String>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| format!("invalid config: {e}"))
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    /// Loads `explicit` if given, else the file named by `CARNOT_CONFIG`,
    /// else the empty configuration.
    pub fn discover(explicit: Option<&Path>) -> Result<Self, String> {
        match explicit {
            Some(p) => Self::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
                _ => Ok(Self::default()),
            },
        }
    }
}

/// A seed from the command line, the config, or freshly drawn. A drawn
/// seed is logged so the run can be repeated.
pub fn materialize_seed(flag: Option<u64>, config: &RunConfig) -> u64 {
    if let Some(s) = flag.or(config.seed) {
        return s;
    }
    let mut h = std::collections::hash_map::RandomState::new().build_hasher();
    h.write_u128(std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_nanos()).unwrap_or(0));
    let seed = h.finish();
    log::warn!("no seed given; drew seed = {seed} (pass --seed {seed} to repeat this run)");
    seed
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let c = RunConfig::parse(
            "group = \"heis2\"\nseed = 9\n[tolerances]\ni = 1e-9\n[output]\ncsv = \"a.csv\"\n",
        )
        .unwrap();
        assert_eq!(c.group.as_deref(), Some("heis2"));
        assert_eq!(c.seed, Some(9));
        assert_eq!(c.tolerances["i"], 1e-9);
        assert_eq!(c.output.csv, Some(PathBuf::from("a.csv")));
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(RunConfig::parse("grop = \"heis1\"").is_err());
        assert!(RunConfig::parse("[output]\npng = \"x\"").is_err());
    }

    #[test]
    fn flag_seed_wins() {
        let c = RunConfig { seed: Some(3), ..Default::default() };
        assert_eq!(materialize_seed(Some(5), &c), 5);
        assert_eq!(materialize_seed(None, &c), 3);
    }
}
