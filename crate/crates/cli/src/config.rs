//! Experiment configuration: a flat TOML document with one optional field
//! per command parameter, merged with command-line flags (flags win).

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// One map with its target points, as unparsed text.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemEntry {
    pub map: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub targets: Vec<String>,
}

/// Full description of one experiment. Fields irrelevant to the selected
/// command stay `None` and are omitted from the canonical rendering.
/// `system` is last so the array-of-tables renders as valid TOML.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    /// `lo..hi`, half-open.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primes: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chunk_budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variety: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certify_prime_max: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub system: Vec<SystemEntry>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig, String> {
        toml::from_str(text).map_err(|e| format!("config parse error: {e}"))
    }

    /// Canonical text: fixed field order, `None` fields absent.
    pub fn render(&self) -> String {
        toml::to_string(self).expect("config is plain data")
    }

    /// Hex SHA-256 identifying the experiment; embedded in every output so
    /// tables are self-identifying. Run plumbing (output and cache paths,
    /// worker count, chunk budget) is excluded: it changes where and how
    /// fast results land, never what they are.
    pub fn hash_hex(&self) -> String {
        let mut experiment = self.clone();
        experiment.out_dir = None;
        experiment.workers = None;
        experiment.cache_dir = None;
        experiment.chunk_budget = None;
        let digest = Sha256::digest(experiment.render().as_bytes());
        let mut s = String::with_capacity(64);
        for b in digest {
            use std::fmt::Write;
            write!(s, "{b:02x}").unwrap();
        }
        s
    }
}

/// Half-open prime range `lo..hi`.
pub fn parse_prime_range(s: &str) -> Result<(u64, u64), String> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| format!("prime range wants `lo..hi`, got {s:?}"))?;
    let lo: u64 = lo
        .trim()
        .parse()
        .map_err(|_| format!("bad range bound {lo:?}"))?;
    let hi: u64 = hi
        .trim()
        .parse()
        .map_err(|_| format!("bad range bound {hi:?}"))?;
    if lo > hi {
        return Err(format!("empty-crossing range {lo}..{hi}"));
    }
    Ok((lo, hi))
}
