//! Run configuration: parsing, `key=value` overrides and hashing.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use starlab::bodies::{make_support_body, SupportBody, SupportBodySpec};
use starlab::densities::{make_density, Density, DensitySpec};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub densities: BTreeMap<String, DensitySpec>,
    #[serde(default)]
    pub bodies: BTreeMap<String, SupportBodySpec>,
    #[serde(default)]
    pub experiments: Vec<ExperimentEntry>,
}

/// One experiment: `name`, registry `kind`, and kind-specific parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentEntry {
    pub name: String,
    pub kind: String,
    #[serde(flatten)]
    pub params: toml::Table,
}

/// Deserialize `value`, reporting failures with the path of the offending key
/// below `prefix`.
pub fn parse_at<T: DeserializeOwned>(value: toml::Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = match (prefix.is_empty(), inner.as_str()) {
            (true, _) => inner.clone(),
            (false, ".") => prefix.to_string(),
            (false, _) => format!("{prefix}.{inner}"),
        };
        anyhow!("config error at {path}: {}", e.into_inner())
    })
}

/// Parse a config document into its raw TOML tree.
pub fn parse_document(text: &str) -> Result<toml::Value> {
    let table: toml::Table = toml::from_str(text).context("config is not valid TOML")?;
    Ok(toml::Value::Table(table))
}

/// Parse the right-hand side of an override as a TOML value, falling back to
/// a bare string.
fn parse_override_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match toml::from_str::<toml::Table>(&doc) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Apply `key.path=value`; numeric segments index arrays.
pub fn apply_override(doc: &mut toml::Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| anyhow!("override {assignment:?} is not of the form key=value"))?;
    let segments: Vec<&str> = key.trim().split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        bail!("override key {key:?} has an empty segment");
    }
    let mut node = doc;
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        node = match node {
            toml::Value::Table(t) => {
                if last {
                    t.insert(seg.to_string(), parse_override_value(raw.trim()));
                    return Ok(());
                }
                t.entry(seg.to_string())
                    .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            }
            toml::Value::Array(a) => {
                let idx: usize = seg
                    .parse()
                    .map_err(|_| anyhow!("override key {key:?}: {seg:?} is not an array index"))?;
                let len = a.len();
                let slot = a
                    .get_mut(idx)
                    .ok_or_else(|| anyhow!("override key {key:?}: index {idx} out of range ({len})"))?;
                if last {
                    *slot = parse_override_value(raw.trim());
                    return Ok(());
                }
                slot
            }
            _ => bail!("override key {key:?}: {seg:?} is below a non-table value"),
        };
    }
    unreachable!("segments is nonempty")
}

impl RunConfig {
    pub fn from_value(doc: toml::Value) -> Result<Self> {
        let cfg: RunConfig = parse_at(doc, "")?;
        if cfg.schema_version != SCHEMA_VERSION {
            bail!(
                "config error at schema_version: unsupported version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            );
        }
        let mut seen = std::collections::BTreeSet::new();
        for (i, e) in cfg.experiments.iter().enumerate() {
            if e.name.is_empty() || e.name.contains(['/', '\\', ',']) {
                bail!("config error at experiments[{i}].name: {:?} is not a usable name", e.name);
            }
            if !seen.insert(e.name.clone()) {
                bail!("config error at experiments[{i}].name: duplicate name {:?}", e.name);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).context("serializing the resolved config")
    }

    /// SHA-256 of the resolved config with the output directory removed, as
    /// 16 hex digits.
    pub fn hash(&self) -> Result<String> {
        let mut c = self.clone();
        c.output_dir = None;
        let digest = Sha256::digest(c.to_toml()?.as_bytes());
        Ok(digest.iter().take(8).map(|b| format!("{b:02x}")).collect())
    }
}

/// Named densities and bodies built from the config.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    pub densities: BTreeMap<String, Density>,
    pub bodies: BTreeMap<String, SupportBody>,
}

impl Catalog {
    pub fn build(cfg: &RunConfig) -> Result<Self> {
        let mut out = Catalog::default();
        for (name, spec) in &cfg.densities {
            let d = make_density(spec).map_err(|e| anyhow!("config error at densities.{name}: {e}"))?;
            out.densities.insert(name.clone(), d);
        }
        for (name, spec) in &cfg.bodies {
            let b = make_support_body(spec).map_err(|e| anyhow!("config error at bodies.{name}: {e}"))?;
            out.bodies.insert(name.clone(), b);
        }
        Ok(out)
    }

    pub fn density(&self, name: &str, path: &str) -> Result<Density> {
        self.densities
            .get(name)
            .cloned()
            .ok_or_else(|| anyhow!("config error at {path}: unknown density {name:?}"))
    }

    pub fn body(&self, name: &str, path: &str) -> Result<SupportBody> {
        self.bodies
            .get(name)
            .cloned()
            .ok_or_else(|| anyhow!("config error at {path}: unknown body {name:?}"))
    }
}
