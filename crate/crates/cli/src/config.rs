use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use authsignal_core::authorship::HyperprolificRule;
use authsignal_core::corpus::InstitutionId;
use authsignal_core::export::TableOptions;
use authsignal_core::network::{GraphFormat, Qualification};
use authsignal_core::screening::{DossierConfig, FunnelConfig};
use serde::{Deserialize, Serialize};

/// Prefix for config overrides, e.g. `AUTHSIGNAL_CFG_FUNNEL__TOP_K_RANK=10`.
pub const ENV_PREFIX: &str = "AUTHSIGNAL_CFG_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Raw inputs for `ingest`.
    pub inputs: Vec<PathBuf>,
    /// Registry used by `ingest`; later commands read the copy in `out_dir`.
    pub registry: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// Clustering seed.
    pub seed: u64,
    pub funnel: FunnelConfig,
    pub groups: Groups,
    pub world: WorldBaselines,
    pub thresholds: Thresholds,
    pub network: NetworkConfig,
    pub dossier: DossierConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            registry: None,
            out_dir: PathBuf::from("out"),
            seed: 0,
            funnel: FunnelConfig::default(),
            groups: Groups::default(),
            world: WorldBaselines::default(),
            thresholds: Thresholds::default(),
            network: NetworkConfig::default(),
            dossier: DossierConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Groups {
    /// Taken from the funnel's flagged set when absent.
    pub study: Option<Vec<InstitutionId>>,
    pub control: Vec<InstitutionId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldBaselines {
    pub growth_pct: f64,
    pub first_author: BTreeMap<String, f64>,
    pub authors_per_article: BTreeMap<String, f64>,
}

impl Default for WorldBaselines {
    fn default() -> Self {
        Self {
            growth_pct: 8.7,
            first_author: [("2019".to_string(), 53.0), ("2023".to_string(), 50.0)].into(),
            authors_per_article: [("2019".to_string(), 3.6), ("2023".to_string(), 3.9)].into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub hyperprolific: u32,
    pub hyperprolific_inclusive: bool,
    pub external_min_pubs: u32,
    pub cross_group_min_pubs: u32,
    pub surge_ratio: f64,
    pub surge_min_recent: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            hyperprolific: 36,
            hyperprolific_inclusive: true,
            external_min_pubs: 2,
            cross_group_min_pubs: 10,
            surge_ratio: 10.0,
            surge_min_recent: 36.0,
        }
    }
}

impl Thresholds {
    pub fn hyperprolific_rule(&self) -> HyperprolificRule {
        HyperprolificRule {
            threshold: self.hyperprolific,
            inclusive: self.hyperprolific_inclusive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    /// Defaults to the funnel's end year.
    pub year: Option<i32>,
    pub min_articles: u64,
    pub qualification: Qualification,
    pub format: String,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            year: None,
            min_articles: 91,
            qualification: Qualification::TotalOutput,
            format: "vosviewer-json".to_string(),
        }
    }
}

impl RunConfig {
    /// File (if any), then `AUTHSIGNAL_CFG_*` variables, then validation.
    pub fn load(path: Option<&Path>, env: impl IntoIterator<Item = (String, String)>) -> Result<Self> {
        let mut tree = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                text.parse::<toml::Table>().with_context(|| format!("parsing config {}", p.display()))?
            }
            None => toml::Table::new(),
        };
        for (key, value) in env {
            if let Some(rest) = key.strip_prefix(ENV_PREFIX) {
                let path: Vec<String> = rest.split("__").map(|s| s.to_ascii_lowercase()).collect();
                set_path(&mut tree, &path, parse_scalar(&value))?;
            }
        }
        let config: RunConfig = toml::Value::Table(tree).try_into().context("invalid configuration")?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if let Err(e) = self.funnel.validate() {
            problems.push(e.to_string());
        }
        if self.thresholds.hyperprolific == 0 {
            problems.push("thresholds.hyperprolific must be positive".to_string());
        }
        if self.thresholds.external_min_pubs == 0 {
            problems.push("thresholds.external_min_pubs must be positive".to_string());
        }
        if !(self.thresholds.surge_ratio > 0.0 && self.thresholds.surge_min_recent >= 0.0) {
            problems.push("surge thresholds must be positive".to_string());
        }
        if let Err(e) = self.network.format.parse::<GraphFormat>() {
            problems.push(format!("network.format: {e}"));
        }
        if let Some(study) = &self.groups.study {
            let shared: Vec<&str> =
                study.iter().filter(|s| self.groups.control.contains(s)).map(|s| s.as_str()).collect();
            if !shared.is_empty() {
                problems.push(format!("groups overlap on {}", shared.join(", ")));
            }
        }
        for key in self.world.first_author.keys().chain(self.world.authors_per_article.keys()) {
            if key.parse::<i32>().is_err() {
                problems.push(format!("world baseline key `{key}` is not a year"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            bail!("invalid configuration: {}", problems.join("; "))
        }
    }

    pub fn graph_format(&self) -> GraphFormat {
        self.network.format.parse().expect("validated on load")
    }

    pub fn table_options(&self) -> TableOptions {
        let mut groups = BTreeMap::new();
        if let Some(study) = &self.groups.study {
            groups.insert("study".to_string(), study.clone());
        }
        if !self.groups.control.is_empty() {
            groups.insert("control".to_string(), self.groups.control.clone());
        }
        TableOptions {
            hyperprolific: self.thresholds.hyperprolific_rule(),
            external_min_pubs: self.thresholds.external_min_pubs,
            cross_group_min_pubs: self.thresholds.cross_group_min_pubs,
            surge_ratio: self.thresholds.surge_ratio,
            surge_min_recent: self.thresholds.surge_min_recent,
            groups,
        }
    }

    pub fn corpus_path(&self) -> PathBuf {
        self.out_dir.join("corpus.jsonl")
    }

    pub fn registry_copy(&self) -> PathBuf {
        self.out_dir.join("registry.json")
    }
}

fn parse_scalar(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn set_path(tree: &mut toml::Table, path: &[String], value: toml::Value) -> Result<()> {
    match path {
        [] => bail!("empty override key"),
        [leaf] => {
            tree.insert(leaf.clone(), value);
            Ok(())
        }
        [head, rest @ ..] => {
            let child = tree.entry(head.clone()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
            match child {
                toml::Value::Table(t) => set_path(t, rest, value),
                _ => bail!("override {head} is not a table"),
            }
        }
    }
}
