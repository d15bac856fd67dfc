use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::country::CountryCode;
use super::model::InstitutionId;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistryEntry {
    pub institution_id: InstitutionId,
    pub canonical_name: String,
    pub country: CountryCode,
    #[serde(default)]
    pub aliases: BTreeSet<String>,
}

/// Institution table with alias lookup. Canonical names are unique and alias
/// sets are pairwise disjoint; both are checked on construction.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InstitutionRegistry {
    entries: BTreeMap<InstitutionId, RegistryEntry>,
    by_name: HashMap<String, InstitutionId>,
    by_alias: HashMap<String, InstitutionId>,
}

/// Lower-case, trim, and collapse internal whitespace.
pub fn normalize_name(raw: &str) -> String {
    raw.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

impl InstitutionRegistry {
    pub fn new(entries: impl IntoIterator<Item = RegistryEntry>) -> Result<Self> {
        let mut reg = InstitutionRegistry::default();
        let mut problems = Vec::new();
        for entry in entries {
            let id = entry.institution_id.clone();
            if reg.entries.contains_key(&id) {
                problems.push(format!("duplicate institution_id `{id}`"));
                continue;
            }
            let name = normalize_name(&entry.canonical_name);
            if let Some(other) = reg.by_name.insert(name, id.clone()) {
                problems.push(format!(
                    "canonical name `{}` shared by `{other}` and `{id}`",
                    entry.canonical_name
                ));
            }
            for alias in &entry.aliases {
                if let Some(other) = reg.by_alias.insert(normalize_name(alias), id.clone()) {
                    if other != id {
                        problems.push(format!("alias `{alias}` shared by `{other}` and `{id}`"));
                    }
                }
            }
            reg.entries.insert(id, entry);
        }
        if problems.is_empty() {
            Ok(reg)
        } else {
            Err(Error::Registry(problems.join("; ")))
        }
    }

    /// Reads a JSON array of registry entries.
    pub fn from_reader(reader: impl Read) -> Result<Self> {
        let entries: Vec<RegistryEntry> = serde_json::from_reader(reader)?;
        Self::new(entries)
    }

    pub fn to_json(&self) -> Result<String> {
        let entries: Vec<&RegistryEntry> = self.entries.values().collect();
        Ok(serde_json::to_string_pretty(&entries)?)
    }

    pub fn get(&self, id: &str) -> Option<&RegistryEntry> {
        self.entries.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entries.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &RegistryEntry> {
        self.entries.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &InstitutionId> {
        self.entries.keys()
    }

    /// Matches canonical names first, then aliases, after normalization.
    pub fn resolve(&self, raw: &str) -> Option<&InstitutionId> {
        let norm = normalize_name(raw);
        self.by_name.get(&norm).or_else(|| self.by_alias.get(&norm))
    }
}

pub fn resolve_affiliation<'r>(raw: &str, registry: &'r InstitutionRegistry) -> Option<&'r InstitutionId> {
    registry.resolve(raw)
}
