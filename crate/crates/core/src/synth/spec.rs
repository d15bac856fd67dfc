use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::CountryCode;
use crate::error::{Error, Result};

/// Generator input. Every random draw is derived from `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub seed: u64,
    pub years: YearSpan,
    /// Yearly record cap for baseline pool authors. Kept below the
    /// hyperprolific threshold so only plants can trip that detector.
    #[serde(default = "default_author_year_cap")]
    pub author_year_cap: u32,
    pub institutions: Vec<InstitutionSpec>,
    #[serde(default)]
    pub anomalies: Vec<AnomalyPlant>,
}

fn default_author_year_cap() -> u32 {
    20
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YearSpan {
    pub start: i32,
    pub end: i32,
}

impl YearSpan {
    pub fn contains(&self, year: i32) -> bool {
        (self.start..=self.end).contains(&year)
    }

    pub fn iter(&self) -> impl Iterator<Item = i32> {
        self.start..=self.end
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstitutionSpec {
    pub id: String,
    #[serde(default)]
    pub name: Option<String>,
    pub country: CountryCode,
    pub base_output_per_year: u32,
    /// Total change from the first to the last year, compounded evenly.
    #[serde(default)]
    pub growth_pct: f64,
    pub authors_pool_size: u32,
    #[serde(default = "default_mean_authors")]
    pub mean_authors_per_record: f64,
    #[serde(default)]
    pub domestic_collab_prob: f64,
    #[serde(default)]
    pub intl_collab_prob: f64,
}

fn default_mean_authors() -> f64 {
    3.9
}

impl InstitutionSpec {
    pub fn new(id: &str, country: CountryCode, base_output_per_year: u32) -> Self {
        Self {
            id: id.to_string(),
            name: None,
            country,
            base_output_per_year,
            growth_pct: 0.0,
            authors_pool_size: base_output_per_year.max(1) * 2,
            mean_authors_per_record: default_mean_authors(),
            domestic_collab_prob: 0.0,
            intl_collab_prob: 0.0,
        }
    }

    /// Baseline record count for `year`.
    pub fn output_in(&self, span: YearSpan, year: i32) -> u32 {
        let steps = (span.end - span.start).max(1) as f64;
        let t = (year - span.start) as f64 / steps;
        let factor = (1.0 + self.growth_pct / 100.0).powf(t);
        (self.base_output_per_year as f64 * factor + 0.5).floor() as u32
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyPlant {
    /// Key for the ground-truth line; defaults to `plant-<index>`.
    #[serde(default)]
    pub id: Option<String>,
    pub active_years: Vec<i32>,
    #[serde(flatten)]
    pub kind: PlantKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlantKind {
    /// Extra records so the active-year output is `surge_multiplier` times
    /// baseline. The first `outsourced_fraction` of them open with a
    /// foreign first author from `partners` (round-robin).
    OutputSurge {
        institution: String,
        surge_multiplier: f64,
        #[serde(default)]
        outsourced_fraction: f64,
        #[serde(default)]
        partners: Vec<String>,
    },
    /// One fresh author appended to exactly `yearly_count` of the
    /// institution's records in each active year.
    HyperprolificAuthor {
        institution: String,
        #[serde(default)]
        author_id: Option<String>,
        yearly_count: u32,
    },
    /// A `home` author added to `records` host records per active year,
    /// listing the host as a secondary affiliation on the first
    /// `secondary_fraction` of them and as the sole affiliation otherwise.
    ExternalAuthor {
        host: String,
        home: String,
        #[serde(default)]
        author_id: Option<String>,
        records: u32,
        secondary_fraction: f64,
    },
    /// Fresh authors listing `[institution, partner]` appended to
    /// `records_per_year` of the institution's records.
    MultiAffiliationInflation {
        institution: String,
        partner: String,
        records_per_year: u32,
    },
    /// One author appended to `records_per_institution` records of each
    /// listed institution per active year.
    CrossGroupAuthor {
        institutions: Vec<String>,
        #[serde(default)]
        author_id: Option<String>,
        records_per_institution: u32,
    },
    /// Fresh `with` authors appended to `records_per_year` of
    /// `institution`'s records, making them shared records.
    OverlapBoost {
        institution: String,
        with: String,
        records_per_year: u32,
    },
}

impl PlantKind {
    pub fn name(&self) -> &'static str {
        match self {
            PlantKind::OutputSurge { .. } => "output_surge",
            PlantKind::HyperprolificAuthor { .. } => "hyperprolific_author",
            PlantKind::ExternalAuthor { .. } => "external_author",
            PlantKind::MultiAffiliationInflation { .. } => "multi_affiliation_inflation",
            PlantKind::CrossGroupAuthor { .. } => "cross_group_author",
            PlantKind::OverlapBoost { .. } => "overlap_boost",
        }
    }

    pub fn targets(&self) -> Vec<&str> {
        match self {
            PlantKind::OutputSurge { institution, partners, .. } => {
                std::iter::once(institution.as_str()).chain(partners.iter().map(String::as_str)).collect()
            }
            PlantKind::HyperprolificAuthor { institution, .. } => vec![institution],
            PlantKind::ExternalAuthor { host, home, .. } => vec![host, home],
            PlantKind::MultiAffiliationInflation { institution, partner, .. } => vec![institution, partner],
            PlantKind::CrossGroupAuthor { institutions, .. } => institutions.iter().map(String::as_str).collect(),
            PlantKind::OverlapBoost { institution, with, .. } => vec![institution, with],
        }
    }

    pub fn author_id(&self) -> Option<&str> {
        match self {
            PlantKind::HyperprolificAuthor { author_id, .. }
            | PlantKind::ExternalAuthor { author_id, .. }
            | PlantKind::CrossGroupAuthor { author_id, .. } => author_id.as_deref(),
            _ => None,
        }
    }
}

impl AnomalyPlant {
    pub fn plant_id(&self, index: usize) -> String {
        self.id.clone().unwrap_or_else(|| format!("plant-{index}"))
    }
}

fn unit(v: f64) -> bool {
    (0.0..=1.0).contains(&v)
}

impl GeneratorSpec {
    /// Collects every violation rather than stopping at the first.
    pub fn validate(&self) -> Result<()> {
        let mut p = Vec::new();
        if self.years.start > self.years.end {
            p.push(format!("years: start {} after end {}", self.years.start, self.years.end));
        }
        if self.author_year_cap == 0 || self.author_year_cap >= 36 {
            p.push(format!("author_year_cap must be in 1..=35, got {}", self.author_year_cap));
        }
        let mut ids = BTreeSet::new();
        for inst in &self.institutions {
            let id = &inst.id;
            if id.is_empty() || id.contains(['/', ',', '"']) || id.starts_with("group:") {
                p.push(format!("institution id `{id}` is empty or contains reserved characters"));
            }
            if !ids.insert(id.as_str()) {
                p.push(format!("duplicate institution id `{id}`"));
            }
            if !unit(inst.domestic_collab_prob) {
                p.push(format!("{id}: domestic_collab_prob {} outside [0, 1]", inst.domestic_collab_prob));
            }
            if !unit(inst.intl_collab_prob) {
                p.push(format!("{id}: intl_collab_prob {} outside [0, 1]", inst.intl_collab_prob));
            }
            if !(inst.mean_authors_per_record >= 1.0 && inst.mean_authors_per_record <= 50.0) {
                p.push(format!("{id}: mean_authors_per_record {} outside [1, 50]", inst.mean_authors_per_record));
            }
            if !(inst.growth_pct > -100.0 && inst.growth_pct.is_finite()) {
                p.push(format!("{id}: growth_pct {} must exceed -100", inst.growth_pct));
            }
            if inst.authors_pool_size == 0 {
                p.push(format!("{id}: authors_pool_size must be at least 1"));
            }
        }

        let mut plant_ids = BTreeSet::new();
        let mut author_ids = BTreeSet::new();
        for (i, plant) in self.anomalies.iter().enumerate() {
            let pid = plant.plant_id(i);
            if !plant_ids.insert(pid.clone()) {
                p.push(format!("duplicate plant id `{pid}`"));
            }
            if let Some(a) = plant.kind.author_id() {
                if a.is_empty() || a.contains('~') {
                    p.push(format!("{pid}: author id `{a}` is empty or contains `~`"));
                }
                if !author_ids.insert(a.to_string()) {
                    p.push(format!("{pid}: author id `{a}` used by another plant"));
                }
            }
            if plant.active_years.is_empty() {
                p.push(format!("{pid}: active_years is empty"));
            }
            let distinct: BTreeSet<i32> = plant.active_years.iter().copied().collect();
            if distinct.len() != plant.active_years.len() {
                p.push(format!("{pid}: active_years repeats a year"));
            }
            for y in &plant.active_years {
                if !self.years.contains(*y) {
                    p.push(format!("{pid}: active year {y} outside {}..={}", self.years.start, self.years.end));
                }
            }
            for t in plant.kind.targets() {
                if !ids.contains(t) {
                    p.push(format!("{pid}: unknown institution `{t}`"));
                }
            }
            match &plant.kind {
                PlantKind::OutputSurge {
                    surge_multiplier,
                    outsourced_fraction,
                    partners,
                    institution,
                } => {
                    if !(*surge_multiplier >= 1.0 && *surge_multiplier <= 1000.0) {
                        p.push(format!("{pid}: surge_multiplier {surge_multiplier} outside [1, 1000]"));
                    }
                    if !unit(*outsourced_fraction) {
                        p.push(format!("{pid}: outsourced_fraction {outsourced_fraction} outside [0, 1]"));
                    }
                    let home = self.institutions.iter().find(|s| &s.id == institution).map(|s| s.country);
                    for partner in partners {
                        let cc = self.institutions.iter().find(|s| &s.id == partner).map(|s| s.country);
                        if cc.is_some() && cc == home {
                            p.push(format!("{pid}: partner `{partner}` shares the surging institution's country"));
                        }
                    }
                }
                PlantKind::HyperprolificAuthor { yearly_count, .. } => {
                    if *yearly_count == 0 {
                        p.push(format!("{pid}: yearly_count must be at least 1"));
                    }
                }
                PlantKind::ExternalAuthor {
                    host,
                    home,
                    records,
                    secondary_fraction,
                    ..
                } => {
                    if host == home {
                        p.push(format!("{pid}: host and home are the same institution"));
                    }
                    if *records == 0 {
                        p.push(format!("{pid}: records must be at least 1"));
                    }
                    if !unit(*secondary_fraction) {
                        p.push(format!("{pid}: secondary_fraction {secondary_fraction} outside [0, 1]"));
                    }
                }
                PlantKind::MultiAffiliationInflation { institution, partner, .. } => {
                    if institution == partner {
                        p.push(format!("{pid}: partner equals institution"));
                    }
                }
                PlantKind::CrossGroupAuthor { institutions, .. } => {
                    let set: BTreeSet<&String> = institutions.iter().collect();
                    if set.len() < 2 || set.len() != institutions.len() {
                        p.push(format!("{pid}: needs at least two distinct institutions"));
                    }
                }
                PlantKind::OverlapBoost { institution, with, .. } => {
                    if institution == with {
                        p.push(format!("{pid}: `with` equals institution"));
                    }
                }
            }
        }
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidSpec(p))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cc(s: &str) -> CountryCode {
        s.parse().unwrap()
    }

    #[test]
    fn output_schedule_hits_both_ends() {
        let span = YearSpan { start: 2019, end: 2023 };
        let mut inst = InstitutionSpec::new("a", cc("SA"), 100);
        inst.growth_pct = 8.7;
        assert_eq!(inst.output_in(span, 2019), 100);
        assert_eq!(inst.output_in(span, 2023), 109);
    }

    #[test]
    fn every_violation_is_listed() {
        let mut inst = InstitutionSpec::new("a", cc("SA"), 10);
        inst.intl_collab_prob = 1.5;
        inst.domestic_collab_prob = -0.1;
        let spec = GeneratorSpec {
            seed: 1,
            years: YearSpan { start: 2023, end: 2019 },
            author_year_cap: 20,
            institutions: vec![inst],
            anomalies: vec![AnomalyPlant {
                id: None,
                active_years: vec![2023],
                kind: PlantKind::HyperprolificAuthor {
                    institution: "missing".into(),
                    author_id: None,
                    yearly_count: 0,
                },
            }],
        };
        match spec.validate() {
            Err(Error::InvalidSpec(problems)) => assert_eq!(problems.len(), 6, "{problems:?}"),
            other => panic!("{other:?}"),
        }
    }
}
