//! Published table values for the 16 flagged universities and 7 comparison
//! universities, transcribed into typed fixtures for arithmetic regression
//! tests and report rendering.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{CountryCode, InstitutionId};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixtureGroup {
    Study,
    Control,
}

impl FixtureGroup {
    pub fn as_str(self) -> &'static str {
        match self {
            FixtureGroup::Study => "study",
            FixtureGroup::Control => "control",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureInstitution {
    pub institution_id: InstitutionId,
    pub name: String,
    pub country: CountryCode,
    pub group: FixtureGroup,
}

/// Year-keyed cells.
pub type ByYear<T> = BTreeMap<i32, T>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRow {
    pub institution_id: InstitutionId,
    pub articles: ByYear<u64>,
    pub change_pct: i64,
    /// `None` is beyond the rank horizon.
    pub world_rank: ByYear<Option<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateRankRow {
    pub institution_id: InstitutionId,
    pub pct: ByYear<i64>,
    pub world_rank: ByYear<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperprolificFixtureRow {
    pub institution_id: InstitutionId,
    pub counts: ByYear<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiAffiliationRow {
    pub institution_id: InstitutionId,
    pub pct: ByYear<i64>,
    pub change_points: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubjectRow {
    pub category: String,
    pub group: FixtureGroup,
    pub institution_id: InstitutionId,
    pub articles: ByYear<u64>,
    /// `None` in 2023 means the institution left the top list.
    pub world_rank: ByYear<Option<u32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table<R> {
    pub source: String,
    pub rows: Vec<R>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectTable {
    pub source: String,
    pub top: u32,
    pub categories: Vec<String>,
    pub rows: Vec<SubjectRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkFooter {
    pub group: FixtureGroup,
    pub year: i32,
    pub min_articles: u64,
    pub external_institutions: u64,
    pub links: u64,
    pub total_link_strength: String,
    pub clusters: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkFixture {
    pub source: String,
    pub footers: Vec<NetworkFooter>,
    pub external_institutions: BTreeMap<FixtureGroup, ByYear<u64>>,
    pub external_growth_pct: BTreeMap<FixtureGroup, i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupPair<T> {
    pub study: T,
    #[serde(default = "Option::default")]
    pub control: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WithWorld<T> {
    pub study: T,
    pub control: T,
    pub world: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub source: String,
    /// Records counted once per group.
    pub distinct_articles: GroupPair<ByYear<u64>>,
    pub output_growth_pct: WithWorld<f64>,
    pub median_output_rank: GroupPair<ByYear<Option<u32>>>,
    pub first_author_pct: WithWorld<ByYear<u32>>,
    pub median_first_author_rank: GroupPair<ByYear<u32>>,
    pub hyperprolific_total: GroupPair<ByYear<u64>>,
    pub multi_affiliation_pct: GroupPair<ByYear<u32>>,
    pub authors_per_article: WithWorld<ByYear<f64>>,
    pub authors_per_article_growth_pct: WithWorld<i64>,
    pub overlap_pct: GroupPair<ByYear<u32>>,
    pub cross_group_authors: serde_json::Value,
    pub intl_collab_pct: GroupPair<ByYear<u32>>,
    pub median_intl_collab_rank: GroupPair<ByYear<u32>>,
    pub surge_case: serde_json::Value,
    pub multi_affiliation_case: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureBundle {
    pub institutions: Vec<FixtureInstitution>,
    pub output_counts: Table<OutputRow>,
    pub subject_ranks: SubjectTable,
    pub first_authorship: Table<RateRankRow>,
    pub hyperprolific_counts: Table<HyperprolificFixtureRow>,
    pub multi_affiliation: Table<MultiAffiliationRow>,
    pub intl_collaboration: Table<RateRankRow>,
    pub aggregates: Aggregates,
    pub network: NetworkFixture,
}

#[derive(Deserialize)]
struct InstitutionList {
    institutions: Vec<FixtureInstitution>,
}

pub const FIXTURE_FILES: [(&str, &str); 9] = [
    ("institutions.json", include_str!("../../fixtures/institutions.json")),
    ("output_counts.json", include_str!("../../fixtures/output_counts.json")),
    ("subject_ranks.json", include_str!("../../fixtures/subject_ranks.json")),
    ("first_authorship.json", include_str!("../../fixtures/first_authorship.json")),
    ("hyperprolific_counts.json", include_str!("../../fixtures/hyperprolific_counts.json")),
    ("multi_affiliation.json", include_str!("../../fixtures/multi_affiliation.json")),
    ("intl_collaboration.json", include_str!("../../fixtures/intl_collaboration.json")),
    ("aggregates.json", include_str!("../../fixtures/aggregates.json")),
    ("network_footers.json", include_str!("../../fixtures/network_footers.json")),
];

fn file(name: &str) -> &'static str {
    FIXTURE_FILES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, body)| *body)
        .expect("fixture is embedded")
}

pub fn published_fixture() -> Result<FixtureBundle> {
    Ok(FixtureBundle {
        institutions: serde_json::from_str::<InstitutionList>(file("institutions.json"))?.institutions,
        output_counts: serde_json::from_str(file("output_counts.json"))?,
        subject_ranks: serde_json::from_str(file("subject_ranks.json"))?,
        first_authorship: serde_json::from_str(file("first_authorship.json"))?,
        hyperprolific_counts: serde_json::from_str(file("hyperprolific_counts.json"))?,
        multi_affiliation: serde_json::from_str(file("multi_affiliation.json"))?,
        intl_collaboration: serde_json::from_str(file("intl_collaboration.json"))?,
        aggregates: serde_json::from_str(file("aggregates.json"))?,
        network: serde_json::from_str(file("network_footers.json"))?,
    })
}

impl FixtureBundle {
    pub fn institution(&self, id: &str) -> Option<&FixtureInstitution> {
        self.institutions.iter().find(|i| i.institution_id.as_str() == id)
    }

    pub fn members(&self, group: FixtureGroup) -> Vec<InstitutionId> {
        self.institutions
            .iter()
            .filter(|i| i.group == group)
            .map(|i| i.institution_id.clone())
            .collect()
    }

    pub fn group_of(&self, id: &str) -> Option<FixtureGroup> {
        self.institution(id).map(|i| i.group)
    }

    /// Sum of member article counts for a group and year.
    pub fn summed_articles(&self, group: FixtureGroup, year: i32) -> u64 {
        self.output_counts
            .rows
            .iter()
            .filter(|r| self.group_of(r.institution_id.as_str()) == Some(group))
            .filter_map(|r| r.articles.get(&year))
            .sum()
    }

    pub fn hyperprolific_total(&self, group: FixtureGroup, year: i32) -> u64 {
        self.hyperprolific_counts
            .rows
            .iter()
            .filter(|r| self.group_of(r.institution_id.as_str()) == Some(group))
            .filter_map(|r| r.counts.get(&year))
            .sum()
    }

    pub fn group_article_totals(&self, group: FixtureGroup) -> (u64, u64) {
        let distinct = match group {
            FixtureGroup::Study => Some(&self.aggregates.distinct_articles.study),
            FixtureGroup::Control => self.aggregates.distinct_articles.control.as_ref(),
        };
        // distinct counts only when published for both years; mixing the two
        // conventions would overstate growth
        match distinct.and_then(|d| Some((*d.get(&2019)?, *d.get(&2023)?))) {
            Some(pair) => pair,
            None => (self.summed_articles(group, 2019), self.summed_articles(group, 2023)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundle_loads_with_23_rows_per_table() {
        let f = published_fixture().unwrap();
        assert_eq!(f.institutions.len(), 23);
        assert_eq!(f.members(FixtureGroup::Study).len(), 16);
        for n in [
            f.output_counts.rows.len(),
            f.first_authorship.rows.len(),
            f.hyperprolific_counts.rows.len(),
            f.multi_affiliation.rows.len(),
            f.intl_collaboration.rows.len(),
        ] {
            assert_eq!(n, 23);
        }
        for id in f.output_counts.rows.iter().map(|r| &r.institution_id) {
            assert!(f.institution(id.as_str()).is_some(), "{id}");
        }
    }

    #[test]
    fn spot_rows() {
        let f = published_fixture().unwrap();
        let mus = f.output_counts.rows.iter().find(|r| r.institution_id.as_str() == "al_mustaqbal").unwrap();
        assert_eq!((mus.articles[&2019], mus.articles[&2023], mus.change_pct), (91, 1432, 1474));
        let ksu = f.hyperprolific_counts.rows.iter().find(|r| r.institution_id.as_str() == "ksu").unwrap();
        assert_eq!((ksu.counts[&2019], ksu.counts[&2023]), (9, 89));
        let lau = f.intl_collaboration.rows.iter().find(|r| r.institution_id.as_str() == "lau").unwrap();
        assert_eq!((lau.pct[&2019], lau.pct[&2023]), (54, 95));
    }

    #[test]
    fn subject_top_list_appearances() {
        let f = published_fixture().unwrap();
        let count = |group: FixtureGroup, year: i32| {
            let rows: Vec<&SubjectRow> = f
                .subject_ranks
                .rows
                .iter()
                .filter(|r| r.group == group && r.world_rank[&year].is_some_and(|k| k <= 100))
                .collect();
            let cats: std::collections::BTreeSet<&str> = rows.iter().map(|r| r.category.as_str()).collect();
            (rows.len(), cats.len())
        };
        assert_eq!(count(FixtureGroup::Study, 2023), (34, 13));
        assert_eq!(count(FixtureGroup::Control, 2019), (17, 9));
        assert_eq!(count(FixtureGroup::Control, 2023), (13, 8));
        let study_2019: std::collections::BTreeSet<&str> = f
            .subject_ranks
            .rows
            .iter()
            .filter(|r| r.group == FixtureGroup::Study && r.world_rank[&2019].is_some_and(|k| k <= 100))
            .map(|r| r.institution_id.as_str())
            .collect();
        assert_eq!(study_2019.len(), 1);
    }
}
