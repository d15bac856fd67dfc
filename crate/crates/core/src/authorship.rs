//! Author-level detectors: hyperprolific authors, external authors who list
//! an institution mostly as a secondary affiliation, output surges, shared
//! authors across a group, and per-author affiliation profiles.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, InstitutionId};
use crate::error::{Error, Result};
use crate::scalar::{percent, ratio, Scalar};
use crate::Exact;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffiliationUsage {
    /// Records on which the author lists the institution.
    pub total: u64,
    /// Of those, records where it is not the author's first affiliation.
    pub as_secondary: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuthorProfile<S> {
    pub author_id: String,
    pub yearly_counts: BTreeMap<i32, u64>,
    pub affiliation_usage: BTreeMap<InstitutionId, AffiliationUsage>,
    pub records: u64,
    /// Records where the author's entry has two or more affiliations.
    pub multi_affiliation_records: u64,
    pub affiliation_slots: u64,
    pub mean_affils_per_record: S,
}

impl<S: Scalar> AuthorProfile<S> {
    pub fn count_in(&self, year: i32) -> u64 {
        self.yearly_counts.get(&year).copied().unwrap_or(0)
    }
}

pub fn build_profile<S: Scalar>(corpus: &Corpus, author_id: &str) -> Result<AuthorProfile<S>> {
    if !corpus.contains_author(author_id) {
        return Err(Error::UnknownAuthor(author_id.to_string()));
    }
    let mut yearly_counts = BTreeMap::new();
    let mut usage: BTreeMap<InstitutionId, AffiliationUsage> = BTreeMap::new();
    let (mut records, mut multi, mut slots) = (0u64, 0u64, 0u64);
    for record in corpus.author_records(author_id) {
        let entry = record.entry_for(author_id).expect("indexed author is on the byline");
        records += 1;
        *yearly_counts.entry(record.year).or_insert(0) += 1;
        slots += entry.affiliations.len() as u64;
        if entry.affiliations.len() >= 2 {
            multi += 1;
        }
        for (pos, aff) in entry.affiliations.iter().enumerate() {
            if let Some(id) = aff.institution_id() {
                let u = usage.entry(id.clone()).or_default();
                u.total += 1;
                if pos > 0 {
                    u.as_secondary += 1;
                }
            }
        }
    }
    Ok(AuthorProfile {
        author_id: author_id.to_string(),
        yearly_counts,
        affiliation_usage: usage,
        records,
        multi_affiliation_records: multi,
        affiliation_slots: slots,
        mean_affils_per_record: ratio(slots, records),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagKind {
    Hyperprolific,
    ExternalAuthor,
    Surge,
    CrossGroup,
}

impl FlagKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FlagKind::Hyperprolific => "hyperprolific",
            FlagKind::ExternalAuthor => "external_author",
            FlagKind::Surge => "surge",
            FlagKind::CrossGroup => "cross_group",
        }
    }
}

/// The numbers a flag decision was made on; [`Evidence::decide`] re-runs the
/// predicate from these alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Evidence {
    Hyperprolific {
        institution: InstitutionId,
        year_count: u64,
        threshold: u32,
        inclusive: bool,
    },
    External {
        institution: InstitutionId,
        records_naming: u64,
        as_secondary: u64,
        min_pubs: u32,
    },
    Surge {
        baseline_total: u64,
        baseline_years: u32,
        recent_total: u64,
        recent_years: u32,
        baseline_mean: f64,
        recent_mean: f64,
        ratio: f64,
        ratio_threshold: f64,
        min_recent: f64,
    },
    CrossGroup {
        group_records: u64,
        institutions: Vec<InstitutionId>,
        min_pubs: u32,
    },
}

impl Evidence {
    pub fn decide(&self) -> bool {
        match self {
            Evidence::Hyperprolific {
                year_count,
                threshold,
                inclusive,
                ..
            } => HyperprolificRule {
                threshold: *threshold,
                inclusive: *inclusive,
            }
            .qualifies(*year_count),
            Evidence::External {
                records_naming,
                as_secondary,
                min_pubs,
                ..
            } => external_predicate(*records_naming, *as_secondary, *min_pubs),
            Evidence::Surge {
                baseline_total,
                baseline_years,
                recent_total,
                recent_years,
                ratio_threshold,
                min_recent,
                ..
            } => {
                let baseline = ratio::<Exact>(*baseline_total, *baseline_years as u64);
                let recent = ratio::<Exact>(*recent_total, *recent_years as u64);
                surge_predicate(
                    baseline,
                    recent,
                    Exact::from_decimal(*ratio_threshold),
                    Exact::from_decimal(*min_recent),
                )
            }
            Evidence::CrossGroup {
                group_records,
                institutions,
                min_pubs,
            } => *group_records > *min_pubs as u64 && institutions.len() >= 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlagRecord {
    pub subject: String,
    pub flag: FlagKind,
    pub years: Vec<i32>,
    pub evidence: Evidence,
}

impl FlagRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("flag serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HyperprolificRule {
    pub threshold: u32,
    /// `true`: count >= threshold; `false`: count > threshold.
    pub inclusive: bool,
}

impl Default for HyperprolificRule {
    fn default() -> Self {
        Self {
            threshold: 36,
            inclusive: true,
        }
    }
}

impl HyperprolificRule {
    pub fn with_threshold(threshold: u32) -> Self {
        Self {
            threshold,
            ..Self::default()
        }
    }

    pub fn qualifies(&self, count: u64) -> bool {
        if self.inclusive {
            count >= self.threshold as u64
        } else {
            count > self.threshold as u64
        }
    }
}

fn author_year_count(corpus: &Corpus, author: &str, year: i32) -> u64 {
    corpus.author_records(author).filter(|r| r.year == year).count() as u64
}

/// Authors listing `institution` in `year` whose total output that year
/// meets the rule. A prolific author is reported for every institution they
/// list that year.
pub fn hyperprolific_authors(
    corpus: &Corpus,
    institution: &str,
    year: i32,
    rule: HyperprolificRule,
) -> Result<Vec<FlagRecord>> {
    if rule.threshold < 1 {
        return Err(Error::Precondition("hyperprolific threshold must be >= 1".into()));
    }
    corpus.check_institution(institution)?;
    let candidates: BTreeSet<&str> = corpus
        .institution_records_in(institution, year)
        .flat_map(|r| r.authors.iter())
        .filter(|a| a.lists(institution))
        .map(|a| a.author_id.as_str())
        .collect();
    Ok(candidates
        .into_iter()
        .filter_map(|author| {
            let count = author_year_count(corpus, author, year);
            rule.qualifies(count).then(|| FlagRecord {
                subject: author.to_string(),
                flag: FlagKind::Hyperprolific,
                years: vec![year],
                evidence: Evidence::Hyperprolific {
                    institution: institution.into(),
                    year_count: count,
                    threshold: rule.threshold,
                    inclusive: rule.inclusive,
                },
            })
        })
        .collect())
}

fn external_predicate(records_naming: u64, as_secondary: u64, min_pubs: u32) -> bool {
    records_naming >= min_pubs as u64 && 2 * as_secondary > records_naming
}

/// Authors with at least `min_pubs` records naming `institution` who list it
/// in a non-first position on strictly more than half of them.
pub fn external_authors(corpus: &Corpus, institution: &str, min_pubs: u32) -> Result<Vec<FlagRecord>> {
    if min_pubs < 1 {
        return Err(Error::Precondition("min_pubs must be >= 1".into()));
    }
    corpus.check_institution(institution)?;
    let mut usage: BTreeMap<&str, (AffiliationUsage, BTreeSet<i32>)> = BTreeMap::new();
    for record in corpus.institution_records(institution) {
        for entry in &record.authors {
            if let Some(pos) = entry.position_of(institution) {
                let (u, years) = usage.entry(entry.author_id.as_str()).or_default();
                u.total += 1;
                if pos > 0 {
                    u.as_secondary += 1;
                }
                years.insert(record.year);
            }
        }
    }
    Ok(usage
        .into_iter()
        .filter(|(_, (u, _))| external_predicate(u.total, u.as_secondary, min_pubs))
        .map(|(author, (u, years))| FlagRecord {
            subject: author.to_string(),
            flag: FlagKind::ExternalAuthor,
            years: years.into_iter().collect(),
            evidence: Evidence::External {
                institution: institution.into(),
                records_naming: u.total,
                as_secondary: u.as_secondary,
                min_pubs,
            },
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurgeConfig {
    /// Inclusive year windows.
    pub baseline: (i32, i32),
    pub recent: (i32, i32),
    pub ratio_threshold: f64,
    pub min_recent: f64,
}

impl SurgeConfig {
    /// Two recent years ending at `recent_end`, preceded by five baseline years.
    pub fn trailing(recent_end: i32) -> Self {
        Self {
            baseline: (recent_end - 6, recent_end - 2),
            recent: (recent_end - 1, recent_end),
            ratio_threshold: 10.0,
            min_recent: 36.0,
        }
    }

    fn check(&self) -> Result<()> {
        let mut problems = Vec::new();
        let (b0, b1) = self.baseline;
        let (r0, r1) = self.recent;
        if b0 > b1 || r0 > r1 {
            problems.push("empty window".to_string());
        }
        if b1 >= r0 {
            problems.push("baseline must end before the recent window starts".to_string());
        }
        if self.ratio_threshold.partial_cmp(&1.0) != Some(std::cmp::Ordering::Greater) {
            problems.push("ratio_threshold must exceed 1".to_string());
        }
        if self.min_recent.partial_cmp(&1.0) == Some(std::cmp::Ordering::Less) || self.min_recent.is_nan() {
            problems.push("min_recent must be >= 1".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }
}

fn surge_predicate<S: Scalar>(baseline_mean: S, recent_mean: S, ratio_threshold: S, min_recent: S) -> bool {
    let floor = if baseline_mean > S::one() { baseline_mean } else { S::one() };
    recent_mean >= ratio_threshold * floor && recent_mean >= min_recent
}

/// Flags an author whose mean yearly output in the recent window is at least
/// `ratio_threshold` times the baseline mean (floored at one per year).
pub fn surge_detect<S: Scalar>(profile: &AuthorProfile<S>, config: &SurgeConfig) -> Result<Option<FlagRecord>> {
    config.check()?;
    let window = |(lo, hi): (i32, i32)| -> (u64, u32) {
        ((lo..=hi).map(|y| profile.count_in(y)).sum(), (hi - lo + 1) as u32)
    };
    let (baseline_total, baseline_years) = window(config.baseline);
    let (recent_total, recent_years) = window(config.recent);
    let baseline_mean: S = ratio(baseline_total, baseline_years as u64);
    let recent_mean: S = ratio(recent_total, recent_years as u64);
    let floor = if baseline_mean > S::one() { baseline_mean } else { S::one() };
    if !surge_predicate(
        baseline_mean,
        recent_mean,
        S::from_decimal(config.ratio_threshold),
        S::from_decimal(config.min_recent),
    ) {
        return Ok(None);
    }
    Ok(Some(FlagRecord {
        subject: profile.author_id.clone(),
        flag: FlagKind::Surge,
        years: (config.recent.0..=config.recent.1).collect(),
        evidence: Evidence::Surge {
            baseline_total,
            baseline_years,
            recent_total,
            recent_years,
            baseline_mean: baseline_mean.as_f64(),
            recent_mean: recent_mean.as_f64(),
            ratio: (recent_mean / floor).as_f64(),
            ratio_threshold: config.ratio_threshold,
            min_recent: config.min_recent,
        },
    }))
}

/// Authors with more than `min_pubs` records attributed to the group who
/// list two or more distinct group institutions across those records.
pub fn cross_group_authors(corpus: &Corpus, group: &[InstitutionId], min_pubs: u32) -> Result<Vec<FlagRecord>> {
    if group.is_empty() {
        return Err(Error::Precondition("group must not be empty".into()));
    }
    let members: BTreeSet<&str> = group.iter().map(InstitutionId::as_str).collect();
    // author -> (group record indices, group institutions, years)
    type Seen<'a> = BTreeMap<&'a str, (BTreeSet<usize>, BTreeSet<&'a InstitutionId>, BTreeSet<i32>)>;
    let mut seen: Seen = BTreeMap::new();
    for member in &members {
        corpus.check_institution(member)?;
        for &idx in corpus.institution_record_indices(member) {
            let record = corpus.record(idx);
            for entry in &record.authors {
                let listed: Vec<&InstitutionId> =
                    entry.institution_ids().filter(|i| members.contains(i.as_str())).collect();
                if listed.is_empty() {
                    continue;
                }
                let (records, insts, years) = seen.entry(entry.author_id.as_str()).or_default();
                records.insert(idx);
                insts.extend(listed);
                years.insert(record.year);
            }
        }
    }
    Ok(seen
        .into_iter()
        .filter(|(_, (records, insts, _))| records.len() as u64 > min_pubs as u64 && insts.len() >= 2)
        .map(|(author, (records, insts, years))| FlagRecord {
            subject: author.to_string(),
            flag: FlagKind::CrossGroup,
            years: years.into_iter().collect(),
            evidence: Evidence::CrossGroup {
                group_records: records.len() as u64,
                institutions: insts.into_iter().cloned().collect(),
                min_pubs,
            },
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultiAffiliationProfile<S> {
    pub pct_records_multi: S,
    pub mean_affils: S,
}

pub fn multi_affiliation_profile<S: Scalar>(profile: &AuthorProfile<S>) -> Result<MultiAffiliationProfile<S>> {
    if profile.records == 0 {
        return Err(Error::Precondition(format!("author {} has no records", profile.author_id)));
    }
    Ok(MultiAffiliationProfile {
        pct_records_multi: percent(profile.multi_affiliation_records, profile.records),
        mean_affils: profile.mean_affils_per_record,
    })
}
