//! Per-institution indicators: output, growth, first authorship, team size,
//! international collaboration, multi-affiliation, group overlap, and the
//! competition rankings built on them.
//!
//! Counting is whole counting: a record counts once, fully, for every
//! institution listed on it.

mod group;
mod ranking;

use std::collections::BTreeSet;

pub use group::{group_summary, GroupSummary, GroupYear};
pub use ranking::{competition_rank, Direction, RankEntry, Ranking};

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, InstitutionId, PublicationRecord};
use crate::error::{Error, Result};
use crate::scalar::{percent, ratio, Scalar};

/// Which of an institution's records enter the multi-affiliation rate.
///
/// Papers on which every author lists only the institution itself carry no
/// affiliation information and are dropped from the denominator under the
/// default rule.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiAffiliationRule {
    #[default]
    ExcludeSoleAffiliationPapers,
    AllRecords,
}

impl MultiAffiliationRule {
    pub fn in_denominator(self, record: &PublicationRecord, institution: &str) -> bool {
        match self {
            MultiAffiliationRule::AllRecords => true,
            MultiAffiliationRule::ExcludeSoleAffiliationPapers => !record.authors.iter().all(|a| {
                a.affiliations.len() == 1
                    && a.affiliations[0]
                        .institution_id()
                        .is_some_and(|id| id.as_str() == institution)
            }),
        }
    }

    /// Some author listing the institution also lists another affiliation.
    pub fn in_numerator(self, record: &PublicationRecord, institution: &str) -> bool {
        record
            .authors
            .iter()
            .any(|a| a.affiliations.len() >= 2 && a.lists(institution))
    }
}

/// Raw tallies behind every per-institution rate for one year.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct YearTallies {
    pub output: u64,
    pub first_authored: u64,
    pub international: u64,
    pub author_slots: u64,
    pub multi_numerator: u64,
    pub multi_denominator: u64,
}

impl YearTallies {
    pub fn add(&mut self, other: &YearTallies) {
        self.output += other.output;
        self.first_authored += other.first_authored;
        self.international += other.international;
        self.author_slots += other.author_slots;
        self.multi_numerator += other.multi_numerator;
        self.multi_denominator += other.multi_denominator;
    }

    pub fn first_author_pct<S: Scalar>(&self) -> Option<S> {
        (self.output > 0).then(|| percent(self.first_authored, self.output))
    }

    pub fn intl_collab_pct<S: Scalar>(&self) -> Option<S> {
        (self.output > 0).then(|| percent(self.international, self.output))
    }

    pub fn authors_per_article<S: Scalar>(&self) -> Option<S> {
        (self.output > 0).then(|| ratio(self.author_slots, self.output))
    }

    pub fn multi_affiliation_pct<S: Scalar>(&self) -> Option<S> {
        (self.multi_denominator > 0).then(|| percent(self.multi_numerator, self.multi_denominator))
    }
}

pub fn is_international(record: &PublicationRecord) -> bool {
    let mut countries = record
        .authors
        .iter()
        .flat_map(|a| a.affiliations.iter().map(|af| af.country));
    match countries.next() {
        Some(first) => countries.any(|c| c != first),
        None => false,
    }
}

/// One pass over an institution's records in `year`.
pub fn tallies(
    corpus: &Corpus,
    institution: &str,
    year: i32,
    rule: MultiAffiliationRule,
) -> Result<YearTallies> {
    corpus.check_institution(institution)?;
    let mut t = YearTallies::default();
    for record in corpus.institution_records_in(institution, year) {
        t.output += 1;
        t.author_slots += record.authors.len() as u64;
        if record.first_author().is_some_and(|a| a.lists(institution)) {
            t.first_authored += 1;
        }
        if is_international(record) {
            t.international += 1;
        }
        if rule.in_denominator(record, institution) {
            t.multi_denominator += 1;
            if rule.in_numerator(record, institution) {
                t.multi_numerator += 1;
            }
        }
    }
    Ok(t)
}

pub fn output_count(corpus: &Corpus, institution: &str, year: i32) -> Result<u64> {
    corpus.check_institution(institution)?;
    Ok(corpus.institution_records_in(institution, year).count() as u64)
}

/// Percentage change `100 * (end - start) / start`; `None` when `start == 0`.
pub fn growth_pct<S: Scalar>(n_start: u64, n_end: u64) -> Option<S> {
    if n_start == 0 {
        return None;
    }
    let delta = S::from_int(n_end as i64 - n_start as i64);
    Some(delta * S::from_count(100) / S::from_count(n_start))
}

pub fn first_author_pct<S: Scalar>(corpus: &Corpus, institution: &str, year: i32) -> Result<Option<S>> {
    Ok(tallies(corpus, institution, year, MultiAffiliationRule::default())?.first_author_pct())
}

pub fn intl_collab_pct<S: Scalar>(corpus: &Corpus, institution: &str, year: i32) -> Result<Option<S>> {
    Ok(tallies(corpus, institution, year, MultiAffiliationRule::default())?.intl_collab_pct())
}

pub fn multi_affiliation_pct<S: Scalar>(
    corpus: &Corpus,
    institution: &str,
    year: i32,
) -> Result<Option<S>> {
    multi_affiliation_pct_with(corpus, institution, year, MultiAffiliationRule::default())
}

pub fn multi_affiliation_pct_with<S: Scalar>(
    corpus: &Corpus,
    institution: &str,
    year: i32,
    rule: MultiAffiliationRule,
) -> Result<Option<S>> {
    Ok(tallies(corpus, institution, year, rule)?.multi_affiliation_pct())
}

#[derive(Debug, Clone, Copy)]
pub enum Scope<'a> {
    Institution(&'a str),
    Group(&'a [InstitutionId]),
    Corpus,
}

/// Distinct records attributed to at least one group member in `year`, in
/// corpus order.
pub fn group_records<'a>(
    corpus: &'a Corpus,
    group: &[InstitutionId],
    year: i32,
) -> Result<Vec<&'a PublicationRecord>> {
    let mut indices = BTreeSet::new();
    for member in group {
        corpus.check_institution(member.as_str())?;
        indices.extend(
            corpus
                .institution_record_indices(member.as_str())
                .iter()
                .copied()
                .filter(|&i| corpus.record(i).year == year),
        );
    }
    Ok(indices.into_iter().map(|i| corpus.record(i)).collect())
}

pub fn authors_per_article<S: Scalar>(corpus: &Corpus, scope: Scope<'_>, year: i32) -> Result<Option<S>> {
    let (records, slots) = match scope {
        Scope::Institution(id) => {
            let t = tallies(corpus, id, year, MultiAffiliationRule::default())?;
            (t.output, t.author_slots)
        }
        Scope::Group(members) => {
            let recs = group_records(corpus, members, year)?;
            (recs.len() as u64, recs.iter().map(|r| r.authors.len() as u64).sum())
        }
        Scope::Corpus => corpus
            .records()
            .iter()
            .filter(|r| r.year == year)
            .fold((0, 0), |(n, s), r| (n + 1, s + r.authors.len() as u64)),
    };
    Ok((records > 0).then(|| ratio(slots, records)))
}

/// Numerator and denominator of the group overlap rate.
pub fn overlap_counts(corpus: &Corpus, group: &[InstitutionId], year: i32) -> Result<(u64, u64)> {
    let members: BTreeSet<&str> = group.iter().map(InstitutionId::as_str).collect();
    if members.len() < 2 {
        return Err(Error::Precondition(
            "overlap needs a group of at least two institutions".into(),
        ));
    }
    let records = group_records(corpus, group, year)?;
    let shared = records
        .iter()
        .filter(|r| r.institutions().iter().filter(|i| members.contains(i.as_str())).count() >= 2)
        .count();
    Ok((shared as u64, records.len() as u64))
}

/// Share of the group's records attributed to two or more members.
pub fn overlap_pct<S: Scalar>(corpus: &Corpus, group: &[InstitutionId], year: i32) -> Result<Option<S>> {
    let (shared, total) = overlap_counts(corpus, group, year)?;
    Ok((total > 0).then(|| percent(shared, total)))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "metric")]
pub enum Metric {
    OutputCount,
    /// Growth from `start_year` to the ranked year.
    GrowthPct { start_year: i32 },
    FirstAuthorPct,
    AuthorsPerArticle,
    IntlCollabPct,
    MultiAffiliationPct,
    SubjectOutputCount { category: String },
    /// Percentage-point change in first authorship since `start_year`.
    FirstAuthorChange { start_year: i32 },
    /// Percentage-point change in international collaboration since `start_year`.
    IntlCollabChange { start_year: i32 },
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::OutputCount => "output_count",
            Metric::GrowthPct { .. } => "growth_pct",
            Metric::FirstAuthorPct => "first_author_pct",
            Metric::AuthorsPerArticle => "authors_per_article",
            Metric::IntlCollabPct => "intl_collab_pct",
            Metric::MultiAffiliationPct => "multi_affiliation_pct",
            Metric::SubjectOutputCount { .. } => "subject_output_count",
            Metric::FirstAuthorChange { .. } => "first_author_change",
            Metric::IntlCollabChange { .. } => "intl_collab_change",
        }
    }

    pub fn is_percentage(&self) -> bool {
        matches!(
            self,
            Metric::FirstAuthorPct | Metric::IntlCollabPct | Metric::MultiAffiliationPct
        )
    }
}

/// Evaluates `metric` for one institution; `None` means no data.
pub fn metric_value<S: Scalar>(
    corpus: &Corpus,
    institution: &str,
    metric: &Metric,
    year: i32,
) -> Result<Option<S>> {
    let rule = MultiAffiliationRule::default();
    Ok(match metric {
        Metric::OutputCount => Some(S::from_count(output_count(corpus, institution, year)?)),
        Metric::GrowthPct { start_year } => growth_pct(
            output_count(corpus, institution, *start_year)?,
            output_count(corpus, institution, year)?,
        ),
        Metric::FirstAuthorPct => tallies(corpus, institution, year, rule)?.first_author_pct(),
        Metric::AuthorsPerArticle => tallies(corpus, institution, year, rule)?.authors_per_article(),
        Metric::IntlCollabPct => tallies(corpus, institution, year, rule)?.intl_collab_pct(),
        Metric::MultiAffiliationPct => tallies(corpus, institution, year, rule)?.multi_affiliation_pct(),
        Metric::SubjectOutputCount { category } => {
            corpus.check_institution(institution)?;
            Some(S::from_count(
                corpus
                    .institution_records_in(institution, year)
                    .filter(|r| r.subject_categories.contains(category))
                    .count() as u64,
            ))
        }
        Metric::FirstAuthorChange { start_year } => {
            let start: Option<S> = tallies(corpus, institution, *start_year, rule)?.first_author_pct();
            let end: Option<S> = tallies(corpus, institution, year, rule)?.first_author_pct();
            start.zip(end).map(|(s, e)| e - s)
        }
        Metric::IntlCollabChange { start_year } => {
            let start: Option<S> = tallies(corpus, institution, *start_year, rule)?.intl_collab_pct();
            let end: Option<S> = tallies(corpus, institution, year, rule)?.intl_collab_pct();
            start.zip(end).map(|(s, e)| e - s)
        }
    })
}

/// Competition ranking of every institution with at least one record.
pub fn rank_institutions<S: Scalar>(
    corpus: &Corpus,
    metric: &Metric,
    year: i32,
    direction: Direction,
) -> Result<Ranking<S>> {
    let universe: Vec<InstitutionId> = corpus.institutions().cloned().collect();
    rank_among(corpus, &universe, metric, year, direction)
}

/// Competition ranking restricted to `universe`.
pub fn rank_among<S: Scalar>(
    corpus: &Corpus,
    universe: &[InstitutionId],
    metric: &Metric,
    year: i32,
    direction: Direction,
) -> Result<Ranking<S>> {
    let mut values = Vec::with_capacity(universe.len());
    let mut no_data = Vec::new();
    for id in universe {
        match metric_value::<S>(corpus, id.as_str(), metric, year)? {
            Some(v) => values.push((id.clone(), v)),
            None => no_data.push(id.clone()),
        }
    }
    no_data.sort();
    Ok(Ranking {
        entries: competition_rank(values, direction),
        no_data,
        warning: None,
    })
}

/// Institutions ordered by number of `category` records in `year`.
pub fn subject_output_rank(corpus: &Corpus, category: &str, year: i32) -> Ranking<u64> {
    let mut counts: std::collections::BTreeMap<&InstitutionId, u64> = Default::default();
    for record in corpus.records() {
        if record.year != year || !record.subject_categories.contains(category) {
            continue;
        }
        for inst in record.institutions() {
            *counts.entry(inst).or_default() += 1;
        }
    }
    if counts.is_empty() {
        return Ranking {
            entries: Vec::new(),
            no_data: Vec::new(),
            warning: Some(format!("no records in category `{category}` for {year}")),
        };
    }
    Ranking {
        entries: competition_rank(
            counts.into_iter().map(|(id, n)| (id.clone(), n)).collect(),
            Direction::Descending,
        ),
        no_data: Vec::new(),
        warning: None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicatorSeries<S> {
    pub institution_id: InstitutionId,
    pub metric: Metric,
    pub values: std::collections::BTreeMap<i32, S>,
    pub ranks: Option<std::collections::BTreeMap<i32, u32>>,
}

/// Values of `metric` over `years`, with world ranks when `direction` is given.
pub fn indicator_series<S: Scalar>(
    corpus: &Corpus,
    institution: &str,
    metric: &Metric,
    years: &[i32],
    direction: Option<Direction>,
) -> Result<IndicatorSeries<S>> {
    let mut values = std::collections::BTreeMap::new();
    let mut ranks = direction.map(|_| std::collections::BTreeMap::new());
    for &year in years {
        if let Some(v) = metric_value::<S>(corpus, institution, metric, year)? {
            values.insert(year, v);
        }
        if let (Some(dir), Some(ranks)) = (direction, ranks.as_mut()) {
            if let Some(rank) = rank_institutions::<S>(corpus, metric, year, dir)?.rank_of(institution) {
                ranks.insert(year, rank);
            }
        }
    }
    Ok(IndicatorSeries {
        institution_id: institution.into(),
        metric: metric.clone(),
        values,
        ranks,
    })
}

#[cfg(test)]
mod tests;
