use serde::Serialize;

use super::{
    authors_per_article, growth_pct, overlap_pct, rank_institutions, tallies, Direction, Metric,
    MultiAffiliationRule, Scope, YearTallies,
};
use crate::corpus::{Corpus, InstitutionId};
use crate::error::Result;
use crate::scalar::{median, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupYear<S> {
    pub year: i32,
    /// Sum of member output counts; shared records count once per member.
    pub summed_output: u64,
    /// Records attributed to at least one member, each counted once.
    pub distinct_output: u64,
    /// Rates below are record-weighted across members.
    pub first_author_pct: Option<S>,
    pub intl_collab_pct: Option<S>,
    pub multi_affiliation_pct: Option<S>,
    /// Mean byline length over the group's distinct records.
    pub authors_per_article: Option<S>,
    /// `None` for single-member groups.
    pub overlap_pct: Option<S>,
    pub median_output_rank: Option<S>,
    pub median_first_author_rank: Option<S>,
    pub median_intl_collab_rank: Option<S>,
    /// Members left out of at least one median for lack of data.
    pub members_without_data: Vec<InstitutionId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary<S> {
    pub group_id: String,
    pub member_ids: Vec<InstitutionId>,
    pub years: Vec<GroupYear<S>>,
    /// Growth of distinct group output from the first to the last year.
    pub growth_pct: Option<S>,
    /// Growth of summed member output over the same span.
    pub summed_growth_pct: Option<S>,
}

impl<S> GroupSummary<S> {
    pub fn year(&self, year: i32) -> Option<&GroupYear<S>> {
        self.years.iter().find(|y| y.year == year)
    }
}

pub fn group_summary<S: Scalar>(
    corpus: &Corpus,
    group_id: &str,
    members: &[InstitutionId],
    years: &[i32],
) -> Result<GroupSummary<S>> {
    let mut member_ids = members.to_vec();
    member_ids.sort();
    member_ids.dedup();
    for m in &member_ids {
        corpus.check_institution(m.as_str())?;
    }

    let rule = MultiAffiliationRule::default();
    let mut out_years = Vec::with_capacity(years.len());
    for &year in years {
        let mut total = YearTallies::default();
        let mut per_member = Vec::with_capacity(member_ids.len());
        for m in &member_ids {
            let t = tallies(corpus, m.as_str(), year, rule)?;
            total.add(&t);
            per_member.push((m, t));
        }
        let distinct = super::group_records(corpus, &member_ids, year)?.len() as u64;

        let output_rank = rank_institutions::<S>(corpus, &Metric::OutputCount, year, Direction::Descending)?;
        let fa_rank = rank_institutions::<S>(corpus, &Metric::FirstAuthorPct, year, Direction::Descending)?;
        let ic_rank = rank_institutions::<S>(corpus, &Metric::IntlCollabPct, year, Direction::Descending)?;

        let mut missing = Vec::new();
        let mut collect = |ranking: &super::Ranking<S>, has_data: &dyn Fn(&YearTallies) -> bool| {
            let mut ranks = Vec::new();
            for (m, t) in &per_member {
                match ranking.rank_of(m.as_str()).filter(|_| has_data(t)) {
                    Some(r) => ranks.push(S::from_count(r as u64)),
                    None => missing.push((*m).clone()),
                }
            }
            median(&ranks)
        };
        let median_output_rank = collect(&output_rank, &|t| t.output > 0);
        let median_first_author_rank = collect(&fa_rank, &|t| t.output > 0);
        let median_intl_collab_rank = collect(&ic_rank, &|t| t.output > 0);
        missing.sort();
        missing.dedup();

        out_years.push(GroupYear {
            year,
            summed_output: total.output,
            distinct_output: distinct,
            first_author_pct: total.first_author_pct(),
            intl_collab_pct: total.intl_collab_pct(),
            multi_affiliation_pct: total.multi_affiliation_pct(),
            authors_per_article: authors_per_article(corpus, Scope::Group(&member_ids), year)?,
            overlap_pct: if member_ids.len() >= 2 {
                overlap_pct(corpus, &member_ids, year)?
            } else {
                None
            },
            median_output_rank,
            median_first_author_rank,
            median_intl_collab_rank,
            members_without_data: missing,
        });
    }

    let (growth, summed_growth) = match (out_years.first(), out_years.last()) {
        (Some(first), Some(last)) if out_years.len() >= 2 => (
            growth_pct(first.distinct_output, last.distinct_output),
            growth_pct(first.summed_output, last.summed_output),
        ),
        _ => (None, None),
    };

    Ok(GroupSummary {
        group_id: group_id.to_string(),
        member_ids,
        years: out_years,
        growth_pct: growth,
        summed_growth_pct: summed_growth,
    })
}
