//! The indicator table: one row per institution, metric and year, in the
//! exported CSV/JSONL layout.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::authorship::{
    build_profile, cross_group_authors, external_authors, hyperprolific_authors, surge_detect, HyperprolificRule,
    SurgeConfig,
};
use crate::corpus::{Corpus, InstitutionId};
use crate::error::Result;
use crate::indicators::{
    authors_per_article, competition_rank, growth_pct, overlap_pct, tallies, Direction, MultiAffiliationRule, Scope,
    YearTallies,
};
use crate::scalar::{format_tenths, round_half_up, round_tenths_half_up};
use crate::Exact;

pub const NO_DATA: &str = "n/a";
pub const CSV_HEADER: &str = "institution_id,metric,year,value_raw,value_reported,rank";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IndicatorRow {
    pub institution_id: String,
    pub metric: String,
    /// `None` for whole-corpus metrics.
    pub year: Option<i32>,
    /// Exact value as a reduced fraction (`7/2`) or integer.
    pub value_raw: String,
    /// Rounded display value.
    pub value_reported: String,
    pub rank: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TableOptions {
    pub hyperprolific: HyperprolificRule,
    pub external_min_pubs: u32,
    pub cross_group_min_pubs: u32,
    /// Surge windows end at the corpus's last year.
    pub surge_ratio: f64,
    pub surge_min_recent: f64,
    pub groups: BTreeMap<String, Vec<InstitutionId>>,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self {
            hyperprolific: HyperprolificRule::default(),
            external_min_pubs: 2,
            cross_group_min_pubs: 10,
            surge_ratio: 10.0,
            surge_min_recent: 36.0,
            groups: BTreeMap::new(),
        }
    }
}

#[derive(Clone, Copy)]
enum Display {
    Integer,
    Percent,
    Tenths,
}

fn cell(institution: &str, metric: &str, year: Option<i32>, value: Option<Exact>, display: Display) -> IndicatorRow {
    let (raw, reported) = match value {
        None => (NO_DATA.to_string(), NO_DATA.to_string()),
        Some(v) => (
            v.to_string(),
            match display {
                Display::Integer | Display::Percent => round_half_up(v).to_string(),
                Display::Tenths => format_tenths(round_tenths_half_up(v)),
            },
        ),
    };
    IndicatorRow {
        institution_id: institution.to_string(),
        metric: metric.to_string(),
        year,
        value_raw: raw,
        value_reported: reported,
        rank: None,
    }
}

fn count(n: u64) -> Option<Exact> {
    Some(Exact::from_integer(n as i64))
}

fn with_ranks(rows: &mut [IndicatorRow], values: Vec<(InstitutionId, Exact)>, direction: Direction) {
    let ranks: BTreeMap<InstitutionId, u32> = competition_rank(values, direction)
        .into_iter()
        .map(|e| (e.institution_id, e.rank))
        .collect();
    for row in rows {
        row.rank = ranks.get(row.institution_id.as_str()).copied();
    }
}

pub fn indicator_table(corpus: &Corpus, options: &TableOptions) -> Result<Vec<IndicatorRow>> {
    let years = corpus.years();
    let institutions: Vec<InstitutionId> = corpus.institutions().cloned().collect();
    let rule = MultiAffiliationRule::default();
    let mut rows = Vec::new();

    let per_inst: Vec<(InstitutionId, Vec<YearTallies>)> = institutions
        .par_iter()
        .map(|id| {
            let t = years
                .iter()
                .map(|&y| tallies(corpus, id.as_str(), y, rule))
                .collect::<Result<Vec<_>>>()?;
            Ok((id.clone(), t))
        })
        .collect::<Result<_>>()?;

    for (yi, &year) in years.iter().enumerate() {
        let mut output = Vec::new();
        let mut first = Vec::new();
        let mut intl = Vec::new();
        let (mut out_v, mut first_v, mut intl_v) = (Vec::new(), Vec::new(), Vec::new());
        for (id, ts) in &per_inst {
            let t = &ts[yi];
            let y = Some(year);
            output.push(cell(id.as_str(), "output_count", y, count(t.output), Display::Integer));
            out_v.push((id.clone(), Exact::from_integer(t.output as i64)));
            let fa: Option<Exact> = t.first_author_pct();
            first.push(cell(id.as_str(), "first_author_pct", y, fa, Display::Percent));
            if let Some(v) = fa {
                first_v.push((id.clone(), v));
            }
            let ic: Option<Exact> = t.intl_collab_pct();
            intl.push(cell(id.as_str(), "intl_collab_pct", y, ic, Display::Percent));
            if let Some(v) = ic {
                intl_v.push((id.clone(), v));
            }
            rows.push(cell(id.as_str(), "authors_per_article", y, t.authors_per_article(), Display::Tenths));
            rows.push(cell(id.as_str(), "multi_affiliation_pct", y, t.multi_affiliation_pct(), Display::Percent));
            if yi > 0 {
                let g = growth_pct(ts[0].output, t.output);
                rows.push(cell(id.as_str(), "growth_pct", y, g, Display::Percent));
            }
        }
        with_ranks(&mut output, out_v, Direction::Descending);
        with_ranks(&mut first, first_v, Direction::Descending);
        with_ranks(&mut intl, intl_v, Direction::Descending);
        rows.extend(output);
        rows.extend(first);
        rows.extend(intl);
    }

    let last_year = years.last().copied();
    let author_rows: Vec<Vec<IndicatorRow>> = institutions
        .par_iter()
        .map(|id| {
            let mut out = Vec::new();
            for &year in &years {
                let n = hyperprolific_authors(corpus, id.as_str(), year, options.hyperprolific)?.len() as u64;
                out.push(cell(id.as_str(), "hyperprolific_count", Some(year), count(n), Display::Integer));
            }
            let n = external_authors(corpus, id.as_str(), options.external_min_pubs)?.len() as u64;
            out.push(cell(id.as_str(), "external_author_count", None, count(n), Display::Integer));
            if let Some(last) = last_year {
                let n = surging_authors(corpus, id.as_str(), last, options)?;
                out.push(cell(id.as_str(), "surge_author_count", Some(last), count(n), Display::Integer));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    rows.extend(author_rows.into_iter().flatten());

    for (name, members) in &options.groups {
        let gid = format!("group:{name}");
        let distinct: BTreeSet<&str> = members.iter().map(InstitutionId::as_str).collect();
        for &year in &years {
            let overlap = if distinct.len() >= 2 {
                overlap_pct::<Exact>(corpus, members, year)?
            } else {
                None
            };
            rows.push(cell(&gid, "overlap_pct", Some(year), overlap, Display::Percent));
            let apa = authors_per_article::<Exact>(corpus, Scope::Group(members), year)?;
            rows.push(cell(&gid, "authors_per_article", Some(year), apa, Display::Tenths));
        }
        let n = cross_group_authors(corpus, members, options.cross_group_min_pubs)?.len() as u64;
        rows.push(cell(&gid, "cross_group_author_count", None, count(n), Display::Integer));
    }

    rows.sort();
    Ok(rows)
}

/// Authors listing `institution` during the recent window whose output
/// surged under the trailing configuration ending at `last_year`.
fn surging_authors(corpus: &Corpus, institution: &str, last_year: i32, options: &TableOptions) -> Result<u64> {
    let config = SurgeConfig {
        ratio_threshold: options.surge_ratio,
        min_recent: options.surge_min_recent,
        ..SurgeConfig::trailing(last_year)
    };
    let authors: BTreeSet<&str> = corpus
        .institution_records(institution)
        .filter(|r| r.year >= config.recent.0 && r.year <= config.recent.1)
        .flat_map(|r| r.authors.iter())
        .filter(|a| a.lists(institution))
        .map(|a| a.author_id.as_str())
        .collect();
    let mut n = 0;
    for author in authors {
        let profile = build_profile::<Exact>(corpus, author)?;
        if surge_detect(&profile, &config)?.is_some() {
            n += 1;
        }
    }
    Ok(n)
}

pub fn rows_to_csv(rows: &[IndicatorRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 48);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let year = r.year.map(|y| y.to_string()).unwrap_or_default();
        let rank = r.rank.map(|k| k.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            csv_field(&r.institution_id),
            r.metric,
            year,
            r.value_raw,
            r.value_reported,
            rank
        ));
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn rows_to_jsonl(rows: &[IndicatorRow]) -> String {
    let mut out = String::new();
    for r in rows {
        out.push_str(&serde_json::to_string(r).expect("row serializes"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::test_support::{record, registry};

    #[test]
    fn empty_corpus_gives_empty_table() {
        let corpus = Corpus::empty(registry(&[("A", "SA")]));
        assert!(indicator_table(&corpus, &TableOptions::default()).unwrap().is_empty());
        assert_eq!(rows_to_csv(&[]), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn rows_are_sorted_and_ranked() {
        let corpus = Corpus::from_records(
            vec![
                record("r1", 2022, &[("x", &[("A", "SA")]), ("y", &[("B", "PK")])]),
                record("r2", 2023, &[("y", &[("B", "PK")]), ("x", &[("A", "SA")])]),
                record("r3", 2023, &[("x", &[("A", "SA")])]),
            ],
            registry(&[("A", "SA"), ("B", "PK")]),
        );
        let rows = indicator_table(&corpus, &TableOptions::default()).unwrap();
        let mut sorted = rows.clone();
        sorted.sort();
        assert_eq!(rows, sorted);
        let find = |inst: &str, metric: &str, year: i32| {
            rows.iter()
                .find(|r| r.institution_id == inst && r.metric == metric && r.year == Some(year))
                .unwrap()
                .clone()
        };
        let a = find("A", "first_author_pct", 2023);
        assert_eq!((a.value_raw.as_str(), a.value_reported.as_str(), a.rank), ("50", "50", Some(2)));
        let b = find("B", "output_count", 2023);
        assert_eq!((b.value_raw.as_str(), b.rank), ("1", Some(2)));
        let apa = find("A", "authors_per_article", 2023);
        assert_eq!((apa.value_raw.as_str(), apa.value_reported.as_str()), ("3/2", "1.5"));
        let g = find("A", "growth_pct", 2023);
        assert_eq!(g.value_raw, "100");
    }
}
