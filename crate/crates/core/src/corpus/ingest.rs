use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::country::CountryCode;
use super::model::{
    AffiliationRef, AuthorEntry, AuthorId, DocType, InstitutionId, InstitutionRef,
    PublicationRecord,
};
use super::registry::InstitutionRegistry;
use super::Corpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Jsonl,
    Csv,
}

impl InputFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => InputFormat::Csv,
            _ => InputFormat::Jsonl,
        }
    }
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "ndjson" | "json" => Ok(InputFormat::Jsonl),
            "csv" => Ok(InputFormat::Csv),
            _ => Err(Error::UnsupportedFormat {
                given: s.to_string(),
                supported: vec!["jsonl", "csv"],
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestOptions {
    pub doc_types: BTreeSet<DocType>,
    /// Inclusive year bounds; `None` keeps every year.
    pub years: Option<(i32, i32)>,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            doc_types: DocType::default_filter(),
            years: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    pub line_number: usize,
    pub reason: String,
    pub raw: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub accepted: usize,
    pub filtered_doc_type: usize,
    pub filtered_year: usize,
    pub rejected: usize,
    /// Affiliation occurrences that did not resolve, keyed by raw string.
    pub unresolved_affiliations: BTreeMap<String, usize>,
    #[serde(skip)]
    pub rejects: Vec<Reject>,
}

impl IngestReport {
    pub fn unresolved_total(&self) -> usize {
        self.unresolved_affiliations.values().sum()
    }

    pub fn rejects_jsonl(&self) -> String {
        let mut out = String::new();
        for reject in &self.rejects {
            out.push_str(&serde_json::to_string(reject).expect("reject serializes"));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Deserialize)]
pub(crate) struct RawRecord {
    pub record_id: String,
    pub year: i32,
    pub doc_type: String,
    #[serde(default)]
    pub subject_categories: Vec<String>,
    pub authors: Vec<RawAuthor>,
    #[serde(default)]
    pub corresponding_author_ids: Vec<String>,
}

#[derive(Debug, Deserialize)]
pub(crate) struct RawAuthor {
    pub author_id: String,
    pub affiliations: Vec<RawAffiliation>,
}

#[derive(Debug, Deserialize)]
pub(crate) struct RawAffiliation {
    #[serde(default)]
    pub institution: Option<String>,
    #[serde(default)]
    pub institution_id: Option<String>,
    #[serde(default)]
    pub country: Option<String>,
}

struct Parsed {
    line_number: usize,
    raw: String,
    record: PublicationRecord,
    unresolved: Vec<String>,
}

/// Reads records from `reader`, keeping only those that pass the filters.
///
/// Malformed input is collected in the report and never aborts ingestion.
pub fn ingest<R: Read>(
    reader: R,
    format: InputFormat,
    registry: &InstitutionRegistry,
    options: &IngestOptions,
) -> Result<(Corpus, IngestReport)> {
    let mut report = IngestReport::default();
    let parsed = match format {
        InputFormat::Jsonl => parse_jsonl(reader, registry, &mut report)?,
        InputFormat::Csv => parse_csv(reader, registry, &mut report)?,
    };

    let mut seen = HashSet::new();
    let mut records = Vec::with_capacity(parsed.len());
    for p in parsed {
        if !seen.insert(p.record.record_id.clone()) {
            report.rejects.push(Reject {
                line_number: p.line_number,
                reason: format!("duplicate record_id `{}`", p.record.record_id),
                raw: p.raw,
            });
            continue;
        }
        if !options.doc_types.contains(&p.record.doc_type) {
            report.filtered_doc_type += 1;
            continue;
        }
        if let Some((lo, hi)) = options.years {
            if p.record.year < lo || p.record.year > hi {
                report.filtered_year += 1;
                continue;
            }
        }
        for name in p.unresolved {
            *report.unresolved_affiliations.entry(name).or_default() += 1;
        }
        records.push(p.record);
    }
    report.rejects.sort_by_key(|r| r.line_number);
    report.rejected = report.rejects.len();
    report.accepted = records.len();
    Ok((Corpus::from_records(records, registry.clone()), report))
}

pub fn ingest_path(
    path: &Path,
    registry: &InstitutionRegistry,
    options: &IngestOptions,
) -> Result<(Corpus, IngestReport)> {
    let file = File::open(path)?;
    ingest(BufReader::new(file), InputFormat::from_path(path), registry, options)
}

fn parse_jsonl<R: Read>(
    reader: R,
    registry: &InstitutionRegistry,
    report: &mut IngestReport,
) -> Result<Vec<Parsed>> {
    let lines: Vec<(usize, String)> = BufReader::new(reader)
        .lines()
        .enumerate()
        .map(|(i, line)| line.map(|l| (i + 1, l)))
        .collect::<std::io::Result<_>>()?;

    let results: Vec<Option<std::result::Result<Parsed, Reject>>> = lines
        .into_par_iter()
        .map(|(line_number, raw)| {
            if raw.trim().is_empty() {
                return None;
            }
            let outcome = serde_json::from_str::<RawRecord>(&raw)
                .map_err(|e| e.to_string())
                .and_then(|rec| normalize(rec, registry));
            Some(match outcome {
                Ok((record, unresolved)) => Ok(Parsed {
                    line_number,
                    raw,
                    record,
                    unresolved,
                }),
                Err(reason) => Err(Reject {
                    line_number,
                    reason,
                    raw,
                }),
            })
        })
        .collect();

    let mut parsed = Vec::with_capacity(results.len());
    for result in results.into_iter().flatten() {
        match result {
            Ok(p) => parsed.push(p),
            Err(reject) => report.rejects.push(reject),
        }
    }
    Ok(parsed)
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    record_id: String,
    year: i32,
    doc_type: String,
    #[serde(default)]
    subject_categories: String,
    #[serde(default)]
    corresponding_author_ids: String,
    author_pos: u32,
    author_id: String,
    affil_pos: u32,
    #[serde(default)]
    institution: String,
    #[serde(default)]
    institution_id: String,
    #[serde(default)]
    country: String,
}

struct CsvGroup {
    line_number: usize,
    raw: Vec<String>,
    rows: Vec<CsvRow>,
}

/// One row per (record, author, affiliation); records are reassembled by
/// `record_id` in first-seen order using the explicit position columns.
fn parse_csv<R: Read>(
    reader: R,
    registry: &InstitutionRegistry,
    report: &mut IngestReport,
) -> Result<Vec<Parsed>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, CsvGroup> = BTreeMap::new();

    for result in rdr.records() {
        let row = match result {
            Ok(row) => row,
            Err(err) => {
                let line_number = err.position().map(|p| p.line() as usize).unwrap_or(0);
                report.rejects.push(Reject {
                    line_number,
                    reason: err.to_string(),
                    raw: String::new(),
                });
                continue;
            }
        };
        let line_number = row.position().map(|p| p.line() as usize).unwrap_or(0);
        let raw = row.iter().collect::<Vec<_>>().join(",");
        match row.deserialize::<CsvRow>(Some(&headers)) {
            Ok(parsed) => {
                let key = parsed.record_id.clone();
                let group = groups.entry(key.clone()).or_insert_with(|| {
                    order.push(key);
                    CsvGroup {
                        line_number,
                        raw: Vec::new(),
                        rows: Vec::new(),
                    }
                });
                group.raw.push(raw);
                group.rows.push(parsed);
            }
            Err(err) => report.rejects.push(Reject {
                line_number,
                reason: err.to_string(),
                raw,
            }),
        }
    }

    let mut parsed = Vec::new();
    for key in order {
        let mut group = groups.remove(&key).expect("group present");
        let assembled = assemble_csv_record(&key, &mut group).and_then(|rec| normalize(rec, registry));
        let raw = group.raw.join("\n");
        match assembled {
            Ok((record, unresolved)) => parsed.push(Parsed {
                line_number: group.line_number,
                raw,
                record,
                unresolved,
            }),
            Err(reason) => report.rejects.push(Reject {
                line_number: group.line_number,
                reason,
                raw,
            }),
        }
    }
    Ok(parsed)
}

fn split_list(s: &str) -> Vec<String> {
    s.split(';')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn assemble_csv_record(record_id: &str, group: &mut CsvGroup) -> std::result::Result<RawRecord, String> {
    let first = &group.rows[0];
    let (year, doc_type) = (first.year, first.doc_type.clone());
    let mut subjects = BTreeSet::new();
    let mut corresponding = BTreeSet::new();
    let mut authors: BTreeMap<u32, (String, BTreeMap<u32, RawAffiliation>)> = BTreeMap::new();

    for row in group.rows.drain(..) {
        if row.year != year || row.doc_type != doc_type {
            return Err("rows disagree on year or doc_type".into());
        }
        subjects.extend(split_list(&row.subject_categories));
        corresponding.extend(split_list(&row.corresponding_author_ids));
        let (author_id, affs) = authors
            .entry(row.author_pos)
            .or_insert_with(|| (row.author_id.clone(), BTreeMap::new()));
        if *author_id != row.author_id {
            return Err(format!("author_pos {} names two authors", row.author_pos));
        }
        let aff = RawAffiliation {
            institution: Some(row.institution).filter(|s| !s.trim().is_empty()),
            institution_id: Some(row.institution_id).filter(|s| !s.trim().is_empty()),
            country: Some(row.country).filter(|s| !s.trim().is_empty()),
        };
        if affs.insert(row.affil_pos, aff).is_some() {
            return Err(format!(
                "duplicate affil_pos {} for author_pos {}",
                row.affil_pos, row.author_pos
            ));
        }
    }

    Ok(RawRecord {
        record_id: record_id.to_string(),
        year,
        doc_type,
        subject_categories: subjects.into_iter().collect(),
        authors: authors
            .into_values()
            .map(|(author_id, affs)| RawAuthor {
                author_id,
                affiliations: affs.into_values().collect(),
            })
            .collect(),
        corresponding_author_ids: corresponding.into_iter().collect(),
    })
}

/// Resolves affiliations and enforces per-record invariants.
pub(crate) fn normalize(
    raw: RawRecord,
    registry: &InstitutionRegistry,
) -> std::result::Result<(PublicationRecord, Vec<String>), String> {
    if raw.record_id.trim().is_empty() {
        return Err("empty record_id".into());
    }
    if raw.authors.is_empty() {
        return Err("empty author list".into());
    }
    let mut unresolved = Vec::new();
    let mut authors = Vec::with_capacity(raw.authors.len());
    let mut author_ids = HashSet::new();
    for author in raw.authors {
        if author.author_id.trim().is_empty() {
            return Err("empty author_id".into());
        }
        if !author_ids.insert(author.author_id.clone()) {
            return Err(format!("author `{}` listed twice", author.author_id));
        }
        if author.affiliations.is_empty() {
            return Err(format!("author `{}` has no affiliations", author.author_id));
        }
        let mut affiliations = Vec::with_capacity(author.affiliations.len());
        let mut listed: HashSet<InstitutionRef> = HashSet::new();
        for aff in author.affiliations {
            let institution = resolve_raw(&aff, registry)?;
            let country = match (&aff.country, &institution) {
                (Some(code), _) => CountryCode::from_str(code).map_err(|e| e.to_string())?,
                (None, InstitutionRef::Resolved(id)) => registry.get(id.as_str()).expect("resolved").country,
                (None, InstitutionRef::Unresolved(name)) => {
                    return Err(format!("no country for unresolved affiliation `{name}`"))
                }
            };
            if !listed.insert(institution.clone()) {
                return Err(format!(
                    "author `{}` lists the same institution twice",
                    author.author_id
                ));
            }
            if let InstitutionRef::Unresolved(name) = &institution {
                unresolved.push(name.clone());
            }
            affiliations.push(AffiliationRef { institution, country });
        }
        authors.push(AuthorEntry {
            author_id: AuthorId::new(author.author_id),
            affiliations,
        });
    }
    let corresponding: BTreeSet<AuthorId> =
        raw.corresponding_author_ids.into_iter().map(AuthorId::new).collect();
    if let Some(missing) = corresponding.iter().find(|c| !author_ids.contains(c.as_str())) {
        return Err(format!("corresponding author `{missing}` is not on the byline"));
    }
    Ok((
        PublicationRecord {
            record_id: raw.record_id.into(),
            year: raw.year,
            doc_type: DocType::parse(&raw.doc_type),
            subject_categories: raw
                .subject_categories
                .into_iter()
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect(),
            authors,
            corresponding_author_ids: corresponding,
        },
        unresolved,
    ))
}

fn resolve_raw(
    aff: &RawAffiliation,
    registry: &InstitutionRegistry,
) -> std::result::Result<InstitutionRef, String> {
    if let Some(id) = aff.institution_id.as_deref() {
        if registry.contains(id) {
            return Ok(InstitutionRef::Resolved(InstitutionId::new(id)));
        }
        if aff.institution.is_none() {
            return Ok(match registry.resolve(id) {
                Some(found) => InstitutionRef::Resolved(found.clone()),
                None => InstitutionRef::Unresolved(id.to_string()),
            });
        }
    }
    match aff.institution.as_deref() {
        Some(name) => Ok(match registry.resolve(name) {
            Some(id) => InstitutionRef::Resolved(id.clone()),
            None => InstitutionRef::Unresolved(name.to_string()),
        }),
        None => Err("affiliation has neither institution nor institution_id".into()),
    }
}
