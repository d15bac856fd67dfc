//! Normalized publication data model, ingestion, and lookup indexes.

mod country;
mod ingest;
mod model;
mod registry;
mod validate;

use std::collections::BTreeMap;
use std::io::Write;

pub use country::{CountryCode, InvalidCountry};
pub use ingest::{ingest, ingest_path, IngestOptions, IngestReport, InputFormat, Reject};
pub use model::{
    AffiliationRef, AuthorEntry, AuthorId, DocType, InstitutionId, InstitutionRef,
    PublicationRecord, RecordId,
};
pub use registry::{normalize_name, resolve_affiliation, InstitutionRegistry, RegistryEntry};
pub use validate::{validate, Finding, ValidationReport};

use crate::error::{Error, Result};

/// An immutable, indexed collection of publication records.
///
/// `by_institution[i]` holds exactly the records in which some author entry
/// lists institution `i` (any position). Unresolved affiliations never enter
/// the index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    records: Vec<PublicationRecord>,
    registry: InstitutionRegistry,
    by_institution: BTreeMap<InstitutionId, Vec<usize>>,
    by_author: BTreeMap<AuthorId, Vec<usize>>,
    year_range: Option<(i32, i32)>,
}

impl Corpus {
    /// Builds indexes over `records` as given. No invariant checks are made
    /// here; see [`validate`].
    pub fn from_records(records: Vec<PublicationRecord>, registry: InstitutionRegistry) -> Self {
        let (by_institution, by_author) = build_indexes(&records);
        let year_range = records.iter().fold(None, |acc, r| match acc {
            None => Some((r.year, r.year)),
            Some((lo, hi)) => Some((lo.min(r.year), hi.max(r.year))),
        });
        Corpus {
            records,
            registry,
            by_institution,
            by_author,
            year_range,
        }
    }

    pub fn empty(registry: InstitutionRegistry) -> Self {
        Self::from_records(Vec::new(), registry)
    }

    pub fn records(&self) -> &[PublicationRecord] {
        &self.records
    }

    pub fn registry(&self) -> &InstitutionRegistry {
        &self.registry
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn year_range(&self) -> Option<(i32, i32)> {
        self.year_range
    }

    pub fn years(&self) -> Vec<i32> {
        self.year_range.map(|(lo, hi)| (lo..=hi).collect()).unwrap_or_default()
    }

    pub fn has_year(&self, year: i32) -> bool {
        self.records.iter().any(|r| r.year == year)
    }

    /// Institutions with at least one indexed record.
    pub fn institutions(&self) -> impl Iterator<Item = &InstitutionId> {
        self.by_institution.keys()
    }

    pub fn authors(&self) -> impl Iterator<Item = &AuthorId> {
        self.by_author.keys()
    }

    /// Errors when the id is not in the registry.
    pub fn check_institution(&self, id: &str) -> Result<()> {
        if self.registry.contains(id) {
            Ok(())
        } else {
            Err(Error::UnknownInstitution(id.to_string()))
        }
    }

    pub fn institution_record_indices(&self, id: &str) -> &[usize] {
        self.by_institution.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn institution_records<'a>(&'a self, id: &str) -> impl Iterator<Item = &'a PublicationRecord> + 'a {
        self.institution_record_indices(id).iter().map(move |&i| &self.records[i])
    }

    pub fn institution_records_in<'a>(
        &'a self,
        id: &str,
        year: i32,
    ) -> impl Iterator<Item = &'a PublicationRecord> + 'a {
        self.institution_records(id).filter(move |r| r.year == year)
    }

    pub fn author_record_indices(&self, id: &str) -> &[usize] {
        self.by_author.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn author_records<'a>(&'a self, id: &str) -> impl Iterator<Item = &'a PublicationRecord> + 'a {
        self.author_record_indices(id).iter().map(move |&i| &self.records[i])
    }

    pub fn contains_author(&self, id: &str) -> bool {
        self.by_author.contains_key(id)
    }

    pub fn record(&self, index: usize) -> &PublicationRecord {
        &self.records[index]
    }

    /// Writes the canonical line-delimited form, one record per line.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for record in &self.records {
            serde_json::to_writer(&mut out, record)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    #[cfg(test)]
    pub(crate) fn index_mut(&mut self) -> &mut BTreeMap<InstitutionId, Vec<usize>> {
        &mut self.by_institution
    }

    pub(crate) fn institution_index(&self) -> &BTreeMap<InstitutionId, Vec<usize>> {
        &self.by_institution
    }

    pub(crate) fn author_index(&self) -> &BTreeMap<AuthorId, Vec<usize>> {
        &self.by_author
    }
}

type Indexes = (BTreeMap<InstitutionId, Vec<usize>>, BTreeMap<AuthorId, Vec<usize>>);

pub(crate) fn build_indexes(records: &[PublicationRecord]) -> Indexes {
    let mut by_institution: BTreeMap<InstitutionId, Vec<usize>> = BTreeMap::new();
    let mut by_author: BTreeMap<AuthorId, Vec<usize>> = BTreeMap::new();
    for (idx, record) in records.iter().enumerate() {
        for inst in record.institutions() {
            by_institution.entry(inst.clone()).or_default().push(idx);
        }
        for author in &record.authors {
            let list = by_author.entry(author.author_id.clone()).or_default();
            if list.last() != Some(&idx) {
                list.push(idx);
            }
        }
    }
    (by_institution, by_author)
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    pub fn country(code: &str) -> CountryCode {
        code.parse().unwrap()
    }

    pub fn registry(ids: &[(&str, &str)]) -> InstitutionRegistry {
        InstitutionRegistry::new(ids.iter().map(|(id, cc)| RegistryEntry {
            institution_id: (*id).into(),
            canonical_name: format!("{id} university"),
            country: country(cc),
            aliases: Default::default(),
        }))
        .unwrap()
    }

    /// `authors` is a list of (author id, [(institution, country)]).
    pub fn record(id: &str, year: i32, authors: &[(&str, &[(&str, &str)])]) -> PublicationRecord {
        PublicationRecord {
            record_id: id.into(),
            year,
            doc_type: DocType::Article,
            subject_categories: Default::default(),
            authors: authors
                .iter()
                .map(|(a, affs)| {
                    AuthorEntry::new(
                        *a,
                        affs.iter()
                            .map(|(i, c)| AffiliationRef::resolved(*i, country(c)))
                            .collect(),
                    )
                })
                .collect(),
            corresponding_author_ids: Default::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;

    #[test]
    fn index_counts_each_record_once_per_institution() {
        let reg = registry(&[("a", "SA"), ("b", "SA")]);
        let records = vec![
            record("r1", 2019, &[("x", &[("a", "SA")]), ("y", &[("a", "SA"), ("b", "SA")])]),
            record("r2", 2019, &[("x", &[("b", "SA")])]),
        ];
        let corpus = Corpus::from_records(records, reg);
        assert_eq!(corpus.institution_record_indices("a"), &[0]);
        assert_eq!(corpus.institution_record_indices("b"), &[0, 1]);
        assert_eq!(corpus.author_record_indices("x"), &[0, 1]);
        assert_eq!(corpus.year_range(), Some((2019, 2019)));
    }

    #[test]
    fn unknown_institution_is_an_error() {
        let corpus = Corpus::empty(registry(&[("a", "SA")]));
        assert!(corpus.check_institution("a").is_ok());
        assert!(matches!(
            corpus.check_institution("zz"),
            Err(Error::UnknownInstitution(id)) if id == "zz"
        ));
    }
}
