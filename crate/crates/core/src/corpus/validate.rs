use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use super::{build_indexes, Corpus};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Finding {
    DuplicateRecordId { record_id: String, occurrences: usize },
    EmptyAuthorList { record_id: String },
    EmptyAffiliationList { record_id: String, author_id: String },
    DuplicateAffiliation { record_id: String, author_id: String, institution_id: String },
    DuplicateAuthor { record_id: String, author_id: String },
    DanglingCorrespondingAuthor { record_id: String, author_id: String },
    UnregisteredInstitution { record_id: String, institution_id: String },
    DanglingIndexEntry { index: &'static str, key: String, record_id: String },
    MissingIndexEntry { index: &'static str, key: String, record_id: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }
}

pub fn validate(corpus: &Corpus) -> ValidationReport {
    let mut findings = Vec::new();
    let mut id_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for record in corpus.records() {
        *id_counts.entry(record.record_id.as_str()).or_default() += 1;
    }
    for (id, n) in id_counts {
        if n > 1 {
            findings.push(Finding::DuplicateRecordId {
                record_id: id.to_string(),
                occurrences: n,
            });
        }
    }

    for record in corpus.records() {
        let rid = record.record_id.to_string();
        if record.authors.is_empty() {
            findings.push(Finding::EmptyAuthorList { record_id: rid.clone() });
        }
        let mut authors = HashSet::new();
        for entry in &record.authors {
            let aid = entry.author_id.to_string();
            if !authors.insert(entry.author_id.as_str()) {
                findings.push(Finding::DuplicateAuthor {
                    record_id: rid.clone(),
                    author_id: aid.clone(),
                });
            }
            if entry.affiliations.is_empty() {
                findings.push(Finding::EmptyAffiliationList {
                    record_id: rid.clone(),
                    author_id: aid.clone(),
                });
            }
            let mut listed = HashSet::new();
            for inst in entry.institution_ids() {
                if !listed.insert(inst) {
                    findings.push(Finding::DuplicateAffiliation {
                        record_id: rid.clone(),
                        author_id: aid.clone(),
                        institution_id: inst.to_string(),
                    });
                }
                if !corpus.registry().contains(inst.as_str()) {
                    findings.push(Finding::UnregisteredInstitution {
                        record_id: rid.clone(),
                        institution_id: inst.to_string(),
                    });
                }
            }
        }
        for c in &record.corresponding_author_ids {
            if !authors.contains(c.as_str()) {
                findings.push(Finding::DanglingCorrespondingAuthor {
                    record_id: rid.clone(),
                    author_id: c.to_string(),
                });
            }
        }
    }

    let (expected_inst, expected_auth) = build_indexes(corpus.records());
    compare_index(corpus, "by_institution", corpus.institution_index(), &expected_inst, &mut findings);
    compare_index(corpus, "by_author", corpus.author_index(), &expected_auth, &mut findings);

    ValidationReport { findings }
}

fn compare_index<K: Ord + ToString>(
    corpus: &Corpus,
    name: &'static str,
    actual: &BTreeMap<K, Vec<usize>>,
    expected: &BTreeMap<K, Vec<usize>>,
    findings: &mut Vec<Finding>,
) {
    let record_id = |idx: usize| {
        corpus
            .records()
            .get(idx)
            .map(|r| r.record_id.to_string())
            .unwrap_or_else(|| format!("#{idx}"))
    };
    for (key, ids) in actual {
        let want = expected.get(key).map(Vec::as_slice).unwrap_or(&[]);
        for &idx in ids.iter().filter(|i| !want.contains(i)) {
            findings.push(Finding::DanglingIndexEntry {
                index: name,
                key: key.to_string(),
                record_id: record_id(idx),
            });
        }
    }
    for (key, ids) in expected {
        let have = actual.get(key).map(Vec::as_slice).unwrap_or(&[]);
        for &idx in ids.iter().filter(|i| !have.contains(i)) {
            findings.push(Finding::MissingIndexEntry {
                index: name,
                key: key.to_string(),
                record_id: record_id(idx),
            });
        }
    }
}
