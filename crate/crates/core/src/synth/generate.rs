use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::spec::{GeneratorSpec, InstitutionSpec, PlantKind};
use crate::authorship::HyperprolificRule;
use crate::corpus::{
    AffiliationRef, AuthorEntry, Corpus, CountryCode, DocType, InstitutionRegistry, PublicationRecord, RegistryEntry,
};
use crate::error::{Error, Result};

const CATEGORIES: [&str; 6] = [
    "Chemistry",
    "Computer Science",
    "Engineering",
    "Mathematics",
    "Medicine",
    "Physics",
];

/// Detector thresholds the ground truth's expectations are computed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectationRules {
    pub hyperprolific: HyperprolificRule,
    pub external_min_pubs: u32,
    pub cross_group_min_pubs: u32,
}

impl Default for ExpectationRules {
    fn default() -> Self {
        Self {
            hyperprolific: HyperprolificRule::default(),
            external_min_pubs: 2,
            cross_group_min_pubs: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExpectedFlag {
    /// `funnel`, `hyperprolific`, `external_author` or `cross_group`.
    pub detector: String,
    pub subject: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub institution: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
}

/// Realized quantities for one plant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantTruth {
    pub plant_id: String,
    pub kind: String,
    pub targets: Vec<String>,
    pub record_ids: Vec<String>,
    pub author_ids: Vec<String>,
    /// Records created or edited per active year.
    pub yearly_counts: BTreeMap<i32, u64>,
    /// For overlap plants: records listing both institutions, per year.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shared_records: Option<BTreeMap<i32, u64>>,
    pub expected: Vec<ExpectedFlag>,
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub corpus: Corpus,
    pub truth: Vec<PlantTruth>,
}

impl Generated {
    pub fn truth_jsonl(&self) -> String {
        let mut out = String::new();
        for t in &self.truth {
            out.push_str(&serde_json::to_string(t).expect("truth serializes"));
            out.push('\n');
        }
        out
    }

    /// Institutions planted to pass the funnel.
    pub fn expected_funnel(&self) -> BTreeSet<String> {
        self.expected_subjects("funnel")
    }

    pub fn expected_subjects(&self, detector: &str) -> BTreeSet<String> {
        self.truth
            .iter()
            .flat_map(|t| &t.expected)
            .filter(|e| e.detector == detector)
            .map(|e| e.subject.clone())
            .collect()
    }
}

pub fn registry_for(spec: &GeneratorSpec) -> Result<InstitutionRegistry> {
    InstitutionRegistry::new(spec.institutions.iter().map(|s| RegistryEntry {
        institution_id: s.id.as_str().into(),
        canonical_name: s.name.clone().unwrap_or_else(|| s.id.clone()),
        country: s.country,
        aliases: BTreeSet::new(),
    }))
}

struct State<'a> {
    spec: &'a GeneratorSpec,
    rng: ChaCha8Rng,
    records: Vec<PublicationRecord>,
    /// Records generated for (institution index, year).
    home: HashMap<(usize, i32), Vec<usize>>,
    pool_use: HashMap<(usize, u32, i32), u32>,
    foreign: Vec<Vec<usize>>,
    domestic: Vec<Vec<usize>>,
    /// Entries for stable planted authors: author -> (year, institutions).
    ledger: BTreeMap<String, Vec<(i32, Vec<String>)>>,
}

fn spec_err(msg: String) -> Error {
    Error::InvalidSpec(vec![msg])
}

impl<'a> State<'a> {
    fn inst(&self, i: usize) -> &'a InstitutionSpec {
        &self.spec.institutions[i]
    }

    fn index_of(&self, id: &str) -> usize {
        self.spec.institutions.iter().position(|s| s.id == id).expect("validated target")
    }

    fn affiliation(&self, i: usize) -> AffiliationRef {
        let s = self.inst(i);
        AffiliationRef::resolved(s.id.as_str(), s.country)
    }

    fn author_count(&mut self, i: usize) -> usize {
        let m = self.inst(i).mean_authors_per_record;
        if m <= 1.0 {
            return 1;
        }
        let trials = (2.0 * (m - 1.0)).ceil().max(1.0) as u32;
        let p = (m - 1.0) / trials as f64;
        1 + (0..trials).filter(|_| self.rng.gen_bool(p)).count()
    }

    /// A pool author of institution `i` not yet on `taken` and under the
    /// yearly cap.
    fn pool_author(&mut self, i: usize, year: i32, taken: &BTreeSet<u32>) -> Result<AuthorEntry> {
        let pool = self.inst(i).authors_pool_size;
        let cap = self.spec.author_year_cap;
        let start = self.rng.gen_range(0..pool);
        for step in 0..pool {
            let a = (start + step) % pool;
            if taken.contains(&a) {
                continue;
            }
            let used = self.pool_use.entry((i, a, year)).or_default();
            if *used < cap {
                *used += 1;
                let id = format!("{}~a{a:05}", self.inst(i).id);
                return Ok(AuthorEntry::new(id, vec![self.affiliation(i)]));
            }
        }
        Err(spec_err(format!(
            "{}: authors_pool_size {pool} cannot cover {year} output at {cap} records per author",
            self.inst(i).id
        )))
    }

    fn pick(&mut self, from: usize) -> usize {
        self.rng.gen_range(0..from)
    }

    fn category(&mut self) -> String {
        CATEGORIES[self.pick(CATEGORIES.len())].to_string()
    }

    fn push_record(&mut self, i: usize, year: i32, id: String, authors: Vec<AuthorEntry>) -> usize {
        let category = self.category();
        let first = authors[0].author_id.clone();
        self.records.push(PublicationRecord {
            record_id: id.into(),
            year,
            doc_type: DocType::Article,
            subject_categories: [category].into_iter().collect(),
            authors,
            corresponding_author_ids: [first].into_iter().collect(),
        });
        let idx = self.records.len() - 1;
        self.home.entry((i, year)).or_default().push(idx);
        idx
    }

    /// Baseline-style author list: home first author, optional foreign and
    /// domestic partners, home authors for the rest.
    fn baseline_authors(&mut self, i: usize, year: i32) -> Result<Vec<AuthorEntry>> {
        let n = self.author_count(i);
        let s = self.inst(i);
        let intl = n >= 2 && !self.foreign[i].is_empty() && self.rng.gen_bool(s.intl_collab_prob);
        let dom = n >= 2 + intl as usize && !self.domestic[i].is_empty() && self.rng.gen_bool(s.domestic_collab_prob);
        let mut taken = BTreeSet::new();
        let mut authors = Vec::with_capacity(n);
        let first = self.pool_author(i, year, &taken)?;
        taken.insert(pool_index(&first));
        authors.push(first);
        if intl {
            let k = self.pick(self.foreign[i].len());
            let partner = self.foreign[i][k];
            authors.push(self.pool_author(partner, year, &BTreeSet::new())?);
        }
        if dom {
            let k = self.pick(self.domestic[i].len());
            let partner = self.domestic[i][k];
            authors.push(self.pool_author(partner, year, &BTreeSet::new())?);
        }
        while authors.len() < n {
            let a = self.pool_author(i, year, &taken)?;
            taken.insert(pool_index(&a));
            authors.push(a);
        }
        Ok(authors)
    }

    /// `n` distinct records generated for institution `i` in `year`, in
    /// generation order.
    fn choose(&mut self, i: usize, year: i32, n: u32, pid: &str) -> Result<Vec<usize>> {
        let list = self.home.get(&(i, year)).cloned().unwrap_or_default();
        if (n as usize) > list.len() {
            return Err(spec_err(format!(
                "{pid}: needs {n} records of `{}` in {year} but only {} exist",
                self.inst(i).id,
                list.len()
            )));
        }
        let mut picked: Vec<usize> = sample(&mut self.rng, list.len(), n as usize).into_iter().map(|k| list[k]).collect();
        picked.sort_unstable();
        Ok(picked)
    }

    fn append(&mut self, record: usize, entry: AuthorEntry, stable: bool) {
        if stable {
            let insts = entry.institution_ids().map(|i| i.as_str().to_string()).collect();
            let year = self.records[record].year;
            self.ledger.entry(entry.author_id.as_str().to_string()).or_default().push((year, insts));
        }
        self.records[record].authors.push(entry);
    }
}

fn pool_index(entry: &AuthorEntry) -> u32 {
    let id = entry.author_id.as_str();
    id[id.rfind("~a").expect("pool id") + 2..].parse().expect("pool id")
}

fn round(x: f64) -> u32 {
    (x + 0.5).floor() as u32
}

pub fn generate(spec: &GeneratorSpec) -> Result<Generated> {
    generate_with(spec, ExpectationRules::default())
}

pub fn generate_with(spec: &GeneratorSpec, rules: ExpectationRules) -> Result<Generated> {
    spec.validate()?;
    let registry = registry_for(spec)?;
    let n = spec.institutions.len();
    let country = |i: usize| -> CountryCode { spec.institutions[i].country };
    let mut st = State {
        spec,
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
        records: Vec::new(),
        home: HashMap::new(),
        pool_use: HashMap::new(),
        foreign: (0..n).map(|i| (0..n).filter(|&j| country(j) != country(i)).collect()).collect(),
        domestic: (0..n).map(|i| (0..n).filter(|&j| j != i && country(j) == country(i)).collect()).collect(),
        ledger: BTreeMap::new(),
    };

    for year in spec.years.iter() {
        for i in 0..n {
            for k in 0..st.inst(i).output_in(spec.years, year) {
                let authors = st.baseline_authors(i, year)?;
                st.push_record(i, year, format!("{}-{year}-{k:05}", st.inst(i).id), authors);
            }
        }
    }

    let mut truth: Vec<Option<PlantTruth>> = vec![None; spec.anomalies.len()];
    let order: Vec<usize> = (0..spec.anomalies.len())
        .filter(|&p| matches!(spec.anomalies[p].kind, PlantKind::OutputSurge { .. }))
        .chain((0..spec.anomalies.len()).filter(|&p| !matches!(spec.anomalies[p].kind, PlantKind::OutputSurge { .. })))
        .collect();

    for p in order {
        let plant = &spec.anomalies[p];
        let pid = plant.plant_id(p);
        let mut t = PlantTruth {
            plant_id: pid.clone(),
            kind: plant.kind.name().to_string(),
            targets: plant.kind.targets().into_iter().map(str::to_string).collect(),
            record_ids: Vec::new(),
            author_ids: Vec::new(),
            yearly_counts: BTreeMap::new(),
            shared_records: None,
            expected: Vec::new(),
        };
        let mut touched: Vec<usize> = Vec::new();
        let mut authors: BTreeSet<String> = BTreeSet::new();
        let mut years = plant.active_years.clone();
        years.sort_unstable();
        match &plant.kind {
            PlantKind::OutputSurge {
                institution,
                surge_multiplier,
                outsourced_fraction,
                partners,
            } => {
                let i = st.index_of(institution);
                let partners: Vec<usize> = if partners.is_empty() {
                    st.foreign[i].clone()
                } else {
                    partners.iter().map(|id| st.index_of(id)).collect()
                };
                let mut turn = 0;
                for &year in &years {
                    let base = st.inst(i).output_in(spec.years, year);
                    let extra = round(base as f64 * surge_multiplier).saturating_sub(base);
                    let outsourced = round(extra as f64 * outsourced_fraction);
                    if outsourced > 0 && partners.is_empty() {
                        return Err(spec_err(format!("{pid}: no foreign partner to outsource first authorship to")));
                    }
                    for k in 0..extra {
                        let list = if k < outsourced {
                            let partner = partners[turn % partners.len()];
                            turn += 1;
                            let size = st.author_count(i).max(2);
                            let mut list = vec![st.pool_author(partner, year, &BTreeSet::new())?];
                            let mut taken = BTreeSet::new();
                            while list.len() < size {
                                let a = st.pool_author(i, year, &taken)?;
                                taken.insert(pool_index(&a));
                                list.push(a);
                            }
                            list
                        } else {
                            st.baseline_authors(i, year)?
                        };
                        let id = format!("{institution}-{year}-s{k:05}");
                        touched.push(st.push_record(i, year, id, list));
                    }
                    t.yearly_counts.insert(year, extra as u64);
                }
                t.expected.push(ExpectedFlag {
                    detector: "funnel".into(),
                    subject: institution.clone(),
                    institution: None,
                    year: None,
                });
            }
            PlantKind::HyperprolificAuthor {
                institution,
                author_id,
                yearly_count,
            } => {
                let i = st.index_of(institution);
                let author = author_id.clone().unwrap_or_else(|| format!("{pid}~author"));
                for &year in &years {
                    for r in st.choose(i, year, *yearly_count, &pid)? {
                        st.append(r, AuthorEntry::new(author.as_str(), vec![st.affiliation(i)]), true);
                        touched.push(r);
                    }
                    t.yearly_counts.insert(year, *yearly_count as u64);
                }
                authors.insert(author);
            }
            PlantKind::ExternalAuthor {
                host,
                home,
                author_id,
                records,
                secondary_fraction,
            } => {
                let (h, o) = (st.index_of(host), st.index_of(home));
                let author = author_id.clone().unwrap_or_else(|| format!("{pid}~author"));
                let secondary = round(*records as f64 * secondary_fraction);
                for &year in &years {
                    for (k, r) in st.choose(h, year, *records, &pid)?.into_iter().enumerate() {
                        let affs = if (k as u32) < secondary {
                            vec![st.affiliation(o), st.affiliation(h)]
                        } else {
                            vec![st.affiliation(h)]
                        };
                        st.append(r, AuthorEntry::new(author.as_str(), affs), true);
                        touched.push(r);
                    }
                    t.yearly_counts.insert(year, *records as u64);
                }
                authors.insert(author);
            }
            PlantKind::MultiAffiliationInflation {
                institution,
                partner,
                records_per_year,
            } => {
                let (i, j) = (st.index_of(institution), st.index_of(partner));
                for &year in &years {
                    for (k, r) in st.choose(i, year, *records_per_year, &pid)?.into_iter().enumerate() {
                        let author = format!("{pid}~{year}~{k}");
                        st.append(r, AuthorEntry::new(author.as_str(), vec![st.affiliation(i), st.affiliation(j)]), true);
                        authors.insert(author);
                        touched.push(r);
                    }
                    t.yearly_counts.insert(year, *records_per_year as u64);
                }
            }
            PlantKind::CrossGroupAuthor {
                institutions,
                author_id,
                records_per_institution,
            } => {
                let author = author_id.clone().unwrap_or_else(|| format!("{pid}~author"));
                for &year in &years {
                    for inst in institutions {
                        let i = st.index_of(inst);
                        for r in st.choose(i, year, *records_per_institution, &pid)? {
                            if st.records[r].entry_for(&author).is_some() {
                                continue;
                            }
                            st.append(r, AuthorEntry::new(author.as_str(), vec![st.affiliation(i)]), true);
                            touched.push(r);
                        }
                    }
                    let done = touched.iter().filter(|&&r| st.records[r].year == year).count();
                    t.yearly_counts.insert(year, done as u64);
                }
                authors.insert(author);
            }
            PlantKind::OverlapBoost {
                institution,
                with,
                records_per_year,
            } => {
                let (i, j) = (st.index_of(institution), st.index_of(with));
                for &year in &years {
                    for (k, r) in st.choose(i, year, *records_per_year, &pid)?.into_iter().enumerate() {
                        let author = format!("{pid}~{year}~{k}");
                        st.append(r, AuthorEntry::new(author.as_str(), vec![st.affiliation(j)]), true);
                        authors.insert(author);
                        touched.push(r);
                    }
                    t.yearly_counts.insert(year, *records_per_year as u64);
                }
            }
        }
        touched.sort_unstable();
        touched.dedup();
        t.record_ids = touched.iter().map(|&r| st.records[r].record_id.as_str().to_string()).collect();
        t.record_ids.sort();
        t.author_ids = authors.into_iter().collect();
        truth[p] = Some(t);
    }

    let mut truth: Vec<PlantTruth> = truth.into_iter().map(|t| t.expect("every plant applied")).collect();
    expectations(spec, &st, &mut truth, rules);
    Ok(Generated {
        corpus: Corpus::from_records(st.records, registry),
        truth,
    })
}

/// Detector outcomes implied by the planted authors' bookkeeping. Baseline
/// authors never qualify: they hold one primary affiliation and stay under
/// the yearly cap.
fn expectations(spec: &GeneratorSpec, st: &State<'_>, truth: &mut [PlantTruth], rules: ExpectationRules) {
    let owner: BTreeMap<&str, usize> = truth
        .iter()
        .enumerate()
        .flat_map(|(p, t)| t.author_ids.iter().map(move |a| (a.as_str(), p)))
        .collect();
    let mut found: Vec<Vec<ExpectedFlag>> = vec![Vec::new(); truth.len()];
    for (author, entries) in &st.ledger {
        let p = owner[author.as_str()];
        let mut by_year: BTreeMap<i32, (u64, BTreeSet<&str>)> = BTreeMap::new();
        let mut naming: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
        for (year, insts) in entries {
            let slot = by_year.entry(*year).or_default();
            slot.0 += 1;
            slot.1.extend(insts.iter().map(String::as_str));
            for (pos, inst) in insts.iter().enumerate() {
                let n = naming.entry(inst.as_str()).or_default();
                n.0 += 1;
                n.1 += (pos > 0) as u64;
            }
        }
        for (year, (count, insts)) in &by_year {
            if rules.hyperprolific.qualifies(*count) {
                for inst in insts {
                    found[p].push(ExpectedFlag {
                        detector: "hyperprolific".into(),
                        subject: author.clone(),
                        institution: Some(inst.to_string()),
                        year: Some(*year),
                    });
                }
            }
        }
        for (inst, (total, secondary)) in &naming {
            if *total >= rules.external_min_pubs as u64 && 2 * secondary > *total {
                found[p].push(ExpectedFlag {
                    detector: "external_author".into(),
                    subject: author.clone(),
                    institution: Some(inst.to_string()),
                    year: None,
                });
            }
        }
    }
    // Cross-group expectations are relative to each cross-group plant's set.
    for (p, plant) in spec.anomalies.iter().enumerate() {
        let PlantKind::CrossGroupAuthor { institutions, .. } = &plant.kind else {
            continue;
        };
        let group: BTreeSet<&str> = institutions.iter().map(String::as_str).collect();
        for (author, entries) in &st.ledger {
            let mut records = 0u64;
            let mut listed = BTreeSet::new();
            for (_, insts) in entries {
                let hits: Vec<&str> = insts.iter().map(String::as_str).filter(|i| group.contains(i)).collect();
                if !hits.is_empty() {
                    records += 1;
                    listed.extend(hits);
                }
            }
            if records > rules.cross_group_min_pubs as u64 && listed.len() >= 2 {
                found[p].push(ExpectedFlag {
                    detector: "cross_group".into(),
                    subject: author.clone(),
                    institution: None,
                    year: None,
                });
            }
        }
    }
    for (p, plant) in spec.anomalies.iter().enumerate() {
        if let PlantKind::OverlapBoost { institution, with, .. } = &plant.kind {
            let mut shared: BTreeMap<i32, u64> = spec.years.iter().map(|y| (y, 0)).collect();
            for r in &st.records {
                if r.lists(institution) && r.lists(with) {
                    *shared.entry(r.year).or_default() += 1;
                }
            }
            truth[p].shared_records = Some(shared);
        }
    }
    for (t, mut flags) in truth.iter_mut().zip(found) {
        t.expected.append(&mut flags);
        t.expected.sort();
    }
}

#[cfg(test)]
mod tests {
    use super::super::spec::{AnomalyPlant, YearSpan};
    use super::*;
    use crate::authorship::{cross_group_authors, external_authors, hyperprolific_authors};
    use crate::corpus::InstitutionId;

    fn cc(s: &str) -> CountryCode {
        s.parse().unwrap()
    }

    fn small_spec(seed: u64) -> GeneratorSpec {
        let mut institutions = vec![];
        for (id, c) in [("h1", "SA"), ("h2", "SA"), ("f1", "PK"), ("f2", "EG")] {
            let mut s = InstitutionSpec::new(id, cc(c), 60);
            s.intl_collab_prob = 0.3;
            s.domestic_collab_prob = 0.2;
            institutions.push(s);
        }
        GeneratorSpec {
            seed,
            years: YearSpan { start: 2019, end: 2023 },
            author_year_cap: 20,
            institutions,
            anomalies: vec![],
        }
    }

    fn plant(id: &str, years: &[i32], kind: PlantKind) -> AnomalyPlant {
        AnomalyPlant {
            id: Some(id.into()),
            active_years: years.to_vec(),
            kind,
        }
    }

    #[test]
    fn clean_baseline_has_no_plants() {
        let g = generate(&small_spec(3)).unwrap();
        assert!(g.truth.is_empty());
        assert_eq!(g.truth_jsonl(), "");
        assert_eq!(g.corpus.len(), 4 * 60 * 5);
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = generate(&small_spec(9)).unwrap();
        let b = generate(&small_spec(9)).unwrap();
        assert_eq!(a.corpus.to_jsonl(), b.corpus.to_jsonl());
        let c = generate(&small_spec(10)).unwrap();
        assert_ne!(a.corpus.to_jsonl(), c.corpus.to_jsonl());
    }

    #[test]
    fn hyperprolific_plant_realizes_exact_count() {
        let mut spec = small_spec(1);
        spec.institutions[0].base_output_per_year = 80;
        spec.anomalies.push(plant(
            "hp",
            &[2023],
            PlantKind::HyperprolificAuthor {
                institution: "h1".into(),
                author_id: None,
                yearly_count: 40,
            },
        ));
        let g = generate(&spec).unwrap();
        let t = &g.truth[0];
        assert_eq!(t.yearly_counts[&2023], 40);
        assert_eq!(t.record_ids.len(), 40);
        let author = &t.author_ids[0];
        assert_eq!(g.corpus.author_records(author).filter(|r| r.year == 2023).count(), 40);
        let flagged = hyperprolific_authors(&g.corpus, "h1", 2023, HyperprolificRule::default()).unwrap();
        let subjects: Vec<&str> = flagged.iter().map(|f| f.subject.as_str()).collect();
        assert_eq!(subjects, [author.as_str()]);
        assert_eq!(g.expected_subjects("hyperprolific"), [author.clone()].into_iter().collect());
    }

    #[test]
    fn external_and_cross_group_plants_match_detectors() {
        let mut spec = small_spec(5);
        spec.anomalies.push(plant(
            "sold",
            &[2022, 2023],
            PlantKind::ExternalAuthor {
                host: "h1".into(),
                home: "f1".into(),
                author_id: Some("sold-author".into()),
                records: 5,
                secondary_fraction: 0.6,
            },
        ));
        spec.anomalies.push(plant(
            "xg",
            &[2023],
            PlantKind::CrossGroupAuthor {
                institutions: vec!["h1".into(), "h2".into()],
                author_id: None,
                records_per_institution: 6,
            },
        ));
        let g = generate(&spec).unwrap();
        let ext = external_authors(&g.corpus, "h1", 2).unwrap();
        assert_eq!(ext.iter().map(|f| f.subject.clone()).collect::<BTreeSet<_>>(), g.expected_subjects("external_author"));
        assert_eq!(ext.len(), 1);
        let group = [InstitutionId::from("h1"), InstitutionId::from("h2")];
        let xg = cross_group_authors(&g.corpus, &group, 10).unwrap();
        assert_eq!(xg.iter().map(|f| f.subject.clone()).collect::<BTreeSet<_>>(), g.expected_subjects("cross_group"));
        assert_eq!(xg.len(), 1);
    }

    #[test]
    fn overlap_truth_counts_shared_records() {
        let mut spec = small_spec(2);
        spec.anomalies.push(plant(
            "ov",
            &[2021],
            PlantKind::OverlapBoost {
                institution: "h1".into(),
                with: "h2".into(),
                records_per_year: 11,
            },
        ));
        let g = generate(&spec).unwrap();
        let shared = g.truth[0].shared_records.as_ref().unwrap();
        let actual = g.corpus.records().iter().filter(|r| r.year == 2021 && r.lists("h1") && r.lists("h2")).count();
        assert_eq!(shared[&2021], actual as u64);
        assert!(actual >= 11);
    }

    #[test]
    fn too_few_records_is_a_spec_error() {
        let mut spec = small_spec(1);
        spec.anomalies.push(plant(
            "hp",
            &[2023],
            PlantKind::HyperprolificAuthor {
                institution: "h1".into(),
                author_id: None,
                yearly_count: 500,
            },
        ));
        assert!(matches!(generate(&spec), Err(Error::InvalidSpec(_))));
    }
}
