use std::collections::BTreeSet;

use authsignal_core::authorship::{cross_group_authors, external_authors, hyperprolific_authors, HyperprolificRule};
use authsignal_core::corpus::{
    AffiliationRef, AuthorEntry, Corpus, CountryCode, DocType, InstitutionId, InstitutionRegistry, PublicationRecord,
    RegistryEntry,
};
use authsignal_core::export::{indicator_table, rows_to_csv, TableOptions};
use authsignal_core::network::{build_graph, cluster_graph, GraphParams, Qualification};
use authsignal_core::screening::{run_funnel, FunnelConfig};
use authsignal_core::synth::{generate, universe, UniverseParams};
use authsignal_core::Exact;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use proptest::sample::subsequence;

const INSTITUTIONS: usize = 6;
const COUNTRIES: [&str; 3] = ["SA", "US", "IN"];

fn inst(k: usize) -> InstitutionId {
    InstitutionId::new(format!("i{k}"))
}

fn registry() -> InstitutionRegistry {
    InstitutionRegistry::new((0..INSTITUTIONS).map(|k| RegistryEntry {
        institution_id: inst(k),
        canonical_name: format!("institution {k}"),
        country: COUNTRIES[k % 3].parse::<CountryCode>().unwrap(),
        aliases: Default::default(),
    }))
    .unwrap()
}

/// (year offset, authors as (author index, affiliation indices))
type RawRecord = (i32, Vec<(usize, Vec<usize>)>);

fn raw_record() -> impl Strategy<Value = RawRecord> {
    let author = (0usize..12, prop::collection::btree_set(0..INSTITUTIONS, 1..=2));
    (0i32..5, prop::collection::vec(author, 1..5)).prop_map(|(y, authors)| {
        let mut seen = BTreeSet::new();
        let authors = authors
            .into_iter()
            .filter(|(a, _)| seen.insert(*a))
            .map(|(a, affs)| (a, affs.into_iter().collect()))
            .collect();
        (y, authors)
    })
}

fn records(raw: &[RawRecord]) -> Vec<PublicationRecord> {
    raw.iter()
        .enumerate()
        .map(|(n, (y, authors))| PublicationRecord {
            record_id: format!("r{n:04}").into(),
            year: 2019 + y,
            doc_type: DocType::Article,
            subject_categories: Default::default(),
            authors: authors
                .iter()
                .map(|(a, affs)| {
                    let affs = affs
                        .iter()
                        .map(|&k| AffiliationRef::resolved(inst(k), COUNTRIES[k % 3].parse().unwrap()))
                        .collect();
                    AuthorEntry::new(format!("a{a}"), affs)
                })
                .collect(),
            corresponding_author_ids: Default::default(),
        })
        .collect()
}

fn corpus_strategy() -> impl Strategy<Value = Vec<PublicationRecord>> {
    prop::collection::vec(raw_record(), 0..80).prop_map(|raw| records(&raw))
}

fn corpus(records: Vec<PublicationRecord>) -> Corpus {
    Corpus::from_records(records, registry())
}

fn subjects(flags: &[authsignal_core::authorship::FlagRecord]) -> BTreeSet<String> {
    flags.iter().map(|f| f.subject.clone()).collect()
}

fn group_strategy() -> impl Strategy<Value = Vec<InstitutionId>> {
    subsequence((0..INSTITUTIONS).collect::<Vec<_>>(), 1..=INSTITUTIONS).prop_map(|v| v.into_iter().map(inst).collect())
}


fn check<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new(config).run(&strategy, test).map_err(|e| e.to_string())
}

#[allow(dead_code)]
pub type Suite = (&'static str, fn(u32) -> Result<(), String>);

#[allow(dead_code)]
pub const SUITES: [Suite; 9] = [
    ("hyperprolific_set_shrinks_as_threshold_rises", hyperprolific_set_shrinks_as_threshold_rises),
    ("external_set_shrinks_as_min_pubs_rises", external_set_shrinks_as_min_pubs_rises),
    ("cross_group_set_shrinks_as_min_pubs_rises", cross_group_set_shrinks_as_min_pubs_rises),
    ("handshake_identity", handshake_identity),
    ("funnel_stages_only_shrink", funnel_stages_only_shrink),
    ("metrics_ignore_record_order", metrics_ignore_record_order),
    ("graph_build_ignore_record_order", graph_build_ignore_record_order),
    ("clustering_is_seed_deterministic", clustering_is_seed_deterministic),
    ("generation_is_seed_deterministic", generation_is_seed_deterministic),
];

pub fn hyperprolific_set_shrinks_as_threshold_rises(cases: u32) -> Result<(), String> {
    check(cases, (corpus_strategy(), 1u32..10, 0u32..5, 0..INSTITUTIONS, 0i32..5), |(recs, t, dt, k, y)| {
        let c = corpus(recs);
        let id = inst(k);
        let low = hyperprolific_authors(&c, id.as_str(), 2019 + y, HyperprolificRule::with_threshold(t)).unwrap();
        let high = hyperprolific_authors(&c, id.as_str(), 2019 + y, HyperprolificRule::with_threshold(t + dt)).unwrap();
        prop_assert!(subjects(&high).is_subset(&subjects(&low)));
        Ok(())
    })
}

pub fn external_set_shrinks_as_min_pubs_rises(cases: u32) -> Result<(), String> {
    check(cases, (corpus_strategy(), 1u32..6, 0u32..4, 0..INSTITUTIONS), |(recs, m, dm, k)| {
        let c = corpus(recs);
        let id = inst(k);
        let low = external_authors(&c, id.as_str(), m).unwrap();
        let high = external_authors(&c, id.as_str(), m + dm).unwrap();
        prop_assert!(subjects(&high).is_subset(&subjects(&low)));
        Ok(())
    })
}

pub fn cross_group_set_shrinks_as_min_pubs_rises(cases: u32) -> Result<(), String> {
    check(cases, (corpus_strategy(), group_strategy(), 0u32..6, 0u32..4), |(recs, group, m, dm)| {
        prop_assume!(group.len() >= 2);
        let c = corpus(recs);
        let low = cross_group_authors(&c, &group, m).unwrap();
        let high = cross_group_authors(&c, &group, m + dm).unwrap();
        prop_assert!(subjects(&high).is_subset(&subjects(&low)));
        Ok(())
    })
}

pub fn handshake_identity(cases: u32) -> Result<(), String> {
    check(cases, (corpus_strategy(), group_strategy(), 0i32..5, 0u64..6, any::<bool>()), |(recs, group, y, min, coauthored)| {
        let c = corpus(recs);
        let params = GraphParams {
            year: 2019 + y,
            seed_group: group,
            min_articles: min,
            qualification: if coauthored { Qualification::CoPublished } else { Qualification::TotalOutput },
        };
        let g = build_graph(&c, params).unwrap();
        prop_assert_eq!(g.node_strength_sum(), 2 * g.edge_strength_sum());
        prop_assert!(g.edges.iter().all(|e| e.strength >= 1 && e.a != e.b));
        if !g.is_empty() {
            let clustered = cluster_graph(&g, 7).unwrap();
            prop_assert_eq!(clustered.node_strength_sum(), 2 * clustered.edge_strength_sum());
        }
        Ok(())
    })
}

pub fn funnel_stages_only_shrink(cases: u32) -> Result<(), String> {
    check(cases, (corpus_strategy(), 1usize..8, 0.0f64..200.0, 1u32..6), |(recs, top_n, growth, top_k)| {
        let mut recs = recs;
        // both endpoint years present
        recs.extend(records(&[(0, vec![(0, vec![0])]), (4, vec![(0, vec![0])])]).into_iter().enumerate().map(|(n, mut r)| {
            r.record_id = format!("edge{n}").into();
            r
        }));
        let c = corpus(recs);
        let config = FunnelConfig {
            top_n_by_output: top_n,
            growth_threshold_pct: Some(growth),
            growth_multiple_of_world: None,
            top_k_rank: top_k,
            ..FunnelConfig::default()
        };
        let result = run_funnel::<Exact>(&c, &config).unwrap();
        let mut previous: BTreeSet<InstitutionId> = c.institutions().cloned().collect();
        for stage in &result.stages {
            let now: BTreeSet<InstitutionId> = stage.surviving_ids.iter().cloned().collect();
            prop_assert!(now.is_subset(&previous), "{} grew", stage.stage_name);
            previous = now;
        }
        let last: BTreeSet<InstitutionId> = result.final_flagged.iter().cloned().collect();
        prop_assert_eq!(last, previous);
        Ok(())
    })
}

pub fn metrics_ignore_record_order(cases: u32) -> Result<(), String> {
    check(cases, (corpus_strategy().prop_flat_map(|r| { let n = r.clone(); (Just(n), Just(r).prop_shuffle()) }),), |(recs,)| {
        let (ordered, shuffled) = recs;
        let options = TableOptions {
            groups: [("g".to_string(), vec![inst(0), inst(1), inst(2)])].into(),
            cross_group_min_pubs: 1,
            ..TableOptions::default()
        };
        let a = rows_to_csv(&indicator_table(&corpus(ordered), &options).unwrap());
        let b = rows_to_csv(&indicator_table(&corpus(shuffled), &options).unwrap());
        prop_assert_eq!(a, b);
        Ok(())
    })
}

pub fn graph_build_ignore_record_order(cases: u32) -> Result<(), String> {
    check(cases, (corpus_strategy().prop_flat_map(|r| { let n = r.clone(); (Just(n), Just(r).prop_shuffle()) }), 0i32..5), |(recs, y)| {
        let (ordered, shuffled) = recs;
        let params = GraphParams { year: 2019 + y, seed_group: vec![inst(0)], min_articles: 1, qualification: Qualification::TotalOutput };
        let a = build_graph(&corpus(ordered), params.clone()).unwrap();
        let b = build_graph(&corpus(shuffled), params).unwrap();
        prop_assert_eq!(a, b);
        Ok(())
    })
}

pub fn clustering_is_seed_deterministic(cases: u32) -> Result<(), String> {
    check(cases, (corpus_strategy(), any::<u64>(), 0i32..5), |(recs, seed, y)| {
        let c = corpus(recs);
        let params = GraphParams { year: 2019 + y, seed_group: vec![inst(0), inst(3)], min_articles: 0, qualification: Qualification::TotalOutput };
        let g = build_graph(&c, params).unwrap();
        prop_assume!(!g.is_empty());
        prop_assert_eq!(cluster_graph(&g, seed).unwrap(), cluster_graph(&g, seed).unwrap());
        Ok(())
    })
}

pub fn generation_is_seed_deterministic(cases: u32) -> Result<(), String> {
    check(cases, (any::<u64>(), 4usize..7, 0usize..3), |(seed, institutions, planted)| {
        let params = UniverseParams { seed, institutions, base_output: 45, planted_surges: planted, author_plants: true };
        let a = generate(&universe(params)).unwrap();
        let b = generate(&universe(params)).unwrap();
        prop_assert_eq!(a.corpus.to_jsonl(), b.corpus.to_jsonl());
        prop_assert_eq!(a.truth_jsonl(), b.truth_jsonl());
        Ok(())
    })
}
