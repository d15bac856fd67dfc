use std::collections::BTreeSet;

use authsignal_core::authorship::{cross_group_authors, external_authors, hyperprolific_authors, HyperprolificRule};
use authsignal_core::corpus::InstitutionId;
use authsignal_core::export::{indicator_table, rows_to_csv, TableOptions};
use authsignal_core::screening::{run_funnel, FunnelConfig};
use authsignal_core::synth::{generate, institution_id, oracle_metrics, universe, OracleParams, UniverseParams};
use authsignal_core::Exact;

fn small(seed: u64, planted: usize) -> UniverseParams {
    UniverseParams {
        seed,
        institutions: 12,
        base_output: 50,
        planted_surges: planted,
        author_plants: planted > 0,
    }
}

#[test]
fn indicator_table_matches_oracle() {
    for seed in 0..3 {
        let g = generate(&universe(small(seed, 2))).unwrap();
        let members: Vec<InstitutionId> = (0..3).map(|k| institution_id(k).into()).collect();
        let mut opts = TableOptions::default();
        opts.groups.insert("planted".into(), members.clone());
        let ours = rows_to_csv(&indicator_table(&g.corpus, &opts).unwrap());
        let params = OracleParams {
            groups: vec![("planted".into(), members.iter().map(|m| m.to_string()).collect())],
            ..OracleParams::default()
        };
        let text = String::from_utf8(g.corpus.to_jsonl()).unwrap();
        let theirs = oracle_metrics(&text, &params).unwrap();
        assert_eq!(ours, theirs, "seed {seed}");
    }
}

#[test]
fn planted_surges_and_authors_are_recovered() {
    for seed in 0..5 {
        let g = generate(&universe(small(seed, 2))).unwrap();
        let result = run_funnel::<Exact>(&g.corpus, &FunnelConfig::default()).unwrap();
        let flagged: BTreeSet<String> = result.final_flagged.iter().map(|i| i.to_string()).collect();
        assert_eq!(flagged, g.expected_funnel(), "seed {seed}");

        let mut hyper = BTreeSet::new();
        let mut external = BTreeSet::new();
        for inst in g.corpus.institutions() {
            for year in g.corpus.years() {
                for f in hyperprolific_authors(&g.corpus, inst.as_str(), year, HyperprolificRule::default()).unwrap() {
                    hyper.insert(f.subject);
                }
            }
            for f in external_authors(&g.corpus, inst.as_str(), 2).unwrap() {
                external.insert(f.subject);
            }
        }
        assert_eq!(hyper, g.expected_subjects("hyperprolific"));
        assert_eq!(external, g.expected_subjects("external_author"));
        let group: Vec<InstitutionId> = (0..3).map(|k| institution_id(k).into()).collect();
        let cross: BTreeSet<String> =
            cross_group_authors(&g.corpus, &group, 10).unwrap().into_iter().map(|f| f.subject).collect();
        assert_eq!(cross, g.expected_subjects("cross_group"));
        assert_eq!((hyper.len(), external.len(), cross.len()), (1, 1, 1));
    }
}

#[test]
fn clean_baselines_pass_nothing() {
    for seed in 0..100 {
        let g = generate(&universe(small(seed, 0))).unwrap();
        assert!(g.truth.is_empty());
        let result = run_funnel::<Exact>(&g.corpus, &FunnelConfig::default()).unwrap();
        assert!(result.final_flagged.is_empty(), "seed {seed}: {:?}", result.final_flagged);
    }
}
