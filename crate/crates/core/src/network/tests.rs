use super::*;
use crate::corpus::test_support::{record, registry};

fn reg() -> crate::corpus::InstitutionRegistry {
    registry(&[("A", "SA"), ("B", "SA"), ("C", "PK"), ("D", "EG"), ("E", "IN")])
}

fn params(seed: &[&str], min_articles: u64) -> GraphParams {
    GraphParams {
        year: 2023,
        seed_group: seed.iter().map(|s| InstitutionId::from(*s)).collect(),
        min_articles,
        qualification: Qualification::TotalOutput,
    }
}

pub(crate) fn graph_of(edges: &[(&str, &str, u64)]) -> CoauthorshipGraph {
    let mut ids: Vec<&str> = edges.iter().flat_map(|(a, b, _)| [*a, *b]).collect();
    ids.sort();
    ids.dedup();
    let nodes = ids.into_iter().map(io_bare).collect();
    let edges = edges
        .iter()
        .map(|(a, b, s)| Edge {
            a: (*a).into(),
            b: (*b).into(),
            strength: *s,
        })
        .collect();
    CoauthorshipGraph::from_parts(GraphParams::default(), nodes, edges).unwrap()
}

fn io_bare(id: &str) -> Node {
    Node {
        institution_id: id.into(),
        article_count: 0,
        seed_coauthored: 0,
        total_link_strength: 0,
        cluster: None,
        seed: false,
    }
}

#[test]
fn closed_group_and_hand_counted_edge() {
    let mut records = vec![];
    for i in 0..3 {
        records.push(record(&format!("ab{i}"), 2023, &[("x", &[("A", "SA")]), ("y", &[("B", "SA")])]));
    }
    records.push(record("ac", 2023, &[("x", &[("A", "SA")]), ("z", &[("C", "PK")])]));
    records.push(record("old", 2022, &[("x", &[("A", "SA")]), ("y", &[("B", "SA")])]));
    let corpus = Corpus::from_records(records, reg());

    let g = build_graph(&corpus, params(&["A", "B"], 91)).unwrap();
    assert_eq!(g.nodes.len(), 2);
    assert_eq!(g.edges, vec![Edge { a: "A".into(), b: "B".into(), strength: 3 }]);
    let stats = graph_stats(&g);
    assert_eq!((stats.nodes, stats.external_nodes, stats.links, stats.total_link_strength), (2, 0, 1, 3));
    assert_eq!(stats.node_link_strength_sum, 6);

    let with_c = build_graph(&corpus, params(&["A"], 1)).unwrap();
    assert_eq!(with_c.nodes.len(), 3);
    assert!(with_c.node("C").is_some_and(|n| !n.seed && n.article_count == 1));
}

#[test]
fn qualification_readings_differ() {
    let mut records = vec![record("s", 2023, &[("x", &[("A", "SA")]), ("z", &[("C", "PK")])])];
    for i in 0..5 {
        records.push(record(&format!("c{i}"), 2023, &[("z", &[("C", "PK")])]));
    }
    let corpus = Corpus::from_records(records, reg());
    let total = build_graph(&corpus, params(&["A"], 6)).unwrap();
    assert!(total.node("C").is_some());
    let shared = build_graph(
        &corpus,
        GraphParams {
            qualification: Qualification::CoPublished,
            ..params(&["A"], 6)
        },
    )
    .unwrap();
    assert!(shared.node("C").is_none());
}

#[test]
fn external_edges_require_both_endpoints() {
    let records = vec![
        record("r1", 2023, &[("x", &[("A", "SA")]), ("z", &[("C", "PK")]), ("w", &[("D", "EG")])]),
        record("r2", 2023, &[("z", &[("C", "PK")]), ("w", &[("D", "EG")])]),
        record("r3", 2023, &[("z", &[("C", "PK")]), ("v", &[("E", "IN")])]),
    ];
    let corpus = Corpus::from_records(records, reg());
    let g = build_graph(&corpus, params(&["A"], 1)).unwrap();
    let ids: Vec<&str> = g.nodes.iter().map(|n| n.institution_id.as_str()).collect();
    assert_eq!(ids, ["A", "C", "D"]);
    let cd = g.edges.iter().find(|e| e.a.as_str() == "C" && e.b.as_str() == "D").unwrap();
    assert_eq!(cd.strength, 2);
    assert_eq!(g.node_strength_sum(), 2 * g.edge_strength_sum());
}

#[test]
fn empty_seed_is_rejected() {
    let corpus = Corpus::empty(reg());
    assert!(build_graph(&corpus, params(&[], 91)).is_err());
    let g = build_graph(&corpus, params(&["A"], 91)).unwrap();
    assert_eq!(g.edges.len(), 0);
}

#[test]
fn empty_graph_stats_and_footer() {
    let g = CoauthorshipGraph::from_parts(GraphParams::default(), vec![], vec![]).unwrap();
    let s = graph_stats(&g);
    assert_eq!((s.nodes, s.links, s.total_link_strength, s.clusters), (0, 0, 0, 0));
    assert_eq!(abbreviate(7000), "7k");
    assert_eq!(abbreviate(154_000), "154k");
    assert_eq!(abbreviate(547), "547");
    let stats = GraphStats {
        min_articles: 91,
        nodes: 43,
        external_nodes: 27,
        links: 547,
        total_link_strength: 7_012,
        node_link_strength_sum: 14_024,
        clusters: 9,
    };
    assert_eq!(
        stats.footer(),
        "Articles per institution: 91 | External institutions: 27 | Links: 547 | Total link strength: 7k | Clusters: 9"
    );
}

#[test]
fn disconnected_components_give_two_clusters() {
    let g = graph_of(&[("a", "b", 2), ("b", "c", 1), ("x", "y", 5)]);
    let c = cluster_graph(&g, 7).unwrap();
    let labels: Vec<u32> = c.nodes.iter().map(|n| n.cluster.unwrap()).collect();
    assert_eq!(labels, [1, 1, 1, 2, 2]);
}

#[test]
fn complete_graph_is_one_cluster() {
    let names: Vec<String> = (0..8).map(|i| format!("n{i}")).collect();
    let mut edges = vec![];
    for i in 0..8 {
        for j in i + 1..8 {
            edges.push((names[i].as_str(), names[j].as_str(), 1));
        }
    }
    let c = cluster_graph(&graph_of(&edges), 3).unwrap();
    assert!(c.nodes.iter().all(|n| n.cluster == Some(1)));
}

#[test]
fn planted_blocks_recovered() {
    let names: Vec<String> = (0..20).map(|i| format!("i{i:02}")).collect();
    let mut edges = vec![];
    for i in 0..20 {
        for j in i + 1..20 {
            let same = (i < 10) == (j < 10);
            edges.push((names[i].as_str(), names[j].as_str(), if same { 10 } else { 1 }));
        }
    }
    let g = graph_of(&edges);
    for seed in 0..20 {
        let c = cluster_graph(&g, seed).unwrap();
        for (i, n) in c.nodes.iter().enumerate() {
            assert_eq!(n.cluster, Some(if i < 10 { 1 } else { 2 }), "seed {seed}");
        }
        assert!(modularity(&c) > modularity(&g));
    }
}

#[test]
fn clustering_rejects_empty_graph() {
    let g = CoauthorshipGraph::from_parts(GraphParams::default(), vec![], vec![]).unwrap();
    assert!(cluster_graph(&g, 0).is_err());
}

#[test]
fn csv_export_shapes() {
    let empty = CoauthorshipGraph::from_parts(GraphParams::default(), vec![], vec![]).unwrap();
    assert_eq!(export_graph(&empty, GraphFormat::Csv).unwrap(), b"source,target,strength\n");
    let g = graph_of(&[("b", "a", 3)]);
    assert_eq!(export_graph(&g, GraphFormat::Csv).unwrap(), b"source,target,strength\na,b,3\n");
}

#[test]
fn unknown_format_lists_supported() {
    let err = "dot".parse::<GraphFormat>().unwrap_err();
    let msg = err.to_string();
    for f in GraphFormat::SUPPORTED {
        assert!(msg.contains(f), "{msg}");
    }
}

#[test]
fn rich_formats_round_trip_attributes() {
    let corpus = Corpus::from_records(
        vec![
            record("r1", 2023, &[("x", &[("A", "SA")]), ("z", &[("C", "PK")])]),
            record("r2", 2023, &[("x", &[("A", "SA")]), ("z", &[("C & D", "PK")])]),
        ],
        registry(&[("A", "SA"), ("C", "PK"), ("C & D", "PK")]),
    );
    let g = cluster_graph(&build_graph(&corpus, params(&["A"], 1)).unwrap(), 1).unwrap();
    let back = import_graph(&export_graph(&g, GraphFormat::Graphml).unwrap(), GraphFormat::Graphml).unwrap();
    assert_eq!(back, g);
    let back = import_graph(&export_graph(&g, GraphFormat::VosviewerJson).unwrap(), GraphFormat::VosviewerJson).unwrap();
    assert_eq!((back.nodes, back.edges, back.params.seed_group), (g.nodes.clone(), g.edges.clone(), g.params.seed_group.clone()));
}
