mod common;

const CASES: u32 = 256;

#[test]
fn hyperprolific_set_shrinks_as_threshold_rises() {
    common::hyperprolific_set_shrinks_as_threshold_rises(CASES).unwrap();
}

#[test]
fn external_set_shrinks_as_min_pubs_rises() {
    common::external_set_shrinks_as_min_pubs_rises(CASES).unwrap();
}

#[test]
fn cross_group_set_shrinks_as_min_pubs_rises() {
    common::cross_group_set_shrinks_as_min_pubs_rises(CASES).unwrap();
}

#[test]
fn handshake_identity() {
    common::handshake_identity(CASES).unwrap();
}

#[test]
fn funnel_stages_only_shrink() {
    common::funnel_stages_only_shrink(CASES).unwrap();
}

#[test]
fn metrics_ignore_record_order() {
    common::metrics_ignore_record_order(CASES).unwrap();
}

#[test]
fn graph_build_ignore_record_order() {
    common::graph_build_ignore_record_order(CASES).unwrap();
}

#[test]
fn clustering_is_seed_deterministic() {
    common::clustering_is_seed_deterministic(CASES).unwrap();
}

#[test]
fn generation_is_seed_deterministic() {
    common::generation_is_seed_deterministic(CASES).unwrap();
}
