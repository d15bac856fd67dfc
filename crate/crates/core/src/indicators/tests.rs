use super::*;
use crate::corpus::test_support::{record, registry};
use crate::scalar::{round_half_up, round_tenths_half_up};
use crate::Exact;

fn reg() -> crate::corpus::InstitutionRegistry {
    registry(&[("A", "LB"), ("B", "LB"), ("C", "PK"), ("D", "SA")])
}

fn pct(v: Option<Exact>) -> i64 {
    round_half_up(v.expect("data"))
}

#[test]
fn output_count_empty_and_whole_counting() {
    let empty = Corpus::empty(reg());
    assert_eq!(output_count(&empty, "A", 2019).unwrap(), 0);

    let corpus = Corpus::from_records(
        vec![record("r1", 2019, &[("x", &[("A", "LB")]), ("y", &[("A", "LB")])])],
        reg(),
    );
    assert_eq!(output_count(&corpus, "A", 2019).unwrap(), 1);
    assert!(matches!(output_count(&corpus, "nope", 2019), Err(Error::UnknownInstitution(id)) if id == "nope"));
}

#[test]
fn growth_examples() {
    assert_eq!(round_half_up(growth_pct::<Exact>(91, 1432).unwrap()), 1474);
    assert_eq!(round_half_up(growth_pct::<Exact>(4490, 11962).unwrap()), 166);
    for x in [1, 7, 1000] {
        assert_eq!(growth_pct::<Exact>(x, x), Some(Exact::from_integer(0)));
    }
    assert_eq!(growth_pct::<Exact>(0, 10), None);
    assert_eq!(growth_pct::<Exact>(10, 0), Some(Exact::from_integer(-100)));
}

#[test]
fn first_author_saturation_and_micro_corpus() {
    let all = Corpus::from_records(
        vec![
            record("r1", 2019, &[("x", &[("A", "LB")]), ("y", &[("B", "LB")])]),
            record("r2", 2019, &[("x", &[("B", "LB"), ("A", "LB")])]),
        ],
        reg(),
    );
    assert_eq!(first_author_pct::<Exact>(&all, "A", 2019).unwrap(), Some(Exact::from_integer(100)));

    // A is first-authored on r1 and r3 only.
    let micro = Corpus::from_records(
        vec![
            record("r1", 2019, &[("x", &[("A", "LB")])]),
            record("r2", 2019, &[("y", &[("B", "LB")]), ("x", &[("A", "LB")])]),
            record("r3", 2019, &[("z", &[("C", "PK"), ("A", "LB")])]),
        ],
        reg(),
    );
    let fa = first_author_pct::<Exact>(&micro, "A", 2019).unwrap();
    assert_eq!(fa, Some(Exact::new(200, 3)));
    assert_eq!(pct(fa), 67);
    // The first author of r3 lists C too, so C is credited as well.
    assert_eq!(first_author_pct::<Exact>(&micro, "C", 2019).unwrap(), Some(Exact::from_integer(100)));
    assert_eq!(first_author_pct::<Exact>(&micro, "D", 2019).unwrap(), None);
}

#[test]
fn authors_per_article_scopes() {
    let singles = Corpus::from_records(
        vec![
            record("r1", 2019, &[("x", &[("A", "LB")])]),
            record("r2", 2019, &[("y", &[("A", "LB")])]),
        ],
        reg(),
    );
    assert_eq!(
        authors_per_article::<Exact>(&singles, Scope::Institution("A"), 2019).unwrap(),
        Some(Exact::from_integer(1))
    );

    let pair = Corpus::from_records(
        vec![
            record("r1", 2019, &[("a", &[("A", "LB")]), ("b", &[("A", "LB")]), ("c", &[("B", "LB")])]),
            record(
                "r2",
                2019,
                &[("a", &[("A", "LB")]), ("b", &[("C", "PK")]), ("c", &[("C", "PK")]), ("d", &[("B", "LB")]), ("e", &[("B", "LB")])],
            ),
        ],
        reg(),
    );
    let apa = authors_per_article::<Exact>(&pair, Scope::Corpus, 2019).unwrap().unwrap();
    assert_eq!(apa, Exact::from_integer(4));
    assert_eq!(round_tenths_half_up(apa), 40);
    let group = [InstitutionId::from("A"), InstitutionId::from("B")];
    assert_eq!(
        authors_per_article::<Exact>(&pair, Scope::Group(&group), 2019).unwrap(),
        Some(Exact::from_integer(4))
    );
    assert_eq!(authors_per_article::<Exact>(&pair, Scope::Corpus, 2020).unwrap(), None);
}

#[test]
fn international_collaboration() {
    let domestic = Corpus::from_records(
        vec![record("r1", 2019, &[("x", &[("A", "LB")]), ("y", &[("B", "LB")])])],
        reg(),
    );
    assert_eq!(intl_collab_pct::<Exact>(&domestic, "A", 2019).unwrap(), Some(Exact::from_integer(0)));

    let mixed = Corpus::from_records(
        vec![
            record("r1", 2019, &[("x", &[("A", "LB")]), ("y", &[("C", "PK")])]),
            record("r2", 2019, &[("x", &[("A", "LB")])]),
        ],
        reg(),
    );
    assert_eq!(intl_collab_pct::<Exact>(&mixed, "A", 2019).unwrap(), Some(Exact::from_integer(50)));
}

#[test]
fn multi_affiliation_single_affiliations_everywhere() {
    let corpus = Corpus::from_records(
        vec![
            record("r1", 2019, &[("x", &[("A", "LB")]), ("y", &[("B", "LB")])]),
            record("r2", 2019, &[("x", &[("A", "LB")]), ("z", &[("C", "PK")])]),
        ],
        reg(),
    );
    assert_eq!(multi_affiliation_pct::<Exact>(&corpus, "A", 2019).unwrap(), Some(Exact::from_integer(0)));
}

#[test]
fn multi_affiliation_adopted_rule_micro_corpus() {
    // r1 qualifies (x lists A and B). r2..r4 stay in the denominator because
    // some co-author is not solely affiliated with A. r5 is excluded: every
    // author lists A as their only affiliation.
    let corpus = Corpus::from_records(
        vec![
            record("r1", 2019, &[("x", &[("A", "LB"), ("B", "LB")])]),
            record("r2", 2019, &[("x", &[("A", "LB")]), ("y", &[("B", "LB")])]),
            record("r3", 2019, &[("x", &[("A", "LB")]), ("y", &[("C", "PK"), ("D", "SA")])]),
            record("r4", 2019, &[("y", &[("D", "SA")]), ("x", &[("A", "LB")])]),
            record("r5", 2019, &[("x", &[("A", "LB")]), ("w", &[("A", "LB")])]),
        ],
        reg(),
    );
    assert_eq!(multi_affiliation_pct::<Exact>(&corpus, "A", 2019).unwrap(), Some(Exact::from_integer(25)));
    assert_eq!(
        multi_affiliation_pct_with::<Exact>(&corpus, "A", 2019, MultiAffiliationRule::AllRecords).unwrap(),
        Some(Exact::from_integer(20))
    );

    let only_internal = Corpus::from_records(vec![record("r5", 2019, &[("x", &[("A", "LB")])])], reg());
    assert_eq!(multi_affiliation_pct::<Exact>(&only_internal, "A", 2019).unwrap(), None);
}

#[test]
fn overlap_counts_shared_records_once() {
    let ab = [InstitutionId::from("A"), InstitutionId::from("B")];
    let disjoint = Corpus::from_records(
        vec![
            record("r1", 2019, &[("x", &[("A", "LB")])]),
            record("r2", 2019, &[("y", &[("B", "LB")])]),
        ],
        reg(),
    );
    assert_eq!(overlap_pct::<Exact>(&disjoint, &ab, 2019).unwrap(), Some(Exact::from_integer(0)));

    let mut records = Vec::new();
    for i in 0..7 {
        let inst = if i % 2 == 0 { "A" } else { "B" };
        records.push(record(&format!("s{i}"), 2019, &[("x", &[(inst, "LB")])]));
    }
    records.push(record("m1", 2019, &[("x", &[("A", "LB")]), ("y", &[("B", "LB")])]));
    records.push(record("m2", 2019, &[("x", &[("A", "LB"), ("B", "LB")])]));
    records.push(record("m3", 2019, &[("x", &[("A", "LB")]), ("y", &[("B", "LB")]), ("z", &[("C", "PK")])]));
    records.push(record("other", 2019, &[("z", &[("C", "PK")])]));
    let corpus = Corpus::from_records(records, reg());
    assert_eq!(overlap_counts(&corpus, &ab, 2019).unwrap(), (3, 10));
    assert_eq!(overlap_pct::<Exact>(&corpus, &ab, 2019).unwrap(), Some(Exact::from_integer(30)));

    let single = [InstitutionId::from("A")];
    assert!(matches!(overlap_pct::<Exact>(&corpus, &single, 2019), Err(Error::Precondition(_))));
    assert_eq!(overlap_pct::<Exact>(&corpus, &ab, 2020).unwrap(), None);
}

#[test]
fn subject_ranking() {
    let mut records = Vec::new();
    for (inst, n) in [("A", 10), ("B", 10), ("C", 7)] {
        for i in 0..n {
            let mut r = record(&format!("{inst}{i}"), 2023, &[("x", &[(inst, "LB")])]);
            r.subject_categories.insert("Mathematics".into());
            records.push(r);
        }
    }
    let corpus = Corpus::from_records(records, reg());
    let ranking = subject_output_rank(&corpus, "Mathematics", 2023);
    let got: Vec<_> = ranking.entries.iter().map(|e| (e.institution_id.as_str(), e.value, e.rank)).collect();
    assert_eq!(got, [("A", 10, 1), ("B", 10, 1), ("C", 7, 3)]);

    let unknown = subject_output_rank(&corpus, "Space Science", 2023);
    assert!(unknown.is_empty());
    assert!(unknown.warning.is_some());
}

#[test]
fn rank_by_first_authorship_with_ties() {
    // A: 1/2 first-authored, B and C: 2/7 first-authored each.
    let mut records = vec![
        record("a1", 2019, &[("x", &[("A", "LB")])]),
        record("a2", 2019, &[("y", &[("D", "SA")]), ("x", &[("A", "LB")])]),
    ];
    for inst in ["B", "C"] {
        for i in 0..7 {
            let first = if i < 2 { inst } else { "D" };
            let cc = if inst == "C" { "PK" } else { "LB" };
            records.push(record(&format!("{inst}{i}"), 2019, &[("f", &[(first, if first == "D" { "SA" } else { cc })]), ("g", &[(inst, cc)])]));
        }
    }
    let corpus = Corpus::from_records(records, reg());
    let ranking: Ranking<Exact> =
        rank_among(&corpus, &["A".into(), "B".into(), "C".into()], &Metric::FirstAuthorPct, 2019, Direction::Descending).unwrap();
    let got: Vec<_> = ranking.entries.iter().map(|e| (e.institution_id.as_str(), e.rank)).collect();
    assert_eq!(got, [("A", 1), ("B", 2), ("C", 2)]);

    let solo = Corpus::from_records(vec![record("r", 2019, &[("x", &[("A", "LB")])])], reg());
    let r: Ranking<Exact> = rank_institutions(&solo, &Metric::FirstAuthorPct, 2019, Direction::Descending).unwrap();
    assert_eq!(r.rank_of("A"), Some(1));
    let r: Ranking<Exact> = rank_institutions(&solo, &Metric::FirstAuthorPct, 2020, Direction::Descending).unwrap();
    assert!(r.is_empty());
    assert_eq!(r.no_data, vec![InstitutionId::from("A")]);
}

#[test]
fn single_member_group_matches_member_series() {
    let corpus = Corpus::from_records(
        vec![
            record("r1", 2019, &[("x", &[("A", "LB")]), ("y", &[("C", "PK")])]),
            record("r2", 2019, &[("y", &[("B", "LB"), ("A", "LB")])]),
            record("r3", 2023, &[("x", &[("A", "LB")])]),
            record("r4", 2023, &[("x", &[("A", "LB")])]),
            record("r5", 2023, &[("z", &[("B", "LB")])]),
        ],
        reg(),
    );
    let summary: GroupSummary<Exact> = group_summary(&corpus, "solo", &["A".into()], &[2019, 2023]).unwrap();
    for y in &summary.years {
        assert_eq!(y.first_author_pct, first_author_pct(&corpus, "A", y.year).unwrap());
        assert_eq!(y.intl_collab_pct, intl_collab_pct(&corpus, "A", y.year).unwrap());
        assert_eq!(y.multi_affiliation_pct, multi_affiliation_pct(&corpus, "A", y.year).unwrap());
        assert_eq!(y.authors_per_article, authors_per_article(&corpus, Scope::Institution("A"), y.year).unwrap());
        assert_eq!(y.summed_output, y.distinct_output);
        assert_eq!(y.overlap_pct, None);
        let rank: Ranking<Exact> = rank_institutions(&corpus, &Metric::OutputCount, y.year, Direction::Descending).unwrap();
        assert_eq!(y.median_output_rank, rank.rank_of("A").map(|r| Exact::from_integer(r as i64)));
    }
    assert_eq!(summary.growth_pct, growth_pct(2, 2));
}

#[test]
fn group_weighting_and_overlap() {
    let corpus = Corpus::from_records(
        vec![
            record("r1", 2019, &[("x", &[("A", "LB")]), ("y", &[("B", "LB")])]),
            record("r2", 2019, &[("x", &[("A", "LB")])]),
            record("r3", 2019, &[("z", &[("B", "LB")])]),
            record("r4", 2023, &[("x", &[("A", "LB")])]),
        ],
        reg(),
    );
    let g: GroupSummary<Exact> = group_summary(&corpus, "g", &["A".into(), "B".into()], &[2019, 2023]).unwrap();
    let y = g.year(2019).unwrap();
    assert_eq!((y.summed_output, y.distinct_output), (4, 3));
    // first-authored: A on r1, r2; B on r3 -> 3 of 4 member-records.
    assert_eq!(y.first_author_pct, Some(Exact::from_integer(75)));
    assert_eq!(y.overlap_pct, Some(Exact::new(100, 3)));
    assert_eq!(y.authors_per_article, Some(Exact::new(4, 3)));
    assert_eq!(y.median_output_rank, Some(Exact::from_integer(1)));
    let y23 = g.year(2023).unwrap();
    assert_eq!(y23.members_without_data, vec![InstitutionId::from("B")]);
    assert_eq!(g.growth_pct, growth_pct(3, 1));
    assert_eq!(g.summed_growth_pct, growth_pct(4, 1));
}
