use std::fs;
use std::path::{Path, PathBuf};

use lenie_core::error::ParseIssue;
use lenie_core::kg::{log_transform, normalize_relation_name, write_kg};
use lenie_core::{load_kg, Entity, Error, KnowledgeGraph, Relation, Triplet};
use proptest::prelude::*;
use tempfile::TempDir;

fn write_files(dir: &Path, ents: &str, rels: &str, trips: &str) -> [PathBuf; 3] {
    let paths = [
        dir.join("entities.tsv"),
        dir.join("relations.tsv"),
        dir.join("triplets.tsv"),
    ];
    for (p, body) in paths.iter().zip([ents, rels, trips]) {
        fs::write(p, body).unwrap();
    }
    paths
}

fn load(ents: &str, rels: &str, trips: &str) -> lenie_core::Result<KnowledgeGraph> {
    let dir = TempDir::new().unwrap();
    let [e, r, t] = write_files(dir.path(), ents, rels, trips);
    load_kg(e, r, t)
}

fn parse_issue(err: Error) -> (String, usize, ParseIssue) {
    match err {
        Error::Parse { file, line, issue } => {
            (file.file_name().unwrap().to_string_lossy().into_owned(), line, issue)
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
}

const THREE: &str = "0\tA\t\t\n1\tB\tabout B\t3\n2\tC\t\t0\n";

#[test]
fn empty_triplet_file_gives_empty_incidence() {
    let kg = load("0\tA\t\t\n1\tB\t\t\n", "0\tr\n", "").unwrap();
    assert_eq!(kg.triplets().len(), 0);
    for v in 0..2 {
        assert!(kg.incidence(v).unwrap().is_empty());
    }
    let s = kg.summary();
    assert_eq!((s.entities, s.edges, s.relations, s.labeled), (2, 0, 1, 0));
}

#[test]
fn dangling_entity_is_reported_with_its_line() {
    let err = load(THREE, "0\tr\n", "0\t0\t1\n1\t0\t99\n").unwrap_err();
    let (file, line, issue) = parse_issue(err);
    assert_eq!(file, "triplets.tsv");
    assert_eq!(line, 2);
    assert_eq!(issue, ParseIssue::DanglingEntity(99));
}

#[test]
fn dangling_relation_is_distinct_from_dangling_entity() {
    let err = load(THREE, "0\tr\n", "0\t5\t1\n").unwrap_err();
    assert_eq!(parse_issue(err).2, ParseIssue::DanglingRelation(5));
}

#[test]
fn wrong_column_count_names_file_and_line() {
    let err = load("0\tA\t\t\n1\tB\n", "0\tr\n", "").unwrap_err();
    let (file, line, issue) = parse_issue(err);
    assert_eq!(file, "entities.tsv");
    assert_eq!(line, 2);
    assert_eq!(issue, ParseIssue::ColumnCount { expected: 4, found: 2 });

    let err = load(THREE, "0\tr\n", "0\t0\n").unwrap_err();
    assert_eq!(parse_issue(err).2, ParseIssue::ColumnCount { expected: 3, found: 2 });
}

#[test]
fn duplicate_ids_are_rejected() {
    let err = load("0\tA\t\t\n0\tB\t\t\n", "0\tr\n", "").unwrap_err();
    let (_, line, issue) = parse_issue(err);
    assert_eq!(line, 2);
    assert_eq!(issue, ParseIssue::DuplicateId(0));

    let err = load(THREE, "0\tr\n0\ts\n", "").unwrap_err();
    let (file, _, issue) = parse_issue(err);
    assert_eq!(file, "relations.tsv");
    assert_eq!(issue, ParseIssue::DuplicateId(0));
}

#[test]
fn gaps_in_ids_are_rejected() {
    let err = load("0\tA\t\t\n2\tB\t\t\n", "0\tr\n", "").unwrap_err();
    assert!(matches!(parse_issue(err).2, ParseIssue::NonContiguousId { .. }));
}

#[test]
fn empty_names_and_bad_scores_are_rejected() {
    let err = load("0\t  \t\t\n", "0\tr\n", "").unwrap_err();
    assert_eq!(parse_issue(err).2, ParseIssue::EmptyName);
    let err = load("0\tA\t\tlots\n", "0\tr\n", "").unwrap_err();
    assert!(matches!(parse_issue(err).2, ParseIssue::BadNumber(_)));
}

#[test]
fn rows_may_arrive_out_of_order() {
    let kg = load("1\tB\t\t\n0\tA\t\t\n", "0\tr\n", "0\t0\t1\n").unwrap();
    assert_eq!(kg.entity(0).unwrap().name, "A");
    assert_eq!(kg.entity(1).unwrap().name, "B");
}

#[test]
fn description_and_score_columns_may_be_empty() {
    let kg = load(THREE, "0\tr\n", "").unwrap();
    let a = kg.entity(0).unwrap();
    assert_eq!(a.description, None);
    assert_eq!(a.raw_score, None);
    let b = kg.entity(1).unwrap();
    assert_eq!(b.description.as_deref(), Some("about B"));
    assert_eq!(b.raw_score, Some(3.0));
    let labels = kg.labels().unwrap();
    assert_eq!(labels.len(), 2);
    assert_eq!(labels[0].node, 1);
    assert!((labels[0].value - 4f64.ln()).abs() < 1e-15);
    assert_eq!(labels[1].value, 0.0);
}

#[test]
fn incidence_follows_triplet_index_order() {
    let ents: String = (0..6).map(|i| format!("{i}\tE{i}\t\t\n")).collect();
    let mut trips = String::new();
    for i in 0..18 {
        let (h, t) = match i {
            4 | 9 => (2, 5),
            17 => (3, 2),
            _ => (0, 1),
        };
        trips.push_str(&format!("{h}\t0\t{t}\n"));
    }
    let kg = load(&ents, "0\tr\n", &trips).unwrap();
    assert_eq!(kg.incidence(2).unwrap(), &[4, 9, 17]);
    let ts = kg.node_triplets(2).unwrap();
    assert_eq!(ts.len(), 3);
    assert_eq!(ts[2], Triplet { head: 3, relation: 0, tail: 2 });
    assert!(kg.node_triplets(4).unwrap().is_empty());
    assert!(matches!(kg.node_triplets(6), Err(Error::Lookup { .. })));
}

fn graph(names: &[&str], rel: &str) -> KnowledgeGraph {
    let entities = names
        .iter()
        .enumerate()
        .map(|(id, n)| Entity {
            id,
            name: n.to_string(),
            description: None,
            raw_score: None,
        })
        .collect();
    let relations = vec![Relation { id: 0, name: rel.into() }];
    KnowledgeGraph::new(entities, relations, vec![]).unwrap()
}

#[test]
fn sentences_follow_the_template() {
    let kg = graph(&["Dinosaur", "Animation"], "genre");
    let t = Triplet { head: 0, relation: 0, tail: 1 };
    assert_eq!(kg.sentence(&t).unwrap(), "Dinosaur's genre is Animation.");

    let kg = graph(&["Gob", "punk"], "has_term");
    assert_eq!(kg.sentence(&t).unwrap(), "Gob's has term is punk.");

    let kg = graph(&["A", "B"], "/film/film/");
    assert!(matches!(kg.sentence(&t), Err(Error::Template { .. })));
}

#[test]
fn relation_names_are_flattened() {
    assert_eq!(normalize_relation_name("/film/film/genre"), "genre");
    assert_eq!(normalize_relation_name("has_term"), "has term");
    assert_eq!(normalize_relation_name("genre"), "genre");
    assert_eq!(
        normalize_relation_name("/people/person/place_of_birth"),
        "place of birth"
    );
    assert_eq!(normalize_relation_name("a.b__c"), "a b c");
    assert_eq!(normalize_relation_name("___"), "");
}

#[test]
fn log_transform_examples() {
    assert_eq!(log_transform(0.0).unwrap(), 0.0);
    assert!((log_transform(std::f64::consts::E - 1.0).unwrap() - 1.0).abs() < 1e-15);
    assert!((log_transform(99.0).unwrap() - 100f64.ln()).abs() < 1e-14);
    assert!(matches!(log_transform(-1.0), Err(Error::Domain(_))));
    assert!(matches!(log_transform(f64::NAN), Err(Error::Domain(_))));
    assert!(matches!(log_transform(f64::INFINITY), Err(Error::Domain(_))));
}

fn arb_graph(max_nodes: usize) -> impl Strategy<Value = (usize, usize, Vec<(usize, usize, usize)>)> {
    (1..=max_nodes, 1..4usize).prop_flat_map(|(n, r)| {
        let edges = prop::collection::vec((0..n, 0..r, 0..n), 0..(3 * n));
        (Just(n), Just(r), edges)
    })
}

fn build(n: usize, r: usize, edges: &[(usize, usize, usize)]) -> KnowledgeGraph {
    let entities = (0..n)
        .map(|id| Entity {
            id,
            name: format!("e{id}"),
            description: None,
            raw_score: Some(id as f64),
        })
        .collect();
    let relations = (0..r).map(|id| Relation { id, name: format!("r{id}") }).collect();
    let triplets = edges
        .iter()
        .map(|&(head, relation, tail)| Triplet { head, relation, tail })
        .collect();
    KnowledgeGraph::new(entities, relations, triplets).unwrap()
}

proptest! {
    #[test]
    fn extraction_matches_brute_force_scan((n, r, edges) in arb_graph(200)) {
        let kg = build(n, r, &edges);
        let mut total = 0;
        for v in 0..n {
            let expected: Vec<Triplet> = kg
                .triplets()
                .iter()
                .filter(|t| t.head == v || t.tail == v)
                .copied()
                .collect();
            let got = kg.node_triplets(v).unwrap();
            prop_assert_eq!(&got, &expected);
            for t in &got {
                let other = if t.head == v { t.tail } else { t.head };
                prop_assert!(other < n);
            }
            total += got.len();
        }
        let loops = edges.iter().filter(|(h, _, t)| h == t).count();
        prop_assert_eq!(total, 2 * edges.len() - loops);
    }

    #[test]
    fn reloading_written_files_reproduces_the_graph((n, r, edges) in arb_graph(40)) {
        let kg = build(n, r, &edges);
        let dir = TempDir::new().unwrap();
        let p = |f: &str| dir.path().join(f);
        write_kg(&kg, p("e.tsv"), p("r.tsv"), p("t.tsv")).unwrap();
        let back = load_kg(p("e.tsv"), p("r.tsv"), p("t.tsv")).unwrap();
        prop_assert_eq!(back.summary(), kg.summary());
        for v in 0..n {
            prop_assert_eq!(back.incidence(v).unwrap(), kg.incidence(v).unwrap());
        }
        prop_assert_eq!(back, kg);
    }

    #[test]
    fn sentences_are_deterministic((n, r, edges) in arb_graph(20)) {
        let kg = build(n, r, &edges);
        for t in kg.triplets() {
            prop_assert_eq!(kg.sentence(t).unwrap(), kg.sentence(t).unwrap());
        }
    }

    #[test]
    fn log_transform_is_strictly_monotone(a in 0.0..1e12f64, b in 0.0..1e12f64) {
        prop_assume!(a != b);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(log_transform(lo).unwrap() < log_transform(hi).unwrap());
    }
}

/// Published-dataset sanity check; runs only when `LENIE_DATA_DIR` holds
/// `FB15K/`, `TMDB5K/` or `MUSIC10K/` folders in the TSV layout.
#[test]
fn published_dataset_counts() {
    let Some(root) = std::env::var_os("LENIE_DATA_DIR").map(PathBuf::from) else {
        eprintln!("LENIE_DATA_DIR not set; skipping published-dataset counts");
        return;
    };
    let expected = [
        ("FB15K", (14951, 592213, 1345, 14105)),
        ("TMDB5K", (114805, 761648, 34, 4803)),
        ("MUSIC10K", (22985, 65290, 8, 4412)),
    ];
    for (name, counts) in expected {
        let dir = root.join(name);
        if !dir.is_dir() {
            continue;
        }
        let kg = load_kg(
            dir.join("entities.tsv"),
            dir.join("relations.tsv"),
            dir.join("triplets.tsv"),
        )
        .unwrap();
        let s = kg.summary();
        assert_eq!((s.entities, s.edges, s.relations, s.labeled), counts, "{name}");
    }
}
