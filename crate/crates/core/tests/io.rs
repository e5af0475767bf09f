use hclab::graph::{tight_dissimilarity_instance, WeightedGraph};
use hclab::{Dendrogram, Error};

#[test]
fn graph_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    let g = tight_dissimilarity_instance(3).unwrap();
    g.write(&path).unwrap();
    assert_eq!(WeightedGraph::read(&path).unwrap(), g);
}

#[test]
fn graph_file_accepts_either_orientation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    std::fs::write(&path, r#"{"n": 3, "edges": [[2, 0, 1.5], [0, 1, 2.0]]}"#).unwrap();
    let g = WeightedGraph::read(&path).unwrap();
    assert_eq!(g.weight(0, 2), 1.5);
    assert_eq!(g.total_weight(), 3.5);
}

#[test]
fn malformed_graph_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    for bad in [
        r#"{"n": 2, "edges": [[0, 0, 1.0]]}"#,
        r#"{"n": 2, "edges": [[0, 1, -1.0]]}"#,
        r#"{"n": 2, "edges": [[0, 5, 1.0]]}"#,
        r#"{"n": 2, "edges": [[0, 1, 1.0], [1, 0, 2.0]]}"#,
        r#"{"n": 2, "edges": "#,
    ] {
        std::fs::write(&path, bad).unwrap();
        assert!(WeightedGraph::read(&path).is_err(), "{bad}");
    }
}

#[test]
fn tree_file_round_trip_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    let t = Dendrogram::caterpillar(5).unwrap();
    t.write(&path).unwrap();
    assert_eq!(Dendrogram::read(&path).unwrap(), t);
    std::fs::write(&path, r#"{"children": [{"leaf": 0}, {"leaf": 0}]}"#).unwrap();
    assert!(matches!(Dendrogram::read(&path), Err(Error::Malformed { .. })));
    std::fs::write(&path, r#"{"children": [{"leaf": 0}]}"#).unwrap();
    assert!(Dendrogram::read(&path).is_err());
}
