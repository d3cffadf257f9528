//! The checked-in fuzz seeds must stay valid inputs.

use std::path::PathBuf;

use xylab::cycles::PartitionDump;
use xylab::estimators::SeriesEstimate;
use xylab::graphs::{GraphDump, LatticeBox};
use xylab::heights::HeightField;
use xylab::sampler::{Checkpoint, LocalTimeField};

fn seeds(target: &str) -> Vec<Vec<u8>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| std::fs::read(e.unwrap().path()).unwrap())
        .collect();
    assert!(!out.is_empty(), "no seeds for {target}");
    out.sort();
    out
}

#[test]
fn graph_dumps_parse() {
    for s in seeds("graph_dump") {
        GraphDump::from_json(&s).unwrap().to_graph().unwrap();
    }
}

#[test]
fn checkpoints_parse() {
    for s in seeds("checkpoint") {
        let cp = Checkpoint::from_json(&s).unwrap();
        let l = LatticeBox::from_dump(&cp.graph).unwrap();
        assert!(cp.current(l.graph()).unwrap().is_sourceless(l.graph()));
    }
}

#[test]
fn partitions_resolve() {
    let l = LatticeBox::new(2);
    let t = LocalTimeField::constant(l.graph().vertex_count(), 0.8).unwrap();
    for s in seeds("partition_dump") {
        PartitionDump::from_json(&s)
            .unwrap()
            .resolve(l.graph(), &t)
            .unwrap();
    }
}

#[test]
fn height_and_series_csv_parse() {
    let l = LatticeBox::new(2);
    for s in seeds("height_csv") {
        HeightField::from_csv(&l, &s).unwrap();
    }
    for s in seeds("series_csv") {
        SeriesEstimate::from_csv("seed", &s).unwrap();
    }
}
