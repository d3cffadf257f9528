#![no_main]

use libfuzzer_sys::fuzz_target;
use xylab::graphs::{GraphDump, LatticeBox};

fuzz_target!(|data: &[u8]| {
    let Ok(dump) = GraphDump::from_json(data) else {
        return;
    };
    if let Ok(g) = dump.to_graph() {
        assert_eq!(g.vertex_count(), dump.vertices.len());
        assert_eq!(g.edge_count(), dump.edges.len());
    }
    if dump.n > 16 {
        return;
    }
    if let Ok(l) = LatticeBox::from_dump(&dump) {
        assert_eq!(l.dump(), dump);
    }
});
