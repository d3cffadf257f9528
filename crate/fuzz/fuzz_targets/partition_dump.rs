#![no_main]

use libfuzzer_sys::fuzz_target;
use xylab::cycles::PartitionDump;
use xylab::graphs::LatticeBox;
use xylab::sampler::LocalTimeField;

fuzz_target!(|data: &[u8]| {
    let Ok(dump) = PartitionDump::from_json(data) else {
        return;
    };
    let l = LatticeBox::new(2);
    let g = l.graph();
    let t = LocalTimeField::constant(g.vertex_count(), 0.8).unwrap();
    if let Ok((pi, p)) = dump.resolve(g, &t) {
        assert_eq!(p.cycles().iter().map(|c| c.len()).sum::<usize>(), pi.len());
        let again = PartitionDump::new(&pi, &p);
        let (pi2, p2) = again.resolve(g, &t).unwrap();
        assert_eq!(pi2.points(), pi.points());
        assert_eq!(p2.point_sets(), p.point_sets());
    }
});
