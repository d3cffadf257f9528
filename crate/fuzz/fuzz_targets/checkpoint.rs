#![no_main]

use libfuzzer_sys::fuzz_target;
use xylab::sampler::Checkpoint;

fuzz_target!(|data: &[u8]| {
    let Ok(cp) = Checkpoint::from_json(data) else {
        return;
    };
    let g = cp.graph.to_graph().expect("checked by from_json");
    let current = cp.current(&g).expect("checked by from_json");
    let again = Checkpoint::from_json(cp.to_json().unwrap().as_bytes()).unwrap();
    assert_eq!(again.current(&g).unwrap(), current);
});
