#![no_main]

use libfuzzer_sys::fuzz_target;
use xylab::graphs::LatticeBox;
use xylab::heights::HeightField;

fuzz_target!(|data: &[u8]| {
    let l = LatticeBox::new(2);
    let Ok(h) = HeightField::from_csv(&l, data) else {
        return;
    };
    let text = h.to_csv(&l).unwrap();
    assert_eq!(HeightField::from_csv(&l, text.as_bytes()).unwrap(), h);
});
