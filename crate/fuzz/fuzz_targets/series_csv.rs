#![no_main]

use libfuzzer_sys::fuzz_target;
use xylab::estimators::{fit_mass, FitWindow, SeriesEstimate};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = SeriesEstimate::from_csv("fuzz", data) else {
        return;
    };
    let again = SeriesEstimate::from_csv("fuzz", s.to_csv().unwrap().as_bytes()).unwrap();
    assert_eq!(again, s);
    if let Ok(f) = fit_mass(&s, FitWindow::usable(64)) {
        assert!(f.used.len() >= 3);
    }
});
