#![no_main]

use libfuzzer_sys::fuzz_target;
use xylab_cli::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = ExperimentConfig::from_json(text) else {
        return;
    };
    let _ = cfg.validate();
    assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
});
