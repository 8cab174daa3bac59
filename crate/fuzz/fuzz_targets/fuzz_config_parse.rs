#![no_main]

use libfuzzer_sys::fuzz_target;

// Config parsing and validation must never panic on arbitrary input.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = mzlab::config::ExperimentConfig::from_json(text) {
            let _ = cfg.validate();
        }
    }
});
