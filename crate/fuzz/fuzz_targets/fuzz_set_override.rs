#![no_main]

use libfuzzer_sys::fuzz_target;

// The --set key=value grammar and dotted-path application must never
// panic, whatever the path or value.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok((path, value)) = mzlab::config::parse_set_argument(text) {
            let mut root = serde_json::json!({});
            let _ = mzlab::config::apply_override(&mut root, &path, &value);
        }
    }
});
