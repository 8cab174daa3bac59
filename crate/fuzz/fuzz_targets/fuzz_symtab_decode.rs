#![no_main]

use libfuzzer_sys::fuzz_target;

// Binary symbol-table decoding must never panic or over-allocate on
// arbitrary bytes; truncation and corruption come back as errors.
fuzz_target!(|data: &[u8]| {
    let _ = mzlab::symtab::decode(data);
});
