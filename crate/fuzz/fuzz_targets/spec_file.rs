#![no_main]

use kato_cli::spec::{parse_spec, spec_to_value};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = parse_spec(text) {
        // Accepted specs survive a serialize/parse cycle unchanged.
        let again = parse_spec(&spec_to_value(&spec).to_string()).expect("re-parse of a valid spec");
        assert_eq!(spec, again);
    }
});
