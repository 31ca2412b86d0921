#![no_main]

use kato_cli::report::{parse_report, to_json};
use libfuzzer_sys::fuzz_target;
use serde_json::Value;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(report) = parse_report::<Value>(text) {
        let compact = to_json(&report, 0);
        let again = parse_report::<Value>(&compact).expect("re-parse of a rendered report");
        assert_eq!(to_json(&again, 0), compact);
    }
});
