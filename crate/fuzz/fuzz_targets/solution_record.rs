#![no_main]

use libfuzzer_sys::fuzz_target;

use hextile::synth::SolutionRecord;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(record) = SolutionRecord::from_json(text) {
            let again = SolutionRecord::from_json(&record.to_json());
            assert!(again.is_ok());
        }
    }
});
