#![no_main]

use libfuzzer_sys::fuzz_target;

use hextile::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(config) = RunConfig::from_toml_str(text) {
            // Accepted configs are serializable and hash deterministically.
            let hash = config.hash();
            assert_eq!(hash, config.hash());
            let _ = config.to_toml_string();
        }
    }
});
