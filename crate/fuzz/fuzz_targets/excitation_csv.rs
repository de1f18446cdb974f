#![no_main]

use std::sync::OnceLock;

use libfuzzer_sys::fuzz_target;

use hextile::HexAperture;

static APERTURE: OnceLock<HexAperture> = OnceLock::new();

fuzz_target!(|data: &[u8]| {
    // The parser must reject any malformed input without panicking.
    if let Ok(text) = std::str::from_utf8(data) {
        let ap = APERTURE.get_or_init(|| HexAperture::new(2, 0.5).unwrap());
        let _ = hextile::formats::read_excitations(text, ap);
    }
});
