#![no_main]

use std::sync::OnceLock;

use libfuzzer_sys::fuzz_target;

use hextile::HexAperture;

static APERTURE: OnceLock<HexAperture> = OnceLock::new();

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let ap = APERTURE.get_or_init(|| HexAperture::new(2, 0.5).unwrap());
        if let Ok((tiling, word)) = hextile::formats::read_tiling(text, ap) {
            // Anything accepted must be a complete tiling that re-encodes to
            // the same word and survives a write/read round trip.
            assert_eq!(hextile::tiling::encode(ap, &tiling).unwrap(), word);
            let rewritten = hextile::formats::write_tiling(ap, &tiling);
            let (again, _) = hextile::formats::read_tiling(&rewritten, ap).unwrap();
            assert_eq!(again, tiling);
        }
    }
});
