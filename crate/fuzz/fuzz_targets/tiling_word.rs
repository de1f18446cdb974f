#![no_main]

use std::sync::OnceLock;

use libfuzzer_sys::fuzz_target;

use hextile::tiling::{decode, encode, is_valid_word, TilingWord};
use hextile::HexAperture;

static APERTURE: OnceLock<HexAperture> = OnceLock::new();

fuzz_target!(|data: &[u8]| {
    // Raw bytes as word letters: the validity predicate is total, and any
    // word it accepts must decode and round-trip through encode.
    let ap = APERTURE.get_or_init(|| HexAperture::new(2, 0.5).unwrap());
    let letters: Vec<u32> = data.iter().map(|&b| b as u32).collect();
    let word = TilingWord::new(letters);
    if is_valid_word(ap, &word) {
        let tiling = decode(ap, &word).unwrap();
        assert_eq!(encode(ap, &tiling).unwrap(), word);
    } else {
        assert!(decode(ap, &word).is_err());
    }
});
