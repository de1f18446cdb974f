#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok((word, t)) = hextile::formats::read_checkpoint(text) {
            let rewritten = hextile::formats::write_checkpoint(&word, t);
            let (again, t2) = hextile::formats::read_checkpoint(&rewritten).unwrap();
            assert_eq!(again, word);
            assert_eq!(t2, t);
        }
    }
});
