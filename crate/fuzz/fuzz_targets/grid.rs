#![no_main]

use libfuzzer_sys::fuzz_target;
use symbill::config::parse_grid;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((a, b)) = parse_grid(text) {
        assert!(a >= 1 && b >= 1);
    }
});
