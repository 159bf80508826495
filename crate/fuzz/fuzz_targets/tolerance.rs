#![no_main]

use libfuzzer_sys::fuzz_target;
use symbill::config::parse_tolerance;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((_, v)) = parse_tolerance(text) {
        assert!(v.is_finite() && v > 0.0);
    }
});
