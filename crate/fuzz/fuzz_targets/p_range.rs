#![no_main]

use libfuzzer_sys::fuzz_target;
use symbill::config::parse_p_range;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((a, b)) = parse_p_range(text) {
        assert!(-1.0 < a && a <= b && b < 1.0);
    }
});
