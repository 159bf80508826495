#![no_main]

use libfuzzer_sys::fuzz_target;
use symbill::config::parse_curve_config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = parse_curve_config(text) {
        // building the curve runs the validity checks on whatever parsed
        let _ = cfg.curve();
    }
});
