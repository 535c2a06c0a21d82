#![no_main]

use igam::constraints::parse_constraints;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let names = ["temperature".to_string(), "hour".to_string(), "x".to_string()];
    if let Ok(specs) = parse_constraints(data, &names) {
        for s in specs {
            assert!(s.feature < names.len());
            assert!(s.lo() < s.hi());
        }
    }
});
