#![no_main]

use igam::gam::TrainConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(c) = TrainConfig::from_kv(text) {
        let back = TrainConfig::from_kv(&c.to_kv()).expect("rendered config parses");
        assert_eq!(back.to_kv(), c.to_kv());
    }
    let _ = serde_json::from_str::<TrainConfig>(text);
});
