#![no_main]

use igam::gam::{load_model, save_model};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = load_model(data) {
        let bytes = save_model(&m).expect("decoded model re-encodes");
        assert_eq!(load_model(&bytes).expect("re-encoded model decodes"), m);
        let row = vec![0.5; m.n_features()];
        let _ = m.predict_row(&row);
    }
});
