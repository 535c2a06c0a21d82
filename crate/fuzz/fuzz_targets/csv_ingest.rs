#![no_main]

use igam::dataset::{parse_csv, parse_feature_table, CsvOptions};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let mut opts = CsvOptions::new("y");
    opts.weight_column = Some("w".into());
    if let Ok(d) = parse_csv(data, &opts) {
        assert!(d.weights().iter().all(|w| *w > 0.0 && w.is_finite()));
        assert!(d.columns().iter().all(|c| c.len() == d.n_rows()));
    }
    let _ = parse_csv(data, &CsvOptions::new("y"));
    let _ = parse_feature_table(data, &["x".to_string(), "z".to_string()]);
});
