//! Runs the fuzz target bodies over the checked-in corpus, byte-level
//! mutations of it and random inputs.

use std::path::{Path, PathBuf};

use igam::constraints::parse_constraints;
use igam::dataset::{parse_csv, parse_feature_table, CsvOptions};
use igam::gam::{load_model, save_model, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn csv_ingest(data: &[u8]) {
    let mut opts = CsvOptions::new("y");
    opts.weight_column = Some("w".into());
    if let Ok(d) = parse_csv(data, &opts) {
        assert!(d.weights().iter().all(|w| *w > 0.0 && w.is_finite()));
        assert!(d.columns().iter().all(|c| c.len() == d.n_rows()));
    }
    let _ = parse_csv(data, &CsvOptions::new("y"));
    let _ = parse_feature_table(data, &["x".to_string(), "z".to_string()]);
}

fn model_decode(data: &[u8]) {
    if let Ok(m) = load_model(data) {
        let bytes = save_model(&m).expect("decoded model re-encodes");
        assert_eq!(load_model(&bytes).expect("re-encoded model decodes"), m);
        let _ = m.predict_row(&vec![0.5; m.n_features()]);
    }
}

fn config_parse(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(c) = TrainConfig::from_kv(text) {
        let back = TrainConfig::from_kv(&c.to_kv()).expect("rendered config parses");
        assert_eq!(back.to_kv(), c.to_kv());
    }
    let _ = serde_json::from_str::<TrainConfig>(text);
}

fn constraints_parse(data: &[u8]) {
    let names = ["temperature".to_string(), "hour".to_string(), "x".to_string()];
    if let Ok(specs) = parse_constraints(data, &names) {
        for s in specs {
            assert!(s.feature < names.len());
            assert!(s.lo() < s.hi());
        }
    }
}

fn corpus(target: &str) -> Vec<Vec<u8>> {
    let dir: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    assert!(!files.is_empty(), "empty corpus for {target}");
    files.iter().map(|p| std::fs::read(p).unwrap()).collect()
}

fn mutate(rng: &mut ChaCha8Rng, seed: &[u8]) -> Vec<u8> {
    let mut v = seed.to_vec();
    for _ in 0..rng.random_range(1..6) {
        match rng.random_range(0..4) {
            0 if !v.is_empty() => {
                let i = rng.random_range(0..v.len());
                v[i] ^= 1 << rng.random_range(0..8);
            }
            1 if !v.is_empty() => {
                let i = rng.random_range(0..v.len());
                v.truncate(i);
            }
            2 => {
                let i = rng.random_range(0..=v.len());
                const ALPHABET: &[u8] = b",\"\n0-.e9[]{}:";
                v.insert(i, ALPHABET[rng.random_range(0..ALPHABET.len())]);
            }
            _ if !v.is_empty() => {
                let i = rng.random_range(0..v.len());
                v.remove(i);
            }
            _ => {}
        }
    }
    v
}

fn exercise(target: &str, f: fn(&[u8])) {
    let seeds = corpus(target);
    let mut rng = ChaCha8Rng::seed_from_u64(0xF022);
    for s in &seeds {
        f(s);
        for _ in 0..200 {
            f(&mutate(&mut rng, s));
        }
    }
    for _ in 0..500 {
        let n = rng.random_range(0..256);
        let bytes: Vec<u8> = (0..n).map(|_| rng.random()).collect();
        f(&bytes);
    }
}

#[test]
fn csv_ingest_corpus() {
    exercise("csv_ingest", csv_ingest);
}

#[test]
fn model_decode_corpus() {
    exercise("model_decode", model_decode);
}

#[test]
fn config_parse_corpus() {
    exercise("config_parse", config_parse);
}

#[test]
fn constraints_parse_corpus() {
    exercise("constraints_parse", constraints_parse);
}

#[test]
fn corpus_seeds_classify_as_expected() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus");
    let read = |p: &str| std::fs::read(dir.join(p)).unwrap();
    assert!(load_model(&read("model_decode/small.json")).is_ok());
    assert!(matches!(load_model(&read("model_decode/future_version.json")), Err(igam::Error::Version { found: 7, .. })));
    assert!(matches!(load_model(&read("model_decode/truncated.json")), Err(igam::Error::Decode(_))));
    let opts = CsvOptions::new("y").weight("w");
    assert!(parse_csv(&read("csv_ingest/valid.csv")[..], &opts).is_ok());
    assert!(matches!(
        parse_csv(&read("csv_ingest/bad_cell.csv")[..], &opts),
        Err(igam::Error::Ingestion { row: 2, .. })
    ));
}
