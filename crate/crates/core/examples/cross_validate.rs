//! Five-fold cross-validation of the default configuration on a CSV file.
//!
//! `cargo run --release -p igam --example cross_validate -- data/abalone.csv rings [key=value ...]`

use std::time::Instant;

use igam::eval::{cross_validate, EvalReport};
use igam::{load_csv, FoldPlan, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args.next().ok_or("usage: cross_validate <csv> <target>")?;
    let target = args.next().ok_or("usage: cross_validate <csv> <target>")?;
    let d = load_csv(&path, &target, None)?;
    let mut cfg = TrainConfig::default();
    for kv in args {
        cfg.apply_kv(&kv)?;
    }
    let plan = FoldPlan::new(d.n_rows(), 5, cfg.seed)?;
    let t = Instant::now();
    let cv = cross_validate(&d, &cfg, &plan)?;
    print!("{}", EvalReport::new(&path, &cfg, d.n_rows(), &cv).to_text());
    println!("elapsed {:.2?}", t.elapsed());
    Ok(())
}
