use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use igam::constraints::parse_constraints;
use igam::dataset::{load_csv_with, parse_feature_table, write_csv, CsvOptions, Dataset, FoldPlan};
use igam::eval::{cross_validate_with, gen_synthetic_load, EvalReport};
use igam::gam::{self, load_model, save_model, GamModel};
use igam_service::ServiceConfig;

use crate::args::{DataArgs, EvalArgs, ExportArgs, PredictArgs, ServeArgs, SynthArgs, TrainArgs};
use crate::error::CliError;
use crate::svg;

fn load_dataset(a: &DataArgs) -> Result<Dataset, CliError> {
    if !a.data.is_file() {
        return Err(CliError::DatasetNotFound(a.data.clone()));
    }
    let opts = CsvOptions {
        target_column: a.target.clone(),
        weight_column: a.weight.clone(),
        id_column: a.id_column.clone(),
    };
    Ok(load_csv_with(&a.data, &opts)?)
}

fn read_file(p: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(p).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::FileNotFound(p.to_path_buf()),
        _ => e.into(),
    })
}

fn read_model(p: &Path) -> Result<GamModel, CliError> {
    Ok(load_model(&read_file(p)?)?)
}

fn create_parent(p: &Path) -> Result<(), CliError> {
    if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(())
}

fn load_constraints(p: Option<&PathBuf>, names: &[String]) -> Result<Vec<igam::ConstraintSpec>, CliError> {
    match p {
        Some(p) => Ok(parse_constraints(&read_file(p)?, names)?),
        None => Ok(Vec::new()),
    }
}

pub fn train(a: TrainArgs) -> Result<(), CliError> {
    let cfg = a.config.resolve()?;
    let d = load_dataset(&a.data)?;
    let constraints = load_constraints(a.constraints.as_ref(), d.feature_names())?;
    let model = gam::train(&d, &cfg, &constraints)?;
    let out = std::io::stdout();
    let mut out = out.lock();
    if !a.quiet {
        for (i, l) in model.loss_trace().iter().enumerate() {
            writeln!(out, "round {:>5}  loss {l:.10e}", i + 1)?;
        }
    }
    for v in model.constraint_violations() {
        eprintln!("warning: {v}");
    }
    create_parent(&a.out)?;
    fs::write(&a.out, save_model(&model)?)?;
    writeln!(out, "model written to {}", a.out.display())?;
    Ok(())
}

pub fn predict(a: PredictArgs) -> Result<(), CliError> {
    let model = read_model(&a.model)?;
    if !a.data.is_file() {
        return Err(CliError::DatasetNotFound(a.data.clone()));
    }
    let table = parse_feature_table(fs::File::open(&a.data)?, &model.feature_names)?;
    if !table.unused_columns.is_empty() {
        eprintln!("warning: ignoring unused column(s): {}", table.unused_columns.join(", "));
    }
    let preds = model.predict(&table.columns)?;
    let sink: Box<dyn Write> = match &a.out {
        Some(p) => {
            create_parent(p)?;
            Box::new(fs::File::create(p)?)
        }
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = BufWriter::new(sink);
    writeln!(w, "row_id,prediction")?;
    for (i, p) in preds.iter().enumerate() {
        match &table.row_ids {
            Some(ids) => writeln!(w, "{},{p}", csv_field(&ids[i]))?,
            None => writeln!(w, "{i},{p}")?,
        }
    }
    w.flush()?;
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn eval(a: EvalArgs) -> Result<(), CliError> {
    let cfg = a.config.resolve()?;
    let d = load_dataset(&a.data)?;
    let constraints = load_constraints(a.constraints.as_ref(), d.feature_names())?;
    let plan = FoldPlan::new(d.n_rows(), a.folds, cfg.seed)?;
    let cv = cross_validate_with(&d, &cfg, &constraints, &plan)?;
    let name = a
        .data
        .data
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("dataset")
        .to_string();
    let report = EvalReport::new(&name, &cfg, d.n_rows(), &cv);
    let path = a
        .report
        .unwrap_or_else(|| PathBuf::from("reports").join(format!("{}.json", report.key())));
    create_parent(&path)?;
    fs::write(&path, report.to_json())?;
    print!("{}", report.to_text());
    println!("report written to {}", path.display());
    Ok(())
}

fn file_stem_for(feature: &str) -> String {
    feature
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

pub fn export_shapes(a: ExportArgs) -> Result<(), CliError> {
    let model = read_model(&a.model)?;
    let features: Vec<usize> = match &a.feature {
        Some(name) => vec![model
            .feature_index(name)
            .ok_or_else(|| igam::Error::Config(format!("unknown feature '{name}'")))?],
        None => (0..model.n_features()).collect(),
    };
    fs::create_dir_all(&a.out_dir)?;
    for d in features {
        let view = model.shape_values(d, true, a.centered)?;
        let stem = file_stem_for(&view.feature);
        let mut w = BufWriter::new(fs::File::create(a.out_dir.join(format!("{stem}.csv")))?);
        writeln!(w, "anchor,value")?;
        for (x, v) in view.anchors.iter().zip(&view.values) {
            writeln!(w, "{x},{v}")?;
        }
        w.flush()?;

        let counts = model.training.bin_counts.get(d).cloned().unwrap_or_default();
        let total: u64 = counts.iter().sum();
        let mut w = BufWriter::new(fs::File::create(a.out_dir.join(format!("{stem}_density.csv")))?);
        writeln!(w, "bin_lo,bin_hi,count,mass")?;
        for (j, c) in counts.iter().enumerate() {
            let lo = view.anchors[j];
            let hi = view.anchors.get(j + 1).copied().unwrap_or(lo);
            let mass = if total == 0 { 0.0 } else { *c as f64 / total as f64 };
            writeln!(w, "{lo},{hi},{c},{mass}")?;
        }
        w.flush()?;

        if a.svg {
            fs::write(a.out_dir.join(format!("{stem}.svg")), svg::shape_plot(&view, &counts))?;
        }
        println!("{}: {} anchors", view.feature, view.anchors.len());
    }
    Ok(())
}

pub fn gen_synthetic(a: SynthArgs) -> Result<(), CliError> {
    let d = gen_synthetic_load(a.days, a.seed)?;
    create_parent(&a.out)?;
    let f = BufWriter::new(fs::File::create(&a.out)?);
    write_csv(&d, &a.target, f)?;
    println!("{} rows written to {}", d.n_rows(), a.out.display());
    Ok(())
}

pub fn serve(a: ServeArgs) -> Result<(), CliError> {
    let mut cfg = ServiceConfig::from_env().map_err(CliError::Usage)?;
    if let Some(b) = a.bind {
        cfg.bind = b;
    }
    if let Some(d) = a.data_dir {
        cfg.data_dir = d;
    }
    if let Some(s) = a.seed {
        cfg.default_seed = s;
    }
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(igam_service::serve(cfg))?;
    Ok(())
}
