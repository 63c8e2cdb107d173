use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rklt::approximations::{catalog_rows, derive_catalog, CatalogId, IntegerTransform};
use rklt::codec::synthetic::mixed_corpus;
use rklt::codec::{
    compress_image_with, rate_quality_sweep, BlockTransform, CompressOptions, GrayImage, MssimParams, MssimWindow,
    TwoDimensionalForm,
};
use rklt::coding_metrics::{evaluate_named, reference_pairs, SynthesisBasis, CSV_HEADER};
use rklt::fast_algorithms::{factorization, REFERENCE_ADDITIONS};
use rklt::transform::TransformName;
use rklt::RkltError;
use serde_json::{json, Value};

use crate::parse::{decimals_for, retained_counts};
use crate::{CodecArgs, CompressArgs, DeriveArgs, FastcheckArgs, Form, Format, MetricsArgs, SweepArgs, Synthesis, Window};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Domain(#[from] RkltError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Internal(String),
    #[error("writing output: {0}")]
    Output(#[from] io::Error),
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Domain(_) | CliError::Usage(_) => 2,
            CliError::Internal(_) | CliError::Output(_) | CliError::Csv(_) => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Sizes the global thread pool from `RKLT_THREADS` when set.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("RKLT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("RKLT_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Internal(e.to_string()))
}

fn catalog_id_of(core: &IntegerTransform) -> Option<CatalogId> {
    CatalogId::ALL.into_iter().find(|&id| core.n() == 8 && IntegerTransform::from_rows(catalog_rows(id)).ok().as_ref() == Some(core))
}

pub fn derive(a: &DeriveArgs) -> Result<()> {
    let found = derive_catalog(a.n, a.alpha, a.rho_step)?;
    let prec = decimals_for(a.rho_step);
    let fmt_rho = |r: f64| format!("{r:.prec$}");
    let stdout = io::stdout();
    match a.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(stdout.lock());
            let mut header = vec!["index".to_string(), "id".into(), "first_rho".into(), "next_rho".into(), "row".into()];
            header.extend((0..a.n).map(|j| format!("c{j}")));
            w.write_record(&header)?;
            for (k, d) in found.iter().enumerate() {
                let id = catalog_id_of(&d.core).map(|id| id.to_string()).unwrap_or_default();
                for i in 0..a.n {
                    let mut rec = vec![k.to_string(), id.clone(), fmt_rho(d.first_rho), d.next_rho.map(fmt_rho).unwrap_or_default(), i.to_string()];
                    rec.extend(d.core.row(i).iter().map(|v| v.to_string()));
                    w.write_record(&rec)?;
                }
            }
            w.flush()?;
        }
        Format::Jsonl => {
            let mut out = stdout.lock();
            for (k, d) in found.iter().enumerate() {
                let rows: Vec<Vec<i8>> = (0..a.n).map(|i| d.core.row(i).to_vec()).collect();
                let as_num = |r: f64| fmt_rho(r).parse::<f64>().unwrap_or(r);
                let line = json!({
                    "index": k,
                    "id": catalog_id_of(&d.core).map(|id| id.to_string()),
                    "first_rho": as_num(d.first_rho),
                    "next_rho": d.next_rho.map(as_num),
                    "rows": rows,
                });
                writeln!(out, "{line}")?;
            }
        }
    }
    Ok(())
}

fn default_rho(name: &TransformName) -> Result<f64> {
    match name {
        TransformName::Klt(Some(rho)) => Ok(*rho),
        TransformName::Catalog(_) => Ok(reference_pairs().iter().find(|(n, _)| n == name).map(|(_, r)| *r).expect("every catalog id has a reference rho")),
        other => Err(CliError::Usage(format!("transform {other} needs --rho"))),
    }
}

pub fn metrics(a: &MetricsArgs) -> Result<()> {
    let basis = match a.synthesis {
        Synthesis::Inverse => SynthesisBasis::Inverse,
        Synthesis::Transpose => SynthesisBasis::Transpose,
    };
    let names: Vec<TransformName> = a.transform.iter().map(|s| TransformName::from_str(s)).collect::<rklt::Result<_>>()?;
    let pairs: Vec<(TransformName, f64)> = match (names.is_empty(), a.rho.is_empty()) {
        (true, true) => reference_pairs().to_vec(),
        (false, true) => names.iter().map(|n| default_rho(n).map(|r| (*n, r))).collect::<Result<_>>()?,
        (true, false) => {
            let mut all: Vec<TransformName> = CatalogId::ALL.iter().map(|&id| TransformName::Catalog(id)).collect();
            all.push(TransformName::Klt(None));
            a.rho.iter().flat_map(|&r| all.iter().map(move |n| (*n, r))).collect()
        }
        (false, false) => names.iter().flat_map(|n| a.rho.iter().map(move |&r| (*n, r))).collect(),
    };
    let records = pairs.iter().map(|(n, r)| evaluate_named(n, *r, basis)).collect::<rklt::Result<Vec<_>>>()?;
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    w.write_record(CSV_HEADER)?;
    for rec in &records {
        w.write_record(rec.csv_fields())?;
    }
    w.flush()?;
    Ok(())
}

fn read_catalog(path: &Path) -> Result<Vec<(Option<CatalogId>, IntegerTransform)>> {
    let file = File::open(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (line_no, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |what: &str| CliError::Usage(format!("{}:{}: {what}", path.display(), line_no + 1));
        let v: Value = serde_json::from_str(&line).map_err(|e| bad(&e.to_string()))?;
        let id = match v.get("id") {
            Some(Value::String(s)) => Some(CatalogId::from_str(s).map_err(|e| bad(&e.to_string()))?),
            _ => None,
        };
        let rows = v.get("rows").and_then(Value::as_array).ok_or_else(|| bad("missing 'rows' array"))?;
        let n = rows.len();
        let mut flat = Vec::with_capacity(n * n);
        for row in rows {
            let row = row.as_array().filter(|r| r.len() == n).ok_or_else(|| bad("rows must form a square matrix"))?;
            for x in row {
                flat.push(x.as_i64().ok_or_else(|| bad("entries must be integers"))?);
            }
        }
        out.push((id, IntegerTransform::new(n, flat)?));
    }
    Ok(out)
}

pub fn fastcheck(a: &FastcheckArgs) -> Result<()> {
    let matrices = match &a.catalog {
        Some(path) => read_catalog(path)?,
        None => CatalogId::ALL
            .iter()
            .map(|&id| (Some(id), IntegerTransform::from_rows(catalog_rows(id)).expect("catalog matrices are valid")))
            .collect(),
    };
    let mut out = io::stdout().lock();
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut ok = true;
    let mut worst = 0i64;
    for (k, (id, core)) in matrices.iter().enumerate() {
        let Some(id) = id else {
            writeln!(out, "#{k} SKIP (not a catalog matrix, no factorization)")?;
            continue;
        };
        let f = factorization(*id);
        let product_ok = f.reproduces(core);
        let expected_adds = REFERENCE_ADDITIONS[id.index()];
        let count_ok = f.addition_count() == expected_adds;
        let mut err = 0i64;
        if core.n() == 8 {
            for _ in 0..a.trials {
                let x: [i64; 8] = std::array::from_fn(|_| rng.random_range(-1000..=1000));
                let fast = f.apply_forward(&x)?;
                for (i, v) in fast.iter().enumerate() {
                    let dense: i64 = (0..8).map(|j| core.get(i, j) as i64 * x[j]).sum();
                    err = err.max((v - dense).abs());
                }
            }
        }
        worst = worst.max(err);
        if product_ok && count_ok && err == 0 {
            writeln!(out, "{id} OK ({} adds)", f.addition_count())?;
        } else {
            ok = false;
            let mut why = Vec::new();
            if !product_ok {
                why.push("factor product differs from matrix".to_string());
            }
            if !count_ok {
                why.push(format!("{} adds, expected {expected_adds}", f.addition_count()));
            }
            if err != 0 {
                why.push(format!("random cross-check error {err}"));
            }
            writeln!(out, "{id} MISMATCH ({})", why.join("; "))?;
        }
    }
    writeln!(out, "random cross-check: {} integer vectors per matrix, max abs error {worst}", a.trials)?;
    if a.dump_factors {
        let mut w = csv::Writer::from_writer(&mut out);
        let mut header = vec!["id".to_string(), "factor".into(), "kind".into(), "row".into()];
        header.extend((0..8).map(|j| format!("c{j}")));
        w.write_record(&header)?;
        for id in CatalogId::ALL {
            for (fi, factor) in factorization(id).factors().iter().enumerate() {
                for (i, row) in factor.entries().iter().enumerate() {
                    let mut rec = vec![id.to_string(), fi.to_string(), format!("{:?}", factor.kind()), i.to_string()];
                    rec.extend(row.iter().map(|v| v.to_string()));
                    w.write_record(&rec)?;
                }
            }
        }
        w.flush()?;
    }
    if ok {
        Ok(())
    } else {
        Err(CliError::Internal("fast algorithm check failed".into()))
    }
}

fn codec_setup(c: &CodecArgs) -> (CompressOptions, TwoDimensionalForm) {
    let window = match c.mssim_window {
        Window::Gaussian => MssimWindow::Gaussian11,
        Window::Uniform8 => MssimWindow::Uniform8,
    };
    let form = match c.form {
        Form::Separable => TwoDimensionalForm::Separable,
        Form::Similarity => TwoDimensionalForm::Similarity,
    };
    (CompressOptions { mssim: MssimParams { window, ..MssimParams::default() } }, form)
}

fn block_transform(name: &str, form: TwoDimensionalForm) -> Result<BlockTransform> {
    let parsed = TransformName::from_str(name)?;
    if parsed == TransformName::Klt(None) {
        return Err(CliError::Usage("transform 'K' needs a correlation coefficient here, e.g. K0.8".into()));
    }
    Ok(BlockTransform::from_name(&parsed, None)?.with_form(form))
}

fn fmt_db(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.4}")
    }
}

pub fn compress(a: &CompressArgs) -> Result<()> {
    let (opts, form) = codec_setup(&a.codec);
    let t = block_transform(&a.transform, form)?;
    let img = GrayImage::read(&a.input)?;
    let (rec, rep) = compress_image_with(&img, &t, a.r, &opts)?;
    if let Some(out) = &a.output {
        rec.write_pgm(out)?;
    }
    let header = ["image", "transform", "r", "mse", "psnr", "mssim", "rate_pct"];
    let row = [
        a.input.display().to_string(),
        rep.transform_id.clone(),
        rep.r.to_string(),
        format!("{:.4}", rep.mse),
        fmt_db(rep.psnr_db),
        format!("{:.4}", rep.mssim),
        format!("{:.4}", rep.compression_rate_pct),
    ];
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    w.write_record(header)?;
    w.write_record(&row)?;
    w.flush()?;
    if let Some(path) = &a.report {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(header)?;
        w.write_record(&row)?;
        w.flush()?;
    }
    Ok(())
}

fn read_corpus(dir: &Path) -> Result<Vec<GrayImage>> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|x| x.to_str())
                .is_some_and(|x| ["pgm", "pnm", "png"].contains(&x.to_ascii_lowercase().as_str()))
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Usage(format!("no .pgm/.png images in {}", dir.display())));
    }
    paths.iter().map(|p| GrayImage::read(p).map_err(CliError::from)).collect()
}

pub fn sweep(a: &SweepArgs) -> Result<()> {
    let (opts, form) = codec_setup(&a.codec);
    let transforms = a.transforms.iter().map(|s| block_transform(s, form)).collect::<Result<Vec<_>>>()?;
    let rs = retained_counts(&a.r)?;
    let corpus = match &a.corpus {
        Some(dir) => read_corpus(dir)?,
        None => mixed_corpus(a.size, a.seed),
    };
    let rows = rate_quality_sweep(&corpus, &transforms, &rs, &opts)?;
    let sink: Box<dyn Write> = match &a.output {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["transform", "r", "mse", "psnr", "mssim"])?;
    for row in &rows {
        w.write_record([
            row.transform_id.clone(),
            row.r.to_string(),
            format!("{:.4}", row.mean_mse),
            fmt_db(row.mean_psnr_db),
            format!("{:.6}", row.mean_mssim),
        ])?;
    }
    w.flush()?;
    Ok(())
}
