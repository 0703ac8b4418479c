//! Command-line front end: band computation, confidence sets from data
//! files, point estimation with bootstraps, and simulation studies.
//!
//! Exit codes: 0 success (an empty confidence set is a legal result),
//! 1 I/O or data error, 2 usage or configuration error, 3 estimation failure.
//! All JSON output carries `"schema": 1`, prints numbers with 17 significant
//! digits, and encodes infinities as the strings `"inf"` / `"-inf"`.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use quantci::band::{compute_band, BandKind, BandSpec, DEFAULT_MC_REPS, DEFAULT_NU};
use quantci::baselines::{
    bootstrap_ci, bootstrap_shape_region, csw_point_estimates, lmoment_estimate_tl,
    quantile_match_estimate_tl, BootstrapKind, BootstrapSpec, DEFAULT_QMATCH_PROBS,
};
use quantci::pairs::{pairs_edge, pairs_grid, pairs_rw, PairSet};
use quantci::region::{qr_ci, quantile_ci, shape_region};
use quantci::sim::{self, ExperimentConfig};
use quantci::tukey::{tl_ci_abs, tl_ci_raw, TukeySample};
use quantci::{Error as CoreError, ExtInterval};

#[derive(Parser)]
#[command(
    name = "quantci",
    version,
    about = "Distribution-free confidence sets for quantile-based parametric families"
)]
struct Cli {
    /// Worker threads for parallel sections (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BandKindArg {
    Dkw,
    Dw,
}

impl BandKindArg {
    fn kind(self) -> BandKind {
        match self {
            BandKindArg::Dkw => BandKind::Dkw,
            BandKindArg::Dw => BandKind::Dw,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TransformArg {
    Raw,
    Abs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Lmom,
    Qmatch,
    Csw,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BootstrapArg {
    Np,
    Param,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute a CDF confidence band and emit it as `i,lower,upper` CSV
    Band {
        /// Sample size the band is built for
        #[arg(long)]
        n: usize,
        /// Miscoverage level in (0,1)
        #[arg(long)]
        alpha: f64,
        /// Band construction
        #[arg(long, value_enum)]
        kind: BandKindArg,
        /// DW tuning parameter (> 3/4)
        #[arg(long, default_value_t = DEFAULT_NU)]
        nu: f64,
        /// Monte Carlo replications for the DW critical value
        #[arg(long, default_value_t = DEFAULT_MC_REPS)]
        mc_reps: usize,
        /// Seed for the DW critical-value simulation
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Confidence interval for the Tukey Lambda shape parameter from data
    TlCi {
        /// Input file: one number per line, or CSV with --csv-column
        #[arg(long)]
        data: PathBuf,
        /// CSV column to read: a header name, or an integer 0-based index
        /// (index mode expects no header row)
        #[arg(long)]
        csv_column: Option<String>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = BandKindArg::Dw)]
        band: BandKindArg,
        #[arg(long, default_value_t = DEFAULT_NU)]
        nu: f64,
        #[arg(long, default_value_t = DEFAULT_MC_REPS)]
        mc_reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Invert the band through the raw sample or through |X|
        #[arg(long, value_enum, default_value_t = TransformArg::Abs)]
        transform: TransformArg,
    },
    /// GLD confidence intervals (median, IQR) and joint shape region
    GldCi {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        csv_column: Option<String>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = BandKindArg::Dw)]
        band: BandKindArg,
        #[arg(long, default_value_t = DEFAULT_NU)]
        nu: f64,
        #[arg(long, default_value_t = DEFAULT_MC_REPS)]
        mc_reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma list drawn from mu,sigma,shape
        #[arg(long, default_value = "mu,sigma")]
        targets: String,
        /// Pair collection for the shape region: rw, grid:K or edge:K
        #[arg(long, default_value = "edge:17")]
        pairs: String,
        #[arg(long, default_value_t = 200)]
        chi_cells: usize,
        #[arg(long, default_value_t = 200)]
        xi_cells: usize,
        /// Where to write the `chi,xi,inside` region CSV (shape target only)
        #[arg(long, default_value = "region.csv")]
        region_out: PathBuf,
    },
    /// Point estimation with optional bootstrap inference
    Estimate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        csv_column: Option<String>,
        #[arg(long, value_enum)]
        method: MethodArg,
        /// Probability levels for qmatch, e.g. 0.1,0.2,0.8
        #[arg(long)]
        probs: Option<String>,
        /// Bootstrap kind: np (resample data) or param (refit model draws)
        #[arg(long, value_enum)]
        bootstrap: Option<BootstrapArg>,
        /// Bootstrap replicates
        #[arg(long, default_value_t = 1000)]
        b: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a simulation study described by a JSON config, writing tidy CSV
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Internal error wrapper carrying the process exit code.
struct AppError {
    code: u8,
    message: String,
}

impl AppError {
    fn io(msg: impl Into<String>) -> Self {
        AppError { code: 1, message: msg.into() }
    }

    fn usage(msg: impl Into<String>) -> Self {
        AppError { code: 2, message: msg.into() }
    }
}

impl From<CoreError> for AppError {
    fn from(e: CoreError) -> Self {
        let code = match &e {
            CoreError::Domain(_) | CoreError::Config(_) => 2,
            CoreError::EstimationFailed(_)
            | CoreError::Degenerate(_)
            | CoreError::UnreliableBootstrap { .. } => 3,
            _ => 1,
        };
        AppError { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        // ignore the error if a pool already exists (tests call run() twice)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}

// ------------------------------------------------------------ JSON plumbing

/// serde_json formatter printing every float with 17 significant digits.
struct G17Formatter;

impl serde_json::ser::Formatter for G17Formatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

fn print_json(value: &Value) {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, G17Formatter);
    use serde::Serialize as _;
    value.serialize(&mut ser).expect("JSON serialization");
    out.push(b'\n');
    std::io::stdout().write_all(&out).expect("stdout");
}

fn num_or_inf(x: f64) -> Value {
    if x == f64::INFINITY {
        json!("inf")
    } else if x == f64::NEG_INFINITY {
        json!("-inf")
    } else {
        json!(x)
    }
}

fn interval_json(iv: &ExtInterval) -> Value {
    match iv.bounds() {
        None => json!({ "empty": true }),
        Some((lo, hi)) => json!({
            "empty": false,
            "lower": num_or_inf(lo),
            "upper": num_or_inf(hi),
        }),
    }
}

// ------------------------------------------------------------- data loading

fn read_data(path: &Path, csv_column: Option<&str>) -> Result<Vec<f64>, AppError> {
    let file = File::open(path)
        .map_err(|e| AppError::io(format!("{}: {e}", path.display())))?;
    let values = match csv_column {
        None => read_plain(file, path)?,
        Some(col) => read_csv(file, path, col)?,
    };
    if values.is_empty() {
        return Err(AppError::io(format!("{}: no data values", path.display())));
    }
    Ok(values)
}

fn parse_value(token: &str, path: &Path, row: usize) -> Result<f64, AppError> {
    let x: f64 = token
        .trim()
        .parse()
        .map_err(|_| AppError::io(format!("{}: row {row}: not a number: {token:?}", path.display())))?;
    if !x.is_finite() {
        return Err(AppError::io(format!(
            "{}: row {row}: non-finite value {token:?}",
            path.display()
        )));
    }
    Ok(x)
}

fn read_plain(file: File, path: &Path) -> Result<Vec<f64>, AppError> {
    let mut values = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let token = line.trim();
        if token.is_empty() {
            continue;
        }
        values.push(parse_value(token, path, idx + 1)?);
    }
    Ok(values)
}

fn read_csv(file: File, path: &Path, column: &str) -> Result<Vec<f64>, AppError> {
    let by_index: Option<usize> = column.parse().ok();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(by_index.is_none())
        .flexible(false)
        .from_reader(file);
    let col_idx = match by_index {
        Some(i) => i,
        None => {
            let headers = reader
                .headers()
                .map_err(|e| AppError::io(format!("{}: {e}", path.display())))?;
            headers
                .iter()
                .position(|h| h == column)
                .ok_or_else(|| AppError::io(format!("{}: no column named {column:?}", path.display())))?
        }
    };
    let mut values = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| AppError::io(format!("{}: {e}", path.display())))?;
        let token = record.get(col_idx).ok_or_else(|| {
            AppError::io(format!("{}: row {}: missing column {col_idx}", path.display(), row + 1))
        })?;
        values.push(parse_value(token, path, row + 1)?);
    }
    Ok(values)
}

fn build_band(
    n: usize,
    alpha: f64,
    kind: BandKindArg,
    nu: f64,
    mc_reps: usize,
    seed: u64,
) -> Result<quantci::ConfidenceBand, AppError> {
    let spec = match kind.kind() {
        BandKind::Dkw => BandSpec::dkw(n, alpha)?,
        BandKind::Dw => BandSpec::dw(n, alpha, nu, mc_reps, seed)?,
    };
    Ok(compute_band(&spec)?)
}

fn parse_pairs(spec: &str, n: usize) -> Result<PairSet, AppError> {
    if spec == "rw" {
        return Ok(pairs_rw(n)?);
    }
    if let Some(k) = spec.strip_prefix("grid:") {
        let k: usize = k.parse().map_err(|_| AppError::usage(format!("bad pair spec {spec:?}")))?;
        return Ok(pairs_grid(n, k)?);
    }
    if let Some(k) = spec.strip_prefix("edge:") {
        let k: usize = k.parse().map_err(|_| AppError::usage(format!("bad pair spec {spec:?}")))?;
        return Ok(pairs_edge(n, k)?);
    }
    Err(AppError::usage(format!(
        "bad pair spec {spec:?} (expected rw, grid:K or edge:K)"
    )))
}

// ---------------------------------------------------------------- commands

fn run(cmd: Cmd) -> Result<(), AppError> {
    match cmd {
        Cmd::Band { n, alpha, kind, nu, mc_reps, seed, out } => {
            let band = build_band(n, alpha, kind, nu, mc_reps, seed)?;
            match out {
                Some(path) => {
                    let mut file = File::create(&path)
                        .map_err(|e| AppError::io(format!("{}: {e}", path.display())))?;
                    band.write_csv(&mut file)?;
                }
                None => band.write_csv(std::io::stdout().lock())?,
            }
            Ok(())
        }

        Cmd::TlCi { data, csv_column, alpha, band, nu, mc_reps, seed, transform } => {
            let values = read_data(&data, csv_column.as_deref())?;
            let sample = TukeySample::new(values);
            let cdf_band = build_band(sample.len(), alpha, band, nu, mc_reps, seed)?;
            let interval = match transform {
                TransformArg::Raw => tl_ci_raw(&sample, &cdf_band)?,
                TransformArg::Abs => tl_ci_abs(&sample, &cdf_band)?,
            };
            let mut obj = Map::new();
            obj.insert("schema".into(), json!(1));
            obj.insert("n".into(), json!(sample.len()));
            obj.insert("alpha".into(), json!(alpha));
            obj.insert("band".into(), json!(cdf_band.kind.to_string()));
            obj.insert(
                "transform".into(),
                json!(match transform {
                    TransformArg::Raw => "raw",
                    TransformArg::Abs => "abs",
                }),
            );
            match interval.bounds() {
                None => {
                    obj.insert("empty".into(), json!(true));
                }
                Some((lo, hi)) => {
                    obj.insert("empty".into(), json!(false));
                    obj.insert("lower".into(), num_or_inf(lo));
                    obj.insert("upper".into(), num_or_inf(hi));
                }
            }
            print_json(&Value::Object(obj));
            Ok(())
        }

        Cmd::GldCi {
            data,
            csv_column,
            alpha,
            band,
            nu,
            mc_reps,
            seed,
            targets,
            pairs,
            chi_cells,
            xi_cells,
            region_out,
        } => {
            let mut values = read_data(&data, csv_column.as_deref())?;
            values.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
            let cdf_band = build_band(values.len(), alpha, band, nu, mc_reps, seed)?;

            let targets: Vec<&str> = targets.split(',').map(str::trim).collect();
            for t in &targets {
                if !matches!(*t, "mu" | "sigma" | "shape") {
                    return Err(AppError::usage(format!("unknown target {t:?}")));
                }
            }

            let mut obj = Map::new();
            obj.insert("schema".into(), json!(1));
            obj.insert("n".into(), json!(values.len()));
            obj.insert("alpha".into(), json!(alpha));
            obj.insert("band".into(), json!(cdf_band.kind.to_string()));
            if targets.contains(&"mu") {
                let iv = quantile_ci(&values, &cdf_band, 0.5)?;
                obj.insert("mu".into(), interval_json(&iv));
            }
            if targets.contains(&"sigma") {
                let iv = qr_ci(&values, &cdf_band, 0.75, 0.25)?;
                obj.insert("sigma".into(), interval_json(&iv));
            }
            if targets.contains(&"shape") {
                let pair_set = parse_pairs(&pairs, values.len())?;
                let region = shape_region(&values, &cdf_band, &pair_set, chi_cells, xi_cells)?;
                let mut file = File::create(&region_out)
                    .map_err(|e| AppError::io(format!("{}: {e}", region_out.display())))?;
                region.write_csv(&mut file)?;
                obj.insert(
                    "shape".into(),
                    json!({
                        "pairs": pairs,
                        "n_pairs": pair_set.len(),
                        "area": region.area(),
                        "cells_inside": region.cells_inside(),
                        "region_csv": region_out.display().to_string(),
                    }),
                );
            }
            print_json(&Value::Object(obj));
            Ok(())
        }

        Cmd::Estimate { data, csv_column, method, probs, bootstrap, b, alpha, seed } => {
            let mut values = read_data(&data, csv_column.as_deref())?;
            values.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
            let kind = bootstrap.map(|bs| match bs {
                BootstrapArg::Np => BootstrapKind::Nonparametric,
                BootstrapArg::Param => BootstrapKind::Parametric,
            });
            let result = estimate_json(&values, method, probs.as_deref(), kind, b, alpha, seed);
            match result {
                Ok(obj) => {
                    print_json(&obj);
                    Ok(())
                }
                Err(err) if err.code == 3 => {
                    print_json(&json!({ "schema": 1, "error": err.message }));
                    Err(err)
                }
                Err(err) => Err(err),
            }
        }

        Cmd::Simulate { config, out } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| AppError::io(format!("{}: {e}", config.display())))?;
            let cfg = ExperimentConfig::from_json(&text)?;
            let rows = sim::run(&cfg)?;
            let mut file =
                File::create(&out).map_err(|e| AppError::io(format!("{}: {e}", out.display())))?;
            sim::emit_csv(&rows, &mut file)?;
            Ok(())
        }
    }
}

fn estimate_json(
    sorted: &[f64],
    method: MethodArg,
    probs: Option<&str>,
    bootstrap: Option<BootstrapKind>,
    b: usize,
    alpha: f64,
    seed: u64,
) -> Result<Value, AppError> {
    let mut obj = Map::new();
    obj.insert("schema".into(), json!(1));
    obj.insert("n".into(), json!(sorted.len()));

    match method {
        MethodArg::Lmom | MethodArg::Qmatch => {
            let levels: Vec<f64> = match probs {
                None => DEFAULT_QMATCH_PROBS.to_vec(),
                Some(text) => text
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<f64>()
                            .map_err(|_| AppError::usage(format!("bad probability {t:?}")))
                    })
                    .collect::<Result<_, _>>()?,
            };
            let is_lmom = method == MethodArg::Lmom;
            obj.insert("method".into(), json!(if is_lmom { "lmom" } else { "qmatch" }));
            if !is_lmom {
                obj.insert("probs".into(), json!(levels.clone()));
            }
            let estimator = move |xs: &[f64]| {
                if is_lmom {
                    lmoment_estimate_tl(xs)
                } else {
                    quantile_match_estimate_tl(xs, &levels)
                }
            };
            let lambda = estimator(sorted)?;
            obj.insert("lambda".into(), json!(lambda));
            if let Some(kind) = bootstrap {
                let spec = BootstrapSpec::new(b, kind, alpha, seed)?;
                let ci = bootstrap_ci(sorted, estimator, &spec)?;
                obj.insert(
                    "bootstrap".into(),
                    json!({
                        "kind": kind_name(kind),
                        "b": b,
                        "alpha": alpha,
                        "failed": ci.failed,
                        "interval": interval_json(&ci.interval),
                    }),
                );
            }
        }
        MethodArg::Csw => {
            obj.insert("method".into(), json!("csw"));
            let fit = csw_point_estimates(sorted)?;
            obj.insert("mu".into(), json!(fit.mu_hat));
            obj.insert("sigma".into(), json!(fit.sigma_hat));
            obj.insert("chi".into(), json!(fit.chi_hat));
            obj.insert("xi".into(), json!(fit.xi_hat));
            obj.insert("s".into(), json!(fit.s_hat));
            obj.insert("kappa".into(), json!(fit.kappa_hat));
            obj.insert("residual".into(), json!(fit.residual));
            obj.insert("solved".into(), json!(fit.solved()));
            if let Some(kind) = bootstrap {
                let spec = BootstrapSpec::new(b, kind, alpha, seed)?;
                let hull = bootstrap_shape_region(sorted, &spec)?;
                let vertices: Vec<Value> =
                    hull.iter().map(|&(chi, xi)| json!([chi, xi])).collect();
                obj.insert(
                    "bootstrap".into(),
                    json!({
                        "kind": kind_name(kind),
                        "b": b,
                        "alpha": alpha,
                        "region_vertices": vertices,
                    }),
                );
            }
        }
    }
    Ok(Value::Object(obj))
}

fn kind_name(kind: BootstrapKind) -> &'static str {
    match kind {
        BootstrapKind::Nonparametric => "nonparametric",
        BootstrapKind::Parametric => "parametric",
    }
}
