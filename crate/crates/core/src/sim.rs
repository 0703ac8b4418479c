//! Reproducible Monte Carlo experiments: coverage and width/area studies
//! over parameter grids, emitted as tidy CSV.
//!
//! Determinism contract: a config plus `master_seed` fixes every random
//! stream. Replication `r` draws from the substream `mix64(master_seed, r)`
//! in every cell, which makes the table identical regardless of worker
//! count and shares uniforms across parameter cells (common random numbers,
//! so cross-cell width comparisons are paired). Wall-clock timing is the one
//! inherently nondeterministic field; it is recorded only when
//! `record_timing` is set and written as 0 otherwise.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::band::{compute_band, BandKind, BandSpec, ConfidenceBand, DEFAULT_MC_REPS, DEFAULT_NU};
use crate::baselines::{
    bootstrap_ci, lmoment_estimate_tl, quantile_match_estimate_tl, BootstrapKind, BootstrapSpec,
    DEFAULT_BOOTSTRAP_B, DEFAULT_QMATCH_PROBS,
};
use crate::error::{Error, Result};
use crate::gld::{gld_sample_with, CSWParams};
use crate::interval::ExtInterval;
use crate::pairs::{pairs_edge, pairs_grid, pairs_rw, PairSet};
use crate::region::{default_grids, pair_cis, quantile_ci, qr_ci, ShapeStatTable, DEFAULT_CELLS};
use crate::rng::{mix64, substream};
use crate::tukey::{tl_ci_abs, tl_ci_raw, tl_sample_with};

/// Distribution family under study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    TukeyLambda,
    Gld,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::TukeyLambda => write!(f, "tukey_lambda"),
            Family::Gld => write!(f, "gld"),
        }
    }
}

/// Which experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Study {
    /// Tukey Lambda intervals under DW vs DKW bands and raw vs |X| transforms.
    BandComparison,
    /// Band inversion against the L-moment / quantile-matching bootstraps.
    MethodComparison,
    /// GLD median and IQR intervals.
    LocationScale,
    /// GLD joint shape region coverage and area.
    ShapeRegion,
}

/// Pair-collection selector for shape-region studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PairsChoice {
    Rw,
    Grid { k: usize },
    Edge { k: usize },
}

impl PairsChoice {
    pub fn build(&self, n: usize) -> Result<PairSet> {
        match *self {
            PairsChoice::Rw => pairs_rw(n),
            PairsChoice::Grid { k } => pairs_grid(n, k),
            PairsChoice::Edge { k } => pairs_edge(n, k),
        }
    }
}

/// Default pair collection for shape studies: the edge subset at k = 17.
pub const DEFAULT_PAIRS: PairsChoice = PairsChoice::Edge { k: 17 };

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum TruthPoint {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl TruthPoint {
    fn values(&self) -> Vec<f64> {
        match self {
            TruthPoint::Scalar(x) => vec![*x],
            TruthPoint::Vector(v) => v.clone(),
        }
    }
}

fn default_bands() -> Vec<BandKind> {
    vec![BandKind::Dw]
}

fn default_nu() -> f64 {
    DEFAULT_NU
}

fn default_mc_reps() -> usize {
    DEFAULT_MC_REPS
}

fn default_bootstrap_b() -> usize {
    DEFAULT_BOOTSTRAP_B
}

/// A full experiment description. Serializes as JSON with these exact field
/// names; optional fields fall back to the documented defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub study: Study,
    pub family: Family,
    /// Parameter points: scalars for Tukey Lambda, CSW quadruples
    /// `[mu, sigma, chi, xi]` for the GLD.
    truth: Vec<TruthPoint>,
    pub n_grid: Vec<usize>,
    /// Study-specific method identifiers; see the `run_*` functions.
    pub methods: Vec<String>,
    #[serde(default = "default_bands")]
    pub bands: Vec<BandKind>,
    pub alpha: f64,
    pub replications: usize,
    pub master_seed: u64,
    #[serde(default = "default_nu")]
    pub nu: f64,
    #[serde(default = "default_mc_reps")]
    pub mc_reps: usize,
    #[serde(default)]
    pub pairs: Option<PairsChoice>,
    /// `[chi_cells, xi_cells]` for shape regions.
    #[serde(default)]
    pub grid_cells: Option<[usize; 2]>,
    #[serde(default = "default_bootstrap_b")]
    pub bootstrap_b: usize,
    /// When false (the default), `wall_time_seconds` is written as 0 so that
    /// output bytes are reproducible.
    #[serde(default)]
    pub record_timing: bool,
}

impl ExperimentConfig {
    pub fn new(
        study: Study,
        family: Family,
        truth: Vec<Vec<f64>>,
        n_grid: Vec<usize>,
        methods: Vec<String>,
        alpha: f64,
        replications: usize,
        master_seed: u64,
    ) -> Self {
        ExperimentConfig {
            study,
            family,
            truth: truth.into_iter().map(TruthPoint::Vector).collect(),
            n_grid,
            methods,
            bands: default_bands(),
            alpha,
            replications,
            master_seed,
            nu: DEFAULT_NU,
            mc_reps: DEFAULT_MC_REPS,
            pairs: None,
            grid_cells: None,
            bootstrap_b: DEFAULT_BOOTSTRAP_B,
            record_timing: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("config JSON: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn truth_points(&self) -> Vec<Vec<f64>> {
        self.truth.iter().map(TruthPoint::values).collect()
    }

    fn truth_scalars(&self) -> Result<Vec<f64>> {
        self.truth_points()
            .into_iter()
            .map(|v| {
                if v.len() == 1 {
                    Ok(v[0])
                } else {
                    Err(Error::Config(format!("expected scalar truth, got {v:?}")))
                }
            })
            .collect()
    }

    fn truth_csw(&self) -> Result<Vec<CSWParams>> {
        self.truth_points()
            .into_iter()
            .map(|v| {
                if v.len() != 4 {
                    return Err(Error::Config(format!(
                        "expected [mu, sigma, chi, xi] truth, got {v:?}"
                    )));
                }
                CSWParams::new(v[0], v[1], v[2], v[3])
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("replications must be positive".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0,1), got {}", self.alpha)));
        }
        if self.truth.is_empty() {
            return Err(Error::Config("truth must be nonempty".into()));
        }
        if self.n_grid.is_empty() || self.n_grid.iter().any(|&n| n == 0) {
            return Err(Error::Config("n_grid must be nonempty and positive".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("methods must be nonempty".into()));
        }
        if self.bands.is_empty() {
            return Err(Error::Config("bands must be nonempty".into()));
        }
        let expect_family = |want: Family| {
            if self.family == want {
                Ok(())
            } else {
                Err(Error::Config(format!("study {:?} requires family {want}", self.study)))
            }
        };
        let allowed: &[&str] = match self.study {
            Study::BandComparison => {
                expect_family(Family::TukeyLambda)?;
                self.truth_scalars()?;
                &["abs", "raw"]
            }
            Study::MethodComparison => {
                expect_family(Family::TukeyLambda)?;
                self.truth_scalars()?;
                &["ours", "lmom-npboot", "qmatch-npboot", "qmatch-pboot"]
            }
            Study::LocationScale => {
                expect_family(Family::Gld)?;
                self.truth_csw()?;
                &["mu", "sigma"]
            }
            Study::ShapeRegion => {
                expect_family(Family::Gld)?;
                self.truth_csw()?;
                &["shape"]
            }
        };
        for m in &self.methods {
            if !allowed.contains(&m.as_str()) {
                return Err(Error::Config(format!(
                    "method {m:?} not valid for study {:?} (allowed: {allowed:?})",
                    self.study
                )));
            }
        }
        Ok(())
    }

    fn band_spec(&self, n: usize, kind: BandKind) -> Result<BandSpec> {
        match kind {
            BandKind::Dkw => BandSpec::dkw(n, self.alpha),
            BandKind::Dw => {
                // one critical-value stream per master seed, shared by cells
                BandSpec::dw(n, self.alpha, self.nu, self.mc_reps, mix64(self.master_seed, u64::MAX))
            }
        }
    }
}

/// One row of a result table.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub family: String,
    pub truth: String,
    pub n: usize,
    pub method: String,
    pub coverage: f64,
    pub mean_width_or_area: f64,
    pub infinite_fraction: f64,
    pub replications: usize,
    pub wall_time_seconds: f64,
}

/// Per-replication outcome for one method: whether the confidence set
/// covered the truth, and its width or area. `NaN` width marks a failed
/// replication (estimation error), excluded from both the finite mean and
/// the infinite fraction.
#[derive(Debug, Clone, Copy)]
struct RepOutcome {
    covered: bool,
    width: f64,
}

fn summarize(outcomes: impl Iterator<Item = RepOutcome>, reps: usize) -> (f64, f64, f64) {
    let mut covered = 0usize;
    let mut finite_sum = 0.0;
    let mut finite_count = 0usize;
    let mut infinite = 0usize;
    for o in outcomes {
        if o.covered {
            covered += 1;
        }
        if o.width.is_nan() {
            continue;
        }
        if o.width.is_infinite() {
            infinite += 1;
        } else {
            finite_sum += o.width;
            finite_count += 1;
        }
    }
    let mean = if finite_count > 0 { finite_sum / finite_count as f64 } else { 0.0 };
    (covered as f64 / reps as f64, mean, infinite as f64 / reps as f64)
}

fn interval_outcome(iv: &ExtInterval, truth: f64) -> RepOutcome {
    RepOutcome { covered: iv.contains(truth), width: iv.width() }
}

fn fmt_scalar(x: f64) -> String {
    format!("{x}")
}

fn fmt_csw(p: &CSWParams) -> String {
    format!("{}|{}|{}|{}", p.mu_t, p.sigma_t, p.chi, p.xi)
}

/// Dispatches a config to its study runner.
pub fn run(config: &ExperimentConfig) -> Result<Vec<ExperimentResult>> {
    config.validate()?;
    match config.study {
        Study::BandComparison => run_tukey_band_comparison(config),
        Study::MethodComparison => run_tukey_method_comparison(config),
        Study::LocationScale => run_gld_location_scale(config),
        Study::ShapeRegion => run_gld_shape_region(config),
    }
}

/// Tukey Lambda intervals for every band in `bands` crossed with every
/// transform in `methods` (`"abs"`, `"raw"`); result methods are named
/// `"{band}-{transform}"`. One sample per replication is shared by all
/// combinations, so width comparisons are paired.
pub fn run_tukey_band_comparison(config: &ExperimentConfig) -> Result<Vec<ExperimentResult>> {
    config.validate()?;
    if config.study != Study::BandComparison {
        return Err(Error::Config("run_tukey_band_comparison: wrong study".into()));
    }
    let truths = config.truth_scalars()?;
    let reps = config.replications;
    let mut out = Vec::new();
    for &lam0 in &truths {
        for &n in &config.n_grid {
            let bands: Vec<(BandKind, ConfidenceBand)> = config
                .bands
                .iter()
                .map(|&k| Ok((k, compute_band(&config.band_spec(n, k)?)?)))
                .collect::<Result<_>>()?;
            let start = Instant::now();
            let combos = bands.len() * config.methods.len();
            let per_rep: Vec<Vec<RepOutcome>> = (0..reps)
                .into_par_iter()
                .map(|rep| {
                    let mut rng = substream(config.master_seed, rep as u64);
                    let sample = tl_sample_with(n, lam0, &mut rng);
                    let mut v = Vec::with_capacity(combos);
                    for (_, band) in &bands {
                        for m in &config.methods {
                            let iv = match m.as_str() {
                                "abs" => tl_ci_abs(&sample, band),
                                _ => tl_ci_raw(&sample, band),
                            }
                            .expect("sample length matches band");
                            v.push(interval_outcome(&iv, lam0));
                        }
                    }
                    v
                })
                .collect();
            let elapsed = if config.record_timing { start.elapsed().as_secs_f64() } else { 0.0 };
            let mut slot = 0;
            for (kind, _) in &bands {
                for m in &config.methods {
                    let (coverage, mean, inf) =
                        summarize(per_rep.iter().map(|v| v[slot]), reps);
                    out.push(ExperimentResult {
                        family: config.family.to_string(),
                        truth: fmt_scalar(lam0),
                        n,
                        method: format!("{kind}-{m}"),
                        coverage,
                        mean_width_or_area: mean,
                        infinite_fraction: inf,
                        replications: reps,
                        wall_time_seconds: elapsed,
                    });
                    slot += 1;
                }
            }
        }
    }
    Ok(out)
}

/// Band inversion (`"ours"`: first configured band, |X| transform) against
/// bootstrap baselines: `"lmom-npboot"`, `"qmatch-npboot"`, `"qmatch-pboot"`.
/// A failed baseline replication counts as a miss and is excluded from the
/// width statistics.
pub fn run_tukey_method_comparison(config: &ExperimentConfig) -> Result<Vec<ExperimentResult>> {
    config.validate()?;
    if config.study != Study::MethodComparison {
        return Err(Error::Config("run_tukey_method_comparison: wrong study".into()));
    }
    let truths = config.truth_scalars()?;
    let reps = config.replications;
    let wants_band = config.methods.iter().any(|m| m == "ours");
    let mut out = Vec::new();
    for &lam0 in &truths {
        for &n in &config.n_grid {
            let band = if wants_band {
                Some(compute_band(&config.band_spec(n, config.bands[0])?)?)
            } else {
                None
            };
            let start = Instant::now();
            let per_rep: Vec<Vec<RepOutcome>> = (0..reps)
                .into_par_iter()
                .map(|rep| {
                    let rep_seed = mix64(config.master_seed, rep as u64);
                    let mut rng = substream(config.master_seed, rep as u64);
                    let sample = tl_sample_with(n, lam0, &mut rng);
                    config
                        .methods
                        .iter()
                        .enumerate()
                        .map(|(mi, m)| match m.as_str() {
                            "ours" => {
                                let iv = tl_ci_abs(&sample, band.as_ref().expect("band built"))
                                    .expect("sample length matches band");
                                interval_outcome(&iv, lam0)
                            }
                            _ => {
                                let (kind, lmom) = match m.as_str() {
                                    "lmom-npboot" => (BootstrapKind::Nonparametric, true),
                                    "qmatch-npboot" => (BootstrapKind::Nonparametric, false),
                                    _ => (BootstrapKind::Parametric, false),
                                };
                                let spec = BootstrapSpec {
                                    b: config.bootstrap_b,
                                    kind,
                                    alpha: config.alpha,
                                    seed: mix64(rep_seed, mi as u64 + 1),
                                };
                                let est = |xs: &[f64]| {
                                    if lmom {
                                        lmoment_estimate_tl(xs)
                                    } else {
                                        quantile_match_estimate_tl(xs, &DEFAULT_QMATCH_PROBS)
                                    }
                                };
                                match bootstrap_ci(sample.sorted_values(), est, &spec) {
                                    Ok(ci) => interval_outcome(&ci.interval, lam0),
                                    Err(_) => RepOutcome { covered: false, width: f64::NAN },
                                }
                            }
                        })
                        .collect()
                })
                .collect();
            let elapsed = if config.record_timing { start.elapsed().as_secs_f64() } else { 0.0 };
            for (mi, m) in config.methods.iter().enumerate() {
                let (coverage, mean, inf) = summarize(per_rep.iter().map(|v| v[mi]), reps);
                out.push(ExperimentResult {
                    family: config.family.to_string(),
                    truth: fmt_scalar(lam0),
                    n,
                    method: m.clone(),
                    coverage,
                    mean_width_or_area: mean,
                    infinite_fraction: inf,
                    replications: reps,
                    wall_time_seconds: elapsed,
                });
            }
        }
    }
    Ok(out)
}

/// GLD location (`"mu"`, median interval) and scale (`"sigma"`, IQR
/// interval) coverage and width under the first configured band.
pub fn run_gld_location_scale(config: &ExperimentConfig) -> Result<Vec<ExperimentResult>> {
    config.validate()?;
    if config.study != Study::LocationScale {
        return Err(Error::Config("run_gld_location_scale: wrong study".into()));
    }
    let truths = config.truth_csw()?;
    let reps = config.replications;
    let mut out = Vec::new();
    for csw in &truths {
        for &n in &config.n_grid {
            let band = compute_band(&config.band_spec(n, config.bands[0])?)?;
            let start = Instant::now();
            let per_rep: Vec<Vec<RepOutcome>> = (0..reps)
                .into_par_iter()
                .map(|rep| {
                    let mut rng = substream(config.master_seed, rep as u64);
                    let xs = gld_sample_with(n, csw, &mut rng);
                    config
                        .methods
                        .iter()
                        .map(|m| {
                            let (iv, truth) = if m == "mu" {
                                (quantile_ci(&xs, &band, 0.5), csw.mu_t)
                            } else {
                                (qr_ci(&xs, &band, 0.75, 0.25), csw.sigma_t)
                            };
                            interval_outcome(&iv.expect("valid levels"), truth)
                        })
                        .collect()
                })
                .collect();
            let elapsed = if config.record_timing { start.elapsed().as_secs_f64() } else { 0.0 };
            for (mi, m) in config.methods.iter().enumerate() {
                let (coverage, mean, inf) = summarize(per_rep.iter().map(|v| v[mi]), reps);
                out.push(ExperimentResult {
                    family: config.family.to_string(),
                    truth: fmt_csw(csw),
                    n,
                    method: m.clone(),
                    coverage,
                    mean_width_or_area: mean,
                    infinite_fraction: inf,
                    replications: reps,
                    wall_time_seconds: elapsed,
                });
            }
        }
    }
    Ok(out)
}

/// GLD joint shape-region study: per truth and sample size, the coverage of
/// the true `(chi, xi)` (membership of its nearest grid cell) and the mean
/// cell-counting area. Shape statistics are pretabulated once per sample
/// size and shared across truths and replications.
pub fn run_gld_shape_region(config: &ExperimentConfig) -> Result<Vec<ExperimentResult>> {
    config.validate()?;
    if config.study != Study::ShapeRegion {
        return Err(Error::Config("run_gld_shape_region: wrong study".into()));
    }
    let truths = config.truth_csw()?;
    let reps = config.replications;
    let pairs_choice = config.pairs.unwrap_or(DEFAULT_PAIRS);
    let [chi_cells, xi_cells] = config.grid_cells.unwrap_or([DEFAULT_CELLS, DEFAULT_CELLS]);
    if chi_cells < 2 || xi_cells < 2 {
        return Err(Error::Config("grid_cells must be at least 2 per axis".into()));
    }
    let mut out = Vec::new();
    for &n in &config.n_grid {
        let pairs = pairs_choice.build(n)?;
        let (chi_grid, xi_grid) = default_grids(chi_cells, xi_cells);
        let cell_area = (chi_grid[1] - chi_grid[0]) * (xi_grid[1] - xi_grid[0]);
        let table = ShapeStatTable::new(chi_grid.clone(), xi_grid.clone(), &pairs)?;
        let band = compute_band(&config.band_spec(n, config.bands[0])?)?;
        for csw in &truths {
            let truth_cell = nearest_cell(&chi_grid, &xi_grid, csw.chi, csw.xi);
            let start = Instant::now();
            let per_rep: Vec<RepOutcome> = (0..reps)
                .into_par_iter()
                .map(|rep| {
                    let mut rng = substream(config.master_seed, rep as u64);
                    let xs = gld_sample_with(n, csw, &mut rng);
                    let cis = pair_cis(&xs, &band, &pairs).expect("valid pair levels");
                    let mask = table.feasibility(&cis).expect("ci count matches pairs");
                    let inside = mask.iter().filter(|&&b| b).count();
                    RepOutcome {
                        covered: mask[truth_cell.0 * xi_grid.len() + truth_cell.1],
                        width: cell_area * inside as f64,
                    }
                })
                .collect();
            let elapsed = if config.record_timing { start.elapsed().as_secs_f64() } else { 0.0 };
            let (coverage, mean, inf) = summarize(per_rep.iter().copied(), reps);
            out.push(ExperimentResult {
                family: config.family.to_string(),
                truth: fmt_csw(csw),
                n,
                method: "shape".into(),
                coverage,
                mean_width_or_area: mean,
                infinite_fraction: inf,
                replications: reps,
                wall_time_seconds: elapsed,
            });
        }
    }
    // rows in (truth, n) order to match the other runners
    out.sort_by(|a, b| {
        let ta = truths.iter().position(|c| fmt_csw(c) == a.truth).unwrap();
        let tb = truths.iter().position(|c| fmt_csw(c) == b.truth).unwrap();
        (ta, a.n).cmp(&(tb, b.n))
    });
    Ok(out)
}

fn nearest_cell(chi_grid: &[f64], xi_grid: &[f64], chi: f64, xi: f64) -> (usize, usize) {
    let nearest = |grid: &[f64], x: f64| {
        grid.iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                (*a - x).abs().partial_cmp(&(*b - x).abs()).unwrap()
            })
            .map(|(i, _)| i)
            .unwrap()
    };
    (nearest(chi_grid, chi), nearest(xi_grid, xi))
}

/// Writes the tidy result CSV. Numbers use the shortest round-trip form, so
/// parsing the file back reproduces the table exactly.
pub fn emit_csv<W: Write>(results: &[ExperimentResult], mut w: W) -> std::io::Result<()> {
    writeln!(
        w,
        "family,truth,n,method,coverage,mean_width_or_area,infinite_fraction,replications,wall_time_seconds"
    )?;
    for r in results {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.family,
            r.truth,
            r.n,
            r.method,
            r.coverage,
            r.mean_width_or_area,
            r.infinite_fraction,
            r.replications,
            r.wall_time_seconds
        )?;
    }
    Ok(())
}
