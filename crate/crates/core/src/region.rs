//! Band inversion for the GLD: confidence intervals for quantiles and
//! quantile ranges, and the joint confidence region for the shape pair.
//!
//! Given a CDF band at the order statistics, a quantile `F^-1(u)` is bracketed
//! by the order statistics whose band levels straddle `u`; differences of
//! those brackets bound any quantile range. Ratios of quantile-range bounds
//! then constrain the IQR-normalized shape statistic, and intersecting these
//! constraints over a pair collection carves a feasible region out of a
//! `(chi, xi)` grid.

use std::io::Write;

use rayon::prelude::*;

use crate::band::ConfidenceBand;
use crate::error::{Error, Result};
use crate::gld::{s_raw, shape_to_tails};
use crate::interval::ExtInterval;
use crate::pairs::PairSet;

/// Default shape-region grid resolution per axis.
pub const DEFAULT_CELLS: usize = 200;

// The grid is clamped away from the open-boundary singularities of the
// shape map.
const CHI_MIN: f64 = -0.999;
const CHI_MAX: f64 = 0.999;
const XI_MIN: f64 = 0.001;
const XI_MAX: f64 = 0.999;

/// First 1-based index with `upper[i] >= u`, if any.
fn first_upper_at_least(band: &ConfidenceBand, u: f64) -> Option<usize> {
    let idx = band.upper().partition_point(|&x| x < u);
    if idx < band.n {
        Some(idx + 1)
    } else {
        None
    }
}

/// Last 1-based index with `lower[i] <= u`, if any.
fn last_lower_at_most(band: &ConfidenceBand, u: f64) -> Option<usize> {
    let count = band.lower().partition_point(|&x| x <= u);
    if count > 0 {
        Some(count)
    } else {
        None
    }
}

/// Confidence interval `[X_(a), X_(b)]` for the `u`-quantile, with
/// `a = inf{i : upper[i] >= u}` and `b = sup{i : lower[i] <= u}`. A missing
/// index yields an infinite endpoint on that side.
pub fn quantile_ci(sorted: &[f64], band: &ConfidenceBand, u: f64) -> Result<ExtInterval> {
    if sorted.len() != band.n {
        return Err(Error::LengthMismatch { expected: band.n, got: sorted.len() });
    }
    if !u.is_finite() || u <= 0.0 || u >= 1.0 {
        return Err(Error::domain(format!("u must lie in (0,1), got {u}")));
    }
    let lo = match first_upper_at_least(band, u) {
        Some(a) => sorted[a - 1],
        None => f64::NEG_INFINITY,
    };
    let hi = match last_lower_at_most(band, u) {
        Some(b) => sorted[b - 1],
        None => f64::INFINITY,
    };
    Ok(ExtInterval::new(lo, hi))
}

/// Confidence interval for the quantile range `F^-1(u1) - F^-1(u2)`:
/// `[max(X_(a1) - X_(b2), 0), X_(b1) - X_(a2)]`, clipped at zero because a
/// quantile range is nonnegative. Missing indices follow the same infinite
/// conventions as [`quantile_ci`].
pub fn qr_ci(sorted: &[f64], band: &ConfidenceBand, u1: f64, u2: f64) -> Result<ExtInterval> {
    if sorted.len() != band.n {
        return Err(Error::LengthMismatch { expected: band.n, got: sorted.len() });
    }
    if !(u1 > u2) || !(0.0..=1.0).contains(&u1) || !(0.0..=1.0).contains(&u2) {
        return Err(Error::domain(format!("need u1 > u2 in [0,1], got ({u1}, {u2})")));
    }
    let fetch = |i: Option<usize>, missing: f64| i.map_or(missing, |k| sorted[k - 1]);
    let xa1 = fetch(first_upper_at_least(band, u1), f64::NEG_INFINITY);
    let xb1 = fetch(last_lower_at_most(band, u1), f64::INFINITY);
    let xa2 = fetch(first_upper_at_least(band, u2), f64::NEG_INFINITY);
    let xb2 = fetch(last_lower_at_most(band, u2), f64::INFINITY);
    let lo = (xa1 - xb2).max(0.0);
    let hi = xb1 - xa2;
    Ok(ExtInterval::new(lo, hi))
}

/// Confidence interval for the rescaled shape statistic at `(u1, u2)`,
/// oriented to the same sign convention as [`crate::gld::shape_stat`]
/// (nonpositive values): magnitude bounds come from the ratio of the
/// quantile-range interval for `(u1, u2)` to the one for the IQR, and a zero
/// IQR lower bound makes the region side unbounded.
pub fn shape_stat_ci(sorted: &[f64], band: &ConfidenceBand, u1: f64, u2: f64) -> Result<ExtInterval> {
    let num = qr_ci(sorted, band, u1, u2)?;
    let den = qr_ci(sorted, band, 0.75, 0.25)?;
    let (num_lo, num_hi) = num.bounds().expect("qr interval is never empty");
    let (den_lo, den_hi) = den.bounds().expect("qr interval is never empty");

    // magnitude upper bound: num_hi / den_lo
    let mag_hi = if den_lo == 0.0 { f64::INFINITY } else { num_hi / den_lo };
    // magnitude lower bound: num_lo / den_hi
    let mag_lo = if num_lo == 0.0 {
        0.0
    } else if den_hi.is_infinite() {
        0.0
    } else if den_hi == 0.0 {
        f64::INFINITY
    } else {
        num_lo / den_hi
    };
    Ok(ExtInterval::new(-mag_hi, -mag_lo))
}

/// Feasibility mask over a `(chi, xi)` grid with an area summary.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeRegion {
    chi_grid: Vec<f64>,
    xi_grid: Vec<f64>,
    /// Row-major over chi, then xi: `mask[g * xi_grid.len() + h]`.
    mask: Vec<bool>,
    area: f64,
}

impl ShapeRegion {
    pub fn new(chi_grid: Vec<f64>, xi_grid: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        if chi_grid.len() < 2 || xi_grid.len() < 2 {
            return Err(Error::domain("shape grids need at least 2 cells per axis"));
        }
        if mask.len() != chi_grid.len() * xi_grid.len() {
            return Err(Error::LengthMismatch {
                expected: chi_grid.len() * xi_grid.len(),
                got: mask.len(),
            });
        }
        let area = cell_area(&chi_grid, &xi_grid) * mask.iter().filter(|&&b| b).count() as f64;
        Ok(ShapeRegion { chi_grid, xi_grid, mask, area })
    }

    pub fn chi_grid(&self) -> &[f64] {
        &self.chi_grid
    }

    pub fn xi_grid(&self) -> &[f64] {
        &self.xi_grid
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn at(&self, chi_idx: usize, xi_idx: usize) -> bool {
        self.mask[chi_idx * self.xi_grid.len() + xi_idx]
    }

    /// Cell-counting area of the region.
    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn cells_inside(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    /// Index of the grid cell whose center is nearest to `(chi, xi)`.
    pub fn nearest_cell(&self, chi: f64, xi: f64) -> (usize, usize) {
        (nearest_index(&self.chi_grid, chi), nearest_index(&self.xi_grid, xi))
    }

    /// Membership of a parameter point, evaluated at the nearest cell center.
    pub fn contains_point(&self, chi: f64, xi: f64) -> bool {
        let (g, h) = self.nearest_cell(chi, xi);
        self.at(g, h)
    }

    /// Writes `chi,xi,inside` rows, one per cell center, chi-major.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "chi,xi,inside")?;
        for (g, &chi) in self.chi_grid.iter().enumerate() {
            for (h, &xi) in self.xi_grid.iter().enumerate() {
                writeln!(w, "{},{},{}", chi, xi, u8::from(self.at(g, h)))?;
            }
        }
        Ok(())
    }
}

fn nearest_index(grid: &[f64], x: f64) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, &g) in grid.iter().enumerate() {
        let d = (g - x).abs();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

fn cell_area(chi_grid: &[f64], xi_grid: &[f64]) -> f64 {
    (chi_grid[1] - chi_grid[0]) * (xi_grid[1] - xi_grid[0])
}

/// Cell-counting area; equals [`ShapeRegion::area`].
pub fn region_area(region: &ShapeRegion) -> f64 {
    region.area()
}

/// Uniform cell centers over the clamped default shape rectangle.
pub fn default_grids(chi_cells: usize, xi_cells: usize) -> (Vec<f64>, Vec<f64>) {
    let centers = |lo: f64, hi: f64, m: usize| -> Vec<f64> {
        let w = (hi - lo) / m as f64;
        (0..m).map(|i| lo + w * (i as f64 + 0.5)).collect()
    };
    (centers(CHI_MIN, CHI_MAX, chi_cells), centers(XI_MIN, XI_MAX, xi_cells))
}

/// Shape statistics pretabulated on a grid for a fixed pair collection.
///
/// The statistic at a cell depends only on `(chi, xi)` and the pair levels,
/// not on the data, so simulation loops tabulate once and reuse the table
/// against per-sample confidence intervals.
pub struct ShapeStatTable {
    chi_grid: Vec<f64>,
    xi_grid: Vec<f64>,
    /// Distinct u levels referenced by the pairs.
    levels: Vec<f64>,
    /// Pair -> (index of u1, index of u2) in `levels`.
    pair_idx: Vec<(usize, usize)>,
    /// Per cell: S at every level, then cell-major `[cell * levels.len() ..]`.
    s_values: Vec<f64>,
    /// Per cell: `S(3/4) - S(1/4)`.
    iqr_basis: Vec<f64>,
}

impl ShapeStatTable {
    pub fn new(chi_grid: Vec<f64>, xi_grid: Vec<f64>, pairs: &PairSet) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::domain("pair set must be nonempty"));
        }
        let mut levels: Vec<f64> = Vec::new();
        let mut pair_idx = Vec::with_capacity(pairs.len());
        let index_of = |u: f64, levels: &mut Vec<f64>| -> usize {
            match levels.iter().position(|&v| v == u) {
                Some(i) => i,
                None => {
                    levels.push(u);
                    levels.len() - 1
                }
            }
        };
        for &(u1, u2) in pairs.pairs() {
            let i1 = index_of(u1, &mut levels);
            let i2 = index_of(u2, &mut levels);
            pair_idx.push((i1, i2));
        }

        let n_xi = xi_grid.len();
        let n_levels = levels.len();
        let cells = chi_grid.len() * n_xi;
        let mut s_values = vec![0.0; cells * n_levels];
        let mut iqr_basis = vec![0.0; cells];

        // one chi row at a time, cells within a row handled in parallel
        s_values
            .par_chunks_mut(n_xi * n_levels)
            .zip(iqr_basis.par_chunks_mut(n_xi))
            .enumerate()
            .for_each(|(g, (s_row, iqr_row))| {
                let chi = chi_grid[g];
                for h in 0..n_xi {
                    let (l3, l4) = shape_to_tails(chi, xi_grid[h]);
                    iqr_row[h] = s_raw(0.75, l3, l4) - s_raw(0.25, l3, l4);
                    for (t, &u) in levels.iter().enumerate() {
                        s_row[h * n_levels + t] = s_raw(u, l3, l4);
                    }
                }
            });

        Ok(ShapeStatTable { chi_grid, xi_grid, levels, pair_idx, s_values, iqr_basis })
    }

    pub fn n_pairs(&self) -> usize {
        self.pair_idx.len()
    }

    /// Evaluates the feasibility mask for per-pair shape-statistic intervals
    /// (one `ExtInterval` per pair, in pair order).
    pub fn feasibility(&self, cis: &[ExtInterval]) -> Result<Vec<bool>> {
        if cis.len() != self.pair_idx.len() {
            return Err(Error::LengthMismatch { expected: self.pair_idx.len(), got: cis.len() });
        }
        let n_levels = self.levels.len();
        let mask = self
            .s_values
            .par_chunks(n_levels)
            .zip(self.iqr_basis.par_iter())
            .map(|(s_cell, &iqr)| {
                self.pair_idx.iter().zip(cis.iter()).all(|(&(i1, i2), ci)| {
                    ci.contains((s_cell[i2] - s_cell[i1]) / iqr)
                })
            })
            .collect();
        Ok(mask)
    }
}

/// Joint confidence region for `(chi, xi)`: a grid cell is kept when every
/// pair's shape statistic falls inside its shape-statistic interval.
pub fn shape_region(
    sorted: &[f64],
    band: &ConfidenceBand,
    pairs: &PairSet,
    chi_cells: usize,
    xi_cells: usize,
) -> Result<ShapeRegion> {
    if chi_cells < 2 || xi_cells < 2 {
        return Err(Error::domain("need at least 2 cells per axis"));
    }
    let (chi_grid, xi_grid) = default_grids(chi_cells, xi_cells);
    let table = ShapeStatTable::new(chi_grid, xi_grid, pairs)?;
    shape_region_with_table(sorted, band, pairs, &table)
}

/// [`shape_region`] against a prebuilt table (the table must have been built
/// from the same pair collection).
pub fn shape_region_with_table(
    sorted: &[f64],
    band: &ConfidenceBand,
    pairs: &PairSet,
    table: &ShapeStatTable,
) -> Result<ShapeRegion> {
    let cis = pair_cis(sorted, band, pairs)?;
    let mask = table.feasibility(&cis)?;
    ShapeRegion::new(table.chi_grid.clone(), table.xi_grid.clone(), mask)
}

/// The per-pair shape-statistic intervals for a sample.
pub fn pair_cis(sorted: &[f64], band: &ConfidenceBand, pairs: &PairSet) -> Result<Vec<ExtInterval>> {
    pairs
        .pairs()
        .iter()
        .map(|&(u1, u2)| shape_stat_ci(sorted, band, u1, u2))
        .collect()
}
