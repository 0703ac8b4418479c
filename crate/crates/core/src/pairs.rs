//! Collections of probability pairs `(u1, u2)` whose quantile-range
//! constraints define the joint shape region.
//!
//! Three constructions: the Rivera-Walther multiscale lattice (size O(n)),
//! the full grid of combinations over `k` roughly equispaced levels, and the
//! edge-focused subset of the grid. The edge subset keeps only constraints
//! near the ends of [0,1], where the extreme order statistics carry most of
//! the information about tail shape.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// How a pair set was built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSetKind {
    Rw,
    Grid(usize),
    Edge(usize),
    Custom,
}

/// A duplicate-free list of probability pairs with `1 >= u1 > u2 >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSet {
    pairs: Vec<(f64, f64)>,
    pub kind: PairSetKind,
}

impl PairSet {
    /// Wraps explicit pairs, checking ordering and rejecting duplicates.
    pub fn custom(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::domain("pair set must be nonempty"));
        }
        let mut seen = BTreeSet::new();
        for &(u1, u2) in &pairs {
            if !(u1 > u2) || !(0.0..=1.0).contains(&u1) || !(0.0..=1.0).contains(&u2) {
                return Err(Error::domain(format!("invalid pair ({u1}, {u2})")));
            }
            if !seen.insert((u1.to_bits(), u2.to_bits())) {
                return Err(Error::domain(format!("duplicate pair ({u1}, {u2})")));
            }
        }
        Ok(PairSet { pairs, kind: PairSetKind::Custom })
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// The Rivera-Walther multiscale pair collection on the order-statistic
/// lattice.
///
/// For levels `l = 2..l_max` with `l_max = floor(log2(n / ln n))`, window
/// `m_l = n 2^-l`, and stride `d_l = ceil(m_l / (6 sqrt(l)))`, the pairs are
/// `(k/n, j/n)` over lattice indices `j, k in {1 + i d_l}` with
/// `m_l < k - j < 2 m_l` and `k <= n`. The union over levels has O(n) size.
pub fn pairs_rw(n: usize) -> Result<PairSet> {
    let nf = n as f64;
    let l_max = (nf / nf.ln()).log2().floor() as i64;
    if n < 2 || l_max < 2 {
        return Err(Error::domain(format!("n = {n} is too small for any valid level")));
    }
    let mut index_pairs: BTreeSet<(u64, u64)> = BTreeSet::new();
    for l in 2..=l_max {
        let m = nf * 0.5f64.powi(l as i32);
        let d = (m / (6.0 * (l as f64).sqrt())).ceil().max(1.0) as u64;
        let mut k = 1u64;
        while k <= n as u64 {
            let mut j = 1u64;
            while j < k {
                let gap = (k - j) as f64;
                if gap > m && gap < 2.0 * m {
                    index_pairs.insert((k, j));
                }
                j += d;
            }
            k += d;
        }
    }
    if index_pairs.is_empty() {
        return Err(Error::domain(format!("n = {n} produced an empty pair collection")));
    }
    let pairs = index_pairs
        .into_iter()
        .map(|(k, j)| (k as f64 / nf, j as f64 / nf))
        .collect();
    Ok(PairSet { pairs, kind: PairSetKind::Rw })
}

fn grid_levels(n: usize, k: usize) -> Result<Vec<f64>> {
    if k < 2 || k > n.saturating_sub(1) {
        return Err(Error::domain(format!("need 2 <= k <= n-1, got k={k}, n={n}")));
    }
    let nf = n as f64;
    let mut seq: Vec<f64> = (1..=k)
        .map(|i| (((n - 1) * i) as f64 / k as f64).floor() / nf)
        .collect();
    seq.dedup();
    if seq.len() < 2 {
        return Err(Error::Degenerate(format!("grid for n={n}, k={k} has fewer than 2 distinct levels")));
    }
    Ok(seq)
}

/// All pairs `u1 > u2` drawn from `k` roughly equispaced band levels
/// `floor((n-1) i / k) / n`, `i = 1..k`.
pub fn pairs_grid(n: usize, k: usize) -> Result<PairSet> {
    let seq = grid_levels(n, k)?;
    let mut pairs = Vec::new();
    for (b, &u1) in seq.iter().enumerate() {
        for &u2 in &seq[..b] {
            pairs.push((u1, u2));
        }
    }
    Ok(PairSet { pairs, kind: PairSetKind::Grid(k) })
}

/// The subset of [`pairs_grid`] with `u1 <= 2/k` or `u2 >= 1 - 2/k`:
/// constraints concentrated at the edges of the unit interval.
pub fn pairs_edge(n: usize, k: usize) -> Result<PairSet> {
    let grid = pairs_grid(n, k)?;
    let cut = 2.0 / k as f64;
    let pairs: Vec<(f64, f64)> = grid
        .pairs
        .into_iter()
        .filter(|&(u1, u2)| u1 <= cut || u2 >= 1.0 - cut)
        .collect();
    if pairs.is_empty() {
        return Err(Error::Degenerate(format!("edge set for n={n}, k={k} is empty")));
    }
    Ok(PairSet { pairs, kind: PairSetKind::Edge(k) })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent enumeration straight from the definition.
    fn rw_brute_force(n: usize) -> BTreeSet<(u64, u64)> {
        let nf = n as f64;
        let l_max = (nf / nf.ln()).log2().floor() as i64;
        let mut set = BTreeSet::new();
        for l in 2..=l_max {
            let m = nf / 2f64.powi(l as i32);
            let d = (m / (6.0 * (l as f64).sqrt())).ceil() as u64;
            for k in 1..=(n as u64) {
                for j in 1..k {
                    let on_lattice = (k - 1) % d == 0 && (j - 1) % d == 0;
                    let gap = (k - j) as f64;
                    if on_lattice && gap > m && gap < 2.0 * m {
                        set.insert((k, j));
                    }
                }
            }
        }
        set
    }

    #[test]
    fn rw_small_case() {
        // n = 16: single level l = 2 with m = 4, d = 1, so the pairs are all
        // (k/16, j/16) with 4 < k - j < 8.
        let ps = pairs_rw(16).unwrap();
        assert_eq!(ps.len(), 30);
        for &(u1, u2) in ps.pairs() {
            let k = (u1 * 16.0).round() as i64;
            let j = (u2 * 16.0).round() as i64;
            assert!(k - j > 4 && k - j < 8, "({k},{j})");
            assert!(k <= 16 && j >= 1);
        }
        let brute = rw_brute_force(16);
        assert_eq!(ps.len(), brute.len());
    }

    #[test]
    fn rw_matches_brute_force() {
        for n in [16, 33, 64, 100, 123, 256] {
            let ps = pairs_rw(n).unwrap();
            let brute = rw_brute_force(n);
            let got: BTreeSet<(u64, u64)> = ps
                .pairs()
                .iter()
                .map(|&(u1, u2)| {
                    (
                        (u1 * n as f64).round() as u64,
                        (u2 * n as f64).round() as u64,
                    )
                })
                .collect();
            assert_eq!(got, brute, "n = {n}");
        }
    }

    #[test]
    fn rw_subquadratic_growth() {
        for n in [64usize, 128, 256] {
            let a = pairs_rw(n).unwrap().len() as f64;
            let b = pairs_rw(2 * n).unwrap().len() as f64;
            assert!(b / a <= 3.0, "n={n}: {a} -> {b}");
        }
    }

    #[test]
    fn rw_pairs_are_valid() {
        for n in [16, 50, 200] {
            for &(u1, u2) in pairs_rw(n).unwrap().pairs() {
                assert!(0.0 < u2 && u2 < u1 && u1 <= 1.0);
            }
        }
        assert!(pairs_rw(4).is_err());
    }

    #[test]
    fn grid_counts_and_edge_subset() {
        let n = 500;
        let k = 17;
        let grid = pairs_grid(n, k).unwrap();
        let distinct = grid_levels(n, k).unwrap().len();
        assert_eq!(grid.len(), distinct * (distinct - 1) / 2);

        let edge = pairs_edge(n, k).unwrap();
        assert!(edge.len() < grid.len());
        let grid_set: BTreeSet<(u64, u64)> = grid
            .pairs()
            .iter()
            .map(|&(a, b)| (a.to_bits(), b.to_bits()))
            .collect();
        for &(a, b) in edge.pairs() {
            assert!(grid_set.contains(&(a.to_bits(), b.to_bits())));
            assert!(a <= 2.0 / k as f64 || b >= 1.0 - 2.0 / k as f64);
        }
        assert!(pairs_grid(10, 1).is_err());
        assert!(pairs_grid(10, 10).is_err());
    }

    #[test]
    fn custom_rejects_bad_pairs() {
        assert!(PairSet::custom(vec![]).is_err());
        assert!(PairSet::custom(vec![(0.2, 0.4)]).is_err());
        assert!(PairSet::custom(vec![(0.4, 0.2), (0.4, 0.2)]).is_err());
        assert!(PairSet::custom(vec![(0.4, 0.2), (0.9, 0.1)]).is_ok());
    }
}
