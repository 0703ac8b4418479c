//! Intervals over the extended reals.

/// A closed interval over the extended reals, possibly empty.
///
/// Endpoints may be `-inf`/`+inf`. This is the universal return type for
/// one-dimensional confidence sets: band inversion can legitimately produce
/// unbounded rays, all of the line, or the empty set (model misspecification),
/// and all of those are ordinary values here rather than errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtInterval {
    lo: f64,
    hi: f64,
    empty: bool,
}

impl ExtInterval {
    /// Closed interval `[lo, hi]`. Returns the empty interval when `lo > hi`
    /// or either endpoint is NaN.
    pub fn new(lo: f64, hi: f64) -> Self {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            Self::empty()
        } else {
            ExtInterval { lo, hi, empty: false }
        }
    }

    pub const fn empty() -> Self {
        ExtInterval { lo: f64::NAN, hi: f64::NAN, empty: true }
    }

    /// The whole extended real line.
    pub const fn all() -> Self {
        ExtInterval { lo: f64::NEG_INFINITY, hi: f64::INFINITY, empty: false }
    }

    pub fn point(x: f64) -> Self {
        Self::new(x, x)
    }

    /// Ray `(-inf, hi]`.
    pub fn at_most(hi: f64) -> Self {
        Self::new(f64::NEG_INFINITY, hi)
    }

    /// Ray `[lo, +inf)`.
    pub fn at_least(lo: f64) -> Self {
        Self::new(lo, f64::INFINITY)
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    /// `(lo, hi)` when non-empty.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        if self.empty {
            None
        } else {
            Some((self.lo, self.hi))
        }
    }

    /// Lower endpoint; NaN when empty.
    pub fn lo(&self) -> f64 {
        self.lo
    }

    /// Upper endpoint; NaN when empty.
    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Closed-interval membership. The empty interval contains nothing.
    pub fn contains(&self, x: f64) -> bool {
        !self.empty && self.lo <= x && x <= self.hi
    }

    pub fn intersect(&self, other: &ExtInterval) -> ExtInterval {
        if self.empty || other.empty {
            return ExtInterval::empty();
        }
        ExtInterval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    /// `hi - lo`; `0` for the empty interval, `+inf` when unbounded.
    pub fn width(&self) -> f64 {
        if self.empty {
            0.0
        } else {
            self.hi - self.lo
        }
    }

    pub fn is_bounded(&self) -> bool {
        !self.empty && self.lo.is_finite() && self.hi.is_finite()
    }
}
