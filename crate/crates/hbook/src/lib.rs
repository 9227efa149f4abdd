//! In-memory histograms and typed row buffers ("n-tuples") for event
//! processing pipelines.
//!
//! Everything in this crate is a plain value type: filling is `&mut self`,
//! nothing is thread-safe by itself. Concurrent producers are expected to
//! fill private partials and combine them with the `merge_from` methods,
//! which are deterministic: merging the same partials in the same order
//! always reproduces the same bytes.
//!
//! Conventions shared by both histogram types:
//!
//! * uniform binning only, bins are half-open `[edge_k, edge_k+1)`,
//! * values below the axis go to an underflow bin, values at or above the
//!   upper edge go to an overflow bin,
//! * NaN values are never binned; they are tallied in a separate counter so
//!   that no fill is ever silently dropped.

#![forbid(unsafe_code)]

mod h1;
mod h2;
mod ntuple;

pub use h1::{Hist1D, WStats};
pub use h2::{CellStats, Hist2D};
pub use ntuple::{Cell, ColType, NTuple};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Merge partners disagree on bin count or axis range.
    #[error("binning mismatch: {0}")]
    BinningMismatch(String),
    /// A row's arity or cell types do not match the n-tuple schema.
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    /// Mean or spread requested from a histogram with no in-range weight.
    #[error("histogram is empty")]
    EmptyHistogram,
}

/// Where a value lands on an axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinId {
    Underflow,
    /// In-range bin, counted from 0.
    Bin(u32),
    Overflow,
    /// Not binned at all; tallied separately.
    Nan,
}

/// A uniformly binned axis over `[lo, hi)`.
///
/// The bin for an in-range value is `floor((x - lo) * n_bins / (hi - lo))`,
/// clamped to the last bin to guard against the product rounding up to
/// `n_bins` for values just below `hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    n_bins: u32,
    lo: f64,
    hi: f64,
}

impl Axis {
    /// Panics if `n_bins` is zero or the range is not finite with `lo < hi`.
    pub fn new(n_bins: u32, lo: f64, hi: f64) -> Axis {
        assert!(n_bins >= 1, "axis needs at least one bin");
        assert!(
            lo.is_finite() && hi.is_finite() && lo < hi,
            "axis range must be finite with lo < hi"
        );
        Axis { n_bins, lo, hi }
    }

    pub fn n_bins(&self) -> u32 {
        self.n_bins
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Lower edge of bin `k`; `k == n_bins` gives the upper end of the axis.
    pub fn edge(&self, k: u32) -> f64 {
        debug_assert!(k <= self.n_bins);
        self.lo + (self.hi - self.lo) * k as f64 / self.n_bins as f64
    }

    pub fn center(&self, k: u32) -> f64 {
        debug_assert!(k < self.n_bins);
        self.lo + (self.hi - self.lo) * (k as f64 + 0.5) / self.n_bins as f64
    }

    /// ```
    /// use hbook::{Axis, BinId};
    /// let ax = Axis::new(100, 0.0, 10.0);
    /// assert_eq!(ax.index(3.14), BinId::Bin(31));
    /// assert_eq!(ax.index(0.0), BinId::Bin(0));
    /// assert_eq!(ax.index(10.0), BinId::Overflow);
    /// assert_eq!(ax.index(f64::NAN), BinId::Nan);
    /// ```
    pub fn index(&self, x: f64) -> BinId {
        if x.is_nan() {
            return BinId::Nan;
        }
        if x < self.lo {
            return BinId::Underflow;
        }
        if x >= self.hi {
            return BinId::Overflow;
        }
        let k = ((x - self.lo) * self.n_bins as f64 / (self.hi - self.lo)) as u32;
        BinId::Bin(k.min(self.n_bins - 1))
    }

    fn same_binning(&self, other: &Axis) -> bool {
        self.n_bins == other.n_bins && self.lo == other.lo && self.hi == other.hi
    }

    pub(crate) fn check_mergeable(&self, other: &Axis, what: &str) -> Result<(), Error> {
        if self.same_binning(other) {
            Ok(())
        } else {
            Err(Error::BinningMismatch(format!(
                "{what}: ({}, {}, {}) vs ({}, {}, {})",
                self.n_bins, self.lo, self.hi, other.n_bins, other.lo, other.hi
            )))
        }
    }
}
