use crate::{Axis, BinId, Error};

/// Weighted accumulator for one bin.
///
/// `sum_wx` and `sum_wx2` keep the first two weighted moments of the fill
/// values so mean and spread can be computed without the raw stream.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WStats {
    pub entries: u64,
    pub sum_w: f64,
    pub sum_w2: f64,
    pub sum_wx: f64,
    pub sum_wx2: f64,
}

impl WStats {
    fn add(&mut self, x: f64, w: f64) {
        self.entries += 1;
        self.sum_w += w;
        self.sum_w2 += w * w;
        self.sum_wx += w * x;
        self.sum_wx2 += w * x * x;
    }

    fn add_stats(&mut self, o: &WStats) {
        self.entries += o.entries;
        self.sum_w += o.sum_w;
        self.sum_w2 += o.sum_w2;
        self.sum_wx += o.sum_wx;
        self.sum_wx2 += o.sum_wx2;
    }
}

/// One-dimensional histogram with uniform bins plus underflow and overflow.
///
/// Every fill lands somewhere: an in-range bin, underflow, overflow, or the
/// NaN tally. The sum of all those entry counts always equals the number of
/// fill calls.
///
/// ```
/// use hbook::Hist1D;
/// let mut h = Hist1D::new(100, 0.0, 10.0);
/// h.fill(3.14);
/// h.fill_w(3.15, 2.0);
/// assert_eq!(h.bin(31).entries, 2);
/// assert_eq!(h.entries(), 2);
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct Hist1D {
    axis: Axis,
    // n_bins + 2 slots: underflow first, overflow last.
    bins: Vec<WStats>,
    nan_entries: u64,
}

impl Hist1D {
    pub fn new(n_bins: u32, lo: f64, hi: f64) -> Hist1D {
        let axis = Axis::new(n_bins, lo, hi);
        Hist1D {
            axis,
            bins: vec![WStats::default(); n_bins as usize + 2],
            nan_entries: 0,
        }
    }

    /// Rebuilds a histogram from its stored slots, for decoders. The slot
    /// vector must hold `n_bins + 2` entries in storage order.
    pub fn from_parts(
        n_bins: u32,
        lo: f64,
        hi: f64,
        slots: Vec<WStats>,
        nan_entries: u64,
    ) -> Result<Hist1D, Error> {
        if slots.len() != n_bins as usize + 2 {
            return Err(Error::BinningMismatch(format!(
                "{} slots for {} bins",
                slots.len(),
                n_bins
            )));
        }
        Ok(Hist1D {
            axis: Axis::new(n_bins, lo, hi),
            bins: slots,
            nan_entries,
        })
    }

    pub fn axis(&self) -> &Axis {
        &self.axis
    }

    pub fn bin_index(&self, x: f64) -> BinId {
        self.axis.index(x)
    }

    pub fn fill(&mut self, x: f64) {
        self.fill_w(x, 1.0);
    }

    pub fn fill_w(&mut self, x: f64, w: f64) {
        match self.axis.index(x) {
            BinId::Nan => self.nan_entries += 1,
            BinId::Underflow => self.bins[0].add(x, w),
            BinId::Overflow => {
                let last = self.bins.len() - 1;
                self.bins[last].add(x, w);
            }
            BinId::Bin(k) => self.bins[k as usize + 1].add(x, w),
        }
    }

    /// In-range bin `k`, counted from 0.
    pub fn bin(&self, k: u32) -> &WStats {
        &self.bins[k as usize + 1]
    }

    pub fn underflow(&self) -> &WStats {
        &self.bins[0]
    }

    pub fn overflow(&self) -> &WStats {
        &self.bins[self.bins.len() - 1]
    }

    /// All slots in storage order: underflow, in-range bins, overflow.
    pub fn slots(&self) -> &[WStats] {
        &self.bins
    }

    pub fn nan_entries(&self) -> u64 {
        self.nan_entries
    }

    /// Total number of fill calls, including out-of-range and NaN fills.
    pub fn entries(&self) -> u64 {
        self.bins.iter().map(|b| b.entries).sum::<u64>() + self.nan_entries
    }

    fn in_range_sums(&self) -> (f64, f64, f64) {
        let n = self.axis.n_bins() as usize;
        let mut sw = 0.0;
        let mut swx = 0.0;
        let mut swx2 = 0.0;
        for b in &self.bins[1..=n] {
            sw += b.sum_w;
            swx += b.sum_wx;
            swx2 += b.sum_wx2;
        }
        (sw, swx, swx2)
    }

    /// Weighted mean of the in-range fills.
    pub fn mean(&self) -> Result<f64, Error> {
        let (sw, swx, _) = self.in_range_sums();
        if sw <= 0.0 {
            return Err(Error::EmptyHistogram);
        }
        Ok(swx / sw)
    }

    /// Weighted standard deviation of the in-range fills. The variance is
    /// clamped at zero before the square root.
    pub fn stddev(&self) -> Result<f64, Error> {
        let (sw, swx, swx2) = self.in_range_sums();
        if sw <= 0.0 {
            return Err(Error::EmptyHistogram);
        }
        let mean = swx / sw;
        Ok((swx2 / sw - mean * mean).max(0.0).sqrt())
    }

    /// Adds `other` into `self` slot by slot.
    ///
    /// Merging partials in a fixed order is bit-for-bit reproducible, which
    /// is what commit pipelines rely on.
    pub fn merge_from(&mut self, other: &Hist1D) -> Result<(), Error> {
        self.axis.check_mergeable(&other.axis, "Hist1D")?;
        for (a, b) in self.bins.iter_mut().zip(&other.bins) {
            a.add_stats(b);
        }
        self.nan_entries += other.nan_entries;
        Ok(())
    }
}
