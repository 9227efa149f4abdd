use crate::{Axis, BinId, Error};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellStats {
    pub entries: u64,
    pub sum_w: f64,
    pub sum_w2: f64,
}

/// Two-dimensional histogram over a uniform grid.
///
/// Each axis has its own underflow and overflow margin, so the grid holds
/// `(n_x + 2) * (n_y + 2)` cells and out-of-range fills land in the margin
/// cells instead of being dropped. A NaN on either coordinate sends the fill
/// to the NaN tally.
#[derive(Debug, Clone, PartialEq)]
pub struct Hist2D {
    x: Axis,
    y: Axis,
    // x-major: index = gx * (n_y + 2) + gy, margins included.
    cells: Vec<CellStats>,
    nan_entries: u64,
}

impl Hist2D {
    pub fn new(n_x: u32, lo_x: f64, hi_x: f64, n_y: u32, lo_y: f64, hi_y: f64) -> Hist2D {
        let x = Axis::new(n_x, lo_x, hi_x);
        let y = Axis::new(n_y, lo_y, hi_y);
        let n = (n_x as usize + 2) * (n_y as usize + 2);
        Hist2D {
            x,
            y,
            cells: vec![CellStats::default(); n],
            nan_entries: 0,
        }
    }

    /// Rebuilds a histogram from its stored cells, for decoders. The cell
    /// vector must hold `(n_x + 2) * (n_y + 2)` entries in storage order.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        n_x: u32,
        lo_x: f64,
        hi_x: f64,
        n_y: u32,
        lo_y: f64,
        hi_y: f64,
        cells: Vec<CellStats>,
        nan_entries: u64,
    ) -> Result<Hist2D, Error> {
        let want = (n_x as usize + 2) * (n_y as usize + 2);
        if cells.len() != want {
            return Err(Error::BinningMismatch(format!(
                "{} cells, grid needs {}",
                cells.len(),
                want
            )));
        }
        Ok(Hist2D {
            x: Axis::new(n_x, lo_x, hi_x),
            y: Axis::new(n_y, lo_y, hi_y),
            cells,
            nan_entries,
        })
    }

    pub fn x_axis(&self) -> &Axis {
        &self.x
    }

    pub fn y_axis(&self) -> &Axis {
        &self.y
    }

    fn grid(id: BinId, n: u32) -> usize {
        match id {
            BinId::Underflow => 0,
            BinId::Bin(k) => k as usize + 1,
            BinId::Overflow => n as usize + 1,
            BinId::Nan => unreachable!("NaN handled before grid lookup"),
        }
    }

    pub fn fill(&mut self, x: f64, y: f64) {
        self.fill_w(x, y, 1.0);
    }

    pub fn fill_w(&mut self, x: f64, y: f64, w: f64) {
        let ix = self.x.index(x);
        let iy = self.y.index(y);
        if ix == BinId::Nan || iy == BinId::Nan {
            self.nan_entries += 1;
            return;
        }
        let gx = Self::grid(ix, self.x.n_bins());
        let gy = Self::grid(iy, self.y.n_bins());
        let cell = &mut self.cells[gx * (self.y.n_bins() as usize + 2) + gy];
        cell.entries += 1;
        cell.sum_w += w;
        cell.sum_w2 += w * w;
    }

    /// Cell at grid position `(gx, gy)` where 0 is the underflow margin and
    /// `n + 1` the overflow margin of each axis.
    pub fn cell(&self, gx: u32, gy: u32) -> &CellStats {
        &self.cells[gx as usize * (self.y.n_bins() as usize + 2) + gy as usize]
    }

    /// In-range cell `(kx, ky)`, both counted from 0.
    pub fn bin(&self, kx: u32, ky: u32) -> &CellStats {
        self.cell(kx + 1, ky + 1)
    }

    /// All cells in storage order (x-major, margins included).
    pub fn cells(&self) -> &[CellStats] {
        &self.cells
    }

    pub fn nan_entries(&self) -> u64 {
        self.nan_entries
    }

    pub fn entries(&self) -> u64 {
        self.cells.iter().map(|c| c.entries).sum::<u64>() + self.nan_entries
    }

    pub fn merge_from(&mut self, other: &Hist2D) -> Result<(), Error> {
        self.x.check_mergeable(&other.x, "Hist2D x axis")?;
        self.y.check_mergeable(&other.y, "Hist2D y axis")?;
        for (a, b) in self.cells.iter_mut().zip(&other.cells) {
            a.entries += b.entries;
            a.sum_w += b.sum_w;
            a.sum_w2 += b.sum_w2;
        }
        self.nan_entries += other.nan_entries;
        Ok(())
    }
}
