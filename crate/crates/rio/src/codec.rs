//! Payload encodings, version 1 for every type. Layouts are pinned in
//! FORMAT.md; keep the two in lockstep.

use hbook::{Cell, CellStats, ColType, Hist1D, Hist2D, NTuple, WStats};

use crate::{Error, Object, Result, TAG_HIST1D, TAG_HIST2D, TAG_NTUPLE};

const COL_I64: u8 = 0;
const COL_F64: u8 = 1;
const COL_STR: u8 = 2;

pub fn encode(obj: &Object) -> (u32, u32, Vec<u8>) {
    match obj {
        Object::H1(h) => (TAG_HIST1D, 1, encode_h1(h)),
        Object::H2(h) => (TAG_HIST2D, 1, encode_h2(h)),
        Object::Nt(nt) => (TAG_NTUPLE, 1, encode_nt(nt)),
    }
}

pub fn decode(tag: u32, version: u32, payload: &[u8]) -> Result<Object> {
    let decoder = match (tag, version) {
        (TAG_HIST1D, 1) => decode_h1,
        (TAG_HIST2D, 1) => decode_h2,
        (TAG_NTUPLE, 1) => decode_nt,
        (TAG_HIST1D | TAG_HIST2D | TAG_NTUPLE, v) => {
            return Err(Error::UnknownVersion {
                type_tag: tag,
                version: v,
            })
        }
        (t, _) => return Err(Error::UnknownTypeTag(t)),
    };
    let mut cur = Cur {
        b: payload,
        off: 0,
    };
    let obj = decoder(&mut cur)?;
    if cur.off != payload.len() {
        return Err(Error::Malformed(format!(
            "payload has {} trailing bytes",
            payload.len() - cur.off
        )));
    }
    Ok(obj)
}

fn encode_h1(h: &Hist1D) -> Vec<u8> {
    let ax = h.axis();
    let mut out = Vec::with_capacity(28 + 40 * h.slots().len());
    put_u32(&mut out, ax.n_bins());
    put_f64(&mut out, ax.lo());
    put_f64(&mut out, ax.hi());
    for s in h.slots() {
        put_u64(&mut out, s.entries);
        put_f64(&mut out, s.sum_w);
        put_f64(&mut out, s.sum_w2);
        put_f64(&mut out, s.sum_wx);
        put_f64(&mut out, s.sum_wx2);
    }
    put_u64(&mut out, h.nan_entries());
    out
}

fn decode_h1(c: &mut Cur) -> Result<Object> {
    let n_bins = c.u32()?;
    let lo = c.f64()?;
    let hi = c.f64()?;
    check_axis(n_bins, lo, hi)?;
    let n_slots = n_bins as usize + 2;
    if n_slots > c.remaining() / 40 {
        return Err(Error::Malformed("slot count exceeds payload".into()));
    }
    let mut slots = Vec::with_capacity(n_slots);
    for _ in 0..n_slots {
        slots.push(WStats {
            entries: c.u64()?,
            sum_w: c.f64()?,
            sum_w2: c.f64()?,
            sum_wx: c.f64()?,
            sum_wx2: c.f64()?,
        });
    }
    let nan_entries = c.u64()?;
    Hist1D::from_parts(n_bins, lo, hi, slots, nan_entries)
        .map(Object::H1)
        .map_err(|e| Error::Malformed(e.to_string()))
}

fn encode_h2(h: &Hist2D) -> Vec<u8> {
    let (x, y) = (h.x_axis(), h.y_axis());
    let mut out = Vec::with_capacity(48 + 24 * h.cells().len());
    put_u32(&mut out, x.n_bins());
    put_f64(&mut out, x.lo());
    put_f64(&mut out, x.hi());
    put_u32(&mut out, y.n_bins());
    put_f64(&mut out, y.lo());
    put_f64(&mut out, y.hi());
    for cell in h.cells() {
        put_u64(&mut out, cell.entries);
        put_f64(&mut out, cell.sum_w);
        put_f64(&mut out, cell.sum_w2);
    }
    put_u64(&mut out, h.nan_entries());
    out
}

fn decode_h2(c: &mut Cur) -> Result<Object> {
    let n_x = c.u32()?;
    let lo_x = c.f64()?;
    let hi_x = c.f64()?;
    let n_y = c.u32()?;
    let lo_y = c.f64()?;
    let hi_y = c.f64()?;
    check_axis(n_x, lo_x, hi_x)?;
    check_axis(n_y, lo_y, hi_y)?;
    let n_cells = (n_x as usize + 2) * (n_y as usize + 2);
    if n_cells > c.remaining() / 24 {
        return Err(Error::Malformed("cell count exceeds payload".into()));
    }
    let mut cells = Vec::with_capacity(n_cells);
    for _ in 0..n_cells {
        cells.push(CellStats {
            entries: c.u64()?,
            sum_w: c.f64()?,
            sum_w2: c.f64()?,
        });
    }
    let nan_entries = c.u64()?;
    Hist2D::from_parts(n_x, lo_x, hi_x, n_y, lo_y, hi_y, cells, nan_entries)
        .map(Object::H2)
        .map_err(|e| Error::Malformed(e.to_string()))
}

fn encode_nt(nt: &NTuple) -> Vec<u8> {
    let mut out = Vec::new();
    put_u32(&mut out, nt.schema().len() as u32);
    for (name, ty) in nt.schema() {
        put_str(&mut out, name);
        out.push(match ty {
            ColType::I64 => COL_I64,
            ColType::F64 => COL_F64,
            ColType::Str => COL_STR,
        });
    }
    put_u64(&mut out, nt.n_rows() as u64);
    for (_, row) in nt.rows() {
        for cell in row {
            match cell {
                Cell::I64(v) => out.extend_from_slice(&v.to_le_bytes()),
                Cell::F64(v) => put_f64(&mut out, *v),
                Cell::Str(s) => put_str(&mut out, s),
            }
        }
    }
    out
}

fn decode_nt(c: &mut Cur) -> Result<Object> {
    let n_cols = c.u32()? as usize;
    let mut schema = Vec::with_capacity(n_cols.min(1024));
    for _ in 0..n_cols {
        let name = c.string()?;
        let ty = match c.u8()? {
            COL_I64 => ColType::I64,
            COL_F64 => ColType::F64,
            COL_STR => ColType::Str,
            t => return Err(Error::Malformed(format!("unknown column type {t}"))),
        };
        schema.push((name, ty));
    }
    let n_rows = c.u64()? as usize;
    let mut rows = Vec::new();
    for _ in 0..n_rows {
        let mut row = Vec::with_capacity(schema.len());
        for (_, ty) in &schema {
            row.push(match ty {
                ColType::I64 => Cell::I64(i64::from_le_bytes(c.fixed::<8>()?)),
                ColType::F64 => Cell::F64(c.f64()?),
                ColType::Str => Cell::Str(c.string()?),
            });
        }
        rows.push(row);
    }
    NTuple::from_rows(schema, rows)
        .map(Object::Nt)
        .map_err(|e| Error::Malformed(e.to_string()))
}

fn check_axis(n: u32, lo: f64, hi: f64) -> Result<()> {
    if n == 0 || !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::Malformed(format!("bad axis ({n}, {lo}, {hi})")));
    }
    Ok(())
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    put_u32(out, s.len() as u32);
    out.extend_from_slice(s.as_bytes());
}

struct Cur<'a> {
    b: &'a [u8],
    off: usize,
}

impl Cur<'_> {
    fn remaining(&self) -> usize {
        self.b.len() - self.off
    }

    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.remaining() < n {
            return Err(Error::Malformed("payload exhausted".into()));
        }
        let s = &self.b[self.off..self.off + n];
        self.off += n;
        Ok(s)
    }

    fn fixed<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.fixed::<4>()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.fixed::<8>()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.fixed::<8>()?))
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        String::from_utf8(self.take(len)?.to_vec())
            .map_err(|_| Error::Malformed("string is not UTF-8".into()))
    }
}
