//! Checksummed binary record files for histograms and n-tuples.
//!
//! A file starts with the magic bytes `RIO1` and holds a flat sequence of
//! named records, each carrying one serialized object and a CRC-32 over its
//! payload. The byte layout is pinned in `FORMAT.md` next to this crate;
//! everything is little-endian and the encoding is a pure function of the
//! object, so equal objects written in equal order give identical files.
//!
//! ```
//! use hbook::Hist1D;
//! use rio::{Object, Reader, Writer};
//!
//! let mut h = Hist1D::new(10, 0.0, 1.0);
//! h.fill(0.25);
//!
//! let mut buf = Vec::new();
//! let mut w = Writer::new(&mut buf).unwrap();
//! w.write("pt", &Object::H1(h.clone())).unwrap();
//!
//! let mut r = Reader::new(buf.as_slice()).unwrap();
//! let (name, obj) = r.next_record().unwrap().unwrap();
//! assert_eq!(name, "pt");
//! assert_eq!(obj, Object::H1(h));
//! ```

#![forbid(unsafe_code)]

mod codec;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use hbook::{Hist1D, Hist2D, NTuple};
use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"RIO1";

pub const TAG_HIST1D: u32 = 1;
pub const TAG_HIST2D: u32 = 2;
pub const TAG_NTUPLE: u32 = 3;

#[derive(Debug, Error)]
pub enum Error {
    #[error("not a rio file: bad magic")]
    BadMagic,
    #[error("checksum mismatch in record `{name}`")]
    CrcMismatch { name: String },
    #[error("unknown record type tag {0}")]
    UnknownTypeTag(u32),
    #[error("unknown version {version} for type tag {type_tag}")]
    UnknownVersion { type_tag: u32, version: u32 },
    #[error("file truncated inside a record")]
    TruncatedRecord,
    #[error("malformed record: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// One persistable object.
#[derive(Debug, Clone, PartialEq)]
pub enum Object {
    H1(Hist1D),
    H2(Hist2D),
    Nt(NTuple),
}

impl From<Hist1D> for Object {
    fn from(h: Hist1D) -> Object {
        Object::H1(h)
    }
}

impl From<Hist2D> for Object {
    fn from(h: Hist2D) -> Object {
        Object::H2(h)
    }
}

impl From<NTuple> for Object {
    fn from(nt: NTuple) -> Object {
        Object::Nt(nt)
    }
}

pub struct Writer<W: Write> {
    w: W,
}

impl Writer<BufWriter<File>> {
    pub fn create<P: AsRef<Path>>(path: P) -> Result<Self> {
        Writer::new(BufWriter::new(File::create(path)?))
    }
}

impl<W: Write> Writer<W> {
    /// Writes the magic immediately; a fresh file with no records is valid.
    pub fn new(mut w: W) -> Result<Self> {
        w.write_all(&MAGIC)?;
        Ok(Writer { w })
    }

    /// Appends one record. The name is stored verbatim.
    pub fn write(&mut self, name: &str, obj: &Object) -> Result<()> {
        let (tag, version, payload) = codec::encode(obj);
        let crc = crc32fast::hash(&payload);
        self.w.write_all(&(name.len() as u32).to_le_bytes())?;
        self.w.write_all(name.as_bytes())?;
        self.w.write_all(&tag.to_le_bytes())?;
        self.w.write_all(&version.to_le_bytes())?;
        self.w.write_all(&(payload.len() as u64).to_le_bytes())?;
        self.w.write_all(&payload)?;
        self.w.write_all(&crc.to_le_bytes())?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.w.flush()?;
        Ok(self.w)
    }
}

pub struct Reader<R: Read> {
    r: R,
}

impl Reader<BufReader<File>> {
    pub fn open<P: AsRef<Path>>(path: P) -> Result<Self> {
        Reader::new(BufReader::new(File::open(path)?))
    }
}

impl<R: Read> Reader<R> {
    pub fn new(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        match fill(&mut r, &mut magic) {
            Ok(Some(())) if magic == MAGIC => Ok(Reader { r }),
            // Missing, short, or wrong magic: not a rio file.
            Ok(_) | Err(Error::TruncatedRecord) => Err(Error::BadMagic),
            Err(e) => Err(e),
        }
    }

    /// Next record, or `None` at a clean end of file. An end of file inside
    /// a record is `TruncatedRecord`, never a silent stop.
    pub fn next_record(&mut self) -> Result<Option<(String, Object)>> {
        let mut len4 = [0u8; 4];
        if fill(&mut self.r, &mut len4)?.is_none() {
            return Ok(None);
        }
        let name_len = u32::from_le_bytes(len4) as u64;
        let name = String::from_utf8(self.exactly(name_len)?)
            .map_err(|_| Error::Malformed("record name is not UTF-8".into()))?;
        let tag = u32::from_le_bytes(self.fixed::<4>()?);
        let version = u32::from_le_bytes(self.fixed::<4>()?);
        let payload_len = u64::from_le_bytes(self.fixed::<8>()?);
        let payload = self.exactly(payload_len)?;
        let crc_stored = u32::from_le_bytes(self.fixed::<4>()?);
        if crc32fast::hash(&payload) != crc_stored {
            return Err(Error::CrcMismatch { name });
        }
        let obj = codec::decode(tag, version, &payload)?;
        Ok(Some((name, obj)))
    }

    fn exactly(&mut self, n: u64) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        let got = (&mut self.r).take(n).read_to_end(&mut buf)?;
        if got as u64 != n {
            return Err(Error::TruncatedRecord);
        }
        Ok(buf)
    }

    fn fixed<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        fill(&mut self.r, &mut buf)?.ok_or(Error::TruncatedRecord)?;
        Ok(buf)
    }

    /// Reads every remaining record.
    pub fn read_all(&mut self) -> Result<Vec<(String, Object)>> {
        let mut out = Vec::new();
        while let Some(rec) = self.next_record()? {
            out.push(rec);
        }
        Ok(out)
    }
}

/// Fills `buf` completely. `Ok(None)` only when not a single byte could be
/// read; a partial read is a truncation, reported by the caller.
fn fill<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<Option<()>> {
    let mut off = 0;
    while off < buf.len() {
        let n = r.read(&mut buf[off..])?;
        if n == 0 {
            if off == 0 {
                return Ok(None);
            }
            return Err(Error::TruncatedRecord);
        }
        off += n;
    }
    Ok(Some(()))
}
