use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};

use hbook::{Cell, ColType, Hist1D, Hist2D, NTuple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Level {
    Debug,
    Info,
    Warning,
    Error,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Debug => "DEBUG",
            Level::Info => "INFO",
            Level::Warning => "WARNING",
            Level::Error => "ERROR",
        })
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Level> {
        match s.to_ascii_lowercase().as_str() {
            "debug" => Ok(Level::Debug),
            "info" => Ok(Level::Info),
            "warning" | "warn" => Ok(Level::Warning),
            "error" => Ok(Level::Error),
            other => Err(Error::Config(format!("unknown log level `{other}`"))),
        }
    }
}

/// Shared, threshold-filtered logger. Each record is formatted into one
/// buffer and written with a single call under the lock, so concurrent
/// tasks never interleave within a line.
#[derive(Clone)]
pub struct Logger {
    threshold: Level,
    sink: Arc<Mutex<Box<dyn Write + Send>>>,
}

impl Logger {
    pub fn stderr(threshold: Level) -> Logger {
        Logger::to_writer(threshold, Box::new(std::io::stderr()))
    }

    pub fn to_writer(threshold: Level, sink: Box<dyn Write + Send>) -> Logger {
        Logger {
            threshold,
            sink: Arc::new(Mutex::new(sink)),
        }
    }

    pub fn threshold(&self) -> Level {
        self.threshold
    }

    pub fn log(&self, level: Level, who: &str, event: Option<u64>, msg: &str) {
        if level < self.threshold {
            return;
        }
        let line = match event {
            Some(e) => format!("[{level}] {who} evt={e}: {msg}\n"),
            None => format!("[{level}] {who}: {msg}\n"),
        };
        // A failing log sink should not abort event processing.
        let mut w = self.sink.lock().unwrap();
        let _ = w.write_all(line.as_bytes());
        let _ = w.flush();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct H1Id(pub(crate) usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct H2Id(pub(crate) usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NtId(pub(crate) usize);

/// Histogram booking service. Tasks book during `configure` and fill through
/// their event context; the scheduler applies those fills in event order.
#[derive(Default)]
pub struct HistSvc {
    inner: Mutex<HistBook>,
}

#[derive(Default)]
struct HistBook {
    h1: Vec<(String, Hist1D)>,
    h2: Vec<(String, Hist2D)>,
}

impl HistSvc {
    pub fn book_h1(&self, name: &str, n_bins: u32, lo: f64, hi: f64) -> Result<H1Id> {
        let mut b = self.inner.lock().unwrap();
        if b.h1.iter().any(|(n, _)| n == name) {
            return Err(Error::DuplicateSink(name.to_string()));
        }
        b.h1.push((name.to_string(), Hist1D::new(n_bins, lo, hi)));
        Ok(H1Id(b.h1.len() - 1))
    }

    pub fn book_h2(
        &self,
        name: &str,
        nx: u32,
        lo_x: f64,
        hi_x: f64,
        ny: u32,
        lo_y: f64,
        hi_y: f64,
    ) -> Result<H2Id> {
        let mut b = self.inner.lock().unwrap();
        if b.h2.iter().any(|(n, _)| n == name) {
            return Err(Error::DuplicateSink(name.to_string()));
        }
        b.h2.push((
            name.to_string(),
            Hist2D::new(nx, lo_x, hi_x, ny, lo_y, hi_y),
        ));
        Ok(H2Id(b.h2.len() - 1))
    }

    pub(crate) fn apply_h1(&self, id: H1Id, x: f64, w: f64) {
        self.inner.lock().unwrap().h1[id.0].1.fill_w(x, w);
    }

    pub(crate) fn apply_h2(&self, id: H2Id, x: f64, y: f64, w: f64) {
        self.inner.lock().unwrap().h2[id.0].1.fill_w(x, y, w);
    }

    /// Snapshot of all 1D histograms in booking order.
    pub fn h1s(&self) -> Vec<(String, Hist1D)> {
        self.inner.lock().unwrap().h1.clone()
    }

    pub fn h2s(&self) -> Vec<(String, Hist2D)> {
        self.inner.lock().unwrap().h2.clone()
    }
}

/// Row-store booking service, same discipline as [`HistSvc`].
#[derive(Default)]
pub struct NtupleSvc {
    inner: Mutex<Vec<(String, NTuple)>>,
}

impl NtupleSvc {
    pub fn book(&self, name: &str, schema: Vec<(String, ColType)>) -> Result<NtId> {
        let mut b = self.inner.lock().unwrap();
        if b.iter().any(|(n, _)| n == name) {
            return Err(Error::DuplicateSink(name.to_string()));
        }
        b.push((name.to_string(), NTuple::new(schema)));
        Ok(NtId(b.len() - 1))
    }

    pub(crate) fn apply_row(
        &self,
        id: NtId,
        event_index: u64,
        cells: Vec<Cell>,
    ) -> std::result::Result<(), hbook::Error> {
        self.inner.lock().unwrap()[id.0].1.append(event_index, cells)
    }

    pub fn ntuples(&self) -> Vec<(String, NTuple)> {
        self.inner.lock().unwrap().clone()
    }
}

/// Shared services handed to lifecycle hooks.
pub struct Services {
    pub log: Logger,
    pub hists: HistSvc,
    pub ntuples: NtupleSvc,
}

impl Services {
    pub fn new(log: Logger) -> Services {
        Services {
            log,
            hists: HistSvc::default(),
            ntuples: NtupleSvc::default(),
        }
    }
}
