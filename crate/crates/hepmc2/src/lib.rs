//! Reader and writer for the plain-text event listing format produced by
//! many Monte Carlo generators (the `IO_GenEvent` ASCII flavor).
//!
//! Events are parsed into an owned [`GenEvent`] tree: vertices in file
//! order, each holding its orphan incoming particles and its outgoing
//! particles. Momenta are normalized to GeV and positions to mm regardless
//! of the units the file declares. Gzip-compressed files are handled
//! transparently by [`open`], which sniffs the magic bytes rather than
//! trusting the extension.
//!
//! The parser is strict about structure (counts, barcode signs and
//! uniqueness, end-vertex references) and lenient about content it does not
//! need: auxiliary records such as cross sections or PDF info are skipped
//! and reported through [`Reader::warnings`].

mod event;
mod reader;
mod writer;

pub use event::{GenEvent, GenParticle, GenVertex};
pub use reader::{open, Reader};
pub use writer::Writer;

use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum Error {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("no event listing found in input")]
    NoEventListing,
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: barcode {barcode} already used in this event")]
    BarcodeClash { line: usize, barcode: i64 },
    #[error("particle {particle} ends at vertex {vertex}, which does not exist")]
    DanglingEndVertex { particle: i64, vertex: i64 },
    #[error("unexpected end of input after line {line}")]
    UnexpectedEof { line: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
