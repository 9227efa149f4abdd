use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use flate2::bufread::MultiGzDecoder;

use crate::event::{GenEvent, GenParticle, GenVertex};
use crate::{Error, Result};

const START: &str = "HepMC::IO_GenEvent-START_EVENT_LISTING";
const END: &str = "HepMC::IO_GenEvent-END_EVENT_LISTING";

/// Streaming event reader for the ASCII listing format.
///
/// Yields events in file order. Auxiliary records it does not interpret
/// (run names, cross sections, PDF info, ...) are skipped and noted in
/// [`Reader::warnings`]; structural problems are hard errors carrying the
/// 1-based line number.
pub struct Reader<R> {
    src: R,
    line_no: usize,
    state: State,
    pushback: Option<String>,
    warnings: Vec<String>,
}

#[derive(PartialEq)]
enum State {
    Preamble,
    Events,
    Done,
}

/// Open a plain or gzip-compressed file; compression is sniffed from the
/// leading magic bytes, not the file name.
pub fn open(path: impl AsRef<Path>) -> std::io::Result<Reader<Box<dyn BufRead + Send>>> {
    let mut file = BufReader::new(File::open(path)?);
    let head = file.fill_buf()?;
    let gz = head.len() >= 2 && head[0] == 0x1f && head[1] == 0x8b;
    let src: Box<dyn BufRead + Send> = if gz {
        Box::new(BufReader::new(MultiGzDecoder::new(file)))
    } else {
        Box::new(file)
    };
    Ok(Reader::new(src))
}

impl<R: BufRead> Reader<R> {
    pub fn new(src: R) -> Reader<R> {
        Reader {
            src,
            line_no: 0,
            state: State::Preamble,
            pushback: None,
            warnings: Vec::new(),
        }
    }

    /// Notes about records that were skipped rather than parsed.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn take_warnings(&mut self) -> Vec<String> {
        std::mem::take(&mut self.warnings)
    }

    fn read_line(&mut self) -> Result<Option<String>> {
        if let Some(l) = self.pushback.take() {
            return Ok(Some(l));
        }
        let mut buf = String::new();
        let n = self.src.read_line(&mut buf).map_err(Error::Io)?;
        if n == 0 {
            return Ok(None);
        }
        self.line_no += 1;
        while buf.ends_with('\n') || buf.ends_with('\r') {
            buf.pop();
        }
        Ok(Some(buf))
    }

    pub fn next_event(&mut self) -> Option<Result<GenEvent>> {
        match self.next_event_inner() {
            Ok(ev) => ev.map(Ok),
            Err(e) => {
                self.state = State::Done;
                Some(Err(e))
            }
        }
    }

    fn next_event_inner(&mut self) -> Result<Option<GenEvent>> {
        if self.state == State::Preamble {
            loop {
                match self.read_line()? {
                    None => return Err(Error::NoEventListing),
                    Some(l) if l.trim() == START => break,
                    Some(_) => {}
                }
            }
            self.state = State::Events;
        }
        if self.state == State::Done {
            return Ok(None);
        }
        loop {
            let line = match self.read_line()? {
                None => return Err(Error::UnexpectedEof { line: self.line_no }),
                Some(l) => l,
            };
            if line.trim() == END {
                self.state = State::Done;
                return Ok(None);
            }
            if line.starts_with("E ") {
                return self.parse_event(line).map(Some);
            }
            if line.trim().is_empty() {
                continue;
            }
            return Err(Error::MalformedLine {
                line: self.line_no,
                reason: format!("expected an E record, found `{}`", snippet(&line)),
            });
        }
    }

    fn parse_event(&mut self, e_line: String) -> Result<GenEvent> {
        let mut t = Tokens::new(&e_line, self.line_no);
        t.tag("E")?;
        let event_number = t.i64("event number")?;
        let mpi = t.i64("mpi")?;
        let mut event_scale = t.f64("event scale")?;
        let alpha_qcd = t.f64("alpha_qcd")?;
        let alpha_qed = t.f64("alpha_qed")?;
        let signal_process_id = t.i64("signal process id")?;
        let signal_process_vertex = t.i64("signal vertex barcode")?;
        let num_vertices = t.usize("vertex count")?;
        let beam1 = t.i64("beam particle 1")?;
        let beam2 = t.i64("beam particle 2")?;
        let n_random = t.usize("random state count")?;
        let mut random_states = Vec::with_capacity(n_random);
        for _ in 0..n_random {
            random_states.push(t.i64("random state")?);
        }
        let n_weights = t.usize("weight count")?;
        let mut weights = Vec::with_capacity(n_weights);
        for _ in 0..n_weights {
            weights.push(t.f64("weight")?);
        }
        t.done()?;

        // GeV and mm unless the event says otherwise
        let mut mev = false;
        let mut cm = false;
        let mut vertices: Vec<GenVertex> = Vec::with_capacity(num_vertices);
        let mut vertex_barcodes = BTreeSet::new();
        let mut particle_barcodes = BTreeSet::new();

        while vertices.len() < num_vertices {
            let line = match self.read_line()? {
                None => return Err(Error::UnexpectedEof { line: self.line_no }),
                Some(l) => l,
            };
            let tag = line.split_ascii_whitespace().next().unwrap_or("");
            match tag {
                "U" => {
                    let mut t = Tokens::new(&line, self.line_no);
                    t.tag("U")?;
                    mev = match t.word("momentum unit")? {
                        "GEV" => false,
                        "MEV" => true,
                        other => {
                            return Err(Error::MalformedLine {
                                line: self.line_no,
                                reason: format!("unknown momentum unit `{other}`"),
                            })
                        }
                    };
                    cm = match t.word("length unit")? {
                        "MM" => false,
                        "CM" => true,
                        other => {
                            return Err(Error::MalformedLine {
                                line: self.line_no,
                                reason: format!("unknown length unit `{other}`"),
                            })
                        }
                    };
                }
                "N" | "C" | "H" | "F" | "W" => {
                    self.warnings.push(format!(
                        "line {}: skipped unhandled `{tag}` record",
                        self.line_no
                    ));
                }
                "V" => {
                    let v = self.parse_vertex(
                        &line,
                        &mut vertex_barcodes,
                        &mut particle_barcodes,
                    )?;
                    vertices.push(v);
                }
                _ => {
                    return Err(Error::MalformedLine {
                        line: self.line_no,
                        reason: format!(
                            "expected a vertex record ({} of {num_vertices} so far), found `{}`",
                            vertices.len(),
                            snippet(&line)
                        ),
                    })
                }
            }
        }

        if mev {
            event_scale /= 1000.0;
        }
        for v in &mut vertices {
            if cm {
                v.x *= 10.0;
                v.y *= 10.0;
                v.z *= 10.0;
                v.ctau *= 10.0;
            }
            if mev {
                for p in v.particles_in.iter_mut().chain(v.particles_out.iter_mut()) {
                    p.px /= 1000.0;
                    p.py /= 1000.0;
                    p.pz /= 1000.0;
                    p.energy /= 1000.0;
                    p.generated_mass /= 1000.0;
                }
            }
        }

        let event = GenEvent {
            event_number,
            mpi,
            event_scale,
            alpha_qcd,
            alpha_qed,
            signal_process_id,
            signal_process_vertex,
            beam_particles: (beam1, beam2),
            random_states,
            weights,
            vertices,
        };

        for p in event.particles() {
            if p.end_vertex != 0 && !vertex_barcodes.contains(&p.end_vertex) {
                return Err(Error::DanglingEndVertex {
                    particle: p.barcode,
                    vertex: p.end_vertex,
                });
            }
        }
        if event.signal_process_vertex != 0
            && !vertex_barcodes.contains(&event.signal_process_vertex)
        {
            self.warnings.push(format!(
                "event {}: signal process vertex {} not in event",
                event.event_number, event.signal_process_vertex
            ));
        }
        Ok(event)
    }

    fn parse_vertex(
        &mut self,
        line: &str,
        vertex_barcodes: &mut BTreeSet<i64>,
        particle_barcodes: &mut BTreeSet<i64>,
    ) -> Result<GenVertex> {
        let mut t = Tokens::new(line, self.line_no);
        t.tag("V")?;
        let barcode = t.i64("vertex barcode")?;
        if barcode >= 0 {
            return Err(Error::MalformedLine {
                line: self.line_no,
                reason: format!("vertex barcode {barcode} is not negative"),
            });
        }
        if !vertex_barcodes.insert(barcode) {
            return Err(Error::BarcodeClash {
                line: self.line_no,
                barcode,
            });
        }
        let id = t.i64("vertex id")?;
        let x = t.f64("x")?;
        let y = t.f64("y")?;
        let z = t.f64("z")?;
        let ctau = t.f64("ctau")?;
        let n_orphans = t.usize("orphan count")?;
        let n_out = t.usize("outgoing count")?;
        let n_weights = t.usize("vertex weight count")?;
        let mut weights = Vec::with_capacity(n_weights);
        for _ in 0..n_weights {
            weights.push(t.f64("vertex weight")?);
        }
        t.done()?;

        let mut particles_in = Vec::with_capacity(n_orphans);
        let mut particles_out = Vec::with_capacity(n_out);
        for i in 0..n_orphans + n_out {
            let line = match self.read_line()? {
                None => return Err(Error::UnexpectedEof { line: self.line_no }),
                Some(l) => l,
            };
            if !line.starts_with("P ") {
                return Err(Error::MalformedLine {
                    line: self.line_no,
                    reason: format!("expected a particle record, found `{}`", snippet(&line)),
                });
            }
            let p = self.parse_particle(&line, particle_barcodes)?;
            if i < n_orphans {
                // an orphan is listed under the vertex it flows into
                if p.end_vertex != barcode {
                    return Err(Error::MalformedLine {
                        line: self.line_no,
                        reason: format!(
                            "orphan particle {} ends at vertex {} but is listed under {barcode}",
                            p.barcode, p.end_vertex
                        ),
                    });
                }
                particles_in.push(p);
            } else {
                particles_out.push(p);
            }
        }

        Ok(GenVertex {
            barcode,
            id,
            x,
            y,
            z,
            ctau,
            weights,
            particles_in,
            particles_out,
        })
    }

    fn parse_particle(
        &mut self,
        line: &str,
        particle_barcodes: &mut BTreeSet<i64>,
    ) -> Result<GenParticle> {
        let mut t = Tokens::new(line, self.line_no);
        t.tag("P")?;
        let barcode = t.i64("particle barcode")?;
        if barcode <= 0 {
            return Err(Error::MalformedLine {
                line: self.line_no,
                reason: format!("particle barcode {barcode} is not positive"),
            });
        }
        if !particle_barcodes.insert(barcode) {
            return Err(Error::BarcodeClash {
                line: self.line_no,
                barcode,
            });
        }
        let pdg_id = t.i64("pdg id")?;
        let px = t.f64("px")?;
        let py = t.f64("py")?;
        let pz = t.f64("pz")?;
        let energy = t.f64("energy")?;
        let generated_mass = t.f64("mass")?;
        let status = t.i64("status")?;
        let theta = t.f64("polarization theta")?;
        let phi = t.f64("polarization phi")?;
        let end_vertex = t.i64("end vertex barcode")?;
        let n_flow = t.usize("flow count")?;
        let mut flow = Vec::with_capacity(n_flow);
        for _ in 0..n_flow {
            let idx = t.i64("flow index")?;
            let val = t.i64("flow value")?;
            flow.push((idx, val));
        }
        t.done()?;
        Ok(GenParticle {
            barcode,
            pdg_id,
            px,
            py,
            pz,
            energy,
            generated_mass,
            status,
            theta,
            phi,
            end_vertex,
            flow,
        })
    }
}

fn snippet(line: &str) -> &str {
    let line = line.trim();
    match line.char_indices().nth(40) {
        Some((i, _)) => &line[..i],
        None => line,
    }
}

/// Whitespace tokenizer that reports what it was looking for when a field
/// is missing or fails to parse.
struct Tokens<'a> {
    it: std::str::SplitAsciiWhitespace<'a>,
    line: usize,
}

impl<'a> Tokens<'a> {
    fn new(line: &'a str, line_no: usize) -> Tokens<'a> {
        Tokens {
            it: line.split_ascii_whitespace(),
            line: line_no,
        }
    }

    fn word(&mut self, what: &str) -> Result<&'a str> {
        self.it.next().ok_or_else(|| Error::MalformedLine {
            line: self.line,
            reason: format!("missing {what}"),
        })
    }

    fn tag(&mut self, expected: &str) -> Result<()> {
        let got = self.word("record tag")?;
        if got != expected {
            return Err(Error::MalformedLine {
                line: self.line,
                reason: format!("expected `{expected}` record, found `{got}`"),
            });
        }
        Ok(())
    }

    fn i64(&mut self, what: &str) -> Result<i64> {
        let w = self.word(what)?;
        w.parse().map_err(|_| Error::MalformedLine {
            line: self.line,
            reason: format!("bad {what} `{w}`"),
        })
    }

    fn usize(&mut self, what: &str) -> Result<usize> {
        let w = self.word(what)?;
        w.parse().map_err(|_| Error::MalformedLine {
            line: self.line,
            reason: format!("bad {what} `{w}`"),
        })
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        let w = self.word(what)?;
        w.parse().map_err(|_| Error::MalformedLine {
            line: self.line,
            reason: format!("bad {what} `{w}`"),
        })
    }

    fn done(&mut self) -> Result<()> {
        if let Some(extra) = self.it.next() {
            return Err(Error::MalformedLine {
                line: self.line,
                reason: format!("unexpected trailing field `{extra}`"),
            });
        }
        Ok(())
    }
}
