use std::io::{self, Write};

use crate::event::GenEvent;

/// Event writer for the ASCII listing format.
///
/// Always writes GEV/MM units. Mainly used to produce fixtures and to close
/// the read-write-read loop in tests; it makes no attempt to reproduce any
/// particular generator's float formatting, only to round-trip values
/// exactly.
pub struct Writer<W: Write> {
    out: W,
    started: bool,
    finished: bool,
}

impl<W: Write> Writer<W> {
    pub fn new(out: W) -> Writer<W> {
        Writer {
            out,
            started: false,
            finished: false,
        }
    }

    pub fn write_event(&mut self, ev: &GenEvent) -> io::Result<()> {
        if self.finished {
            return Err(io::Error::other("event listing already finished"));
        }
        if !self.started {
            writeln!(self.out, "HepMC::Version 2.06.11")?;
            writeln!(self.out, "HepMC::IO_GenEvent-START_EVENT_LISTING")?;
            self.started = true;
        }
        write!(
            self.out,
            "E {} {} {} {} {} {} {} {} {} {}",
            ev.event_number,
            ev.mpi,
            ev.event_scale,
            ev.alpha_qcd,
            ev.alpha_qed,
            ev.signal_process_id,
            ev.signal_process_vertex,
            ev.vertices.len(),
            ev.beam_particles.0,
            ev.beam_particles.1,
        )?;
        write!(self.out, " {}", ev.random_states.len())?;
        for s in &ev.random_states {
            write!(self.out, " {s}")?;
        }
        write!(self.out, " {}", ev.weights.len())?;
        for w in &ev.weights {
            write!(self.out, " {w}")?;
        }
        writeln!(self.out)?;
        writeln!(self.out, "U GEV MM")?;

        for v in &ev.vertices {
            write!(
                self.out,
                "V {} {} {} {} {} {} {} {} {}",
                v.barcode,
                v.id,
                v.x,
                v.y,
                v.z,
                v.ctau,
                v.particles_in.len(),
                v.particles_out.len(),
                v.weights.len(),
            )?;
            for w in &v.weights {
                write!(self.out, " {w}")?;
            }
            writeln!(self.out)?;
            for p in v.particles_in.iter().chain(v.particles_out.iter()) {
                write!(
                    self.out,
                    "P {} {} {} {} {} {} {} {} {} {} {} {}",
                    p.barcode,
                    p.pdg_id,
                    p.px,
                    p.py,
                    p.pz,
                    p.energy,
                    p.generated_mass,
                    p.status,
                    p.theta,
                    p.phi,
                    p.end_vertex,
                    p.flow.len(),
                )?;
                for (idx, val) in &p.flow {
                    write!(self.out, " {idx} {val}")?;
                }
                writeln!(self.out)?;
            }
        }
        Ok(())
    }

    /// Write the closing sentinel. Further writes would corrupt the file,
    /// so the writer refuses them afterwards.
    pub fn finish(&mut self) -> io::Result<()> {
        if self.finished {
            return Ok(());
        }
        if !self.started {
            writeln!(self.out, "HepMC::Version 2.06.11")?;
            writeln!(self.out, "HepMC::IO_GenEvent-START_EVENT_LISTING")?;
            self.started = true;
        }
        writeln!(self.out, "HepMC::IO_GenEvent-END_EVENT_LISTING")?;
        self.finished = true;
        self.out.flush()
    }
}

impl<W: Write> Drop for Writer<W> {
    fn drop(&mut self) {
        let _ = self.finish();
    }
}
