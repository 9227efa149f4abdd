use std::io::BufRead;
use std::path::Path;
use std::sync::Arc;

use evfwk::config::SyntheticSourceConfig;
use evfwk::{fnv1a64, BoxError, EventData, EventSource, RngStream};
use hepmc2::GenEvent;

use crate::candidate::Candidate;
use crate::kinematics::FourMomentum;

/// Collection keys every source in this crate injects.
pub const KEY_STABLE: &str = "mc_stable";
pub const KEY_PARTONS: &str = "mc_partons";
pub const KEY_TAUS: &str = "mc_taus";

/// The type tag simulation tasks declare for `Vec<Candidate>` collections.
pub const CANDIDATES_TAG: &str = "candidates";

/// Streams a HepMC2 ASCII file (plain or gzipped) into the pipeline.
///
/// Each generator event becomes three collections: the stable final state
/// (status 1, no decay vertex) with production vertices carried along in
/// meters, plus the b/c partons and the taus used as tagging truth.
pub struct HepMcSource {
    reader: hepmc2::Reader<Box<dyn BufRead + Send>>,
    warnings: Vec<String>,
}

impl HepMcSource {
    pub fn open(path: impl AsRef<Path>) -> std::io::Result<HepMcSource> {
        Ok(HepMcSource {
            reader: hepmc2::open(path)?,
            warnings: Vec::new(),
        })
    }

    /// Reader diagnostics accumulated so far (skipped records and such).
    pub fn take_warnings(&mut self) -> Vec<String> {
        self.warnings.extend(self.reader.take_warnings());
        std::mem::take(&mut self.warnings)
    }
}

impl EventSource for HepMcSource {
    fn next_event(&mut self) -> Option<Result<EventData, BoxError>> {
        let event = match self.reader.next_event()? {
            Ok(ev) => ev,
            Err(e) => return Some(Err(Box::new(e))),
        };
        self.warnings.extend(self.reader.take_warnings());
        Some(Ok(collections_of(&event)))
    }
}

/// Split a generator event into the pipeline's input collections.
pub fn collections_of(event: &GenEvent) -> EventData {
    let mut stable = Vec::new();
    let mut partons = Vec::new();
    let mut taus = Vec::new();

    for vertex in &event.vertices {
        let origin = [
            vertex.x / 1000.0, // mm -> m
            vertex.y / 1000.0,
            vertex.z / 1000.0,
        ];
        let ins = vertex.particles_in.iter().map(|p| (p, None));
        let outs = vertex.particles_out.iter().map(|p| (p, Some(origin)));
        for (p, produced_at) in ins.chain(outs) {
            let momentum = FourMomentum::new(p.px, p.py, p.pz, p.energy);
            if p.is_final_state() {
                let mut c = Candidate::new(momentum, p.pdg_id);
                if let Some(pos) = produced_at {
                    c.position = pos;
                }
                stable.push(c);
            }
            match p.pdg_id.abs() {
                4 | 5 => partons.push(Candidate::new(momentum, p.pdg_id)),
                15 => taus.push(Candidate::new(momentum, p.pdg_id)),
                _ => {}
            }
        }
    }

    EventData {
        collections: vec![
            (KEY_STABLE.into(), Arc::new(stable) as evfwk::Value),
            (KEY_PARTONS.into(), Arc::new(partons) as evfwk::Value),
            (KEY_TAUS.into(), Arc::new(taus) as evfwk::Value),
        ],
    }
}

/// Deterministic particle-gun source for benchmarks and tests: every event
/// is a pure function of (global seed, event index), so any worker count
/// sees identical input.
pub struct SyntheticSource {
    next_index: u64,
    events: u64,
    particles_per_event: u32,
    pt_range: (f64, f64),
    global_seed: u64,
    salt: u64,
}

impl SyntheticSource {
    pub fn new(cfg: &SyntheticSourceConfig, global_seed: u64) -> SyntheticSource {
        SyntheticSource {
            next_index: 0,
            events: cfg.events,
            particles_per_event: cfg.particles_per_event,
            pt_range: cfg.pt_range.unwrap_or((1.0, 50.0)),
            global_seed,
            salt: fnv1a64(b"synthetic_source"),
        }
    }
}

impl EventSource for SyntheticSource {
    fn next_event(&mut self) -> Option<Result<EventData, BoxError>> {
        if self.next_index >= self.events {
            return None;
        }
        let index = self.next_index;
        self.next_index += 1;

        let mut rng = RngStream::for_task_event(self.global_seed, self.salt, index);
        let (lo, hi) = self.pt_range;
        let stable: Vec<Candidate> = (0..self.particles_per_event)
            .map(|i| {
                let pt = lo + (hi - lo) * rng.next_f64();
                let eta = -2.5 + 5.0 * rng.next_f64();
                let phi = std::f64::consts::PI * (2.0 * rng.next_f64() - 1.0);
                let pdg = if i % 2 == 0 { 211 } else { -211 };
                Candidate::new(FourMomentum::from_pt_eta_phi_m(pt, eta, phi, 0.13957), pdg)
            })
            .collect();

        Some(Ok(EventData {
            collections: vec![
                (KEY_STABLE.into(), Arc::new(stable) as evfwk::Value),
                (
                    KEY_PARTONS.into(),
                    Arc::new(Vec::<Candidate>::new()) as evfwk::Value,
                ),
                (
                    KEY_TAUS.into(),
                    Arc::new(Vec::<Candidate>::new()) as evfwk::Value,
                ),
            ],
        }))
    }
}
