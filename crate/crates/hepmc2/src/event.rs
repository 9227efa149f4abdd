use serde::Serialize;

/// One particle line.
///
/// Momentum components, energy and generated mass are in GeV, positions of
/// the owning vertex in mm; the reader converts other unit choices on the
/// way in. `end_vertex` is the barcode of the decay vertex, 0 when the
/// particle does not interact again.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenParticle {
    pub barcode: i64,
    pub pdg_id: i64,
    pub px: f64,
    pub py: f64,
    pub pz: f64,
    pub energy: f64,
    pub generated_mass: f64,
    pub status: i64,
    /// Polarization angles as stored in the file.
    pub theta: f64,
    pub phi: f64,
    pub end_vertex: i64,
    pub flow: Vec<(i64, i64)>,
}

impl GenParticle {
    /// Stable outgoing particle: status 1 and no decay vertex.
    pub fn is_final_state(&self) -> bool {
        self.status == 1 && self.end_vertex == 0
    }
}

/// One vertex line plus the particles listed under it.
///
/// `particles_in` holds only the orphans, incoming particles with no
/// production vertex of their own; incoming particles produced elsewhere in
/// the event are connected through their `end_vertex` barcode instead.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenVertex {
    pub barcode: i64,
    pub id: i64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub ctau: f64,
    pub weights: Vec<f64>,
    pub particles_in: Vec<GenParticle>,
    pub particles_out: Vec<GenParticle>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenEvent {
    pub event_number: i64,
    pub mpi: i64,
    pub event_scale: f64,
    pub alpha_qcd: f64,
    pub alpha_qed: f64,
    pub signal_process_id: i64,
    pub signal_process_vertex: i64,
    pub beam_particles: (i64, i64),
    pub random_states: Vec<i64>,
    pub weights: Vec<f64>,
    /// Vertices in file order; particle order within a vertex is also file
    /// order (orphans first, then outgoing).
    pub vertices: Vec<GenVertex>,
}

impl GenEvent {
    /// All particles in file order.
    pub fn particles(&self) -> impl Iterator<Item = &GenParticle> {
        self.vertices
            .iter()
            .flat_map(|v| v.particles_in.iter().chain(v.particles_out.iter()))
    }

    pub fn n_particles(&self) -> usize {
        self.vertices
            .iter()
            .map(|v| v.particles_in.len() + v.particles_out.len())
            .sum()
    }

    pub fn final_state(&self) -> impl Iterator<Item = &GenParticle> {
        self.particles().filter(|p| p.is_final_state())
    }
}
