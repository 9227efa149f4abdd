use std::collections::BTreeMap;

use evfwk::RngStream;

use crate::candidate::Candidate;
use crate::detector::DetectorConfig;
use crate::kinematics::FourMomentum;

/// Deposit propagated particles into calorimeter towers and smear each
/// compartment once.
///
/// A particle's energy is split between the electromagnetic and hadronic
/// compartments of the tower containing its direction at the detector
/// surface (momentum direction for unpropagated candidates). Tower
/// iteration runs in (eta bin, phi bin) order and always draws one normal
/// per compartment, so the random stream consumption is independent of how
/// the deposits happened to land. Smeared compartments are truncated at
/// zero; towers whose total stays below `tower_e_min` are dropped.
pub fn simulate_towers(
    particles: &[Candidate],
    det: &DetectorConfig,
    rng: &mut RngStream,
) -> Vec<Candidate> {
    let mut towers: BTreeMap<(usize, usize), (f64, f64)> = BTreeMap::new();

    for c in particles {
        let (em_frac, had_frac) = det.fractions_of(c.pdg_id);
        if em_frac == 0.0 && had_frac == 0.0 {
            continue;
        }
        let (eta, phi) = direction_of(c);
        let Some(bin) = det.tower_of(eta, phi) else {
            continue;
        };
        let slot = towers.entry(bin).or_insert((0.0, 0.0));
        slot.0 += em_frac * c.momentum.e;
        slot.1 += had_frac * c.momentum.e;
    }

    let mut out = Vec::with_capacity(towers.len());
    for (&(ie, ip), &(em, had)) in &towers {
        let em = smear_compartment(em, det.em_resolution.sigma(em), rng);
        let had = smear_compartment(had, det.had_resolution.sigma(had), rng);
        let e = em + had;
        if e < det.tower_e_min || e <= 0.0 {
            continue;
        }
        let (eta_c, phi_c) = det.tower_center(ie, ip);
        let et = e / eta_c.cosh();
        let mut tower = Candidate::new(
            FourMomentum::new(et * phi_c.cos(), et * phi_c.sin(), et * eta_c.sinh(), e),
            0,
        );
        tower.position = surface_point(det, eta_c, phi_c);
        out.push(tower);
    }
    out
}

fn smear_compartment(e: f64, sigma: f64, rng: &mut RngStream) -> f64 {
    let g = rng.next_normal();
    if sigma == 0.0 {
        return e;
    }
    (e + sigma * g).max(0.0)
}

/// Direction the calorimeter sees: the straight line from the beamline to
/// the candidate's surface position, or its momentum if it was never
/// propagated anywhere.
fn direction_of(c: &Candidate) -> (f64, f64) {
    let [x, y, z] = c.position;
    let r = (x * x + y * y).sqrt();
    if r == 0.0 && z == 0.0 {
        (c.momentum.eta(), c.momentum.phi())
    } else {
        ((z / r).asinh(), y.atan2(x))
    }
}

/// Point on the detector boundary along a tower-center direction: on the
/// barrel where the barrel is reached first, otherwise on an endcap.
fn surface_point(det: &DetectorConfig, eta: f64, phi: f64) -> [f64; 3] {
    let z_at_barrel = det.radius * eta.sinh();
    if z_at_barrel.abs() <= det.half_length {
        [det.radius * phi.cos(), det.radius * phi.sin(), z_at_barrel]
    } else {
        let r = det.half_length / eta.sinh().abs();
        [
            r * phi.cos(),
            r * phi.sin(),
            det.half_length.copysign(eta),
        ]
    }
}
