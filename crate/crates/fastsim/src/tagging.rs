use evfwk::RngStream;

use crate::candidate::Candidate;
use crate::kinematics::delta_r;

/// Highest-pt truth candidate within `dr_max` of a direction. Earlier list
/// position wins an exact pt tie.
pub fn match_truth(eta: f64, phi: f64, truth: &[Candidate], dr_max: f64) -> Option<&Candidate> {
    let mut best: Option<&Candidate> = None;
    for t in truth {
        if delta_r(eta, phi, t.momentum.eta(), t.momentum.phi()) >= dr_max {
            continue;
        }
        if best.is_none_or(|b| t.momentum.pt() > b.momentum.pt()) {
            best = Some(t);
        }
    }
    best
}

/// Heavy-flavor tagging: each jet is matched to the highest-pt truth
/// parton within `dr_max`, and tagged with probability eff_b (matched to a
/// b), eff_c (matched to a c), or mistag (unmatched or light). One uniform
/// draw per jet, in jet order.
pub fn flavor_tag(
    jets: &mut [Candidate],
    partons: &[Candidate],
    eff_b: f64,
    eff_c: f64,
    mistag: f64,
    dr_max: f64,
    rng: &mut RngStream,
) {
    for jet in jets.iter_mut() {
        let p = match match_truth(jet.momentum.eta(), jet.momentum.phi(), partons, dr_max) {
            Some(m) if m.pdg_id.abs() == 5 => eff_b,
            Some(m) if m.pdg_id.abs() == 4 => eff_c,
            _ => mistag,
        };
        if rng.next_f64() < p {
            jet.flags.b_tagged = true;
        }
    }
}

/// Tau tagging with the same matching scheme against truth taus. The tau
/// momentum is used as-is; no visible-decay-product subtraction is made.
pub fn tau_tag(
    jets: &mut [Candidate],
    taus: &[Candidate],
    eff: f64,
    mistag: f64,
    dr_max: f64,
    rng: &mut RngStream,
) {
    for jet in jets.iter_mut() {
        let p = match match_truth(jet.momentum.eta(), jet.momentum.phi(), taus, dr_max) {
            Some(_) => eff,
            None => mistag,
        };
        if rng.next_f64() < p {
            jet.flags.tau_tagged = true;
        }
    }
}
