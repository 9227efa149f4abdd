use evfwk::RngStream;

use crate::candidate::Candidate;
use crate::detector::BinnedTable;
use crate::kinematics::FourMomentum;

/// Keep-or-drop decision with probability table(pt, |eta|); a candidate
/// outside the table domain is never kept. Always consumes exactly one
/// uniform draw so the stream position does not depend on the table.
pub fn apply_efficiency(c: &Candidate, table: &BinnedTable, rng: &mut RngStream) -> bool {
    let p = table.lookup_or(c.momentum.pt(), c.momentum.eta().abs(), 0.0);
    rng.next_f64() < p
}

/// Gaussian pt smearing: pt -> pt * (1 + g), g ~ Normal(0, sigma(pt, |eta|)),
/// with direction and mass preserved and the energy recomputed. The smeared
/// pt is floored at 1e-6 GeV so the vector stays usable downstream. Outside
/// the table domain sigma is 0. Exactly one normal is drawn per call.
pub fn smear_momentum(c: &Candidate, sigma_table: &BinnedTable, rng: &mut RngStream) -> Candidate {
    let g = rng.next_normal();
    let pt = c.momentum.pt();
    let sigma = sigma_table.lookup_or(pt, c.momentum.eta().abs(), 0.0);
    if sigma == 0.0 || pt == 0.0 {
        return c.clone();
    }
    let new_pt = (pt * (1.0 + sigma * g)).max(1e-6);
    let mut out = c.clone();
    out.momentum = FourMomentum::from_pt_eta_phi_m(
        new_pt,
        c.momentum.eta(),
        c.momentum.phi(),
        c.momentum.mass(),
    );
    out
}

/// Deterministic energy scale: the whole four-vector is multiplied by
/// scale(pt, |eta|), leaving direction and fractional mass content alone.
/// Outside the table domain the scale is 1.
pub fn energy_rescale(c: &Candidate, scale_table: &BinnedTable) -> Candidate {
    let s = scale_table.lookup_or(c.momentum.pt(), c.momentum.eta().abs(), 1.0);
    let mut out = c.clone();
    out.momentum = c.momentum * s;
    out
}
