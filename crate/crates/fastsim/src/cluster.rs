use serde::{Deserialize, Serialize};

use crate::kinematics::{delta_phi, FourMomentum};

/// Generalized-kt parameters: exponent p (-1 anti-kt, 0 Cambridge/Aachen,
/// +1 kt) and cone radius R.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JetDefinition {
    pub p: f64,
    pub r: f64,
}

/// A (possibly composite) jet candidate. `constituents` are indices into
/// the clustering input, in merge order; the momentum is the left-to-right
/// four-vector sum over exactly that sequence. `history_id` numbers every
/// pseudojet ever created: inputs take 0..n, merged jets count on from n
/// in creation order.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoJet {
    pub momentum: FourMomentum,
    pub constituents: Vec<usize>,
    pub history_id: usize,
}

struct Active {
    jet: PseudoJet,
    pt2: f64,
    eta: f64,
    phi: f64,
}

impl Active {
    fn new(jet: PseudoJet) -> Active {
        let m = jet.momentum;
        let pt2 = m.px * m.px + m.py * m.py;
        Active {
            pt2,
            eta: m.eta(),
            phi: m.phi(),
            jet,
        }
    }
}

fn pt_weight(pt2: f64, p: f64) -> f64 {
    // pt^(2p) without a powf round-trip for the common exponents
    if p == -1.0 {
        1.0 / pt2
    } else if p == 0.0 {
        1.0
    } else if p == 1.0 {
        pt2
    } else {
        pt2.powf(p)
    }
}

/// Sequential-recombination jet clustering, the deliberately naive O(N^3)
/// strategy: every iteration recomputes all pairwise distances
/// d_ij = min(pt_i^2p, pt_j^2p) * dR_ij^2 / R^2 and beam distances
/// d_iB = pt_i^2p, then either merges the closest pair (E-scheme) or
/// promotes the pseudojet closest to the beam into a final jet.
///
/// Deterministic tie-breaking, pinned so an independent implementation can
/// reproduce the clustering bit for bit: pairs are scanned in (i, j) list
/// order and only a strictly smaller distance displaces the current best,
/// so the smallest index pair wins exact ties; beam distances are scanned
/// after the pairs under the same strict comparison, so a beam distance
/// loses an exact tie against a pair. A merged pseudojet is appended at the
/// end of the list (positions above the removed pair shift down), and its
/// constituent list is the lower-history-id side's constituents followed by
/// the higher's.
///
/// Final jets keep pt >= pt_min and come out sorted by descending pt,
/// promotion order breaking exact pt ties.
pub fn cluster_jets(inputs: &[FourMomentum], def: JetDefinition, pt_min: f64) -> Vec<PseudoJet> {
    let mut active: Vec<Active> = inputs
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            Active::new(PseudoJet {
                momentum: m,
                constituents: vec![i],
                history_id: i,
            })
        })
        .collect();
    let mut next_id = inputs.len();
    let r2 = def.r * def.r;
    let mut finished = Vec::new();

    while !active.is_empty() {
        // min(pt_i^2p, pt_j^2p) must compare the weights, not the pts:
        // for negative p the weight is decreasing in pt
        let weights: Vec<f64> = active.iter().map(|a| pt_weight(a.pt2, def.p)).collect();
        let mut best = f64::INFINITY;
        let mut best_pair: Option<(usize, usize)> = None;
        let mut best_beam = 0;

        for i in 0..active.len() {
            for j in i + 1..active.len() {
                let de = active[i].eta - active[j].eta;
                let dp = delta_phi(active[i].phi, active[j].phi);
                let dij = weights[i].min(weights[j]) * (de * de + dp * dp) / r2;
                if dij < best {
                    best = dij;
                    best_pair = Some((i, j));
                }
            }
        }
        for (i, &dib) in weights.iter().enumerate() {
            if dib < best {
                best = dib;
                best_pair = None;
                best_beam = i;
            }
        }

        match best_pair {
            Some((i, j)) => {
                // j > i, so removing j first leaves i in place
                let hi = active.remove(j);
                let lo = active.remove(i);
                let (first, second) = if lo.jet.history_id < hi.jet.history_id {
                    (lo, hi)
                } else {
                    (hi, lo)
                };
                let mut constituents = first.jet.constituents;
                constituents.extend(second.jet.constituents);
                let momentum = constituents
                    .iter()
                    .map(|&c| inputs[c])
                    .reduce(|a, b| a + b)
                    .unwrap();
                active.push(Active::new(PseudoJet {
                    momentum,
                    constituents,
                    history_id: next_id,
                }));
                next_id += 1;
            }
            None => {
                let a = active.remove(best_beam);
                finished.push(a.jet);
            }
        }
    }

    finished.retain(|j| j.momentum.pt() >= pt_min);
    finished.sort_by(|a, b| b.momentum.pt().partial_cmp(&a.momentum.pt()).unwrap());
    finished
}
