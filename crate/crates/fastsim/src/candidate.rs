use serde::{Deserialize, Serialize};

use crate::kinematics::FourMomentum;

/// Status bits attached by the simulation tasks. Isolation and the taggers
/// set their own bit and nothing else; `unpropagated` marks a candidate the
/// propagator could not carry to a detector surface (zero momentum, or a
/// looper with no longitudinal motion).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    #[serde(default)]
    pub isolated: bool,
    #[serde(default)]
    pub b_tagged: bool,
    #[serde(default)]
    pub tau_tagged: bool,
    #[serde(default)]
    pub unpropagated: bool,
}

/// One particle-like object flowing between simulation tasks: a generator
/// particle, a smeared track, a calorimeter tower, or a jet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub momentum: FourMomentum,
    pub pdg_id: i64,
    /// Integer units of e.
    pub charge: i32,
    /// Meters, at the last propagation surface (the production vertex
    /// before propagation).
    pub position: [f64; 3],
    pub flags: Flags,
}

impl Candidate {
    pub fn new(momentum: FourMomentum, pdg_id: i64) -> Candidate {
        Candidate {
            momentum,
            pdg_id,
            charge: charge_of(pdg_id),
            position: [0.0; 3],
            flags: Flags::default(),
        }
    }
}

/// Electric charge in integer units of e for the species that commonly
/// reach the detector. Anything not listed (quarks, exotica) maps to 0.
pub fn charge_of(pdg_id: i64) -> i32 {
    let q = match pdg_id.abs() {
        11 | 13 | 15 => -1,                  // charged leptons
        12 | 14 | 16 | 22 | 111 | 130 | 310 | 311 | 2112 | 3122 | 421 | 511 => 0,
        211 | 321 | 2212 | 411 | 431 | 521 | 3222 => 1,
        3112 | 3312 | 3334 => -1,            // sigma-, xi-, omega-
        _ => 0,
    };
    if pdg_id < 0 {
        -q
    } else {
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charges_follow_the_particle_not_the_sign_convention() {
        assert_eq!(charge_of(11), -1); // electron
        assert_eq!(charge_of(-11), 1); // positron
        assert_eq!(charge_of(211), 1); // pi+
        assert_eq!(charge_of(-211), -1);
        assert_eq!(charge_of(22), 0);
        assert_eq!(charge_of(2212), 1);
        assert_eq!(charge_of(5), 0); // bare quark: unlisted
    }
}
