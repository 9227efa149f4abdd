#![allow(dead_code)]

use fastsim::candidate::Candidate;
use fastsim::kinematics::FourMomentum;

/// Deterministic pseudo-random data for tests. Fixed seeds only.
pub struct TestRng(pub u64);

impl TestRng {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.f64()
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }
}

pub fn random_momentum(rng: &mut TestRng, pt_lo: f64, pt_hi: f64, eta_max: f64) -> FourMomentum {
    FourMomentum::from_pt_eta_phi_m(
        rng.range(pt_lo, pt_hi),
        rng.range(-eta_max, eta_max),
        rng.range(-std::f64::consts::PI, std::f64::consts::PI),
        0.0,
    )
}

pub fn random_candidate(rng: &mut TestRng, pt_lo: f64, pt_hi: f64, eta_max: f64) -> Candidate {
    Candidate::new(random_momentum(rng, pt_lo, pt_hi, eta_max), 211)
}
