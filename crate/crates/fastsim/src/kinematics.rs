use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul};

use serde::{Deserialize, Serialize};

/// Lorentz vector in (px, py, pz, E), GeV.
///
/// Pseudorapidity follows the collider convention eta = -ln tan(theta/2),
/// computed as asinh(pz/pt); it is only meaningful for pt > 0. Azimuth is
/// reported in (-pi, pi].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourMomentum {
    pub px: f64,
    pub py: f64,
    pub pz: f64,
    pub e: f64,
}

impl FourMomentum {
    pub fn new(px: f64, py: f64, pz: f64, e: f64) -> FourMomentum {
        FourMomentum { px, py, pz, e }
    }

    pub fn from_pt_eta_phi_m(pt: f64, eta: f64, phi: f64, m: f64) -> FourMomentum {
        let px = pt * phi.cos();
        let py = pt * phi.sin();
        let pz = pt * eta.sinh();
        let e = ((pt * eta.cosh()).powi(2) + m * m).sqrt();
        FourMomentum { px, py, pz, e }
    }

    pub fn pt(&self) -> f64 {
        (self.px * self.px + self.py * self.py).sqrt()
    }

    /// Magnitude of the three-momentum.
    pub fn p(&self) -> f64 {
        (self.px * self.px + self.py * self.py + self.pz * self.pz).sqrt()
    }

    pub fn eta(&self) -> f64 {
        (self.pz / self.pt()).asinh()
    }

    pub fn phi(&self) -> f64 {
        self.py.atan2(self.px)
    }

    /// Invariant mass; E^2 - |p|^2 can dip slightly below zero from
    /// rounding and is clamped at 0.
    pub fn mass(&self) -> f64 {
        let m2 = self.e * self.e
            - (self.px * self.px + self.py * self.py + self.pz * self.pz);
        m2.max(0.0).sqrt()
    }
}

impl Add for FourMomentum {
    type Output = FourMomentum;

    fn add(self, rhs: FourMomentum) -> FourMomentum {
        FourMomentum {
            px: self.px + rhs.px,
            py: self.py + rhs.py,
            pz: self.pz + rhs.pz,
            e: self.e + rhs.e,
        }
    }
}

impl AddAssign for FourMomentum {
    fn add_assign(&mut self, rhs: FourMomentum) {
        *self = *self + rhs;
    }
}

impl Mul<f64> for FourMomentum {
    type Output = FourMomentum;

    fn mul(self, s: f64) -> FourMomentum {
        FourMomentum {
            px: self.px * s,
            py: self.py * s,
            pz: self.pz * s,
            e: self.e * s,
        }
    }
}

/// Map an angle into (-pi, pi].
pub fn wrap_phi(phi: f64) -> f64 {
    let mut w = phi.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Wrapped azimuthal difference a - b, in (-pi, pi].
pub fn delta_phi(a: f64, b: f64) -> f64 {
    wrap_phi(a - b)
}

/// Angular distance sqrt(deta^2 + dphi^2) with the azimuth wrapped.
pub fn delta_r(eta_a: f64, phi_a: f64, eta_b: f64, phi_b: f64) -> f64 {
    let de = eta_a - eta_b;
    let dp = delta_phi(phi_a, phi_b);
    (de * de + dp * dp).sqrt()
}
