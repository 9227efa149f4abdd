use crate::candidate::Candidate;
use crate::detector::DetectorConfig;
use crate::kinematics::FourMomentum;
use crate::Error;

/// Conversion constant between momentum, field and bending radius:
/// p_t [GeV] = K_B * |q| [e] * B [T] * r [m].
pub const K_B: f64 = 0.299792458;

/// Helix radius of a charged particle in a solenoid field, meters.
pub fn gyroradius(pt: f64, charge: i32, b: f64) -> f64 {
    pt / (K_B * charge.abs() as f64 * b)
}

/// Carry a candidate from its production vertex to the first crossing of
/// the tracker cylinder (barrel radius or endcap plane).
///
/// Neutral particles and field-free detectors give straight lines. Charged
/// particles follow a helix: transverse circular motion with signed radius
/// pt/(K_B q B), uniform motion in z, energy loss ignored. The transverse
/// momentum direction is rotated by the turned angle at the exit point. A
/// looper that cannot reach the barrel drifts to an endcap; with no
/// longitudinal momentum it is returned unchanged with the `unpropagated`
/// flag set, as is a candidate with zero momentum.
pub fn propagate(c: &Candidate, det: &DetectorConfig) -> Result<Candidate, Error> {
    let [x0, y0, z0] = c.position;
    let radius2 = det.radius * det.radius;
    if x0 * x0 + y0 * y0 > radius2 || z0.abs() > det.half_length {
        return Err(Error::VertexOutsideDetector(x0, y0, z0));
    }

    let p = c.momentum;
    let ptot = p.p();
    if ptot == 0.0 {
        let mut out = c.clone();
        out.flags.unpropagated = true;
        return Ok(out);
    }

    if c.charge == 0 || det.b_field == 0.0 || p.pt() == 0.0 {
        return Ok(straight_exit(c, det, ptot));
    }
    Ok(helix_exit(c, det, ptot))
}

fn straight_exit(c: &Candidate, det: &DetectorConfig, ptot: f64) -> Candidate {
    let [x0, y0, z0] = c.position;
    let (ux, uy, uz) = (c.momentum.px / ptot, c.momentum.py / ptot, c.momentum.pz / ptot);

    let mut s_exit = f64::INFINITY;
    let a = ux * ux + uy * uy;
    if a > 0.0 {
        let b = 2.0 * (x0 * ux + y0 * uy);
        let c0 = x0 * x0 + y0 * y0 - det.radius * det.radius;
        s_exit = (-b + (b * b - 4.0 * a * c0).sqrt()) / (2.0 * a);
    }
    if uz != 0.0 {
        let s_end = (det.half_length.copysign(uz) - z0) / uz;
        s_exit = s_exit.min(s_end);
    }

    let mut out = c.clone();
    out.position = [x0 + s_exit * ux, y0 + s_exit * uy, z0 + s_exit * uz];
    out
}

fn helix_exit(c: &Candidate, det: &DetectorConfig, ptot: f64) -> Candidate {
    let [x0, y0, z0] = c.position;
    let p = c.momentum;
    let pt = p.pt();
    let q = c.charge as f64;

    // Transverse motion: the momentum azimuth advances as
    // psi(s) = phi0 - alpha*s along the path, and the position circles a
    // fixed center with signed radius r_s.
    let alpha = K_B * q * det.b_field / ptot;
    let r_s = pt / (K_B * q * det.b_field);
    let phi0 = p.phi();
    let cx = x0 + r_s * phi0.sin();
    let cy = y0 - r_s * phi0.cos();
    let c_norm = (cx * cx + cy * cy).sqrt();

    // First barrel crossing: |center + r_s*(-sin psi, cos psi)| = radius
    // reduces to cos(psi - delta0) = gamma.
    let mut s_barrel = f64::INFINITY;
    let gamma =
        (det.radius * det.radius - c_norm * c_norm - r_s * r_s) / (2.0 * r_s * c_norm);
    if gamma.abs() <= 1.0 {
        let delta0 = (-cx).atan2(cy);
        let w = gamma.clamp(-1.0, 1.0).acos();
        let period = 2.0 * std::f64::consts::PI / alpha.abs();
        for psi in [delta0 + w, delta0 - w] {
            let mut s = ((phi0 - psi) / alpha).rem_euclid(period);
            if s <= 0.0 {
                s = period;
            }
            s_barrel = s_barrel.min(s);
        }
    }

    let vz = p.pz / ptot;
    let s_endcap = if vz != 0.0 {
        (det.half_length.copysign(vz) - z0) / vz
    } else {
        f64::INFINITY
    };

    let s_exit = s_barrel.min(s_endcap);
    let mut out = c.clone();
    if !s_exit.is_finite() {
        // transverse looper with pz = 0: never leaves the tracker volume
        out.flags.unpropagated = true;
        return out;
    }

    let psi = phi0 - alpha * s_exit;
    out.position = [
        cx - r_s * psi.sin(),
        cy + r_s * psi.cos(),
        z0 + vz * s_exit,
    ];
    out.momentum = FourMomentum::new(pt * psi.cos(), pt * psi.sin(), p.pz, p.e);
    out
}
