use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Stochastic term / noise term / constant term of a calorimeter
/// compartment: sigma(E) = sqrt(s^2 E + n^2 + c^2 E^2).
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resolution {
    pub s: f64,
    pub n: f64,
    pub c: f64,
}

impl Resolution {
    pub fn sigma(&self, e: f64) -> f64 {
        (self.s * self.s * e + self.n * self.n + self.c * self.c * e * e).sqrt()
    }
}

/// Per-species split of deposited energy between the electromagnetic and
/// hadronic compartments. Fractions need not sum to 1 (muons deposit
/// nothing at all).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyFraction {
    pub pdg: i64,
    pub em: f64,
    pub had: f64,
}

/// Detector geometry and response parameters. Values here are illustrative
/// defaults shaped like a real data card, not a tuned description of any
/// experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    /// Solenoid field along z, Tesla.
    pub b_field: f64,
    /// Tracker cylinder radius, meters.
    pub radius: f64,
    /// Tracker half-length, meters.
    pub half_length: f64,
    /// Calorimeter acceptance: towers cover |eta| <= eta_max.
    pub eta_max: f64,
    /// Tower segmentation. The phi width is snapped so an integer number
    /// of towers closes the full circle.
    pub tower_deta: f64,
    pub tower_dphi: f64,
    pub em_resolution: Resolution,
    pub had_resolution: Resolution,
    /// Towers below this total energy (GeV) are dropped.
    #[serde(default)]
    pub tower_e_min: f64,
    /// Overrides for the built-in species table (photons/electrons
    /// electromagnetic, muons and neutrinos invisible, the rest hadronic).
    #[serde(default)]
    pub energy_fractions: Vec<EnergyFraction>,
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<(), String> {
        let scalars = [
            ("b_field", self.b_field),
            ("radius", self.radius),
            ("half_length", self.half_length),
            ("eta_max", self.eta_max),
            ("tower_deta", self.tower_deta),
            ("tower_dphi", self.tower_dphi),
            ("tower_e_min", self.tower_e_min),
        ];
        for (name, v) in scalars {
            if !v.is_finite() {
                return Err(format!("{name} must be finite, got {v}"));
            }
        }
        if self.b_field < 0.0 {
            return Err(format!("b_field must be >= 0, got {}", self.b_field));
        }
        if self.radius <= 0.0 {
            return Err(format!("radius must be > 0, got {}", self.radius));
        }
        if self.half_length <= 0.0 {
            return Err(format!("half_length must be > 0, got {}", self.half_length));
        }
        if self.eta_max <= 0.0 {
            return Err(format!("eta_max must be > 0, got {}", self.eta_max));
        }
        if self.tower_deta <= 0.0 || self.tower_deta > 2.0 * self.eta_max {
            return Err(format!("tower_deta {} out of range", self.tower_deta));
        }
        if self.tower_dphi <= 0.0 || self.tower_dphi > 2.0 * PI {
            return Err(format!("tower_dphi {} out of range", self.tower_dphi));
        }
        if self.tower_e_min < 0.0 {
            return Err(format!("tower_e_min must be >= 0, got {}", self.tower_e_min));
        }
        for f in &self.energy_fractions {
            if !(0.0..=1.0).contains(&f.em) || !(0.0..=1.0).contains(&f.had) {
                return Err(format!("energy fractions for pdg {} out of [0,1]", f.pdg));
            }
        }
        Ok(())
    }

    pub fn n_eta_bins(&self) -> usize {
        ((2.0 * self.eta_max / self.tower_deta).round() as usize).max(1)
    }

    pub fn n_phi_bins(&self) -> usize {
        ((2.0 * PI / self.tower_dphi).round() as usize).max(1)
    }

    /// Tower index for a direction, or None outside |eta| <= eta_max.
    pub fn tower_of(&self, eta: f64, phi: f64) -> Option<(usize, usize)> {
        if eta.is_nan() || eta.abs() > self.eta_max {
            return None;
        }
        let n_eta = self.n_eta_bins();
        let n_phi = self.n_phi_bins();
        let ie = ((eta + self.eta_max) / (2.0 * self.eta_max) * n_eta as f64) as usize;
        let phi = crate::kinematics::wrap_phi(phi);
        let ip = ((phi + PI) / (2.0 * PI) * n_phi as f64) as usize;
        Some((ie.min(n_eta - 1), ip.min(n_phi - 1)))
    }

    pub fn tower_center(&self, ie: usize, ip: usize) -> (f64, f64) {
        let eta = -self.eta_max + (ie as f64 + 0.5) * 2.0 * self.eta_max / self.n_eta_bins() as f64;
        let phi = -PI + (ip as f64 + 0.5) * 2.0 * PI / self.n_phi_bins() as f64;
        (eta, phi)
    }

    /// (em, had) deposited-energy fractions for a species.
    pub fn fractions_of(&self, pdg_id: i64) -> (f64, f64) {
        let a = pdg_id.abs();
        for f in &self.energy_fractions {
            if f.pdg == a {
                return (f.em, f.had);
            }
        }
        match a {
            11 | 22 => (1.0, 0.0),
            12 | 13 | 14 | 16 => (0.0, 0.0),
            _ => (0.0, 1.0),
        }
    }
}

/// Piecewise-constant lookup in (pt, |eta|): efficiencies, smearing widths,
/// energy scales. Bins are half-open [lo, hi); a point outside the grid has
/// no value and the caller picks the fallback.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinnedTable {
    pub pt_edges: Vec<f64>,
    pub eta_edges: Vec<f64>,
    /// values[pt_bin][eta_bin]
    pub values: Vec<Vec<f64>>,
}

impl BinnedTable {
    /// Single-cell table covering everything, for tests and flat responses.
    pub fn flat(value: f64) -> BinnedTable {
        BinnedTable {
            pt_edges: vec![0.0, f64::MAX],
            eta_edges: vec![0.0, f64::MAX],
            values: vec![vec![value]],
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.pt_edges.len() < 2 || self.eta_edges.len() < 2 {
            return Err("table needs at least one bin per axis".into());
        }
        for edges in [&self.pt_edges, &self.eta_edges] {
            if edges.iter().any(|e| e.is_nan()) {
                return Err("table edges must not be NaN".into());
            }
            if edges.windows(2).any(|w| w[0] >= w[1]) {
                return Err("table edges must be strictly ascending".into());
            }
        }
        if self.values.len() != self.pt_edges.len() - 1 {
            return Err("table has a pt row count mismatch".into());
        }
        for row in &self.values {
            if row.len() != self.eta_edges.len() - 1 {
                return Err("table has an eta column count mismatch".into());
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err("table values must be finite".into());
            }
        }
        Ok(())
    }

    fn bin(edges: &[f64], x: f64) -> Option<usize> {
        if x.is_nan() || x < edges[0] || x >= *edges.last().unwrap() {
            return None;
        }
        Some(edges.partition_point(|e| *e <= x) - 1)
    }

    pub fn lookup(&self, pt: f64, abs_eta: f64) -> Option<f64> {
        let i = Self::bin(&self.pt_edges, pt)?;
        let j = Self::bin(&self.eta_edges, abs_eta)?;
        Some(self.values[i][j])
    }

    pub fn lookup_or(&self, pt: f64, abs_eta: f64, fallback: f64) -> f64 {
        self.lookup(pt, abs_eta).unwrap_or(fallback)
    }
}
