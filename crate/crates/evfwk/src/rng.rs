//! Counter-based random numbers with per-(task, event) streams.
//!
//! Reproducibility across worker counts requires that the random numbers a
//! task draws for an event depend only on `(global_seed, task, event_index)`,
//! never on which thread runs it or in what order events are interleaved.
//! Each stream is therefore seeded by a hash of those three values and
//! advances as a pure counter generator.

/// SplitMix64 output mixer. Bijective on `u64`, so distinct inputs give
/// distinct outputs.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seed for the stream a given task uses on a given event.
pub fn task_event_seed(global_seed: u64, seed_salt: u64, event_index: u64) -> u64 {
    mix64(global_seed ^ seed_salt ^ event_index.wrapping_mul(GOLDEN))
}

/// FNV-1a over a byte string; used to derive a task's seed salt from its id.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x1_0000_01B3);
    }
    h
}

/// Deterministic generator: `output_i = mix64(seed + (i+1)*GOLDEN)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    state: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> RngStream {
        RngStream { state: seed }
    }

    pub fn for_task_event(global_seed: u64, seed_salt: u64, event_index: u64) -> RngStream {
        RngStream::new(task_event_seed(global_seed, seed_salt, event_index))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)` with 53 significant bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal via Box-Muller. The log argument is mapped into
    /// `(0, 1]` so it can never be zero.
    pub fn next_normal(&mut self) -> f64 {
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
