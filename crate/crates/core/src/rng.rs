//! Counter-based random streams.
//!
//! Every trial draws from a stream identified by `(master_seed, check_id, trial)`.
//! The generator is SplitMix64 used in counter mode, so value `i` of a stream
//! is a pure function of the stream key and `i`:
//!
//! ```text
//! GAMMA      = 0x9E37_79B9_7F4A_7C15
//! mix(z)     = z ^= z >> 30; z *= 0xBF58_476D_1CE4_E5B9;
//!              z ^= z >> 27; z *= 0x94D0_49BB_1331_11EB;
//!              z ^ (z >> 31)                          (wrapping u64 arithmetic)
//! check_id   = FNV-1a 64 of the check name bytes
//! key        = mix(mix(master_seed ^ check_id) + trial)
//! output(i)  = mix(key + (i + 1) * GAMMA)
//! uniform(i) = (output(i) >> 11) * 2^-53                in [0, 1)
//! ```
//!
//! Any implementation following these lines reproduces the streams bit for bit,
//! independent of how trials are scheduled across threads.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const FNV_OFFSET: u64 = 0xCBF2_9CE4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01B3;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a hash of a check name; used as the check component of a stream key.
pub fn check_id(name: &str) -> u64 {
    name.bytes()
        .fold(FNV_OFFSET, |h, b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// Stream key for `(master_seed, check, trial)`.
pub fn stream_key(master_seed: u64, check: &str, trial: u64) -> u64 {
    mix64(mix64(master_seed ^ check_id(check)).wrapping_add(trial))
}

/// SplitMix64 in counter mode.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn from_key(key: u64) -> Self {
        Self { key, counter: 0 }
    }

    pub fn for_trial(master_seed: u64, check: &str, trial: u64) -> Self {
        Self::from_key(stream_key(master_seed, check, trial))
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GAMMA)))
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform in `(0, 1]`; safe to take logarithms of.
    pub fn open_unit(&mut self) -> f64 {
        1.0 - self.next_f64()
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int_in(&mut self, lo: usize, hi: usize) -> usize {
        debug_assert!(lo <= hi);
        let span = (hi - lo) as u64 + 1;
        lo + (self.next_u64() % span) as usize
    }

    /// Standard normal via Box-Muller (one value per call, two uniforms consumed).
    pub fn normal(&mut self) -> f64 {
        let u = self.open_unit();
        let v = self.next_f64();
        (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
    }

    pub fn uniform_vec(&mut self, n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|_| self.uniform(lo, hi)).collect()
    }

    /// A point drawn uniformly from the probability simplex of dimension `n`.
    pub fn simplex_point(&mut self, n: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..n).map(|_| -self.open_unit().ln()).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|r| r / total).collect()
    }
}
