//! Counter-based SplitMix64 generator.
//!
//! The `k`-th output (k = 0, 1, ...) of stream `seed` is
//! `mix(seed + (k + 1) * 0x9E3779B97F4A7C15)` with wrapping arithmetic, where
//! `mix(z)` is
//!
//! ```text
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! z ^ (z >> 31)
//! ```
//!
//! Uniform doubles are `(u >> 11) * 2^-53`. Independent substreams are keyed
//! by `mix(seed ^ mix(id))`. Any implementation of these three rules
//! reproduces the sequences bit for bit.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    seed: u64,
    counter: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { seed, counter: 0 }
    }

    /// A substream that does not overlap `self`'s sequence for practical lengths.
    pub fn substream(seed: u64, id: u64) -> Self {
        SplitMix64::new(mix(seed ^ mix(id)))
    }

    /// Output at an arbitrary counter without advancing.
    pub fn at(&self, k: u64) -> u64 {
        mix(self
            .seed
            .wrapping_add(k.wrapping_add(1).wrapping_mul(GOLDEN)))
    }

    pub fn next_u64(&mut self) -> u64 {
        let v = self.at(self.counter);
        self.counter += 1;
        v
    }

    /// Uniform on [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal via Box-Muller; consumes two outputs.
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: u64) -> u64 {
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    /// A point uniformly distributed in the ball of radius `r` in dimension `d`.
    pub fn in_ball(&mut self, d: usize, r: f64) -> Vec<f64> {
        loop {
            let p: Vec<f64> = (0..d).map(|_| self.uniform(-r, r)).collect();
            if p.iter().map(|v| v * v).sum::<f64>() <= r * r {
                return p;
            }
        }
    }
}
