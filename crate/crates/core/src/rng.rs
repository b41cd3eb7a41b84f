//! Counter-based pseudo-random generator.
//!
//! All synthetic randomness in the toolkit is derived from this generator so
//! that outputs are reproducible bit-for-bit across platforms and independent
//! of evaluation order. The construction is the SplitMix64 output function
//! applied to `seed + (index + 1) * GOLDEN_GAMMA`:
//!
//! * increment: `GOLDEN_GAMMA = 0x9E3779B97F4A7C15` (2^64 / golden ratio)
//! * finalizer multipliers: `0xBF58476D1CE4E5B9`, `0x94D049BB133111EB`
//! * finalizer shifts: 30, 27, 31
//!
//! Because every draw is a pure function of `(seed, index)`, values can be
//! generated per element with no shared state.

/// 2^64 divided by the golden ratio; the canonical SplitMix64 increment.
pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer: a bijective avalanche mix of a 64-bit word.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The `index`-th raw value of the stream identified by `seed`.
pub fn value_at(seed: u64, index: u64) -> u64 {
    mix64(seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// The `index`-th uniform draw in [0, 1) with 53 bits of precision.
pub fn unit_f64_at(seed: u64, index: u64) -> f64 {
    (value_at(seed, index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// The `index`-th standard Gaussian draw (Box-Muller over draws 2i, 2i+1).
pub fn gaussian_at(seed: u64, index: u64) -> f64 {
    let u1 = unit_f64_at(seed, 2 * index);
    let u2 = unit_f64_at(seed, 2 * index + 1);
    // 1 - u1 lies in (0, 1], keeping the logarithm finite.
    let r = libm::sqrt(-2.0 * libm::log(1.0 - u1));
    r * libm::cos(2.0 * core::f64::consts::PI * u2)
}

/// Derives an independent stream seed from a base seed and a salt.
pub fn derive_stream(seed: u64, salt: u64) -> u64 {
    mix64(seed ^ mix64(salt))
}

/// Sequential convenience wrapper over the counter-based generator.
#[derive(Clone, Debug)]
pub struct CounterRng {
    seed: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng { seed, counter: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        let v = value_at(self.seed, self.counter);
        self.counter += 1;
        v
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in [lo, hi).
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}
