//! Seeded generation of correlated singlet outcome pairs.
//!
//! The generator is pinned to xoshiro256++ so that a `(seed, stream_id)`
//! pair reproduces the same outcome sequence on every platform. The 256-bit
//! state is the first two SplitMix64 outputs seeded with `seed`, followed by
//! the first two SplitMix64 outputs seeded with `stream_id ^ STREAM_SALT`.
//! The first SplitMix64 output is a bijection of its seed, so distinct
//! `(seed, stream_id)` pairs never share a starting state.
//!
//! A uniform draw is `(next_u64() >> 11) · 2⁻⁵³`, in `[0, 1)`. One pair
//! consumes exactly one draw, mapped through the cumulative distribution of
//! the four categories in the fixed order `(+,+), (+,−), (−,+), (−,−)`.

use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256PlusPlus};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{checked_cos, cos_angle, singlet_probability, Direction, Outcome};

const STREAM_SALT: u64 = 0x5851_F42D_4C95_7F2D;

/// Category order of the cumulative map.
pub const CATEGORY_ORDER: [(Outcome, Outcome); 4] = [
    (Outcome::Plus, Outcome::Plus),
    (Outcome::Plus, Outcome::Minus),
    (Outcome::Minus, Outcome::Plus),
    (Outcome::Minus, Outcome::Minus),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub stream_id: u64,
}

impl SamplerConfig {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        SamplerConfig { seed, stream_id }
    }

    /// Same seed, different stream.
    pub fn with_stream(self, stream_id: u64) -> Self {
        SamplerConfig { stream_id, ..self }
    }

    pub fn rng(&self) -> OutcomeRng {
        OutcomeRng::new(*self)
    }
}

/// Single-owner generator state for one stream.
#[derive(Debug, Clone)]
pub struct OutcomeRng {
    inner: Xoshiro256PlusPlus,
}

impl OutcomeRng {
    pub fn new(config: SamplerConfig) -> Self {
        let mut seed = [0u8; 32];
        let mut from_seed = SplitMix64::seed_from_u64(config.seed);
        let mut from_stream = SplitMix64::seed_from_u64(config.stream_id ^ STREAM_SALT);
        let words = [
            from_seed.next_u64(),
            from_seed.next_u64(),
            from_stream.next_u64(),
            from_stream.next_u64(),
        ];
        for (chunk, w) in seed.chunks_exact_mut(8).zip(words) {
            chunk.copy_from_slice(&w.to_le_bytes());
        }
        OutcomeRng {
            inner: Xoshiro256PlusPlus::from_seed(seed),
        }
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Maps a uniform draw `u ∈ [0, 1)` to an outcome pair by inverse CDF.
pub fn outcome_pair_from_uniform(cos_gamma: f64, u: f64) -> Result<(Outcome, Outcome)> {
    let c = checked_cos(cos_gamma)?;
    Ok(pair_from_uniform(c, u))
}

fn pair_from_uniform(c: f64, u: f64) -> (Outcome, Outcome) {
    let mut cumulative = 0.0;
    for &(a, b) in &CATEGORY_ORDER[..3] {
        cumulative += singlet_probability(a, b, c);
        if u < cumulative {
            return (a, b);
        }
    }
    CATEGORY_ORDER[3]
}

/// Draws one `(a, b)` pair and advances the generator by one draw.
pub fn sample_outcome_pair(cos_gamma: f64, rng: &mut OutcomeRng) -> Result<(Outcome, Outcome)> {
    let c = checked_cos(cos_gamma)?;
    Ok(pair_from_uniform(c, rng.uniform()))
}

/// Outcome pairs drawn under one pair of settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub x: Direction,
    pub y: Direction,
    pub pairs: Vec<(Outcome, Outcome)>,
}

impl OutcomeRecord {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// CSV with header `index,a,b`, one row per pair, LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(16 + 8 * self.pairs.len());
        out.push_str("index,a,b\n");
        for (i, (a, b)) in self.pairs.iter().enumerate() {
            out.push_str(&format!("{i},{},{}\n", a.value(), b.value()));
        }
        out
    }
}

/// Draws `m` independent pairs at `cos_angle(x, y)`.
pub fn run_measurement_batch(
    x: Direction,
    y: Direction,
    m: usize,
    config: SamplerConfig,
) -> Result<OutcomeRecord> {
    if m == 0 {
        return Err(Error::param("M", "batch size must be at least 1"));
    }
    let c = cos_angle(&x, &y);
    let mut rng = config.rng();
    let pairs = (0..m).map(|_| pair_from_uniform(c, rng.uniform())).collect();
    Ok(OutcomeRecord { x, y, pairs })
}
