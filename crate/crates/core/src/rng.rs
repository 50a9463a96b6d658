//! Deterministic random-number substreams.
//!
//! One master 64-bit seed drives a whole gait run. Every sub-swarm draws
//! from its own ChaCha8 stream whose seed is derived by folding the step,
//! via-point, retry and joint indices into the master seed through
//! splitmix64. Streams therefore never depend on execution order, which is
//! what makes parallel and serial runs bit-identical.

use rand_core::{RngCore, SeedableRng};

/// splitmix64 finalizer: a well-mixed 64-bit permutation.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Folds a label into a seed; chaining calls derives nested substreams.
pub fn mix(seed: u64, label: u64) -> u64 {
    splitmix64(seed ^ splitmix64(label))
}

/// Source of uniform samples on the closed interval [0, 1].
pub trait UnitRand {
    fn unit(&mut self) -> f64;
}

/// A seeded ChaCha8-backed stream.
#[derive(Debug, Clone)]
pub struct Stream(rand_chacha::ChaCha8Rng);

impl Stream {
    pub fn from_seed(seed: u64) -> Self {
        Stream(rand_chacha::ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
}

impl UnitRand for Stream {
    /// Uniform on [0, 1] inclusive of both endpoints: the top 53 bits of a
    /// u64 scaled by 1 / (2^53 - 1).
    fn unit(&mut self) -> f64 {
        const DENOM: f64 = ((1u64 << 53) - 1) as f64;
        (self.0.next_u64() >> 11) as f64 / DENOM
    }
}

/// Fixed-value source for hand-computed update tests.
#[derive(Debug, Clone, Copy)]
pub struct ConstUnit(pub f64);

impl UnitRand for ConstUnit {
    fn unit(&mut self) -> f64 {
        self.0
    }
}
