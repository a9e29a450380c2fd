//! Seeded sample generation on the slit tangent bundle.
//!
//! Base points are uniform in `[-1, 1]^N`. Each fiber block is uniform on its
//! unit sphere and scaled to a radius in `[0.5, 2]`.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::metric::TangentPoint;

pub const X_RANGE: f64 = 1.0;
pub const RADIUS_MIN: f64 = 0.5;
pub const RADIUS_MAX: f64 = 2.0;
pub const DEFAULT_SAMPLES: usize = 100;

#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal by Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(core::f64::consts::TAU * u2)
    }

    pub fn base_point(&mut self, dim: usize) -> Vec<f64> {
        (0..dim).map(|_| self.uniform_in(-X_RANGE, X_RANGE)).collect()
    }

    /// Uniform direction on the unit sphere scaled to a random radius.
    pub fn fiber_block(&mut self, dim: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..dim).map(|_| self.normal()).collect();
            let norm = libm::sqrt(v.iter().map(|c| c * c).sum::<f64>());
            if norm > 1e-3 {
                let r = self.uniform_in(RADIUS_MIN, RADIUS_MAX);
                return v.into_iter().map(|c| c * r / norm).collect();
            }
        }
    }

    /// Fiber vector with independently sampled blocks of the given sizes.
    pub fn fiber(&mut self, blocks: &[usize]) -> Vec<f64> {
        let mut y = Vec::new();
        for &b in blocks {
            y.extend(self.fiber_block(b));
        }
        y
    }
}

/// `count` points on a product of dimensions `m + n`.
pub fn product_samples(m: usize, n: usize, count: usize, seed: u64) -> Vec<TangentPoint> {
    let mut s = Sampler::new(seed);
    (0..count)
        .map(|_| {
            let x = s.base_point(m + n);
            let y = s.fiber(&[m, n]);
            TangentPoint::new(x, y)
        })
        .collect()
}

/// `count` points on a single chart.
pub fn chart_samples(dim: usize, count: usize, seed: u64) -> Vec<TangentPoint> {
    let mut s = Sampler::new(seed);
    (0..count)
        .map(|_| {
            let x = s.base_point(dim);
            let y = s.fiber(&[dim]);
            TangentPoint::new(x, y)
        })
        .collect()
}

/// `count` fiber vectors at the fixed base point `x`.
pub fn fiber_samples(x: &[f64], blocks: &[usize], count: usize, seed: u64) -> Vec<TangentPoint> {
    let mut s = Sampler::new(seed);
    (0..count).map(|_| TangentPoint::new(x.to_vec(), s.fiber(blocks))).collect()
}
