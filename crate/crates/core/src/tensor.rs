//! Dense square tensors of small rank, stored row-major.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dim: usize,
    rank: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(dim: usize, rank: usize) -> Self {
        Self {
            dim,
            rank,
            data: vec![0.0; dim.pow(rank as u32)],
        }
    }

    pub fn from_fn(dim: usize, rank: usize, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut t = Self::zeros(dim, rank);
        let mut idx = vec![0usize; rank];
        for slot in 0..t.data.len() {
            t.unflatten(slot, &mut idx);
            t.data[slot] = f(&idx);
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    fn flatten(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank);
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.dim);
            acc * self.dim + i
        })
    }

    fn unflatten(&self, mut slot: usize, idx: &mut [usize]) {
        for k in (0..self.rank).rev() {
            idx[k] = slot % self.dim;
            slot /= self.dim;
        }
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.flatten(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let s = self.flatten(idx);
        self.data[s] = v;
    }

    /// Visits every index tuple in row-major order.
    pub fn for_each(&self, mut f: impl FnMut(&[usize], f64)) {
        let mut idx = vec![0usize; self.rank];
        for (slot, &v) in self.data.iter().enumerate() {
            self.unflatten(slot, &mut idx);
            f(&idx, v);
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Elementwise `|self - other|`, maximised.
    pub fn max_abs_diff(&self, other: &Tensor) -> f64 {
        debug_assert_eq!(self.data.len(), other.data.len());
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn scaled(&self, k: f64) -> Tensor {
        Tensor {
            dim: self.dim,
            rank: self.rank,
            data: self.data.iter().map(|v| v * k).collect(),
        }
    }

    /// Largest deviation from invariance under swapping each adjacent pair of
    /// indices in `positions` (adjacent transpositions generate all permutations).
    pub fn symmetry_defect(&self, positions: &[usize]) -> f64 {
        let mut worst: f64 = 0.0;
        let mut swapped = vec![0usize; self.rank];
        self.for_each(|idx, v| {
            for w in positions.windows(2) {
                swapped.copy_from_slice(idx);
                swapped.swap(w[0], w[1]);
                worst = worst.max((v - self.get(&swapped)).abs());
            }
        });
        worst
    }

    /// Contracts the first index with a vector: `Σ_a v^a T_{a...}`.
    pub fn contract_first(&self, v: &[f64]) -> Tensor {
        assert!(self.rank >= 1);
        let inner = self.dim.pow(self.rank as u32 - 1);
        let mut out = Tensor::zeros(self.dim, self.rank - 1);
        for (a, va) in v.iter().enumerate() {
            for k in 0..inner {
                out.data[k] += va * self.data[a * inner + k];
            }
        }
        out
    }

    /// Rank-3 trace against a symmetric matrix: `Σ_{bc} T_{abc} m^{bc}`.
    pub fn trace_last_two(&self, m: &Tensor) -> Vec<f64> {
        assert_eq!(self.rank, 3);
        (0..self.dim)
            .map(|a| {
                let mut s = 0.0;
                for b in 0..self.dim {
                    for c in 0..self.dim {
                        s += self.get(&[a, b, c]) * m.get(&[b, c]);
                    }
                }
                s
            })
            .collect()
    }
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// `M v` for a rank-2 tensor.
pub fn mat_vec(m: &Tensor, v: &[f64]) -> Vec<f64> {
    (0..m.dim())
        .map(|i| (0..m.dim()).map(|j| m.get(&[i, j]) * v[j]).sum())
        .collect()
}
