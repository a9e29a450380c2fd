//! Small dense linear algebra over any [`Scalar`].

use alloc::vec::Vec;

use crate::jet::JetError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Inverse<S> {
    pub matrix: Vec<Vec<S>>,
    /// Smallest absolute pivot value met during elimination.
    pub min_pivot: f64,
}

/// Gauss-Jordan inversion with partial pivoting on value coefficients.
///
/// Fails only on an exactly zero pivot; callers decide what pivot size is
/// acceptable from `min_pivot`.
pub fn invert<S: Scalar>(m: &[Vec<S>]) -> Result<Inverse<S>, JetError> {
    let n = m.len();
    let mut a: Vec<Vec<S>> = m.to_vec();
    let one = m[0][0].lift_constant(1.0);
    let zero = m[0][0].lift_constant(0.0);
    let mut inv: Vec<Vec<S>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { one.clone() } else { zero.clone() })
                .collect()
        })
        .collect();
    let mut min_pivot = f64::INFINITY;

    for col in 0..n {
        let p = (col..n)
            .max_by(|&i, &j| a[i][col].value().abs().total_cmp(&a[j][col].value().abs()))
            .unwrap_or(col);
        a.swap(col, p);
        inv.swap(col, p);
        min_pivot = min_pivot.min(a[col][col].value().abs());
        let pivot_inv = one.div(&a[col][col])?;
        for j in 0..n {
            a[col][j] = a[col][j].mul(&pivot_inv);
            inv[col][j] = inv[col][j].mul(&pivot_inv);
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row][col].clone();
            for j in 0..n {
                let t = factor.mul(&a[col][j]);
                a[row][j] = a[row][j].sub(&t);
                let t = factor.mul(&inv[col][j]);
                inv[row][j] = inv[row][j].sub(&t);
            }
        }
    }
    Ok(Inverse {
        matrix: inv,
        min_pivot,
    })
}

/// Pivots of the symmetric LDLᵀ factorisation without pivoting. They are the
/// ratios of consecutive leading principal minors, so the matrix is positive
/// definite iff all of them are positive.
pub fn ldl_pivots(m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    let mut l = alloc::vec![alloc::vec![0.0; n]; n];
    let mut d: Vec<f64> = Vec::with_capacity(n);
    for j in 0..n {
        let mut dj = m[j][j];
        for k in 0..j {
            dj -= l[j][k] * l[j][k] * d[k];
        }
        d.push(dj);
        for i in j + 1..n {
            let mut s = m[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k] * d[k];
            }
            l[i][j] = if dj != 0.0 { s / dj } else { f64::NAN };
        }
    }
    d
}
