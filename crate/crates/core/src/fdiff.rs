//! Central finite differences with one level of Richardson extrapolation,
//! and an audit of jet derivatives against them.
//!
//! The audit checks each jet derivative of order `k` against a difference
//! quotient of the jet derivative of order `k - 1`, so every order is tested
//! with a single first-order stencil and the comparison error does not
//! compound with order.

use alloc::vec;
use alloc::vec::Vec;

use crate::curvature::{CurvatureError, Oracle};
use crate::jet::Jet;
use crate::linalg::invert;
use crate::metric::{FinslerFunction, TangentPoint};
use crate::tolerance::{FD_LOW_ORDER, FD_STEP, FD_THIRD_ORDER, RELATIVE_FLOOR};

/// Shifts used by [`richardson`]: `±h`, then `±h/2`.
pub fn shifts(h: f64) -> [f64; 4] {
    [h, -h, 0.5 * h, -0.5 * h]
}

/// Combines values at [`shifts`] into the extrapolated derivative
/// `(4 D(h/2) − D(h)) / 3`.
pub fn richardson(values: [f64; 4], h: f64) -> f64 {
    let d_h = (values[0] - values[1]) / (2.0 * h);
    let d_half = (values[2] - values[3]) / h;
    (4.0 * d_half - d_h) / 3.0
}

/// `d/dt f(t)` at `t = 0`.
pub fn derivative<E>(mut f: impl FnMut(f64) -> Result<f64, E>, h: f64) -> Result<f64, E> {
    let s = shifts(h);
    Ok(richardson([f(s[0])?, f(s[1])?, f(s[2])?, f(s[3])?], h))
}

/// Mixed partial `∂^k f / ∂z_{v1} ⋯ ∂z_{vk}` by nested differences.
pub fn partial<E>(f: &impl Fn(&[f64]) -> Result<f64, E>, z: &[f64], vars: &[usize], h: f64) -> Result<f64, E> {
    match vars.split_first() {
        None => f(z),
        Some((&v, rest)) => derivative(
            |t| {
                let mut zt = z.to_vec();
                zt[v] += t;
                partial(f, &zt, rest, h)
            },
            h,
        ),
    }
}

/// One line of the audit: a quantity at one derivative order.
#[derive(Debug, Clone, PartialEq)]
pub struct FdRow {
    pub quantity: &'static str,
    pub order: usize,
    pub entries: usize,
    pub max_abs_diff: f64,
    pub max_abs_jet: f64,
    /// `max_abs_diff / max(max_abs_jet, RELATIVE_FLOOR)`
    pub relative: f64,
    pub tolerance: f64,
}

impl FdRow {
    pub fn pass(&self) -> bool {
        self.relative <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdAudit {
    pub step: f64,
    pub richardson_levels: usize,
    pub points: usize,
    pub skipped: usize,
    pub rows: Vec<FdRow>,
}

impl FdAudit {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(FdRow::pass)
    }

    pub fn row(&self, quantity: &str, order: usize) -> Option<&FdRow> {
        self.rows.iter().find(|r| r.quantity == quantity && r.order == order)
    }
}

pub fn tolerance_for(order: usize) -> f64 {
    if order <= 2 {
        FD_LOW_ORDER
    } else {
        FD_THIRD_ORDER
    }
}

struct Tally {
    quantity: &'static str,
    order: usize,
    entries: usize,
    diff: f64,
    scale: f64,
}

impl Tally {
    fn add(&mut self, jet: f64, fd: f64) {
        self.entries += 1;
        self.diff = self.diff.max((jet - fd).abs());
        self.scale = self.scale.max(jet.abs());
    }

    fn row(&self) -> FdRow {
        FdRow {
            quantity: self.quantity,
            order: self.order,
            entries: self.entries,
            max_abs_diff: self.diff,
            max_abs_jet: self.scale,
            relative: self.diff / self.scale.max(RELATIVE_FLOOR),
            tolerance: tolerance_for(self.order),
        }
    }
}

/// Nondecreasing index tuples of length `k` over `0..vars` with at most
/// `max_x` entries below `dim`.
fn tuples(k: usize, vars: usize, dim: usize, max_x: usize) -> Vec<Vec<usize>> {
    fn go(k: usize, start: usize, vars: usize, dim: usize, max_x: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            if cur.iter().filter(|&&v| v < dim).count() <= max_x {
                out.push(cur.clone());
            }
            return;
        }
        for v in start..vars {
            cur.push(v);
            go(k, v, vars, dim, max_x, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(k, 0, vars, dim, max_x, &mut Vec::new(), &mut out);
    out
}

fn shifted(point: &TangentPoint, var: usize, t: f64) -> TangentPoint {
    let mut p = point.clone();
    let n = p.dim();
    if var < n {
        p.x[var] += t;
    } else {
        p.y[var - n] += t;
    }
    p
}

/// Spray from finite differences of real-valued `F²` alone.
pub fn spray_by_differences<M: FinslerFunction>(metric: &M, point: &TangentPoint, h: f64) -> Result<Vec<f64>, CurvatureError> {
    let n = metric.dim();
    let f = |z: &[f64]| metric.f_squared_real(&z[..n], &z[n..]);
    let mut z = point.x.clone();
    z.extend_from_slice(&point.y);
    let mut g = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in a..n {
            let v = 0.5 * partial(&f, &z, &[n + a, n + b], h)?;
            g[a][b] = v;
            g[b][a] = v;
        }
    }
    let g_inv = invert(&g)?.matrix;
    let mut w = vec![0.0; n];
    for (p, wp) in w.iter_mut().enumerate() {
        let mut acc = -partial(&f, &z, &[p], h)?;
        for q in 0..n {
            acc += partial(&f, &z, &[q, n + p], h)? * point.y[q];
        }
        *wp = acc;
    }
    Ok((0..n)
        .map(|a| 0.25 * (0..n).map(|p| g_inv[a][p] * w[p]).sum::<f64>())
        .collect())
}

/// Audits jet partials of `F²`, `g` and the spray against central
/// differences at every point. Points the oracle rejects are skipped.
pub fn audit<M: FinslerFunction>(metric: &M, points: &[TangentPoint], h: f64) -> FdAudit {
    let n = metric.dim();
    let oracle = Oracle::new(n);
    let mk = |quantity, order| Tally {
        quantity,
        order,
        entries: 0,
        diff: 0.0,
        scale: 0.0,
    };
    let mut tallies = vec![
        mk("f_squared", 1),
        mk("f_squared", 2),
        mk("f_squared", 3),
        mk("g", 0),
        mk("g", 1),
        mk("spray", 0),
        mk("spray", 1),
        mk("spray", 2),
        mk("spray", 3),
    ];
    let mut valid = 0;
    let mut skipped = 0;
    for point in points {
        let mut local: Vec<Tally> = tallies.iter().map(|t| mk(t.quantity, t.order)).collect();
        if audit_point(metric, &oracle, point, h, &mut local).is_err() {
            skipped += 1;
            continue;
        }
        valid += 1;
        for (t, l) in tallies.iter_mut().zip(local) {
            t.entries += l.entries;
            t.diff = t.diff.max(l.diff);
            t.scale = t.scale.max(l.scale);
        }
    }
    FdAudit {
        step: h,
        richardson_levels: 1,
        points: valid,
        skipped,
        rows: tallies.iter().map(Tally::row).collect(),
    }
}

pub fn audit_default<M: FinslerFunction>(metric: &M, points: &[TangentPoint]) -> FdAudit {
    audit(metric, points, FD_STEP)
}

fn audit_point<M: FinslerFunction>(
    metric: &M,
    oracle: &Oracle,
    point: &TangentPoint,
    h: f64,
    t: &mut [Tally],
) -> Result<(), CurvatureError> {
    let n = metric.dim();
    let vars = 2 * n;
    let e = oracle.f_squared_jet(metric, point)?;
    let spray = oracle.spray_jets(metric, point)?;
    let s = shifts(h);

    // F² jets at every shifted point, indexed [var][shift]
    let mut e_shift: Vec<Vec<Jet>> = Vec::with_capacity(vars);
    for v in 0..vars {
        let row = s
            .iter()
            .map(|&d| oracle.f_squared_jet(metric, &shifted(point, v, d)))
            .collect::<Result<Vec<_>, _>>()?;
        e_shift.push(row);
    }
    let fd_of = |jets: &[Jet], rest: &[usize]| -> Result<f64, CurvatureError> {
        let vals = [
            jets[0].partial_vars(rest)?,
            jets[1].partial_vars(rest)?,
            jets[2].partial_vars(rest)?,
            jets[3].partial_vars(rest)?,
        ];
        Ok(richardson(vals, h))
    };

    for order in 1..=3 {
        for tup in tuples(order, vars, n, 1) {
            let jet = e.partial_vars(&tup)?;
            let fd = fd_of(&e_shift[tup[0]], &tup[1..])?;
            t[order - 1].add(jet, fd);
        }
    }

    for a in 0..n {
        for b in a..n {
            let jet = 0.5 * e.partial_vars(&[n + a, n + b])?;
            t[3].add(jet, 0.5 * fd_of(&e_shift[n + a], &[n + b])?);
            for v in 0..vars {
                let jet1 = 0.5 * e.partial_vars(&[v, n + a, n + b])?;
                t[4].add(jet1, 0.5 * fd_of(&e_shift[v], &[n + a, n + b])?);
            }
        }
    }

    let by_fd = spray_by_differences(metric, point, h)?;
    for (j, fd) in spray.iter().zip(&by_fd) {
        t[5].add(j.value(), *fd);
    }
    let mut spray_shift: Vec<Vec<Vec<Jet>>> = Vec::with_capacity(n);
    for a in 0..n {
        let row = s
            .iter()
            .map(|&d| oracle.spray_jets(metric, &shifted(point, n + a, d)))
            .collect::<Result<Vec<_>, _>>()?;
        spray_shift.push(row);
    }
    for order in 1..=3 {
        for tup in tuples(order, vars, n, 0) {
            for (c, jet) in spray.iter().enumerate() {
                let exact = jet.partial_vars(&tup)?;
                let shifted_jets: Vec<Jet> = spray_shift[tup[0] - n].iter().map(|js| js[c].clone()).collect();
                let fd = fd_of(&shifted_jets, &tup[1..])?;
                t[5 + order].add(exact, fd);
            }
        }
    }
    Ok(())
}
