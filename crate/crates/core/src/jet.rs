//! Truncated multivariate Taylor arithmetic ("jets").
//!
//! A [`JetSpace`] fixes the active variables and the degree caps. Variables
//! `0..n_x` are base (`x`) variables, variables `n_x..n_x + n_y` are fiber
//! (`y`) variables. Each group has its own total-degree cap.
//!
//! Internally a [`Jet`] stores *Taylor coefficients*: the coefficient of the
//! monomial `z^α` is `∂^α f / α!`. [`Jet::partial`] always returns the raw
//! partial derivative `∂^α f`, i.e. the coefficient times `α!`.
//!
//! Every jet also carries the degrees up to which its coefficients are valid.
//! Differentiating lowers validity by one in the group of the variable, and
//! binary operations take the minimum of both operands.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

/// Default cap on the total base-variable degree.
pub const X_DEGREE_CAP: u8 = 1;
/// Default cap on the total fiber-variable degree.
pub const Y_DEGREE_CAP: u8 = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("variable index {index} out of range for a space with {arity} variables")]
    VariableOutOfRange { index: usize, arity: usize },
    #[error("multi-index {0} exceeds the valid degrees of the jet")]
    ExceedsCaps(MultiIndex),
    #[error("multi-index has {got} exponents, space has {expected} variables")]
    ArityMismatch { got: usize, expected: usize },
    #[error("division by a jet with zero value")]
    DivisionByZero,
    #[error("{op} of a jet with non-positive value {value}")]
    NonPositive { op: &'static str, value: f64 },
    #[error("non-finite coefficient produced by {0}")]
    NonFinite(&'static str),
}

/// Degree caps (or validity degrees) for the base and fiber groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegreeCaps {
    pub x: u8,
    pub y: u8,
}

impl DegreeCaps {
    pub const fn new(x: u8, y: u8) -> Self {
        Self { x, y }
    }

    fn min(self, other: Self) -> Self {
        Self {
            x: self.x.min(other.x),
            y: self.y.min(other.y),
        }
    }

    fn admits(self, x: u8, y: u8) -> bool {
        x <= self.x && y <= self.y
    }
}

impl Default for DegreeCaps {
    fn default() -> Self {
        Self::new(X_DEGREE_CAP, Y_DEGREE_CAP)
    }
}

/// Exponent vector over all variables of a space, with cached group degrees.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex {
    exps: Vec<u8>,
    x_degree: u8,
    y_degree: u8,
}

impl MultiIndex {
    /// Builds a multi-index; the first `n_x` exponents belong to base variables.
    pub fn new(exps: Vec<u8>, n_x: usize) -> Self {
        let n_x = n_x.min(exps.len());
        let x_degree = exps[..n_x].iter().sum();
        let y_degree = exps[n_x..].iter().sum();
        Self {
            exps,
            x_degree,
            y_degree,
        }
    }

    /// Multi-index of `∂^k / ∂z_{v1} ... ∂z_{vk}`; repeated variables accumulate.
    pub fn from_vars(vars: &[usize], n_vars: usize, n_x: usize) -> Self {
        let mut exps = vec![0u8; n_vars];
        for &v in vars {
            exps[v] += 1;
        }
        Self::new(exps, n_x)
    }

    pub fn exponents(&self) -> &[u8] {
        &self.exps
    }

    pub fn x_degree(&self) -> u8 {
        self.x_degree
    }

    pub fn y_degree(&self) -> u8 {
        self.y_degree
    }

    pub fn total_degree(&self) -> u8 {
        self.x_degree + self.y_degree
    }

    /// `α! = Π α_k!`
    pub fn factorial(&self) -> f64 {
        self.exps
            .iter()
            .map(|&e| (1..=e as u32).product::<u32>() as f64)
            .product()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.exps.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Copy)]
struct ProductTerm {
    lhs: u32,
    rhs: u32,
    out: u32,
}

/// Monomial basis and multiplication table for a fixed variable set.
#[derive(Debug)]
pub struct JetSpace {
    n_x: usize,
    n_y: usize,
    caps: DegreeCaps,
    monomials: Vec<MultiIndex>,
    lookup: BTreeMap<Vec<u8>, u32>,
    // sorted by output y-degree, then output x-degree
    products: Vec<ProductTerm>,
    // products_end[y] = end of the terms whose output y-degree is <= y
    products_end: Vec<usize>,
    // the subset of `products` with x-degree-0 output, same ordering
    products_x0: Vec<ProductTerm>,
    products_x0_end: Vec<usize>,
    // shift[v][i] = index of monomial i + e_v, if within caps
    shift: Vec<Vec<Option<u32>>>,
}

impl JetSpace {
    pub fn new(n_x: usize, n_y: usize, caps: DegreeCaps) -> Arc<Self> {
        let n = n_x + n_y;
        let mut monomials = Vec::new();
        let mut current = vec![0u8; n];
        enumerate(&mut current, 0, n_x, caps, 0, 0, &mut monomials);
        let mut monomials: Vec<MultiIndex> = monomials
            .into_iter()
            .map(|e| MultiIndex::new(e, n_x))
            .collect();
        monomials.sort_by(|a, b| {
            a.total_degree()
                .cmp(&b.total_degree())
                .then_with(|| b.exps.cmp(&a.exps))
        });
        let lookup: BTreeMap<Vec<u8>, u32> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.exps.clone(), i as u32))
            .collect();

        let mut products = Vec::new();
        let mut sum = vec![0u8; n];
        for (i, a) in monomials.iter().enumerate() {
            for (j, b) in monomials.iter().enumerate() {
                if !caps.admits(a.x_degree + b.x_degree, a.y_degree + b.y_degree) {
                    continue;
                }
                for k in 0..n {
                    sum[k] = a.exps[k] + b.exps[k];
                }
                let out = lookup[&sum];
                products.push(ProductTerm {
                    lhs: i as u32,
                    rhs: j as u32,
                    out,
                });
            }
        }
        products.sort_by_key(|t| {
            let m = &monomials[t.out as usize];
            (m.y_degree, m.x_degree)
        });
        let products_end = (0..=caps.y)
            .map(|y| products.partition_point(|t| monomials[t.out as usize].y_degree <= y))
            .collect();
        let products_x0: Vec<ProductTerm> = products
            .iter()
            .filter(|t| monomials[t.out as usize].x_degree == 0)
            .copied()
            .collect();
        let products_x0_end = (0..=caps.y)
            .map(|y| products_x0.partition_point(|t| monomials[t.out as usize].y_degree <= y))
            .collect();

        let shift = (0..n)
            .map(|v| {
                monomials
                    .iter()
                    .map(|m| {
                        let mut e = m.exps.clone();
                        e[v] += 1;
                        lookup.get(&e).copied()
                    })
                    .collect()
            })
            .collect();

        Arc::new(Self {
            n_x,
            n_y,
            caps,
            monomials,
            lookup,
            products,
            products_end,
            products_x0,
            products_x0_end,
            shift,
        })
    }

    /// Space with the default caps (`x ≤ 1`, `y ≤ 5`).
    pub fn with_default_caps(n_x: usize, n_y: usize) -> Arc<Self> {
        Self::new(n_x, n_y, DegreeCaps::default())
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn arity(&self) -> usize {
        self.n_x + self.n_y
    }

    pub fn caps(&self) -> DegreeCaps {
        self.caps
    }

    /// Number of stored coefficients per jet.
    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn multi_index(&self, vars: &[usize]) -> MultiIndex {
        MultiIndex::from_vars(vars, self.arity(), self.n_x)
    }

    fn is_x_var(&self, v: usize) -> bool {
        v < self.n_x
    }

    /// Constant jet.
    pub fn constant(self: &Arc<Self>, value: f64) -> Jet {
        let mut coeffs = vec![0.0; self.len()];
        coeffs[0] = value;
        Jet {
            space: Arc::clone(self),
            coeffs,
            valid: self.caps,
        }
    }

    /// Seeds variable `index` at `value`: first-order coefficient 1 at its own slot.
    pub fn lift_variable(self: &Arc<Self>, index: usize, value: f64) -> Result<Jet, JetError> {
        if index >= self.arity() {
            return Err(JetError::VariableOutOfRange {
                index,
                arity: self.arity(),
            });
        }
        let mut jet = self.constant(value);
        let cap = if self.is_x_var(index) {
            self.caps.x
        } else {
            self.caps.y
        };
        if cap > 0 {
            let slot = self.shift[index][0].expect("unit monomial within caps");
            jet.coeffs[slot as usize] = 1.0;
        }
        Ok(jet)
    }
}

fn enumerate(
    current: &mut Vec<u8>,
    pos: usize,
    n_x: usize,
    caps: DegreeCaps,
    xd: u8,
    yd: u8,
    out: &mut Vec<Vec<u8>>,
) {
    if pos == current.len() {
        out.push(current.clone());
        return;
    }
    let room = if pos < n_x { caps.x - xd } else { caps.y - yd };
    for e in 0..=room {
        current[pos] = e;
        let (nx, ny) = if pos < n_x { (xd + e, yd) } else { (xd, yd + e) };
        enumerate(current, pos + 1, n_x, caps, nx, ny, out);
    }
    current[pos] = 0;
}

/// A truncated Taylor expansion around a point, in a shared [`JetSpace`].
#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    coeffs: Vec<f64>,
    valid: DegreeCaps,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut map = f.debug_map();
        for (m, c) in self.space.monomials.iter().zip(&self.coeffs) {
            if *c != 0.0 {
                map.entry(m, c);
            }
        }
        map.finish()
    }
}

impl Jet {
    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    /// Function value (coefficient of the zero multi-index).
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Degrees up to which the coefficients are exact.
    pub fn valid_degrees(&self) -> DegreeCaps {
        self.valid
    }

    pub fn taylor_coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    fn with_coeffs(&self, coeffs: Vec<f64>, valid: DegreeCaps) -> Jet {
        let mut jet = Jet {
            space: Arc::clone(&self.space),
            coeffs,
            valid,
        };
        jet.truncate();
        jet
    }

    // zero every coefficient beyond the validity degrees
    fn truncate(&mut self) {
        if self.valid == self.space.caps {
            return;
        }
        for (c, m) in self.coeffs.iter_mut().zip(&self.space.monomials) {
            if !self.valid.admits(m.x_degree, m.y_degree) {
                *c = 0.0;
            }
        }
    }

    fn check_space(&self, other: &Jet) {
        debug_assert!(
            Arc::ptr_eq(&self.space, &other.space),
            "jets from different spaces"
        );
    }

    /// Raw partial derivative `∂^α f` at the expansion point.
    pub fn partial(&self, idx: &MultiIndex) -> Result<f64, JetError> {
        if idx.exps.len() != self.space.arity() {
            return Err(JetError::ArityMismatch {
                got: idx.exps.len(),
                expected: self.space.arity(),
            });
        }
        if !self.valid.admits(idx.x_degree, idx.y_degree) {
            return Err(JetError::ExceedsCaps(idx.clone()));
        }
        let slot = self.space.lookup[&idx.exps];
        Ok(self.coeffs[slot as usize] * idx.factorial())
    }

    /// Shorthand for `partial` over a list of (possibly repeated) variables.
    pub fn partial_vars(&self, vars: &[usize]) -> Result<f64, JetError> {
        self.partial(&self.space.multi_index(vars))
    }

    /// The jet of `∂f/∂z_var`, valid to one degree less in the variable's group.
    pub fn derivative(&self, var: usize) -> Result<Jet, JetError> {
        let space = &self.space;
        if var >= space.arity() {
            return Err(JetError::VariableOutOfRange {
                index: var,
                arity: space.arity(),
            });
        }
        let mut valid = self.valid;
        let group = if space.is_x_var(var) {
            &mut valid.x
        } else {
            &mut valid.y
        };
        if *group == 0 {
            let idx = space.multi_index(&[var]);
            return Err(JetError::ExceedsCaps(idx));
        }
        *group -= 1;
        let mut coeffs = vec![0.0; space.len()];
        for (i, m) in space.monomials.iter().enumerate() {
            if let Some(s) = space.shift[var][i] {
                coeffs[i] = (m.exps[var] as f64 + 1.0) * self.coeffs[s as usize];
            }
        }
        Ok(self.with_coeffs(coeffs, valid))
    }

    /// The same jet with validity lowered to `caps` (componentwise minimum).
    pub fn truncated(&self, caps: DegreeCaps) -> Jet {
        self.with_coeffs(self.coeffs.clone(), self.valid.min(caps))
    }

    pub fn add(&self, rhs: &Jet) -> Jet {
        self.check_space(rhs);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        self.with_coeffs(coeffs, self.valid.min(rhs.valid))
    }

    pub fn sub(&self, rhs: &Jet) -> Jet {
        self.check_space(rhs);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        self.with_coeffs(coeffs, self.valid.min(rhs.valid))
    }

    pub fn neg(&self) -> Jet {
        self.scale(-1.0)
    }

    pub fn scale(&self, k: f64) -> Jet {
        Jet {
            space: Arc::clone(&self.space),
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
            valid: self.valid,
        }
    }

    pub fn add_constant(&self, k: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += k;
        out
    }

    pub fn mul(&self, rhs: &Jet) -> Jet {
        self.check_space(rhs);
        let space = &self.space;
        let valid = self.valid.min(rhs.valid);
        let mut coeffs = vec![0.0; space.len()];
        if valid.x >= space.caps.x {
            let end = space.products_end[valid.y as usize];
            for t in &space.products[..end] {
                coeffs[t.out as usize] += self.coeffs[t.lhs as usize] * rhs.coeffs[t.rhs as usize];
            }
        } else if valid.x == 0 {
            let end = space.products_x0_end[valid.y as usize];
            for t in &space.products_x0[..end] {
                coeffs[t.out as usize] += self.coeffs[t.lhs as usize] * rhs.coeffs[t.rhs as usize];
            }
        } else {
            let end = space.products_end[valid.y as usize];
            for t in &space.products[..end] {
                if space.monomials[t.out as usize].x_degree <= valid.x {
                    coeffs[t.out as usize] +=
                        self.coeffs[t.lhs as usize] * rhs.coeffs[t.rhs as usize];
                }
            }
        }
        Jet {
            space: Arc::clone(space),
            coeffs,
            valid,
        }
    }

    /// Evaluates `Σ_k d_k (f − f₀)^k`, where `d_k` are the Taylor coefficients
    /// of an outer function at `f₀`. The nilpotent part vanishes beyond the
    /// total validity degree, so the sum is exact after truncation.
    fn compose(&self, derivs: &[f64]) -> Jet {
        let mut nilpotent = self.clone();
        nilpotent.coeffs[0] = 0.0;
        let mut iter = derivs.iter().rev();
        let mut acc = self.space.constant(*iter.next().unwrap_or(&0.0));
        acc.valid = self.valid;
        for d in iter {
            acc = acc.mul(&nilpotent).add_constant(*d);
        }
        acc
    }

    fn series_order(&self) -> usize {
        (self.valid.x + self.valid.y) as usize
    }

    fn finite(self, op: &'static str) -> Result<Jet, JetError> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(JetError::NonFinite(op))
        }
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        let a = self.value();
        if a == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        let n = self.series_order();
        let mut d = Vec::with_capacity(n + 1);
        let mut term = 1.0 / a;
        for _ in 0..=n {
            d.push(term);
            term *= -1.0 / a;
        }
        self.compose(&d).finite("recip")
    }

    pub fn div(&self, rhs: &Jet) -> Result<Jet, JetError> {
        let mut q = self.mul(&rhs.recip()?);
        // keep the value bit-identical to real division
        q.coeffs[0] = self.value() / rhs.value();
        q.finite("div")
    }

    pub fn sqrt(&self) -> Result<Jet, JetError> {
        let a = self.value();
        if !(a > 0.0) {
            return Err(JetError::NonPositive {
                op: "sqrt",
                value: a,
            });
        }
        // binomial(1/2, k) a^(1/2 - k)
        let n = self.series_order();
        let mut d = Vec::with_capacity(n + 1);
        let mut binom = 1.0;
        let mut power = libm::sqrt(a);
        for k in 0..=n {
            d.push(binom * power);
            binom *= (0.5 - k as f64) / (k as f64 + 1.0);
            power /= a;
        }
        self.compose(&d).finite("sqrt")
    }

    pub fn exp(&self) -> Result<Jet, JetError> {
        let e = libm::exp(self.value());
        let n = self.series_order();
        let mut d = Vec::with_capacity(n + 1);
        let mut term = e;
        for k in 0..=n {
            d.push(term);
            term /= k as f64 + 1.0;
        }
        self.compose(&d).finite("exp")
    }

    pub fn ln(&self) -> Result<Jet, JetError> {
        let a = self.value();
        if !(a > 0.0) {
            return Err(JetError::NonPositive { op: "ln", value: a });
        }
        let n = self.series_order();
        let mut d = Vec::with_capacity(n + 1);
        d.push(libm::log(a));
        let mut power = 1.0;
        for k in 1..=n {
            power /= a;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            d.push(sign * power / k as f64);
        }
        self.compose(&d).finite("ln")
    }

    pub fn sin(&self) -> Result<Jet, JetError> {
        self.trig(false)
    }

    pub fn cos(&self) -> Result<Jet, JetError> {
        self.trig(true)
    }

    fn trig(&self, cosine: bool) -> Result<Jet, JetError> {
        let (s, c) = (libm::sin(self.value()), libm::cos(self.value()));
        // derivatives of sin cycle through sin, cos, -sin, -cos
        let cycle = if cosine { [c, -s, -c, s] } else { [s, c, -s, -c] };
        let n = self.series_order();
        let mut d = Vec::with_capacity(n + 1);
        let mut fact = 1.0;
        for k in 0..=n {
            d.push(cycle[k % 4] / fact);
            fact *= k as f64 + 1.0;
        }
        self.compose(&d).finite(if cosine { "cos" } else { "sin" })
    }

    /// Integer power by repeated squaring; negative exponents go through `recip`.
    pub fn powi(&self, n: i32) -> Result<Jet, JetError> {
        let base = if n < 0 { self.recip()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut result = self.space.constant(1.0);
        result.valid = self.valid;
        let mut square = base;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&square);
            }
            e >>= 1;
            if e > 0 {
                square = square.mul(&square);
            }
        }
        result.finite("powi")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space1() -> Arc<JetSpace> {
        JetSpace::with_default_caps(0, 3)
    }

    #[test]
    fn lift_variable_seeds_value_and_unit_slope() {
        let s = JetSpace::with_default_caps(2, 2);
        let j = s.lift_variable(0, 3.0).unwrap();
        assert_eq!(j.value(), 3.0);
        assert_eq!(j.partial_vars(&[0]).unwrap(), 1.0);
        assert_eq!(j.partial_vars(&[1]).unwrap(), 0.0);
        assert_eq!(j.partial_vars(&[2, 2]).unwrap(), 0.0);

        let z = s.lift_variable(1, 0.0).unwrap();
        assert_eq!(z.value(), 0.0);
        assert_eq!(z.partial_vars(&[1]).unwrap(), 1.0);

        assert!(matches!(
            s.lift_variable(4, 1.0),
            Err(JetError::VariableOutOfRange { index: 4, arity: 4 })
        ));
    }

    #[test]
    fn square_of_seeded_variable() {
        let s = space1();
        let x = s.lift_variable(0, 3.0).unwrap();
        let sq = x.mul(&x);
        assert_eq!(sq.value(), 9.0);
        assert_eq!(sq.partial_vars(&[0]).unwrap(), 6.0);
        assert_eq!(sq.partial_vars(&[0, 0]).unwrap(), 2.0);
        assert_eq!(sq.partial_vars(&[0, 0, 0]).unwrap(), 0.0);
    }

    #[test]
    fn sqrt_of_constant() {
        let s = space1();
        let r = s.constant(4.0).sqrt().unwrap();
        assert_eq!(r.value(), 2.0);
        assert!(r.taylor_coefficients()[1..].iter().all(|&c| c == 0.0));
    }

    #[test]
    fn quotient_identity() {
        let s = space1();
        let x = s.lift_variable(0, 5.0).unwrap();
        let q = x.mul(&x).div(&x).unwrap();
        assert!((q.value() - 5.0).abs() < 1e-15);
        assert!((q.partial_vars(&[0]).unwrap() - 1.0).abs() < 1e-15);
        for k in 2..=5 {
            let vars = vec![0; k];
            assert!(q.partial_vars(&vars).unwrap().abs() < 1e-13);
        }
    }

    #[test]
    fn fifth_derivative_of_fifth_power() {
        let s = space1();
        let y = s.lift_variable(0, 2.0).unwrap();
        let p = y.powi(5).unwrap();
        assert_eq!(p.partial_vars(&[0; 5]).unwrap(), 120.0);
        assert_eq!(p.value(), 32.0);
    }

    #[test]
    fn trilinear_mixed_partial() {
        let s = space1();
        let a = s.lift_variable(0, 0.3).unwrap();
        let b = s.lift_variable(1, -1.2).unwrap();
        let c = s.lift_variable(2, 2.5).unwrap();
        let p = a.mul(&b).mul(&c);
        assert_eq!(p.partial_vars(&[0, 1, 2]).unwrap(), 1.0);
        assert_eq!(p.partial_vars(&[0, 0, 1]).unwrap(), 0.0);
    }

    #[test]
    fn constant_has_zero_partials() {
        let s = JetSpace::with_default_caps(1, 2);
        let c = s.constant(7.5);
        for vars in [&[0usize][..], &[1], &[1, 2], &[0, 2, 2, 1]] {
            assert_eq!(c.partial_vars(vars).unwrap(), 0.0);
        }
    }

    #[test]
    fn caps_are_enforced() {
        let s = JetSpace::with_default_caps(1, 1);
        let x = s.lift_variable(0, 1.0).unwrap();
        assert!(matches!(
            x.partial_vars(&[0, 0]),
            Err(JetError::ExceedsCaps(_))
        ));
        let dx = x.derivative(0).unwrap();
        assert!(dx.derivative(0).is_err());
        assert_eq!(dx.value(), 1.0);
    }

    #[test]
    fn domain_errors() {
        let s = space1();
        let z = s.constant(0.0);
        assert_eq!(s.constant(1.0).div(&z).unwrap_err(), JetError::DivisionByZero);
        assert!(matches!(
            s.constant(-1.0).sqrt(),
            Err(JetError::NonPositive { op: "sqrt", .. })
        ));
        assert!(matches!(z.ln(), Err(JetError::NonPositive { op: "ln", .. })));
        assert!(matches!(
            s.constant(800.0).exp(),
            Err(JetError::NonFinite("exp"))
        ));
    }

    #[test]
    fn derivative_jet_matches_partials() {
        let s = JetSpace::with_default_caps(1, 2);
        let x = s.lift_variable(0, 0.4).unwrap();
        let y = s.lift_variable(1, 1.3).unwrap();
        let w = s.lift_variable(2, -0.7).unwrap();
        let f = x.mul(&y).exp().unwrap().mul(&w.powi(3).unwrap());
        let dy = f.derivative(1).unwrap();
        assert_eq!(dy.valid_degrees(), DegreeCaps::new(1, 4));
        for vars in [&[][..], &[0], &[1], &[2, 2], &[0, 1, 2]] {
            let mut full: Vec<usize> = vars.to_vec();
            full.push(1);
            let a = dy.partial_vars(vars).unwrap();
            let b = f.partial_vars(&full).unwrap();
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{vars:?}: {a} vs {b}");
        }
    }

    #[test]
    fn negative_powers() {
        let s = space1();
        let y = s.lift_variable(0, 2.0).unwrap();
        let p = y.powi(-2).unwrap();
        assert!((p.value() - 0.25).abs() < 1e-15);
        // d/dy y^-2 = -2 y^-3
        assert!((p.partial_vars(&[0]).unwrap() + 0.25).abs() < 1e-15);
        assert_eq!(y.powi(0).unwrap().value(), 1.0);
    }
}
