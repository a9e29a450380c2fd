//! Scalar algebra shared by plain reals and jets, so that expressions and
//! metrics are written once and evaluated over either.

use crate::jet::{Jet, JetError};

/// Elementary functions available in the expression language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryFn {
    Sqrt,
    Exp,
    Ln,
    Sin,
    Cos,
}

impl UnaryFn {
    pub fn name(self) -> &'static str {
        match self {
            UnaryFn::Sqrt => "sqrt",
            UnaryFn::Exp => "exp",
            UnaryFn::Ln => "ln",
            UnaryFn::Sin => "sin",
            UnaryFn::Cos => "cos",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sqrt" => UnaryFn::Sqrt,
            "exp" => UnaryFn::Exp,
            "ln" => UnaryFn::Ln,
            "sin" => UnaryFn::Sin,
            "cos" => UnaryFn::Cos,
            _ => return None,
        })
    }
}

pub trait Scalar: Clone + core::fmt::Debug {
    /// A constant living in the same algebra as `self` (same jet space).
    fn lift_constant(&self, c: f64) -> Self;
    fn value(&self) -> f64;
    fn is_finite(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn div(&self, rhs: &Self) -> Result<Self, JetError>;
    fn apply(&self, f: UnaryFn) -> Result<Self, JetError>;
    fn powi(&self, n: i32) -> Result<Self, JetError>;
}

impl Scalar for f64 {
    fn lift_constant(&self, c: f64) -> Self {
        c
    }

    fn value(&self) -> f64 {
        *self
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }

    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }

    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }

    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn neg(&self) -> Self {
        -self
    }

    fn div(&self, rhs: &Self) -> Result<Self, JetError> {
        if *rhs == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        finite(self / rhs, "div")
    }

    fn apply(&self, f: UnaryFn) -> Result<Self, JetError> {
        let a = *self;
        let out = match f {
            UnaryFn::Sqrt if !(a > 0.0) => {
                return Err(JetError::NonPositive { op: "sqrt", value: a })
            }
            UnaryFn::Ln if !(a > 0.0) => return Err(JetError::NonPositive { op: "ln", value: a }),
            UnaryFn::Sqrt => libm::sqrt(a),
            UnaryFn::Exp => libm::exp(a),
            UnaryFn::Ln => libm::log(a),
            UnaryFn::Sin => libm::sin(a),
            UnaryFn::Cos => libm::cos(a),
        };
        finite(out, f.name())
    }

    fn powi(&self, n: i32) -> Result<Self, JetError> {
        if n < 0 && *self == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        // same squaring scheme as the jet path, so values agree bit for bit
        let base = if n < 0 { 1.0 / self } else { *self };
        let mut e = n.unsigned_abs();
        let mut result = 1.0;
        let mut square = base;
        while e > 0 {
            if e & 1 == 1 {
                result *= square;
            }
            e >>= 1;
            if e > 0 {
                square *= square;
            }
        }
        finite(result, "powi")
    }
}

fn finite(v: f64, op: &'static str) -> Result<f64, JetError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(JetError::NonFinite(op))
    }
}

impl Scalar for Jet {
    fn lift_constant(&self, c: f64) -> Self {
        self.space().constant(c)
    }

    fn value(&self) -> f64 {
        Jet::value(self)
    }

    fn is_finite(&self) -> bool {
        Jet::is_finite(self)
    }

    fn add(&self, rhs: &Self) -> Self {
        Jet::add(self, rhs)
    }

    fn sub(&self, rhs: &Self) -> Self {
        Jet::sub(self, rhs)
    }

    fn mul(&self, rhs: &Self) -> Self {
        Jet::mul(self, rhs)
    }

    fn neg(&self) -> Self {
        Jet::neg(self)
    }

    fn div(&self, rhs: &Self) -> Result<Self, JetError> {
        Jet::div(self, rhs)
    }

    fn apply(&self, f: UnaryFn) -> Result<Self, JetError> {
        match f {
            UnaryFn::Sqrt => self.sqrt(),
            UnaryFn::Exp => self.exp(),
            UnaryFn::Ln => self.ln(),
            UnaryFn::Sin => self.sin(),
            UnaryFn::Cos => self.cos(),
        }
    }

    fn powi(&self, n: i32) -> Result<Self, JetError> {
        Jet::powi(self, n)
    }
}
