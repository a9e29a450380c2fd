//! Curvature of twisted product Finsler metrics `F = √(F₁² + f²F₂²)`.
//!
//! Everything here is pure computation (`no_std` + `alloc`). The `jet` module
//! provides truncated Taylor arithmetic; `curvature` uses it to compute every
//! curvature tensor directly from `F²`; `twisted` assembles the closed-form
//! block formulas and compares them with that direct computation; `classify`
//! tests the Landsberg and weakly Landsberg characterisations numerically.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod classify;
pub mod curvature;
pub mod expr;
pub mod fdiff;
pub mod jet;
pub mod linalg;
pub mod metric;
pub mod sample;
pub mod scalar;
pub mod tensor;
pub mod tolerance;
pub mod twisted;
