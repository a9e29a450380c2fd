//! Numerical thresholds used across the crate, in one place.

/// Claims that a tensor vanishes identically (Cartan of a Riemannian metric,
/// Landsberg of a Berwald metric, Euler contractions).
pub const EXACT_ZERO: f64 = 1e-9;

/// Structural zeros that hold by construction (off-diagonal metric blocks,
/// mixed Cartan blocks).
pub const STRUCTURAL_ZERO: f64 = 1e-10;

/// Smallest admissible LDLᵀ pivot of the fiber Hessian; below it a point is
/// outside the strong-convexity domain.
pub const MIN_HESSIAN_PIVOT: f64 = 1e-8;

/// Fiber vectors (and each block of a product fiber vector) shorter than
/// this are rejected as lying on the zero section.
pub const SLIT_GUARD: f64 = 1e-6;

/// Closed form agrees with the oracle (relative).
pub const CONFIRM_RELATIVE: f64 = 1e-6;

/// Closed form disagrees with the oracle (relative).
pub const REFUTE_RELATIVE: f64 = 1e-3;

/// Relative residuals divide by `max(max|oracle|, RELATIVE_FLOOR)` so that
/// vanishing tensors are compared absolutely.
pub const RELATIVE_FLOOR: f64 = 1e-3;

/// A theorem condition holds when its maximum magnitude is at most this.
pub const CONDITION_PASS: f64 = 1e-8;

/// A theorem condition fails when its maximum magnitude is at least this.
pub const CONDITION_FAIL: f64 = 1e-4;

/// Isotropy counts as exact when the fitted residual is at most this.
pub const ISOTROPY_RESIDUAL: f64 = 1e-8;

/// Bound on the fitted `c` for an exactly isotropic metric.
pub const ISOTROPY_C: f64 = 1e-6;

/// Bound on the oracle Landsberg / mean Landsberg curvature of an exactly
/// isotropic metric.
pub const ISOTROPY_CURVATURE: f64 = 1e-7;

/// Central-difference step for derivative audits.
pub const FD_STEP: f64 = 1e-2;

/// Audit tolerance for derivatives of order at most two (relative).
pub const FD_LOW_ORDER: f64 = 1e-5;

/// Audit tolerance for third-order derivatives (relative).
pub const FD_THIRD_ORDER: f64 = 1e-3;

/// Homogeneity identities (relative).
pub const HOMOGENEITY: f64 = 1e-10;
