//! Metric families: `F²(x, y)` over any scalar algebra, plus pointwise
//! validity checks.

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::expr::{EvalError, Expr};
use crate::jet::{DegreeCaps, JetError, JetSpace};
use crate::linalg::{invert, ldl_pivots};
use crate::scalar::{Scalar, UnaryFn};
use crate::tolerance::{MIN_HESSIAN_PIVOT, SLIT_GUARD};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("expected {expected} entries, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coefficient matrix is not symmetric at ({0}, {1})")]
    Asymmetric(usize, usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("twist function is not positive: f = {0}")]
    NonPositiveTwist(f64),
    #[error("fiber vector too close to the zero section (|y| = {0})")]
    Slit(f64),
}

/// Anything that provides `F²` as a function of `(x, y)`.
pub trait FinslerFunction {
    fn dim(&self) -> usize;
    fn f_squared<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S, MetricError>;

    fn f_squared_real(&self, x: &[f64], y: &[f64]) -> Result<f64, MetricError> {
        self.f_squared(x, y)
    }

    /// `F` itself; `F² ≥ 0` for every supported family.
    fn norm(&self, x: &[f64], y: &[f64]) -> Result<f64, MetricError> {
        Ok(libm::sqrt(self.f_squared_real(x, y)?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricFamily {
    Euclidean,
    /// `F² = a_ij(x) yⁱ yʲ`
    Riemannian { a: Vec<Vec<Expr>> },
    /// `F = √(a_ij(x) yⁱ yʲ) + b_i(x) yⁱ`
    Randers { a: Vec<Vec<Expr>>, b: Vec<Expr> },
    /// Arbitrary `F²(x, y)`.
    Custom { f_squared: Expr },
}

/// A metric on a single chart of dimension `dim`. Coefficient expressions use
/// the local names `x1..x{dim}` (and `y1..y{dim}` for custom metrics).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    dim: usize,
    family: MetricFamily,
}

fn check_matrix(dim: usize, a: &[Vec<Expr>]) -> Result<(), MetricError> {
    if a.len() != dim {
        return Err(MetricError::DimensionMismatch {
            expected: dim,
            got: a.len(),
        });
    }
    for (i, row) in a.iter().enumerate() {
        if row.len() != dim {
            return Err(MetricError::DimensionMismatch {
                expected: dim,
                got: row.len(),
            });
        }
        for j in 0..i {
            if a[i][j] != a[j][i] {
                return Err(MetricError::Asymmetric(i, j));
            }
        }
    }
    Ok(())
}

impl MetricSpec {
    pub fn euclidean(dim: usize) -> Self {
        Self {
            dim,
            family: MetricFamily::Euclidean,
        }
    }

    pub fn riemannian(a: Vec<Vec<Expr>>) -> Result<Self, MetricError> {
        let dim = a.len();
        check_matrix(dim, &a)?;
        Ok(Self {
            dim,
            family: MetricFamily::Riemannian { a },
        })
    }

    pub fn randers(a: Vec<Vec<Expr>>, b: Vec<Expr>) -> Result<Self, MetricError> {
        let dim = a.len();
        check_matrix(dim, &a)?;
        if b.len() != dim {
            return Err(MetricError::DimensionMismatch {
                expected: dim,
                got: b.len(),
            });
        }
        Ok(Self {
            dim,
            family: MetricFamily::Randers { a, b },
        })
    }

    pub fn custom(dim: usize, f_squared: Expr) -> Self {
        Self {
            dim,
            family: MetricFamily::Custom { f_squared },
        }
    }

    pub fn family(&self) -> &MetricFamily {
        &self.family
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            MetricFamily::Euclidean => "euclidean",
            MetricFamily::Riemannian { .. } => "riemannian",
            MetricFamily::Randers { .. } => "randers",
            MetricFamily::Custom { .. } => "custom",
        }
    }

    /// True when the family is quadratic in `y` by construction.
    pub fn is_riemannian_family(&self) -> bool {
        matches!(
            self.family,
            MetricFamily::Euclidean | MetricFamily::Riemannian { .. }
        )
    }

    /// `‖b‖_a = √(a^{ij} b_i b_j)` at `x`, for Randers metrics.
    pub fn randers_b_norm(&self, x: &[f64]) -> Result<Option<f64>, MetricError> {
        let MetricFamily::Randers { a, b } = &self.family else {
            return Ok(None);
        };
        let am = eval_matrix(a, &0.0, x)?;
        let bv: Vec<f64> = b
            .iter()
            .map(|e| e.eval_real(x, &[]))
            .collect::<Result<_, _>>()?;
        let inv = invert(&am)?.matrix;
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += inv[i][j] * bv[i] * bv[j];
            }
        }
        Ok(Some(libm::sqrt(s.max(0.0))))
    }
}

fn eval_matrix<S: Scalar>(a: &[Vec<Expr>], template: &S, x: &[S]) -> Result<Vec<Vec<S>>, EvalError> {
    a.iter()
        .map(|row| row.iter().map(|e| e.eval(template, x, &[])).collect())
        .collect()
}

fn quadratic_form<S: Scalar>(a: &[Vec<Expr>], x: &[S], y: &[S]) -> Result<S, MetricError> {
    let t = &y[0];
    let mut acc = t.lift_constant(0.0);
    for (i, row) in a.iter().enumerate() {
        for (j, e) in row.iter().enumerate().skip(i) {
            let c = e.eval(t, x, &[])?;
            let mut term = c.mul(&y[i]).mul(&y[j]);
            if i != j {
                term = term.add(&term);
            }
            acc = acc.add(&term);
        }
    }
    Ok(acc)
}

impl FinslerFunction for MetricSpec {
    fn dim(&self) -> usize {
        self.dim
    }

    fn f_squared<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S, MetricError> {
        if x.len() != self.dim || y.len() != self.dim {
            return Err(MetricError::DimensionMismatch {
                expected: self.dim,
                got: if x.len() != self.dim { x.len() } else { y.len() },
            });
        }
        match &self.family {
            MetricFamily::Euclidean => {
                let mut acc = y[0].mul(&y[0]);
                for yi in &y[1..] {
                    acc = acc.add(&yi.mul(yi));
                }
                Ok(acc)
            }
            MetricFamily::Riemannian { a } => quadratic_form(a, x, y),
            MetricFamily::Randers { a, b } => {
                let alpha = quadratic_form(a, x, y)?.apply(UnaryFn::Sqrt)?;
                let mut beta = y[0].lift_constant(0.0);
                for (bi, yi) in b.iter().zip(y) {
                    beta = beta.add(&bi.eval(&y[0], x, &[])?.mul(yi));
                }
                let f = alpha.add(&beta);
                Ok(f.mul(&f))
            }
            MetricFamily::Custom { f_squared } => Ok(f_squared.eval(&y[0], x, y)?),
        }
    }
}

/// A base point and a fiber vector in one chart.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl TangentPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert_eq!(x.len(), y.len(), "x and y must have the same length");
        Self { x, y }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn fiber_norm(&self) -> f64 {
        norm(&self.y)
    }

    /// `y` away from the zero section.
    pub fn check_slit(&self) -> Result<(), MetricError> {
        let n = self.fiber_norm();
        if n < SLIT_GUARD {
            return Err(MetricError::Slit(n));
        }
        Ok(())
    }

    /// Both blocks `y₁ = y[..m]` and `y₂ = y[m..]` away from zero.
    pub fn check_product_slit(&self, m: usize) -> Result<(), MetricError> {
        for block in [&self.y[..m], &self.y[m..]] {
            let n = norm(block);
            if n < SLIT_GUARD {
                return Err(MetricError::Slit(n));
            }
        }
        Ok(())
    }

    /// Factor points `(x₁, y₁)` and `(x₂, y₂)`.
    pub fn split(&self, m: usize) -> (TangentPoint, TangentPoint) {
        (
            TangentPoint::new(self.x[..m].to_vec(), self.y[..m].to_vec()),
            TangentPoint::new(self.x[m..].to_vec(), self.y[m..].to_vec()),
        )
    }

    pub fn with_scaled_fiber(&self, lambda: f64) -> TangentPoint {
        TangentPoint::new(self.x.clone(), self.y.iter().map(|v| v * lambda).collect())
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|a| a * a).sum())
}

/// Per-point outcome of the strong-convexity check.
#[derive(Debug, Clone, PartialEq)]
pub struct PointValidation {
    pub positive_definite: bool,
    /// Smallest LDLᵀ pivot of the fiber Hessian of `½F²`; a lower bound
    /// proxy for the smallest eigenvalue.
    pub min_pivot: f64,
    pub hessian: Vec<Vec<f64>>,
    /// `‖b‖_a` for Randers metrics.
    pub b_norm: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub points: Vec<PointValidation>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.points.iter().all(|p| p.positive_definite)
    }

    pub fn pass_count(&self) -> usize {
        self.points.iter().filter(|p| p.positive_definite).count()
    }
}

/// Fiber Hessian of `½F²` by jets in the `y` variables only.
pub fn fiber_hessian<M: FinslerFunction>(
    metric: &M,
    point: &TangentPoint,
) -> Result<Vec<Vec<f64>>, MetricError> {
    let n = metric.dim();
    let space = JetSpace::new(0, n, DegreeCaps::new(0, 2));
    let xs: Vec<_> = point.x.iter().map(|&v| space.constant(v)).collect();
    let ys: Vec<_> = point
        .y
        .iter()
        .enumerate()
        .map(|(i, &v)| space.lift_variable(i, v))
        .collect::<Result<_, _>>()?;
    let e = metric.f_squared(&xs, &ys)?;
    let mut h = alloc::vec![alloc::vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            h[i][j] = 0.5 * e.partial_vars(&[i, j])?;
        }
    }
    Ok(h)
}

/// Tests positive definiteness of the fiber Hessian at every sample.
/// Evaluation errors are recorded per point.
pub fn validate_strong_convexity(metric: &MetricSpec, samples: &[TangentPoint]) -> ValidationReport {
    let points = samples
        .iter()
        .map(|p| {
            let b_norm = metric.randers_b_norm(&p.x).ok().flatten();
            let checked = p.check_slit().and_then(|_| fiber_hessian(metric, p));
            match checked {
                Ok(h) => {
                    let pivots = ldl_pivots(&h);
                    let min_pivot = pivots.iter().fold(f64::INFINITY, |m, &d| m.min(d));
                    let b_ok = b_norm.map_or(true, |b| b < 1.0);
                    PointValidation {
                        positive_definite: min_pivot > MIN_HESSIAN_PIVOT && b_ok,
                        min_pivot,
                        hessian: h,
                        b_norm,
                        error: None,
                    }
                }
                Err(e) => PointValidation {
                    positive_definite: false,
                    min_pivot: f64::NAN,
                    hessian: Vec::new(),
                    b_norm,
                    error: Some(alloc::format!("{e}")),
                },
            }
        })
        .collect();
    ValidationReport { points }
}

/// `max_λ |F(x, λy) − λF(x, y)| / (λF(x, y))`.
pub fn homogeneity_check<M: FinslerFunction>(
    metric: &M,
    sample: &TangentPoint,
    lambdas: &[f64],
) -> Result<f64, MetricError> {
    sample.check_slit()?;
    let f = metric.norm(&sample.x, &sample.y)?;
    let mut worst: f64 = 0.0;
    for &l in lambdas {
        let scaled = sample.with_scaled_fiber(l);
        let fl = metric.norm(&scaled.x, &scaled.y)?;
        worst = worst.max((fl - l * f).abs() / (l * f));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, AllowedVars};
    use alloc::vec;

    fn e(s: &str, n: usize) -> Expr {
        parse(s, AllowedVars::base(n)).unwrap()
    }

    pub(crate) fn randers_const() -> MetricSpec {
        MetricSpec::randers(
            vec![vec![e("1", 2), e("0", 2)], vec![e("0", 2), e("1", 2)]],
            vec![e("0.5", 2), e("0", 2)],
        )
        .unwrap()
    }

    #[test]
    fn euclidean_norm() {
        let m = MetricSpec::euclidean(2);
        assert_eq!(m.f_squared_real(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 25.0);
    }

    #[test]
    fn randers_norm() {
        let m = randers_const();
        assert_eq!(m.f_squared_real(&[0.0, 0.0], &[1.0, 0.0]).unwrap(), 2.25);
        assert_eq!(m.randers_b_norm(&[0.0, 0.0]).unwrap(), Some(0.5));
    }

    #[test]
    fn riemannian_substitution() {
        let m = MetricSpec::riemannian(vec![
            vec![e("1", 2), e("0", 2)],
            vec![e("0", 2), e("x1^2 + 1", 2)],
        ])
        .unwrap();
        assert_eq!(m.f_squared_real(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 2.0);
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let err = MetricSpec::riemannian(vec![
            vec![e("1", 2), e("x1", 2)],
            vec![e("x2", 2), e("1", 2)],
        ])
        .unwrap_err();
        assert_eq!(err, MetricError::Asymmetric(1, 0));
        let err = MetricSpec::randers(vec![vec![e("1", 1)]], vec![]).unwrap_err();
        assert!(matches!(err, MetricError::DimensionMismatch { .. }));
    }

    #[test]
    fn randers_with_indefinite_a_is_a_domain_error() {
        let m = MetricSpec::randers(
            vec![vec![e("-1", 2), e("0", 2)], vec![e("0", 2), e("-1", 2)]],
            vec![e("0", 2), e("0", 2)],
        )
        .unwrap();
        let err = m.f_squared_real(&[0.0, 0.0], &[1.0, 1.0]).unwrap_err();
        assert!(matches!(err, MetricError::Jet(JetError::NonPositive { op: "sqrt", .. })));
    }

    #[test]
    fn convexity_validation() {
        let samples = vec![
            TangentPoint::new(vec![0.1, 0.2], vec![1.0, 0.3]),
            TangentPoint::new(vec![-0.4, 0.9], vec![-0.2, 1.1]),
            TangentPoint::new(vec![0.0, 0.0], vec![0.0, -2.0]),
        ];
        let r = validate_strong_convexity(&MetricSpec::euclidean(2), &samples);
        assert!(r.all_pass());
        assert_eq!(r.points[0].hessian, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);

        assert!(validate_strong_convexity(&randers_const(), &samples).all_pass());

        let indefinite = MetricSpec::custom(2, parse("y1^2 - y2^2", AllowedVars::tangent(2)).unwrap());
        let r = validate_strong_convexity(&indefinite, &samples);
        assert_eq!(r.pass_count(), 0);

        let on_zero = [TangentPoint::new(vec![0.0, 0.0], vec![0.0, 0.0])];
        let r = validate_strong_convexity(&MetricSpec::euclidean(2), &on_zero);
        assert!(!r.all_pass());
        assert!(r.points[0].error.is_some());
    }

    #[test]
    fn homogeneity() {
        let p = TangentPoint::new(vec![0.3, -0.2], vec![0.7, 1.4]);
        assert_eq!(homogeneity_check(&MetricSpec::euclidean(2), &p, &[2.0]).unwrap(), 0.0);
        assert!(homogeneity_check(&randers_const(), &p, &[0.5, 2.0, 3.0]).unwrap() <= 1e-12);
        let rational = MetricSpec::custom(
            2,
            parse("y1^4/(y1^2 + y2^2) + y2^2", AllowedVars::tangent(2)).unwrap(),
        );
        assert!(homogeneity_check(&rational, &p, &[2.0]).unwrap() <= 1e-12);
    }
}
