#![allow(dead_code)]

use landsberg_core::expr::{parse, AllowedVars, Expr};
use landsberg_core::metric::{MetricSpec, TangentPoint};
use landsberg_core::twisted::TwistedProductSpec;

pub const BOTH_BLOCKS: &str = "exp(0.1*(x1 + x3))";
pub const FIRST_BLOCK: &str = "exp(0.1*x1)";

pub fn ex(text: &str, n: usize) -> Expr {
    parse(text, AllowedVars::base(n)).unwrap()
}

fn matrix(rows: [[&str; 2]; 2]) -> Vec<Vec<Expr>> {
    rows.iter().map(|r| r.iter().map(|s| ex(s, 2)).collect()).collect()
}

/// Non-constant Randers metric on a 2-chart.
pub fn randers() -> MetricSpec {
    MetricSpec::randers(
        matrix([["1 + 0.1*x1^2", "0.05*x1*x2"], ["0.05*x1*x2", "1 + 0.1*x2^2"]]),
        vec![ex("0.3 + 0.1*sin(x1)", 2), ex("0.2*cos(x2)", 2)],
    )
    .unwrap()
}

/// Minkowski Randers norm: `a = id`, `b = (0.5, 0)`.
pub fn constant_randers() -> MetricSpec {
    MetricSpec::randers(matrix([["1", "0"], ["0", "1"]]), vec![ex("0.5", 2), ex("0", 2)]).unwrap()
}

pub fn riemannian() -> MetricSpec {
    MetricSpec::riemannian(matrix([["1 + 0.2*x2^2", "0.1*x1"], ["0.1*x1", "2 + sin(x1)"]])).unwrap()
}

pub fn euclidean() -> MetricSpec {
    MetricSpec::euclidean(2)
}

pub fn product(a: MetricSpec, b: MetricSpec, twist: &str) -> TwistedProductSpec {
    TwistedProductSpec::new(a, b, ex(twist, 4))
}

pub fn point(x: &[f64], y: &[f64]) -> TangentPoint {
    TangentPoint::new(x.to_vec(), y.to_vec())
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}
