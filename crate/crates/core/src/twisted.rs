//! Twisted products `F = √(F₁² + f²F₂²)` and closed-form block formulas for
//! their curvature, checked against the direct oracle.
//!
//! Global indices `0..m` belong to the first factor and `m..m+n` to the
//! second. Closed forms are assembled from the oracle applied to each factor
//! in its own chart, never from the full metric.
//!
//! Bare lowered fiber vectors of the second block `y_{a'}` are read in one
//! of two ways. Under [`Convention::A`] they are lowered with the full metric
//! (`f² h y₂`) and the closed forms are compared with the oracle tensors
//! directly. Under [`Convention::B`] they are lowered with `h` alone, and the
//! comparison targets are built the same way: `L = −½ ŷ_λ B^λ` with
//! `ŷ = (g y₁, h y₂)`, and `J` is its trace against the full inverse metric.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::curvature::{CurvatureBundle, CurvatureError, Oracle};
use crate::expr::Expr;
use crate::jet::{DegreeCaps, JetSpace};
use crate::metric::{FinslerFunction, MetricError, MetricSpec, TangentPoint};
use crate::scalar::Scalar;
use crate::tensor::Tensor;
use crate::tolerance::{CONFIRM_RELATIVE, RELATIVE_FLOOR, REFUTE_RELATIVE};

#[derive(Debug, Clone, PartialEq)]
pub struct TwistedProductSpec {
    metric1: MetricSpec,
    metric2: MetricSpec,
    twist: Expr,
}

/// Which factor a global index belongs to, and its position there.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockIndex {
    pub second: bool,
    pub local: usize,
}

impl BlockIndex {
    pub fn split(global: usize, m: usize) -> Self {
        if global < m {
            Self { second: false, local: global }
        } else {
            Self { second: true, local: global - m }
        }
    }

    pub fn global(self, m: usize) -> usize {
        if self.second {
            m + self.local
        } else {
            self.local
        }
    }
}

impl TwistedProductSpec {
    /// `twist` uses the global names `x1..x{m+n}`.
    pub fn new(metric1: MetricSpec, metric2: MetricSpec, twist: Expr) -> Self {
        Self {
            metric1,
            metric2,
            twist,
        }
    }

    pub fn m(&self) -> usize {
        self.metric1.dim()
    }

    pub fn n(&self) -> usize {
        self.metric2.dim()
    }

    pub fn metric1(&self) -> &MetricSpec {
        &self.metric1
    }

    pub fn metric2(&self) -> &MetricSpec {
        &self.metric2
    }

    pub fn twist(&self) -> &Expr {
        &self.twist
    }

    /// The same product with the twist replaced.
    pub fn with_twist(&self, twist: Expr) -> Self {
        Self::new(self.metric1.clone(), self.metric2.clone(), twist)
    }

    /// True when the twist expression mentions some `x` of the second block.
    pub fn twist_depends_on_second(&self) -> bool {
        let m = self.m();
        self.twist.mentions(|v| matches!(v, crate::expr::Var::X(i) if i >= m))
    }

    pub fn twist_value(&self, x: &[f64]) -> Result<f64, MetricError> {
        let f = self.twist.eval_real(x, &[])?;
        if !(f > 0.0) {
            return Err(MetricError::NonPositiveTwist(f));
        }
        Ok(f)
    }

    /// `∂f/∂x^α` for every global `α`, by jets.
    pub fn twist_gradient(&self, x: &[f64]) -> Result<Vec<f64>, MetricError> {
        let dim = self.dim();
        let space = JetSpace::new(dim, 0, DegreeCaps::new(1, 0));
        let xs: Vec<_> = x
            .iter()
            .enumerate()
            .map(|(i, &v)| space.lift_variable(i, v))
            .collect::<Result<_, _>>()?;
        let f = self.twist.eval(&xs[0], &xs, &[])?;
        if !(f.value() > 0.0) {
            return Err(MetricError::NonPositiveTwist(f.value()));
        }
        (0..dim).map(|i| Ok(f.partial_vars(&[i])?)).collect()
    }

    /// Gathers everything the closed forms need at one point.
    pub fn block_inputs(&self, point: &TangentPoint) -> Result<BlockInputs, CurvatureError> {
        let (m, n) = (self.m(), self.n());
        if point.dim() != m + n {
            return Err(MetricError::DimensionMismatch {
                expected: m + n,
                got: point.dim(),
            }
            .into());
        }
        point.check_product_slit(m)?;
        let f = self.twist_value(&point.x)?;
        let df = self.twist_gradient(&point.x)?;
        let (p1, p2) = point.split(m);
        let first = Oracle::new(m).evaluate(&self.metric1, &p1)?;
        let second = Oracle::new(n).evaluate(&self.metric2, &p2)?;
        Ok(BlockInputs {
            m,
            n,
            f,
            df,
            first,
            second,
        })
    }
}

impl FinslerFunction for TwistedProductSpec {
    fn dim(&self) -> usize {
        self.m() + self.n()
    }

    fn f_squared<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S, MetricError> {
        let (m, n) = (self.m(), self.n());
        if x.len() != m + n || y.len() != m + n {
            return Err(MetricError::DimensionMismatch {
                expected: m + n,
                got: x.len().min(y.len()),
            });
        }
        let f = self.twist.eval(&y[0], x, &[])?;
        if !(f.value() > 0.0) {
            return Err(MetricError::NonPositiveTwist(f.value()));
        }
        let e1 = self.metric1.f_squared(&x[..m], &y[..m])?;
        let e2 = self.metric2.f_squared(&x[m..], &y[m..])?;
        Ok(e1.add(&f.mul(&f).mul(&e2)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Convention {
    /// Second-block fiber vectors lowered with `f² h`.
    A,
    /// Second-block fiber vectors lowered with `h`.
    B,
}

impl Convention {
    pub const BOTH: [Convention; 2] = [Convention::A, Convention::B];

    pub fn name(self) -> &'static str {
        match self {
            Convention::A => "A",
            Convention::B => "B",
        }
    }
}

/// Factor curvature, twist value and twist gradient at one product point.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockInputs {
    pub m: usize,
    pub n: usize,
    pub f: f64,
    pub df: Vec<f64>,
    pub first: CurvatureBundle,
    pub second: CurvatureBundle,
}

impl BlockInputs {
    pub fn dim(&self) -> usize {
        self.m + self.n
    }

    fn y1(&self) -> &[f64] {
        &self.first.point.y
    }

    fn y2(&self) -> &[f64] {
        &self.second.point.y
    }

    fn y2_lower(&self, conv: Convention) -> Vec<f64> {
        let k = match conv {
            Convention::A => self.f * self.f,
            Convention::B => 1.0,
        };
        self.second.y_lower.iter().map(|v| k * v).collect()
    }

    fn f2_squared(&self) -> f64 {
        self.second.f_squared
    }

    /// `Σ_p v_p ∂f/∂x^p` over the first block.
    fn d1(&self, v: impl Fn(usize) -> f64) -> f64 {
        (0..self.m).map(|p| v(p) * self.df[p]).sum()
    }

    /// `Σ_{p'} v_{p'} ∂f/∂x^{p'}` over the second block.
    fn d2(&self, v: impl Fn(usize) -> f64) -> f64 {
        (0..self.n).map(|p| v(p) * self.df[self.m + p]).sum()
    }
}

/// Block-diagonal `G_{αβ}` and its inverse.
pub fn block_fundamental(inp: &BlockInputs) -> (Tensor, Tensor) {
    let (m, f2) = (inp.m, inp.f * inp.f);
    let g = Tensor::from_fn(inp.dim(), 2, |i| {
        let (a, b) = (BlockIndex::split(i[0], m), BlockIndex::split(i[1], m));
        match (a.second, b.second) {
            (false, false) => inp.first.g.get(&[a.local, b.local]),
            (true, true) => f2 * inp.second.g.get(&[a.local, b.local]),
            _ => 0.0,
        }
    });
    let g_inv = Tensor::from_fn(inp.dim(), 2, |i| {
        let (a, b) = (BlockIndex::split(i[0], m), BlockIndex::split(i[1], m));
        match (a.second, b.second) {
            (false, false) => inp.first.g_inv.get(&[a.local, b.local]),
            (true, true) => inp.second.g_inv.get(&[a.local, b.local]) / f2,
            _ => 0.0,
        }
    });
    (g, g_inv)
}

/// Local indices of a symmetric lower-index tuple, first-block indices first,
/// and how many of them belong to the first block.
fn sort_lower(idx: &[usize], m: usize) -> (Vec<usize>, usize) {
    let mut first: Vec<usize> = idx.iter().copied().filter(|&a| a < m).collect();
    let second: Vec<usize> = idx.iter().copied().filter(|&a| a >= m).map(|a| a - m).collect();
    let count = first.len();
    first.extend(second);
    (first, count)
}

pub fn cartan_blocks(inp: &BlockInputs) -> Tensor {
    let f2 = inp.f * inp.f;
    Tensor::from_fn(inp.dim(), 3, |idx| {
        let (l, unprimed) = sort_lower(idx, inp.m);
        match unprimed {
            3 => inp.first.cartan.get(&l),
            0 => f2 * inp.second.cartan.get(&l),
            _ => 0.0,
        }
    })
}

pub fn mean_cartan_blocks(inp: &BlockInputs) -> Vec<f64> {
    let mut out = inp.first.mean_cartan.clone();
    out.extend_from_slice(&inp.second.mean_cartan);
    out
}

pub fn berwald_blocks(inp: &BlockInputs, conv: Convention) -> Tensor {
    let (m, f) = (inp.m, inp.f);
    let e2 = inp.f2_squared();
    let y2l = inp.y2_lower(conv);
    let (c1, c2) = (&inp.first.vertical, &inp.second.vertical);
    let (h, h_inv) = (&inp.second.g, &inp.second.g_inv);
    Tensor::from_fn(inp.dim(), 4, |idx| {
        let up = BlockIndex::split(idx[0], m);
        let (lo, unprimed) = sort_lower(&idx[1..], m);
        let l = up.local;
        match (up.second, unprimed) {
            (false, 3) => {
                let (i, j, k) = (lo[0], lo[1], lo[2]);
                inp.first.berwald.get(&[l, i, j, k])
                    + f * inp.d1(|p| c1.cartan_raised_d2.get(&[l, p, i, j, k])) * e2
            }
            (false, 2) => {
                let (i, j, k) = (lo[0], lo[1], lo[2]);
                2.0 * f * inp.d1(|p| c1.cartan_raised_d1.get(&[l, p, i, j])) * y2l[k]
            }
            (false, 1) => {
                let (i, j, k) = (lo[0], lo[1], lo[2]);
                2.0 * f * inp.d1(|p| inp.first.cartan_raised.get(&[l, p, i])) * h.get(&[j, k])
            }
            (false, 0) => {
                let (i, j, k) = (lo[0], lo[1], lo[2]);
                -2.0 * f * inp.second.cartan.get(&[i, j, k]) * inp.d1(|p| inp.first.g_inv.get(&[l, p]))
            }
            (true, 0) => {
                let (i, j, k) = (lo[0], lo[1], lo[2]);
                let cr = &inp.second.cartan_raised;
                let bracket = inp.d2(|p| {
                    c2.cartan_raised_d2.get(&[l, p, i, j, k]) * e2
                        + 2.0 * c2.cartan_raised_d1.get(&[l, p, j, k]) * y2l[i]
                        + 2.0 * c2.cartan_raised_d1.get(&[l, p, i, k]) * y2l[j]
                        + 2.0 * c2.cartan_raised_d1.get(&[l, p, i, j]) * y2l[k]
                        + 2.0 * cr.get(&[l, p, i]) * h.get(&[j, k])
                        + 2.0 * cr.get(&[l, p, j]) * h.get(&[i, k])
                        + 2.0 * cr.get(&[l, p, k]) * h.get(&[i, j])
                        - 2.0 * h_inv.get(&[l, p]) * inp.second.cartan.get(&[i, j, k])
                });
                inp.second.berwald.get(&[l, i, j, k]) + bracket / f
            }
            _ => 0.0,
        }
    })
}

pub fn landsberg_blocks(inp: &BlockInputs, conv: Convention) -> Tensor {
    let (m, f) = (inp.m, inp.f);
    let e2 = inp.f2_squared();
    let y2l = inp.y2_lower(conv);
    let (y1, y2) = (inp.y1(), inp.y2());
    let (c1, c2) = (&inp.first.vertical, &inp.second.vertical);
    Tensor::from_fn(inp.dim(), 3, |idx| {
        let (lo, unprimed) = sort_lower(idx, m);
        let (i, j, k) = (lo[0], lo[1], lo[2]);
        match unprimed {
            3 => inp.first.landsberg.get(&[i, j, k]) + f * inp.d1(|p| c1.cartan_mixed_d1.get(&[p, i, j, k])) * e2,
            2 => f * inp.d1(|p| c1.cartan_mixed.get(&[p, i, j])) * y2l[k],
            0 => {
                let c = inp.second.cartan.get(&[i, j, k]);
                let bracket = inp.d2(|p| {
                    c2.cartan_mixed_d1.get(&[p, i, j, k]) * e2
                        + c2.cartan_mixed.get(&[p, j, k]) * y2l[i]
                        + c2.cartan_mixed.get(&[p, i, k]) * y2l[j]
                        + c2.cartan_mixed.get(&[p, i, j]) * y2l[k]
                        + c * y2[p]
                });
                inp.second.landsberg.get(&[i, j, k]) + f * c * inp.d1(|p| y1[p]) + bracket / f
            }
            _ => 0.0,
        }
    })
}

pub fn mean_landsberg_blocks(inp: &BlockInputs, conv: Convention) -> Vec<f64> {
    let f = inp.f;
    let e2 = inp.f2_squared();
    let y2l = inp.y2_lower(conv);
    let (y1, y2) = (inp.y1(), inp.y2());
    let (v1, v2) = (&inp.first.vertical, &inp.second.vertical);
    let mut out = Vec::with_capacity(inp.dim());
    for i in 0..inp.m {
        out.push(inp.first.mean_landsberg[i] + f * inp.d1(|p| v1.mean_cartan_raised_d1.get(&[p, i])) * e2);
    }
    for i in 0..inp.n {
        let i2 = inp.second.mean_cartan[i];
        let first = inp.d1(|p| f * v1.mean_cartan_raised[p] * y2l[i] + i2 * y1[p] / f);
        let second = inp.d2(|p| {
            v2.mean_cartan_raised_d1.get(&[p, i]) * e2 + v2.mean_cartan_raised[p] * y2l[i] + i2 * y2[p]
        });
        out.push(inp.second.mean_landsberg[i] / (f * f) + first + second / (f * f * f));
    }
    out
}

/// `Σ_{βγ} L_{αβγ} G^{βγ}`.
pub fn trace_with(l: &Tensor, g_inv: &Tensor) -> Vec<f64> {
    l.trace_last_two(g_inv)
}

/// Oracle Landsberg and mean Landsberg tensors read under a convention.
pub fn oracle_targets(oracle: &CurvatureBundle, m: usize, f: f64, conv: Convention) -> (Tensor, Vec<f64>) {
    match conv {
        Convention::A => (oracle.landsberg.clone(), oracle.mean_landsberg.clone()),
        Convention::B => {
            let f2 = f * f;
            let lowered: Vec<f64> = oracle
                .y_lower
                .iter()
                .enumerate()
                .map(|(a, v)| if a < m { *v } else { v / f2 })
                .collect();
            let l = oracle.berwald.contract_first(&lowered).scaled(-0.5);
            let j = l.trace_last_two(&oracle.g_inv);
            (l, j)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quantity {
    Cartan,
    MeanCartan,
    Berwald,
    Landsberg,
    MeanLandsberg,
}

impl Quantity {
    pub const ALL: [Quantity; 5] = [
        Quantity::Cartan,
        Quantity::MeanCartan,
        Quantity::Berwald,
        Quantity::Landsberg,
        Quantity::MeanLandsberg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Cartan => "cartan",
            Quantity::MeanCartan => "mean_cartan",
            Quantity::Berwald => "berwald",
            Quantity::Landsberg => "landsberg",
            Quantity::MeanLandsberg => "mean_landsberg",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|q| q.name() == s)
    }

    pub fn has_convention(self) -> bool {
        !matches!(self, Quantity::Cartan | Quantity::MeanCartan)
    }

    pub fn rank(self) -> usize {
        match self {
            Quantity::Cartan | Quantity::Landsberg => 3,
            Quantity::MeanCartan | Quantity::MeanLandsberg => 1,
            Quantity::Berwald => 4,
        }
    }
}

/// Block label of a global index tuple, e.g. `ijk'` or `l'|i'j'k'`.
/// Tensors with an upper index carry it before the bar.
pub fn block_label(q: Quantity, idx: &[usize], m: usize) -> String {
    const LOWER: [char; 3] = ['i', 'j', 'k'];
    let (upper, lower) = if q == Quantity::Berwald { (Some(idx[0]), &idx[1..]) } else { (None, idx) };
    let unprimed = lower.iter().filter(|&&a| a < m).count();
    let mut s = String::new();
    if let Some(u) = upper {
        s.push('l');
        if u >= m {
            s.push('\'');
        }
        s.push('|');
    }
    for (pos, c) in LOWER.iter().take(lower.len()).enumerate() {
        s.push(*c);
        if pos >= unprimed {
            s.push('\'');
        }
    }
    s
}

/// Closed form and oracle for one quantity at one point.
pub fn closed_and_target(
    q: Quantity,
    inp: &BlockInputs,
    oracle: &CurvatureBundle,
    conv: Convention,
) -> (Vec<f64>, Vec<f64>) {
    match q {
        Quantity::Cartan => (cartan_blocks(inp).data().to_vec(), oracle.cartan.data().to_vec()),
        Quantity::MeanCartan => (mean_cartan_blocks(inp), oracle.mean_cartan.clone()),
        Quantity::Berwald => (berwald_blocks(inp, conv).data().to_vec(), oracle.berwald.data().to_vec()),
        Quantity::Landsberg => {
            let (l, _) = oracle_targets(oracle, inp.m, inp.f, conv);
            (landsberg_blocks(inp, conv).data().to_vec(), l.data().to_vec())
        }
        Quantity::MeanLandsberg => {
            let (_, j) = oracle_targets(oracle, inp.m, inp.f, conv);
            (mean_landsberg_blocks(inp, conv), j)
        }
    }
}

/// Maximum residual within one block family.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockResidual {
    pub block: String,
    pub max_abs: f64,
    pub oracle_max_abs: f64,
}

/// Comparison of one quantity's closed form with the oracle, over samples.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockReport {
    pub quantity: Quantity,
    pub convention: Option<Convention>,
    pub samples: usize,
    pub max_abs_residual: f64,
    pub oracle_max_abs: f64,
    pub relative_residual: f64,
    pub blocks: Vec<BlockResidual>,
    /// `max |J − G⁻¹·L|` of the closed forms, for the mean Landsberg report.
    pub trace_consistency: Option<f64>,
    /// Sample index where the residual peaked, with both values there.
    pub worst_sample: usize,
    pub closed_form: Vec<f64>,
    pub oracle: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Confirmed(Option<Convention>),
    Ambiguous,
    Refuted,
}

impl Status {
    pub fn name(self) -> String {
        match self {
            Status::Confirmed(Some(c)) => format!("confirmed under convention {}", c.name()),
            Status::Confirmed(None) => String::from("confirmed"),
            Status::Ambiguous => String::from("ambiguous"),
            Status::Refuted => String::from("refuted as printed"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantityVerdict {
    pub quantity: Quantity,
    pub status: Status,
    pub reports: Vec<BlockReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub verdicts: Vec<QuantityVerdict>,
    pub valid_samples: usize,
    pub skipped: Vec<(usize, String)>,
}

impl Verification {
    pub fn any_refuted(&self) -> bool {
        self.verdicts.iter().any(|v| v.status == Status::Refuted)
    }

    pub fn verdict(&self, q: Quantity) -> Option<&QuantityVerdict> {
        self.verdicts.iter().find(|v| v.quantity == q)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub conventions: Vec<Convention>,
    pub confirm: f64,
    pub refute: f64,
    /// Flips the sign of one closed form; a harness self-test.
    pub corrupt: Option<Quantity>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            conventions: Convention::BOTH.to_vec(),
            confirm: CONFIRM_RELATIVE,
            refute: REFUTE_RELATIVE,
            corrupt: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error("no valid sample points ({skipped} rejected)")]
    NoValidSamples { skipped: usize },
}

struct Accumulator {
    quantity: Quantity,
    convention: Option<Convention>,
    samples: usize,
    max_abs: f64,
    oracle_max: f64,
    blocks: Vec<BlockResidual>,
    trace: Option<f64>,
    worst: (usize, Vec<f64>, Vec<f64>),
}

impl Accumulator {
    fn new(quantity: Quantity, convention: Option<Convention>) -> Self {
        Self {
            quantity,
            convention,
            samples: 0,
            max_abs: -1.0,
            oracle_max: 0.0,
            blocks: Vec::new(),
            trace: None,
            worst: (0, Vec::new(), Vec::new()),
        }
    }

    fn push(&mut self, sample: usize, m: usize, dim: usize, closed: Vec<f64>, target: Vec<f64>) {
        self.samples += 1;
        let rank = self.quantity.rank();
        let mut idx = vec![0usize; rank];
        let mut here: f64 = 0.0;
        for (slot, (c, t)) in closed.iter().zip(&target).enumerate() {
            let mut s = slot;
            for k in (0..rank).rev() {
                idx[k] = s % dim;
                s /= dim;
            }
            let label = block_label(self.quantity, &idx, m);
            let d = (c - t).abs();
            here = here.max(d);
            self.oracle_max = self.oracle_max.max(t.abs());
            match self.blocks.iter_mut().find(|b| b.block == label) {
                Some(b) => {
                    b.max_abs = b.max_abs.max(d);
                    b.oracle_max_abs = b.oracle_max_abs.max(t.abs());
                }
                None => self.blocks.push(BlockResidual {
                    block: label,
                    max_abs: d,
                    oracle_max_abs: t.abs(),
                }),
            }
        }
        if here > self.max_abs {
            self.max_abs = here;
            self.worst = (sample, closed, target);
        }
    }

    fn finish(mut self) -> BlockReport {
        self.blocks.sort_by(|a, b| a.block.cmp(&b.block));
        let scale = self.oracle_max.max(RELATIVE_FLOOR);
        BlockReport {
            quantity: self.quantity,
            convention: self.convention,
            samples: self.samples,
            max_abs_residual: self.max_abs.max(0.0),
            oracle_max_abs: self.oracle_max,
            relative_residual: self.max_abs.max(0.0) / scale,
            blocks: self.blocks,
            trace_consistency: self.trace,
            worst_sample: self.worst.0,
            closed_form: self.worst.1,
            oracle: self.worst.2,
        }
    }
}

/// Verdict from the per-convention reports of one quantity. A quantity
/// matched under every convention is confirmed without naming one.
pub fn judge(reports: &[BlockReport], confirm: f64, refute: f64) -> Status {
    let best = reports
        .iter()
        .min_by(|a, b| a.relative_residual.total_cmp(&b.relative_residual));
    match best {
        Some(_) if reports.len() > 1 && reports.iter().all(|r| r.relative_residual <= confirm) => Status::Confirmed(None),
        Some(r) if r.relative_residual <= confirm => Status::Confirmed(r.convention),
        Some(_) if reports.iter().all(|r| r.relative_residual > refute) => Status::Refuted,
        _ => Status::Ambiguous,
    }
}

/// Compares every closed form with the oracle of the full metric over the
/// samples. Points where the oracle or a factor rejects the input are
/// skipped and listed.
pub fn verify_blocks(
    spec: &TwistedProductSpec,
    samples: &[TangentPoint],
    opts: &VerifyOptions,
) -> Result<Verification, VerifyError> {
    let (m, dim) = (spec.m(), spec.dim());
    let oracle = Oracle::new(dim);
    let mut accs: Vec<Accumulator> = Vec::new();
    for q in Quantity::ALL {
        if q.has_convention() {
            for &c in &opts.conventions {
                accs.push(Accumulator::new(q, Some(c)));
            }
        } else {
            accs.push(Accumulator::new(q, None));
        }
    }
    let mut skipped = Vec::new();
    let mut valid = 0;
    for (s, point) in samples.iter().enumerate() {
        let evaluated = spec
            .block_inputs(point)
            .and_then(|inp| Ok((oracle.evaluate(spec, point)?, inp)));
        let (full, inp) = match evaluated {
            Ok(v) => v,
            Err(e) => {
                skipped.push((s, format!("{e}")));
                continue;
            }
        };
        valid += 1;
        for acc in accs.iter_mut() {
            let conv = acc.convention.unwrap_or(Convention::A);
            let (mut closed, target) = closed_and_target(acc.quantity, &inp, &full, conv);
            if opts.corrupt == Some(acc.quantity) {
                closed.iter_mut().for_each(|v| *v = -*v);
            }
            if acc.quantity == Quantity::MeanLandsberg {
                let traced = trace_with(&landsberg_blocks(&inp, conv), &block_fundamental(&inp).1);
                let d = traced
                    .iter()
                    .zip(&mean_landsberg_blocks(&inp, conv))
                    .fold(0.0f64, |w, (a, b)| w.max((a - b).abs()));
                acc.trace = Some(acc.trace.unwrap_or(0.0).max(d));
            }
            acc.push(s, m, dim, closed, target);
        }
    }
    if valid == 0 {
        return Err(VerifyError::NoValidSamples { skipped: skipped.len() });
    }
    let mut verdicts: Vec<QuantityVerdict> = Vec::new();
    for acc in accs {
        let report = acc.finish();
        match verdicts.iter_mut().find(|v| v.quantity == report.quantity) {
            Some(v) => v.reports.push(report),
            None => verdicts.push(QuantityVerdict {
                quantity: report.quantity,
                status: Status::Ambiguous,
                reports: vec![report],
            }),
        }
    }
    for v in verdicts.iter_mut() {
        v.status = judge(&v.reports, opts.confirm, opts.refute);
    }
    Ok(Verification {
        verdicts,
        valid_samples: valid,
        skipped,
    })
}
