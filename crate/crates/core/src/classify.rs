//! Numerical tests of the Landsberg and weakly Landsberg characterisations
//! of twisted products, and of relatively isotropic curvature.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::curvature::{CurvatureBundle, CurvatureError, Oracle};
use crate::metric::{FinslerFunction, TangentPoint};
use crate::tolerance::{
    CONDITION_FAIL, CONDITION_PASS, EXACT_ZERO, ISOTROPY_C, ISOTROPY_CURVATURE, ISOTROPY_RESIDUAL,
};
use crate::twisted::{BlockInputs, TwistedProductSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn classify(max_abs: f64, pass: f64, fail: f64) -> Self {
        if max_abs <= pass {
            Verdict::Pass
        } else if max_abs >= fail {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionVerdict {
    pub id: &'static str,
    pub description: &'static str,
    pub max_abs: f64,
    pub pass_threshold: f64,
    pub fail_threshold: f64,
    pub verdict: Verdict,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub pass: f64,
    pub fail: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            pass: CONDITION_PASS,
            fail: CONDITION_FAIL,
        }
    }
}

/// The three factor conditions against the direct verdict on the full metric.
#[derive(Debug, Clone, PartialEq)]
pub struct Characterisation {
    pub conditions: Vec<ConditionVerdict>,
    pub oracle: ConditionVerdict,
    /// Largest `|∂f/∂x^p|` over the first block, across samples.
    pub first_block_twist_gradient: f64,
    /// Conditions pass ⇒ oracle passes. `None` when the conditions do not all pass.
    pub sufficiency: Option<bool>,
    /// Oracle passes ⇒ conditions pass. Only meaningful when the twist
    /// depends on the first block; `None` otherwise.
    pub necessity: Option<bool>,
    pub skipped: usize,
}

impl Characterisation {
    pub fn conditions_pass(&self) -> bool {
        self.conditions.iter().all(|c| c.verdict == Verdict::Pass)
    }

    pub fn consistent(&self) -> bool {
        self.sufficiency != Some(false) && self.necessity != Some(false)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClassifyError {
    #[error("no valid sample points ({skipped} rejected)")]
    NoValidSamples { skipped: usize },
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Landsberg,
    WeaklyLandsberg,
}

fn max_abs(v: &[f64]) -> f64 {
    crate::tensor::max_abs(v)
}

/// `max_{ij} |C^p_{ij} ∂f/∂x^p|` with `C^p_{ij}` of the first factor.
fn cartan_twist_contraction(inp: &BlockInputs) -> f64 {
    let m = inp.m;
    let c = &inp.first.vertical.cartan_mixed;
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let s: f64 = (0..m).map(|p| c.get(&[p, i, j]) * inp.df[p]).sum();
            worst = worst.max(s.abs());
        }
    }
    worst
}

/// `|I^p ∂f/∂x^p|` with `I^p` of the first factor.
fn mean_cartan_twist_contraction(inp: &BlockInputs) -> f64 {
    let s: f64 = (0..inp.m)
        .map(|p| inp.first.vertical.mean_cartan_raised[p] * inp.df[p])
        .sum();
    s.abs()
}

fn characterise(
    spec: &TwistedProductSpec,
    samples: &[TangentPoint],
    th: Thresholds,
    kind: Kind,
) -> Result<Characterisation, ClassifyError> {
    let oracle = Oracle::new(spec.dim());
    let mut worst = [0.0f64; 4];
    let mut grad1: f64 = 0.0;
    let mut valid = 0;
    let mut skipped = 0;
    for p in samples {
        let evaluated = spec
            .block_inputs(p)
            .and_then(|inp| Ok((oracle.evaluate(spec, p)?, inp)));
        let Ok((full, inp)) = evaluated else {
            skipped += 1;
            continue;
        };
        valid += 1;
        let vals = match kind {
            Kind::Landsberg => [
                inp.first.landsberg.max_abs(),
                inp.second.cartan.max_abs(),
                cartan_twist_contraction(&inp),
                full.landsberg.max_abs(),
            ],
            Kind::WeaklyLandsberg => [
                max_abs(&inp.first.mean_landsberg),
                max_abs(&inp.second.mean_cartan),
                mean_cartan_twist_contraction(&inp),
                max_abs(&full.mean_landsberg),
            ],
        };
        for (w, v) in worst.iter_mut().zip(vals) {
            *w = w.max(v);
        }
        grad1 = grad1.max(max_abs(&inp.df[..inp.m]));
    }
    if valid == 0 {
        return Err(ClassifyError::NoValidSamples { skipped });
    }
    let (ids, descriptions): ([&'static str; 4], [&'static str; 4]) = match kind {
        Kind::Landsberg => (
            ["first_factor_landsberg", "second_factor_riemannian", "cartan_twist", "landsberg"],
            [
                "max |L¹| (first factor is Landsberg)",
                "max |C²| (second factor is Riemannian)",
                "max |C¹^p_ij ∂f/∂x^p|",
                "max |L| of the twisted metric",
            ],
        ),
        Kind::WeaklyLandsberg => (
            [
                "first_factor_weakly_landsberg",
                "second_factor_riemannian",
                "mean_cartan_twist",
                "mean_landsberg",
            ],
            [
                "max |J¹| (first factor is weakly Landsberg)",
                "max |I²| (second factor is Riemannian)",
                "max |I¹^p ∂f/∂x^p|",
                "max |J| of the twisted metric",
            ],
        ),
    };
    let mut verdicts: Vec<ConditionVerdict> = (0..4)
        .map(|k| ConditionVerdict {
            id: ids[k],
            description: descriptions[k],
            max_abs: worst[k],
            pass_threshold: th.pass,
            fail_threshold: th.fail,
            verdict: Verdict::classify(worst[k], th.pass, th.fail),
            samples: valid,
        })
        .collect();
    let oracle_verdict = verdicts.pop().unwrap();
    let conditions_pass = verdicts.iter().all(|c| c.verdict == Verdict::Pass);
    let sufficiency = conditions_pass.then(|| oracle_verdict.verdict == Verdict::Pass);
    let necessity = (grad1 > EXACT_ZERO && oracle_verdict.verdict == Verdict::Pass).then_some(conditions_pass);
    Ok(Characterisation {
        conditions: verdicts,
        oracle: oracle_verdict,
        first_block_twist_gradient: grad1,
        sufficiency,
        necessity,
        skipped,
    })
}

/// First factor Landsberg, second factor Riemannian and `C¹^p_ij ∂f/∂x^p = 0`,
/// against `L = 0` for the twisted metric.
pub fn check_landsberg_conditions(
    spec: &TwistedProductSpec,
    samples: &[TangentPoint],
    th: Thresholds,
) -> Result<Characterisation, ClassifyError> {
    characterise(spec, samples, th, Kind::Landsberg)
}

/// First factor weakly Landsberg, second factor Riemannian and
/// `I¹^p ∂f/∂x^p = 0`, against `J = 0` for the twisted metric.
pub fn check_weakly_landsberg_conditions(
    spec: &TwistedProductSpec,
    samples: &[TangentPoint],
    th: Thresholds,
) -> Result<Characterisation, ClassifyError> {
    characterise(spec, samples, th, Kind::WeaklyLandsberg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsotropyMode {
    /// `L + c F C = 0`
    Full,
    /// `J + c F I = 0`
    Mean,
}

impl IsotropyMode {
    pub fn name(self) -> &'static str {
        match self {
            IsotropyMode::Full => "full",
            IsotropyMode::Mean => "mean",
        }
    }
}

/// Least-squares fit of `c` in `L + c F C = 0` at one base point.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotropyFit {
    pub mode: IsotropyMode,
    pub x: Vec<f64>,
    pub c: f64,
    /// `√Σ‖L‖²` over samples and indices.
    pub residual_before: f64,
    /// `√Σ‖L + cFC‖²`
    pub residual_after: f64,
    pub max_curvature: f64,
    pub max_scaled_cartan: f64,
    /// The Cartan side vanishes, so any `c` fits.
    pub vacuous: bool,
    pub samples: usize,
}

impl IsotropyFit {
    pub fn exact(&self) -> bool {
        !self.vacuous && self.residual_after <= ISOTROPY_RESIDUAL
    }
}

/// `√Σ‖L + cFC‖²` for an arbitrary `c`.
pub fn objective(c: f64, pairs: &[(Vec<f64>, Vec<f64>)]) -> f64 {
    let mut s = 0.0;
    for (l, fc) in pairs {
        for (a, b) in l.iter().zip(fc) {
            let r = a + c * b;
            s += r * r;
        }
    }
    libm::sqrt(s)
}

/// The `(L, F C)` (or `(J, F I)`) pairs entering the fit.
pub fn isotropy_pairs(bundles: &[CurvatureBundle], mode: IsotropyMode) -> Vec<(Vec<f64>, Vec<f64>)> {
    bundles
        .iter()
        .map(|b| {
            let f = b.norm();
            match mode {
                IsotropyMode::Full => (
                    b.landsberg.data().to_vec(),
                    b.cartan.data().iter().map(|v| f * v).collect(),
                ),
                IsotropyMode::Mean => (
                    b.mean_landsberg.clone(),
                    b.mean_cartan.iter().map(|v| f * v).collect(),
                ),
            }
        })
        .collect()
}

/// Fits `c` from oracle bundles sharing one base point.
pub fn fit_pairs(x: &[f64], pairs: &[(Vec<f64>, Vec<f64>)], mode: IsotropyMode) -> IsotropyFit {
    let (mut num, mut den) = (0.0, 0.0);
    let (mut max_l, mut max_fc): (f64, f64) = (0.0, 0.0);
    for (l, fc) in pairs {
        for (a, b) in l.iter().zip(fc) {
            num += a * b;
            den += b * b;
            max_l = max_l.max(a.abs());
            max_fc = max_fc.max(b.abs());
        }
    }
    let vacuous = max_fc <= EXACT_ZERO;
    let c = if vacuous { 0.0 } else { -num / den };
    IsotropyFit {
        mode,
        x: x.to_vec(),
        c,
        residual_before: objective(0.0, pairs),
        residual_after: objective(c, pairs),
        max_curvature: max_l,
        max_scaled_cartan: max_fc,
        vacuous,
        samples: pairs.len(),
    }
}

pub const MIN_ISOTROPY_SAMPLES: usize = 10;

/// Evaluates the oracle at every sample (all sharing the base point) and fits `c`.
pub fn isotropy_fit<M: FinslerFunction>(
    metric: &M,
    samples: &[TangentPoint],
    mode: IsotropyMode,
) -> Result<IsotropyFit, ClassifyError> {
    let oracle = Oracle::new(metric.dim());
    let bundles: Vec<CurvatureBundle> = samples.iter().filter_map(|p| oracle.evaluate(metric, p).ok()).collect();
    if bundles.len() < MIN_ISOTROPY_SAMPLES {
        return Err(ClassifyError::NoValidSamples {
            skipped: samples.len() - bundles.len(),
        });
    }
    let x = bundles[0].point.x.clone();
    Ok(fit_pairs(&x, &isotropy_pairs(&bundles, mode), mode))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsotropyOutcome {
    /// Cartan side vanishes; nothing to test.
    Vacuous,
    /// No `c` makes the relation hold.
    NotIsotropic,
    /// Exactly isotropic with `c = 0` and vanishing curvature.
    Consistent,
    /// Exactly isotropic but with `c ≠ 0` or nonvanishing curvature.
    Counterexample,
}

impl IsotropyOutcome {
    pub fn name(self) -> &'static str {
        match self {
            IsotropyOutcome::Vacuous => "vacuous",
            IsotropyOutcome::NotIsotropic => "not isotropic",
            IsotropyOutcome::Consistent => "isotropic with c = 0 and vanishing curvature",
            IsotropyOutcome::Counterexample => "counterexample",
        }
    }
}

pub fn judge_isotropy(fit: &IsotropyFit) -> IsotropyOutcome {
    if fit.vacuous {
        IsotropyOutcome::Vacuous
    } else if !fit.exact() {
        IsotropyOutcome::NotIsotropic
    } else if fit.c.abs() <= ISOTROPY_C && fit.max_curvature <= ISOTROPY_CURVATURE {
        IsotropyOutcome::Consistent
    } else {
        IsotropyOutcome::Counterexample
    }
}

/// One spec of the isotropy battery.
#[derive(Debug, Clone, PartialEq)]
pub struct BatteryEntry {
    pub name: String,
    pub twist_depends_on_first: bool,
    pub twist_depends_on_second: bool,
    pub fits: Vec<(IsotropyFit, IsotropyOutcome)>,
}

impl BatteryEntry {
    pub fn counterexamples(&self) -> usize {
        self.fits
            .iter()
            .filter(|(_, o)| *o == IsotropyOutcome::Counterexample)
            .count()
    }
}

/// Fits both modes at each base point of `points`, using `fibers` fiber
/// vectors per point, for every named spec.
pub fn isotropy_battery(
    suite: &[(String, TwistedProductSpec)],
    base_points: &[Vec<f64>],
    fibers: usize,
    seed: u64,
) -> Vec<BatteryEntry> {
    suite
        .iter()
        .map(|(name, spec)| {
            let mut fits = Vec::new();
            for (k, x) in base_points.iter().enumerate() {
                let ys = crate::sample::fiber_samples(x, &[spec.m(), spec.n()], fibers, seed.wrapping_add(k as u64));
                for mode in [IsotropyMode::Full, IsotropyMode::Mean] {
                    if let Ok(fit) = isotropy_fit(spec, &ys, mode) {
                        let o = judge_isotropy(&fit);
                        fits.push((fit, o));
                    }
                }
            }
            BatteryEntry {
                name: name.clone(),
                twist_depends_on_first: twist_mentions_first(spec),
                twist_depends_on_second: spec.twist_depends_on_second(),
                fits,
            }
        })
        .collect()
}

fn twist_mentions_first(spec: &TwistedProductSpec) -> bool {
    let m = spec.m();
    spec.twist()
        .mentions(|v| matches!(v, crate::expr::Var::X(i) if i < m))
}

/// A one-line summary of a characterisation.
pub fn summary(c: &Characterisation) -> String {
    let conds: Vec<String> = c
        .conditions
        .iter()
        .map(|v| format!("{}={}", v.id, v.verdict.name()))
        .collect();
    format!("{} ; {}={}", conds.join(", "), c.oracle.id, c.oracle.verdict.name())
}
