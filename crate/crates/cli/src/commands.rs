//! The four subcommands. Each turns a validated [`RunConfig`] into a
//! [`Report`] and an exit status.

use landsberg_core::classify::{
    check_landsberg_conditions, check_weakly_landsberg_conditions, isotropy_battery, summary, BatteryEntry,
    Characterisation, ClassifyError, ConditionVerdict, IsotropyFit, Thresholds,
};
use landsberg_core::curvature::{contraction_identity_defect, CurvatureBundle, Oracle};
use landsberg_core::fdiff::audit;
use landsberg_core::metric::{validate_strong_convexity, FinslerFunction, MetricSpec, TangentPoint};
use landsberg_core::sample::{product_samples, Sampler};
use landsberg_core::tensor::Tensor;
use landsberg_core::tolerance::RELATIVE_FLOOR;
use landsberg_core::twisted::{verify_blocks, BlockReport, Verification, VerifyError, VerifyOptions};
use serde_json::Value;

use crate::config::{parse_point, ConfigError, RunConfig};
use crate::report::{cell, num, nums, tensor, Obj, Report, Table};

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Domain(String),
    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Config(_) => 2,
            CommandError::Domain(_) => 3,
            CommandError::Output { .. } => 1,
        }
    }
}

impl From<VerifyError> for CommandError {
    fn from(e: VerifyError) -> Self {
        CommandError::Domain(e.to_string())
    }
}

impl From<ClassifyError> for CommandError {
    fn from(e: ClassifyError) -> Self {
        CommandError::Domain(e.to_string())
    }
}

/// A report plus whether any check in it was refuted.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub refuted: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.refuted {
            4
        } else {
            0
        }
    }
}

fn echo(cfg: &RunConfig) -> Value {
    let mut c = cfg.clone();
    c.output.path = None;
    serde_json::to_value(&c).expect("config serialises")
}

fn samples(cfg: &RunConfig) -> Vec<TangentPoint> {
    product_samples(cfg.dimensions.m, cfg.dimensions.n, cfg.samples, cfg.seed)
}

fn point_json(p: &TangentPoint) -> Value {
    Obj::new().set("x", nums(&p.x)).set("y", nums(&p.y)).into()
}

fn skipped_json(skipped: &[(usize, String)]) -> Value {
    Value::Array(
        skipped
            .iter()
            .map(|(i, why)| Obj::new().set("index", *i).set("reason", why.as_str()).into())
            .collect(),
    )
}

/// Largest entry of `g` outside the two diagonal blocks.
fn off_block_max(g: &Tensor, m: usize) -> f64 {
    let mut worst: f64 = 0.0;
    g.for_each(|idx, v| {
        if (idx[0] < m) != (idx[1] < m) {
            worst = worst.max(v.abs());
        }
    });
    worst
}

pub fn eval(cfg: &RunConfig, point: Option<&str>) -> Result<Outcome, CommandError> {
    let spec = cfg.spec()?;
    let (m, dim) = (spec.m(), spec.dim());
    let p = match point {
        Some(text) => {
            let (x, y) = parse_point(text, dim)?;
            TangentPoint::new(x, y)
        }
        None => product_samples(m, spec.n(), 1, cfg.seed).remove(0),
    };
    let domain = |e: &dyn std::fmt::Display| CommandError::Domain(format!("at {:?}, {:?}: {e}", p.x, p.y));
    p.check_product_slit(m).map_err(|e| domain(&e))?;
    let f = spec.twist_value(&p.x).map_err(|e| domain(&e))?;
    let b = Oracle::new(dim).evaluate(&spec, &p).map_err(|e| domain(&e))?;
    let off = off_block_max(&b.g, m);
    let payload = Obj::new()
        .set("point", point_json(&p))
        .f("twist", f)
        .f("f_squared", b.f_squared)
        .f("min_pivot", b.min_pivot)
        .f("g_off_block_max_abs", off)
        .set("g", tensor(&b.g))
        .set("g_inv", tensor(&b.g_inv))
        .set("spray", nums(&b.spray))
        .set("cartan", tensor(&b.cartan))
        .set("mean_cartan", nums(&b.mean_cartan))
        .set("berwald", tensor(&b.berwald))
        .set("landsberg", tensor(&b.landsberg))
        .set("mean_landsberg", nums(&b.mean_landsberg));
    Ok(Outcome {
        report: Report {
            command: "eval",
            config: echo(cfg),
            payload: payload.into(),
            table: eval_table(&p, f, &b),
        },
        refuted: false,
    })
}

fn eval_table(p: &TangentPoint, f: f64, b: &CurvatureBundle) -> Table {
    let mut t = Table::default();
    t.wide_vec("x", &p.x);
    t.wide_vec("y", &p.y);
    t.wide_scalar("twist", f);
    t.wide_scalar("f_squared", b.f_squared);
    t.wide_scalar("min_pivot", b.min_pivot);
    t.wide("g", &b.g);
    t.wide("g_inv", &b.g_inv);
    t.wide_vec("G", &b.spray);
    t.wide("C", &b.cartan);
    t.wide_vec("I", &b.mean_cartan);
    t.wide("B", &b.berwald);
    t.wide("L", &b.landsberg);
    t.wide_vec("J", &b.mean_landsberg);
    t
}

/// Blocks whose residual exceeds `confirm` relative to the report scale.
fn discrepant_blocks(r: &BlockReport, confirm: f64) -> Vec<String> {
    let scale = r.oracle_max_abs.max(RELATIVE_FLOOR);
    r.blocks
        .iter()
        .filter(|b| b.max_abs / scale > confirm)
        .map(|b| b.block.clone())
        .collect()
}

fn block_report_json(r: &BlockReport, confirm: f64) -> Value {
    let mut o = Obj::new()
        .set("convention", r.convention.map(|c| c.name()))
        .set("samples", r.samples)
        .f("max_abs_residual", r.max_abs_residual)
        .f("oracle_max_abs", r.oracle_max_abs)
        .f("relative_residual", r.relative_residual);
    if let Some(t) = r.trace_consistency {
        o.push("trace_consistency", num(t));
    }
    o.push("discrepant_blocks", discrepant_blocks(r, confirm));
    o.push(
        "blocks",
        Value::Array(
            r.blocks
                .iter()
                .map(|b| {
                    Obj::new()
                        .set("block", b.block.as_str())
                        .f("max_abs_residual", b.max_abs)
                        .f("oracle_max_abs", b.oracle_max_abs)
                        .into()
                })
                .collect(),
        ),
    );
    o.set(
        "worst_sample",
        Obj::new()
            .set("index", r.worst_sample)
            .set("closed_form", nums(&r.closed_form))
            .set("oracle", nums(&r.oracle)),
    )
    .into()
}

/// Diagnostics of one factor metric over the projected samples.
struct FactorCheck {
    family: &'static str,
    convex: usize,
    points: usize,
    min_pivot: f64,
    identity_defect: f64,
}

fn factor_check(metric: &MetricSpec, points: &[TangentPoint]) -> FactorCheck {
    let validation = validate_strong_convexity(metric, points);
    let min_pivot = validation
        .points
        .iter()
        .map(|p| p.min_pivot)
        .filter(|v| v.is_finite())
        .fold(f64::INFINITY, f64::min);
    let oracle = Oracle::new(metric.dim());
    let identity_defect = points
        .iter()
        .filter_map(|p| oracle.evaluate(metric, p).ok())
        .map(|b| contraction_identity_defect(&b))
        .fold(0.0, f64::max);
    FactorCheck {
        family: metric.family_name(),
        convex: validation.pass_count(),
        points: points.len(),
        min_pivot,
        identity_defect,
    }
}

pub fn verify(cfg: &RunConfig) -> Result<Outcome, CommandError> {
    let spec = cfg.spec()?;
    let m = spec.m();
    let pts = samples(cfg);
    let opts = VerifyOptions {
        conventions: cfg.conventions.conventions(),
        confirm: cfg.tolerances.confirm,
        refute: cfg.tolerances.refute,
        corrupt: cfg.corrupt_quantity(),
    };
    let v = verify_blocks(&spec, &pts, &opts)?;
    let (first, second): (Vec<_>, Vec<_>) = pts.iter().map(|p| p.split(m)).unzip();
    let factors = [
        ("metric1", factor_check(spec.metric1(), &first)),
        ("metric2", factor_check(spec.metric2(), &second)),
    ];
    let payload = Obj::new()
        .set("samples_requested", pts.len())
        .set("valid_samples", v.valid_samples)
        .set("skipped", skipped_json(&v.skipped))
        .set("refuted", v.any_refuted())
        .set(
            "quantities",
            Value::Array(
                v.verdicts
                    .iter()
                    .map(|q| {
                        Obj::new()
                            .set("quantity", q.quantity.name())
                            .set("status", q.status.name())
                            .set(
                                "matching_conventions",
                                q.reports
                                    .iter()
                                    .filter(|r| r.relative_residual <= cfg.tolerances.confirm)
                                    .filter_map(|r| r.convention.map(|c| c.name()))
                                    .collect::<Vec<_>>(),
                            )
                            .set("reports", Value::Array(q.reports.iter().map(|r| block_report_json(r, cfg.tolerances.confirm)).collect()))
                            .into()
                    })
                    .collect(),
            ),
        )
        .set(
            "factors",
            Value::Array(
                factors
                    .iter()
                    .map(|(name, c)| {
                        Obj::new()
                            .set("factor", *name)
                            .set("family", c.family)
                            .set("strongly_convex_points", c.convex)
                            .set("points", c.points)
                            .f("min_pivot", c.min_pivot)
                            .f("contraction_identity_defect", c.identity_defect)
                            .into()
                    })
                    .collect(),
            ),
        );
    Ok(Outcome {
        report: Report {
            command: "verify",
            config: echo(cfg),
            payload: payload.into(),
            table: verify_table(&v),
        },
        refuted: v.any_refuted(),
    })
}

fn verify_table(v: &Verification) -> Table {
    let mut t = Table::new(&[
        "quantity",
        "status",
        "convention",
        "block",
        "max_abs_residual",
        "oracle_max_abs",
        "relative_residual",
    ]);
    for q in &v.verdicts {
        for r in &q.reports {
            let conv = r.convention.map_or("", |c| c.name()).to_string();
            let head = |block: &str| vec![q.quantity.name().to_string(), q.status.name(), conv.clone(), block.to_string()];
            let mut row = head("all");
            row.extend([cell(r.max_abs_residual), cell(r.oracle_max_abs), cell(r.relative_residual)]);
            t.row(row);
            for b in &r.blocks {
                let mut row = head(&b.block);
                row.extend([cell(b.max_abs), cell(b.oracle_max_abs), String::new()]);
                t.row(row);
            }
        }
    }
    t
}

fn condition_json(c: &ConditionVerdict) -> Value {
    Obj::new()
        .set("id", c.id)
        .set("description", c.description)
        .f("max_abs", c.max_abs)
        .f("pass_threshold", c.pass_threshold)
        .f("fail_threshold", c.fail_threshold)
        .set("verdict", c.verdict.name())
        .set("samples", c.samples)
        .into()
}

fn characterisation_json(c: &Characterisation) -> Value {
    Obj::new()
        .set("conditions", Value::Array(c.conditions.iter().map(condition_json).collect()))
        .set("oracle", condition_json(&c.oracle))
        .f("first_block_twist_gradient", c.first_block_twist_gradient)
        .set("sufficiency", c.sufficiency)
        .set("necessity", c.necessity)
        .set("consistent", c.consistent())
        .set("skipped", c.skipped)
        .set("summary", summary(c))
        .into()
}

fn fit_json(fit: &IsotropyFit, outcome: &str) -> Value {
    Obj::new()
        .set("mode", fit.mode.name())
        .set("x", nums(&fit.x))
        .f("c", fit.c)
        .f("residual_before", fit.residual_before)
        .f("residual_after", fit.residual_after)
        .f("max_curvature", fit.max_curvature)
        .f("max_scaled_cartan", fit.max_scaled_cartan)
        .set("vacuous", fit.vacuous)
        .set("samples", fit.samples)
        .set("outcome", outcome)
        .into()
}

pub fn classify(cfg: &RunConfig) -> Result<Outcome, CommandError> {
    let spec = cfg.spec()?;
    let pts = samples(cfg);
    let th = Thresholds {
        pass: cfg.tolerances.condition_pass,
        fail: cfg.tolerances.condition_fail,
    };
    let landsberg = check_landsberg_conditions(&spec, &pts, th)?;
    let weakly = check_weakly_landsberg_conditions(&spec, &pts, th)?;
    let mut sampler = Sampler::new(cfg.seed);
    let bases: Vec<Vec<f64>> = (0..cfg.isotropy.base_points).map(|_| sampler.base_point(spec.dim())).collect();
    let battery = isotropy_battery(&[("config".to_string(), spec)], &bases, cfg.isotropy.fibers, cfg.seed);
    let entry: &BatteryEntry = &battery[0];
    let counterexamples = entry.counterexamples();
    let consistent = landsberg.consistent() && weakly.consistent() && counterexamples == 0;
    let statement = if consistent {
        "no inconsistency with the characterisations was observed"
    } else {
        "inconsistency with a characterisation was observed"
    };
    let payload = Obj::new()
        .set("landsberg", characterisation_json(&landsberg))
        .set("weakly_landsberg", characterisation_json(&weakly))
        .set(
            "isotropy",
            Obj::new()
                .set("twist_depends_on_first", entry.twist_depends_on_first)
                .set("twist_depends_on_second", entry.twist_depends_on_second)
                .set("counterexamples", counterexamples)
                .set(
                    "fits",
                    Value::Array(entry.fits.iter().map(|(f, o)| fit_json(f, o.name())).collect()),
                ),
        )
        .set("consistent", consistent)
        .set("statement", statement);
    let mut t = Table::new(&["section", "id", "max_abs", "verdict"]);
    for (section, c) in [("landsberg", &landsberg), ("weakly_landsberg", &weakly)] {
        for v in c.conditions.iter().chain([&c.oracle]) {
            t.row(vec![section.into(), v.id.into(), cell(v.max_abs), v.verdict.name().into()]);
        }
    }
    for (k, (fit, o)) in entry.fits.iter().enumerate() {
        t.row(vec![
            "isotropy".into(),
            format!("{}_{}", fit.mode.name(), k / 2 + 1),
            cell(fit.residual_after),
            o.name().into(),
        ]);
    }
    Ok(Outcome {
        report: Report {
            command: "classify",
            config: echo(cfg),
            payload: payload.into(),
            table: t,
        },
        refuted: !consistent,
    })
}

pub fn fdcheck(cfg: &RunConfig) -> Result<Outcome, CommandError> {
    let spec = cfg.spec()?;
    let pts = samples(cfg);
    let a = audit(&spec, &pts, cfg.tolerances.fd_step);
    if a.points == 0 {
        return Err(CommandError::Domain(format!("no valid sample points ({} rejected)", a.skipped)));
    }
    let payload = Obj::new()
        .f("step", a.step)
        .set("richardson_levels", a.richardson_levels)
        .set("points", a.points)
        .set("skipped", a.skipped)
        .set("all_pass", a.all_pass())
        .set(
            "rows",
            Value::Array(
                a.rows
                    .iter()
                    .map(|r| {
                        Obj::new()
                            .set("quantity", r.quantity)
                            .set("order", r.order)
                            .set("entries", r.entries)
                            .f("max_abs_diff", r.max_abs_diff)
                            .f("max_abs_jet", r.max_abs_jet)
                            .f("relative", r.relative)
                            .f("tolerance", r.tolerance)
                            .set("pass", r.pass())
                            .into()
                    })
                    .collect(),
            ),
        );
    let mut t = Table::new(&["quantity", "order", "entries", "max_abs_diff", "max_abs_jet", "relative", "tolerance", "pass", "step"]);
    for r in &a.rows {
        t.row(vec![
            r.quantity.into(),
            r.order.to_string(),
            r.entries.to_string(),
            cell(r.max_abs_diff),
            cell(r.max_abs_jet),
            cell(r.relative),
            cell(r.tolerance),
            r.pass().to_string(),
            cell(a.step),
        ]);
    }
    Ok(Outcome {
        report: Report {
            command: "fdcheck",
            config: echo(cfg),
            payload: payload.into(),
            table: t,
        },
        refuted: !a.all_pass(),
    })
}
