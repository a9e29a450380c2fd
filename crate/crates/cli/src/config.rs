//! Run configuration: a single JSON document describing the product metric,
//! sampling and output.

use std::path::Path;

use landsberg_core::expr::{parse, AllowedVars, Expr, ParseError};
use landsberg_core::metric::{MetricError, MetricSpec};
use landsberg_core::sample::DEFAULT_SAMPLES;
use landsberg_core::tolerance;
use landsberg_core::twisted::{Convention, Quantity, TwistedProductSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{field}: {source} in `{text}`")]
    Expr {
        field: String,
        text: String,
        #[source]
        source: ParseError,
    },
    #[error("{field}: {source}")]
    Metric {
        field: String,
        #[source]
        source: MetricError,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dimensions {
    pub m: usize,
    pub n: usize,
}

/// A coefficient may be written as a number or as an expression string.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Coefficient {
    Number(serde_json::Number),
    Text(String),
}

impl<'de> Deserialize<'de> for Coefficient {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::Number(n) => Ok(Coefficient::Number(n)),
            serde_json::Value::String(s) => Ok(Coefficient::Text(s)),
            other => Err(serde::de::Error::custom(format!(
                "coefficient must be a number or an expression string, got {other}"
            ))),
        }
    }
}

impl Coefficient {
    fn text(&self) -> String {
        match self {
            Coefficient::Number(n) => n.to_string(),
            Coefficient::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum MetricConfig {
    Euclidean,
    Riemannian { a: Vec<Vec<Coefficient>> },
    Randers { a: Vec<Vec<Coefficient>>, b: Vec<Coefficient> },
    Custom { f_squared: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub confirm: f64,
    pub refute: f64,
    pub condition_pass: f64,
    pub condition_fail: f64,
    pub fd_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            confirm: tolerance::CONFIRM_RELATIVE,
            refute: tolerance::REFUTE_RELATIVE,
            condition_pass: tolerance::CONDITION_PASS,
            condition_fail: tolerance::CONDITION_FAIL,
            fd_step: tolerance::FD_STEP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ConventionChoice {
    A,
    B,
    #[default]
    #[serde(rename = "both")]
    Both,
}

impl ConventionChoice {
    pub fn conventions(self) -> Vec<Convention> {
        match self {
            ConventionChoice::A => vec![Convention::A],
            ConventionChoice::B => vec![Convention::B],
            ConventionChoice::Both => Convention::BOTH.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IsotropyConfig {
    pub base_points: usize,
    pub fibers: usize,
}

impl Default for IsotropyConfig {
    fn default() -> Self {
        Self {
            base_points: 3,
            fibers: 20,
        }
    }
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dimensions: Dimensions,
    pub metric1: MetricConfig,
    pub metric2: MetricConfig,
    pub twist: String,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub conventions: ConventionChoice,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub isotropy: IsotropyConfig,
    /// Flips the sign of one closed form before comparison.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrupt: Option<String>,
}

fn expr(field: &str, text: &str, allowed: AllowedVars) -> Result<Expr, ConfigError> {
    parse(text, allowed).map_err(|source| ConfigError::Expr {
        field: field.to_string(),
        text: text.to_string(),
        source,
    })
}

fn matrix(field: &str, dim: usize, a: &[Vec<Coefficient>]) -> Result<Vec<Vec<Expr>>, ConfigError> {
    a.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, c)| expr(&format!("{field}.a[{i}][{j}]"), &c.text(), AllowedVars::base(dim)))
                .collect()
        })
        .collect()
}

impl MetricConfig {
    pub fn build(&self, field: &str, dim: usize) -> Result<MetricSpec, ConfigError> {
        let wrap = |source| ConfigError::Metric {
            field: field.to_string(),
            source,
        };
        match self {
            MetricConfig::Euclidean => Ok(MetricSpec::euclidean(dim)),
            MetricConfig::Riemannian { a } => MetricSpec::riemannian(matrix(field, dim, a)?).map_err(wrap),
            MetricConfig::Randers { a, b } => {
                let b = b
                    .iter()
                    .enumerate()
                    .map(|(i, c)| expr(&format!("{field}.b[{i}]"), &c.text(), AllowedVars::base(dim)))
                    .collect::<Result<Vec<_>, _>>()?;
                if b.len() != dim {
                    return Err(wrap(MetricError::DimensionMismatch {
                        expected: dim,
                        got: b.len(),
                    }));
                }
                MetricSpec::randers(matrix(field, dim, a)?, b).map_err(wrap)
            }
            MetricConfig::Custom { f_squared } => Ok(MetricSpec::custom(
                dim,
                expr(&format!("{field}.f_squared"), f_squared, AllowedVars::tangent(dim))?,
            )),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    fn check(&self) -> Result<(), ConfigError> {
        let Dimensions { m, n } = self.dimensions;
        if m == 0 || n == 0 {
            return Err(ConfigError::Invalid("dimensions m and n must be positive".into()));
        }
        if self.samples == 0 {
            return Err(ConfigError::Invalid("samples must be at least 1".into()));
        }
        if let Some(q) = &self.corrupt {
            if Quantity::from_name(q).is_none() {
                return Err(ConfigError::Invalid(format!("corrupt: unknown quantity `{q}`")));
            }
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("confirm", t.confirm),
            ("refute", t.refute),
            ("condition_pass", t.condition_pass),
            ("condition_fail", t.condition_fail),
            ("fd_step", t.fd_step),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::Invalid(format!("tolerances.{name} must be positive")));
            }
        }
        self.spec().map(|_| ())
    }

    pub fn spec(&self) -> Result<TwistedProductSpec, ConfigError> {
        let Dimensions { m, n } = self.dimensions;
        let metric1 = self.metric1.build("metric1", m)?;
        let metric2 = self.metric2.build("metric2", n)?;
        let twist = expr("twist", &self.twist, AllowedVars::base(m + n))?;
        Ok(TwistedProductSpec::new(metric1, metric2, twist))
    }

    pub fn corrupt_quantity(&self) -> Option<Quantity> {
        self.corrupt.as_deref().and_then(Quantity::from_name)
    }
}

/// Parses `x=a,b,..;y=c,d,..`.
pub fn parse_point(text: &str, dim: usize) -> Result<(Vec<f64>, Vec<f64>), ConfigError> {
    let bad = |msg: &str| ConfigError::Invalid(format!("--point: {msg}"));
    let (mut x, mut y) = (None, None);
    for part in text.split(';') {
        let (key, values) = part.split_once('=').ok_or_else(|| bad("expected `x=..;y=..`"))?;
        let values = values
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad(&format!("not a number: `{}`", v.trim()))))
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() != dim {
            return Err(bad(&format!("expected {dim} values for {}", key.trim())));
        }
        match key.trim() {
            "x" => x = Some(values),
            "y" => y = Some(values),
            other => return Err(bad(&format!("unknown key `{other}`"))),
        }
    }
    match (x, y) {
        (Some(x), Some(y)) => Ok((x, y)),
        _ => Err(bad("both x and y are required")),
    }
}
