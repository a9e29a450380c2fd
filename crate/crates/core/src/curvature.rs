//! Direct computation of every curvature quantity from `F²` alone.
//!
//! Nothing here knows about product structure: the oracle differentiates
//! `F²` with jets, inverts the fiber Hessian in jet arithmetic, builds the
//! spray and reads the remaining tensors off the resulting jets.
//!
//! Index conventions: `cartan_raised[a][b][c] = C^{ab}_c`,
//! `berwald[a][b][c][d] = B^a_{bcd}`, and `;` is a fiber partial derivative.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::jet::{DegreeCaps, Jet, JetError, JetSpace};
use crate::linalg::{invert, ldl_pivots};
use crate::metric::{FinslerFunction, MetricError, TangentPoint};
use crate::tensor::{mat_vec, Tensor};
use crate::tolerance::MIN_HESSIAN_PIVOT;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurvatureError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("point is outside the strong-convexity domain (smallest Hessian pivot {min_pivot:e})")]
    Degenerate { min_pivot: f64 },
}

impl From<JetError> for CurvatureError {
    fn from(e: JetError) -> Self {
        CurvatureError::Metric(MetricError::Jet(e))
    }
}

/// Fiber derivatives of the Cartan tensors, used by the closed-form block
/// formulas of twisted products.
#[derive(Debug, Clone, PartialEq)]
pub struct VerticalDerivatives {
    /// `C^{ab}_{c;d}`
    pub cartan_raised_d1: Tensor,
    /// `C^{ab}_{c;d;e}`
    pub cartan_raised_d2: Tensor,
    /// `C^a_{bc} = g^{ap} C_{pbc}`
    pub cartan_mixed: Tensor,
    /// `C^a_{bc;d}`
    pub cartan_mixed_d1: Tensor,
    /// `I^a = g^{ap} I_p`
    pub mean_cartan_raised: Vec<f64>,
    /// `I^a_{;b}`, indexed `[a][b]`
    pub mean_cartan_raised_d1: Tensor,
}

/// All curvature quantities at one tangent point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureBundle {
    pub point: TangentPoint,
    pub f_squared: f64,
    /// `g_{ab}`
    pub g: Tensor,
    /// `g^{ab}`
    pub g_inv: Tensor,
    /// `y_a = g_{ab} y^b`
    pub y_lower: Vec<f64>,
    /// `𝔾^a`
    pub spray: Vec<f64>,
    /// `C_{abc}`
    pub cartan: Tensor,
    /// `C^{ab}_c = −½ ∂g^{ab}/∂y^c`
    pub cartan_raised: Tensor,
    /// `I_a`
    pub mean_cartan: Vec<f64>,
    /// `B^a_{bcd}`
    pub berwald: Tensor,
    /// `L_{abc} = −½ y_l B^l_{abc}`
    pub landsberg: Tensor,
    /// `J_a`
    pub mean_landsberg: Vec<f64>,
    /// Smallest LDLᵀ pivot of `g`.
    pub min_pivot: f64,
    pub vertical: VerticalDerivatives,
}

impl CurvatureBundle {
    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.f_squared)
    }
}

struct Core {
    f_squared: f64,
    g_jet: Vec<Vec<Jet>>,
    g_val: Vec<Vec<f64>>,
    min_pivot: f64,
    g_inv_jet: Vec<Vec<Jet>>,
    spray_jet: Vec<Jet>,
}

/// Jet-based evaluator for metrics of a fixed dimension. The jet space is
/// built once and shared by every evaluation.
#[derive(Debug, Clone)]
pub struct Oracle {
    dim: usize,
    space: Arc<JetSpace>,
}

impl Oracle {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            space: JetSpace::with_default_caps(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `g_{ab}` and `g^{ab}` only.
    pub fn fundamental_tensor<M: FinslerFunction>(
        &self,
        metric: &M,
        point: &TangentPoint,
    ) -> Result<(Tensor, Tensor), CurvatureError> {
        let h = crate::metric::fiber_hessian(metric, point)?;
        let min_pivot = ldl_pivots(&h).into_iter().fold(f64::INFINITY, f64::min);
        if !(min_pivot >= MIN_HESSIAN_PIVOT) {
            return Err(CurvatureError::Degenerate { min_pivot });
        }
        let inv = invert(&h)?.matrix;
        let n = h.len();
        Ok((
            Tensor::from_fn(n, 2, |i| h[i[0]][i[1]]),
            Tensor::from_fn(n, 2, |i| inv[i[0]][i[1]]),
        ))
    }

    pub fn spray<M: FinslerFunction>(&self, metric: &M, point: &TangentPoint) -> Result<Vec<f64>, CurvatureError> {
        Ok(self.evaluate(metric, point)?.spray)
    }

    /// `F²` as a jet in `(x, y)`; variable `i < dim` is `xⁱ`, `dim + a` is `yᵃ`.
    pub fn f_squared_jet<M: FinslerFunction>(&self, metric: &M, point: &TangentPoint) -> Result<Jet, CurvatureError> {
        let n = self.dim;
        if metric.dim() != n || point.dim() != n {
            return Err(MetricError::DimensionMismatch {
                expected: n,
                got: point.dim(),
            }
            .into());
        }
        point.check_slit()?;
        let xs: Vec<Jet> = (0..n)
            .map(|i| self.space.lift_variable(i, point.x[i]))
            .collect::<Result<_, _>>()?;
        let ys: Vec<Jet> = (0..n)
            .map(|a| self.space.lift_variable(n + a, point.y[a]))
            .collect::<Result<_, _>>()?;
        Ok(metric.f_squared(&xs, &ys)?)
    }

    /// Spray coefficients as jets, valid to order 3 in `y` (x-validity 0).
    pub fn spray_jets<M: FinslerFunction>(&self, metric: &M, point: &TangentPoint) -> Result<Vec<Jet>, CurvatureError> {
        Ok(self.core(metric, point)?.spray_jet)
    }

    fn core<M: FinslerFunction>(&self, metric: &M, point: &TangentPoint) -> Result<Core, CurvatureError> {
        let n = self.dim;
        let space = &self.space;
        let yv = |a: usize| n + a;
        let e = self.f_squared_jet(metric, point)?;
        let ys: Vec<Jet> = (0..n)
            .map(|a| space.lift_variable(yv(a), point.y[a]))
            .collect::<Result<_, _>>()?;

        // g_ab = ½ ∂²F²/∂yᵃ∂yᵇ; x-derivatives of g are never needed
        let d_y: Vec<Jet> = (0..n).map(|a| e.derivative(yv(a))).collect::<Result<_, _>>()?;
        let mut g_jet: Vec<Vec<Jet>> = vec![Vec::with_capacity(n); n];
        for a in 0..n {
            for b in 0..n {
                let gab = if b < a {
                    g_jet[b][a].clone()
                } else {
                    d_y[a]
                        .derivative(yv(b))?
                        .scale(0.5)
                        .truncated(DegreeCaps::new(0, u8::MAX))
                };
                g_jet[a].push(gab);
            }
        }
        let g_val: Vec<Vec<f64>> = g_jet.iter().map(|r| r.iter().map(Jet::value).collect()).collect();
        let min_pivot = ldl_pivots(&g_val).into_iter().fold(f64::INFINITY, f64::min);
        if !(min_pivot >= MIN_HESSIAN_PIVOT) {
            return Err(CurvatureError::Degenerate { min_pivot });
        }
        let g_inv_jet = invert(&g_jet)?.matrix;

        // 𝔾^a = ¼ g^{ap} (∂²F²/∂x^q∂y^p y^q − ∂F²/∂x^p)
        let mut spray_jet = Vec::with_capacity(n);
        let w: Vec<Jet> = (0..n)
            .map(|p| -> Result<Jet, CurvatureError> {
                let mut acc = e.derivative(p)?.neg();
                for (q, yq) in ys.iter().enumerate() {
                    acc = acc.add(&d_y[p].derivative(q)?.mul(yq));
                }
                Ok(acc)
            })
            .collect::<Result<_, _>>()?;
        for a in 0..n {
            let mut acc = space.constant(0.0);
            for p in 0..n {
                acc = acc.add(&g_inv_jet[a][p].mul(&w[p]));
            }
            spray_jet.push(acc.scale(0.25));
        }
        Ok(Core {
            f_squared: e.value(),
            g_jet,
            g_val,
            min_pivot,
            g_inv_jet,
            spray_jet,
        })
    }

    pub fn evaluate<M: FinslerFunction>(
        &self,
        metric: &M,
        point: &TangentPoint,
    ) -> Result<CurvatureBundle, CurvatureError> {
        let n = self.dim;
        let space = &self.space;
        let yv = |a: usize| n + a;
        let Core {
            f_squared,
            g_jet,
            g_val,
            min_pivot,
            g_inv_jet,
            spray_jet,
        } = self.core(metric, point)?;

        let g = Tensor::from_fn(n, 2, |i| g_val[i[0]][i[1]]);
        let g_inv = Tensor::from_fn(n, 2, |i| g_inv_jet[i[0]][i[1]].value());
        let y_lower = mat_vec(&g, &point.y);
        let spray: Vec<f64> = spray_jet.iter().map(Jet::value).collect();

        let partial = |j: &Jet, fiber: &[usize]| -> Result<f64, JetError> {
            let vars: Vec<usize> = fiber.iter().map(|&a| yv(a)).collect();
            j.partial_vars(&vars)
        };

        let mut cartan = Tensor::zeros(n, 3);
        let mut cartan_raised = Tensor::zeros(n, 3);
        let mut cartan_raised_d1 = Tensor::zeros(n, 4);
        let mut cartan_raised_d2 = Tensor::zeros(n, 5);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    cartan.set(&[a, b, c], 0.5 * partial(&g_jet[a][b], &[c])?);
                    cartan_raised.set(&[a, b, c], -0.5 * partial(&g_inv_jet[a][b], &[c])?);
                    for d in 0..n {
                        cartan_raised_d1.set(&[a, b, c, d], -0.5 * partial(&g_inv_jet[a][b], &[c, d])?);
                        for f in 0..n {
                            cartan_raised_d2
                                .set(&[a, b, c, d, f], -0.5 * partial(&g_inv_jet[a][b], &[c, d, f])?);
                        }
                    }
                }
            }
        }

        // C_{abc} as jets, then C^a_{bc} = g^{ap} C_{pbc} and I^a = g^{ap} C_{pjk} g^{jk}
        let mut c_jet: Vec<Vec<Vec<Jet>>> = Vec::with_capacity(n);
        for a in 0..n {
            let mut plane = Vec::with_capacity(n);
            for b in 0..n {
                let row: Vec<Jet> = (0..n)
                    .map(|c| g_jet[a][b].derivative(yv(c)).map(|j| j.scale(0.5)))
                    .collect::<Result<_, _>>()?;
                plane.push(row);
            }
            c_jet.push(plane);
        }
        let mut cartan_mixed = Tensor::zeros(n, 3);
        let mut cartan_mixed_d1 = Tensor::zeros(n, 4);
        for a in 0..n {
            for b in 0..n {
                for c in b..n {
                    let mut acc = space.constant(0.0);
                    for p in 0..n {
                        acc = acc.add(&g_inv_jet[a][p].mul(&c_jet[p][b][c]));
                    }
                    for (bb, cc) in [(b, c), (c, b)] {
                        cartan_mixed.set(&[a, bb, cc], acc.value());
                        for d in 0..n {
                            cartan_mixed_d1.set(&[a, bb, cc, d], partial(&acc, &[d])?);
                        }
                    }
                }
            }
        }
        let mean_lower_jet: Vec<Jet> = (0..n)
            .map(|p| {
                let mut acc = space.constant(0.0);
                for j in 0..n {
                    for k in 0..n {
                        acc = acc.add(&c_jet[p][j][k].mul(&g_inv_jet[j][k]));
                    }
                }
                acc
            })
            .collect();
        let mut mean_cartan_raised = vec![0.0; n];
        let mut mean_cartan_raised_d1 = Tensor::zeros(n, 2);
        for a in 0..n {
            let mut acc = space.constant(0.0);
            for p in 0..n {
                acc = acc.add(&g_inv_jet[a][p].mul(&mean_lower_jet[p]));
            }
            mean_cartan_raised[a] = acc.value();
            for b in 0..n {
                mean_cartan_raised_d1.set(&[a, b], partial(&acc, &[b])?);
            }
        }

        let mean_cartan = cartan.trace_last_two(&g_inv);

        let mut berwald = Tensor::zeros(n, 4);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        berwald.set(&[a, b, c, d], partial(&spray_jet[a], &[b, c, d])?);
                    }
                }
            }
        }
        let landsberg = berwald.contract_first(&y_lower).scaled(-0.5);
        let mean_landsberg = landsberg.trace_last_two(&g_inv);

        Ok(CurvatureBundle {
            point: point.clone(),
            f_squared,
            g,
            g_inv,
            y_lower,
            spray,
            cartan,
            cartan_raised,
            mean_cartan,
            berwald,
            landsberg,
            mean_landsberg,
            min_pivot,
            vertical: VerticalDerivatives {
                cartan_raised_d1,
                cartan_raised_d2,
                cartan_mixed,
                cartan_mixed_d1,
                mean_cartan_raised,
                mean_cartan_raised_d1,
            },
        })
    }
}

/// `max_{a,p,i,j,k} |y_l C^{lp}_{i;j;k} + 2 C^p_{ij;k}|`, the contraction
/// identity used to pass from Berwald to Landsberg blocks.
pub fn contraction_identity_defect(bundle: &CurvatureBundle) -> f64 {
    let n = bundle.dim();
    let v = &bundle.vertical;
    let mut worst: f64 = 0.0;
    for p in 0..n {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let lhs: f64 = (0..n)
                        .map(|l| bundle.y_lower[l] * v.cartan_raised_d2.get(&[l, p, i, j, k]))
                        .sum();
                    let rhs = -2.0 * v.cartan_mixed_d1.get(&[p, i, j, k]);
                    worst = worst.max((lhs - rhs).abs());
                }
            }
        }
    }
    worst
}
