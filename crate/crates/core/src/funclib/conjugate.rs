//! Fenchel conjugates: exact routes where the tree admits them, discrete
//! Legendre transform on a bounded box otherwise.
//!
//! The grid transform is a lower bound of the true conjugate; it is exact
//! for max-affine and quadratic specs once the box is large enough to
//! contain the maximizer. Slopes whose supremum is attained on the box
//! boundary are flagged and treated as `+∞` candidates rather than reported
//! as misleading finite values.

use super::{as_quadratic, convert, evaluate, ConvexSpec, FunclibError};
use crate::extreal::ExtReal;
use crate::geom::{dot, grid_on_box, norm, BoxRegion, Point};
use crate::linalg;

#[derive(Clone, Debug)]
pub struct ConjugateGridConfig {
    pub region: BoxRegion,
    pub per_axis: usize,
}

impl ConjugateGridConfig {
    pub fn default_for_dim(dim: usize) -> ConjugateGridConfig {
        let per_axis = match dim {
            1 => 4097,
            2 => 193,
            3 => 49,
            _ => 17,
        };
        ConjugateGridConfig {
            region: BoxRegion::new(vec![-8.0; dim], vec![8.0; dim]),
            per_axis,
        }
    }
}

/// One discrete Legendre value: the supremum over the sampled box, plus
/// whether it was attained on the boundary (growth suspected → `+∞`).
#[derive(Clone, Debug)]
pub struct ConjugateValue {
    pub value: ExtReal,
    pub box_sup: f64,
    pub boundary_attained: bool,
}

/// Discrete Legendre transform `f*(s) = sup_x <s, x> - f(x)` over the grid
/// of `cfg.region`.
pub fn conjugate_grid(
    spec: &ConvexSpec,
    slopes: &[Point],
    cfg: &ConjugateGridConfig,
) -> Result<Vec<ConjugateValue>, FunclibError> {
    if slopes.is_empty() {
        return Err(FunclibError::EmptyGrid);
    }
    for s in slopes {
        if s.dim() != spec.dim() {
            return Err(FunclibError::DimensionMismatch {
                expected: spec.dim(),
                got: s.dim(),
            });
        }
    }
    let grid = grid_on_box(&cfg.region, cfg.per_axis);
    let values: Vec<ExtReal> = crate::par::map_collect(&grid, |p| {
        super::eval_node(spec.node(), p.as_slice())
    });
    if values.iter().all(|v| !v.is_finite()) {
        return Err(FunclibError::DomainNotSampled);
    }
    let half_step: Vec<f64> = (0..spec.dim())
        .map(|i| {
            0.5 * (cfg.region.hi[i] - cfg.region.lo[i]) / (cfg.per_axis.max(2) - 1) as f64
        })
        .collect();
    let out = slopes
        .iter()
        .map(|s| {
            let mut sup = f64::NEG_INFINITY;
            for (p, v) in grid.iter().zip(&values) {
                if let ExtReal::Finite(fv) = v {
                    let cand = dot(s.as_slice(), p.as_slice()) - fv;
                    if cand > sup {
                        sup = cand;
                    }
                }
            }
            // boundary-attained only when no interior point reaches the sup
            let tie = 1e-12 * (1.0 + sup.abs());
            let interior_hit = grid.iter().zip(&values).any(|(p, v)| {
                matches!(v, ExtReal::Finite(fv)
                    if dot(s.as_slice(), p.as_slice()) - fv >= sup - tie)
                    && p.as_slice().iter().enumerate().all(|(i, x)| {
                        (x - cfg.region.lo[i]).abs() > half_step[i]
                            && (x - cfg.region.hi[i]).abs() > half_step[i]
                    })
            });
            let boundary = !interior_hit;
            ConjugateValue {
                value: if boundary {
                    ExtReal::PosInf
                } else {
                    ExtReal::finite(sup)
                },
                box_sup: sup,
                boundary_attained: boundary,
            }
        })
        .collect();
    Ok(out)
}

/// Exact conjugate value of a pure quadratic `½ xᵀQx + bᵀx + c` at slope
/// `s`; `+∞` when `s - b` leaves the range of `Q`.
pub fn quadratic_conjugate_value(
    q: &[Vec<f64>],
    b: &[f64],
    c: f64,
    s: &[f64],
) -> Result<ExtReal, FunclibError> {
    let (eigs, vecs) = linalg::sym_eigen(q)?;
    let dim = b.len();
    let resid: Vec<f64> = s.iter().zip(b).map(|(si, bi)| si - bi).collect();
    let scale = eigs.iter().fold(1.0f64, |m, e| m.max(e.abs()));
    let mut total = -c;
    for k in 0..dim {
        let coord: f64 = (0..dim).map(|i| vecs[i][k] * resid[i]).sum();
        if eigs[k] > 1e-10 * scale {
            total += 0.5 * coord * coord / eigs[k];
        } else if coord.abs() > 1e-9 * (1.0 + norm(&resid)) {
            return Ok(ExtReal::PosInf);
        }
    }
    Ok(ExtReal::finite(total))
}

/// Checks the Fenchel–Young equality `f(x) + f*(x*) = <x*, x>` within
/// `tol`, using the sharpest conjugate route available (exact univariate,
/// exact quadratic, else the default grid).
pub fn fenchel_subgradient_check(
    spec: &ConvexSpec,
    x: &Point,
    xstar: &Point,
    tol: f64,
) -> Result<bool, FunclibError> {
    let cfg = ConjugateGridConfig::default_for_dim(spec.dim());
    fenchel_subgradient_check_with(spec, x, xstar, tol, &cfg)
}

pub fn fenchel_subgradient_check_with(
    spec: &ConvexSpec,
    x: &Point,
    xstar: &Point,
    tol: f64,
    cfg: &ConjugateGridConfig,
) -> Result<bool, FunclibError> {
    let fx = match evaluate(spec, x)? {
        ExtReal::Finite(v) => v,
        ExtReal::PosInf => return Err(FunclibError::OutsideDomain),
    };
    let fstar = conjugate_value(spec, xstar, cfg)?;
    match fstar {
        ExtReal::PosInf => Ok(false),
        ExtReal::Finite(fs) => {
            let gap = fx + fs - dot(xstar.as_slice(), x.as_slice());
            Ok(gap.abs() <= tol)
        }
    }
}

fn conjugate_value(
    spec: &ConvexSpec,
    s: &Point,
    cfg: &ConjugateGridConfig,
) -> Result<ExtReal, FunclibError> {
    if spec.dim() == 1 {
        let g = convert::to_pwq1d(spec)?;
        return Ok(g.conjugate()?.value(s[0]));
    }
    if let Some((q, b, c)) = as_quadratic(spec.node(), spec.dim()) {
        return quadratic_conjugate_value(&q, &b, c, s.as_slice());
    }
    let vals = conjugate_grid(spec, std::slice::from_ref(s), cfg)?;
    Ok(vals[0].value)
}
