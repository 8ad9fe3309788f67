//! Lowering builder trees to the exact univariate calculus.
//!
//! In `d = 1` every primitive and combinator is representable exactly as a
//! [`PwQuad`]; along an arbitrary line `t ↦ o + t d` in higher dimension the
//! same holds except for norms with an off-line center. These conversions
//! back the generic prox for restricted and summed trees and the exact
//! window minima used by the epigraphical estimators.

use super::{ConvexSpec, FunclibError, Node};
use crate::geom::{dist, dot, norm};
use crate::linalg;
use crate::pwq1d::{BoundPolicy, Piece, PwQuad};

/// Exact `PwQuad` form of a one-dimensional spec.
pub fn to_pwq1d(spec: &ConvexSpec) -> Result<PwQuad, FunclibError> {
    if spec.dim() != 1 {
        return Err(FunclibError::DimensionMismatch {
            expected: 1,
            got: spec.dim(),
        });
    }
    node_to_pwq_line(spec.node(), &[0.0], &[1.0])
}

/// Exact `PwQuad` form of `t ↦ f(o + t d)`, when it exists.
pub fn to_pwq_along_line(
    spec: &ConvexSpec,
    origin: &[f64],
    dir: &[f64],
) -> Result<PwQuad, FunclibError> {
    if origin.len() != spec.dim() || dir.len() != spec.dim() {
        return Err(FunclibError::DimensionMismatch {
            expected: spec.dim(),
            got: origin.len().max(dir.len()),
        });
    }
    node_to_pwq_line(spec.node(), origin, dir)
}

pub(crate) fn node_to_pwq_line(
    node: &Node,
    o: &[f64],
    d: &[f64],
) -> Result<PwQuad, FunclibError> {
    match node {
        Node::Quadratic { q, b, c } => {
            let qd = linalg::mat_vec(q, d);
            let qo = linalg::mat_vec(q, o);
            let a2 = 0.5 * dot(d, &qd);
            let a1 = dot(d, &qo) + dot(b, d);
            let a0 = 0.5 * dot(o, &qo) + dot(b, o) + c;
            Ok(PwQuad::new(
                f64::NEG_INFINITY,
                f64::INFINITY,
                vec![],
                vec![Piece { a: a2, b: a1, c: a0 }],
                BoundPolicy::AllowUnbounded,
            )?)
        }
        Node::ScaledNorm { alpha } => {
            // alpha * ||o + t d|| is piecewise affine in t only when o is on
            // the line through the origin spanned by d
            let dd = dot(d, d);
            if dd == 0.0 {
                return Ok(PwQuad::constant(alpha * norm(o)));
            }
            let kappa = dot(o, d) / dd;
            let residual: f64 = o
                .iter()
                .zip(d)
                .map(|(oi, di)| {
                    let r = oi - kappa * di;
                    r * r
                })
                .sum::<f64>()
                .sqrt();
            if residual > 1e-12 * (1.0 + norm(o)) {
                return Err(FunclibError::NotLineRepresentable);
            }
            Ok(PwQuad::scaled_abs(alpha * dd.sqrt()).translate(-kappa))
        }
        Node::MaxAffine { pieces } => {
            let lines: Vec<(f64, f64)> = pieces
                .iter()
                .map(|p| (dot(&p.gradient, d), dot(&p.gradient, o) + p.offset))
                .collect();
            Ok(PwQuad::max_affine(&lines)?)
        }
        Node::IndicatorBox { lo, hi } => {
            let (t_lo, t_hi) = line_box_window(o, d, lo, hi)?;
            Ok(PwQuad::new(
                t_lo,
                t_hi,
                vec![],
                vec![Piece { a: 0.0, b: 0.0, c: 0.0 }],
                BoundPolicy::AllowUnbounded,
            )?)
        }
        Node::IndicatorBall { center, radius } => {
            let oc: Vec<f64> = o.iter().zip(center).map(|(a, b)| a - b).collect();
            let aa = dot(d, d);
            if aa == 0.0 {
                if dist(o, center) <= radius + 1e-12 * (1.0 + radius) {
                    return Ok(PwQuad::constant(0.0));
                }
                return Err(FunclibError::EmptyDomain);
            }
            let bb = 2.0 * dot(&oc, d);
            let cc = dot(&oc, &oc) - radius * radius;
            let disc = bb * bb - 4.0 * aa * cc;
            if disc < 0.0 {
                return Err(FunclibError::EmptyDomain);
            }
            let sq = disc.sqrt();
            let t1 = (-bb - sq) / (2.0 * aa);
            let t2 = (-bb + sq) / (2.0 * aa);
            Ok(PwQuad::new(
                t1,
                t2,
                vec![],
                vec![Piece { a: 0.0, b: 0.0, c: 0.0 }],
                BoundPolicy::AllowUnbounded,
            )?)
        }
        Node::Constant { value } => Ok(PwQuad::constant(*value)),
        Node::Pwq1d(g) => Ok(g.compose_affine_arg(o[0], d[0])?),
        Node::Sum(parts) => {
            let mut acc: Option<PwQuad> = None;
            for p in parts {
                let g = node_to_pwq_line(p, o, d)?;
                acc = Some(match acc {
                    None => g,
                    Some(prev) => prev.add(&g)?,
                });
            }
            Ok(acc.expect("validated sums are nonempty"))
        }
        Node::Scale { alpha, inner } => Ok(node_to_pwq_line(inner, o, d)?.scale(*alpha)),
        Node::Tilt { v, inner } => {
            Ok(node_to_pwq_line(inner, o, d)?.tilt(dot(v, d)).offset(dot(v, o)))
        }
        Node::Translate { z, inner } => {
            let shifted: Vec<f64> = o.iter().zip(z).map(|(a, b)| a - b).collect();
            node_to_pwq_line(inner, &shifted, d)
        }
        Node::RestrictSegment { a, b, inner } => {
            let g = node_to_pwq_line(inner, o, d)?;
            let u: Vec<f64> = b.iter().zip(a.iter()).map(|(p, q)| p - q).collect();
            let (t_lo, t_hi) = line_segment_window(o, d, a, &u)?;
            Ok(g.restrict(t_lo, t_hi)?)
        }
    }
}

/// Parameter window of `{t : o + t d ∈ [lo, hi]}`.
fn line_box_window(
    o: &[f64],
    d: &[f64],
    lo: &[f64],
    hi: &[f64],
) -> Result<(f64, f64), FunclibError> {
    let mut t_lo = f64::NEG_INFINITY;
    let mut t_hi = f64::INFINITY;
    for i in 0..o.len() {
        if d[i] == 0.0 {
            if o[i] < lo[i] || o[i] > hi[i] {
                return Err(FunclibError::EmptyDomain);
            }
            continue;
        }
        let (mut a, mut b) = ((lo[i] - o[i]) / d[i], (hi[i] - o[i]) / d[i]);
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        t_lo = t_lo.max(a);
        t_hi = t_hi.min(b);
    }
    if t_lo > t_hi {
        return Err(FunclibError::EmptyDomain);
    }
    Ok((t_lo, t_hi))
}

/// Parameter window of `{t : o + t d ∈ segment(a, a + u)}`; requires the
/// line to be parallel to the segment.
fn line_segment_window(
    o: &[f64],
    d: &[f64],
    a: &[f64],
    u: &[f64],
) -> Result<(f64, f64), FunclibError> {
    let uu = dot(u, u);
    let scale = 1.0 + norm(o) + norm(a);
    if uu == 0.0 {
        // degenerate segment: the line must pass through `a`
        let dd = dot(d, d);
        if dd == 0.0 {
            if dist(o, a) <= 1e-9 * scale {
                return Ok((f64::NEG_INFINITY, f64::INFINITY));
            }
            return Err(FunclibError::EmptyDomain);
        }
        let t = dot(
            &a.iter().zip(o).map(|(p, q)| p - q).collect::<Vec<_>>(),
            d,
        ) / dd;
        let on_line = (0..o.len()).all(|i| (o[i] + t * d[i] - a[i]).abs() <= 1e-9 * scale);
        if on_line {
            return Ok((t, t));
        }
        return Err(FunclibError::EmptyDomain);
    }
    // need d parallel to u and o - a on the segment line
    let dd = dot(d, d);
    if dd == 0.0 {
        // constant curve: o must lie on the segment
        let oa: Vec<f64> = o.iter().zip(a).map(|(p, q)| p - q).collect();
        let s = dot(&oa, u) / uu;
        let on = (0..o.len()).all(|i| (oa[i] - s * u[i]).abs() <= 1e-9 * scale);
        if on && (-1e-12..=1.0 + 1e-12).contains(&s) {
            return Ok((f64::NEG_INFINITY, f64::INFINITY));
        }
        return Err(FunclibError::EmptyDomain);
    }
    let k = dot(d, u) / uu;
    let parallel = (0..o.len()).all(|i| (d[i] - k * u[i]).abs() <= 1e-12 * (1.0 + norm(d)));
    if !parallel || k == 0.0 {
        return Err(FunclibError::NotLineRepresentable);
    }
    let oa: Vec<f64> = o.iter().zip(a).map(|(p, q)| p - q).collect();
    let s0 = dot(&oa, u) / uu;
    let off_line = (0..o.len()).any(|i| (oa[i] - s0 * u[i]).abs() > 1e-9 * scale);
    if off_line {
        return Err(FunclibError::EmptyDomain);
    }
    // s(t) = s0 + k t must lie in [0, 1]
    let (mut t_lo, mut t_hi) = ((0.0 - s0) / k, (1.0 - s0) / k);
    if t_lo > t_hi {
        std::mem::swap(&mut t_lo, &mut t_hi);
    }
    Ok((t_lo, t_hi))
}
