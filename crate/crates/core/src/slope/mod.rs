//! Metric slopes `s_f(x) = dist(0, ∂f(x))` and minimal-norm subgradients.
//!
//! The exact route covers upper envelopes of affine pieces (minimal-norm
//! point in the hull of active gradients), quadratics (gradient norm),
//! indicators (zero on the domain), and anything one-dimensional through
//! the exact piecewise calculus. Outside the exact classes the slope is
//! estimated by a proximal ladder: `||x - prox_{λf}(x)|| / λ` increases to
//! the slope as `λ` decreases.

pub mod wolfe;

use crate::extreal::ExtReal;
use crate::funclib::{self, prox, ConvexSpec, FunclibError, Node};
use crate::geom::{dot, norm, Point};
use crate::linalg;
use crate::pwq1d::PwQuad;
use thiserror::Error;

/// Relative tolerance deciding which affine pieces count as active at a
/// kink.
pub const ACTIVE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SlopeError {
    #[error("spec is outside the exact slope classes")]
    NotExactClass,
    #[error("empty subdifferential at the query point")]
    EmptySubdifferential,
    #[error("prox ladder must be strictly decreasing and positive")]
    BadLadder,
    #[error("prox-ladder estimates decreased by more than the tolerance (broken prox?)")]
    NonMonotoneTrace,
    #[error(transparent)]
    Funclib(#[from] FunclibError),
}

/// How a slope value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlopeMethod {
    ExactPolyhedral,
    ExactQuadratic,
    ExactIndicator,
    Exact1d,
    ProxLadder,
}

#[derive(Clone, Debug)]
pub struct SlopeValue {
    pub value: ExtReal,
    pub method: SlopeMethod,
    /// `(λ, estimate)` rows in decreasing-λ order when the prox ladder ran.
    pub trace: Vec<(f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct MinNormSubgradient {
    pub vector: Point,
    pub norm: f64,
}

/// Per-coordinate factor of a box normal cone.
#[derive(Clone, Copy, Debug)]
enum ConeMode {
    Zero,
    Below,
    Above,
    Free,
}

/// Internal description of `∂f(x)` for the exact classes, faithful enough
/// to answer distance and projection queries against the whole set.
enum SubdiffDesc {
    Empty,
    Point(Vec<f64>),
    Polytope(Vec<Vec<f64>>),
    /// 1-d interval, endpoints may be infinite.
    Interval { lo: f64, hi: f64 },
    Ball { center: Vec<f64>, radius: f64 },
    /// `shift + Π_i C_i` with per-coordinate half-line/zero/free factors.
    Cone { shift: Vec<f64>, modes: Vec<ConeMode> },
    /// `origin + t·dir`, `t >= 0`.
    Ray { origin: Vec<f64>, dir: Vec<f64> },
}

impl SubdiffDesc {
    fn project(&self, y: &[f64]) -> Option<Vec<f64>> {
        match self {
            SubdiffDesc::Empty => None,
            SubdiffDesc::Point(p) => Some(p.clone()),
            SubdiffDesc::Polytope(vs) => {
                let shifted: Vec<Vec<f64>> = vs
                    .iter()
                    .map(|v| v.iter().zip(y).map(|(a, b)| a - b).collect())
                    .collect();
                let mn = wolfe::min_norm_point(&shifted);
                Some(mn.iter().zip(y).map(|(a, b)| a + b).collect())
            }
            SubdiffDesc::Interval { lo, hi } => Some(vec![y[0].clamp(*lo, *hi)]),
            SubdiffDesc::Ball { center, radius } => {
                let d = crate::geom::dist(y, center);
                if d <= *radius {
                    Some(y.to_vec())
                } else {
                    Some(
                        y.iter()
                            .zip(center)
                            .map(|(v, c)| c + (v - c) * radius / d)
                            .collect(),
                    )
                }
            }
            SubdiffDesc::Cone { shift, modes } => Some(
                y.iter()
                    .zip(shift.iter().zip(modes))
                    .map(|(v, (s, m))| {
                        let r = v - s;
                        s + match m {
                            ConeMode::Zero => 0.0,
                            ConeMode::Below => r.min(0.0),
                            ConeMode::Above => r.max(0.0),
                            ConeMode::Free => r,
                        }
                    })
                    .collect(),
            ),
            SubdiffDesc::Ray { origin, dir } => {
                let dd = dot(dir, dir);
                if dd == 0.0 {
                    return Some(origin.clone());
                }
                let rel: Vec<f64> = y.iter().zip(origin).map(|(a, b)| a - b).collect();
                let t = (dot(&rel, dir) / dd).max(0.0);
                Some(origin.iter().zip(dir).map(|(o, d)| o + t * d).collect())
            }
        }
    }

    fn dist_to(&self, y: &[f64]) -> f64 {
        match self.project(y) {
            None => f64::INFINITY,
            Some(p) => crate::geom::dist(&p, y),
        }
    }

    fn scaled(self, alpha: f64) -> SubdiffDesc {
        let sv = |v: Vec<f64>| v.into_iter().map(|c| alpha * c).collect::<Vec<_>>();
        match self {
            SubdiffDesc::Empty => SubdiffDesc::Empty,
            SubdiffDesc::Point(p) => SubdiffDesc::Point(sv(p)),
            SubdiffDesc::Polytope(vs) => {
                SubdiffDesc::Polytope(vs.into_iter().map(sv).collect())
            }
            SubdiffDesc::Interval { lo, hi } => SubdiffDesc::Interval {
                lo: alpha * lo,
                hi: alpha * hi,
            },
            SubdiffDesc::Ball { center, radius } => SubdiffDesc::Ball {
                center: sv(center),
                radius: alpha * radius,
            },
            SubdiffDesc::Cone { shift, modes } => SubdiffDesc::Cone {
                shift: sv(shift),
                modes,
            },
            SubdiffDesc::Ray { origin, dir } => SubdiffDesc::Ray {
                origin: sv(origin),
                dir,
            },
        }
    }

    fn shifted(self, v: &[f64]) -> SubdiffDesc {
        let add = |p: Vec<f64>| {
            p.into_iter()
                .zip(v)
                .map(|(a, b)| a + b)
                .collect::<Vec<_>>()
        };
        match self {
            SubdiffDesc::Empty => SubdiffDesc::Empty,
            SubdiffDesc::Point(p) => SubdiffDesc::Point(add(p)),
            SubdiffDesc::Polytope(vs) => {
                SubdiffDesc::Polytope(vs.into_iter().map(add).collect())
            }
            SubdiffDesc::Interval { lo, hi } => SubdiffDesc::Interval {
                lo: lo + v[0],
                hi: hi + v[0],
            },
            SubdiffDesc::Ball { center, radius } => SubdiffDesc::Ball {
                center: add(center),
                radius,
            },
            SubdiffDesc::Cone { shift, modes } => SubdiffDesc::Cone {
                shift: add(shift),
                modes,
            },
            SubdiffDesc::Ray { origin, dir } => SubdiffDesc::Ray {
                origin: add(origin),
                dir,
            },
        }
    }

    fn is_point(&self) -> Option<&[f64]> {
        match self {
            SubdiffDesc::Point(p) => Some(p),
            _ => None,
        }
    }
}

fn descriptor(node: &Node, dim: usize, x: &[f64]) -> Result<SubdiffDesc, SlopeError> {
    if let Some((q, b, _)) = funclib::as_quadratic(node, dim) {
        let mut g = linalg::mat_vec(&q, x);
        for (gi, bi) in g.iter_mut().zip(&b) {
            *gi += bi;
        }
        return Ok(SubdiffDesc::Point(g));
    }
    match node {
        Node::MaxAffine { pieces } => {
            let vals: Vec<f64> = pieces.iter().map(|p| dot(&p.gradient, x) + p.offset).collect();
            let top = vals.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v));
            let active: Vec<Vec<f64>> = pieces
                .iter()
                .zip(&vals)
                .filter(|(_, v)| **v >= top - ACTIVE_TOL * (1.0 + top.abs()))
                .map(|(p, _)| p.gradient.clone())
                .collect();
            Ok(SubdiffDesc::Polytope(active))
        }
        Node::ScaledNorm { alpha } => {
            let n = norm(x);
            if n == 0.0 {
                Ok(SubdiffDesc::Ball {
                    center: vec![0.0; dim],
                    radius: *alpha,
                })
            } else {
                Ok(SubdiffDesc::Point(x.iter().map(|v| alpha * v / n).collect()))
            }
        }
        Node::IndicatorBox { lo, hi } => {
            let mut modes = Vec::with_capacity(dim);
            for i in 0..dim {
                let tol = 1e-12 * (1.0 + lo[i].abs().max(hi[i].abs()));
                if x[i] < lo[i] - tol || x[i] > hi[i] + tol {
                    return Ok(SubdiffDesc::Empty);
                }
                let at_lo = (x[i] - lo[i]).abs() <= tol;
                let at_hi = (x[i] - hi[i]).abs() <= tol;
                modes.push(match (at_lo, at_hi) {
                    (true, true) => ConeMode::Free,
                    (true, false) => ConeMode::Below,
                    (false, true) => ConeMode::Above,
                    (false, false) => ConeMode::Zero,
                });
            }
            Ok(SubdiffDesc::Cone {
                shift: vec![0.0; dim],
                modes,
            })
        }
        Node::IndicatorBall { center, radius } => {
            let d = crate::geom::dist(x, center);
            let tol = 1e-9 * (1.0 + radius);
            if d > radius + tol {
                Ok(SubdiffDesc::Empty)
            } else if d >= radius - tol && *radius > 0.0 {
                Ok(SubdiffDesc::Ray {
                    origin: vec![0.0; dim],
                    dir: x.iter().zip(center).map(|(a, b)| a - b).collect(),
                })
            } else if *radius == 0.0 {
                // point domain: the subdifferential is all of R^d; report the
                // free cone so distances are zero
                Ok(SubdiffDesc::Cone {
                    shift: vec![0.0; dim],
                    modes: vec![ConeMode::Free; dim],
                })
            } else {
                Ok(SubdiffDesc::Point(vec![0.0; dim]))
            }
        }
        Node::Pwq1d(g) => Ok(interval_desc(g, x[0])),
        Node::Scale { alpha, inner } => Ok(descriptor(inner, dim, x)?.scaled(*alpha)),
        Node::Tilt { v, inner } => Ok(descriptor(inner, dim, x)?.shifted(v)),
        Node::Translate { z, inner } => {
            let shifted: Vec<f64> = x.iter().zip(z).map(|(a, b)| a - b).collect();
            descriptor(inner, dim, &shifted)
        }
        Node::Sum(parts) => {
            // sum rule: at most one non-singleton part keeps the set exact
            let mut offset = vec![0.0; dim];
            let mut carrier: Option<SubdiffDesc> = None;
            for p in parts {
                let d = descriptor(p, dim, x)?;
                if let SubdiffDesc::Empty = d {
                    return Ok(SubdiffDesc::Empty);
                }
                if let Some(pt) = d.is_point() {
                    for (o, v) in offset.iter_mut().zip(pt) {
                        *o += v;
                    }
                } else if carrier.is_none() {
                    carrier = Some(d);
                } else if dim == 1 {
                    return pwq_fallback(node, dim, x);
                } else {
                    return Err(SlopeError::NotExactClass);
                }
            }
            Ok(match carrier {
                None => SubdiffDesc::Point(offset),
                Some(c) => c.shifted(&offset),
            })
        }
        _ => pwq_fallback(node, dim, x),
    }
}

fn pwq_fallback(node: &Node, dim: usize, x: &[f64]) -> Result<SubdiffDesc, SlopeError> {
    if dim == 1 {
        let spec = ConvexSpec::new(dim, node.clone()).map_err(SlopeError::Funclib)?;
        let g = funclib::to_pwq1d(&spec).map_err(SlopeError::Funclib)?;
        Ok(interval_desc(&g, x[0]))
    } else {
        Err(SlopeError::NotExactClass)
    }
}

fn interval_desc(g: &PwQuad, x: f64) -> SubdiffDesc {
    match g.subdiff(x) {
        None => SubdiffDesc::Empty,
        Some((lo, hi)) => SubdiffDesc::Interval { lo, hi },
    }
}

fn desc_method(node: &Node, dim: usize) -> SlopeMethod {
    match node {
        Node::MaxAffine { .. } => SlopeMethod::ExactPolyhedral,
        Node::IndicatorBox { .. } | Node::IndicatorBall { .. } => SlopeMethod::ExactIndicator,
        Node::Quadratic { .. } | Node::Constant { .. } => SlopeMethod::ExactQuadratic,
        Node::Scale { inner, .. } | Node::Tilt { inner, .. } | Node::Translate { inner, .. } => {
            desc_method(inner, dim)
        }
        Node::Pwq1d(_) => SlopeMethod::Exact1d,
        Node::Sum(_) if funclib::as_quadratic(node, dim).is_some() => SlopeMethod::ExactQuadratic,
        _ => SlopeMethod::Exact1d,
    }
}

/// Exact slope for the exact classes; errors with [`SlopeError::NotExactClass`]
/// otherwise (use [`slope_prox_estimate`] then).
pub fn slope_exact(spec: &ConvexSpec, x: &Point) -> Result<SlopeValue, SlopeError> {
    if x.dim() != spec.dim() {
        return Err(FunclibError::DimensionMismatch {
            expected: spec.dim(),
            got: x.dim(),
        }
        .into());
    }
    let desc = descriptor(spec.node(), spec.dim(), x.as_slice())?;
    let zero = vec![0.0; spec.dim()];
    let d = desc.dist_to(&zero);
    Ok(SlopeValue {
        value: if d.is_finite() {
            ExtReal::finite(d)
        } else {
            ExtReal::PosInf
        },
        method: desc_method(spec.node(), spec.dim()),
        trace: vec![],
    })
}

/// Projection of the origin onto `∂f(x)`; its norm equals the exact slope.
pub fn min_norm_subgradient(spec: &ConvexSpec, x: &Point) -> Result<MinNormSubgradient, SlopeError> {
    let desc = descriptor(spec.node(), spec.dim(), x.as_slice())?;
    let zero = vec![0.0; spec.dim()];
    let vector = desc
        .project(&zero)
        .ok_or(SlopeError::EmptySubdifferential)?;
    let n = norm(&vector);
    Ok(MinNormSubgradient {
        vector: Point::new(vector),
        norm: n,
    })
}

/// Configuration of the blow-up verdict for the prox ladder.
#[derive(Clone, Copy, Debug)]
pub struct LadderPolicy {
    /// Estimates above this at the smallest λ are infinite-slope suspects.
    pub blow_up: f64,
    /// Minimal per-rung growth factor that confirms the blow-up.
    pub growth: f64,
    /// Slack for the monotonicity check of the trace.
    pub monotone_tol: f64,
}

impl Default for LadderPolicy {
    fn default() -> Self {
        LadderPolicy {
            blow_up: 1e6,
            growth: 1.10,
            monotone_tol: 1e-9,
        }
    }
}

/// Slope estimate by the resolvent ladder `||x - prox_{λf}(x)|| / λ` over a
/// strictly decreasing λ ladder. Estimates are nondecreasing as λ decreases;
/// a decreasing trace signals a broken prox and is reported as an error.
pub fn slope_prox_estimate(
    spec: &ConvexSpec,
    x: &Point,
    ladder: &[f64],
    policy: &LadderPolicy,
) -> Result<SlopeValue, SlopeError> {
    if ladder.is_empty()
        || ladder.iter().any(|l| !(*l > 0.0))
        || ladder.windows(2).any(|w| w[0] <= w[1])
    {
        return Err(SlopeError::BadLadder);
    }
    let mut trace: Vec<(f64, f64)> = Vec::with_capacity(ladder.len());
    for &lam in ladder {
        let p = prox(spec, lam, x)?;
        let est = x.dist(&p) / lam;
        if let Some((_, prev)) = trace.last() {
            if est < prev - policy.monotone_tol * (1.0 + prev.abs()) {
                return Err(SlopeError::NonMonotoneTrace);
            }
        }
        trace.push((lam, est));
    }
    let last = trace.last().unwrap().1;
    let blown = last > policy.blow_up && {
        let k = trace.len();
        k >= 3 && {
            let a = trace[k - 3].1;
            let b = trace[k - 2].1;
            let c = trace[k - 1].1;
            b >= policy.growth * a && c >= policy.growth * b
        }
    };
    Ok(SlopeValue {
        value: if blown {
            ExtReal::PosInf
        } else {
            ExtReal::finite(last)
        },
        method: SlopeMethod::ProxLadder,
        trace,
    })
}

/// Dyadic ladder `2^0, 2^-1, ..., 2^-k`.
pub fn dyadic_ladder(k: u32) -> Vec<f64> {
    (0..=k).map(|j| 2f64.powi(-(j as i32))).collect()
}

/// `e_λf(x)`, re-exported here next to its prox companions.
pub fn moreau_envelope(spec: &ConvexSpec, lambda: f64, x: &Point) -> Result<f64, SlopeError> {
    Ok(funclib::moreau_envelope(spec, lambda, x)?)
}

/// Residual feasibility of a claimed subgradient: distance from `xstar` to
/// `∂f(x)` for exact-class specs.
pub fn subgradient_residual(
    spec: &ConvexSpec,
    x: &Point,
    xstar: &Point,
) -> Result<f64, SlopeError> {
    let desc = descriptor(spec.node(), spec.dim(), x.as_slice())?;
    Ok(desc.dist_to(xstar.as_slice()))
}

/// Zero-slope points are exactly the minimizers; exposed for diagnostics.
pub fn is_argmin(spec: &ConvexSpec, x: &Point, tol: f64) -> Result<bool, SlopeError> {
    let s = slope_exact(spec, x)?;
    Ok(matches!(s.value, ExtReal::Finite(v) if v <= tol))
}

/// CSV rows `lambda,estimate` of a ladder trace.
pub fn trace_csv(trace: &[(f64, f64)]) -> String {
    let mut out = String::from("lambda,estimate\n");
    for (lam, est) in trace {
        out.push_str(&format!("{lam},{est}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funclib::AffinePiece;

    fn pt(xs: &[f64]) -> Point {
        Point::new(xs.to_vec())
    }

    fn abs1() -> ConvexSpec {
        ConvexSpec::scaled_norm(1, 1.0).unwrap()
    }

    #[test]
    fn exact_slope_examples() {
        let half_sq = ConvexSpec::half_sq_norm(2);
        let s = slope_exact(&half_sq, &pt(&[3.0, 4.0])).unwrap();
        assert_eq!(s.value, ExtReal::finite(5.0));
        assert_eq!(s.method, SlopeMethod::ExactQuadratic);

        let abs = ConvexSpec::max_affine(vec![
            AffinePiece { gradient: vec![1.0], offset: 0.0 },
            AffinePiece { gradient: vec![-1.0], offset: 0.0 },
        ])
        .unwrap();
        let s = slope_exact(&abs, &pt(&[0.0])).unwrap();
        assert_eq!(s.value, ExtReal::finite(0.0));
        assert_eq!(s.method, SlopeMethod::ExactPolyhedral);

        // kink of max(x, -x, 2x - 1) at x = 1: hull{1, 2}, min-norm 1
        let m = ConvexSpec::max_affine(vec![
            AffinePiece { gradient: vec![1.0], offset: 0.0 },
            AffinePiece { gradient: vec![-1.0], offset: 0.0 },
            AffinePiece { gradient: vec![2.0], offset: -1.0 },
        ])
        .unwrap();
        let s = slope_exact(&m, &pt(&[1.0])).unwrap();
        assert_eq!(s.value, ExtReal::finite(1.0));
        // agreement with the exact 1-d oracle on the same pieces
        let g = funclib::to_pwq1d(&m).unwrap();
        assert_eq!(g.slope(1.0), s.value);
    }

    #[test]
    fn indicator_slopes() {
        let ind = ConvexSpec::indicator_box(vec![0.0], vec![1.0]).unwrap();
        assert_eq!(
            slope_exact(&ind, &pt(&[0.5])).unwrap().value,
            ExtReal::finite(0.0)
        );
        assert_eq!(
            slope_exact(&ind, &pt(&[1.0])).unwrap().value,
            ExtReal::finite(0.0)
        );
        assert_eq!(slope_exact(&ind, &pt(&[1.5])).unwrap().value, ExtReal::PosInf);
    }

    #[test]
    fn min_norm_subgradient_examples() {
        let half_sq = ConvexSpec::half_sq_norm(2);
        let g = min_norm_subgradient(&half_sq, &pt(&[3.0, 4.0])).unwrap();
        assert!(g.vector.dist(&pt(&[3.0, 4.0])) < 1e-12);
        assert!((g.norm - 5.0).abs() < 1e-12);

        let abs = abs1();
        let g = min_norm_subgradient(&abs, &pt(&[0.0])).unwrap();
        assert_eq!(g.norm, 0.0);
        let g = min_norm_subgradient(&abs, &pt(&[-2.0])).unwrap();
        assert!((g.vector[0] - -1.0).abs() < 1e-12);

        let ind = ConvexSpec::indicator_box(vec![0.0], vec![1.0]).unwrap();
        assert!(matches!(
            min_norm_subgradient(&ind, &pt(&[2.0])),
            Err(SlopeError::EmptySubdifferential)
        ));
    }

    #[test]
    fn ladder_examples() {
        let abs = abs1();
        let s = slope_prox_estimate(&abs, &pt(&[1.0]), &[1.0, 0.5, 0.25], &LadderPolicy::default())
            .unwrap();
        // |x| at 1: prox keeps unit speed once λ <= 1
        assert_eq!(s.value, ExtReal::finite(1.0));
        for (_, est) in &s.trace {
            assert!((est - 1.0).abs() < 1e-12);
        }

        let half_sq = ConvexSpec::half_sq_norm(1);
        let s = slope_prox_estimate(
            &half_sq,
            &pt(&[1.0]),
            &[1.0, 0.5, 0.25],
            &LadderPolicy::default(),
        )
        .unwrap();
        let expect = [0.5, 2.0 / 3.0, 0.8];
        for ((_, est), want) in s.trace.iter().zip(expect) {
            assert!((est - want).abs() < 1e-12);
        }

        let ind = ConvexSpec::indicator_box(vec![0.0], vec![1.0]).unwrap();
        let s = slope_prox_estimate(&ind, &pt(&[0.5]), &[1.0, 0.5, 0.25], &LadderPolicy::default())
            .unwrap();
        assert_eq!(s.value, ExtReal::finite(0.0));
    }

    #[test]
    fn ladder_detects_infinite_slope() {
        // outside the domain the prox pulls at rate dist/λ → ∞
        let ind = ConvexSpec::indicator_box(vec![0.0], vec![1.0]).unwrap();
        let ladder = dyadic_ladder(24);
        let s = slope_prox_estimate(&ind, &pt(&[2.0]), &ladder, &LadderPolicy::default()).unwrap();
        assert_eq!(s.value, ExtReal::PosInf);
        // exact slope agrees
        assert_eq!(slope_exact(&ind, &pt(&[2.0])).unwrap().value, ExtReal::PosInf);
    }

    #[test]
    fn ladder_rejects_bad_input() {
        let abs = abs1();
        assert!(matches!(
            slope_prox_estimate(&abs, &pt(&[1.0]), &[0.5, 1.0], &LadderPolicy::default()),
            Err(SlopeError::BadLadder)
        ));
        assert!(matches!(
            slope_prox_estimate(&abs, &pt(&[1.0]), &[], &LadderPolicy::default()),
            Err(SlopeError::BadLadder)
        ));
    }

    #[test]
    fn ladder_matches_exact_on_exact_classes() {
        let specs = vec![
            ConvexSpec::half_sq_norm(2),
            ConvexSpec::scaled_norm(2, 2.0).unwrap(),
            ConvexSpec::max_affine(vec![
                AffinePiece { gradient: vec![1.0, 0.5], offset: 0.0 },
                AffinePiece { gradient: vec![-1.0, 0.0], offset: 0.2 },
            ])
            .unwrap(),
        ];
        let ladder = dyadic_ladder(20);
        for spec in &specs {
            for xy in [[0.7, -0.4], [0.0, 0.0], [1.5, 2.0]] {
                let x = pt(&xy);
                let exact = slope_exact(spec, &x).unwrap().value;
                let est = slope_prox_estimate(spec, &x, &ladder, &LadderPolicy::default())
                    .unwrap()
                    .value;
                if let (ExtReal::Finite(a), ExtReal::Finite(b)) = (exact, est) {
                    assert!((a - b).abs() <= 1e-5, "exact {a} vs ladder {b}");
                }
            }
        }
    }

    #[test]
    fn zero_slope_iff_argmin() {
        let g = funclib::to_pwq1d(&abs1()).unwrap();
        let inf = g.infimum().unwrap();
        for &x in &[-1.0, -0.2, 0.0, 0.4, 2.0] {
            let zero = is_argmin(&abs1(), &pt(&[x]), 1e-12).unwrap();
            let in_argmin = x >= inf.argmin_lo && x <= inf.argmin_hi;
            assert_eq!(zero, in_argmin, "x = {x}");
        }
        // quadratic closed-form argmin
        let q = ConvexSpec::quadratic(vec![vec![2.0]], vec![-2.0], 0.0).unwrap();
        assert!(is_argmin(&q, &pt(&[1.0]), 1e-12).unwrap());
        assert!(!is_argmin(&q, &pt(&[0.9]), 1e-12).unwrap());
    }

    #[test]
    fn slope_is_lower_semicontinuous_along_segments() {
        // liminf of sampled slopes at a point >= slope at the point - tol
        let spec = ConvexSpec::max_affine(vec![
            AffinePiece { gradient: vec![1.0, 1.0], offset: 0.0 },
            AffinePiece { gradient: vec![-1.0, 0.0], offset: 0.0 },
            AffinePiece { gradient: vec![0.0, -1.0], offset: -0.5 },
        ])
        .unwrap();
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let x = pt(&[rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
            let dir = [rng.random_range(-1.0..1.0f64), rng.random_range(-1.0..1.0)];
            let s_at = slope_exact(&spec, &x).unwrap().value.unwrap_finite();
            let mut inf_nearby = f64::INFINITY;
            for k in 1..=20 {
                let t = k as f64 * 1e-4;
                let y = x.add_scaled(t, &dir);
                inf_nearby =
                    inf_nearby.min(slope_exact(&spec, &y).unwrap().value.unwrap_finite());
            }
            assert!(inf_nearby >= s_at - 1e-6);
        }
    }

    #[test]
    fn subgradient_residual_detects_outsiders() {
        let abs = abs1();
        assert_eq!(subgradient_residual(&abs, &pt(&[0.0]), &pt(&[0.5])).unwrap(), 0.0);
        assert!(subgradient_residual(&abs, &pt(&[2.0]), &pt(&[0.5])).unwrap() > 0.4);
        let m = ConvexSpec::max_affine(vec![
            AffinePiece { gradient: vec![1.0, 0.0], offset: 0.0 },
            AffinePiece { gradient: vec![0.0, 1.0], offset: 0.0 },
        ])
        .unwrap();
        // at a point where both pieces are active, the hull is the segment
        let r = subgradient_residual(&m, &pt(&[1.0, 1.0]), &pt(&[0.5, 0.5])).unwrap();
        assert!(r < 1e-12);
    }
}
