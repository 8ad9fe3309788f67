//! Proximal points of builder trees.
//!
//! Each primitive has a closed form; combinators reduce to the inner prox
//! exactly (tilts, translations, positive scalings, isotropic quadratic
//! parts). Sums with more than one non-quadratic atom have no closed form
//! and are refused in `d >= 2`; in `d = 1` they lower to the exact
//! piecewise-quadratic solve. Upper envelopes of affine pieces are handled
//! by an exact active-set enumeration (the optimal active set has at most
//! `d + 1` pieces).

use super::{as_quadratic, convert, ConvexSpec, FunclibError, Node};
use crate::geom::{dot, norm, Point};
use crate::linalg;
use crate::pwq1d::{BoundPolicy, Piece, PwQuad};

/// `argmin_u f(u) + ||u - x||² / (2λ)`.
pub fn prox(spec: &ConvexSpec, lambda: f64, x: &Point) -> Result<Point, FunclibError> {
    if x.dim() != spec.dim() {
        return Err(FunclibError::DimensionMismatch {
            expected: spec.dim(),
            got: x.dim(),
        });
    }
    if !(lambda > 0.0) {
        return Err(FunclibError::NonPositiveLambda);
    }
    prox_node(spec.node(), spec.dim(), lambda, x.as_slice()).map(Point::new)
}

fn prox_node(node: &Node, dim: usize, lambda: f64, x: &[f64]) -> Result<Vec<f64>, FunclibError> {
    match node {
        Node::Constant { .. } => Ok(x.to_vec()),
        Node::Quadratic { q, b, .. } => {
            // (I + λQ) p = x - λb
            let mut m = q.clone();
            for (i, row) in m.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v *= lambda;
                    if i == j {
                        *v += 1.0;
                    }
                }
            }
            let rhs: Vec<f64> = x.iter().zip(b).map(|(xi, bi)| xi - lambda * bi).collect();
            Ok(linalg::solve(&m, &rhs)?)
        }
        Node::ScaledNorm { alpha } => {
            let n = norm(x);
            let thr = lambda * alpha;
            if n <= thr {
                Ok(vec![0.0; dim])
            } else {
                let f = 1.0 - thr / n;
                Ok(x.iter().map(|v| f * v).collect())
            }
        }
        Node::MaxAffine { pieces } => max_affine_prox(pieces, dim, lambda, x),
        Node::IndicatorBox { lo, hi } => Ok(x
            .iter()
            .zip(lo.iter().zip(hi))
            .map(|(v, (l, h))| v.clamp(*l, *h))
            .collect()),
        Node::IndicatorBall { center, radius } => {
            let d = crate::geom::dist(x, center);
            if d <= *radius {
                Ok(x.to_vec())
            } else {
                Ok(x
                    .iter()
                    .zip(center)
                    .map(|(v, c)| c + (v - c) * radius / d)
                    .collect())
            }
        }
        Node::Pwq1d(g) => Ok(vec![g.prox(lambda, x[0])]),
        Node::Scale { alpha, inner } => prox_node(inner, dim, lambda * alpha, x),
        Node::Tilt { v, inner } => {
            let shifted: Vec<f64> = x.iter().zip(v).map(|(xi, vi)| xi - lambda * vi).collect();
            prox_node(inner, dim, lambda, &shifted)
        }
        Node::Translate { z, inner } => {
            let shifted: Vec<f64> = x.iter().zip(z).map(|(a, b)| a - b).collect();
            let p = prox_node(inner, dim, lambda, &shifted)?;
            Ok(p.iter().zip(z).map(|(a, b)| a + b).collect())
        }
        Node::RestrictSegment { a, b, inner } => {
            let u: Vec<f64> = b.iter().zip(a.iter()).map(|(p, q)| p - q).collect();
            if dot(&u, &u) == 0.0 {
                return Ok(a.clone());
            }
            let g = convert::node_to_pwq_line(inner, a, &u)
                .map_err(|e| match e {
                    FunclibError::NotLineRepresentable => FunclibError::NoProxPath(
                        "segment restriction of a non-line-representable tree".into(),
                    ),
                    other => other,
                })?
                .restrict(0.0, 1.0)?;
            // add the metric term ||a + t u - x||² / (2λ) as a quadratic in t
            let xa: Vec<f64> = x.iter().zip(a.iter()).map(|(p, q)| p - q).collect();
            let metric = PwQuad::new(
                f64::NEG_INFINITY,
                f64::INFINITY,
                vec![],
                vec![Piece {
                    a: dot(&u, &u) / (2.0 * lambda),
                    b: -dot(&xa, &u) / lambda,
                    c: dot(&xa, &xa) / (2.0 * lambda),
                }],
                BoundPolicy::AllowUnbounded,
            )?;
            let total = g.add(&metric)?;
            let inf = total.infimum().map_err(FunclibError::Pwq)?;
            let t = inf.argmin_lo;
            Ok(a.iter().zip(&u).map(|(ai, ui)| ai + t * ui).collect())
        }
        Node::Sum(parts) => prox_sum(parts, dim, lambda, x),
    }
}

fn prox_sum(parts: &[Node], dim: usize, lambda: f64, x: &[f64]) -> Result<Vec<f64>, FunclibError> {
    // collect the quadratic part and the remaining atoms
    let mut quad: Vec<&Node> = Vec::new();
    let mut atoms: Vec<&Node> = Vec::new();
    for p in parts {
        if as_quadratic(p, dim).is_some() {
            quad.push(p);
        } else {
            atoms.push(p);
        }
    }
    let mut q = vec![vec![0.0; dim]; dim];
    let mut b = vec![0.0; dim];
    for p in &quad {
        let (qq, bb, _) = as_quadratic(p, dim).unwrap();
        for i in 0..dim {
            for j in 0..dim {
                q[i][j] += qq[i][j];
            }
            b[i] += bb[i];
        }
    }
    match atoms.len() {
        0 => prox_node(
            &Node::Quadratic { q, b, c: 0.0 },
            dim,
            lambda,
            x,
        ),
        1 => {
            if let Some(alpha) = isotropic_scale(&q) {
                // prox_{λ(f + α/2||·||² + bᵀ·)}(x) = prox_{λ'f}((x - λb)/(1 + λα))
                let denom = 1.0 + lambda * alpha;
                let lam2 = lambda / denom;
                let shifted: Vec<f64> = x
                    .iter()
                    .zip(&b)
                    .map(|(xi, bi)| (xi - lambda * bi) / denom)
                    .collect();
                return prox_node(atoms[0], dim, lam2, &shifted);
            }
            if let (Node::IndicatorBox { lo, hi }, true) = (atoms[0], is_diagonal(&q)) {
                let p = (0..dim)
                    .map(|i| ((x[i] - lambda * b[i]) / (1.0 + lambda * q[i][i])).clamp(lo[i], hi[i]))
                    .collect();
                return Ok(p);
            }
            prox_sum_1d_or_refuse(parts, dim, lambda, x)
        }
        _ => prox_sum_1d_or_refuse(parts, dim, lambda, x),
    }
}

fn prox_sum_1d_or_refuse(
    parts: &[Node],
    dim: usize,
    lambda: f64,
    x: &[f64],
) -> Result<Vec<f64>, FunclibError> {
    if dim != 1 {
        return Err(FunclibError::NoProxPath(
            "d-dimensional sum with more than one non-quadratic atom".into(),
        ));
    }
    let g = convert::node_to_pwq_line(&Node::Sum(parts.to_vec()), &[0.0], &[1.0])?;
    Ok(vec![g.prox(lambda, x[0])])
}

fn isotropic_scale(q: &[Vec<f64>]) -> Option<f64> {
    let n = q.len();
    let alpha = q[0][0];
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { alpha } else { 0.0 };
            if (q[i][j] - want).abs() > 1e-12 * (1.0 + alpha.abs()) {
                return None;
            }
        }
    }
    Some(alpha)
}

fn is_diagonal(q: &[Vec<f64>]) -> bool {
    q.iter().enumerate().all(|(i, row)| {
        row.iter()
            .enumerate()
            .all(|(j, v)| i == j || v.abs() <= 1e-12)
    })
}

/// Exact prox of `max_i <g_i, p> + β_i`: enumerate candidate active sets of
/// size at most `d + 1`, solve the KKT system for the simplex weights and
/// keep the feasible candidate. Finite and deterministic; piece counts are
/// capped at 24.
fn max_affine_prox(
    pieces: &[super::AffinePiece],
    dim: usize,
    lambda: f64,
    x: &[f64],
) -> Result<Vec<f64>, FunclibError> {
    let m = pieces.len();
    if m > 24 {
        return Err(FunclibError::NoProxPath(
            "max-affine prox supports at most 24 pieces".into(),
        ));
    }
    let value_at = |p: &[f64]| -> f64 {
        pieces
            .iter()
            .map(|pc| dot(&pc.gradient, p) + pc.offset)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let objective = |p: &[f64]| -> f64 {
        let d2: f64 = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        value_at(p) + d2 / (2.0 * lambda)
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    let max_k = (dim + 1).min(m);
    let mut subset: Vec<usize> = Vec::with_capacity(max_k);
    enumerate_subsets(m, max_k, &mut subset, &mut |set: &[usize]| {
        if let Some(p) = try_active_set(pieces, set, lambda, x) {
            let t_active = dot(&pieces[set[0]].gradient, &p) + pieces[set[0]].offset;
            let feasible = pieces.iter().enumerate().all(|(j, pc)| {
                set.contains(&j)
                    || dot(&pc.gradient, &p) + pc.offset <= t_active + 1e-9 * (1.0 + t_active.abs())
            });
            if feasible {
                let obj = objective(&p);
                if best.as_ref().is_none_or(|(b, _)| obj < *b) {
                    best = Some((obj, p));
                }
            }
        }
    });
    best.map(|(_, p)| p).ok_or_else(|| {
        FunclibError::NoProxPath("max-affine active-set enumeration found no KKT point".into())
    })
}

fn enumerate_subsets(m: usize, max_k: usize, current: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    fn rec(
        start: usize,
        m: usize,
        max_k: usize,
        current: &mut Vec<usize>,
        f: &mut impl FnMut(&[usize]),
    ) {
        if !current.is_empty() {
            f(current);
        }
        if current.len() == max_k {
            return;
        }
        for i in start..m {
            current.push(i);
            rec(i + 1, m, max_k, current, f);
            current.pop();
        }
    }
    rec(0, m, max_k, current, f);
}

/// Solves for simplex weights θ of the conjectured active set: the prox
/// point is `p = x - λ Σ θ_i g_i` with equal active values and `Σθ = 1`.
fn try_active_set(
    pieces: &[super::AffinePiece],
    set: &[usize],
    lambda: f64,
    x: &[f64],
) -> Option<Vec<f64>> {
    let k = set.len();
    let g0 = &pieces[set[0]].gradient;
    let b0 = pieces[set[0]].offset;
    let mut m = vec![vec![0.0; k]; k];
    let mut rhs = vec![0.0; k];
    for (row, &j) in set.iter().enumerate().skip(1) {
        let gj = &pieces[j].gradient;
        let diff: Vec<f64> = g0.iter().zip(gj).map(|(a, b)| a - b).collect();
        for (col, &i) in set.iter().enumerate() {
            m[row - 1][col] = -lambda * dot(&diff, &pieces[i].gradient);
        }
        rhs[row - 1] = -(dot(&diff, x) + b0 - pieces[j].offset);
    }
    for col in 0..k {
        m[k - 1][col] = 1.0;
    }
    rhs[k - 1] = 1.0;
    let theta = linalg::solve(&m, &rhs).ok()?;
    if theta.iter().any(|t| *t < -1e-10) {
        return None;
    }
    let mut p = x.to_vec();
    for (col, &i) in set.iter().enumerate() {
        for (pi, gi) in p.iter_mut().zip(&pieces[i].gradient) {
            *pi -= lambda * theta[col] * gi;
        }
    }
    Some(p)
}
