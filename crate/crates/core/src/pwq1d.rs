//! Exact calculus for univariate convex piecewise-quadratic functions.
//!
//! `PwQuad` represents a proper convex lower semicontinuous function on a
//! closed interval (possibly unbounded) built from finitely many pieces
//! `a x^2 + b x + c` with `a >= 0`. Everything here is solved in closed form
//! piece by piece — subdifferentials, slopes, proximal points, Fenchel
//! conjugates, infima — with no iteration error, which is what makes the
//! type trustworthy as a reference for the generic d-dimensional paths.
//!
//! Breakpoint arithmetic is plain `f64` with a merge tolerance of `1e-12`;
//! nearby breakpoints are collapsed rather than kept as distinct pieces.

use crate::extreal::ExtReal;
use thiserror::Error;

pub const MERGE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PwqError {
    #[error("domain is empty")]
    EmptyDomain,
    #[error("function is unbounded below")]
    UnboundedBelow,
    #[error("pieces are discontinuous at breakpoint {0}")]
    BrokenContinuity(f64),
    #[error("one-sided derivatives decrease at breakpoint {0}")]
    BrokenConvexity(f64),
    #[error("invalid pieces: {0}")]
    InvalidPieces(String),
}

/// One parabolic piece `a x^2 + b x + c` with `a >= 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Piece {
    pub fn value(&self, x: f64) -> f64 {
        (self.a * x + self.b) * x + self.c
    }

    pub fn deriv(&self, x: f64) -> f64 {
        2.0 * self.a * x + self.b
    }

    fn add(&self, other: &Piece) -> Piece {
        Piece {
            a: self.a + other.a,
            b: self.b + other.b,
            c: self.c + other.c,
        }
    }
}

/// Whether construction tolerates functions unbounded below. The default
/// entry points reject them; internal calculus (tilts, conjugates) opts in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundPolicy {
    RejectUnbounded,
    AllowUnbounded,
}

/// A convex piecewise-quadratic function on `[dom_lo, dom_hi]` (`±inf`
/// allowed). `cuts` are the interior breakpoints; `pieces.len() == cuts.len() + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct PwQuad {
    dom_lo: f64,
    dom_hi: f64,
    cuts: Vec<f64>,
    pieces: Vec<Piece>,
}

/// Exact infimum with the (closed, possibly unbounded) argmin interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Infimum {
    pub value: f64,
    pub argmin_lo: f64,
    pub argmin_hi: f64,
    pub attained: bool,
}

impl PwQuad {
    pub fn new(
        dom_lo: f64,
        dom_hi: f64,
        cuts: Vec<f64>,
        pieces: Vec<Piece>,
        policy: BoundPolicy,
    ) -> Result<PwQuad, PwqError> {
        if dom_lo.is_nan() || dom_hi.is_nan() || dom_lo > dom_hi {
            return Err(PwqError::EmptyDomain);
        }
        if dom_lo == f64::INFINITY || dom_hi == f64::NEG_INFINITY {
            return Err(PwqError::EmptyDomain);
        }
        if pieces.len() != cuts.len() + 1 {
            return Err(PwqError::InvalidPieces(format!(
                "{} pieces for {} cuts",
                pieces.len(),
                cuts.len()
            )));
        }
        for p in &pieces {
            if !(p.a.is_finite() && p.b.is_finite() && p.c.is_finite()) {
                return Err(PwqError::InvalidPieces("non-finite coefficients".into()));
            }
            if p.a < -MERGE_TOL {
                return Err(PwqError::InvalidPieces(format!(
                    "negative curvature a = {}",
                    p.a
                )));
            }
        }
        let mut pieces = pieces;
        for p in &mut pieces {
            if p.a < 0.0 {
                p.a = 0.0;
            }
        }
        if dom_lo == dom_hi && !cuts.is_empty() {
            return Err(PwqError::InvalidPieces(
                "point domain cannot have interior cuts".into(),
            ));
        }
        for w in cuts.windows(2) {
            if !(w[0] < w[1]) {
                return Err(PwqError::InvalidPieces("cuts not increasing".into()));
            }
        }
        if let (Some(first), Some(last)) = (cuts.first(), cuts.last()) {
            if *first <= dom_lo || *last >= dom_hi {
                return Err(PwqError::InvalidPieces("cut outside open domain".into()));
            }
        }
        for (i, t) in cuts.iter().enumerate() {
            let left = pieces[i];
            let right = pieces[i + 1];
            let scale = 1.0 + left.value(*t).abs().max(right.value(*t).abs());
            if (left.value(*t) - right.value(*t)).abs() > 1e-8 * scale {
                return Err(PwqError::BrokenContinuity(*t));
            }
            let dscale = 1.0 + left.deriv(*t).abs().max(right.deriv(*t).abs());
            if right.deriv(*t) < left.deriv(*t) - 1e-9 * dscale {
                return Err(PwqError::BrokenConvexity(*t));
            }
        }
        let out = PwQuad {
            dom_lo,
            dom_hi,
            cuts,
            pieces,
        };
        if policy == BoundPolicy::RejectUnbounded && out.is_unbounded_below() {
            return Err(PwqError::UnboundedBelow);
        }
        Ok(out)
    }

    // ---- constructors -----------------------------------------------------

    pub fn constant(c: f64) -> PwQuad {
        PwQuad {
            dom_lo: f64::NEG_INFINITY,
            dom_hi: f64::INFINITY,
            cuts: vec![],
            pieces: vec![Piece { a: 0.0, b: 0.0, c }],
        }
    }

    /// `a x^2 + b x + c` on the whole line, `a >= 0`; unbounded-below affine
    /// functions require [`BoundPolicy::AllowUnbounded`] via [`PwQuad::new`].
    pub fn quadratic(a: f64, b: f64, c: f64) -> Result<PwQuad, PwqError> {
        PwQuad::new(
            f64::NEG_INFINITY,
            f64::INFINITY,
            vec![],
            vec![Piece { a, b, c }],
            BoundPolicy::RejectUnbounded,
        )
    }

    /// `alpha * |x|` with `alpha >= 0`.
    pub fn scaled_abs(alpha: f64) -> PwQuad {
        assert!(alpha >= 0.0);
        if alpha == 0.0 {
            return PwQuad::constant(0.0);
        }
        PwQuad {
            dom_lo: f64::NEG_INFINITY,
            dom_hi: f64::INFINITY,
            cuts: vec![0.0],
            pieces: vec![
                Piece { a: 0.0, b: -alpha, c: 0.0 },
                Piece { a: 0.0, b: alpha, c: 0.0 },
            ],
        }
    }

    /// Indicator of `[lo, hi]` (0 inside, `+inf` outside).
    pub fn indicator(lo: f64, hi: f64) -> Result<PwQuad, PwqError> {
        PwQuad::new(
            lo,
            hi,
            vec![],
            vec![Piece { a: 0.0, b: 0.0, c: 0.0 }],
            BoundPolicy::RejectUnbounded,
        )
    }

    /// Domain `{x0}` with the given value.
    pub fn point_domain(x0: f64, value: f64) -> PwQuad {
        PwQuad {
            dom_lo: x0,
            dom_hi: x0,
            cuts: vec![],
            pieces: vec![Piece { a: 0.0, b: 0.0, c: value }],
        }
    }

    /// Upper envelope `max_i (m_i x + q_i)` of finitely many lines.
    pub fn max_affine(lines: &[(f64, f64)]) -> Result<PwQuad, PwqError> {
        if lines.is_empty() {
            return Err(PwqError::InvalidPieces("max of zero lines".into()));
        }
        let mut sorted: Vec<(f64, f64)> = lines.to_vec();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        // same slope: keep the largest intercept
        let mut dedup: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
        for (m, q) in sorted {
            match dedup.last_mut() {
                Some((m0, q0)) if (m - *m0).abs() <= MERGE_TOL * (1.0 + m.abs()) => {
                    if q > *q0 {
                        *q0 = q;
                    }
                }
                _ => dedup.push((m, q)),
            }
        }
        let mut kept: Vec<(f64, f64)> = Vec::new();
        let mut xs: Vec<f64> = Vec::new();
        for line in dedup {
            loop {
                match kept.last() {
                    None => {
                        kept.push(line);
                        break;
                    }
                    Some(top) => {
                        let x = (top.1 - line.1) / (line.0 - top.0);
                        if xs.last().is_none_or(|prev| x > *prev) {
                            kept.push(line);
                            xs.push(x);
                            break;
                        }
                        kept.pop();
                        xs.pop();
                    }
                }
            }
        }
        let pieces = kept
            .into_iter()
            .map(|(m, q)| Piece { a: 0.0, b: m, c: q })
            .collect();
        PwQuad::new(
            f64::NEG_INFINITY,
            f64::INFINITY,
            xs,
            pieces,
            BoundPolicy::AllowUnbounded,
        )
    }

    /// Huber function with threshold `delta > 0`: quadratic `x^2 / (2 delta)`
    /// on `|x| <= delta`, affine `|x| - delta/2` outside.
    pub fn huber(delta: f64) -> Result<PwQuad, PwqError> {
        assert!(delta > 0.0);
        PwQuad::new(
            f64::NEG_INFINITY,
            f64::INFINITY,
            vec![-delta, delta],
            vec![
                Piece { a: 0.0, b: -1.0, c: -delta / 2.0 },
                Piece { a: 0.5 / delta, b: 0.0, c: 0.0 },
                Piece { a: 0.0, b: 1.0, c: -delta / 2.0 },
            ],
            BoundPolicy::RejectUnbounded,
        )
    }

    // ---- accessors ---------------------------------------------------------

    pub fn dom(&self) -> (f64, f64) {
        (self.dom_lo, self.dom_hi)
    }

    pub fn cuts(&self) -> &[f64] {
        &self.cuts
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_unbounded_below(&self) -> bool {
        let first = self.pieces.first().unwrap();
        if self.dom_lo == f64::NEG_INFINITY && first.a == 0.0 && first.b > 0.0 {
            return true;
        }
        let last = self.pieces.last().unwrap();
        self.dom_hi == f64::INFINITY && last.a == 0.0 && last.b < 0.0
    }

    fn piece_index(&self, x: f64) -> usize {
        self.cuts.partition_point(|t| *t < x)
    }

    fn piece_index_right(&self, x: f64) -> usize {
        self.cuts.partition_point(|t| *t <= x)
    }

    pub fn value(&self, x: f64) -> ExtReal {
        if x < self.dom_lo || x > self.dom_hi {
            return ExtReal::PosInf;
        }
        ExtReal::finite(self.pieces[self.piece_index(x)].value(x))
    }

    /// One-sided derivatives `(f'_-(x), f'_+(x))` for `x` inside the domain;
    /// meaningful only there.
    fn one_sided(&self, x: f64) -> (f64, f64) {
        let left = self.pieces[self.piece_index(x)].deriv(x);
        let right = self.pieces[self.piece_index_right(x)].deriv(x);
        (left, right)
    }

    /// The subdifferential at `x` as a closed interval (`±inf` endpoints for
    /// normal rays at domain boundary); `None` when empty.
    pub fn subdiff(&self, x: f64) -> Option<(f64, f64)> {
        if x < self.dom_lo || x > self.dom_hi {
            return None;
        }
        if self.dom_lo == self.dom_hi {
            return Some((f64::NEG_INFINITY, f64::INFINITY));
        }
        if x == self.dom_lo {
            let (_, r) = self.one_sided(x);
            return Some((f64::NEG_INFINITY, r));
        }
        if x == self.dom_hi {
            let (l, _) = self.one_sided(x);
            return Some((l, f64::INFINITY));
        }
        let (l, r) = self.one_sided(x);
        Some((l, r))
    }

    /// `dist(0, ∂f(x))`; `+inf` exactly when the subdifferential is empty.
    pub fn slope(&self, x: f64) -> ExtReal {
        match self.subdiff(x) {
            None => ExtReal::PosInf,
            Some((lo, hi)) => {
                if lo <= 0.0 && 0.0 <= hi {
                    ExtReal::finite(0.0)
                } else if lo > 0.0 {
                    ExtReal::finite(lo)
                } else {
                    ExtReal::finite(-hi)
                }
            }
        }
    }

    /// Unique solution of `x - p ∈ λ ∂f(p)`: the proximal point, found by an
    /// exact piecewise solve of the monotone optimality inclusion.
    pub fn prox(&self, lambda: f64, x: f64) -> f64 {
        assert!(lambda > 0.0, "prox needs lambda > 0");
        if self.dom_lo == self.dom_hi {
            return self.dom_lo;
        }
        if self.dom_lo > f64::NEG_INFINITY {
            let (_, r) = self.one_sided(self.dom_lo);
            if x <= self.dom_lo + lambda * r {
                return self.dom_lo;
            }
        }
        let mut seg_lo = self.dom_lo;
        for (i, p) in self.pieces.iter().enumerate() {
            let seg_hi = self.cuts.get(i).copied().unwrap_or(self.dom_hi);
            let denom = 1.0 + 2.0 * lambda * p.a;
            if seg_hi < f64::INFINITY {
                let reach = seg_hi * denom + lambda * p.b;
                if x <= reach {
                    let cand = (x - lambda * p.b) / denom;
                    return cand.clamp(seg_lo.max(f64::MIN), seg_hi);
                }
                if i < self.cuts.len() {
                    let next = &self.pieces[i + 1];
                    let jump_hi = seg_hi * (1.0 + 2.0 * lambda * next.a) + lambda * next.b;
                    if x <= jump_hi {
                        return seg_hi;
                    }
                }
            } else {
                let cand = (x - lambda * p.b) / denom;
                return cand.max(seg_lo);
            }
            seg_lo = seg_hi;
        }
        self.dom_hi
    }

    /// Exact infimum and argmin interval. Within this class a finite infimum
    /// is always attained, so `attained` is true whenever this returns `Ok`.
    pub fn infimum(&self) -> Result<Infimum, PwqError> {
        if self.is_unbounded_below() {
            return Err(PwqError::UnboundedBelow);
        }
        let mut best = f64::INFINITY;
        let mut seg_lo = self.dom_lo;
        let mut candidates: Vec<(f64, f64, f64)> = Vec::new(); // (value, x_lo, x_hi)
        for (i, p) in self.pieces.iter().enumerate() {
            let seg_hi = self.cuts.get(i).copied().unwrap_or(self.dom_hi);
            if p.a > 0.0 {
                let v = -p.b / (2.0 * p.a);
                if v >= seg_lo && v <= seg_hi {
                    candidates.push((p.value(v), v, v));
                }
            } else if p.b == 0.0 {
                candidates.push((p.c, seg_lo, seg_hi));
            }
            if seg_lo > f64::NEG_INFINITY {
                candidates.push((p.value(seg_lo), seg_lo, seg_lo));
            }
            if seg_hi < f64::INFINITY {
                candidates.push((p.value(seg_hi), seg_hi, seg_hi));
            }
            seg_lo = seg_hi;
        }
        for (v, _, _) in &candidates {
            best = best.min(*v);
        }
        if !best.is_finite() {
            return Err(PwqError::InvalidPieces("no finite candidate value".into()));
        }
        let tol = 1e-12 * (1.0 + best.abs());
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (v, a, b) in candidates {
            if v <= best + tol {
                lo = lo.min(a);
                hi = hi.max(b);
            }
        }
        Ok(Infimum {
            value: best,
            argmin_lo: lo,
            argmin_hi: hi,
            attained: true,
        })
    }

    /// Exact Fenchel conjugate, again a `PwQuad`.
    pub fn conjugate(&self) -> Result<PwQuad, PwqError> {
        if self.dom_lo == self.dom_hi {
            let v = self.pieces[0].value(self.dom_lo);
            return PwQuad::new(
                f64::NEG_INFINITY,
                f64::INFINITY,
                vec![],
                vec![Piece { a: 0.0, b: self.dom_lo, c: -v }],
                BoundPolicy::AllowUnbounded,
            );
        }
        // segments of the conjugate in slope coordinates, in increasing order
        let mut segs: Vec<(f64, f64, Piece)> = Vec::new();
        if self.dom_lo > f64::NEG_INFINITY {
            let sigma = self.pieces[0].deriv(self.dom_lo);
            let v = self.pieces[0].value(self.dom_lo);
            segs.push((
                f64::NEG_INFINITY,
                sigma,
                Piece { a: 0.0, b: self.dom_lo, c: -v },
            ));
        }
        let mut seg_lo = self.dom_lo;
        for (i, p) in self.pieces.iter().enumerate() {
            let seg_hi = self.cuts.get(i).copied().unwrap_or(self.dom_hi);
            if p.a > 0.0 {
                let s_lo = if seg_lo == f64::NEG_INFINITY {
                    f64::NEG_INFINITY
                } else {
                    p.deriv(seg_lo)
                };
                let s_hi = if seg_hi == f64::INFINITY {
                    f64::INFINITY
                } else {
                    p.deriv(seg_hi)
                };
                segs.push((
                    s_lo,
                    s_hi,
                    Piece {
                        a: 0.25 / p.a,
                        b: -p.b / (2.0 * p.a),
                        c: p.b * p.b / (4.0 * p.a) - p.c,
                    },
                ));
            }
            if i < self.cuts.len() {
                let t = self.cuts[i];
                let s_a = p.deriv(t);
                let s_b = self.pieces[i + 1].deriv(t);
                if s_b > s_a {
                    segs.push((s_a, s_b, Piece { a: 0.0, b: t, c: -p.value(t) }));
                }
            }
            seg_lo = seg_hi;
        }
        if self.dom_hi < f64::INFINITY {
            let last = self.pieces.last().unwrap();
            let sigma = last.deriv(self.dom_hi);
            let v = last.value(self.dom_hi);
            segs.push((
                sigma,
                f64::INFINITY,
                Piece { a: 0.0, b: self.dom_hi, c: -v },
            ));
        }
        segs.retain(|(lo, hi, _)| hi > lo);
        if segs.is_empty() {
            // single affine piece on the whole line: conjugate is the
            // indicator-like point function at its slope
            let p = self.pieces[0];
            return Ok(PwQuad::point_domain(p.b, -p.c));
        }
        let conj_lo = segs.first().unwrap().0;
        let conj_hi = segs.last().unwrap().1;
        let cuts: Vec<f64> = segs.iter().skip(1).map(|(lo, _, _)| *lo).collect();
        let pieces: Vec<Piece> = segs.into_iter().map(|(_, _, p)| p).collect();
        let mut out = PwQuad::new(conj_lo, conj_hi, cuts, pieces, BoundPolicy::AllowUnbounded)?;
        out.merge_redundant();
        Ok(out)
    }

    // ---- algebra ------------------------------------------------------------

    /// Pointwise sum; errors when the domains do not intersect.
    pub fn add(&self, other: &PwQuad) -> Result<PwQuad, PwqError> {
        let lo = self.dom_lo.max(other.dom_lo);
        let hi = self.dom_hi.min(other.dom_hi);
        if lo > hi {
            return Err(PwqError::EmptyDomain);
        }
        if lo == hi {
            let v = self.value(lo).unwrap_finite() + other.value(lo).unwrap_finite();
            return Ok(PwQuad::point_domain(lo, v));
        }
        let mut cuts: Vec<f64> = self
            .cuts
            .iter()
            .chain(other.cuts.iter())
            .copied()
            .filter(|t| *t > lo && *t < hi)
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() <= MERGE_TOL * (1.0 + a.abs()));
        let mut pieces = Vec::with_capacity(cuts.len() + 1);
        let mut seg_lo = lo;
        for i in 0..=cuts.len() {
            let seg_hi = cuts.get(i).copied().unwrap_or(hi);
            let rep = representative(seg_lo, seg_hi);
            let p = self.pieces[self.piece_index(rep)].add(&other.pieces[other.piece_index(rep)]);
            pieces.push(p);
            seg_lo = seg_hi;
        }
        let mut out = PwQuad::new(lo, hi, cuts, pieces, BoundPolicy::AllowUnbounded)?;
        out.merge_redundant();
        Ok(out)
    }

    /// `alpha * f` with `alpha > 0`.
    pub fn scale(&self, alpha: f64) -> PwQuad {
        assert!(alpha > 0.0);
        PwQuad {
            dom_lo: self.dom_lo,
            dom_hi: self.dom_hi,
            cuts: self.cuts.clone(),
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece { a: alpha * p.a, b: alpha * p.b, c: alpha * p.c })
                .collect(),
        }
    }

    /// `f + v * x`.
    pub fn tilt(&self, v: f64) -> PwQuad {
        PwQuad {
            dom_lo: self.dom_lo,
            dom_hi: self.dom_hi,
            cuts: self.cuts.clone(),
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece { a: p.a, b: p.b + v, c: p.c })
                .collect(),
        }
    }

    /// `f + w` (constant offset).
    pub fn offset(&self, w: f64) -> PwQuad {
        PwQuad {
            dom_lo: self.dom_lo,
            dom_hi: self.dom_hi,
            cuts: self.cuts.clone(),
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece { a: p.a, b: p.b, c: p.c + w })
                .collect(),
        }
    }

    /// `t ↦ f(o + t d)` as a function of `t`. `d = 0` collapses to the
    /// constant `f(o)` (empty domain when `f(o) = +∞`).
    pub fn compose_affine_arg(&self, o: f64, d: f64) -> Result<PwQuad, PwqError> {
        if d == 0.0 {
            return match self.value(o) {
                ExtReal::Finite(v) => Ok(PwQuad::constant(v)),
                ExtReal::PosInf => Err(PwqError::EmptyDomain),
            };
        }
        let map = |x: f64| (x - o) / d;
        let tf = |p: &Piece| Piece {
            a: p.a * d * d,
            b: 2.0 * p.a * o * d + p.b * d,
            c: (p.a * o + p.b) * o + p.c,
        };
        let (mut lo, mut hi) = (map(self.dom_lo), map(self.dom_hi));
        let mut cuts: Vec<f64> = self.cuts.iter().map(|t| map(*t)).collect();
        let mut pieces: Vec<Piece> = self.pieces.iter().map(tf).collect();
        if d < 0.0 {
            std::mem::swap(&mut lo, &mut hi);
            cuts.reverse();
            pieces.reverse();
        }
        PwQuad::new(lo, hi, cuts, pieces, BoundPolicy::AllowUnbounded)
    }

    /// `x ↦ f(x - z)`.
    pub fn translate(&self, z: f64) -> PwQuad {
        PwQuad {
            dom_lo: self.dom_lo + z,
            dom_hi: self.dom_hi + z,
            cuts: self.cuts.iter().map(|t| t + z).collect(),
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    a: p.a,
                    b: p.b - 2.0 * p.a * z,
                    c: (p.a * z - p.b) * z + p.c,
                })
                .collect(),
        }
    }

    /// Restriction to `[lo, hi]`; errors when it misses the domain.
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<PwQuad, PwqError> {
        let new_lo = self.dom_lo.max(lo);
        let new_hi = self.dom_hi.min(hi);
        if new_lo > new_hi {
            return Err(PwqError::EmptyDomain);
        }
        if new_lo == new_hi {
            return Ok(PwQuad::point_domain(new_lo, self.value(new_lo).unwrap_finite()));
        }
        let mut cuts = Vec::new();
        let mut pieces = Vec::new();
        let mut seg_lo = self.dom_lo;
        for (i, p) in self.pieces.iter().enumerate() {
            let seg_hi = self.cuts.get(i).copied().unwrap_or(self.dom_hi);
            if seg_hi > new_lo && seg_lo < new_hi {
                if !pieces.is_empty() {
                    cuts.push(seg_lo);
                }
                pieces.push(*p);
            }
            seg_lo = seg_hi;
        }
        PwQuad::new(new_lo, new_hi, cuts, pieces, BoundPolicy::AllowUnbounded)
    }

    fn merge_redundant(&mut self) {
        let mut i = 0;
        while i < self.cuts.len() {
            let p = self.pieces[i];
            let q = self.pieces[i + 1];
            let scale = 1.0 + p.a.abs() + p.b.abs() + p.c.abs();
            if (p.a - q.a).abs() <= MERGE_TOL * scale
                && (p.b - q.b).abs() <= MERGE_TOL * scale
                && (p.c - q.c).abs() <= MERGE_TOL * scale
            {
                self.cuts.remove(i);
                self.pieces.remove(i + 1);
            } else {
                i += 1;
            }
        }
    }

    /// Structural equality up to breakpoint merging and a coefficient
    /// tolerance.
    pub fn approx_same(&self, other: &PwQuad, tol: f64) -> bool {
        let mut a = self.clone();
        let mut b = other.clone();
        a.merge_redundant();
        b.merge_redundant();
        if !close_ext(a.dom_lo, b.dom_lo, tol) || !close_ext(a.dom_hi, b.dom_hi, tol) {
            return false;
        }
        if a.cuts.len() != b.cuts.len() {
            return false;
        }
        for (x, y) in a.cuts.iter().zip(&b.cuts) {
            if (x - y).abs() > tol * (1.0 + x.abs()) {
                return false;
            }
        }
        a.pieces.iter().zip(&b.pieces).all(|(p, q)| {
            let s = 1.0 + p.a.abs() + p.b.abs() + p.c.abs();
            (p.a - q.a).abs() <= tol * s && (p.b - q.b).abs() <= tol * s && (p.c - q.c).abs() <= tol * s
        })
    }

    // ---- window calculus ----------------------------------------------------

    /// Exact `min_{x in [lo, hi]} f(x)`; `+inf` when the window misses the
    /// domain.
    pub fn value_min_on(&self, lo: f64, hi: f64) -> ExtReal {
        let w_lo = lo.max(self.dom_lo);
        let w_hi = hi.min(self.dom_hi);
        if w_lo > w_hi {
            return ExtReal::PosInf;
        }
        let mut best = self.pieces[self.piece_index(w_lo)]
            .value(w_lo)
            .min(self.pieces[self.piece_index(w_hi)].value(w_hi));
        let mut seg_lo = self.dom_lo;
        for (i, p) in self.pieces.iter().enumerate() {
            let seg_hi = self.cuts.get(i).copied().unwrap_or(self.dom_hi);
            let a = seg_lo.max(w_lo);
            let b = seg_hi.min(w_hi);
            if a <= b {
                if p.a > 0.0 {
                    let v = -p.b / (2.0 * p.a);
                    if v >= a && v <= b {
                        best = best.min(p.value(v));
                    }
                }
                best = best.min(p.value(a)).min(p.value(b));
            }
            seg_lo = seg_hi;
        }
        ExtReal::finite(best)
    }

    /// Exact `min_{x in [lo, hi]} s_f(x)` — slope dips at kinks and argmin
    /// points are found exactly, which pointwise grids cannot do.
    pub fn slope_min_on(&self, lo: f64, hi: f64) -> ExtReal {
        let w_lo = lo.max(self.dom_lo);
        let w_hi = hi.min(self.dom_hi);
        if w_lo > w_hi {
            return ExtReal::PosInf;
        }
        let mut best = self.slope(w_lo).min(self.slope(w_hi));
        for t in &self.cuts {
            if *t >= w_lo && *t <= w_hi {
                best = best.min(self.slope(*t));
            }
        }
        let mut seg_lo = self.dom_lo;
        for (i, p) in self.pieces.iter().enumerate() {
            let seg_hi = self.cuts.get(i).copied().unwrap_or(self.dom_hi);
            if p.a > 0.0 {
                let v = -p.b / (2.0 * p.a);
                if v >= seg_lo.max(w_lo) && v <= seg_hi.min(w_hi) {
                    best = best.min(self.slope(v));
                }
            }
            seg_lo = seg_hi;
        }
        best
    }

    /// Points where the function or its slope can attain interior extrema:
    /// breakpoints, parabola vertices and finite domain endpoints.
    pub fn salient_points(&self) -> Vec<f64> {
        let mut out = self.cuts.clone();
        let mut seg_lo = self.dom_lo;
        for (i, p) in self.pieces.iter().enumerate() {
            let seg_hi = self.cuts.get(i).copied().unwrap_or(self.dom_hi);
            if p.a > 0.0 {
                let v = -p.b / (2.0 * p.a);
                if v >= seg_lo && v <= seg_hi {
                    out.push(v);
                }
            }
            seg_lo = seg_hi;
        }
        if self.dom_lo > f64::NEG_INFINITY {
            out.push(self.dom_lo);
        }
        if self.dom_hi < f64::INFINITY {
            out.push(self.dom_hi);
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Samples of the subdifferential graph `{(x, x*, f(x))}` over
    /// `[win_lo, win_hi]`, with `x*` clipped to `[-cap, cap]` and vertical
    /// segments at kinks resolved by `kink_samples` interior subgradients.
    pub fn graph_triples(
        &self,
        win_lo: f64,
        win_hi: f64,
        x_count: usize,
        kink_samples: usize,
        cap: f64,
    ) -> Vec<(f64, f64, f64)> {
        let lo = win_lo.max(self.dom_lo);
        let hi = win_hi.min(self.dom_hi);
        if lo > hi {
            return vec![];
        }
        let mut xs: Vec<f64> = Vec::new();
        if hi > lo {
            let count = x_count.max(2);
            let step = (hi - lo) / (count - 1) as f64;
            xs.extend((0..count).map(|k| lo + k as f64 * step));
        } else {
            xs.push(lo);
        }
        xs.extend(self.cuts.iter().copied().filter(|t| *t >= lo && *t <= hi));
        if self.dom_lo >= lo && self.dom_lo <= hi {
            xs.push(self.dom_lo);
        }
        if self.dom_hi >= lo && self.dom_hi <= hi {
            xs.push(self.dom_hi);
        }
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() <= MERGE_TOL * (1.0 + a.abs()));
        let mut out = Vec::new();
        for x in xs {
            let Some((s_lo, s_hi)) = self.subdiff(x) else {
                continue;
            };
            let s_lo = s_lo.max(-cap);
            let s_hi = s_hi.min(cap);
            if s_lo > s_hi {
                continue;
            }
            let fx = self.value(x).unwrap_finite();
            if s_hi - s_lo <= MERGE_TOL * (1.0 + s_lo.abs()) {
                out.push((x, s_lo, fx));
            } else {
                let k = kink_samples.max(2);
                for j in 0..k {
                    let s = s_lo + (s_hi - s_lo) * j as f64 / (k - 1) as f64;
                    out.push((x, s, fx));
                }
            }
        }
        out
    }
}

fn representative(lo: f64, hi: f64) -> f64 {
    match (lo > f64::NEG_INFINITY, hi < f64::INFINITY) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo + 1.0,
        (false, true) => hi - 1.0,
        (false, false) => 0.0,
    }
}

fn close_ext(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true;
    }
    if a.is_infinite() || b.is_infinite() {
        return false;
    }
    (a - b).abs() <= tol * (1.0 + a.abs())
}
