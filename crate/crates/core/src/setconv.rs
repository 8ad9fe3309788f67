//! Painlevé–Kuratowski limits of sampled set sequences and epigraphical
//! limit estimation for function families.
//!
//! Set limits are measured as defects: `pk_liminf_defect` bounds how far
//! the target set is from being contained in the inner limit of the
//! sequence, `pk_limsup_defect` how far cluster points of the sequence
//! escape the target. Epigraphical lower/upper limits `f_l`, `f_u` are
//! estimated with a double ladder: for every radius `ε` of a decreasing
//! ladder, the inner minimum of `f_n` over the ball `B(x, ε)` is taken and
//! the tail liminf/limsup over the index ladder is formed; the estimate is
//! the supremum over rungs and the stabilization across rungs is the
//! convergence certificate.
//!
//! Inner minima run on a center-included uniform grid augmented with
//! salient points of the member (breakpoints, parabola vertices, argmin
//! and domain projections); in `d = 1` the window minima are exact. This
//! matters for slope families, whose dips at kink points have measure zero
//! and are invisible to plain pointwise sampling.

use crate::extreal::ExtReal;
use crate::funclib::{self, evaluate, ConvexSpec, FunclibError, FunctionSeq};
use crate::geom::{ball_grid, dist_to_cloud, BoxRegion, Point};
use crate::pwq1d::PwQuad;
use crate::slope::{self, SlopeError};
use crate::theorems::{Verdict, VerdictStatus, Witness};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SetconvError {
    #[error("need at least 6 sequence members to estimate a tail")]
    TooFewMembers,
    #[error("empty ladder")]
    EmptyLadder,
    #[error("witness index {0} is not part of the family ladder")]
    WitnessIndexUnknown(u32),
    #[error("slope family member is outside the exact classes")]
    SlopeUnavailable,
    #[error(transparent)]
    Funclib(#[from] FunclibError),
    #[error(transparent)]
    Slope(#[from] SlopeError),
}

/// Finite point cloud standing in for a set, with the covering resolution
/// the sampler guarantees on its reference box.
#[derive(Clone, Debug)]
pub struct SampledSet {
    pub points: Vec<Point>,
    pub resolution: f64,
    pub bounds: BoxRegion,
}

impl SampledSet {
    pub fn new(points: Vec<Point>, resolution: f64, bounds: BoxRegion) -> SampledSet {
        assert!(resolution > 0.0, "resolution must be positive");
        debug_assert!(points.iter().all(|p| bounds.contains(p, 1e-9)));
        SampledSet {
            points,
            resolution,
            bounds,
        }
    }

    pub fn from_points(points: Vec<Point>, resolution: f64) -> SampledSet {
        let bounds = BoxRegion::bounding(&points)
            .unwrap_or_else(|| BoxRegion::new(vec![0.0], vec![0.0]));
        SampledSet {
            points,
            resolution,
            bounds,
        }
    }
}

fn tail_start(len: usize) -> usize {
    len - len.div_ceil(3).max(1)
}

/// Max over target points of the tail-sup of `dist(x, S_n)`; near zero when
/// the target is contained in the inner limit at this resolution.
pub fn pk_liminf_defect(target: &SampledSet, seq: &[SampledSet]) -> Result<f64, SetconvError> {
    if seq.len() < 6 {
        return Err(SetconvError::TooFewMembers);
    }
    let tail = &seq[tail_start(seq.len())..];
    let per_point = crate::par::map_collect(&target.points, |x| {
        tail.iter()
            .map(|s| dist_to_cloud(x, &s.points))
            .fold(0.0f64, f64::max)
    });
    Ok(per_point.into_iter().fold(0.0, f64::max))
}

/// Max over recurring cluster candidates of their distance to the target;
/// near zero when every cluster point of the sequence lies in the target.
/// Candidates are sampled points recurring within `cluster_radius`
/// (default `3h`) across at least a third of the indices, at least once
/// inside the tail — points recurring only among early members are not
/// cluster points of the sequence.
pub fn pk_limsup_defect(
    target: &SampledSet,
    seq: &[SampledSet],
    cluster_radius: Option<f64>,
) -> Result<f64, SetconvError> {
    if seq.len() < 6 {
        return Err(SetconvError::TooFewMembers);
    }
    let h = seq.iter().map(|s| s.resolution).fold(0.0f64, f64::max);
    let tau = cluster_radius.unwrap_or(3.0 * h);
    let need = seq.len().div_ceil(3);
    let tail_from = tail_start(seq.len());
    let defects = crate::par::map_collect(seq, |member| {
        let mut worst = 0.0f64;
        for p in &member.points {
            let recurrences = seq
                .iter()
                .filter(|s| dist_to_cloud(p, &s.points) <= tau)
                .count();
            let in_tail = seq[tail_from..]
                .iter()
                .any(|s| dist_to_cloud(p, &s.points) <= tau);
            if recurrences >= need && in_tail {
                worst = worst.max(dist_to_cloud(p, &target.points));
            }
        }
        worst
    });
    Ok(defects.into_iter().fold(0.0, f64::max))
}

// ---- epigraphical limits ----------------------------------------------------

/// Which scalar field of the family the estimators see.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeqKind {
    /// The function values `f_n`.
    Value,
    /// The slope functions `s_{f_n}` (generally nonconvex; nothing here
    /// assumes convexity of the evaluated field).
    Slope,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpiSide {
    Lower,
    Upper,
}

#[derive(Clone, Debug)]
pub struct EpiConfig {
    /// Decreasing ball radii; the default is `2^0 .. 2^-8`.
    pub eps_ladder: Vec<f64>,
    /// Finite estimates above this, growing along the index tail, are
    /// treated as `+∞`.
    pub blow_up: f64,
    /// Minimal per-step growth factor confirming a blow-up.
    pub growth: f64,
    /// Ball grid budget per unit dimension; scaled as `17 · 2^d`.
    pub ball_budget_1d: usize,
}

impl Default for EpiConfig {
    fn default() -> Self {
        EpiConfig {
            eps_ladder: (0..=8).map(|j| 2f64.powi(-j)).collect(),
            blow_up: 1e6,
            growth: 1.10,
            ball_budget_1d: 17,
        }
    }
}

impl EpiConfig {
    fn budget(&self, dim: usize) -> usize {
        self.ball_budget_1d << dim
    }
}

#[derive(Clone, Debug)]
pub struct EpiRung {
    pub eps: f64,
    pub per_member: Vec<ExtReal>,
    pub tail_value: ExtReal,
    pub blown: bool,
}

impl EpiRung {
    pub fn effective(&self) -> ExtReal {
        if self.blown {
            ExtReal::PosInf
        } else {
            self.tail_value
        }
    }
}

#[derive(Clone, Debug)]
pub struct EpiLimitEstimate {
    pub point: Point,
    pub value: ExtReal,
    pub rungs: Vec<EpiRung>,
    pub stable: bool,
}

/// A family fixed for estimation: members with their exact univariate forms
/// (when `d = 1`) and salient minimizer data for the ball minima.
pub struct SeqView<'a> {
    seq: &'a FunctionSeq,
    kind: SeqKind,
    member_pwq: Vec<Option<PwQuad>>,
    limit_pwq: Option<PwQuad>,
    member_argmin: Vec<Option<Point>>,
    limit_argmin: Option<Point>,
}

#[derive(Clone, Copy, Debug)]
pub enum MemberRef {
    Pos(usize),
    Limit,
}

impl<'a> SeqView<'a> {
    pub fn new(seq: &'a FunctionSeq, kind: SeqKind) -> Result<SeqView<'a>, SetconvError> {
        let to_pwq = |spec: &ConvexSpec| {
            if spec.dim() == 1 {
                funclib::to_pwq1d(spec).ok()
            } else {
                None
            }
        };
        let member_pwq: Vec<_> = seq.members().iter().map(to_pwq).collect();
        let limit_pwq = to_pwq(seq.limit());
        if kind == SeqKind::Slope {
            // slope evaluation must be exact for every member
            let probe = Point::zeros(seq.dim());
            for (spec, pwq) in seq
                .members()
                .iter()
                .zip(&member_pwq)
                .chain(std::iter::once((seq.limit(), &limit_pwq)))
            {
                if pwq.is_none() {
                    match slope::slope_exact(spec, &probe) {
                        Ok(_) => {}
                        Err(SlopeError::NotExactClass) => {
                            return Err(SetconvError::SlopeUnavailable)
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
            }
        }
        let argmin_of = |spec: &ConvexSpec| funclib::infimum(spec).ok().and_then(|(_, w)| w);
        Ok(SeqView {
            member_argmin: seq.members().iter().map(argmin_of).collect(),
            limit_argmin: argmin_of(seq.limit()),
            seq,
            kind,
            member_pwq,
            limit_pwq,
        })
    }

    pub fn seq(&self) -> &FunctionSeq {
        self.seq
    }

    fn spec(&self, m: MemberRef) -> &ConvexSpec {
        match m {
            MemberRef::Pos(i) => self.seq.member(i),
            MemberRef::Limit => self.seq.limit(),
        }
    }

    fn pwq(&self, m: MemberRef) -> Option<&PwQuad> {
        match m {
            MemberRef::Pos(i) => self.member_pwq[i].as_ref(),
            MemberRef::Limit => self.limit_pwq.as_ref(),
        }
    }

    fn argmin(&self, m: MemberRef) -> Option<&Point> {
        match m {
            MemberRef::Pos(i) => self.member_argmin[i].as_ref(),
            MemberRef::Limit => self.limit_argmin.as_ref(),
        }
    }

    pub fn eval(&self, m: MemberRef, x: &Point) -> Result<ExtReal, SetconvError> {
        match self.kind {
            SeqKind::Value => Ok(evaluate(self.spec(m), x)?),
            SeqKind::Slope => match self.pwq(m) {
                Some(g) => Ok(g.slope(x[0])),
                None => Ok(slope::slope_exact(self.spec(m), x)?.value),
            },
        }
    }

    /// `min` of the member field over the closed ball `B(center, eps)`.
    pub fn ball_min(
        &self,
        m: MemberRef,
        center: &Point,
        eps: f64,
        cfg: &EpiConfig,
    ) -> Result<ExtReal, SetconvError> {
        if let Some(g) = self.pwq(m) {
            let (lo, hi) = (center[0] - eps, center[0] + eps);
            return Ok(match self.kind {
                SeqKind::Value => g.value_min_on(lo, hi),
                SeqKind::Slope => g.slope_min_on(lo, hi),
            });
        }
        let mut grid = ball_grid(center, eps, cfg.budget(self.spec(m).dim()));
        if let Some(am) = self.argmin(m) {
            if am.dist(center) <= eps {
                grid.push(am.clone());
            }
        }
        if let Some(pr) = funclib::exact_domain_projection(self.spec(m), center) {
            if pr.dist(center) <= eps {
                grid.push(pr);
            }
        }
        let mut best = ExtReal::PosInf;
        for p in &grid {
            best = best.min(self.eval(m, p)?);
        }
        Ok(best)
    }
}

fn tail_blown(tail: &[ExtReal], cfg: &EpiConfig) -> bool {
    let finite: Vec<f64> = tail.iter().filter_map(|v| v.value()).collect();
    if finite.len() < 3 || finite.len() != tail.len() {
        return false;
    }
    let k = finite.len();
    finite[k - 1] > cfg.blow_up
        && finite[k - 1] >= cfg.growth * finite[k - 2]
        && finite[k - 2] >= cfg.growth * finite[k - 3]
}

/// Estimates the lower (`φ_l`) or upper (`φ_u`) epigraphical limit of the
/// family field at `x`.
pub fn epi_limit(
    view: &SeqView,
    x: &Point,
    side: EpiSide,
    cfg: &EpiConfig,
    stab_tol: f64,
) -> Result<EpiLimitEstimate, SetconvError> {
    if cfg.eps_ladder.is_empty() {
        return Err(SetconvError::EmptyLadder);
    }
    let n = view.seq.len();
    let tail_from = tail_start(n);
    let mut rungs = Vec::with_capacity(cfg.eps_ladder.len());
    for &eps in &cfg.eps_ladder {
        let per_member = (0..n)
            .map(|i| view.ball_min(MemberRef::Pos(i), x, eps, cfg))
            .collect::<Result<Vec<_>, _>>()?;
        let tail = &per_member[tail_from..];
        let tail_value = match side {
            EpiSide::Lower => tail.iter().copied().min().unwrap(),
            EpiSide::Upper => tail.iter().copied().max().unwrap(),
        };
        let blown = tail_value.is_finite() && tail_blown(tail, cfg);
        rungs.push(EpiRung {
            eps,
            per_member,
            tail_value,
            blown,
        });
    }
    let value = rungs
        .iter()
        .map(EpiRung::effective)
        .max()
        .unwrap_or(ExtReal::PosInf);
    let stable = match rungs.len() {
        0 | 1 => true,
        k => {
            let a = rungs[k - 2].effective();
            let b = rungs[k - 1].effective();
            match (a, b) {
                (ExtReal::PosInf, ExtReal::PosInf) => true,
                (ExtReal::Finite(u), ExtReal::Finite(v)) => {
                    (u - v).abs() <= stab_tol.max(1e-12 * (1.0 + v.abs()))
                }
                _ => false,
            }
        }
    };
    Ok(EpiLimitEstimate {
        point: x.clone(),
        value,
        rungs,
        stable,
    })
}

/// Per-test-point epigraphical diagnostics.
#[derive(Clone, Debug)]
pub struct EpiPointDiag {
    pub point: Point,
    pub lower: ExtReal,
    pub upper: ExtReal,
    pub limit_value: ExtReal,
    pub status: VerdictStatus,
    pub stable: bool,
}

/// Does the family epi-converge to its declared limit? Checks
/// `f_l(x) ≈ f(x) ≈ f_u(x)` at every test point, `+∞` matching `+∞`
/// symbolically, with three-valued outcomes per point.
pub fn epi_converges(
    seq: &FunctionSeq,
    kind: SeqKind,
    test_points: &[Point],
    tol: f64,
    cfg: &EpiConfig,
) -> Result<(Verdict, Vec<EpiPointDiag>), SetconvError> {
    let view = SeqView::new(seq, kind)?;
    let diags_res: Vec<Result<EpiPointDiag, SetconvError>> =
        crate::par::map_collect(test_points, |x| {
            let lower = epi_limit(&view, x, EpiSide::Lower, cfg, tol)?;
            let upper = epi_limit(&view, x, EpiSide::Upper, cfg, tol)?;
            let limit_value = view.eval(MemberRef::Limit, x)?;
            let stable = lower.stable && upper.stable;
            let match_l = lower.value.approx_eq(limit_value, tol);
            let match_u = upper.value.approx_eq(limit_value, tol);
            let status = if match_l && match_u {
                if stable {
                    VerdictStatus::Holds
                } else {
                    VerdictStatus::Inconclusive
                }
            } else if stable {
                VerdictStatus::Fails
            } else {
                VerdictStatus::Inconclusive
            };
            Ok(EpiPointDiag {
                point: x.clone(),
                lower: lower.value,
                upper: upper.value,
                limit_value,
                status,
                stable,
            })
        });
    let mut diags = Vec::with_capacity(diags_res.len());
    for d in diags_res {
        diags.push(d?);
    }
    let verdict = aggregate_points(&diags, tol);
    Ok((verdict, diags))
}

fn aggregate_points(diags: &[EpiPointDiag], tol: f64) -> Verdict {
    let witness_of = |d: &EpiPointDiag| Witness {
        label: "epi-limits".into(),
        location: d.point.to_string(),
        detail: format!("f_l={} f_u={} f={}", d.lower, d.upper, d.limit_value),
    };
    let mut verdict = if let Some(bad) = diags.iter().find(|d| d.status == VerdictStatus::Fails) {
        Verdict::new(VerdictStatus::Fails, witness_of(bad))
    } else if let Some(shaky) = diags
        .iter()
        .find(|d| d.status == VerdictStatus::Inconclusive)
    {
        Verdict::new(VerdictStatus::Inconclusive, witness_of(shaky))
    } else if let Some(first) = diags.first() {
        Verdict::new(VerdictStatus::Holds, witness_of(first))
    } else {
        Verdict::new(
            VerdictStatus::Inconclusive,
            Witness {
                label: "epi-limits".into(),
                location: "-".into(),
                detail: "no test points".into(),
            },
        )
    };
    verdict.tolerances.push(("tol".into(), tol));
    verdict
}

/// Configuration shared by the witness-based diagnostics.
#[derive(Clone, Debug)]
pub struct WitnessConfig {
    /// Certificate bound for "bounded slopes".
    pub slope_bound: f64,
    pub epi: EpiConfig,
}

impl Default for WitnessConfig {
    fn default() -> Self {
        WitnessConfig {
            slope_bound: 1e3,
            epi: EpiConfig::default(),
        }
    }
}

/// Checks that a witness sequence with bounded slopes realizes the epi
/// limits at its limit point: `f_l(x̄) = liminf f_n(x_n)` and
/// `f_u(x̄) = limsup f_n(x_n)`.
pub fn tightness_check(
    seq: &FunctionSeq,
    witness: &[(u32, Point)],
    tol: f64,
    cfg: &WitnessConfig,
) -> Result<Verdict, SetconvError> {
    if witness.len() < 6 {
        return Err(SetconvError::TooFewMembers);
    }
    let positions = witness
        .iter()
        .map(|(n, _)| {
            seq.indices()
                .iter()
                .position(|i| i == n)
                .ok_or(SetconvError::WitnessIndexUnknown(*n))
        })
        .collect::<Result<Vec<_>, _>>()?;

    // precondition: slopes along the witness stay bounded
    let mut max_slope = 0.0f64;
    for ((_, x), &pos) in witness.iter().zip(&positions) {
        let s = slope::slope_exact(seq.member(pos), x)?;
        match s.value {
            ExtReal::Finite(v) => max_slope = max_slope.max(v),
            ExtReal::PosInf => {
                return Ok(Verdict::new(
                    VerdictStatus::PreconditionFailed,
                    Witness {
                        label: "witness slope".into(),
                        location: x.to_string(),
                        detail: "slope is +inf along the witness".into(),
                    },
                ))
            }
        }
    }
    if max_slope > cfg.slope_bound {
        return Ok(Verdict::new(
            VerdictStatus::PreconditionFailed,
            Witness {
                label: "witness slope".into(),
                location: format!("max slope {max_slope}"),
                detail: format!("exceeds the bound certificate {}", cfg.slope_bound),
            },
        ));
    }

    let xbar = witness.last().unwrap().1.clone();
    let values = witness
        .iter()
        .zip(&positions)
        .map(|((_, x), &pos)| evaluate(seq.member(pos), x))
        .collect::<Result<Vec<_>, _>>()?;
    let tail = &values[tail_start(values.len())..];
    if tail.iter().any(|v| !v.is_finite()) {
        return Ok(Verdict::new(
            VerdictStatus::PreconditionFailed,
            Witness {
                label: "witness values".into(),
                location: xbar.to_string(),
                detail: "witness leaves the effective domains".into(),
            },
        ));
    }
    let tail_liminf = tail.iter().copied().min().unwrap();
    let tail_limsup = tail.iter().copied().max().unwrap();

    let view = SeqView::new(seq, SeqKind::Value)?;
    let lower = epi_limit(&view, &xbar, EpiSide::Lower, &cfg.epi, tol)?;
    let upper = epi_limit(&view, &xbar, EpiSide::Upper, &cfg.epi, tol)?;
    let ok_l = lower.value.approx_eq(tail_liminf, tol);
    let ok_u = upper.value.approx_eq(tail_limsup, tol);
    let status = if ok_l && ok_u {
        VerdictStatus::Holds
    } else {
        VerdictStatus::Fails
    };
    let mut v = Verdict::new(
        status,
        Witness {
            label: "tightness".into(),
            location: xbar.to_string(),
            detail: format!(
                "f_l={} liminf={} | f_u={} limsup={}",
                lower.value, tail_liminf, upper.value, tail_limsup
            ),
        },
    );
    v.tolerances.push(("tol".into(), tol));
    Ok(v)
}

/// Domain sandwich: points with finite limit slope must have finite `f_l`
/// and `f_u`, and points with finite epi-limits must lie near the sampled
/// domain of the limit.
pub fn domain_sandwich_check(
    seq: &FunctionSeq,
    test_points: &[Point],
    tol: f64,
    cfg: &EpiConfig,
) -> Result<Verdict, SetconvError> {
    let view = SeqView::new(seq, SeqKind::Value)?;
    let dom_samples: Vec<Point> = test_points
        .iter()
        .filter(|x| {
            evaluate(seq.limit(), x)
                .map(|v| v.is_finite())
                .unwrap_or(false)
        })
        .cloned()
        .collect();
    // resolution of the sampled domain: largest nearest-neighbor gap
    let h_dom = test_points
        .iter()
        .map(|x| {
            test_points
                .iter()
                .filter(|y| *y != x)
                .map(|y| x.dist(y))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0f64, f64::max);
    let radius = if h_dom.is_finite() {
        3.0 * h_dom.max(1e-9)
    } else {
        1.0
    };

    for x in test_points {
        let s_limit = slope::slope_exact(seq.limit(), x)?.value;
        let lower = epi_limit(&view, x, EpiSide::Lower, cfg, tol)?.value;
        let upper = epi_limit(&view, x, EpiSide::Upper, cfg, tol)?.value;
        if s_limit.is_finite() && (!lower.is_finite() || !upper.is_finite()) {
            return Ok(Verdict::new(
                VerdictStatus::Fails,
                Witness {
                    label: "dom-slope inclusion".into(),
                    location: x.to_string(),
                    detail: format!("slope={s_limit} f_l={lower} f_u={upper}"),
                },
            ));
        }
        if (lower.is_finite() || upper.is_finite()) && !dom_samples.is_empty() {
            let d = dist_to_cloud(x, &dom_samples);
            if d > radius {
                return Ok(Verdict::new(
                    VerdictStatus::Fails,
                    Witness {
                        label: "dom-closure inclusion".into(),
                        location: x.to_string(),
                        detail: format!("distance {d} to sampled domain exceeds {radius}"),
                    },
                ));
            }
        }
    }
    Ok(Verdict::new(
        VerdictStatus::Holds,
        Witness {
            label: "domain sandwich".into(),
            location: format!("{} test points", test_points.len()),
            detail: format!("radius {radius}"),
        },
    ))
}

#[cfg(test)]
#[path = "setconv_tests.rs"]
mod tests;
