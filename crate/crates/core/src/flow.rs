//! Steepest-descent curves by the minimizing-movement scheme.
//!
//! The trajectory is the implicit Euler recursion `x_{k+1} = prox_{h f}(x_k)`:
//! unconditionally stable, value-monotone by construction, and every step is
//! an exact proximal solve, so kinks need no special handling. Arrival is
//! declared once a step moves less than `1e-12`; the curve is constant
//! afterwards.

use crate::extreal::ExtReal;
use crate::funclib::{self, evaluate, prox, ConvexSpec, FunclibError};
use crate::geom::Point;
use crate::slope::{self, SlopeError};
use crate::theorems::{Verdict, VerdictStatus, Witness};
use thiserror::Error;

/// Displacement below which the motion is considered stopped.
pub const ARRIVAL_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("start point is outside the domain and no exact projection exists")]
    UnreachableStart,
    #[error("step size and horizon must be positive")]
    BadStep,
    #[error("trajectory has no slope entries at step {0}")]
    MissingSlope(usize),
    #[error("slope is +inf along the trajectory at step {0}")]
    InfiniteSlope(usize),
    #[error(transparent)]
    Funclib(#[from] FunclibError),
    #[error(transparent)]
    Slope(#[from] SlopeError),
}

/// Discrete steepest-descent curve with values and slopes along it.
#[derive(Clone, Debug)]
pub struct DescentTrajectory {
    pub step: f64,
    pub times: Vec<f64>,
    pub points: Vec<Point>,
    pub values: Vec<ExtReal>,
    pub slopes: Vec<Option<ExtReal>>,
    /// First index where the motion stopped, when it did.
    pub arrival: Option<usize>,
}

impl DescentTrajectory {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn final_point(&self) -> &Point {
        self.points.last().unwrap()
    }

    pub fn final_value(&self) -> ExtReal {
        *self.values.last().unwrap()
    }

    /// Total polygonal length.
    pub fn length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[0].dist(&w[1]))
            .sum()
    }

    /// CSV rows `k,t,x...,f,slope`.
    pub fn to_csv(&self) -> String {
        let dim = self.points.first().map(|p| p.dim()).unwrap_or(0);
        let mut out = String::from("k,t");
        for i in 0..dim {
            out.push_str(&format!(",x{i}"));
        }
        out.push_str(",f,slope\n");
        for k in 0..self.len() {
            out.push_str(&format!("{k},{}", self.times[k]));
            for c in self.points[k].as_slice() {
                out.push_str(&format!(",{c}"));
            }
            let slope = match &self.slopes[k] {
                Some(s) => s.to_string(),
                None => String::from(""),
            };
            out.push_str(&format!(",{},{slope}\n", self.values[k]));
        }
        out
    }
}

/// Runs the implicit proximal scheme from `x0` with step `h` up to time
/// `t_end`. The start is projected onto the domain when an exact projection
/// exists; otherwise starting outside is an error.
pub fn descend(
    spec: &ConvexSpec,
    x0: &Point,
    h: f64,
    t_end: f64,
) -> Result<DescentTrajectory, FlowError> {
    if !(h > 0.0) || !(t_end > 0.0) {
        return Err(FlowError::BadStep);
    }
    let mut start = x0.clone();
    if !evaluate(spec, &start)?.is_finite() {
        match funclib::exact_domain_projection(spec, &start) {
            Some(p) if evaluate(spec, &p)?.is_finite() => start = p,
            _ => return Err(FlowError::UnreachableStart),
        }
    }
    let steps = (t_end / h).ceil() as usize;
    let mut points = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    let mut slopes = Vec::with_capacity(steps + 1);
    let mut times = Vec::with_capacity(steps + 1);
    let slope_of = |x: &Point| match slope::slope_exact(spec, x) {
        Ok(s) => Some(s.value),
        Err(SlopeError::NotExactClass) => None,
        Err(_) => None,
    };
    let mut current = start;
    let mut arrival = None;
    points.push(current.clone());
    values.push(evaluate(spec, &current)?);
    slopes.push(slope_of(&current));
    times.push(0.0);
    for k in 0..steps {
        let next = if arrival.is_some() {
            current.clone()
        } else {
            let p = prox(spec, h, &current)?;
            if p.dist(&current) < ARRIVAL_TOL {
                arrival = Some(k + 1);
                // stationary from here on
                p
            } else {
                p
            }
        };
        points.push(next.clone());
        values.push(evaluate(spec, &next)?);
        slopes.push(slope_of(&next));
        times.push((k + 1) as f64 * h);
        current = next;
    }
    Ok(DescentTrajectory {
        step: h,
        times,
        points,
        values,
        slopes,
        arrival,
    })
}

/// `|f(γ(0)) - f(γ(T)) - Σ_k h s_f(x_k)²|` with left-endpoint quadrature;
/// `O(h)` on smooth inputs.
pub fn energy_identity_defect(traj: &DescentTrajectory) -> Result<f64, FlowError> {
    let first = traj
        .values
        .first()
        .and_then(|v| v.value())
        .ok_or(FlowError::MissingSlope(0))?;
    let last = traj
        .final_value()
        .value()
        .ok_or(FlowError::MissingSlope(traj.len() - 1))?;
    let mut quad = 0.0;
    for k in 0..traj.len() - 1 {
        let s = traj.slopes[k].ok_or(FlowError::MissingSlope(k))?;
        match s {
            ExtReal::Finite(v) => quad += traj.step * v * v,
            ExtReal::PosInf => return Err(FlowError::InfiniteSlope(k)),
        }
    }
    Ok((first - last - quad).abs())
}

/// Validates that a trajectory with integrable slope of `g` along it drives
/// `g` to its infimum: discrete surrogates of the integrability hypotheses,
/// then the tail values against the exact `inf g`.
pub fn infimizing_check(
    traj: &DescentTrajectory,
    g: &ConvexSpec,
    tol: f64,
) -> Result<Verdict, FlowError> {
    let (inf_g, _) = funclib::infimum(g)?;
    let mut slopes_g = Vec::with_capacity(traj.len());
    for x in &traj.points {
        slopes_g.push(slope::slope_exact(g, x)?.value);
    }
    // hypothesis: liminf of the slope along the curve reaches ~0
    let tail_from = traj.len() - traj.len().div_ceil(3).max(1);
    let tail_min_slope = slopes_g[tail_from..]
        .iter()
        .copied()
        .min()
        .unwrap_or(ExtReal::PosInf);
    let slope_ok = matches!(tail_min_slope, ExtReal::Finite(v) if v <= tol.max(1e-6));
    // hypothesis: path integral of the slope stays finite
    let mut integral = 0.0;
    for k in 0..traj.len() - 1 {
        match slopes_g[k] {
            ExtReal::Finite(v) => integral += v * traj.points[k].dist(&traj.points[k + 1]),
            ExtReal::PosInf => return Err(FlowError::InfiniteSlope(k)),
        }
    }
    if !slope_ok || !integral.is_finite() {
        return Ok(Verdict::new(
            VerdictStatus::PreconditionFailed,
            Witness {
                label: "infimizing".into(),
                location: format!("tail min slope {tail_min_slope}"),
                detail: format!("integral {integral}"),
            },
        ));
    }
    let tail_values: Vec<f64> = traj.points[tail_from..]
        .iter()
        .map(|x| evaluate(g, x).map(|v| v.to_f64()))
        .collect::<Result<Vec<_>, _>>()?;
    let tail_liminf = tail_values.iter().copied().fold(f64::INFINITY, f64::min);
    let ok = (tail_liminf - inf_g).abs() <= tol;
    let mut v = Verdict::new(
        if ok { VerdictStatus::Holds } else { VerdictStatus::Fails },
        Witness {
            label: "infimizing".into(),
            location: traj.final_point().to_string(),
            detail: format!("tail liminf {tail_liminf} vs inf g = {inf_g}"),
        },
    );
    v.tolerances.push(("tol".into(), tol));
    Ok(v)
}

/// Final-state check of the descent: value reaches `inf f`, slope vanishes,
/// and the curve has finite length with a stationary limit point.
pub fn flow_limit_check(
    traj: &DescentTrajectory,
    spec: &ConvexSpec,
    tol: f64,
) -> Result<Verdict, FlowError> {
    let (inf_f, _) = funclib::infimum(spec)?;
    let final_value = traj
        .final_value()
        .value()
        .ok_or(FlowError::MissingSlope(traj.len() - 1))?;
    let final_slope = traj
        .slopes
        .last()
        .cloned()
        .flatten()
        .ok_or(FlowError::MissingSlope(traj.len() - 1))?;
    let value_ok = (final_value - inf_f).abs() <= tol;
    let slope_ok = matches!(final_slope, ExtReal::Finite(v) if v <= tol);
    let length = traj.length();
    let ok = value_ok && slope_ok && length.is_finite();
    let mut v = Verdict::new(
        if ok { VerdictStatus::Holds } else { VerdictStatus::Fails },
        Witness {
            label: "flow-limit".into(),
            location: traj.final_point().to_string(),
            detail: format!(
                "final value {final_value} (inf {inf_f}), final slope {final_slope}, length {length}"
            ),
        },
    );
    v.tolerances.push(("tol".into(), tol));
    Ok(v)
}

#[cfg(test)]
#[path = "flow_tests.rs"]
mod tests;
