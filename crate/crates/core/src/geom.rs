//! Points, boxes and sampling grids on `R^d` (small `d`).

use serde::{Deserialize, Serialize};

/// A point of `R^d`. Dimension is fixed per experiment and small (`d <= 4`
/// in the shipped corpus).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Point {
        assert!(!coords.is_empty(), "points need dimension >= 1");
        Point { coords }
    }

    pub fn scalar(x: f64) -> Point {
        Point { coords: vec![x] }
    }

    pub fn zeros(dim: usize) -> Point {
        Point {
            coords: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coords
    }

    pub fn norm(&self) -> f64 {
        norm(&self.coords)
    }

    pub fn dist(&self, other: &Point) -> f64 {
        dist(&self.coords, &other.coords)
    }

    pub fn dot(&self, other: &Point) -> f64 {
        dot(&self.coords, other.as_slice())
    }

    /// `self + t * dir`
    pub fn add_scaled(&self, t: f64, dir: &[f64]) -> Point {
        let coords = self
            .coords
            .iter()
            .zip(dir)
            .map(|(a, d)| a + t * d)
            .collect();
        Point { coords }
    }

    pub fn sub(&self, other: &Point) -> Vec<f64> {
        self.coords
            .iter()
            .zip(other.as_slice())
            .map(|(a, b)| a - b)
            .collect()
    }
}

impl std::ops::Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

impl std::fmt::Display for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Axis-aligned box `[lo, hi]`, possibly degenerate in some coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> BoxRegion {
        assert_eq!(lo.len(), hi.len());
        assert!(lo.iter().zip(&hi).all(|(l, h)| l <= h), "box needs lo <= hi");
        BoxRegion { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, p: &Point, slack: f64) -> bool {
        p.as_slice()
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (l, h))| *x >= l - slack && *x <= h + slack)
    }

    pub fn clamp(&self, p: &Point) -> Point {
        Point::new(
            p.as_slice()
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .map(|(x, (l, h))| x.clamp(*l, *h))
                .collect(),
        )
    }

    /// Smallest box containing both.
    pub fn hull(&self, other: &BoxRegion) -> BoxRegion {
        BoxRegion::new(
            self.lo
                .iter()
                .zip(&other.lo)
                .map(|(a, b)| a.min(*b))
                .collect(),
            self.hi
                .iter()
                .zip(&other.hi)
                .map(|(a, b)| a.max(*b))
                .collect(),
        )
    }

    pub fn bounding(points: &[Point]) -> Option<BoxRegion> {
        let first = points.first()?;
        let mut lo = first.as_slice().to_vec();
        let mut hi = lo.clone();
        for p in points {
            for (i, x) in p.as_slice().iter().enumerate() {
                lo[i] = lo[i].min(*x);
                hi[i] = hi[i].max(*x);
            }
        }
        Some(BoxRegion::new(lo, hi))
    }
}

/// Uniform Cartesian grid on a box, `per_axis` nodes per axis (inclusive of
/// both faces).
pub fn grid_on_box(region: &BoxRegion, per_axis: usize) -> Vec<Point> {
    assert!(per_axis >= 1);
    let d = region.dim();
    let axis_nodes: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            if per_axis == 1 || region.lo[i] == region.hi[i] {
                vec![0.5 * (region.lo[i] + region.hi[i])]
            } else {
                let step = (region.hi[i] - region.lo[i]) / (per_axis - 1) as f64;
                (0..per_axis).map(|k| region.lo[i] + k as f64 * step).collect()
            }
        })
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; d];
    loop {
        out.push(Point::new(
            (0..d).map(|i| axis_nodes[i][idx[i]]).collect(),
        ));
        let mut c = 0;
        loop {
            idx[c] += 1;
            if idx[c] < axis_nodes[c].len() {
                break;
            }
            idx[c] = 0;
            c += 1;
            if c == d {
                return out;
            }
        }
    }
}

/// Deterministic sampling grid for the closed ball `B(center, eps)`: the
/// cube grid intersected with the ball. The center is always a node and the
/// per-axis count is odd, so minima at the center are seen exactly.
pub fn ball_grid(center: &Point, eps: f64, budget: usize) -> Vec<Point> {
    assert!(eps > 0.0);
    let d = center.dim();
    let mut per_axis = (budget as f64).powf(1.0 / d as f64).ceil() as usize;
    per_axis = per_axis.max(3);
    if per_axis % 2 == 0 {
        per_axis += 1;
    }
    let region = BoxRegion::new(
        center.as_slice().iter().map(|c| c - eps).collect(),
        center.as_slice().iter().map(|c| c + eps).collect(),
    );
    grid_on_box(&region, per_axis)
        .into_iter()
        .filter(|p| p.dist(center) <= eps * (1.0 + 1e-12))
        .collect()
}

/// Minimal distance from `p` to a finite point cloud; `+inf` when empty.
pub fn dist_to_cloud(p: &Point, cloud: &[Point]) -> f64 {
    cloud
        .iter()
        .map(|q| p.dist(q))
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_grid_contains_center() {
        let c = Point::new(vec![0.25, -0.5]);
        let grid = ball_grid(&c, 0.3, 68);
        assert!(grid.iter().any(|p| p.dist(&c) < 1e-15));
        assert!(grid.iter().all(|p| p.dist(&c) <= 0.3 * (1.0 + 1e-9)));
    }

    #[test]
    fn box_grid_covers_faces() {
        let region = BoxRegion::new(vec![-1.0], vec![1.0]);
        let grid = grid_on_box(&region, 21);
        assert_eq!(grid.len(), 21);
        assert_eq!(grid[0][0], -1.0);
        assert_eq!(grid[20][0], 1.0);
    }

    #[test]
    fn degenerate_box_is_a_point() {
        let region = BoxRegion::new(vec![0.0, 1.0], vec![0.0, 1.0]);
        let grid = grid_on_box(&region, 5);
        assert_eq!(grid.len(), 1);
    }
}
