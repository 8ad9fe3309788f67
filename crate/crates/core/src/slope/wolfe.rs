//! Minimal-norm point in the convex hull of finitely many vertices,
//! by Wolfe's corral algorithm. Runs to exact termination on the vertex
//! sets used here (corrals never exceed `d + 1` affinely independent
//! vertices, vertex counts stay small).

use crate::geom::dot;
use crate::linalg;

const TOL: f64 = 1e-12;

/// Returns the point of `conv(vertices)` closest to the origin.
pub fn min_norm_point(vertices: &[Vec<f64>]) -> Vec<f64> {
    assert!(!vertices.is_empty(), "min_norm_point needs vertices");
    let dim = vertices[0].len();
    if vertices.len() == 1 {
        return vertices[0].clone();
    }
    // start from the vertex of least norm
    let mut start = 0;
    let mut best = f64::INFINITY;
    for (i, v) in vertices.iter().enumerate() {
        let n = dot(v, v);
        if n < best {
            best = n;
            start = i;
        }
    }
    let mut corral: Vec<usize> = vec![start];
    let mut weights: Vec<f64> = vec![1.0];
    let mut x = vertices[start].clone();

    for _ in 0..64 * vertices.len() {
        // optimality: every vertex v must satisfy <x, v> >= <x, x> - tol
        let xx = dot(&x, &x);
        let scale = 1.0 + xx;
        let mut best_j = None;
        let mut best_gap = -TOL * scale;
        for (j, v) in vertices.iter().enumerate() {
            let gap = dot(&x, v) - xx;
            if gap < best_gap {
                best_gap = gap;
                best_j = Some(j);
            }
        }
        let Some(j) = best_j else {
            return x;
        };
        if corral.contains(&j) {
            return x;
        }
        corral.push(j);
        weights.push(0.0);

        // minor cycle: project onto the affine hull of the corral, walk back
        // to the feasible boundary while some weight would go negative
        loop {
            match affine_min_norm(vertices, &corral) {
                None => {
                    // degenerate corral: drop the newest vertex
                    corral.pop();
                    weights.pop();
                    break;
                }
                Some(alpha) => {
                    if alpha.iter().all(|a| *a > TOL) {
                        weights = alpha;
                        break;
                    }
                    // largest feasible step from weights toward alpha
                    let mut theta = 1.0f64;
                    for (w, a) in weights.iter().zip(&alpha) {
                        if *a < TOL {
                            let denom = w - a;
                            if denom > 0.0 {
                                theta = theta.min(w / denom);
                            }
                        }
                    }
                    let mut next: Vec<f64> = weights
                        .iter()
                        .zip(&alpha)
                        .map(|(w, a)| w + theta * (a - w))
                        .collect();
                    // remove vertices whose weight hit zero
                    let mut keep_corral = Vec::new();
                    let mut keep_weights = Vec::new();
                    for (k, w) in next.drain(..).enumerate() {
                        if w > TOL {
                            keep_corral.push(corral[k]);
                            keep_weights.push(w);
                        }
                    }
                    if keep_corral.is_empty() {
                        // numerical corner: keep the best single vertex
                        keep_corral.push(corral[0]);
                        keep_weights.push(1.0);
                    }
                    corral = keep_corral;
                    weights = keep_weights;
                    let total: f64 = weights.iter().sum();
                    for w in &mut weights {
                        *w /= total;
                    }
                }
            }
        }
        x = combine(vertices, &corral, &weights, dim);
    }
    x
}

/// Distance from the origin to `conv(vertices)`.
pub fn min_norm_distance(vertices: &[Vec<f64>]) -> f64 {
    crate::geom::norm(&min_norm_point(vertices))
}

fn combine(vertices: &[Vec<f64>], corral: &[usize], weights: &[f64], dim: usize) -> Vec<f64> {
    let mut x = vec![0.0; dim];
    for (idx, w) in corral.iter().zip(weights) {
        for (xi, vi) in x.iter_mut().zip(&vertices[*idx]) {
            *xi += w * vi;
        }
    }
    x
}

/// Minimum-norm point of the affine hull of the corral, as barycentric
/// weights: solve `[2G 1; 1ᵀ 0] [α; μ] = [0; 1]`.
fn affine_min_norm(vertices: &[Vec<f64>], corral: &[usize]) -> Option<Vec<f64>> {
    let k = corral.len();
    let mut m = vec![vec![0.0; k + 1]; k + 1];
    let mut rhs = vec![0.0; k + 1];
    for (r, &i) in corral.iter().enumerate() {
        for (c, &j) in corral.iter().enumerate() {
            m[r][c] = 2.0 * dot(&vertices[i], &vertices[j]);
        }
        m[r][k] = 1.0;
        m[k][r] = 1.0;
    }
    rhs[k] = 1.0;
    let sol = linalg::solve(&m, &rhs).ok()?;
    Some(sol[..k].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::norm;

    /// Brute-force oracle: enumerate affinely independent subsets, solve the
    /// same barycentric system, keep feasible candidates.
    fn enumeration_oracle(vertices: &[Vec<f64>]) -> Vec<f64> {
        let m = vertices.len();
        let dim = vertices[0].len();
        let mut best: Option<(f64, Vec<f64>)> = None;
        let max_k = (dim + 1).min(m);
        let mut stack: Vec<usize> = vec![];
        fn rec(
            start: usize,
            m: usize,
            max_k: usize,
            stack: &mut Vec<usize>,
            f: &mut impl FnMut(&[usize]),
        ) {
            if !stack.is_empty() {
                f(stack);
            }
            if stack.len() == max_k {
                return;
            }
            for i in start..m {
                stack.push(i);
                rec(i + 1, m, max_k, stack, f);
                stack.pop();
            }
        }
        rec(0, m, max_k, &mut stack, &mut |set| {
            if let Some(alpha) = affine_min_norm(vertices, set) {
                if alpha.iter().all(|a| *a >= -1e-10) {
                    let x = combine(vertices, set, &alpha, dim);
                    let n = norm(&x);
                    if best.as_ref().is_none_or(|(b, _)| n < *b) {
                        best = Some((n, x));
                    }
                }
            }
        });
        best.unwrap().1
    }

    #[test]
    fn simple_hulls() {
        // hull {1, 2} on the line: closest to 0 is 1
        let x = min_norm_point(&[vec![1.0], vec![2.0]]);
        assert!((x[0] - 1.0).abs() < 1e-12);
        // hull containing the origin
        let x = min_norm_point(&[vec![-1.0], vec![1.0]]);
        assert!(x[0].abs() < 1e-12);
        // triangle away from the origin in 2-d
        let x = min_norm_point(&[vec![1.0, 1.0], vec![2.0, 1.0], vec![1.0, 2.0]]);
        assert!((x[0] - 1.0).abs() < 1e-10 && (x[1] - 1.0).abs() < 1e-10);
        // segment crossing an axis: projection onto it
        let x = min_norm_point(&[vec![-1.0, 1.0], vec![1.0, 1.0]]);
        assert!(x[0].abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_enumeration_on_random_polytopes() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for trial in 0..300 {
            let dim = 1 + trial % 3;
            let count = 1 + (trial % 7);
            let vertices: Vec<Vec<f64>> = (0..count)
                .map(|_| (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect();
            let fast = min_norm_point(&vertices);
            let brute = enumeration_oracle(&vertices);
            assert!(
                (norm(&fast) - norm(&brute)).abs() < 1e-8,
                "trial {trial}: wolfe {} vs enumeration {}",
                norm(&fast),
                norm(&brute)
            );
        }
    }
}
