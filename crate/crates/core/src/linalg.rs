//! Dense linear algebra for tiny systems (`n <= ~8`): Gaussian elimination
//! with partial pivoting and a Jacobi eigenvalue sweep for symmetric
//! matrices. Enough for the quadratic forms and Gram systems in this crate.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("singular system (pivot below tolerance)")]
    Singular,
    #[error("matrix is not symmetric")]
    NotSymmetric,
}

/// Row-major square matrix as nested Vec; sizes here are tiny.
pub type Mat = Vec<Vec<f64>>;

pub fn mat_vec(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    m.iter().map(|row| crate::geom::dot(row, x)).collect()
}

pub fn is_symmetric(m: &[Vec<f64>], tol: f64) -> bool {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return false;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let scale = 1.0 + m[i][j].abs().max(m[j][i].abs());
            if (m[i][j] - m[j][i]).abs() > tol * scale {
                return false;
            }
        }
    }
    true
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().map(|r| r.to_vec()).collect();
    let mut rhs = b.to_vec();
    let scale: f64 = m
        .iter()
        .flat_map(|r| r.iter().map(|v| v.abs()))
        .fold(0.0, f64::max)
        .max(1.0);
    for col in 0..n {
        let (piv, piv_val) = (col..n)
            .map(|r| (r, m[r][col].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if piv_val <= 1e-13 * scale {
            return Err(LinalgError::Singular);
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in (col + 1)..n {
            let f = m[r][col] / m[col][col];
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for c in (row + 1)..n {
            acc -= m[row][c] * x[c];
        }
        x[row] = acc / m[row][row];
    }
    Ok(x)
}

/// Eigenvalues and eigenvectors of a symmetric matrix via cyclic Jacobi
/// rotations. Returns `(eigenvalues, columns)` with `A v_k = λ_k v_k`.
pub fn sym_eigen(a: &[Vec<f64>]) -> Result<(Vec<f64>, Mat), LinalgError> {
    if !is_symmetric(a, 1e-9) {
        return Err(LinalgError::NotSymmetric);
    }
    let n = a.len();
    let mut m: Mat = a.iter().map(|r| r.to_vec()).collect();
    let mut v: Mat = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i][j] * m[i][j];
            }
        }
        if off.sqrt() < 1e-14 * (1.0 + frobenius(&m)) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let eigs = (0..n).map(|i| m[i][i]).collect();
    Ok((eigs, v))
}

fn frobenius(m: &[Vec<f64>]) -> f64 {
    m.iter()
        .flat_map(|r| r.iter().map(|v| v * v))
        .sum::<f64>()
        .sqrt()
}

/// Positive semidefiniteness check with a relative slack.
pub fn is_psd(a: &[Vec<f64>], tol: f64) -> Result<bool, LinalgError> {
    let (eigs, _) = sym_eigen(a)?;
    let scale = eigs.iter().fold(1.0f64, |m, e| m.max(e.abs()));
    Ok(eigs.iter().all(|e| *e >= -tol * scale))
}
