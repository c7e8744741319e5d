//! Thin singular value decomposition by one-sided (Hestenes) Jacobi rotations.
//!
//! Pairs of columns are rotated until every pair is orthogonal to working
//! precision. The column norms are then the singular values. Jacobi is slower
//! than bidiagonalisation for large matrices but attains high relative
//! accuracy on every singular triplet, including the small ones, which keeps
//! full-rank reconstructions exact.

/// Relative orthogonality threshold `|<x, y>| <= TOL * |x| |y|`.
const ORTHOGONALITY_TOL: f64 = 1e-15;
pub const MAX_SWEEPS: usize = 1000;

/// `A = U diag(s) V^T` for an `m x n` matrix, stored column-major.
///
/// `u` has `min(m, n)` columns of length `m`, `v` has `min(m, n)` columns of
/// length `n`. Singular values are sorted non-increasing. Columns of `u`
/// that belong to a zero singular value are zero.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: Vec<Vec<f64>>,
    pub s: Vec<f64>,
    pub v: Vec<Vec<f64>>,
    pub sweeps: usize,
}

impl ThinSvd {
    /// Number of singular values above the usual `max(m, n) * eps * s_max`
    /// noise floor.
    pub fn numerical_rank(&self, rows: usize, cols: usize) -> usize {
        let Some(&largest) = self.s.first() else {
            return 0;
        };
        if largest == 0.0 {
            return 0;
        }
        let floor = largest * rows.max(cols) as f64 * f64::EPSILON;
        self.s.iter().take_while(|&&x| x > floor).count()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn rotate(cols: &mut [Vec<f64>], i: usize, j: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(j);
    for (x, y) in lo[i].iter_mut().zip(hi[0].iter_mut()) {
        let (xi, yj) = (*x, *y);
        *x = c * xi - s * yj;
        *y = s * xi + c * yj;
    }
}

/// Orthogonalises `w` in place and accumulates the rotations into `v`.
/// Returns the number of sweeps performed.
fn one_sided_jacobi(w: &mut [Vec<f64>], v: &mut [Vec<f64>]) -> usize {
    let n = w.len();
    for sweep in 1..=MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let a = dot(&w[i], &w[i]);
                let b = dot(&w[j], &w[j]);
                let d = dot(&w[i], &w[j]);
                if a == 0.0 || b == 0.0 || d.abs() <= ORTHOGONALITY_TOL * (a * b).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (b - a) / (2.0 * d);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(w, i, j, c, s);
                rotate(v, i, j, c, s);
            }
        }
        if !rotated {
            return sweep;
        }
    }
    MAX_SWEEPS
}

fn transpose(columns: &[Vec<f64>], rows: usize) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|r| columns.iter().map(|c| c[r]).collect())
        .collect()
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect()
}

/// Computes the thin SVD of the `rows x columns.len()` matrix whose columns
/// are given.
pub fn thin_svd(columns: &[Vec<f64>], rows: usize) -> ThinSvd {
    debug_assert!(columns.iter().all(|c| c.len() == rows));
    let n = columns.len();
    // Jacobi works on the shorter side: rotate the columns of A when
    // rows >= cols, otherwise the columns of A^T and swap the factors.
    let tall = rows >= n;
    let mut w = if tall {
        columns.to_vec()
    } else {
        transpose(columns, rows)
    };
    let k = w.len();
    let mut right = identity(k);
    let sweeps = one_sided_jacobi(&mut w, &mut right);

    let mut order: Vec<usize> = (0..k).collect();
    let norms: Vec<f64> = w.iter().map(|c| norm(c)).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));

    let mut s = Vec::with_capacity(k);
    let mut left = Vec::with_capacity(k);
    let mut right_sorted = Vec::with_capacity(k);
    for &idx in &order {
        let sigma = norms[idx];
        s.push(sigma);
        left.push(if sigma > 0.0 {
            w[idx].iter().map(|x| x / sigma).collect()
        } else {
            vec![0.0; w[idx].len()]
        });
        right_sorted.push(std::mem::take(&mut right[idx]));
    }

    let (u, v) = if tall {
        (left, right_sorted)
    } else {
        (right_sorted, left)
    };
    ThinSvd { u, s, v, sweeps }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(svd: &ThinSvd, rows: usize, cols: usize) -> Vec<Vec<f64>> {
        (0..cols)
            .map(|j| {
                (0..rows)
                    .map(|i| {
                        svd.s
                            .iter()
                            .enumerate()
                            .map(|(k, s)| svd.u[k][i] * s * svd.v[k][j])
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }

    fn assert_close(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) {
        for (ca, cb) in a.iter().zip(b) {
            for (x, y) in ca.iter().zip(cb) {
                assert!((x - y).abs() < tol, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn diagonal_matrix() {
        let cols = vec![vec![3.0, 0.0], vec![0.0, 5.0]];
        let svd = thin_svd(&cols, 2);
        assert_eq!(svd.s, vec![5.0, 3.0]);
        assert_close(&reconstruct(&svd, 2, 2), &cols, 1e-14);
    }

    #[test]
    fn tall_and_wide_reconstruct() {
        // 4 x 3
        let tall = vec![
            vec![1.0, 2.0, 0.0, 1.0],
            vec![0.0, 1.0, 3.0, 1.0],
            vec![2.0, 0.0, 1.0, 4.0],
        ];
        let svd = thin_svd(&tall, 4);
        assert_close(&reconstruct(&svd, 4, 3), &tall, 1e-12);
        // 2 x 3
        let wide = vec![vec![1.0, 4.0], vec![2.0, 5.0], vec![3.0, 6.0]];
        let svd = thin_svd(&wide, 2);
        assert_eq!(svd.s.len(), 2);
        assert_close(&reconstruct(&svd, 2, 3), &wide, 1e-12);
        // Known singular values of [[1,2,3],[4,5,6]].
        assert!((svd.s[0] - 9.508032000695723).abs() < 1e-12);
        assert!((svd.s[1] - 0.7728696356734838).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient() {
        let cols = vec![vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]];
        let svd = thin_svd(&cols, 3);
        assert_eq!(svd.numerical_rank(3, 2), 1);
        assert!(svd.s[1].abs() < 1e-12);
        assert_close(&reconstruct(&svd, 3, 2), &cols, 1e-12);
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let svd = thin_svd(&[vec![0.0, 0.0]], 2);
        assert_eq!(svd.numerical_rank(2, 1), 0);
        assert_eq!(svd.s, vec![0.0]);
    }

    #[test]
    fn right_vectors_are_orthonormal() {
        let cols: Vec<Vec<f64>> = (0..5)
            .map(|j| (0..7).map(|i| ((i * 7 + j * 3) % 11) as f64 - 4.0).collect())
            .collect();
        let svd = thin_svd(&cols, 7);
        for a in 0..5 {
            for b in 0..5 {
                let d = dot(&svd.v[a], &svd.v[b]);
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-12);
            }
        }
        assert!(svd.s.windows(2).all(|w| w[0] >= w[1]));
    }
}
