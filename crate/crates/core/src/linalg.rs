//! Small dense linear algebra: square matrices, cyclic Jacobi eigenvalues,
//! LU determinants and numerical rank.

use std::ops::{Index, IndexMut};

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    n: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        Self::from_fn(n, |i, j| rows[i][j])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry of `|A − Aᵀ|`.
    pub fn asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..i {
                m = m.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        m
    }

    pub fn symmetrized(&self) -> Self {
        Self::from_fn(self.n, |i, j| 0.5 * (self[(i, j)] + self[(j, i)]))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Submatrix keeping the listed rows/columns.
    pub fn select(&self, keep: &[usize]) -> Self {
        Self::from_fn(keep.len(), |i, j| self[(keep[i], keep[j])])
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
/// ascending. Only the lower triangle is read.
pub fn symmetric_eigenvalues(a: &Mat) -> Vec<f64> {
    let n = a.dim();
    let mut m = Mat::from_fn(n, |i, j| if i >= j { a[(i, j)] } else { a[(j, i)] });
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..i {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Determinant by LU with partial pivoting.
pub fn determinant(a: &Mat) -> f64 {
    let n = a.dim();
    let mut m = a.clone();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[(i, col)].abs().total_cmp(&m[(j, col)].abs()))
            .unwrap_or(col);
        if m[(piv, col)] == 0.0 {
            return 0.0;
        }
        if piv != col {
            for k in 0..n {
                let tmp = m[(col, k)];
                m[(col, k)] = m[(piv, k)];
                m[(piv, k)] = tmp;
            }
            det = -det;
        }
        let d = m[(col, col)];
        det *= d;
        for r in (col + 1)..n {
            let f = m[(r, col)] / d;
            for k in col..n {
                m[(r, k)] -= f * m[(col, k)];
            }
        }
    }
    det
}

/// Numerical rank of a set of vectors: modified Gram–Schmidt with column
/// pivoting; a residual below `rel_tol` times the largest input norm counts
/// as dependent. Returns the rank and an orthonormal basis of the span.
pub fn rank_and_basis(vectors: &[Vec<f64>], rel_tol: f64) -> (usize, Vec<Vec<f64>>) {
    let scale = vectors
        .iter()
        .map(|v| norm(v))
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut work: Vec<Vec<f64>> = vectors.to_vec();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    loop {
        let best = work
            .iter()
            .enumerate()
            .map(|(i, v)| (i, norm(v)))
            .max_by(|a, b| a.1.total_cmp(&b.1));
        let Some((i, nrm)) = best else { break };
        if nrm <= rel_tol * scale {
            break;
        }
        let q: Vec<f64> = work[i].iter().map(|x| x / nrm).collect();
        work.remove(i);
        for v in work.iter_mut() {
            let d = dot(v, &q);
            v.iter_mut().zip(&q).for_each(|(a, b)| *a -= d * b);
        }
        basis.push(q);
    }
    (basis.len(), basis)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_on_known_spectrum() {
        // Q diag(1,2,5) Qᵀ with a rotation in the (0,2) plane.
        let (c, s) = (0.6_f64, 0.8_f64);
        let a = Mat::from_rows(&[
            vec![c * c * 1.0 + s * s * 5.0, 0.0, c * s * (5.0 - 1.0)],
            vec![0.0, 2.0, 0.0],
            vec![c * s * (5.0 - 1.0), 0.0, s * s * 1.0 + c * c * 5.0],
        ]);
        let ev = symmetric_eigenvalues(&a);
        for (e, x) in ev.iter().zip([1.0, 2.0, 5.0]) {
            assert!((e - x).abs() < 1e-13, "{ev:?}");
        }
    }

    #[test]
    fn jacobi_degenerate_and_empty() {
        let ev = symmetric_eigenvalues(&Mat::identity(4));
        assert_eq!(ev, vec![1.0; 4]);
        assert!(symmetric_eigenvalues(&Mat::zeros(0)).is_empty());
    }

    #[test]
    fn determinant_of_symplectic_block() {
        let n = 3;
        let j = Mat::from_fn(2 * n, |i, k| {
            if i < n && k == i + n {
                -1.0
            } else if i >= n && k + n == i {
                1.0
            } else {
                0.0
            }
        });
        assert!((determinant(&j) - 1.0).abs() < 1e-15);
        let mut m = Mat::identity(3);
        m[(0, 1)] = 2.0;
        m[(2, 2)] = -4.0;
        assert!((determinant(&m) + 4.0).abs() < 1e-15);
    }

    #[test]
    fn rank_detects_dependence() {
        let v = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![1.0, 1.0, 1e-14],
        ];
        assert_eq!(rank_and_basis(&v, 1e-10).0, 2);
        assert_eq!(rank_and_basis(&v, 1e-16).0, 3);
    }
}
