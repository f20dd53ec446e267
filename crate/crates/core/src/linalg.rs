//! Dense matrices and a cyclic-Jacobi symmetric eigensolver.
//!
//! Verification-scale lattices stay below a few hundred points, so dense
//! storage and O(n^3) sweeps are the right trade.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("jacobi eigensolver did not converge within {0} sweeps")]
    ConvergenceFailure(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn transpose(&self) -> Matrix {
        let n = self.n;
        let mut t = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                t.data[j * n + i] = self.data[i * n + j];
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                let orow = &mut out.data[i * n..(i + 1) * n];
                for (o, &r) in orow.iter_mut().zip(row) {
                    *o += a * r;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.n, v.len());
        let n = self.n;
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += self.data[i * n + j] * v[j];
            }
            out[i] = s;
        }
        out
    }

    pub fn pow(&self, k: u32) -> Matrix {
        let mut out = Matrix::identity(self.n);
        for _ in 0..k {
            out = out.matmul(self);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n);
        Matrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let n = self.n;
        (0..n)
            .map(|i| self.data[i * n..(i + 1) * n].iter().map(|v| v.abs()).sum())
            .fold(0.0f64, f64::max)
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let n = self.n;
        let mut s = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                s[j] += self.data[i * n + j];
            }
        }
        s
    }

    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn is_tridiagonal(&self, tol: f64) -> bool {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                if i.abs_diff(j) > 1 && self.get(i, j).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Bandwidth: largest |i-j| carrying an entry above tol.
    pub fn bandwidth(&self, tol: f64) -> usize {
        let n = self.n;
        let mut w = 0;
        for i in 0..n {
            for j in 0..n {
                if self.get(i, j).abs() > tol {
                    w = w.max(i.abs_diff(j));
                }
            }
        }
        w
    }
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues sorted ascending with matching orthonormal
/// eigenvectors (as rows of the second result).
pub fn eigendecompose_sym(m: &Matrix) -> Result<(Vec<f64>, Vec<Vec<f64>>), LinalgError> {
    let n = m.n;
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let mut a = m.clone();
    let mut v = Matrix::identity(n);
    let norm = m.max_abs().max(1e-300);
    let tol = 1e-15 * norm;

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(a.get(p, q).abs());
            }
        }
        if off <= tol {
            let mut pairs: Vec<(f64, usize)> =
                (0..n).map(|i| (a.get(i, i), i)).collect();
            pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
            let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let eigenvectors: Vec<Vec<f64>> = pairs
                .iter()
                .map(|&(_, idx)| (0..n).map(|r| v.get(r, idx)).collect())
                .collect();
            return Ok((eigenvalues, eigenvectors));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq.abs() <= tol * 1e-2 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    Err(LinalgError::ConvergenceFailure(JACOBI_MAX_SWEEPS))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_eigen() {
        let m = Matrix::identity(4);
        let (vals, _) = eigendecompose_sym(&m).unwrap();
        for v in vals {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_by_two_analytic() {
        let mut m = Matrix::zeros(2);
        m.set(0, 1, 1.0);
        m.set(1, 0, 1.0);
        let (vals, vecs) = eigendecompose_sym(&m).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
        // residual check
        for (k, lam) in vals.iter().enumerate() {
            let av = m.matvec(&vecs[k]);
            for (x, comp) in av.iter().enumerate() {
                assert!((comp - lam * vecs[k][x]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn random_symmetric_residuals() {
        // deterministic pseudo-random symmetric matrix
        let n = 12;
        let mut m = Matrix::zeros(n);
        let mut state = 88172645463325252u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state as f64 / u64::MAX as f64) - 0.5
        };
        for i in 0..n {
            for j in i..n {
                let v = next();
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        let (vals, vecs) = eigendecompose_sym(&m).unwrap();
        let scale = m.norm_inf();
        for (k, lam) in vals.iter().enumerate() {
            let av = m.matvec(&vecs[k]);
            let res = av
                .iter()
                .zip(&vecs[k])
                .map(|(a, v)| (a - lam * v).abs())
                .fold(0.0f64, f64::max);
            assert!(res < 1e-10 * scale, "eigenpair {k} residual {res}");
        }
        // ascending order
        for w in vals.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }
}
