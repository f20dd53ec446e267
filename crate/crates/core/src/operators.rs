//! Lattice Hamiltonians of the deformed system and their similarity
//! transforms, with a dense eigendecomposition used as the independent
//! spectral oracle.
//!
//! Conventions: row x, column y. The symmetric Hamiltonian couples x to
//! x +/- 1 through -sqrt(B_D D_D); the two similarity transforms strip the
//! square roots, leaving -B_D / -D_D (tilde-prime) whose negated transpose
//! is the birth-death generator.

use crate::linalg::{eigendecompose_sym, LinalgError, Matrix};
use crate::miop::System;
use crate::FamilyId;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("matrix for role {0:?} is not symmetric (defect {1:.3e})")]
    NotSymmetric(MatrixRole, f64),
}

/// Which operator a matrix represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixRole {
    Hsym,
    Htilde,
    HtildePrime,
    Gmat,
    LBd,
    LdBd,
    XD,
    LBdM,
    LdBdM,
}

/// A dense matrix over the working lattice, tagged with its role.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    pub role: MatrixRole,
    pub matrix: Matrix,
}

impl GeneratorMatrix {
    pub fn lattice_size(&self) -> usize {
        self.matrix.n
    }
}

/// Symmetric Hamiltonian H_D.
pub fn build_h(sys: &System) -> GeneratorMatrix {
    let n = sys.lattice_len();
    let mut m = Matrix::zeros(n);
    for x in 0..n {
        m.set(x, x, sys.b_def(x) + sys.d_def(x));
        if x + 1 < n {
            let c = -(sys.b_def(x) * sys.d_def(x + 1)).sqrt();
            m.set(x, x + 1, c);
            m.set(x + 1, x, c);
        }
    }
    GeneratorMatrix {
        role: MatrixRole::Hsym,
        matrix: m,
    }
}

/// First similarity transform: eigenvectors are the deformed polynomials.
pub fn build_h_tilde(sys: &System) -> GeneratorMatrix {
    let n = sys.lattice_len();
    let mut m = Matrix::zeros(n);
    for x in 0..n {
        m.set(x, x, sys.b_def(x) + sys.d_def(x));
        if x + 1 < n {
            m.set(
                x,
                x + 1,
                -sys.b_orig_mdt(x) * sys.xi_cached(x) / sys.xi_cached(x + 1),
            );
        }
        if x > 0 {
            m.set(
                x,
                x - 1,
                -sys.d_orig_mdt(x) * sys.xi_cached(x + 1) / sys.xi_cached(x),
            );
        }
    }
    GeneratorMatrix {
        role: MatrixRole::Htilde,
        matrix: m,
    }
}

/// Second similarity transform: eigenvectors are the polynomial ratios,
/// rows sum to zero.
pub fn build_h_tilde_prime(sys: &System) -> GeneratorMatrix {
    let n = sys.lattice_len();
    let mut m = Matrix::zeros(n);
    for x in 0..n {
        m.set(x, x, sys.b_def(x) + sys.d_def(x));
        if x + 1 < n {
            m.set(x, x + 1, -sys.b_def(x));
        }
        if x > 0 {
            m.set(x, x - 1, -sys.d_def(x));
        }
    }
    GeneratorMatrix {
        role: MatrixRole::HtildePrime,
        matrix: m,
    }
}

/// G_D, the transpose of the second transform.
pub fn build_g(sys: &System) -> GeneratorMatrix {
    let htp = build_h_tilde_prime(sys);
    GeneratorMatrix {
        role: MatrixRole::Gmat,
        matrix: htp.matrix.transpose(),
    }
}

/// Dense symmetric eigendecomposition oracle: eigenvalues ascending plus
/// orthonormal eigenvectors.
pub fn oracle_eigendecompose(
    m: &GeneratorMatrix,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), OperatorError> {
    let defect = m.matrix.symmetry_defect();
    let scale = m.matrix.max_abs().max(1e-300);
    if defect > 1e-13 * scale {
        return Err(OperatorError::NotSymmetric(m.role, defect));
    }
    Ok(eigendecompose_sym(&m.matrix)?)
}

/// Relative residual of A v = lambda v.
pub fn eigen_residual(m: &Matrix, v: &[f64], lambda: f64) -> f64 {
    eigen_residual_rows(m, v, lambda, m.n)
}

/// Relative residual over the first `rows` rows only. On a truncated
/// semi-infinite lattice the last row of the polynomial-eigenvector
/// operators misses the outward coupling by construction, so it is excluded
/// there.
pub fn eigen_residual_rows(m: &Matrix, v: &[f64], lambda: f64, rows: usize) -> f64 {
    let av = m.matvec(v);
    let vmax = v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let scale = (m.norm_inf() + lambda.abs()) * vmax;
    av.iter()
        .zip(v)
        .take(rows)
        .map(|(a, b)| (a - lambda * b).abs())
        .fold(0.0f64, f64::max)
        / scale.max(1e-300)
}

/// Outcome of reconstructing H_D from its closed-form eigensystem.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// |oracle eigenvalue - closed-form E_n|, ascending n.
    pub eigenvalue_deltas: Vec<f64>,
    /// max_{n,m} |<phi-hat_n, phi-hat_m> - delta_nm|.
    pub orthogonality_defect: f64,
    /// max element deviation of sum_n E_n phi phi^T from H_D, scaled by |H|;
    /// absent where completeness does not apply.
    pub reconstruction_error: Option<f64>,
    pub h_norm: f64,
}

/// Rebuild H_D from the closed-form spectrum and compare, including the
/// oracle eigenvalue comparison. Completeness (and thus reconstruction) is
/// skipped for the q-Meixner family.
pub fn spectral_representation_check(sys: &System) -> Result<SpectrumReport, OperatorError> {
    let h = build_h(sys);
    let n = h.lattice_size();
    let h_norm = h.matrix.norm_inf();
    let (oracle_vals, _) = oracle_eigendecompose(&h)?;
    let mut deltas = Vec::with_capacity(n);
    for k in 0..n {
        deltas.push((oracle_vals[k] - sys.energy(k as u32)).abs());
    }
    let basis = sys.normalized_basis();
    let mut defect = 0.0f64;
    for a in 0..n {
        for b in a..n {
            let dot: f64 = (0..n).map(|x| basis[a][x] * basis[b][x]).sum();
            let want = if a == b { 1.0 } else { 0.0 };
            defect = defect.max((dot - want).abs());
        }
    }
    let reconstruction_error = if sys.params().id == FamilyId::QMeixner {
        None
    } else if sys.is_finite() {
        let mut worst = 0.0f64;
        for x in 0..n {
            for y in 0..n {
                let mut s = 0.0;
                for (k, row) in basis.iter().enumerate() {
                    s += sys.energy(k as u32) * row[x] * row[y];
                }
                worst = worst.max((s - h.matrix.get(x, y)).abs());
            }
        }
        Some(worst / h_norm.max(1e-300))
    } else {
        None
    };
    if sys.params().id == FamilyId::QMeixner && reconstruction_error.is_none() && n > 0 {
        // fall through; the report records the skip via None
    }
    Ok(SpectrumReport {
        eigenvalue_deltas: deltas,
        orthogonality_defect: defect,
        reconstruction_error,
        h_norm,
    })
}

/// Spectral-representation outcome distinguishing the q-Meixner exclusion.
pub fn spectral_representation_check_strict(
    sys: &System,
) -> Result<SpectrumReport, OperatorError> {
    if sys.params().id == FamilyId::QMeixner {
        return Err(OperatorError::NotApplicable(
            "completeness does not hold for the qM family".into(),
        ));
    }
    spectral_representation_check(sys)
}

/// The generalized construction: given a symmetric H with positive ground
/// vector psi0 = psi .* p0 and ground eigenvalue 0, form
/// Htilde'_{x,y} = psi0(x)^{-1} H_{x,y} psi0(y) and report whether its
/// off-diagonal entries are all nonpositive (the generator condition).
pub fn generalized_bd_transform(
    h: &Matrix,
    psi: &[f64],
    p0: &[f64],
) -> Result<(Matrix, bool), OperatorError> {
    let n = h.n;
    if psi.len() != n || p0.len() != n {
        return Err(OperatorError::DimensionMismatch(format!(
            "matrix is {n}x{n}, vectors are {} and {}",
            psi.len(),
            p0.len()
        )));
    }
    let psi0: Vec<f64> = psi.iter().zip(p0).map(|(a, b)| a * b).collect();
    if psi0.iter().any(|&v| v == 0.0) {
        return Err(OperatorError::DimensionMismatch(
            "ground vector has a zero component".into(),
        ));
    }
    let mut out = Matrix::zeros(n);
    let mut nonpositive = true;
    let scale = h.max_abs();
    for x in 0..n {
        for y in 0..n {
            let v = h.get(x, y) * psi0[y] / psi0[x];
            out.set(x, y, v);
            if x != y && v > 1e-13 * scale {
                nonpositive = false;
            }
        }
    }
    Ok((out, nonpositive))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::FamilyParams;
    use crate::miop::IndexSet;
    use std::collections::BTreeMap;

    fn hahn_sys(d: &[u32]) -> System {
        let map: BTreeMap<String, f64> = [("a".to_string(), 1.2), ("b".to_string(), 4.5)]
            .into_iter()
            .collect();
        let p = FamilyParams::new(FamilyId::Hahn, &map, None, Some(10), 3).unwrap();
        System::new(p, IndexSet::new(d.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn four_eigen_equations() {
        let sys = hahn_sys(&[2]);
        let n = sys.lattice_len();
        let h = build_h(&sys);
        let ht = build_h_tilde(&sys);
        let htp = build_h_tilde_prime(&sys);
        let g = build_g(&sys);
        for k in 0..n as u32 {
            let en = sys.energy(k);
            let phi = sys.eigenvector(k);
            assert!(eigen_residual(&h.matrix, &phi, en) < 1e-10, "H n={k}");
            let pvec: Vec<f64> = (0..n).map(|x| sys.poly_multi(k, x as f64)).collect();
            assert!(eigen_residual(&ht.matrix, &pvec, en) < 1e-10, "Ht n={k}");
            let rvec: Vec<f64> = (0..n)
                .map(|x| sys.poly_multi(k, x as f64) / sys.poly_multi(0, x as f64))
                .collect();
            assert!(eigen_residual(&htp.matrix, &rvec, en) < 1e-10, "Htp n={k}");
            let phi0 = sys.eigenvector(0);
            let big: Vec<f64> = phi.iter().zip(&phi0).map(|(a, b)| a * b).collect();
            assert!(eigen_residual(&g.matrix, &big, en) < 1e-10, "G n={k}");
        }
    }

    #[test]
    fn row_sums_vanish_for_tilde_prime() {
        let sys = hahn_sys(&[1, 2]);
        let htp = build_h_tilde_prime(&sys);
        let scale = htp.matrix.max_abs();
        let n = htp.lattice_size();
        for x in 0..n {
            let s: f64 = (0..n).map(|y| htp.matrix.get(x, y)).sum();
            assert!(s.abs() < 1e-12 * scale, "row {x} sums to {s}");
        }
    }

    #[test]
    fn g_is_transpose() {
        let sys = hahn_sys(&[2]);
        let htp = build_h_tilde_prime(&sys);
        let g = build_g(&sys);
        assert_eq!(htp.matrix.transpose().data, g.matrix.data);
    }

    #[test]
    fn oracle_matches_closed_spectrum() {
        let sys = hahn_sys(&[2]);
        let h = build_h(&sys);
        let (vals, vecs) = oracle_eigendecompose(&h).unwrap();
        let scale = h.matrix.norm_inf().max(1.0);
        for (k, lam) in vals.iter().enumerate() {
            assert!(
                (lam - sys.energy(k as u32)).abs() < 1e-9 * scale,
                "eigenvalue {k}"
            );
            let r = eigen_residual(&h.matrix, &vecs[k], *lam);
            assert!(r < 1e-11, "oracle residual {r}");
        }
        // strictly increasing from zero
        assert!(vals[0].abs() < 1e-9 * scale);
        for w in vals.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn spectral_reconstruction() {
        let sys = hahn_sys(&[2]);
        let rep = spectral_representation_check(&sys).unwrap();
        assert!(rep.orthogonality_defect < 1e-10);
        assert!(rep.reconstruction_error.unwrap() < 1e-10);
    }

    #[test]
    fn generalized_transform_recovers_tilde_prime() {
        let sys = hahn_sys(&[2]);
        let h = build_h(&sys);
        let htp = build_h_tilde_prime(&sys);
        let n = sys.lattice_len();
        let psi: Vec<f64> = (0..n).map(|x| sys.psi(x)).collect();
        let p0: Vec<f64> = (0..n).map(|x| sys.poly_multi(0, x as f64)).collect();
        let (m, nonpos) = generalized_bd_transform(&h.matrix, &psi, &p0).unwrap();
        assert!(nonpos);
        let scale = htp.matrix.max_abs();
        for i in 0..n {
            for j in 0..n {
                assert!(
                    (m.get(i, j) - htp.matrix.get(i, j)).abs() < 1e-10 * scale,
                    "({i},{j})"
                );
            }
        }
    }

    #[test]
    fn generalized_transform_flags_positive_offdiagonal() {
        // symmetric matrix with a positive off-diagonal after the transform
        let mut h = Matrix::zeros(2);
        h.set(0, 0, 1.0);
        h.set(1, 1, 1.0);
        h.set(0, 1, 0.5);
        h.set(1, 0, 0.5);
        let (_, nonpos) = generalized_bd_transform(&h, &[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert!(!nonpos);
        // dimension mismatch surfaces
        assert!(generalized_bd_transform(&h, &[1.0], &[1.0, 1.0]).is_err());
    }
}
