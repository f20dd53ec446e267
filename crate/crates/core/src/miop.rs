//! Case-(1) multi-index deformation: Casoratians, the denominator polynomial,
//! deformed polynomials, potentials, eigenvectors and shift operators.
//!
//! A [`System`] fixes a family, a parameter set and an index set D, selects
//! the working lattice (finite N or an adaptive truncation for semi-infinite
//! families), caches the denominator polynomial on it and exposes every
//! deformed quantity. Determinants run in double-double arithmetic; see
//! [`crate::dd`].

use crate::dd::{det_dd, det_dd_entries, Dd};
use crate::family::{varphi, varphi_m, FamilyError, FamilyId, FamilyParams, ShiftDir};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MiopError {
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error("denominator polynomial not positive at x = {x}: {value}")]
    PositivityViolation { x: i64, value: f64 },
    #[error("degree check failed for n = {n}: {detail}")]
    DegreeMismatch { n: u32, detail: String },
    #[error("sign-change count for n = {n}: expected {n}, found {found}")]
    ZeroCountMismatch { n: u32, found: usize },
    #[error("lattice truncation failed: {0}")]
    TruncationFailure(String),
    #[error("{0}")]
    Unsupported(String),
}

/// The multi-index set D = {d_1 < ... < d_M}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    d: Vec<u32>,
}

impl IndexSet {
    /// Build from arbitrary order; rejects zeros and duplicates.
    pub fn new(mut d: Vec<u32>) -> Result<Self, MiopError> {
        d.sort_unstable();
        if d.first() == Some(&0) {
            return Err(MiopError::Unsupported(
                "index set entries must be positive".into(),
            ));
        }
        if d.windows(2).any(|w| w[0] == w[1]) {
            return Err(MiopError::Unsupported(
                "index set entries must be distinct".into(),
            ));
        }
        Ok(IndexSet { d })
    }

    pub fn empty() -> Self {
        IndexSet { d: Vec::new() }
    }

    pub fn indices(&self) -> &[u32] {
        &self.d
    }

    pub fn m(&self) -> u32 {
        self.d.len() as u32
    }

    /// ell_D = sum d_j - M(M-1)/2.
    pub fn ell(&self) -> u32 {
        let m = self.d.len() as u32;
        self.d.iter().sum::<u32>() - m * (m.saturating_sub(1)) / 2
    }

    pub fn d_max(&self) -> u32 {
        self.d.last().copied().unwrap_or(0)
    }
}

/// Casoratian det( f_k(x + j - 1) )_{1<=j,k<=n}.
pub fn casoratian(functions: &[&dyn Fn(f64) -> f64], x: f64) -> f64 {
    let n = functions.len();
    if n == 0 {
        return 1.0;
    }
    let mut mat = vec![0.0; n * n];
    for (j, row) in mat.chunks_mut(n).enumerate() {
        let xj = x + j as f64;
        for (k, f) in functions.iter().enumerate() {
            row[k] = f(xj);
        }
    }
    det_dd(&mat, n)
}

// ---------------------------------------------------------------------------
// polynomials in u = q^x
//
// On the saturating lattices (eta = 1 - q^x, semi-infinite) both the
// Casoratian columns and the phi_M denominator vanish like powers of u at
// large x, so the direct determinant ratio degrades into 0/0. Every entry is
// an exact low-degree polynomial in u there, which makes the full
// determinant computable once as a polynomial in u; its known structural
// zero of order C(M,2) (resp. C(M+1,2)) is removed by dropping coefficients
// instead of dividing. The series evaluation keeps a running peak-term so
// callers can fall back to the direct determinant where the u-expansion
// cancels (small x), which is exactly where the determinant is healthy.

fn upoly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn upoly_det(entries: &[Vec<f64>], size: usize) -> Vec<f64> {
    let mut result = vec![0.0];
    let mut perm: Vec<usize> = Vec::with_capacity(size);
    let mut used = vec![false; size];
    fn rec(
        entries: &[Vec<f64>],
        size: usize,
        perm: &mut Vec<usize>,
        used: &mut [bool],
        sign: f64,
        result: &mut Vec<f64>,
    ) {
        let row = perm.len();
        if row == size {
            let mut prod = vec![sign];
            for (r, &c) in perm.iter().enumerate() {
                prod = upoly_mul(&prod, &entries[r * size + c]);
            }
            if result.len() < prod.len() {
                result.resize(prod.len(), 0.0);
            }
            for (o, v) in result.iter_mut().zip(&prod) {
                *o += v;
            }
            return;
        }
        let mut skipped = 0;
        for c in 0..size {
            if used[c] {
                continue;
            }
            used[c] = true;
            perm.push(c);
            let s = if skipped % 2 == 0 { sign } else { -sign };
            rec(entries, size, perm, used, s, result);
            perm.pop();
            used[c] = false;
            skipped += 1;
        }
    }
    rec(entries, size, &mut perm, &mut used, 1.0, &mut result);
    result
}

/// Evaluate sum c_k u^k with compensated summation, returning the value and
/// the largest intermediate term (cancellation witness).
fn upoly_eval_guarded(coeffs: &[f64], u: f64) -> (f64, f64) {
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut up = 1.0;
    let mut peak = 0.0f64;
    for &c in coeffs {
        let t = c * up;
        peak = peak.max(t.abs());
        let y = t - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
        up *= u;
    }
    (sum, peak)
}

/// Accept a u-expansion value only when its internal cancellation is mild.
const UPOLY_PEAK_FACTOR: f64 = 1e3;

fn binom3(m: usize) -> usize {
    if m < 3 {
        0
    } else {
        m * (m - 1) * (m - 2) / 6
    }
}

/// Denominator-polynomial evaluator for one parameter set.
#[derive(Debug)]
struct DeformedEval {
    params: FamilyParams,
    d: Vec<u32>,
    c_d: f64,
    u_form: bool,
    xi_upoly: OnceLock<Vec<f64>>,
    pdn_upoly: Mutex<HashMap<u32, Vec<f64>>>,
}

impl DeformedEval {
    fn new(params: FamilyParams, d: &[u32]) -> Self {
        let fam = params.family();
        let m = d.len() as u32;
        // C_D = 1/varphi_M(0) * prod_{j<k} (Etv_dj - Etv_dk) / (alpha B'(j-1))
        let mut c_d = 1.0 / varphi_m(&params, m, 0.0);
        let alpha = fam.alpha(&params);
        for j in 1..=d.len() {
            for k in (j + 1)..=d.len() {
                let num = fam.virtual_energy(&params, d[j - 1]) - fam.virtual_energy(&params, d[k - 1]);
                c_d *= num / (alpha * fam.b_prime(&params, (j - 1) as f64));
            }
        }
        let u_form = matches!(
            params.id,
            FamilyId::LittleQJacobi | FamilyId::LittleQLaguerre
        );
        DeformedEval {
            params,
            d: d.to_vec(),
            c_d,
            u_form,
            xi_upoly: OnceLock::new(),
            pdn_upoly: Mutex::new(HashMap::new()),
        }
    }

    fn m(&self) -> u32 {
        self.d.len() as u32
    }

    /// Coefficients of the denominator polynomial in u = q^x.
    fn xi_ucoeffs(&self) -> &[f64] {
        self.xi_upoly.get_or_init(|| {
            let fam = self.params.family();
            let m = self.d.len();
            let q = self.params.qv();
            let mut entries: Vec<Vec<f64>> = Vec::with_capacity(m * m);
            for j in 0..m {
                for &dk in &self.d {
                    let base = fam
                        .xi_u_coeffs(&self.params, dk)
                        .expect("u-expansion available");
                    let twisted: Vec<f64> = base
                        .iter()
                        .enumerate()
                        .map(|(s, c)| c * q.powi((s * j) as i32))
                        .collect();
                    entries.push(twisted);
                }
            }
            let det = upoly_det(&entries, m);
            let drop = m * (m - 1) / 2;
            let scale = self.c_d * q.powi(binom3(m) as i32);
            det.into_iter().skip(drop).map(|c| c / scale).collect()
        })
    }

    /// Coefficients of P_{D,n} in u = q^x.
    fn pdn_ucoeffs(&self, n: u32) -> Vec<f64> {
        let mut cache = self.pdn_upoly.lock().expect("poisoned u-poly cache");
        cache
            .entry(n)
            .or_insert_with(|| {
                let fam = self.params.family();
                let m = self.d.len();
                let size = m + 1;
                let q = self.params.qv();
                let gs = fam
                    .poly_u_coeffs(&self.params, n)
                    .expect("u-expansion available");
                let mut entries: Vec<Vec<f64>> = Vec::with_capacity(size * size);
                for j in 0..size {
                    for &dk in &self.d {
                        let base = fam
                            .xi_u_coeffs(&self.params, dk)
                            .expect("u-expansion available");
                        entries.push(
                            base.iter()
                                .enumerate()
                                .map(|(s, c)| c * q.powi((s * j) as i32))
                                .collect(),
                        );
                    }
                    // r_j(x_j) P_n(x_j) with r_j = const_j u^M on these lattices
                    let rj_const = fam.r_factor(&self.params, j as u32 + 1, j as f64, m as u32);
                    let mut col = vec![0.0; m];
                    col.extend(
                        gs.iter()
                            .enumerate()
                            .map(|(s, c)| c * rj_const * q.powi((s * j) as i32)),
                    );
                    entries.push(col);
                }
                let det = upoly_det(&entries, size);
                let drop = size * (size - 1) / 2;
                let c_dn = (-1.0f64).powi(m as i32) * self.c_d * self.dt_sq(n);
                let scale = c_dn * q.powi(binom3(size) as i32);
                det.into_iter().skip(drop).map(|c| c / scale).collect()
            })
            .clone()
    }

    /// d-tilde_{D,n}^2.
    fn dt_sq(&self, n: u32) -> f64 {
        let fam = self.params.family();
        let m = self.m();
        let mut r = varphi_m(&self.params, m, 0.0) / varphi_m(&self.params, m + 1, 0.0);
        let alpha = fam.alpha(&self.params);
        let en = fam.energy(&self.params, n);
        for (j, &dj) in self.d.iter().enumerate() {
            r *= (en - fam.virtual_energy(&self.params, dj))
                / (alpha * fam.b_prime(&self.params, j as f64));
        }
        r
    }

    /// Denominator polynomial at real x. On saturating lattices the value
    /// comes from the u-expansion whenever that series is cancellation-free,
    /// which covers exactly the region where the determinant is not.
    fn xi(&self, x: f64) -> f64 {
        let m = self.d.len();
        if m == 0 {
            return 1.0;
        }
        if self.u_form {
            let u = self.params.qv().powf(x);
            let (value, peak) = upoly_eval_guarded(self.xi_ucoeffs(), u);
            if value.is_finite() && peak <= UPOLY_PEAK_FACTOR * value.abs() {
                return value;
            }
        }
        self.xi_direct(x)
    }

    fn xi_direct(&self, x: f64) -> f64 {
        let m = self.d.len();
        let fam = self.params.family();
        let mut mat = vec![Dd::ZERO; m * m];
        for j in 0..m {
            let xj = x + j as f64;
            for (k, &dk) in self.d.iter().enumerate() {
                mat[j * m + k] = fam.xi_dd(&self.params, dk, xj);
            }
        }
        det_dd_entries(&mat, m).value() / (self.c_d * varphi_m(&self.params, m as u32, x))
    }

    /// Deformed polynomial at real x, r_j-scaled determinant form.
    fn pdn(&self, n: u32, x: f64) -> f64 {
        let m = self.d.len();
        if m == 0 {
            return self.params.family().poly(&self.params, n, x);
        }
        if self.u_form {
            let u = self.params.qv().powf(x);
            let (value, peak) = upoly_eval_guarded(&self.pdn_ucoeffs(n), u);
            if value.is_finite() && peak <= UPOLY_PEAK_FACTOR * value.abs() {
                return value;
            }
        }
        self.pdn_direct(n, x)
    }

    fn pdn_direct(&self, n: u32, x: f64) -> f64 {
        let m = self.d.len();
        let fam = self.params.family();
        let size = m + 1;
        let mut mat = vec![Dd::ZERO; size * size];
        for j in 1..=size {
            let xj = x + (j - 1) as f64;
            for (k, &dk) in self.d.iter().enumerate() {
                mat[(j - 1) * size + k] = fam.xi_dd(&self.params, dk, xj);
            }
            mat[(j - 1) * size + m] = fam
                .r_factor_dd(&self.params, j as u32, xj, m as u32)
                .mul(fam.poly_dd(&self.params, n, xj));
        }
        let c_dn = (-1.0f64).powi(m as i32) * self.c_d * self.dt_sq(n);
        det_dd_entries(&mat, size).value() / (c_dn * varphi_m(&self.params, m as u32 + 1, x))
    }
}

/// Options controlling lattice selection for semi-infinite families.
#[derive(Debug, Clone, Copy)]
pub struct SystemOptions {
    /// Hard lattice-size override (number of points) for semi-infinite
    /// families; bypasses the adaptive rule.
    pub truncation: Option<usize>,
    /// Highest mode index whose truncation quality is enforced adaptively.
    pub mode_check: u32,
    /// Stationary-tail mass threshold for the adaptive rule.
    pub tail_eps: f64,
}

impl Default for SystemOptions {
    fn default() -> Self {
        SystemOptions {
            truncation: None,
            mode_check: 20,
            tail_eps: 1e-13,
        }
    }
}

/// Zero-pattern summary of a deformed polynomial on the lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroStructure {
    pub sign_changes: usize,
    /// Integer lattice points immediately preceding each sign change.
    pub bar_positions: Vec<usize>,
}

/// Degree verification report from interpolation in eta.
#[derive(Debug, Clone)]
pub struct DegreeReport {
    pub degree: u32,
    pub missing_degrees: Vec<u32>,
    pub leading_measured: f64,
    pub leading_closed: f64,
    /// |next divided difference| * span / |leading|; ~0 for an exact degree.
    pub overshoot: f64,
}

/// A family + index set with its working lattice and cached denominator
/// polynomial values.
pub struct System {
    eval: DeformedEval,
    eval_shift: DeformedEval,
    p_mdt: FamilyParams,
    n_points: usize,
    finite: bool,
    xi0: Vec<f64>,
    xi1: Vec<f64>,
    phi0_mdt_sq: Vec<f64>,
}

impl System {
    pub fn new(params: FamilyParams, dset: IndexSet) -> Result<Self, MiopError> {
        Self::with_options(params, dset, SystemOptions::default())
    }

    pub fn with_options(
        params: FamilyParams,
        dset: IndexSet,
        opts: SystemOptions,
    ) -> Result<Self, MiopError> {
        params.validate(dset.d_max())?;
        let m = dset.m();
        let p_shift = params.shift(1.0, ShiftDir::Delta);
        let p_mdt = params.shift(m as f64, ShiftDir::DeltaTilde);
        let eval = DeformedEval::new(params, dset.indices());
        let eval_shift = DeformedEval::new(p_shift, dset.indices());
        let finite = eval.params.lattice_n().is_some();

        let n_points = if let Some(n) = eval.params.lattice_n() {
            n as usize + 1
        } else if let Some(t) = opts.truncation {
            t.max(2)
        } else {
            adaptive_truncation(&eval, &eval_shift, &p_mdt, &opts)?
        };

        let mut sys = System {
            eval,
            eval_shift,
            p_mdt,
            n_points,
            finite,
            xi0: Vec::new(),
            xi1: Vec::new(),
            phi0_mdt_sq: Vec::new(),
        };
        sys.fill_caches()?;
        Ok(sys)
    }

    fn fill_caches(&mut self) -> Result<(), MiopError> {
        // positivity is guaranteed on the lattice plus N+1, which is exactly
        // the range the deformed quantities read
        let top = self.n_points;
        self.xi0 = (0..=top).map(|x| self.eval.xi(x as f64)).collect();
        self.xi1 = (0..=top).map(|x| self.eval_shift.xi(x as f64)).collect();
        for (x, &v) in self.xi0.iter().enumerate() {
            if !(v > 0.0) || !v.is_finite() {
                return Err(MiopError::PositivityViolation { x: x as i64, value: v });
            }
        }
        // lambda + delta corresponds to the N-1 system; positivity is needed
        // on the lattice where it enters B_D, D_D and P_{D,0}
        for x in 0..self.n_points {
            let v = self.xi1[x];
            if !(v > 0.0) || !v.is_finite() {
                return Err(MiopError::PositivityViolation { x: x as i64, value: v });
            }
        }
        let fam = self.p_mdt.family();
        self.phi0_mdt_sq = (0..=top)
            .map(|x| fam.phi0_sq(&self.p_mdt, x as u32))
            .collect();
        Ok(())
    }

    pub fn params(&self) -> &FamilyParams {
        &self.eval.params
    }

    pub fn params_shifted(&self) -> &FamilyParams {
        &self.eval_shift.params
    }

    pub fn params_mdt(&self) -> &FamilyParams {
        &self.p_mdt
    }

    pub fn index_set(&self) -> IndexSet {
        IndexSet {
            d: self.eval.d.clone(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.finite
    }

    /// Number of lattice points; lattice is {0, ..., len-1}.
    pub fn lattice_len(&self) -> usize {
        self.n_points
    }

    pub fn energy(&self, n: u32) -> f64 {
        self.eval.params.family().energy(&self.eval.params, n)
    }

    /// Denominator polynomial at lambda, arbitrary real x.
    pub fn xi_d(&self, x: f64) -> f64 {
        self.eval.xi(x)
    }

    /// Denominator polynomial at lambda + delta.
    pub fn xi_d_shifted(&self, x: f64) -> f64 {
        self.eval_shift.xi(x)
    }

    pub fn xi_cached(&self, x: usize) -> f64 {
        self.xi0[x]
    }

    pub fn xi_shift_cached(&self, x: usize) -> f64 {
        self.xi1[x]
    }

    /// Deformed polynomial P_{D,n} at real x.
    pub fn poly_multi(&self, n: u32, x: f64) -> f64 {
        self.eval.pdn(n, x)
    }

    /// P_{D,n} at lambda + delta (the shape-invariant partner system).
    pub fn poly_multi_shifted(&self, n: u32, x: f64) -> f64 {
        self.eval_shift.pdn(n, x)
    }

    pub fn d_tilde_sq(&self, n: u32) -> f64 {
        self.eval.dt_sq(n)
    }

    pub fn norm_sq(&self, n: u32) -> f64 {
        self.eval.params.family().norm_sq(&self.eval.params, n)
    }

    /// Deformed birth rate B_D(x).
    pub fn b_def(&self, x: usize) -> f64 {
        if self.finite && x + 1 == self.n_points {
            return 0.0;
        }
        let fam = self.p_mdt.family();
        fam.b(&self.p_mdt, x as f64) * self.xi0[x] / self.xi0[x + 1] * self.xi1[x + 1]
            / self.xi1[x]
    }

    /// Deformed death rate D_D(x).
    pub fn d_def(&self, x: usize) -> f64 {
        if x == 0 {
            return 0.0;
        }
        let fam = self.p_mdt.family();
        fam.d(&self.p_mdt, x as f64) * self.xi0[x + 1] / self.xi0[x] * self.xi1[x - 1]
            / self.xi1[x]
    }

    /// Original-potential pieces entering the first similarity transform.
    pub fn b_orig_mdt(&self, x: usize) -> f64 {
        self.p_mdt.family().b(&self.p_mdt, x as f64)
    }

    pub fn d_orig_mdt(&self, x: usize) -> f64 {
        self.p_mdt.family().d(&self.p_mdt, x as f64)
    }

    /// psi_D(x), the ground-state factor of the deformed eigenvectors.
    pub fn psi(&self, x: usize) -> f64 {
        (self.xi0[1] * self.phi0_mdt_sq[x] / (self.xi0[x] * self.xi0[x + 1])).sqrt()
    }

    /// Eigenvector phi_{D,n} on the lattice (phi_{D,n}(0) = 1).
    pub fn eigenvector(&self, n: u32) -> Vec<f64> {
        (0..self.n_points)
            .map(|x| self.psi(x) * self.eval.pdn(n, x as f64))
            .collect()
    }

    /// Normalized eigenvector phi-hat_{D,n}.
    pub fn eigenvector_normalized(&self, n: u32) -> Vec<f64> {
        let scale = (self.norm_sq(n) * self.d_tilde_sq(n) / self.xi0[1]).sqrt();
        self.eigenvector(n).into_iter().map(|v| v * scale).collect()
    }

    /// Full orthonormal basis as rows (n-th row = phi-hat_{D,n}).
    pub fn normalized_basis(&self) -> Vec<Vec<f64>> {
        (0..self.n_points as u32)
            .map(|n| self.eigenvector_normalized(n))
            .collect()
    }

    /// Stationary weight phi-hat_{D,0}(x)^2.
    pub fn stationary(&self) -> Vec<f64> {
        self.eigenvector_normalized(0)
            .into_iter()
            .map(|v| v * v)
            .collect()
    }

    /// Closed-form leading coefficient of the denominator polynomial.
    pub fn leading_coeff_xi(&self) -> f64 {
        let fam = self.eval.params.family();
        let p = &self.eval.params;
        let d = &self.eval.d;
        let mut c = 1.0;
        for (j, &dj) in d.iter().enumerate() {
            c *= fam.leading_virtual(p, dj) / fam.leading_virtual(p, j as u32);
        }
        for j in 1..=d.len() {
            for k in (j + 1)..=d.len() {
                c *= fam.beta_shape(p, (j - 1 + k - 1) as u32)
                    / fam.beta_shape(p, d[j - 1] + d[k - 1]);
            }
        }
        c
    }

    /// Closed-form leading coefficient of P_{D,n}.
    pub fn leading_coeff_p(&self, n: u32) -> f64 {
        let fam = self.eval.params.family();
        let p = &self.eval.params;
        let mut c = self.leading_coeff_xi() * fam.leading(p, n);
        for (j, &dj) in self.eval.d.iter().enumerate() {
            c *= fam.beta_shape_prime(p, j as u32) / fam.beta_shape_prime(p, dj + n);
        }
        c
    }

    /// Verify that P_{D,n} is a polynomial of degree ell_D + n in
    /// eta(x; lambda + M delta-tilde) with the closed-form leading
    /// coefficient, by divided differences on Chebyshev-spaced eta nodes.
    pub fn degree_check(&self, n: u32, tol_leading: f64) -> Result<DegreeReport, MiopError> {
        let k = (self.index_set().ell() + n) as usize;
        let fam = self.p_mdt.family();
        let x_hi = (self.n_points - 1) as f64;
        let eta_hi = fam.eta(&self.p_mdt, x_hi);
        let count = k + 2;
        let mut etas = Vec::with_capacity(count);
        let mut vals = Vec::with_capacity(count);
        for i in 0..count {
            let theta = std::f64::consts::PI * (2.0 * i as f64 + 1.0) / (2.0 * count as f64);
            let e = eta_hi / 2.0 + eta_hi / 2.0 * theta.cos();
            let x = fam.eta_inverse(&self.p_mdt, e);
            etas.push(e);
            vals.push(self.eval.pdn(n, x));
        }
        // divided-difference table, keeping the two top orders
        let mut dd = vals;
        let mut lead_k = dd[0];
        for level in 1..count {
            for i in 0..(count - level) {
                dd[i] = (dd[i + 1] - dd[i]) / (etas[i + level] - etas[i]);
            }
            if level == k {
                lead_k = dd[0];
            }
        }
        let overshoot = (dd[0] * eta_hi / lead_k).abs();
        let closed = self.leading_coeff_p(n);
        let rel = ((lead_k - closed) / closed).abs();
        if rel > tol_leading || overshoot > 1e-5 {
            return Err(MiopError::DegreeMismatch {
                n,
                detail: format!(
                    "leading {lead_k} vs closed {closed} (rel {rel:.3e}), overshoot {overshoot:.3e}"
                ),
            });
        }
        Ok(DegreeReport {
            degree: k as u32,
            missing_degrees: (0..self.index_set().ell()).collect(),
            leading_measured: lead_k,
            leading_closed: closed,
            overshoot,
        })
    }

    /// Forward shift operator applied to P_{D,n}, evaluated at real x.
    /// Equals E_n(lambda) P_{D,n-1}(x; lambda + delta) when the shape
    /// invariance holds.
    pub fn forward_shift(&self, n: u32, x: f64) -> f64 {
        let fam = self.p_mdt.family();
        let b0 = fam.b(&self.p_mdt, 0.0);
        b0 / (varphi(&self.p_mdt, x) * self.eval.xi(x + 1.0))
            * (self.eval_shift.xi(x + 1.0) * self.eval.pdn(n, x)
                - self.eval_shift.xi(x) * self.eval.pdn(n, x + 1.0))
    }

    /// Backward shift operator applied to P_{D,n-1}(.; lambda + delta),
    /// evaluated at real x. Equals P_{D,n}(x; lambda).
    pub fn backward_shift(&self, n: u32, x: f64) -> f64 {
        assert!(n >= 1, "backward shift needs n >= 1");
        let fam = self.p_mdt.family();
        let b0 = fam.b(&self.p_mdt, 0.0);
        let g = |y: f64| self.eval_shift.pdn(n - 1, y);
        (fam.b(&self.p_mdt, x) * self.eval.xi(x) * varphi(&self.p_mdt, x) * g(x)
            - fam.d(&self.p_mdt, x) * self.eval.xi(x + 1.0) * varphi(&self.p_mdt, x - 1.0) * g(x - 1.0))
            / (b0 * self.eval_shift.xi(x))
    }

    /// Both shift relations at x, as relative residuals.
    pub fn shift_residuals(&self, n: u32, x: f64) -> (f64, f64) {
        let en = self.energy(n);
        let fwd = self.forward_shift(n, x);
        let fwd_target = en * self.eval_shift.pdn(n.saturating_sub(1), x);
        let fwd_res = if n == 0 {
            fwd.abs() / fwd.abs().max(1.0)
        } else {
            (fwd - fwd_target).abs() / fwd.abs().max(fwd_target.abs()).max(1.0)
        };
        if n == 0 {
            return (fwd_res, 0.0);
        }
        let bwd = self.backward_shift(n, x);
        let bwd_target = self.eval.pdn(n, x);
        let bwd_res = (bwd - bwd_target).abs() / bwd.abs().max(bwd_target.abs()).max(1.0);
        (fwd_res, bwd_res)
    }

    /// Count sign changes of P_{D,n} along the lattice and return the
    /// lattice points preceding each change.
    pub fn zero_structure(&self, n: u32) -> Result<ZeroStructure, MiopError> {
        let vals: Vec<f64> = (0..self.n_points)
            .map(|x| self.eval.pdn(n, x as f64))
            .collect();
        let mut bars = Vec::new();
        for x in 0..self.n_points - 1 {
            if vals[x] * vals[x + 1] < 0.0 {
                bars.push(x);
            }
        }
        if bars.len() != n as usize {
            return Err(MiopError::ZeroCountMismatch {
                n,
                found: bars.len(),
            });
        }
        Ok(ZeroStructure {
            sign_changes: bars.len(),
            bar_positions: bars,
        })
    }
}

/// Pick a truncation point for a semi-infinite system: the stationary tail
/// past the boundary must be negligible and the lowest `mode_check` modes
/// must have negligible coupling through the cut.
fn adaptive_truncation(
    eval: &DeformedEval,
    eval_shift: &DeformedEval,
    p_mdt: &FamilyParams,
    opts: &SystemOptions,
) -> Result<usize, MiopError> {
    const HARD_CAP: usize = 4000;
    let fam = p_mdt.family();
    let weight = |x: usize| -> f64 {
        let xi_x = eval.xi(x as f64);
        let xi_x1 = eval.xi(x as f64 + 1.0);
        let xis = eval_shift.xi(x as f64);
        fam.phi0_sq(p_mdt, x as u32) * xis * xis / (xi_x * xi_x1)
    };
    let mut total = 0.0;
    let mut prev = f64::INFINITY;
    let mut x = 0usize;
    let mut n_cut = None;
    while x < HARD_CAP {
        let w = weight(x);
        total += w;
        if x > 4 && w < prev {
            let r = w / prev;
            let tail = w * r / (1.0 - r).max(1e-6);
            if tail < opts.tail_eps * total {
                n_cut = Some(x);
                break;
            }
        }
        prev = w;
        x += 1;
    }
    let mut n = n_cut
        .ok_or_else(|| MiopError::TruncationFailure("stationary tail does not decay".into()))?;

    // extend until the cut coupling of the checked modes is negligible
    // relative to the Hamiltonian scale on the kept lattice
    let famb = eval.params.family();
    let rate = |x: usize| -> f64 {
        let xf = x as f64;
        let b = famb.b(p_mdt, xf) * eval.xi(xf) / eval.xi(xf + 1.0) * eval_shift.xi(xf + 1.0)
            / eval_shift.xi(xf);
        let d = if x == 0 {
            0.0
        } else {
            famb.d(p_mdt, xf) * eval.xi(xf + 1.0) / eval.xi(xf) * eval_shift.xi(xf - 1.0)
                / eval_shift.xi(xf)
        };
        b + d
    };
    for _ in 0..200 {
        let npts = n + 1;
        let scale_h = (0..npts).map(rate).fold(1.0f64, f64::max);
        let bd_n = {
            let x = npts - 1;
            famb.b(p_mdt, x as f64) * eval.xi(x as f64) / eval.xi(x as f64 + 1.0)
                * eval_shift.xi(x as f64 + 1.0)
                / eval_shift.xi(x as f64)
        };
        let dd_n1 = {
            let x = npts;
            famb.d(p_mdt, x as f64) * eval.xi(x as f64 + 1.0) / eval.xi(x as f64)
                * eval_shift.xi(x as f64 - 1.0)
                / eval_shift.xi(x as f64)
        };
        let coupling = (bd_n * dd_n1).abs().sqrt();
        let mut worst: f64 = 0.0;
        for m in 0..=opts.mode_check.min(npts as u32) {
            let x = npts as f64;
            let psi = (eval.xi(1.0) * fam.phi0_sq(p_mdt, npts as u32)
                / (eval.xi(x) * eval.xi(x + 1.0)))
                .sqrt();
            let scale = (famb.norm_sq(&eval.params, m) * eval.dt_sq(m) / eval.xi(1.0)).sqrt();
            let phi_hat = psi * eval.pdn(m, x) * scale;
            worst = worst.max((coupling * phi_hat).abs() / scale_h);
        }
        if worst < 1e-10 {
            return Ok(npts);
        }
        n += (n / 5).max(8);
        if n >= HARD_CAP {
            return Err(MiopError::TruncationFailure(format!(
                "mode quality not reached below {HARD_CAP} points (residual {worst:.2e})"
            )));
        }
    }
    Ok(n + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::FamilyId;
    use std::collections::BTreeMap;

    fn hahn_system(d: &[u32]) -> System {
        let map: BTreeMap<String, f64> = [("a".to_string(), 1.2), ("b".to_string(), 4.5)]
            .into_iter()
            .collect();
        let p = FamilyParams::new(FamilyId::Hahn, &map, None, Some(10), 3).unwrap();
        System::new(p, IndexSet::new(d.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn index_set_ell() {
        let d = IndexSet::new(vec![3, 1]).unwrap();
        assert_eq!(d.indices(), &[1, 3]);
        assert_eq!(d.ell(), 3);
        assert_eq!(IndexSet::new(vec![1]).unwrap().ell(), 1);
        assert_eq!(IndexSet::empty().ell(), 0);
        assert!(IndexSet::new(vec![2, 2]).is_err());
        assert!(IndexSet::new(vec![0]).is_err());
    }

    #[test]
    fn casoratian_basics() {
        let f1 = |x: f64| x * x + 1.0;
        assert_eq!(casoratian(&[&f1], 2.0), 5.0);
        // two identical columns vanish
        assert_eq!(casoratian(&[&f1, &f1], 1.3), 0.0);
    }

    #[test]
    fn xi_normalization_and_positivity() {
        for d in [vec![1], vec![2], vec![1, 2], vec![1, 3]] {
            let sys = hahn_system(&d);
            assert!((sys.xi_d(0.0) - 1.0).abs() < 1e-12, "D={d:?}");
            assert!((sys.xi_d_shifted(0.0) - 1.0).abs() < 1e-12);
            for x in 0..=sys.lattice_len() {
                assert!(sys.xi_cached(x) > 0.0);
            }
        }
    }

    #[test]
    fn pdn_normalization_and_reduction() {
        let sys = hahn_system(&[2]);
        for n in 0..4 {
            assert!((sys.poly_multi(n, 0.0) - 1.0).abs() < 1e-11, "n={n}");
        }
        // P_{D,0} = Xi_D(.; lambda+delta)
        for x in 0..=10 {
            let lhs = sys.poly_multi(0, x as f64);
            let rhs = sys.xi_shift_cached(x);
            assert!((lhs - rhs).abs() < 1e-10 * rhs.abs().max(1.0), "x={x}");
        }
        // M = 0 reduces to the ordinary polynomial
        let sys0 = {
            let map: BTreeMap<String, f64> = [("a".to_string(), 1.2), ("b".to_string(), 4.5)]
                .into_iter()
                .collect();
            let p = FamilyParams::new(FamilyId::Hahn, &map, None, Some(10), 0).unwrap();
            System::new(p, IndexSet::empty()).unwrap()
        };
        let fam = sys0.params().family();
        for n in 0..4 {
            for x in 0..=10 {
                let lhs = sys0.poly_multi(n, x as f64);
                let rhs = fam.poly(sys0.params(), n, x as f64);
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn boundary_values() {
        let sys = hahn_system(&[1, 2]);
        assert_eq!(sys.d_def(0), 0.0);
        assert_eq!(sys.b_def(sys.lattice_len() - 1), 0.0);
        for x in 0..sys.lattice_len() - 1 {
            assert!(sys.b_def(x) > 0.0, "B_D({x}) <= 0");
        }
        for x in 1..sys.lattice_len() {
            assert!(sys.d_def(x) > 0.0, "D_D({x}) <= 0");
        }
    }

    #[test]
    fn orthogonality_weighted() {
        let sys = hahn_system(&[2]);
        let np = sys.lattice_len();
        let mut worst: f64 = 0.0;
        for n in 0..5u32 {
            for m in n..5u32 {
                let mut s = 0.0;
                for x in 0..np {
                    let w = sys.phi0_mdt_sq[x] / (sys.xi_cached(x) * sys.xi_cached(x + 1));
                    s += w * sys.poly_multi(n, x as f64) * sys.poly_multi(m, x as f64);
                }
                if n == m {
                    let expect = 1.0 / (sys.norm_sq(n) * sys.d_tilde_sq(n));
                    worst = worst.max(((s - expect) / expect).abs());
                } else {
                    let scale = 1.0
                        / (sys.norm_sq(n) * sys.d_tilde_sq(n) * sys.norm_sq(m) * sys.d_tilde_sq(m))
                            .sqrt();
                    worst = worst.max(s.abs() / scale);
                }
            }
        }
        assert!(worst < 1e-10, "orthogonality defect {worst}");
    }

    #[test]
    fn normalized_basis_orthonormal() {
        let sys = hahn_system(&[1, 3]);
        let basis = sys.normalized_basis();
        let np = sys.lattice_len();
        for n in 0..np {
            for m in n..np {
                let dot: f64 = (0..np).map(|x| basis[n][x] * basis[m][x]).sum();
                let want = if n == m { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-9, "({n},{m}) -> {dot}");
            }
        }
    }

    #[test]
    fn positivity_violation_detected() {
        // spec sample parameters for qR violate the deformation range at
        // d_M = 3 and the denominator polynomial dips negative
        let map: BTreeMap<String, f64> = [
            ("d".to_string(), 0.5),
            ("b".to_string(), 0.008),
            ("c".to_string(), 0.6),
        ]
        .into_iter()
        .collect();
        let p = FamilyParams {
            id: FamilyId::QRacah,
            lambda: vec![
                -8.0,
                (0.008f64).ln() / (0.7f64).ln(),
                (0.6f64).ln() / (0.7f64).ln(),
                (0.5f64).ln() / (0.7f64).ln(),
            ],
            q: Some(0.7),
        };
        let _ = map;
        let r = System::new(p, IndexSet::new(vec![1, 3]).unwrap());
        assert!(r.is_err());
    }

    #[test]
    fn zero_structure_counts() {
        let sys = hahn_system(&[2]);
        for n in 0..5u32 {
            let z = sys.zero_structure(n).unwrap();
            assert_eq!(z.sign_changes, n as usize);
        }
    }

    #[test]
    fn shift_relations_hold() {
        let sys = hahn_system(&[2]);
        for n in 0..4u32 {
            for x in [0.0, 1.0, 2.0, 3.0, 0.5, 1.5] {
                let (f, b) = sys.shift_residuals(n, x);
                assert!(f < 1e-9, "forward n={n} x={x}: {f}");
                assert!(b < 1e-9, "backward n={n} x={x}: {b}");
            }
        }
    }

    #[test]
    fn degree_and_leading() {
        let sys = hahn_system(&[2]);
        for n in 0..4u32 {
            let rep = sys.degree_check(n, 1e-7).unwrap();
            assert_eq!(rep.degree, 2 + n);
            assert_eq!(rep.missing_degrees, vec![0, 1]);
        }
        let sys = hahn_system(&[1, 3]);
        let rep = sys.degree_check(2, 1e-7).unwrap();
        assert_eq!(rep.degree, 3 + 2);
        assert_eq!(rep.missing_degrees, vec![0, 1, 2]);
    }

    #[test]
    fn casoratian_row_permutation_invariance() {
        // determinant changes sign under a row swap; the deformed polynomial
        // built from the swapped matrix is unchanged up to that sign
        let sys = hahn_system(&[1, 3]);
        let fam = sys.params().family();
        let p = sys.params();
        let x = 2.0;
        let m = 2usize;
        let size = m + 1;
        let mut mat = vec![0.0; size * size];
        for j in 0..size {
            let xj = x + j as f64;
            for (k, &dk) in [1u32, 3].iter().enumerate() {
                mat[j * size + k] = fam.xi(p, dk, xj);
            }
            mat[j * size + m] = fam.r_factor(p, j as u32 + 1, xj, m as u32) * fam.poly(p, 2, xj);
        }
        let d1 = crate::dd::det_dd(&mat, size);
        for c in 0..size {
            mat.swap(c, size + c);
        }
        let d2 = crate::dd::det_dd(&mat, size);
        assert!((d1 + d2).abs() <= 1e-12 * d1.abs());
    }

    #[test]
    fn meixner_truncation_is_adaptive() {
        let map: BTreeMap<String, f64> = [("beta".to_string(), 2.5), ("c".to_string(), 0.4)]
            .into_iter()
            .collect();
        let p = FamilyParams::new(FamilyId::Meixner, &map, None, None, 1).unwrap();
        let sys = System::new(p, IndexSet::new(vec![1]).unwrap()).unwrap();
        assert!(sys.lattice_len() > 20, "lattice {}", sys.lattice_len());
        assert!(!sys.is_finite());
        // stationary mass on the truncated lattice is 1 to truncation error
        let total: f64 = sys.stationary().iter().sum();
        assert!((total - 1.0).abs() < 1e-9, "stationary mass {total}");
    }
}
