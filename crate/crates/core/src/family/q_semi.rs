//! Data blocks for the semi-infinite q-families: little q-Jacobi,
//! little q-Laguerre, q-Meixner.

use super::q_finite::hyp_phi;
use super::{log_q, named, qp, qp_all, qp_inf, require, Family, FamilyError, FamilyId, FamilyParams};
use std::collections::BTreeMap;

/// Little q-Jacobi (lqJ): q^lambda = (a, b), delta = (1,1), kappa = q^{-1}.
pub struct LittleQJacobiFamily;

impl LittleQJacobiFamily {
    fn abq(p: &FamilyParams) -> (f64, f64, f64) {
        (p.qv(), p.val(0), p.val(1))
    }
}

impl Family for LittleQJacobiFamily {
    fn id(&self) -> FamilyId {
        FamilyId::LittleQJacobi
    }
    fn param_names(&self) -> &'static [&'static str] {
        &["a", "b"]
    }
    fn delta(&self) -> &'static [f64] {
        &[1.0, 1.0]
    }
    fn delta_tilde(&self) -> &'static [f64] {
        &[-1.0, 1.0]
    }

    fn assemble(
        &self,
        map: &BTreeMap<String, f64>,
        q: Option<f64>,
        _n: Option<u32>,
    ) -> Result<FamilyParams, FamilyError> {
        let q = q.unwrap();
        let la = log_q(named(map, "a")?, q, "a")?;
        let lb = log_q(named(map, "b")?, q, "b")?;
        Ok(FamilyParams {
            id: self.id(),
            lambda: vec![la, lb],
            q: Some(q),
        })
    }

    fn validate(&self, p: &FamilyParams, dmax: u32) -> Result<(), FamilyError> {
        let (q, a, b) = Self::abq(p);
        require(0.0 < a && a < 1.0, "lqJ", "0 < a < 1", format!("a = {a}"))?;
        require(b < 1.0, "lqJ", "b < 1", format!("b = {b}"))?;
        if dmax >= 1 {
            require(
                a < q.powf(1.0 + dmax as f64),
                "lqJ",
                "a < q^{1+d_M}",
                format!("a = {a}, q^(1+d_M) = {}", q.powf(1.0 + dmax as f64)),
            )?;
        }
        Ok(())
    }

    fn lattice_n(&self, _p: &FamilyParams) -> Option<u32> {
        None
    }

    fn kappa(&self, p: &FamilyParams) -> f64 {
        1.0 / p.qv()
    }

    fn twist(&self, p: &FamilyParams) -> Option<FamilyParams> {
        let l = &p.lambda;
        Some(FamilyParams {
            id: p.id,
            lambda: vec![2.0 - l[0], l[1]],
            q: p.q,
        })
    }

    fn b(&self, p: &FamilyParams, x: f64) -> f64 {
        let (q, a, b) = Self::abq(p);
        a / q * (q.powf(-x) - b)
    }
    fn d(&self, p: &FamilyParams, x: f64) -> f64 {
        p.qv().powf(-x) - 1.0
    }
    fn energy(&self, p: &FamilyParams, n: u32) -> f64 {
        let (q, a, b) = Self::abq(p);
        let nf = n as f64;
        (q.powf(-nf) - 1.0) * (1.0 - a * b * q.powf(nf - 1.0))
    }
    fn eta(&self, p: &FamilyParams, x: f64) -> f64 {
        1.0 - p.qv().powf(x)
    }
    fn eta_inverse(&self, p: &FamilyParams, eta: f64) -> f64 {
        (1.0 - eta).ln() / p.qv().ln()
    }
    fn poly(&self, p: &FamilyParams, n: u32, x: f64) -> f64 {
        // 3phi1, carries the extra [(-1)^k q^C(k,2)]^{-1} factor
        let (q, a, b) = Self::abq(p);
        hyp_phi(
            &[q.powi(-(n as i32)), a * b * q.powi(n as i32 - 1), q.powf(-x)],
            &[b],
            q,
            q.powf(x + 1.0) / a,
        )
    }
    fn phi0_sq(&self, p: &FamilyParams, x: u32) -> f64 {
        let (q, a, b) = Self::abq(p);
        qp(b, q, x) / qp(q, q, x) * a.powi(x as i32)
    }
    fn norm_sq(&self, p: &FamilyParams, n: u32) -> f64 {
        let (q, a, b) = Self::abq(p);
        let nf = n as f64;
        qp_all(&[b, a * b], q, n) * a.powi(n as i32) * q.powf(nf * (nf - 1.0))
            / qp_all(&[a, q], q, n)
            * (1.0 - a * b * q.powf(2.0 * nf - 1.0))
            / (1.0 - a * b * q.powf(nf - 1.0))
            * qp_inf(a, q)
            / qp_inf(a * b, q)
    }
    fn alpha(&self, p: &FamilyParams) -> f64 {
        p.val(0) / p.qv()
    }
    fn alpha_prime(&self, p: &FamilyParams) -> f64 {
        let (q, a, b) = Self::abq(p);
        -(1.0 - a / q) * (1.0 - b)
    }
    fn virtual_energy(&self, p: &FamilyParams, v: u32) -> f64 {
        let (q, a, b) = Self::abq(p);
        let vf = v as f64;
        -(1.0 - a * q.powf(-vf - 1.0)) * (1.0 - b * q.powf(vf))
    }
    fn xi(&self, p: &FamilyParams, v: u32, x: f64) -> f64 {
        let (q, a, b) = Self::abq(p);
        qp(a * q.powi(-(v as i32) - 1), q, v) / qp(b, q, v)
            * hyp_phi(
                &[q.powi(-(v as i32)), b * q.powi(v as i32 + 1) / a],
                &[q * q / a],
                q,
                q.powf(x + 1.0),
            )
    }
    fn nu(&self, p: &FamilyParams, x: u32) -> f64 {
        let (q, a, _) = Self::abq(p);
        (a / q).powi(x as i32)
    }
    fn r_factor(&self, p: &FamilyParams, j: u32, x_j: f64, m: u32) -> f64 {
        let (q, a, _) = Self::abq(p);
        let x = x_j - (j as f64 - 1.0);
        (a / q).powi(j as i32 - 1) * q.powf(m as f64 * x)
    }
    fn poly_u_coeffs(&self, p: &FamilyParams, n: u32) -> Option<Vec<f64>> {
        // c'_n 2phi1(q^{-n}, abq^{n-1}; a | q; q^{y+1}) as a polynomial in q^y
        let (q, a, b) = Self::abq(p);
        let ni = n as i32;
        let cp = (-a).powi(-ni) * q.powi(-super::binom2(n)) * qp(a, q, n) / qp(b, q, n);
        let mut out = Vec::with_capacity(n as usize + 1);
        let mut term = cp;
        let mut qk = 1.0;
        for s in 0..=n {
            out.push(term);
            let num = (1.0 - q.powi(-ni) * qk) * (1.0 - a * b * q.powi(ni - 1) * qk);
            let den = (1.0 - a * qk) * (1.0 - q * qk);
            term *= num / den * q;
            qk *= q;
            let _ = s;
        }
        Some(out)
    }
    fn xi_u_coeffs(&self, p: &FamilyParams, v: u32) -> Option<Vec<f64>> {
        let (q, a, b) = Self::abq(p);
        let vi = v as i32;
        let pre = qp(a * q.powi(-vi - 1), q, v) / qp(b, q, v);
        let mut out = Vec::with_capacity(v as usize + 1);
        let mut term = pre;
        let mut qk = 1.0;
        for _ in 0..=v {
            out.push(term);
            let num = (1.0 - q.powi(-vi) * qk) * (1.0 - b * q.powi(vi + 1) / a * qk);
            let den = (1.0 - q * q / a * qk) * (1.0 - q * qk);
            term *= num / den * q;
            qk *= q;
        }
        Some(out)
    }
    fn leading(&self, p: &FamilyParams, n: u32) -> f64 {
        let (q, a, b) = Self::abq(p);
        let ni = n as i32;
        (-a).powi(-ni) * q.powi(-ni * (ni - 1)) * qp(a * b * q.powi(ni - 1), q, n) / qp(b, q, n)
    }
    fn leading_virtual(&self, p: &FamilyParams, v: u32) -> f64 {
        let (q, a, b) = Self::abq(p);
        let vi = v as i32;
        (-a).powi(vi) * q.powi(-vi * (vi + 1)) * qp(b * q.powi(vi + 1) / a, q, v) / qp(b, q, v)
    }
    fn beta_shape(&self, p: &FamilyParams, n: u32) -> f64 {
        let (q, a, b) = Self::abq(p);
        1.0 - a * q.powi(-(n as i32) - 1) / b
    }
    fn beta_shape_prime(&self, p: &FamilyParams, n: u32) -> f64 {
        let (q, _, b) = Self::abq(p);
        1.0 - q.powi(-(n as i32)) / b
    }
}

/// Little q-Laguerre (lqL): q^lambda = a, delta = 1, kappa = q^{-1}.
pub struct LittleQLaguerreFamily;

impl Family for LittleQLaguerreFamily {
    fn id(&self) -> FamilyId {
        FamilyId::LittleQLaguerre
    }
    fn param_names(&self) -> &'static [&'static str] {
        &["a"]
    }
    fn delta(&self) -> &'static [f64] {
        &[1.0]
    }
    fn delta_tilde(&self) -> &'static [f64] {
        &[-1.0]
    }

    fn assemble(
        &self,
        map: &BTreeMap<String, f64>,
        q: Option<f64>,
        _n: Option<u32>,
    ) -> Result<FamilyParams, FamilyError> {
        let q = q.unwrap();
        let la = log_q(named(map, "a")?, q, "a")?;
        Ok(FamilyParams {
            id: self.id(),
            lambda: vec![la],
            q: Some(q),
        })
    }

    fn validate(&self, p: &FamilyParams, dmax: u32) -> Result<(), FamilyError> {
        let (q, a) = (p.qv(), p.val(0));
        require(0.0 < a && a < 1.0, "lqL", "0 < a < 1", format!("a = {a}"))?;
        if dmax >= 1 {
            require(
                a < q.powf(1.0 + dmax as f64),
                "lqL",
                "a < q^{1+d_M}",
                format!("a = {a}, q^(1+d_M) = {}", q.powf(1.0 + dmax as f64)),
            )?;
        }
        Ok(())
    }

    fn lattice_n(&self, _p: &FamilyParams) -> Option<u32> {
        None
    }

    fn kappa(&self, p: &FamilyParams) -> f64 {
        1.0 / p.qv()
    }

    fn twist(&self, p: &FamilyParams) -> Option<FamilyParams> {
        Some(FamilyParams {
            id: p.id,
            lambda: vec![2.0 - p.lambda[0]],
            q: p.q,
        })
    }

    fn b(&self, p: &FamilyParams, x: f64) -> f64 {
        p.val(0) * p.qv().powf(-x - 1.0)
    }
    fn d(&self, p: &FamilyParams, x: f64) -> f64 {
        p.qv().powf(-x) - 1.0
    }
    fn energy(&self, p: &FamilyParams, n: u32) -> f64 {
        p.qv().powi(-(n as i32)) - 1.0
    }
    fn eta(&self, p: &FamilyParams, x: f64) -> f64 {
        1.0 - p.qv().powf(x)
    }
    fn eta_inverse(&self, p: &FamilyParams, eta: f64) -> f64 {
        (1.0 - eta).ln() / p.qv().ln()
    }
    fn poly(&self, p: &FamilyParams, n: u32, x: f64) -> f64 {
        // 2phi0, carries the extra [(-1)^k q^C(k,2)]^{-1} factor
        let (q, a) = (p.qv(), p.val(0));
        hyp_phi(
            &[q.powi(-(n as i32)), q.powf(-x)],
            &[],
            q,
            q.powf(x + 1.0) / a,
        )
    }
    fn phi0_sq(&self, p: &FamilyParams, x: u32) -> f64 {
        let (q, a) = (p.qv(), p.val(0));
        a.powi(x as i32) / qp(q, q, x)
    }
    fn norm_sq(&self, p: &FamilyParams, n: u32) -> f64 {
        let (q, a) = (p.qv(), p.val(0));
        let nf = n as f64;
        a.powi(n as i32) * q.powf(nf * (nf - 1.0)) / qp_all(&[a, q], q, n) * qp_inf(a, q)
    }
    fn alpha(&self, p: &FamilyParams) -> f64 {
        p.val(0) / p.qv()
    }
    fn alpha_prime(&self, p: &FamilyParams) -> f64 {
        -(1.0 - p.val(0) / p.qv())
    }
    fn virtual_energy(&self, p: &FamilyParams, v: u32) -> f64 {
        let (q, a) = (p.qv(), p.val(0));
        -(1.0 - a * q.powi(-(v as i32) - 1))
    }
    fn xi(&self, p: &FamilyParams, v: u32, x: f64) -> f64 {
        let (q, a) = (p.qv(), p.val(0));
        qp(a * q.powi(-(v as i32) - 1), q, v)
            * hyp_phi(
                &[q.powi(-(v as i32)), 0.0],
                &[q * q / a],
                q,
                q.powf(x + 1.0),
            )
    }
    fn nu(&self, p: &FamilyParams, x: u32) -> f64 {
        (p.val(0) / p.qv()).powi(x as i32)
    }
    fn r_factor(&self, p: &FamilyParams, j: u32, x_j: f64, m: u32) -> f64 {
        let (q, a) = (p.qv(), p.val(0));
        let x = x_j - (j as f64 - 1.0);
        (a / q).powi(j as i32 - 1) * q.powf(m as f64 * x)
    }
    fn poly_u_coeffs(&self, p: &FamilyParams, n: u32) -> Option<Vec<f64>> {
        // c'_n 2phi1(q^{-n}, 0; a | q; q^{y+1}) as a polynomial in q^y
        let (q, a) = (p.qv(), p.val(0));
        let ni = n as i32;
        let cp = (-a).powi(-ni) * q.powi(-super::binom2(n)) * qp(a, q, n);
        let mut out = Vec::with_capacity(n as usize + 1);
        let mut term = cp;
        let mut qk = 1.0;
        for _ in 0..=n {
            out.push(term);
            let num = 1.0 - q.powi(-ni) * qk;
            let den = (1.0 - a * qk) * (1.0 - q * qk);
            term *= num / den * q;
            qk *= q;
        }
        Some(out)
    }
    fn xi_u_coeffs(&self, p: &FamilyParams, v: u32) -> Option<Vec<f64>> {
        let (q, a) = (p.qv(), p.val(0));
        let vi = v as i32;
        let pre = qp(a * q.powi(-vi - 1), q, v);
        let mut out = Vec::with_capacity(v as usize + 1);
        let mut term = pre;
        let mut qk = 1.0;
        for _ in 0..=v {
            out.push(term);
            let num = 1.0 - q.powi(-vi) * qk;
            let den = (1.0 - q * q / a * qk) * (1.0 - q * qk);
            term *= num / den * q;
            qk *= q;
        }
        Some(out)
    }
    fn leading(&self, p: &FamilyParams, n: u32) -> f64 {
        let (q, a) = (p.qv(), p.val(0));
        let ni = n as i32;
        (-a).powi(-ni) * q.powi(-ni * (ni - 1))
    }
    fn leading_virtual(&self, p: &FamilyParams, v: u32) -> f64 {
        let (q, a) = (p.qv(), p.val(0));
        let vi = v as i32;
        (-a).powi(vi) * q.powi(-vi * (vi + 1))
    }
    fn beta_shape(&self, p: &FamilyParams, n: u32) -> f64 {
        p.qv().powi(-(n as i32))
    }
    fn beta_shape_prime(&self, p: &FamilyParams, n: u32) -> f64 {
        p.qv().powi(-(n as i32))
    }
}

/// q-Meixner (qM): q^lambda = (b, c), delta = (1,-1), kappa = q. Virtual
/// quantities are given directly, no twist.
pub struct QMeixnerFamily;

impl QMeixnerFamily {
    fn bcq(p: &FamilyParams) -> (f64, f64, f64) {
        (p.qv(), p.val(0), p.val(1))
    }
}

impl Family for QMeixnerFamily {
    fn id(&self) -> FamilyId {
        FamilyId::QMeixner
    }
    fn param_names(&self) -> &'static [&'static str] {
        &["b", "c"]
    }
    fn delta(&self) -> &'static [f64] {
        &[1.0, -1.0]
    }
    fn delta_tilde(&self) -> &'static [f64] {
        &[1.0, 0.0]
    }

    fn assemble(
        &self,
        map: &BTreeMap<String, f64>,
        q: Option<f64>,
        _n: Option<u32>,
    ) -> Result<FamilyParams, FamilyError> {
        let q = q.unwrap();
        let lb = log_q(named(map, "b")?, q, "b")?;
        let lc = log_q(named(map, "c")?, q, "c")?;
        Ok(FamilyParams {
            id: self.id(),
            lambda: vec![lb, lc],
            q: Some(q),
        })
    }

    fn validate(&self, p: &FamilyParams, _dmax: u32) -> Result<(), FamilyError> {
        let (q, b, c) = Self::bcq(p);
        require(
            0.0 < b && b < 1.0 / q,
            "qM",
            "0 < b < q^{-1}",
            format!("b = {b}, q^-1 = {}", 1.0 / q),
        )?;
        require(c > 0.0, "qM", "c > 0", format!("c = {c}"))?;
        Ok(())
    }

    fn lattice_n(&self, _p: &FamilyParams) -> Option<u32> {
        None
    }

    fn kappa(&self, p: &FamilyParams) -> f64 {
        p.qv()
    }

    fn twist(&self, _p: &FamilyParams) -> Option<FamilyParams> {
        None
    }

    fn b(&self, p: &FamilyParams, x: f64) -> f64 {
        let (q, b, c) = Self::bcq(p);
        c * q.powf(x) * (1.0 - b * q.powf(x + 1.0))
    }
    fn d(&self, p: &FamilyParams, x: f64) -> f64 {
        let (q, b, c) = Self::bcq(p);
        (1.0 - q.powf(x)) * (1.0 + b * c * q.powf(x))
    }
    fn energy(&self, p: &FamilyParams, n: u32) -> f64 {
        1.0 - p.qv().powi(n as i32)
    }
    fn eta(&self, p: &FamilyParams, x: f64) -> f64 {
        p.qv().powf(-x) - 1.0
    }
    fn eta_inverse(&self, p: &FamilyParams, eta: f64) -> f64 {
        -(1.0 + eta).ln() / p.qv().ln()
    }
    fn poly(&self, p: &FamilyParams, n: u32, x: f64) -> f64 {
        let (q, b, c) = Self::bcq(p);
        hyp_phi(
            &[q.powi(-(n as i32)), q.powf(-x)],
            &[b * q],
            q,
            -q.powi(n as i32 + 1) / c,
        )
    }
    fn phi0_sq(&self, p: &FamilyParams, x: u32) -> f64 {
        let (q, b, c) = Self::bcq(p);
        qp(b * q, q, x) / qp_all(&[q, -b * c * q], q, x)
            * c.powi(x as i32)
            * q.powi(super::binom2(x))
    }
    fn norm_sq(&self, p: &FamilyParams, n: u32) -> f64 {
        let (q, b, c) = Self::bcq(p);
        q.powi(n as i32) * qp(b * q, q, n) / qp_all(&[q, -q / c], q, n) * qp_inf(-b * c * q, q)
            / qp_inf(-c, q)
    }
    fn alpha(&self, p: &FamilyParams) -> f64 {
        let (q, b, _) = Self::bcq(p);
        -1.0 / (b * q)
    }
    fn alpha_prime(&self, p: &FamilyParams) -> f64 {
        let (q, b, _) = Self::bcq(p);
        -(1.0 / (b * q) - 1.0)
    }
    fn virtual_energy(&self, p: &FamilyParams, v: u32) -> f64 {
        let (q, b, _) = Self::bcq(p);
        -(1.0 / (b * q.powi(v as i32 + 1)) - 1.0)
    }
    fn energy_twisted(&self, p: &FamilyParams, v: u32) -> f64 {
        p.qv().powi(-(v as i32)) - 1.0
    }
    fn xi(&self, p: &FamilyParams, v: u32, x: f64) -> f64 {
        let (q, b, c) = Self::bcq(p);
        hyp_phi(
            &[q.powi(-(v as i32)), q.powf(-x), 0.0],
            &[b * q, -b * c * q],
            q,
            q,
        )
    }
    fn b_prime(&self, p: &FamilyParams, x: f64) -> f64 {
        let (q, b, c) = Self::bcq(p);
        -(1.0 - b * q.powf(x + 1.0)) * (1.0 + b * c * q.powf(x + 1.0))
    }
    fn d_prime(&self, p: &FamilyParams, x: f64) -> f64 {
        let (q, b, c) = Self::bcq(p);
        -b * b * c * q.powf(x + 1.0) * (1.0 - q.powf(x))
    }
    fn phi0t_sq(&self, p: &FamilyParams, x: u32) -> f64 {
        let (q, b, c) = Self::bcq(p);
        qp_all(&[b * q, -b * c * q], q, x) / qp(q, q, x)
            * (b * b * c * q * q).powi(-(x as i32))
            * q.powi(-super::binom2(x))
    }
    fn nu(&self, p: &FamilyParams, x: u32) -> f64 {
        let (q, b, c) = Self::bcq(p);
        1.0 / qp(-q.powi(-(x as i32)) / (b * c), q, x)
    }
    fn r_factor(&self, p: &FamilyParams, j: u32, x_j: f64, m: u32) -> f64 {
        let (q, b, c) = Self::bcq(p);
        let x = x_j - (j as f64 - 1.0);
        qp(-q.powf(-x - m as f64) / (b * c), q, m + 1 - j)
            / qp(-q.powi(-(m as i32)) / (b * c), q, m)
    }
    fn leading(&self, p: &FamilyParams, n: u32) -> f64 {
        let (q, b, c) = Self::bcq(p);
        let ni = n as i32;
        (-c).powi(-ni) * q.powi(ni * ni) / qp(b * q, q, n)
    }
    fn leading_virtual(&self, p: &FamilyParams, v: u32) -> f64 {
        let (q, b, c) = Self::bcq(p);
        1.0 / qp_all(&[b * q, -b * c * q], q, v)
    }
    fn beta_shape(&self, _p: &FamilyParams, _n: u32) -> f64 {
        1.0
    }
    fn beta_shape_prime(&self, p: &FamilyParams, n: u32) -> f64 {
        let (q, b, _) = Self::bcq(p);
        1.0 - b * q.powi(n as i32 + 1)
    }
}
