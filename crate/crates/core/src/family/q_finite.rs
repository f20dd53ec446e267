//! Data blocks for the finite q-families: dual quantum q-Krawtchouk, q-Hahn,
//! quantum q-Krawtchouk, affine q-Krawtchouk, q-Racah, dual q-Hahn.
//!
//! Parameter components are exponents in base q; `p.val(i)` is the
//! multiplicative value q^lambda_i.

use super::{log_q, named, qp, qp_all, qp_dd, require, Family, FamilyError, FamilyId, FamilyParams};
use crate::dd::Dd;
use crate::specfun::{hypergeometric_terminating_dd, QContext, SeriesSpec};
use std::collections::BTreeMap;

pub(crate) fn hyp_phi(upper: &[f64], lower: &[f64], q: f64, z: f64) -> f64 {
    hyp_phi_dd(upper, lower, q, z).value()
}

pub(crate) fn hyp_phi_dd(upper: &[f64], lower: &[f64], q: f64, z: f64) -> Dd {
    let spec = SeriesSpec::basic(upper.to_vec(), lower.to_vec(), z);
    let ctx = QContext::new(q).expect("validated q");
    hypergeometric_terminating_dd(&spec, Some(&ctx)).expect("terminating basic series")
}

/// Dual quantum q-Krawtchouk (dqqK): q^lambda = (p, q^N), delta = (0,-1),
/// kappa = q^{-1}.
pub struct DualQuantumQKrawtchoukFamily;

impl Family for DualQuantumQKrawtchoukFamily {
    fn id(&self) -> FamilyId {
        FamilyId::DualQuantumQKrawtchouk
    }
    fn param_names(&self) -> &'static [&'static str] {
        &["p"]
    }
    fn delta(&self) -> &'static [f64] {
        &[0.0, -1.0]
    }
    fn delta_tilde(&self) -> &'static [f64] {
        &[1.0, 0.0]
    }

    fn assemble(
        &self,
        map: &BTreeMap<String, f64>,
        q: Option<f64>,
        n: Option<u32>,
    ) -> Result<FamilyParams, FamilyError> {
        let q = q.unwrap();
        let lp = log_q(named(map, "p")?, q, "p")?;
        Ok(FamilyParams {
            id: self.id(),
            lambda: vec![lp, n.unwrap() as f64],
            q: Some(q),
        })
    }

    fn validate(&self, p: &FamilyParams, dmax: u32) -> Result<(), FamilyError> {
        let q = p.qv();
        let pp = p.val(0);
        let n = p.lambda[1];
        require(
            pp > q.powf(-n),
            "dqqK",
            "p > q^{-N}",
            format!("p = {pp}, q^-N = {}", q.powf(-n)),
        )?;
        if dmax >= 1 {
            require(
                pp > q.powf(-n - 1.0 - dmax as f64),
                "dqqK",
                "p > q^{-N-1-d_M}",
                format!("p = {pp}, bound = {}", q.powf(-n - 1.0 - dmax as f64)),
            )?;
        }
        Ok(())
    }

    fn lattice_n(&self, p: &FamilyParams) -> Option<u32> {
        Some(p.lambda[1].round() as u32)
    }

    fn kappa(&self, p: &FamilyParams) -> f64 {
        1.0 / p.qv()
    }

    fn twist(&self, p: &FamilyParams) -> Option<FamilyParams> {
        let (lp, n) = (p.lambda[0], p.lambda[1]);
        Some(FamilyParams {
            id: p.id,
            lambda: vec![-n - 1.0, -lp - 1.0],
            q: p.q,
        })
    }

    fn b(&self, p: &FamilyParams, x: f64) -> f64 {
        let (q, pp, n) = (p.qv(), p.val(0), p.lambda[1]);
        q.powf(-x - n - 1.0) / pp * (1.0 - q.powf(n - x))
    }
    fn d(&self, p: &FamilyParams, x: f64) -> f64 {
        let (q, pp) = (p.qv(), p.val(0));
        (q.powf(-x) - 1.0) * (1.0 - q.powf(-x) / pp)
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
        let (q, pp, nn) = (p.qv(), p.val(0), p.lambda[1]);
        hyp_phi(
            &[q.powi(-(n as i32)), q.powf(-x)],
            &[q.powf(-nn)],
            q,
            pp * q.powf(x + 1.0),
        )
    }
    fn phi0_sq(&self, p: &FamilyParams, x: u32) -> f64 {
        let (q, pp, n) = (p.qv(), p.val(0), p.lambda[1]);
        let xf = x as f64;
        qp(q.powf(n - xf + 1.0), q, x) / qp(q, q, x) * pp.powi(-(x as i32)) * q.powf(-n * xf)
            / qp(q.powf(-xf) / pp, q, x)
    }
    fn norm_sq(&self, p: &FamilyParams, n: u32) -> f64 {
        let (q, pp, nn) = (p.qv(), p.val(0), p.lambda[1]);
        let nf = n as f64;
        let big_n = nn.round() as u32;
        qp(q.powf(nn - nf + 1.0), q, n) / qp(q, q, n)
            * pp.powi(-(n as i32))
            * q.powf(nf * (nf - 1.0 - nn))
            / qp(q.powf(-nn) / pp, q, n)
            * qp(q.powf(-nn) / pp, q, big_n)
    }
    fn alpha(&self, p: &FamilyParams) -> f64 {
        let (q, pp, n) = (p.qv(), p.val(0), p.lambda[1]);
        q.powf(-n - 1.0) / pp
    }
    fn alpha_prime(&self, p: &FamilyParams) -> f64 {
        -(1.0 - self.alpha(p))
    }
    fn virtual_energy(&self, p: &FamilyParams, v: u32) -> f64 {
        let (q, pp, n) = (p.qv(), p.val(0), p.lambda[1]);
        -(1.0 - q.powf(-n - 1.0 - v as f64) / pp)
    }
    fn nu(&self, p: &FamilyParams, x: u32) -> f64 {
        let (q, pp, n) = (p.qv(), p.val(0), p.lambda[1]);
        qp(q.powf(-n), q, x) / qp(pp * q, q, x)
    }
    fn r_factor(&self, p: &FamilyParams, j: u32, x_j: f64, m: u32) -> f64 {
        let (q, pp, n) = (p.qv(), p.val(0), p.lambda[1]);
        let x = x_j - (j as f64 - 1.0);
        qp(q.powf(x - n), q, j - 1) * qp(pp * q.powf(x + j as f64), q, m + 1 - j)
            / qp(pp * q, q, m)
    }
    fn leading(&self, p: &FamilyParams, n: u32) -> f64 {
        let (q, pp, nn) = (p.qv(), p.val(0), p.lambda[1]);
        pp.powi(n as i32) * q.powi(-super::binom2(n)) / qp(q.powf(-nn), q, n)
    }
    fn leading_virtual(&self, p: &FamilyParams, v: u32) -> f64 {
        let (q, pp, n) = (p.qv(), p.val(0), p.lambda[1]);
        let vf = v as f64;
        q.powf(-n * vf - 0.5 * vf * (vf + 1.0)) / qp(pp * q, q, v)
    }
    fn beta_shape(&self, p: &FamilyParams, n: u32) -> f64 {
        p.qv().powi(-(n as i32))
    }
    fn beta_shape_prime(&self, p: &FamilyParams, n: u32) -> f64 {
        p.qv().powi(-(n as i32))
    }
}

/// q-Hahn (qH): q^lambda = (a, b, q^N), delta = (1,1,-1), kappa = q^{-1}.
pub struct QHahnFamily;

impl QHahnFamily {
    fn abq(p: &FamilyParams) -> (f64, f64, f64, f64) {
        (p.qv(), p.val(0), p.val(1), p.lambda[2])
    }
}

impl Family for QHahnFamily {
    fn id(&self) -> FamilyId {
        FamilyId::QHahn
    }
    fn param_names(&self) -> &'static [&'static str] {
        &["a", "b"]
    }
    fn delta(&self) -> &'static [f64] {
        &[1.0, 1.0, -1.0]
    }
    fn delta_tilde(&self) -> &'static [f64] {
        &[1.0, -1.0, 0.0]
    }

    fn assemble(
        &self,
        map: &BTreeMap<String, f64>,
        q: Option<f64>,
        n: Option<u32>,
    ) -> Result<FamilyParams, FamilyError> {
        let q = q.unwrap();
        let la = log_q(named(map, "a")?, q, "a")?;
        let lb = log_q(named(map, "b")?, q, "b")?;
        Ok(FamilyParams {
            id: self.id(),
            lambda: vec![la, lb, n.unwrap() as f64],
            q: Some(q),
        })
    }

    fn validate(&self, p: &FamilyParams, dmax: u32) -> Result<(), FamilyError> {
        let (q, a, b, _) = Self::abq(p);
        require(0.0 < a && a < 1.0, "qH", "0 < a < 1", format!("a = {a}"))?;
        require(0.0 < b && b < 1.0, "qH", "0 < b < 1", format!("b = {b}"))?;
        if dmax >= 1 {
            require(
                b < q.powf(1.0 + dmax as f64),
                "qH",
                "b < q^{1+d_M}",
                format!("b = {b}, q^(1+d_M) = {}", q.powf(1.0 + dmax as f64)),
            )?;
        }
        Ok(())
    }

    fn lattice_n(&self, p: &FamilyParams) -> Option<u32> {
        Some(p.lambda[2].round() as u32)
    }

    fn kappa(&self, p: &FamilyParams) -> f64 {
        1.0 / p.qv()
    }

    fn twist(&self, p: &FamilyParams) -> Option<FamilyParams> {
        let (la, lb, n) = (p.lambda[0], p.lambda[1], p.lambda[2]);
        Some(FamilyParams {
            id: p.id,
            lambda: vec![la, 2.0 - lb, lb + n - 1.0],
            q: p.q,
        })
    }

    fn b(&self, p: &FamilyParams, x: f64) -> f64 {
        let (q, a, _, n) = Self::abq(p);
        (1.0 - a * q.powf(x)) * (q.powf(x - n) - 1.0)
    }
    fn d(&self, p: &FamilyParams, x: f64) -> f64 {
        let (q, a, b, n) = Self::abq(p);
        a / q * (1.0 - q.powf(x)) * (q.powf(x - n) - b)
    }
    fn energy(&self, p: &FamilyParams, n: u32) -> f64 {
        let (q, a, b, _) = Self::abq(p);
        let nf = n as f64;
        (q.powf(-nf) - 1.0) * (1.0 - a * b * q.powf(nf - 1.0))
    }
    fn eta(&self, p: &FamilyParams, x: f64) -> f64 {
        p.qv().powf(-x) - 1.0
    }
    fn eta_inverse(&self, p: &FamilyParams, eta: f64) -> f64 {
        -(1.0 + eta).ln() / p.qv().ln()
    }
    fn poly(&self, p: &FamilyParams, n: u32, x: f64) -> f64 {
        let (q, a, b, nn) = Self::abq(p);
        hyp_phi(
            &[q.powi(-(n as i32)), a * b * q.powi(n as i32 - 1), q.powf(-x)],
            &[a, q.powf(-nn)],
            q,
            q,
        )
    }
    fn phi0_sq(&self, p: &FamilyParams, x: u32) -> f64 {
        let (q, a, b, n) = Self::abq(p);
        let xf = x as f64;
        qp(q.powf(n - xf + 1.0), q, x) / qp(q, q, x) * qp(a, q, x)
            / (qp(b * q.powf(n - xf), q, x) * a.powi(x as i32))
    }
    fn norm_sq(&self, p: &FamilyParams, n: u32) -> f64 {
        let (q, a, b, nn) = Self::abq(p);
        let nf = n as f64;
        let big_n = nn.round() as u32;
        qp(q.powf(nn - nf + 1.0), q, n) / qp(q, q, n) * qp_all(&[a, a * b / q], q, n)
            / (qp_all(&[b, a * b * q.powf(nn)], q, n) * a.powi(n as i32))
            * (1.0 - a * b * q.powf(2.0 * nf - 1.0))
            / (1.0 - a * b / q)
            * qp(b, q, big_n)
            * a.powi(big_n as i32)
            / qp(a * b, q, big_n)
    }
    fn alpha(&self, p: &FamilyParams) -> f64 {
        p.val(1) / p.qv()
    }
    fn alpha_prime(&self, p: &FamilyParams) -> f64 {
        let (q, a, b, _) = Self::abq(p);
        -(1.0 - a) * (1.0 - b / q)
    }
    fn virtual_energy(&self, p: &FamilyParams, v: u32) -> f64 {
        let (q, a, b, _) = Self::abq(p);
        let vf = v as f64;
        -(1.0 - a * q.powf(vf)) * (1.0 - b * q.powf(-vf - 1.0))
    }
    fn nu(&self, p: &FamilyParams, x: u32) -> f64 {
        let (q, _, b, n) = Self::abq(p);
        let xf = x as f64;
        qp(q.powf(n - xf + 1.0), q, x) / qp(b * q.powf(n - xf), q, x)
    }
    fn r_factor(&self, p: &FamilyParams, j: u32, x_j: f64, m: u32) -> f64 {
        let (q, _, b, n) = Self::abq(p);
        let x = x_j - (j as f64 - 1.0);
        let mf = m as f64;
        qp(q.powf(n - x - j as f64 + 2.0), q, j - 1) * qp(b * q.powf(n - mf - x), q, m + 1 - j)
            / qp(b * q.powf(n - mf), q, m)
    }
    fn leading(&self, p: &FamilyParams, n: u32) -> f64 {
        let (q, a, b, nn) = Self::abq(p);
        qp(a * b * q.powi(n as i32 - 1), q, n) / (qp(a, q, n) * qp(q.powf(-nn), q, n))
    }
    fn beta_shape(&self, p: &FamilyParams, n: u32) -> f64 {
        let (q, a, b, _) = Self::abq(p);
        1.0 - a / b * q.powi(n as i32 + 1)
    }
    fn beta_shape_prime(&self, p: &FamilyParams, n: u32) -> f64 {
        let (q, a, _, _) = Self::abq(p);
        1.0 - a * q.powi(n as i32)
    }
}

/// Quantum q-Krawtchouk (qqK): q^lambda = (p, q^N), delta = (1,-1), kappa = q.
pub struct QuantumQKrawtchoukFamily;

impl Family for QuantumQKrawtchoukFamily {
    fn id(&self) -> FamilyId {
        FamilyId::QuantumQKrawtchouk
    }
    fn param_names(&self) -> &'static [&'static str] {
        &["p"]
    }
    fn delta(&self) -> &'static [f64] {
        &[1.0, -1.0]
    }
    fn delta_tilde(&self) -> &'static [f64] {
        &[-1.0, 0.0]
    }

    fn assemble(
        &self,
        map: &BTreeMap<String, f64>,
        q: Option<f64>,
        n: Option<u32>,
    ) -> Result<FamilyParams, FamilyError> {
        let q = q.unwrap();
        let lp = log_q(named(map, "p")?, q, "p")?;
        Ok(FamilyParams {
            id: self.id(),
            lambda: vec![lp, n.unwrap() as f64],
            q: Some(q),
        })
    }

    fn validate(&self, p: &FamilyParams, _dmax: u32) -> Result<(), FamilyError> {
        let (q, pp, n) = (p.qv(), p.val(0), p.lambda[1]);
        require(
            pp > q.powf(-n),
            "qqK",
            "p > q^{-N}",
            format!("p = {pp}, q^-N = {}", q.powf(-n)),
        )
    }

    fn lattice_n(&self, p: &FamilyParams) -> Option<u32> {
        Some(p.lambda[1].round() as u32)
    }

    fn kappa(&self, p: &FamilyParams) -> f64 {
        p.qv()
    }

    fn twist(&self, p: &FamilyParams) -> Option<FamilyParams> {
        let (lp, n) = (p.lambda[0], p.lambda[1]);
        Some(FamilyParams {
            id: p.id,
            lambda: vec![-lp, lp + n],
            q: p.q,
        })
    }

    fn b(&self, p: &FamilyParams, x: f64) -> f64 {
        let (q, pp, n) = (p.qv(), p.val(0), p.lambda[1]);
        q.powf(x) / pp * (q.powf(x - n) - 1.0)
    }
    fn d(&self, p: &FamilyParams, x: f64) -> f64 {
        let (q, pp, n) = (p.qv(), p.val(0), p.lambda[1]);
        (1.0 - q.powf(x)) * (1.0 - q.powf(x - n - 1.0) / pp)
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
        let (q, pp, nn) = (p.qv(), p.val(0), p.lambda[1]);
        hyp_phi(
            &[q.powi(-(n as i32)), q.powf(-x)],
            &[q.powf(-nn)],
            q,
            pp * q.powi(n as i32 + 1),
        )
    }
    fn phi0_sq(&self, p: &FamilyParams, x: u32) -> f64 {
        let (q, pp, n) = (p.qv(), p.val(0), p.lambda[1]);
        let xf = x as f64;
        qp(q.powf(n - xf + 1.0), q, x) / qp(q, q, x)
            * pp.powi(-(x as i32))
            * q.powf(xf * (xf - 1.0 - n))
            / qp(q.powf(-n) / pp, q, x)
    }
    fn norm_sq(&self, p: &FamilyParams, n: u32) -> f64 {
        let (q, pp, nn) = (p.qv(), p.val(0), p.lambda[1]);
        let nf = n as f64;
        let big_n = nn.round() as u32;
        qp(q.powf(nn - nf + 1.0), q, n) / qp(q, q, n)
            * pp.powi(-(n as i32))
            * q.powf(-nn * nf)
            / qp(q.powf(-nf) / pp, q, n)
            * qp(q.powf(-nn) / pp, q, big_n)
    }
    fn alpha(&self, p: &FamilyParams) -> f64 {
        1.0 / p.val(0)
    }
    fn alpha_prime(&self, p: &FamilyParams) -> f64 {
        1.0 - 1.0 / p.val(0)
    }
    fn virtual_energy(&self, p: &FamilyParams, v: u32) -> f64 {
        let (q, pp) = (p.qv(), p.val(0));
        1.0 - q.powi(v as i32) / pp
    }
    fn nu(&self, p: &FamilyParams, x: u32) -> f64 {
        let (q, pp, n) = (p.qv(), p.val(0), p.lambda[1]);
        let xf = x as f64;
        qp(q.powf(n + 1.0 - xf), q, x) / qp(pp * q.powf(n + 1.0 - xf), q, x)
    }
    fn r_factor(&self, p: &FamilyParams, j: u32, x_j: f64, m: u32) -> f64 {
        let (q, pp, n) = (p.qv(), p.val(0), p.lambda[1]);
        let x = x_j - (j as f64 - 1.0);
        let mf = m as f64;
        qp(q.powf(n - x - j as f64 + 2.0), q, j - 1)
            * qp(pp * q.powf(n - mf - x + 1.0), q, m + 1 - j)
            / qp(pp * q.powf(n - mf + 1.0), q, m)
    }
    fn leading(&self, p: &FamilyParams, n: u32) -> f64 {
        let (q, pp, nn) = (p.qv(), p.val(0), p.lambda[1]);
        pp.powi(n as i32) * q.powi((n * n) as i32) / qp(q.powf(-nn), q, n)
    }
    fn leading_virtual(&self, p: &FamilyParams, v: u32) -> f64 {
        let (q, pp, nn) = (p.qv(), p.val(0), p.lambda[1]);
        pp.powi(-(v as i32)) * q.powi((v * v) as i32) / qp(q.powf(-nn) / pp, q, v)
    }
    fn beta_shape(&self, p: &FamilyParams, n: u32) -> f64 {
        p.qv().powi(n as i32)
    }
    fn beta_shape_prime(&self, p: &FamilyParams, n: u32) -> f64 {
        p.qv().powi(n as i32)
    }
}

/// Affine q-Krawtchouk (aqK): q^lambda = (p, q^N), delta = (1,-1),
/// kappa = q^{-1}. Virtual quantities are given directly, no twist.
pub struct AffineQKrawtchoukFamily;

impl Family for AffineQKrawtchoukFamily {
    fn id(&self) -> FamilyId {
        FamilyId::AffineQKrawtchouk
    }
    fn param_names(&self) -> &'static [&'static str] {
        &["p"]
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
        n: Option<u32>,
    ) -> Result<FamilyParams, FamilyError> {
        let q = q.unwrap();
        let lp = log_q(named(map, "p")?, q, "p")?;
        Ok(FamilyParams {
            id: self.id(),
            lambda: vec![lp, n.unwrap() as f64],
            q: Some(q),
        })
    }

    fn validate(&self, p: &FamilyParams, _dmax: u32) -> Result<(), FamilyError> {
        let (q, pp) = (p.qv(), p.val(0));
        require(
            0.0 < pp && pp < 1.0 / q,
            "aqK",
            "0 < p < q^{-1}",
            format!("p = {pp}, q^-1 = {}", 1.0 / q),
        )
    }

    fn lattice_n(&self, p: &FamilyParams) -> Option<u32> {
        Some(p.lambda[1].round() as u32)
    }

    fn kappa(&self, p: &FamilyParams) -> f64 {
        1.0 / p.qv()
    }

    fn twist(&self, _p: &FamilyParams) -> Option<FamilyParams> {
        None
    }

    fn b(&self, p: &FamilyParams, x: f64) -> f64 {
        let (q, pp, n) = (p.qv(), p.val(0), p.lambda[1]);
        (q.powf(x - n) - 1.0) * (1.0 - pp * q.powf(x + 1.0))
    }
    fn d(&self, p: &FamilyParams, x: f64) -> f64 {
        let (q, pp, n) = (p.qv(), p.val(0), p.lambda[1]);
        pp * q.powf(x - n) * (1.0 - q.powf(x))
    }
    fn energy(&self, p: &FamilyParams, n: u32) -> f64 {
        p.qv().powi(-(n as i32)) - 1.0
    }
    fn eta(&self, p: &FamilyParams, x: f64) -> f64 {
        p.qv().powf(-x) - 1.0
    }
    fn eta_inverse(&self, p: &FamilyParams, eta: f64) -> f64 {
        -(1.0 + eta).ln() / p.qv().ln()
    }
    fn poly(&self, p: &FamilyParams, n: u32, x: f64) -> f64 {
        let (q, pp, nn) = (p.qv(), p.val(0), p.lambda[1]);
        hyp_phi(
            &[q.powi(-(n as i32)), q.powf(-x), 0.0],
            &[pp * q, q.powf(-nn)],
            q,
            q,
        )
    }
    fn phi0_sq(&self, p: &FamilyParams, x: u32) -> f64 {
        let (q, pp, n) = (p.qv(), p.val(0), p.lambda[1]);
        let xf = x as f64;
        qp(q.powf(n - xf + 1.0), q, x) / qp(q, q, x) * qp(pp * q, q, x) / (pp * q).powi(x as i32)
    }
    fn norm_sq(&self, p: &FamilyParams, n: u32) -> f64 {
        let (q, pp, nn) = (p.qv(), p.val(0), p.lambda[1]);
        let nf = n as f64;
        let big_n = nn.round() as u32;
        qp(q.powf(nn - nf + 1.0), q, n) / qp(q, q, n) * qp(pp * q, q, n)
            / (pp * q).powi(n as i32)
            * (pp * q).powi(big_n as i32)
    }
    fn alpha(&self, _p: &FamilyParams) -> f64 {
        1.0
    }
    fn alpha_prime(&self, p: &FamilyParams) -> f64 {
        -(1.0 - p.val(0) * p.qv())
    }
    fn virtual_energy(&self, p: &FamilyParams, v: u32) -> f64 {
        let (q, pp) = (p.qv(), p.val(0));
        -(1.0 - pp * q.powi(v as i32 + 1))
    }
    fn energy_twisted(&self, p: &FamilyParams, v: u32) -> f64 {
        let (q, pp) = (p.qv(), p.val(0));
        -pp * q * (1.0 - q.powi(v as i32))
    }
    fn xi(&self, p: &FamilyParams, v: u32, x: f64) -> f64 {
        let (q, pp, n) = (p.qv(), p.val(0), p.lambda[1]);
        hyp_phi(
            &[q.powi(-(v as i32)), q.powf(-x)],
            &[pp * q],
            q,
            pp * q.powf(n + v as f64 + 2.0),
        )
    }
    fn b_prime(&self, p: &FamilyParams, x: f64) -> f64 {
        let (q, pp, n) = (p.qv(), p.val(0), p.lambda[1]);
        q.powf(x - n) * (1.0 - pp * q.powf(x + 1.0))
    }
    fn d_prime(&self, p: &FamilyParams, x: f64) -> f64 {
        let (q, pp, n) = (p.qv(), p.val(0), p.lambda[1]);
        pp * q * (q.powf(x - n - 1.0) - 1.0) * (1.0 - q.powf(x))
    }
    fn phi0t_sq(&self, p: &FamilyParams, x: u32) -> f64 {
        let (q, pp, n) = (p.qv(), p.val(0), p.lambda[1]);
        let xf = x as f64;
        qp(pp * q, q, x)
            / (qp(q.powf(n - xf + 1.0), q, x) * qp(q, q, x) * (pp * q).powi(x as i32))
    }
    fn nu(&self, p: &FamilyParams, x: u32) -> f64 {
        let (q, n) = (p.qv(), p.lambda[1]);
        qp(q.powf(n + 1.0 - x as f64), q, x)
    }
    fn r_factor(&self, p: &FamilyParams, j: u32, x_j: f64, _m: u32) -> f64 {
        let (q, n) = (p.qv(), p.lambda[1]);
        let x = x_j - (j as f64 - 1.0);
        qp(q.powf(n - x - j as f64 + 2.0), q, j - 1)
    }
    fn leading(&self, p: &FamilyParams, n: u32) -> f64 {
        let (q, pp, nn) = (p.qv(), p.val(0), p.lambda[1]);
        1.0 / (qp(pp * q, q, n) * qp(q.powf(-nn), q, n))
    }
    fn leading_virtual(&self, p: &FamilyParams, v: u32) -> f64 {
        let (q, pp, n) = (p.qv(), p.val(0), p.lambda[1]);
        (pp * q.powf(n + v as f64 + 1.0)).powi(v as i32) / qp(pp * q, q, v)
    }
    fn beta_shape(&self, p: &FamilyParams, n: u32) -> f64 {
        p.qv().powi(n as i32)
    }
    fn beta_shape_prime(&self, p: &FamilyParams, n: u32) -> f64 {
        1.0 - p.val(0) * p.qv().powi(n as i32 + 1)
    }
}

/// q-Racah (qR): q^lambda = (a, b, c, d) with a = q^{-N}, delta = (1,1,1,1),
/// kappa = q^{-1}.
pub struct QRacahFamily;

impl QRacahFamily {
    fn vals(p: &FamilyParams) -> (f64, f64, f64, f64, f64) {
        (p.qv(), p.val(0), p.val(1), p.val(2), p.val(3))
    }
    fn dt(p: &FamilyParams) -> f64 {
        let (q, a, b, c, d) = Self::vals(p);
        a * b * c / (d * q)
    }
}

impl Family for QRacahFamily {
    fn id(&self) -> FamilyId {
        FamilyId::QRacah
    }
    fn param_names(&self) -> &'static [&'static str] {
        &["b", "c", "d"]
    }
    fn delta(&self) -> &'static [f64] {
        &[1.0, 1.0, 1.0, 1.0]
    }
    fn delta_tilde(&self) -> &'static [f64] {
        &[0.0, 0.0, 1.0, 1.0]
    }

    fn assemble(
        &self,
        map: &BTreeMap<String, f64>,
        q: Option<f64>,
        n: Option<u32>,
    ) -> Result<FamilyParams, FamilyError> {
        let q = q.unwrap();
        let lb = log_q(named(map, "b")?, q, "b")?;
        let lc = log_q(named(map, "c")?, q, "c")?;
        let ld = log_q(named(map, "d")?, q, "d")?;
        Ok(FamilyParams {
            id: self.id(),
            lambda: vec![-(n.unwrap() as f64), lb, lc, ld],
            q: Some(q),
        })
    }

    fn validate(&self, p: &FamilyParams, dmax: u32) -> Result<(), FamilyError> {
        let (q, a, b, c, d) = Self::vals(p);
        require(
            0.0 < a * b && a * b < d && d < 1.0,
            "qR",
            "0 < ab < d < 1",
            format!("ab = {}, d = {d}", a * b),
        )?;
        require(
            q * d < c && c < 1.0,
            "qR",
            "qd < c < 1",
            format!("qd = {}, c = {c}", q * d),
        )?;
        if dmax >= 1 {
            require(
                a * b < d * q.powf(1.0 + dmax as f64),
                "qR",
                "ab < d q^{1+d_M}",
                format!("ab = {}, bound = {}", a * b, d * q.powf(1.0 + dmax as f64)),
            )?;
        }
        Ok(())
    }

    fn lattice_n(&self, p: &FamilyParams) -> Option<u32> {
        Some((-p.lambda[0]).round() as u32)
    }

    fn kappa(&self, p: &FamilyParams) -> f64 {
        1.0 / p.qv()
    }

    fn twist(&self, p: &FamilyParams) -> Option<FamilyParams> {
        let l = &p.lambda;
        Some(FamilyParams {
            id: p.id,
            lambda: vec![l[3] - l[0] + 1.0, l[3] - l[1] + 1.0, l[2], l[3]],
            q: p.q,
        })
    }

    fn b(&self, p: &FamilyParams, x: f64) -> f64 {
        let (q, a, b, c, d) = Self::vals(p);
        let qx = q.powf(x);
        -((1.0 - a * qx) * (1.0 - b * qx) * (1.0 - c * qx) * (1.0 - d * qx))
            / ((1.0 - d * q.powf(2.0 * x)) * (1.0 - d * q.powf(2.0 * x + 1.0)))
    }
    fn d(&self, p: &FamilyParams, x: f64) -> f64 {
        let (q, a, b, c, d) = Self::vals(p);
        let qx = q.powf(x);
        -Self::dt(p)
            * ((1.0 - d * qx / a) * (1.0 - d * qx / b) * (1.0 - d * qx / c) * (1.0 - qx))
            / ((1.0 - d * q.powf(2.0 * x - 1.0)) * (1.0 - d * q.powf(2.0 * x)))
    }
    fn energy(&self, p: &FamilyParams, n: u32) -> f64 {
        let q = p.qv();
        let nf = n as f64;
        (q.powf(-nf) - 1.0) * (1.0 - Self::dt(p) * q.powf(nf))
    }
    fn eta(&self, p: &FamilyParams, x: f64) -> f64 {
        let (q, d) = (p.qv(), p.val(3));
        (q.powf(-x) - 1.0) * (1.0 - d * q.powf(x))
    }
    fn eta_inverse(&self, p: &FamilyParams, eta: f64) -> f64 {
        let (q, d) = (p.qv(), p.val(3));
        let s = 1.0 + d + eta;
        let u = (s + (s * s - 4.0 * d).sqrt()) / 2.0;
        -u.ln() / q.ln()
    }
    fn poly(&self, p: &FamilyParams, n: u32, x: f64) -> f64 {
        self.poly_dd(p, n, x).value()
    }
    fn poly_dd(&self, p: &FamilyParams, n: u32, x: f64) -> Dd {
        let (q, a, b, c, d) = Self::vals(p);
        hyp_phi_dd(
            &[
                q.powi(-(n as i32)),
                Self::dt(p) * q.powi(n as i32),
                q.powf(-x),
                d * q.powf(x),
            ],
            &[a, b, c],
            q,
            q,
        )
    }
    fn xi_dd(&self, p: &FamilyParams, v: u32, x: f64) -> Dd {
        let t = self.twist(p).expect("twist-defined family");
        self.poly_dd(&t, v, x)
    }
    fn r_factor_dd(&self, p: &FamilyParams, j: u32, x_j: f64, m: u32) -> Dd {
        let (q, a, b, _, d) = Self::vals(p);
        let x = x_j - (j as f64 - 1.0);
        let qx = q.powf(x);
        let qxj = q.powf(x + j as f64);
        let num = qp_dd(a * qx, q, j - 1)
            .mul(qp_dd(b * qx, q, j - 1))
            .mul(qp_dd(d * qxj / a, q, m + 1 - j))
            .mul(qp_dd(d * qxj / b, q, m + 1 - j));
        let den = (a * b / (d * q)).powi(j as i32 - 1) * q.powf(m as f64 * x);
        num.div(Dd::from(den))
            .div(qp_dd(d * q / a, q, m))
            .div(qp_dd(d * q / b, q, m))
    }
    fn phi0_sq(&self, p: &FamilyParams, x: u32) -> f64 {
        let (q, a, b, c, d) = Self::vals(p);
        let xf = x as f64;
        qp_all(&[a, b, c, d], q, x)
            / (qp_all(&[d * q / a, d * q / b, d * q / c, q], q, x) * Self::dt(p).powi(x as i32))
            * (1.0 - d * q.powf(2.0 * xf))
            / (1.0 - d)
    }
    fn norm_sq(&self, p: &FamilyParams, n: u32) -> f64 {
        let (q, a, b, c, d) = Self::vals(p);
        let td = Self::dt(p);
        let nf = n as f64;
        let big_n = (-p.lambda[0]).round() as u32;
        let sign = if big_n % 2 == 0 { 1.0 } else { -1.0 };
        qp_all(&[a, b, c, td], q, n)
            / (qp_all(&[td * q / a, td * q / b, td * q / c, q], q, n) * d.powi(n as i32))
            * (1.0 - td * q.powf(2.0 * nf))
            / (1.0 - td)
            * sign
            * qp_all(&[d * q / a, d * q / b, d * q / c], q, big_n)
            * td.powi(big_n as i32)
            * q.powf(0.5 * big_n as f64 * (big_n as f64 + 1.0))
            / (qp(td * q, q, big_n) * qp(d * q, q, 2 * big_n))
    }
    fn alpha(&self, p: &FamilyParams) -> f64 {
        let (q, a, b, _, d) = Self::vals(p);
        a * b / (d * q)
    }
    fn alpha_prime(&self, p: &FamilyParams) -> f64 {
        let c = p.val(2);
        -(1.0 - c) * (1.0 - self.alpha(p))
    }
    fn virtual_energy(&self, p: &FamilyParams, v: u32) -> f64 {
        let (q, a, b, c, d) = Self::vals(p);
        let vf = v as f64;
        -(1.0 - c * q.powf(vf)) * (1.0 - a * b / (d * q.powf(1.0 + vf)))
    }
    fn nu(&self, p: &FamilyParams, x: u32) -> f64 {
        let (q, a, b, _, d) = Self::vals(p);
        (d * q / (a * b)).powi(x as i32) * qp_all(&[a, b], q, x)
            / qp_all(&[d * q / a, d * q / b], q, x)
    }
    fn r_factor(&self, p: &FamilyParams, j: u32, x_j: f64, m: u32) -> f64 {
        let (q, a, b, _, d) = Self::vals(p);
        let x = x_j - (j as f64 - 1.0);
        let qx = q.powf(x);
        let qxj = q.powf(x + j as f64);
        qp(a * qx, q, j - 1) * qp(b * qx, q, j - 1)
            * qp(d * qxj / a, q, m + 1 - j)
            * qp(d * qxj / b, q, m + 1 - j)
            / ((a * b / (d * q)).powi(j as i32 - 1)
                * q.powf(m as f64 * x)
                * qp_all(&[d * q / a, d * q / b], q, m))
    }
    fn leading(&self, p: &FamilyParams, n: u32) -> f64 {
        let (q, a, b, c, _) = Self::vals(p);
        qp(Self::dt(p) * q.powi(n as i32), q, n) / qp_all(&[a, b, c], q, n)
    }
    fn beta_shape(&self, p: &FamilyParams, n: u32) -> f64 {
        let (q, a, b, c, d) = Self::vals(p);
        1.0 - c * d * q.powi(n as i32 + 1) / (a * b)
    }
    fn beta_shape_prime(&self, p: &FamilyParams, n: u32) -> f64 {
        let (q, c) = (p.qv(), p.val(2));
        1.0 - c * q.powi(n as i32)
    }
}

/// Dual q-Hahn (dqH): q^lambda = (a, b, q^N), delta = (1,0,-1), kappa = q^{-1}.
pub struct DualQHahnFamily;

impl DualQHahnFamily {
    fn abq(p: &FamilyParams) -> (f64, f64, f64, f64) {
        (p.qv(), p.val(0), p.val(1), p.lambda[2])
    }
}

impl Family for DualQHahnFamily {
    fn id(&self) -> FamilyId {
        FamilyId::DualQHahn
    }
    fn param_names(&self) -> &'static [&'static str] {
        &["a", "b"]
    }
    fn delta(&self) -> &'static [f64] {
        &[1.0, 0.0, -1.0]
    }
    fn delta_tilde(&self) -> &'static [f64] {
        &[0.0, 1.0, 0.0]
    }

    fn assemble(
        &self,
        map: &BTreeMap<String, f64>,
        q: Option<f64>,
        n: Option<u32>,
    ) -> Result<FamilyParams, FamilyError> {
        let q = q.unwrap();
        let la = log_q(named(map, "a")?, q, "a")?;
        let lb = log_q(named(map, "b")?, q, "b")?;
        Ok(FamilyParams {
            id: self.id(),
            lambda: vec![la, lb, n.unwrap() as f64],
            q: Some(q),
        })
    }

    fn validate(&self, p: &FamilyParams, _dmax: u32) -> Result<(), FamilyError> {
        let (_, a, b, _) = Self::abq(p);
        require(0.0 < a && a < 1.0, "dqH", "0 < a < 1", format!("a = {a}"))?;
        require(0.0 < b && b < 1.0, "dqH", "0 < b < 1", format!("b = {b}"))?;
        Ok(())
    }

    fn lattice_n(&self, p: &FamilyParams) -> Option<u32> {
        Some(p.lambda[2].round() as u32)
    }

    fn kappa(&self, p: &FamilyParams) -> f64 {
        1.0 / p.qv()
    }

    fn twist(&self, p: &FamilyParams) -> Option<FamilyParams> {
        let l = &p.lambda;
        Some(FamilyParams {
            id: p.id,
            lambda: vec![l[1], l[0], -l[0] - l[1] - l[2]],
            q: p.q,
        })
    }

    fn b(&self, p: &FamilyParams, x: f64) -> f64 {
        let (q, a, b, n) = Self::abq(p);
        (q.powf(x - n) - 1.0) * (1.0 - a * q.powf(x)) * (1.0 - a * b * q.powf(x - 1.0))
            / ((1.0 - a * b * q.powf(2.0 * x - 1.0)) * (1.0 - a * b * q.powf(2.0 * x)))
    }
    fn d(&self, p: &FamilyParams, x: f64) -> f64 {
        let (q, a, b, n) = Self::abq(p);
        a * q.powf(x - n - 1.0)
            * (1.0 - q.powf(x))
            * (1.0 - a * b * q.powf(x + n - 1.0))
            * (1.0 - b * q.powf(x - 1.0))
            / ((1.0 - a * b * q.powf(2.0 * x - 2.0)) * (1.0 - a * b * q.powf(2.0 * x - 1.0)))
    }
    fn energy(&self, p: &FamilyParams, n: u32) -> f64 {
        p.qv().powi(-(n as i32)) - 1.0
    }
    fn eta(&self, p: &FamilyParams, x: f64) -> f64 {
        let (q, a, b, _) = Self::abq(p);
        (q.powf(-x) - 1.0) * (1.0 - a * b * q.powf(x - 1.0))
    }
    fn eta_inverse(&self, p: &FamilyParams, eta: f64) -> f64 {
        let (q, a, b, _) = Self::abq(p);
        let d = a * b / q;
        let s = 1.0 + d + eta;
        let u = (s + (s * s - 4.0 * d).sqrt()) / 2.0;
        -u.ln() / q.ln()
    }
    fn poly(&self, p: &FamilyParams, n: u32, x: f64) -> f64 {
        self.poly_dd(p, n, x).value()
    }
    fn poly_dd(&self, p: &FamilyParams, n: u32, x: f64) -> Dd {
        let (q, a, b, nn) = Self::abq(p);
        hyp_phi_dd(
            &[q.powi(-(n as i32)), a * b * q.powf(x - 1.0), q.powf(-x)],
            &[a, q.powf(-nn)],
            q,
            q,
        )
    }
    fn xi_dd(&self, p: &FamilyParams, v: u32, x: f64) -> Dd {
        let (q, a, b, nn) = Self::abq(p);
        hyp_phi_dd(
            &[q.powi(-(v as i32)), a * b * q.powf(x - 1.0), q.powf(-x)],
            &[b, a * b * q.powf(nn)],
            q,
            q,
        )
    }
    fn r_factor_dd(&self, p: &FamilyParams, j: u32, x_j: f64, m: u32) -> Dd {
        let (q, a, b, n) = Self::abq(p);
        let x = x_j - (j as f64 - 1.0);
        let jf = j as f64;
        let num = qp_dd(q.powf(x - n), q, j - 1)
            .mul(qp_dd(a * q.powf(x), q, j - 1))
            .mul(qp_dd(a * b * q.powf(n + x + jf - 1.0), q, m + 1 - j))
            .mul(qp_dd(b * q.powf(x + jf - 1.0), q, m + 1 - j));
        let den = (b * q.powf(n)).powi(1 - j as i32) * q.powf(m as f64 * x);
        num.div(Dd::from(den))
            .div(qp_dd(a * b * q.powf(n), q, m))
            .div(qp_dd(b, q, m))
    }
    fn phi0_sq(&self, p: &FamilyParams, x: u32) -> f64 {
        let (q, a, b, n) = Self::abq(p);
        let xf = x as f64;
        qp(q.powf(n - xf + 1.0), q, x) / qp(q, q, x) * qp_all(&[a, a * b / q], q, x)
            / (qp_all(&[b, a * b * q.powf(n)], q, x) * a.powi(x as i32))
            * (1.0 - a * b * q.powf(2.0 * xf - 1.0))
            / (1.0 - a * b / q)
    }
    fn norm_sq(&self, p: &FamilyParams, n: u32) -> f64 {
        let (q, a, b, nn) = Self::abq(p);
        let nf = n as f64;
        let big_n = nn.round() as u32;
        qp(q.powf(nn - nf + 1.0), q, n) / qp(q, q, n) * qp(a, q, n)
            / (qp(b * q.powf(nn - nf), q, n) * a.powi(n as i32))
            * qp(b, q, big_n)
            * a.powi(big_n as i32)
            / qp(a * b, q, big_n)
    }
    fn alpha(&self, p: &FamilyParams) -> f64 {
        let (q, _, b, n) = Self::abq(p);
        q.powf(-n) / b
    }
    fn alpha_prime(&self, p: &FamilyParams) -> f64 {
        self.alpha(p) - 1.0
    }
    fn virtual_energy(&self, p: &FamilyParams, v: u32) -> f64 {
        let (q, _, b, n) = Self::abq(p);
        q.powf(-n - v as f64) / b - 1.0
    }
    fn xi(&self, p: &FamilyParams, v: u32, x: f64) -> f64 {
        let (q, a, b, nn) = Self::abq(p);
        hyp_phi(
            &[q.powi(-(v as i32)), a * b * q.powf(x - 1.0), q.powf(-x)],
            &[b, a * b * q.powf(nn)],
            q,
            q,
        )
    }
    fn nu(&self, p: &FamilyParams, x: u32) -> f64 {
        let (q, a, b, n) = Self::abq(p);
        let xf = x as f64;
        qp_all(&[q.powf(n + 1.0 - xf), a], q, x)
            / qp_all(&[a * b * q.powf(n), q.powf(1.0 - xf) / b], q, x)
    }
    fn r_factor(&self, p: &FamilyParams, j: u32, x_j: f64, m: u32) -> f64 {
        let (q, a, b, n) = Self::abq(p);
        let x = x_j - (j as f64 - 1.0);
        let jf = j as f64;
        qp(q.powf(x - n), q, j - 1) * qp(a * q.powf(x), q, j - 1)
            * qp(a * b * q.powf(n + x + jf - 1.0), q, m + 1 - j)
            * qp(b * q.powf(x + jf - 1.0), q, m + 1 - j)
            / ((b * q.powf(n)).powi(1 - j as i32)
                * q.powf(m as f64 * x)
                * qp_all(&[a * b * q.powf(n), b], q, m))
    }
    fn leading(&self, p: &FamilyParams, n: u32) -> f64 {
        let (q, a, _, nn) = Self::abq(p);
        1.0 / (qp(a, q, n) * qp(q.powf(-nn), q, n))
    }
    fn leading_virtual(&self, p: &FamilyParams, v: u32) -> f64 {
        let (q, a, b, nn) = Self::abq(p);
        1.0 / (qp(b, q, v) * qp(a * b * q.powf(nn), q, v))
    }
    fn beta_shape(&self, _p: &FamilyParams, _n: u32) -> f64 {
        1.0
    }
    fn beta_shape_prime(&self, _p: &FamilyParams, _n: u32) -> f64 {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::super::{ops, FamilyId, FamilyParams, ShiftDir};
    use std::collections::BTreeMap;

    fn params(
        id: FamilyId,
        pairs: &[(&str, f64)],
        q: f64,
        n: Option<u32>,
        dmax: u32,
    ) -> Result<FamilyParams, super::super::FamilyError> {
        let map: BTreeMap<String, f64> = pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        FamilyParams::new(id, &map, Some(q), n, dmax)
    }

    #[test]
    fn q_racah_ranges() {
        // spec example: valid at d_M = 2
        let p = params(
            FamilyId::QRacah,
            &[("d", 0.5), ("b", 0.008), ("c", 0.6)],
            0.7,
            Some(8),
            2,
        );
        assert!(p.is_ok());
        // 0.008 violates ab < d q^4 at d_M = 3 because a = q^{-8} is large
        let p = params(
            FamilyId::QRacah,
            &[("d", 0.5), ("b", 0.008), ("c", 0.6)],
            0.7,
            Some(8),
            3,
        );
        assert!(p.is_err());
        let p = params(
            FamilyId::QRacah,
            &[("d", 0.5), ("b", 0.002), ("c", 0.6)],
            0.7,
            Some(8),
            3,
        );
        assert!(p.is_ok());
    }

    #[test]
    fn q_racah_eta_form() {
        let p = params(
            FamilyId::QRacah,
            &[("d", 0.5), ("b", 0.008), ("c", 0.6)],
            0.7,
            Some(8),
            2,
        )
        .unwrap();
        let f = ops(FamilyId::QRacah);
        let q: f64 = 0.7;
        for x in 0..=8 {
            let xf = x as f64;
            let want = (q.powf(-xf) - 1.0) * (1.0 - 0.5 * q.powf(xf));
            assert!((f.eta(&p, xf) - want).abs() < 1e-14);
            let back = f.eta_inverse(&p, want);
            assert!((back - xf).abs() < 1e-10);
        }
    }

    #[test]
    fn twist_involution_and_shift_identity() {
        // t(t(lambda)) = lambda and t(lambda) + u delta = t(lambda + u delta-tilde)
        for (id, pairs, q, n) in [
            (FamilyId::QRacah, vec![("d", 0.5), ("b", 0.008), ("c", 0.6)], 0.7, Some(8)),
            (FamilyId::QHahn, vec![("a", 0.35), ("b", 0.05)], 0.55, Some(10)),
            (FamilyId::DualQHahn, vec![("a", 0.3), ("b", 0.4)], 0.6, Some(10)),
            (FamilyId::DualQuantumQKrawtchouk, vec![("p", 5000.0)], 0.5, Some(8)),
            (FamilyId::QuantumQKrawtchouk, vec![("p", 300.0)], 0.5, Some(8)),
        ] {
            let p = params(id, &pairs, q, n, 0).unwrap();
            let t = p.twist().unwrap();
            let tt = t.twist().unwrap();
            for (x, y) in p.lambda.iter().zip(&tt.lambda) {
                assert!((x - y).abs() < 1e-12, "{id:?} twist not involutive");
            }
            for u in [1.0, 2.0, 3.0] {
                let lhs = t.shift(u, ShiftDir::Delta);
                let rhs = p.shift(u, ShiftDir::DeltaTilde).twist().unwrap();
                for (x, y) in lhs.lambda.iter().zip(&rhs.lambda) {
                    assert!((x - y).abs() < 1e-12, "{id:?} shift/twist mismatch");
                }
            }
        }
    }

    #[test]
    fn boundary_zeros() {
        for (id, pairs, q, n) in [
            (FamilyId::DualQuantumQKrawtchouk, vec![("p", 5000.0)], 0.5, 8),
            (FamilyId::QHahn, vec![("a", 0.35), ("b", 0.05)], 0.55, 10),
            (FamilyId::QuantumQKrawtchouk, vec![("p", 300.0)], 0.5, 8),
            (FamilyId::AffineQKrawtchouk, vec![("p", 1.4)], 0.5, 10),
            (FamilyId::QRacah, vec![("d", 0.5), ("b", 0.008), ("c", 0.6)], 0.7, 8),
            (FamilyId::DualQHahn, vec![("a", 0.3), ("b", 0.4)], 0.6, 10),
        ] {
            let p = params(id, &pairs, q, Some(n), 0).unwrap();
            let f = ops(id);
            assert!(f.b(&p, n as f64).abs() < 1e-12, "{id:?} B(N) != 0");
            assert!(f.d(&p, 0.0).abs() < 1e-12, "{id:?} D(0) != 0");
            assert_eq!(f.energy(&p, 0), 0.0);
            assert_eq!(f.poly(&p, 3, 0.0), 1.0);
        }
    }
}
