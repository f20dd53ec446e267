//! Data blocks for the ordinary (non-q) families: Hahn, Racah, dual Hahn,
//! Meixner.

use super::{named, poch_all, require, Family, FamilyError, FamilyId, FamilyParams};
use crate::specfun::{hypergeometric_terminating, pochhammer, SeriesSpec};
use std::collections::BTreeMap;

fn hyp_f(upper: &[f64], lower: &[f64], z: f64) -> f64 {
    let spec = SeriesSpec::ordinary(upper.to_vec(), lower.to_vec(), z);
    hypergeometric_terminating(&spec, None).expect("terminating ordinary series")
}

/// Hahn (H): lambda = (a, b, N), delta = (1,1,-1), kappa = 1.
pub struct HahnFamily;

impl HahnFamily {
    fn abn(p: &FamilyParams) -> (f64, f64, f64) {
        (p.lambda[0], p.lambda[1], p.lambda[2])
    }
}

impl Family for HahnFamily {
    fn id(&self) -> FamilyId {
        FamilyId::Hahn
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
        _q: Option<f64>,
        n: Option<u32>,
    ) -> Result<FamilyParams, FamilyError> {
        let a = named(map, "a")?;
        let b = named(map, "b")?;
        let nn = n.unwrap() as f64;
        Ok(FamilyParams {
            id: FamilyId::Hahn,
            lambda: vec![a, b, nn],
            q: None,
        })
    }

    fn validate(&self, p: &FamilyParams, dmax: u32) -> Result<(), FamilyError> {
        let (a, b, _) = Self::abn(p);
        require(a > 0.0, "H", "a > 0", format!("a = {a}"))?;
        require(b > 0.0, "H", "b > 0", format!("b = {b}"))?;
        if dmax >= 1 {
            require(
                b > 1.0 + dmax as f64,
                "H",
                "b > 1 + d_M",
                format!("b = {b}, d_M = {dmax}"),
            )?;
        }
        Ok(())
    }

    fn lattice_n(&self, p: &FamilyParams) -> Option<u32> {
        Some(p.lambda[2].round() as u32)
    }

    fn kappa(&self, _p: &FamilyParams) -> f64 {
        1.0
    }

    fn twist(&self, p: &FamilyParams) -> Option<FamilyParams> {
        let (a, b, n) = Self::abn(p);
        Some(FamilyParams {
            id: p.id,
            lambda: vec![a, 2.0 - b, n + b - 1.0],
            q: None,
        })
    }

    fn b(&self, p: &FamilyParams, x: f64) -> f64 {
        let (a, _, n) = Self::abn(p);
        (x + a) * (n - x)
    }
    fn d(&self, p: &FamilyParams, x: f64) -> f64 {
        let (_, b, n) = Self::abn(p);
        x * (b + n - x)
    }
    fn energy(&self, p: &FamilyParams, n: u32) -> f64 {
        let (a, b, _) = Self::abn(p);
        let n = n as f64;
        n * (n + a + b - 1.0)
    }
    fn eta(&self, _p: &FamilyParams, x: f64) -> f64 {
        x
    }
    fn eta_inverse(&self, _p: &FamilyParams, eta: f64) -> f64 {
        eta
    }
    fn poly(&self, p: &FamilyParams, n: u32, x: f64) -> f64 {
        let (a, b, nn) = Self::abn(p);
        hyp_f(
            &[-(n as f64), n as f64 + a + b - 1.0, -x],
            &[a, -nn],
            1.0,
        )
    }
    fn phi0_sq(&self, p: &FamilyParams, x: u32) -> f64 {
        let (a, b, n) = Self::abn(p);
        let xf = x as f64;
        pochhammer(n - xf + 1.0, x) / pochhammer(1.0, x) * pochhammer(a, x)
            / pochhammer(b + n - xf, x)
    }
    fn norm_sq(&self, p: &FamilyParams, n: u32) -> f64 {
        let (a, b, nn) = Self::abn(p);
        let nf = n as f64;
        let big_n = nn.round() as u32;
        pochhammer(nn - nf + 1.0, n) / pochhammer(1.0, n) * poch_all(&[a, a + b - 1.0], n)
            / poch_all(&[b, a + b + nn], n)
            * (2.0 * nf + a + b - 1.0)
            / (a + b - 1.0)
            * pochhammer(b, big_n)
            / pochhammer(a + b, big_n)
    }
    fn alpha(&self, _p: &FamilyParams) -> f64 {
        1.0
    }
    fn alpha_prime(&self, p: &FamilyParams) -> f64 {
        let (a, b, _) = Self::abn(p);
        -a * (b - 1.0)
    }
    fn virtual_energy(&self, p: &FamilyParams, v: u32) -> f64 {
        let (a, b, _) = Self::abn(p);
        let v = v as f64;
        -(a + v) * (b - 1.0 - v)
    }
    fn nu(&self, p: &FamilyParams, x: u32) -> f64 {
        let (_, b, n) = Self::abn(p);
        let xf = x as f64;
        pochhammer(n - xf + 1.0, x) / pochhammer(b + n - xf, x)
    }
    fn r_factor(&self, p: &FamilyParams, j: u32, x_j: f64, m: u32) -> f64 {
        let (_, b, n) = Self::abn(p);
        let x = x_j - (j as f64 - 1.0);
        let mf = m as f64;
        pochhammer(n - x - j as f64 + 2.0, j - 1) * pochhammer(b + n - mf - x, m + 1 - j)
            / pochhammer(b + n - mf, m)
    }
    fn leading(&self, p: &FamilyParams, n: u32) -> f64 {
        let (a, b, nn) = Self::abn(p);
        pochhammer(a + b + n as f64 - 1.0, n) / (pochhammer(a, n) * pochhammer(-nn, n))
    }
    fn beta_shape(&self, p: &FamilyParams, n: u32) -> f64 {
        let (a, b, _) = Self::abn(p);
        a - b + n as f64 + 1.0
    }
    fn beta_shape_prime(&self, p: &FamilyParams, n: u32) -> f64 {
        p.lambda[0] + n as f64
    }
}

/// Racah (R): lambda = (a, b, c, d) with a = -N, delta = (1,1,1,1), kappa = 1.
pub struct RacahFamily;

impl RacahFamily {
    fn abcd(p: &FamilyParams) -> (f64, f64, f64, f64) {
        (p.lambda[0], p.lambda[1], p.lambda[2], p.lambda[3])
    }
    fn dt(p: &FamilyParams) -> f64 {
        let (a, b, c, d) = Self::abcd(p);
        a + b + c - d - 1.0
    }
}

impl Family for RacahFamily {
    fn id(&self) -> FamilyId {
        FamilyId::Racah
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
        _q: Option<f64>,
        n: Option<u32>,
    ) -> Result<FamilyParams, FamilyError> {
        let b = named(map, "b")?;
        let c = named(map, "c")?;
        let d = named(map, "d")?;
        let nn = n.unwrap() as f64;
        Ok(FamilyParams {
            id: FamilyId::Racah,
            lambda: vec![-nn, b, c, d],
            q: None,
        })
    }

    fn validate(&self, p: &FamilyParams, dmax: u32) -> Result<(), FamilyError> {
        let (a, b, c, d) = Self::abcd(p);
        require(
            0.0 < d && d < a + b,
            "R",
            "0 < d < a + b",
            format!("d = {d}, a + b = {}", a + b),
        )?;
        require(
            0.0 < c && c < 1.0 + d,
            "R",
            "0 < c < 1 + d",
            format!("c = {c}, 1 + d = {}", 1.0 + d),
        )?;
        if dmax >= 1 {
            require(
                a + b > d + 1.0 + dmax as f64,
                "R",
                "a + b > d + 1 + d_M",
                format!("a + b = {}, d + 1 + d_M = {}", a + b, d + 1.0 + dmax as f64),
            )?;
        }
        Ok(())
    }

    fn lattice_n(&self, p: &FamilyParams) -> Option<u32> {
        Some((-p.lambda[0]).round() as u32)
    }

    fn kappa(&self, _p: &FamilyParams) -> f64 {
        1.0
    }

    fn twist(&self, p: &FamilyParams) -> Option<FamilyParams> {
        let (a, b, c, d) = Self::abcd(p);
        Some(FamilyParams {
            id: p.id,
            lambda: vec![d - a + 1.0, d - b + 1.0, c, d],
            q: None,
        })
    }

    fn b(&self, p: &FamilyParams, x: f64) -> f64 {
        let (a, b, c, d) = Self::abcd(p);
        -((x + a) * (x + b) * (x + c) * (x + d)) / ((2.0 * x + d) * (2.0 * x + 1.0 + d))
    }
    fn d(&self, p: &FamilyParams, x: f64) -> f64 {
        let (a, b, c, d) = Self::abcd(p);
        -((x + d - a) * (x + d - b) * (x + d - c) * x) / ((2.0 * x - 1.0 + d) * (2.0 * x + d))
    }
    fn energy(&self, p: &FamilyParams, n: u32) -> f64 {
        let n = n as f64;
        n * (n + Self::dt(p))
    }
    fn eta(&self, p: &FamilyParams, x: f64) -> f64 {
        x * (x + p.lambda[3])
    }
    fn eta_inverse(&self, p: &FamilyParams, eta: f64) -> f64 {
        let d = p.lambda[3];
        (-d + (d * d + 4.0 * eta).sqrt()) / 2.0
    }
    fn poly(&self, p: &FamilyParams, n: u32, x: f64) -> f64 {
        let (a, b, c, d) = Self::abcd(p);
        hyp_f(
            &[-(n as f64), n as f64 + Self::dt(p), -x, x + d],
            &[a, b, c],
            1.0,
        )
    }
    fn phi0_sq(&self, p: &FamilyParams, x: u32) -> f64 {
        let (a, b, c, d) = Self::abcd(p);
        let xf = x as f64;
        poch_all(&[a, b, c, d], x) / poch_all(&[1.0 + d - a, 1.0 + d - b, 1.0 + d - c, 1.0], x)
            * (2.0 * xf + d)
            / d
    }
    fn norm_sq(&self, p: &FamilyParams, n: u32) -> f64 {
        let (a, b, c, d) = Self::abcd(p);
        let td = Self::dt(p);
        let nf = n as f64;
        let big_n = (-a).round() as u32;
        let sign = if big_n % 2 == 0 { 1.0 } else { -1.0 };
        poch_all(&[a, b, c, td], n)
            / poch_all(&[1.0 + td - a, 1.0 + td - b, 1.0 + td - c, 1.0], n)
            * (2.0 * nf + td)
            / td
            * sign
            * poch_all(&[1.0 + d - a, 1.0 + d - b, 1.0 + d - c], big_n)
            / (pochhammer(td + 1.0, big_n) * pochhammer(d + 1.0, 2 * big_n))
    }
    fn alpha(&self, _p: &FamilyParams) -> f64 {
        1.0
    }
    fn alpha_prime(&self, p: &FamilyParams) -> f64 {
        let (a, b, c, d) = Self::abcd(p);
        -c * (a + b - d - 1.0)
    }
    fn virtual_energy(&self, p: &FamilyParams, v: u32) -> f64 {
        let (a, b, c, d) = Self::abcd(p);
        let v = v as f64;
        -(c + v) * (a + b - d - 1.0 - v)
    }
    fn nu(&self, p: &FamilyParams, x: u32) -> f64 {
        let (a, b, _, d) = Self::abcd(p);
        poch_all(&[a, b], x) / poch_all(&[d - a + 1.0, d - b + 1.0], x)
    }
    fn r_factor(&self, p: &FamilyParams, j: u32, x_j: f64, m: u32) -> f64 {
        let (a, b, _, d) = Self::abcd(p);
        let x = x_j - (j as f64 - 1.0);
        let jf = j as f64;
        pochhammer(x + a, j - 1) * pochhammer(x + b, j - 1)
            * pochhammer(x + d - a + jf, m + 1 - j)
            * pochhammer(x + d - b + jf, m + 1 - j)
            / (pochhammer(d - a + 1.0, m) * pochhammer(d - b + 1.0, m))
    }
    fn leading(&self, p: &FamilyParams, n: u32) -> f64 {
        let (a, b, c, _) = Self::abcd(p);
        pochhammer(Self::dt(p) + n as f64, n) / poch_all(&[a, b, c], n)
    }
    fn beta_shape(&self, p: &FamilyParams, n: u32) -> f64 {
        let (a, b, c, d) = Self::abcd(p);
        c + d - a - b + n as f64 + 1.0
    }
    fn beta_shape_prime(&self, p: &FamilyParams, n: u32) -> f64 {
        p.lambda[2] + n as f64
    }
}

/// Dual Hahn (dH): lambda = (a, b, N), delta = (1,0,-1), kappa = 1.
pub struct DualHahnFamily;

impl DualHahnFamily {
    fn abn(p: &FamilyParams) -> (f64, f64, f64) {
        (p.lambda[0], p.lambda[1], p.lambda[2])
    }
}

impl Family for DualHahnFamily {
    fn id(&self) -> FamilyId {
        FamilyId::DualHahn
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
        _q: Option<f64>,
        n: Option<u32>,
    ) -> Result<FamilyParams, FamilyError> {
        let a = named(map, "a")?;
        let b = named(map, "b")?;
        Ok(FamilyParams {
            id: FamilyId::DualHahn,
            lambda: vec![a, b, n.unwrap() as f64],
            q: None,
        })
    }

    fn validate(&self, p: &FamilyParams, _dmax: u32) -> Result<(), FamilyError> {
        let (a, b, _) = Self::abn(p);
        require(a > 0.0, "dH", "a > 0", format!("a = {a}"))?;
        require(b > 0.0, "dH", "b > 0", format!("b = {b}"))?;
        Ok(())
    }

    fn lattice_n(&self, p: &FamilyParams) -> Option<u32> {
        Some(p.lambda[2].round() as u32)
    }

    fn kappa(&self, _p: &FamilyParams) -> f64 {
        1.0
    }

    fn twist(&self, p: &FamilyParams) -> Option<FamilyParams> {
        let (a, b, n) = Self::abn(p);
        Some(FamilyParams {
            id: p.id,
            lambda: vec![b, a, -a - b - n],
            q: None,
        })
    }

    fn b(&self, p: &FamilyParams, x: f64) -> f64 {
        let (a, b, n) = Self::abn(p);
        (x + a) * (x + a + b - 1.0) * (n - x) / ((2.0 * x - 1.0 + a + b) * (2.0 * x + a + b))
    }
    fn d(&self, p: &FamilyParams, x: f64) -> f64 {
        let (a, b, n) = Self::abn(p);
        x * (x + b - 1.0) * (x + a + b + n - 1.0)
            / ((2.0 * x - 2.0 + a + b) * (2.0 * x - 1.0 + a + b))
    }
    fn energy(&self, _p: &FamilyParams, n: u32) -> f64 {
        n as f64
    }
    fn eta(&self, p: &FamilyParams, x: f64) -> f64 {
        let (a, b, _) = Self::abn(p);
        x * (x + a + b - 1.0)
    }
    fn eta_inverse(&self, p: &FamilyParams, eta: f64) -> f64 {
        let (a, b, _) = Self::abn(p);
        let d = a + b - 1.0;
        (-d + (d * d + 4.0 * eta).sqrt()) / 2.0
    }
    fn poly(&self, p: &FamilyParams, n: u32, x: f64) -> f64 {
        let (a, b, nn) = Self::abn(p);
        hyp_f(&[-(n as f64), x + a + b - 1.0, -x], &[a, -nn], 1.0)
    }
    fn phi0_sq(&self, p: &FamilyParams, x: u32) -> f64 {
        let (a, b, n) = Self::abn(p);
        let xf = x as f64;
        pochhammer(n - xf + 1.0, x) / pochhammer(1.0, x) * poch_all(&[a, a + b - 1.0], x)
            / poch_all(&[b, a + b + n], x)
            * (2.0 * xf + a + b - 1.0)
            / (a + b - 1.0)
    }
    fn norm_sq(&self, p: &FamilyParams, n: u32) -> f64 {
        let (a, b, nn) = Self::abn(p);
        let nf = n as f64;
        let big_n = nn.round() as u32;
        pochhammer(nn - nf + 1.0, n) / pochhammer(1.0, n) * pochhammer(a, n)
            / pochhammer(b + nn - nf, n)
            * pochhammer(b, big_n)
            / pochhammer(a + b, big_n)
    }
    fn alpha(&self, _p: &FamilyParams) -> f64 {
        1.0
    }
    fn alpha_prime(&self, p: &FamilyParams) -> f64 {
        let (_, b, n) = Self::abn(p);
        b + n
    }
    fn virtual_energy(&self, p: &FamilyParams, v: u32) -> f64 {
        let (_, b, n) = Self::abn(p);
        b + n + v as f64
    }
    fn xi(&self, p: &FamilyParams, v: u32, x: f64) -> f64 {
        // P_v at twisted parameters, written out to keep the series explicit
        let (a, b, n) = Self::abn(p);
        hyp_f(&[-(v as f64), x + a + b - 1.0, -x], &[b, a + b + n], 1.0)
    }
    fn nu(&self, p: &FamilyParams, x: u32) -> f64 {
        let (a, b, n) = Self::abn(p);
        poch_all(&[a, -n], x) / poch_all(&[b, a + b + n], x)
    }
    fn r_factor(&self, p: &FamilyParams, j: u32, x_j: f64, m: u32) -> f64 {
        let (a, b, n) = Self::abn(p);
        let x = x_j - (j as f64 - 1.0);
        let jf = j as f64;
        pochhammer(x - n, j - 1) * pochhammer(x + a, j - 1)
            * pochhammer(a + b + n + x + jf - 1.0, m + 1 - j)
            * pochhammer(b + x + jf - 1.0, m + 1 - j)
            / (pochhammer(a + b + n, m) * pochhammer(b, m))
    }
    fn leading(&self, p: &FamilyParams, n: u32) -> f64 {
        let (a, _, nn) = Self::abn(p);
        1.0 / (pochhammer(a, n) * pochhammer(-nn, n))
    }
    fn leading_virtual(&self, p: &FamilyParams, v: u32) -> f64 {
        let (a, b, n) = Self::abn(p);
        1.0 / (pochhammer(b, v) * pochhammer(a + b + n, v))
    }
    fn beta_shape(&self, _p: &FamilyParams, _n: u32) -> f64 {
        1.0
    }
    fn beta_shape_prime(&self, _p: &FamilyParams, _n: u32) -> f64 {
        1.0
    }
}

/// Meixner (M): lambda = (beta, c), delta = (1,0), kappa = 1. Semi-infinite.
pub struct MeixnerFamily;

impl MeixnerFamily {
    fn bc(p: &FamilyParams) -> (f64, f64) {
        (p.lambda[0], p.lambda[1])
    }
}

impl Family for MeixnerFamily {
    fn id(&self) -> FamilyId {
        FamilyId::Meixner
    }
    fn param_names(&self) -> &'static [&'static str] {
        &["beta", "c"]
    }
    fn delta(&self) -> &'static [f64] {
        &[1.0, 0.0]
    }
    fn delta_tilde(&self) -> &'static [f64] {
        &[1.0, 0.0]
    }

    fn assemble(
        &self,
        map: &BTreeMap<String, f64>,
        _q: Option<f64>,
        _n: Option<u32>,
    ) -> Result<FamilyParams, FamilyError> {
        let beta = named(map, "beta")?;
        let c = named(map, "c")?;
        Ok(FamilyParams {
            id: FamilyId::Meixner,
            lambda: vec![beta, c],
            q: None,
        })
    }

    fn validate(&self, p: &FamilyParams, _dmax: u32) -> Result<(), FamilyError> {
        let (beta, c) = Self::bc(p);
        require(beta > 0.0, "M", "beta > 0", format!("beta = {beta}"))?;
        require(0.0 < c && c < 1.0, "M", "0 < c < 1", format!("c = {c}"))?;
        Ok(())
    }

    fn lattice_n(&self, _p: &FamilyParams) -> Option<u32> {
        None
    }

    fn kappa(&self, _p: &FamilyParams) -> f64 {
        1.0
    }

    fn twist(&self, p: &FamilyParams) -> Option<FamilyParams> {
        let (beta, c) = Self::bc(p);
        Some(FamilyParams {
            id: p.id,
            lambda: vec![beta, 1.0 / c],
            q: None,
        })
    }

    fn b(&self, p: &FamilyParams, x: f64) -> f64 {
        let (beta, c) = Self::bc(p);
        c * (x + beta)
    }
    fn d(&self, _p: &FamilyParams, x: f64) -> f64 {
        x
    }
    fn energy(&self, p: &FamilyParams, n: u32) -> f64 {
        let (_, c) = Self::bc(p);
        (1.0 - c) * n as f64
    }
    fn eta(&self, _p: &FamilyParams, x: f64) -> f64 {
        x
    }
    fn eta_inverse(&self, _p: &FamilyParams, eta: f64) -> f64 {
        eta
    }
    fn poly(&self, p: &FamilyParams, n: u32, x: f64) -> f64 {
        let (beta, c) = Self::bc(p);
        hyp_f(&[-(n as f64), -x], &[beta], 1.0 - 1.0 / c)
    }
    fn phi0_sq(&self, p: &FamilyParams, x: u32) -> f64 {
        // (beta)_x c^x / x! as a product of bounded ratios; the separate
        // Pochhammers overflow beyond x ~ 170
        let (beta, c) = Self::bc(p);
        let mut r = 1.0;
        for y in 0..x {
            r *= c * (beta + y as f64) / (y as f64 + 1.0);
        }
        r
    }
    fn norm_sq(&self, p: &FamilyParams, n: u32) -> f64 {
        let (beta, c) = Self::bc(p);
        let mut r = (1.0 - c).powf(beta);
        for k in 0..n {
            r *= c * (beta + k as f64) / (k as f64 + 1.0);
        }
        r
    }
    fn alpha(&self, p: &FamilyParams) -> f64 {
        p.lambda[1]
    }
    fn alpha_prime(&self, p: &FamilyParams) -> f64 {
        let (beta, c) = Self::bc(p);
        -(1.0 - c) * beta
    }
    fn virtual_energy(&self, p: &FamilyParams, v: u32) -> f64 {
        let (beta, c) = Self::bc(p);
        -(1.0 - c) * (v as f64 + beta)
    }
    fn xi(&self, p: &FamilyParams, v: u32, x: f64) -> f64 {
        let (beta, c) = Self::bc(p);
        hyp_f(&[-(v as f64), -x], &[beta], 1.0 - c)
    }
    fn nu(&self, p: &FamilyParams, x: u32) -> f64 {
        p.lambda[1].powi(x as i32)
    }
    fn r_factor(&self, p: &FamilyParams, j: u32, _x_j: f64, _m: u32) -> f64 {
        p.lambda[1].powi(j as i32 - 1)
    }
    fn leading(&self, p: &FamilyParams, n: u32) -> f64 {
        let (beta, c) = Self::bc(p);
        (1.0 - 1.0 / c).powi(n as i32) / pochhammer(beta, n)
    }
    fn leading_virtual(&self, p: &FamilyParams, v: u32) -> f64 {
        let (beta, c) = Self::bc(p);
        (1.0 - c).powi(v as i32) / pochhammer(beta, v)
    }
    fn beta_shape(&self, _p: &FamilyParams, _n: u32) -> f64 {
        1.0
    }
    fn beta_shape_prime(&self, p: &FamilyParams, n: u32) -> f64 {
        p.lambda[0] + n as f64
    }
}

#[cfg(test)]
mod tests {
    use super::super::{ops, FamilyId, FamilyParams};
    use std::collections::BTreeMap;

    fn params(id: FamilyId, pairs: &[(&str, f64)], n: Option<u32>) -> FamilyParams {
        let map: BTreeMap<String, f64> =
            pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        FamilyParams::new(id, &map, None, n, 0).unwrap()
    }

    #[test]
    fn hahn_spot_values() {
        let p = params(FamilyId::Hahn, &[("a", 1.2), ("b", 4.5)], Some(10));
        let f = ops(FamilyId::Hahn);
        assert_eq!(f.b(&p, 10.0), 0.0);
        assert_eq!(f.d(&p, 0.0), 0.0);
        assert!((f.energy(&p, 1) - 5.7).abs() < 1e-14);
        // P_1(2) = 1 - 2 (a+b) / (a N)
        let want = 1.0 - 2.0 * 5.7 / 12.0;
        assert!((f.poly(&p, 1, 2.0) - want).abs() < 1e-14);
        assert_eq!(f.poly(&p, 3, 0.0), 1.0);
        assert_eq!(f.poly(&p, 0, 4.0), 1.0);
    }

    #[test]
    fn hahn_range_check() {
        let map: BTreeMap<String, f64> = [("a".to_string(), 1.2), ("b".to_string(), 2.0)]
            .into_iter()
            .collect();
        assert!(FamilyParams::new(FamilyId::Hahn, &map, None, Some(10), 2).is_err());
        let map: BTreeMap<String, f64> = [("a".to_string(), 1.2), ("b".to_string(), 4.5)]
            .into_iter()
            .collect();
        assert!(FamilyParams::new(FamilyId::Hahn, &map, None, Some(10), 2).is_ok());
    }

    #[test]
    fn hahn_shift_and_twist() {
        let p = params(FamilyId::Hahn, &[("a", 1.2), ("b", 4.5)], Some(10));
        let s = p.shift(1.0, super::super::ShiftDir::Delta);
        assert_eq!(s.lambda, vec![2.2, 5.5, 9.0]);
        let t = p.twist().unwrap();
        assert_eq!(t.lambda, vec![1.2, 2.0 - 4.5, 10.0 + 4.5 - 1.0]);
    }

    #[test]
    fn dual_hahn_virtual_energy() {
        let p = params(FamilyId::DualHahn, &[("a", 1.2), ("b", 0.5)], Some(10));
        let f = ops(FamilyId::DualHahn);
        assert!((f.virtual_energy(&p, 1) - 11.5).abs() < 1e-14);
        assert_eq!(f.beta_shape(&p, 3), 1.0);
        assert_eq!(f.beta_shape_prime(&p, 3), 1.0);
    }

    #[test]
    fn meixner_spot_values() {
        let p = params(FamilyId::Meixner, &[("beta", 2.5), ("c", 0.4)], None);
        let f = ops(FamilyId::Meixner);
        assert!((f.b(&p, 3.0) - 2.2).abs() < 1e-15);
        assert_eq!(f.d(&p, 0.0), 0.0);
        // phi0(2)^2 = B(0)/D(1) * B(1)/D(2) = 0.7
        let prod = super::super::phi0_sq_product(&p, 2);
        assert!((prod - 0.7).abs() < 1e-15);
        assert!((f.phi0_sq(&p, 2) - 0.7).abs() < 1e-15);
        assert_eq!(f.r_factor(&p, 3, 5.0, 2), 0.4 * 0.4);
    }

    #[test]
    fn racah_varphi_identity() {
        // varphi(x) (d+1) = 2x + d + 1
        let p = params(
            FamilyId::Racah,
            &[("b", 16.0), ("c", 0.4), ("d", 0.7)],
            Some(10),
        );
        for x in 0..=9 {
            let v = super::super::varphi(&p, x as f64);
            let want = (2.0 * x as f64 + 0.7 + 1.0) / (0.7 + 1.0);
            assert!((v - want).abs() < 1e-14);
        }
    }
}
