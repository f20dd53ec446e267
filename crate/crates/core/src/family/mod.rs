//! The thirteen polynomial families and their defining data.
//!
//! Each family supplies its potentials B(x), D(x), energies E_n, sinusoidal
//! coordinate eta(x), polynomials P_n, virtual-state quantities and leading
//! coefficients behind the common [`Family`] trait. Parameters are kept in an
//! additive vector `lambda`; for q-families the components are exponents, so
//! the multiplicative value of component i is q^lambda_i and parameter shifts
//! by delta / delta-tilde are plain additions.

use crate::dd::Dd;
use crate::specfun::{pochhammer, QContext};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

mod ordinary;
mod q_finite;
mod q_semi;

pub use ordinary::{DualHahnFamily, HahnFamily, MeixnerFamily, RacahFamily};
pub use q_finite::{
    AffineQKrawtchoukFamily, DualQHahnFamily, DualQuantumQKrawtchoukFamily, QHahnFamily,
    QRacahFamily, QuantumQKrawtchoukFamily,
};
pub use q_semi::{LittleQJacobiFamily, LittleQLaguerreFamily, QMeixnerFamily};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error("unknown family code `{0}`")]
    UnknownFamily(String),
    #[error("parameter range violated for {family}: {requirement} (got {detail})")]
    Range {
        family: &'static str,
        requirement: &'static str,
        detail: String,
    },
    #[error("missing parameter `{0}`")]
    MissingParameter(String),
    #[error("{0}")]
    Invalid(String),
}

/// Identifiers for the thirteen families, by the usual abbreviations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyId {
    Hahn,
    Racah,
    DualHahn,
    DualQuantumQKrawtchouk,
    QHahn,
    QuantumQKrawtchouk,
    AffineQKrawtchouk,
    QRacah,
    DualQHahn,
    Meixner,
    LittleQJacobi,
    LittleQLaguerre,
    QMeixner,
}

impl FamilyId {
    pub const ALL: [FamilyId; 13] = [
        FamilyId::Hahn,
        FamilyId::Racah,
        FamilyId::DualHahn,
        FamilyId::DualQuantumQKrawtchouk,
        FamilyId::QHahn,
        FamilyId::QuantumQKrawtchouk,
        FamilyId::AffineQKrawtchouk,
        FamilyId::QRacah,
        FamilyId::DualQHahn,
        FamilyId::Meixner,
        FamilyId::LittleQJacobi,
        FamilyId::LittleQLaguerre,
        FamilyId::QMeixner,
    ];

    pub fn code(self) -> &'static str {
        match self {
            FamilyId::Hahn => "H",
            FamilyId::Racah => "R",
            FamilyId::DualHahn => "dH",
            FamilyId::DualQuantumQKrawtchouk => "dqqK",
            FamilyId::QHahn => "qH",
            FamilyId::QuantumQKrawtchouk => "qqK",
            FamilyId::AffineQKrawtchouk => "aqK",
            FamilyId::QRacah => "qR",
            FamilyId::DualQHahn => "dqH",
            FamilyId::Meixner => "M",
            FamilyId::LittleQJacobi => "lqJ",
            FamilyId::LittleQLaguerre => "lqL",
            FamilyId::QMeixner => "qM",
        }
    }

    pub fn from_code(code: &str) -> Result<Self, FamilyError> {
        Self::ALL
            .iter()
            .copied()
            .find(|f| f.code() == code)
            .ok_or_else(|| FamilyError::UnknownFamily(code.to_string()))
    }

    pub fn is_finite(self) -> bool {
        !matches!(
            self,
            FamilyId::Meixner
                | FamilyId::LittleQJacobi
                | FamilyId::LittleQLaguerre
                | FamilyId::QMeixner
        )
    }

    pub fn is_q(self) -> bool {
        !matches!(
            self,
            FamilyId::Hahn | FamilyId::Racah | FamilyId::DualHahn | FamilyId::Meixner
        )
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Which parameter shift to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftDir {
    Delta,
    DeltaTilde,
}

/// A family identifier with its parameter vector (additive representation).
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyParams {
    pub id: FamilyId,
    pub lambda: Vec<f64>,
    pub q: Option<f64>,
}

impl FamilyParams {
    /// Assemble and validate parameters from their named (multiplicative)
    /// values, plus `q` and the lattice size `n` where the family needs them.
    /// `dmax_hint` is the largest index d_M intended for deformations; pass 0
    /// to check only the undeformed ranges.
    pub fn new(
        id: FamilyId,
        named: &BTreeMap<String, f64>,
        q: Option<f64>,
        n: Option<u32>,
        dmax_hint: u32,
    ) -> Result<Self, FamilyError> {
        if id.is_q() {
            let qv = q.ok_or_else(|| FamilyError::MissingParameter("q".into()))?;
            if !(0.0 < qv && qv < 1.0) {
                return Err(FamilyError::Range {
                    family: id.code(),
                    requirement: "0 < q < 1",
                    detail: format!("q = {qv}"),
                });
            }
        }
        if id.is_finite() && n.is_none() {
            return Err(FamilyError::MissingParameter("N".into()));
        }
        let p = ops(id).assemble(named, q, n)?;
        p.validate(dmax_hint)?;
        Ok(p)
    }

    pub fn family(&self) -> &'static dyn Family {
        ops(self.id)
    }

    /// Multiplicative value of parameter component i: q^lambda_i for
    /// q-families, lambda_i itself otherwise.
    pub fn val(&self, i: usize) -> f64 {
        match self.q {
            Some(q) => q.powf(self.lambda[i]),
            None => self.lambda[i],
        }
    }

    pub fn qv(&self) -> f64 {
        self.q.expect("q-family parameter set without q")
    }

    pub fn qctx(&self) -> Option<QContext> {
        self.q.map(|q| QContext::new(q).expect("validated q"))
    }

    /// lambda + u * delta (or delta-tilde).
    pub fn shift(&self, u: f64, dir: ShiftDir) -> FamilyParams {
        let fam = self.family();
        let step = match dir {
            ShiftDir::Delta => fam.delta(),
            ShiftDir::DeltaTilde => fam.delta_tilde(),
        };
        let lambda = self
            .lambda
            .iter()
            .zip(step)
            .map(|(l, s)| l + u * s)
            .collect();
        FamilyParams {
            id: self.id,
            lambda,
            q: self.q,
        }
    }

    pub fn twist(&self) -> Option<FamilyParams> {
        self.family().twist(self)
    }

    pub fn validate(&self, dmax_hint: u32) -> Result<(), FamilyError> {
        self.family().validate(self, dmax_hint)
    }

    /// Lattice size N for finite families.
    pub fn lattice_n(&self) -> Option<u32> {
        self.family().lattice_n(self)
    }
}

/// Complete per-family quantity table. Methods mirror the printed data
/// blocks; defaults derive twist-based quantities from `twist` + the base
/// quantity, which the no-twist families override with their direct forms.
pub trait Family: Sync {
    fn id(&self) -> FamilyId;
    fn param_names(&self) -> &'static [&'static str];
    fn delta(&self) -> &'static [f64];
    fn delta_tilde(&self) -> &'static [f64];

    fn assemble(
        &self,
        named: &BTreeMap<String, f64>,
        q: Option<f64>,
        n: Option<u32>,
    ) -> Result<FamilyParams, FamilyError>;
    fn validate(&self, p: &FamilyParams, dmax_hint: u32) -> Result<(), FamilyError>;
    fn lattice_n(&self, p: &FamilyParams) -> Option<u32>;

    fn kappa(&self, p: &FamilyParams) -> f64;
    fn twist(&self, p: &FamilyParams) -> Option<FamilyParams>;

    fn b(&self, p: &FamilyParams, x: f64) -> f64;
    fn d(&self, p: &FamilyParams, x: f64) -> f64;
    fn energy(&self, p: &FamilyParams, n: u32) -> f64;
    fn eta(&self, p: &FamilyParams, x: f64) -> f64;
    /// Inverse of the sinusoidal coordinate on the physical half line.
    fn eta_inverse(&self, p: &FamilyParams, eta: f64) -> f64;
    fn poly(&self, p: &FamilyParams, n: u32, x: f64) -> f64;
    /// Squared ground state, closed form.
    fn phi0_sq(&self, p: &FamilyParams, x: u32) -> f64;
    /// Normalization constant d_n^2.
    fn norm_sq(&self, p: &FamilyParams, n: u32) -> f64;

    fn alpha(&self, p: &FamilyParams) -> f64;
    fn alpha_prime(&self, p: &FamilyParams) -> f64;
    /// Virtual-state energy, closed form.
    fn virtual_energy(&self, p: &FamilyParams, v: u32) -> f64;
    /// E'_v entering virtual_energy = alpha * E'_v + alpha'.
    fn energy_twisted(&self, p: &FamilyParams, v: u32) -> f64 {
        let t = self.twist(p).expect("twist-defined family");
        self.energy(&t, v)
    }
    /// Virtual-state polynomial, closed form.
    fn xi(&self, p: &FamilyParams, v: u32, x: f64) -> f64 {
        let t = self.twist(p).expect("twist-defined family");
        self.poly(&t, v, x)
    }
    /// Double-double variants feeding the Casoratian determinants, which
    /// cancel heavily near the top of a finite spectrum. Families whose
    /// edge values are exposed to that cancellation override these.
    fn poly_dd(&self, p: &FamilyParams, n: u32, x: f64) -> Dd {
        Dd::from(self.poly(p, n, x))
    }
    fn xi_dd(&self, p: &FamilyParams, v: u32, x: f64) -> Dd {
        Dd::from(self.xi(p, v, x))
    }
    fn r_factor_dd(&self, p: &FamilyParams, j: u32, x_j: f64, m: u32) -> Dd {
        Dd::from(self.r_factor(p, j, x_j, m))
    }
    fn b_prime(&self, p: &FamilyParams, x: f64) -> f64 {
        let t = self.twist(p).expect("twist-defined family");
        self.b(&t, x)
    }
    fn d_prime(&self, p: &FamilyParams, x: f64) -> f64 {
        let t = self.twist(p).expect("twist-defined family");
        self.d(&t, x)
    }
    /// Squared twisted ground state, closed form.
    fn phi0t_sq(&self, p: &FamilyParams, x: u32) -> f64 {
        let t = self.twist(p).expect("twist-defined family");
        self.phi0_sq(&t, x)
    }

    /// nu = phi0 / twisted phi0, closed form.
    fn nu(&self, p: &FamilyParams, x: u32) -> f64;
    /// Row scaling r_j(x_j; lambda, M) with x_j = x + j - 1.
    fn r_factor(&self, p: &FamilyParams, j: u32, x_j: f64, m: u32) -> f64;

    /// Coefficients g_s with P_n(y) = sum_s g_s (q^y)^s, for families on a
    /// saturating lattice (eta = 1 - q^y) where the default series loses
    /// accuracy at large y. None elsewhere.
    fn poly_u_coeffs(&self, _p: &FamilyParams, _n: u32) -> Option<Vec<f64>> {
        None
    }
    /// Matching expansion of the virtual-state polynomial.
    fn xi_u_coeffs(&self, _p: &FamilyParams, _v: u32) -> Option<Vec<f64>> {
        None
    }

    /// Leading coefficient c_n of P_n in eta.
    fn leading(&self, p: &FamilyParams, n: u32) -> f64;
    /// Leading coefficient of xi_v in eta.
    fn leading_virtual(&self, p: &FamilyParams, v: u32) -> f64 {
        let t = self.twist(p).expect("twist-defined family");
        self.leading(&t, v)
    }
    fn beta_shape(&self, p: &FamilyParams, n: u32) -> f64;
    fn beta_shape_prime(&self, p: &FamilyParams, n: u32) -> f64;
}

static HAHN: HahnFamily = HahnFamily;
static RACAH: RacahFamily = RacahFamily;
static DUAL_HAHN: DualHahnFamily = DualHahnFamily;
static DQQK: DualQuantumQKrawtchoukFamily = DualQuantumQKrawtchoukFamily;
static QHAHN: QHahnFamily = QHahnFamily;
static QQK: QuantumQKrawtchoukFamily = QuantumQKrawtchoukFamily;
static AQK: AffineQKrawtchoukFamily = AffineQKrawtchoukFamily;
static QRACAH: QRacahFamily = QRacahFamily;
static DQH: DualQHahnFamily = DualQHahnFamily;
static MEIXNER: MeixnerFamily = MeixnerFamily;
static LQJ: LittleQJacobiFamily = LittleQJacobiFamily;
static LQL: LittleQLaguerreFamily = LittleQLaguerreFamily;
static QMEIXNER: QMeixnerFamily = QMeixnerFamily;

pub fn ops(id: FamilyId) -> &'static dyn Family {
    match id {
        FamilyId::Hahn => &HAHN,
        FamilyId::Racah => &RACAH,
        FamilyId::DualHahn => &DUAL_HAHN,
        FamilyId::DualQuantumQKrawtchouk => &DQQK,
        FamilyId::QHahn => &QHAHN,
        FamilyId::QuantumQKrawtchouk => &QQK,
        FamilyId::AffineQKrawtchouk => &AQK,
        FamilyId::QRacah => &QRACAH,
        FamilyId::DualQHahn => &DQH,
        FamilyId::Meixner => &MEIXNER,
        FamilyId::LittleQJacobi => &LQJ,
        FamilyId::LittleQLaguerre => &LQL,
        FamilyId::QMeixner => &QMEIXNER,
    }
}

// ---------------------------------------------------------------------------
// shared helpers used by the per-family data files and by callers

/// Finite q-shifted factorial with a plain base.
pub(crate) fn qp(a: f64, q: f64, n: u32) -> f64 {
    let mut r = 1.0;
    let mut qk = 1.0;
    for _ in 0..n {
        r *= 1.0 - a * qk;
        qk *= q;
    }
    r
}

/// Finite q-shifted factorial carried in double-double.
pub(crate) fn qp_dd(a: f64, q: f64, n: u32) -> Dd {
    let one = Dd::from(1.0);
    let qdd = Dd::from(q);
    let add = Dd::from(a);
    let mut r = one;
    let mut qk = one;
    for _ in 0..n {
        r = r.mul(one.sub(add.mul(qk)));
        qk = qk.mul(qdd);
    }
    r
}

/// (a;q)_inf truncated at ulp-scale factors.
pub(crate) fn qp_inf(a: f64, q: f64) -> f64 {
    let mut r = 1.0;
    let mut aq = a;
    for _ in 0..10_000 {
        if aq.abs() < 1e-17 {
            break;
        }
        r *= 1.0 - aq;
        aq *= q;
    }
    r
}

pub(crate) fn binom2(n: u32) -> i32 {
    (n as i32) * (n as i32 - 1) / 2
}

pub(crate) fn require(
    cond: bool,
    family: &'static str,
    requirement: &'static str,
    detail: String,
) -> Result<(), FamilyError> {
    if cond {
        Ok(())
    } else {
        Err(FamilyError::Range {
            family,
            requirement,
            detail,
        })
    }
}

pub(crate) fn named(map: &BTreeMap<String, f64>, key: &str) -> Result<f64, FamilyError> {
    map.get(key)
        .copied()
        .ok_or_else(|| FamilyError::MissingParameter(key.into()))
}

/// Exponent of a multiplicative parameter value in base q.
pub(crate) fn log_q(value: f64, q: f64, key: &str) -> Result<f64, FamilyError> {
    if value <= 0.0 {
        return Err(FamilyError::Invalid(format!(
            "parameter `{key}` must be positive for the exponent representation, got {value}"
        )));
    }
    Ok(value.ln() / q.ln())
}

// ---------------------------------------------------------------------------
// derived quantities shared across families

/// varphi(x) = (eta(x+1) - eta(x)) / eta(1).
pub fn varphi(p: &FamilyParams, x: f64) -> f64 {
    let fam = p.family();
    (fam.eta(p, x + 1.0) - fam.eta(p, x)) / fam.eta(p, 1.0)
}

/// varphi_M(x) = prod_{1<=j<k<=M} (eta(x+k-1) - eta(x+j-1)) / eta(k-j).
pub fn varphi_m(p: &FamilyParams, m: u32, x: f64) -> f64 {
    let fam = p.family();
    let mut r = 1.0;
    for j in 1..=m {
        for k in (j + 1)..=m {
            r *= (fam.eta(p, x + k as f64 - 1.0) - fam.eta(p, x + j as f64 - 1.0))
                / fam.eta(p, (k - j) as f64);
        }
    }
    r
}

/// Ground state squared as the running product prod B(y)/D(y+1), the
/// definition the closed forms are checked against.
pub fn phi0_sq_product(p: &FamilyParams, x: u32) -> f64 {
    let fam = p.family();
    let mut r = 1.0;
    for y in 0..x {
        r *= fam.b(p, y as f64) / fam.d(p, (y + 1) as f64);
    }
    r
}

/// Twisted ground state squared from B', D' as a running product.
pub fn phi0t_sq_product(p: &FamilyParams, x: u32) -> f64 {
    let fam = p.family();
    let mut r = 1.0;
    for y in 0..x {
        r *= fam.b_prime(p, y as f64) / fam.d_prime(p, (y + 1) as f64);
    }
    r
}

/// Universal product formula for the leading coefficient c_n.
pub fn leading_universal(p: &FamilyParams, n: u32) -> f64 {
    let fam = p.family();
    let mut r = (-1.0f64).powi(n as i32) * fam.kappa(p).powi(-binom2(n));
    let en = fam.energy(p, n);
    for j in 1..=n {
        let pj = p.shift((j - 1) as f64, ShiftDir::Delta);
        r *= (en - fam.energy(p, j - 1)) / (fam.eta(p, j as f64) * fam.b(&pj, 0.0));
    }
    r
}

/// (c_n, ctilde_n, beta_n, beta'_n) for one index.
pub fn leading_coeffs(p: &FamilyParams, n: u32) -> (f64, f64, f64, f64) {
    let fam = p.family();
    (
        fam.leading(p, n),
        fam.leading_virtual(p, n),
        fam.beta_shape(p, n),
        fam.beta_shape_prime(p, n),
    )
}

/// Check helper used in tests: integer Pochhammer products of several bases.
pub(crate) fn poch_all(bases: &[f64], n: u32) -> f64 {
    bases.iter().map(|&a| pochhammer(a, n)).product()
}

pub(crate) fn qp_all(bases: &[f64], q: f64, n: u32) -> f64 {
    bases.iter().map(|&a| qp(a, q, n)).product()
}
