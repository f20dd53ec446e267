//! Exactly solvable birth-death processes on the deformed systems:
//! continuous-time generator with its spectral solution, the discrete-time
//! Markov chain, repeated (multi-step) processes with tuned weights, and
//! Gillespie-style Monte Carlo as a stochastic oracle.

use crate::linalg::Matrix;
use crate::miop::System;
use crate::operators::{build_h_tilde_prime, GeneratorMatrix, MatrixRole, OperatorError};
use crate::FamilyId;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BdError {
    #[error("unsupported family for this process: {0}")]
    UnsupportedFamily(String),
    #[error("time scale too large: t_S = {t_s} but the bound is {bound}")]
    TimeScaleTooLarge { t_s: f64, bound: f64 },
    #[error("weight tuning infeasible at band {band}, x = {x}: {detail}")]
    TuningInfeasible { band: i64, x: usize, detail: String },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// Tolerated negative rounding dust in externally supplied distributions.
const NEG_DUST: f64 = 1e-12;
/// Evolved distributions may carry slightly more dust from the spectral sum.
const EVOLVE_NEG_DUST: f64 = 1e-10;
/// On a truncated semi-infinite lattice a delta-type initial state is only
/// representable by the retained modes, leaving small oscillatory residue;
/// it is clipped and reported through `min_raw` rather than rejected.
const TRUNCATED_NEG_DUST: f64 = 1e-5;
/// Conservation slack for accepting a distribution.
const SUM_SLACK: f64 = 1e-9;

/// Nonnegative vector over the lattice summing to one.
#[derive(Debug, Clone)]
pub struct ProbabilityVector {
    values: Vec<f64>,
    /// Sum before clipping/renormalization; conservation checks read this.
    pub raw_sum: f64,
    /// Most negative raw component (rounding dust diagnostics).
    pub min_raw: f64,
}

impl ProbabilityVector {
    pub fn new(raw: Vec<f64>) -> Result<Self, BdError> {
        Self::with_dust(raw, NEG_DUST)
    }

    fn with_dust(raw: Vec<f64>, dust: f64) -> Result<Self, BdError> {
        let min_raw = raw.iter().copied().fold(f64::INFINITY, f64::min);
        if min_raw < -dust {
            return Err(BdError::InvalidDistribution(format!(
                "negative component {min_raw}"
            )));
        }
        let raw_sum: f64 = raw.iter().sum();
        if (raw_sum - 1.0).abs() > SUM_SLACK {
            return Err(BdError::InvalidDistribution(format!(
                "total mass {raw_sum} is not 1"
            )));
        }
        let mut values: Vec<f64> = raw.into_iter().map(|v| v.max(0.0)).collect();
        let s: f64 = values.iter().sum();
        for v in &mut values {
            *v /= s;
        }
        Ok(ProbabilityVector {
            values,
            raw_sum,
            min_raw,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn delta(lattice: usize, x0: usize) -> Self {
        let mut v = vec![0.0; lattice];
        v[x0] = 1.0;
        ProbabilityVector {
            values: v,
            raw_sum: 1.0,
            min_raw: 0.0,
        }
    }

    pub fn uniform(lattice: usize) -> Self {
        ProbabilityVector {
            values: vec![1.0 / lattice as f64; lattice],
            raw_sum: 1.0,
            min_raw: 1.0 / lattice as f64,
        }
    }
}

/// Total variation distance between two distributions.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
}

/// Shared spectral data: energies and the orthonormal eigenbasis on the
/// working lattice.
#[derive(Debug)]
pub struct SpectralData {
    pub lattice: usize,
    pub finite: bool,
    pub energies: Vec<f64>,
    /// Rows are the normalized eigenvectors phi-hat_n.
    pub basis: Vec<Vec<f64>>,
    /// Number of leading modes with negligible orthonormality defect; equals
    /// `lattice` for finite families, may be smaller under truncation.
    pub modes: usize,
    pub stationary: Vec<f64>,
}

impl SpectralData {
    fn from_system(sys: &System) -> Result<Arc<Self>, BdError> {
        let lattice = sys.lattice_len();
        let basis = sys.normalized_basis();
        let energies: Vec<f64> = (0..lattice as u32).map(|n| sys.energy(n)).collect();
        let modes = if sys.is_finite() {
            lattice
        } else {
            // spectral expansions sum every kept mode's Gram defect, so keep
            // modes within a total defect budget; written NaN-safe so an
            // overflowed high mode ends the scan
            let mut ok = 0;
            let mut budget = 5e-11;
            'outer: for n in 0..lattice {
                if basis[n].iter().any(|v| !v.is_finite()) {
                    break;
                }
                let mut defect = 0.0f64;
                for m in 0..=n {
                    let dot: f64 = (0..lattice).map(|x| basis[n][x] * basis[m][x]).sum();
                    let want = if n == m { 1.0 } else { 0.0 };
                    let dev = (dot - want).abs();
                    if !(dev <= 1e-9) {
                        break 'outer;
                    }
                    defect = defect.max(dev);
                }
                if defect > budget {
                    break;
                }
                budget -= defect;
                ok = n + 1;
            }
            ok.max(1)
        };
        let stationary: Vec<f64> = basis[0].iter().map(|v| v * v).collect();
        let mass: f64 = stationary.iter().sum();
        if (mass - 1.0).abs() > 1e-9 {
            return Err(BdError::InvalidDistribution(format!(
                "stationary weight sums to {mass}"
            )));
        }
        Ok(Arc::new(SpectralData {
            lattice,
            finite: sys.is_finite(),
            energies,
            basis,
            modes,
            stationary,
        }))
    }

    /// Expansion coefficients of p0 in the eigenbasis; c_0 = 1 for a
    /// normalized input.
    pub fn expand(&self, p0: &[f64]) -> Vec<f64> {
        (0..self.modes)
            .map(|n| {
                (0..self.lattice)
                    .map(|x| self.basis[n][x] * p0[x] / self.basis[0][x])
                    .sum()
            })
            .collect()
    }

    fn evolve_dust(&self) -> f64 {
        if self.finite {
            EVOLVE_NEG_DUST
        } else {
            TRUNCATED_NEG_DUST
        }
    }

    fn evolve_with(&self, p0: &[f64], factor: impl Fn(usize) -> f64) -> Vec<f64> {
        let c = self.expand(p0);
        (0..self.lattice)
            .map(|x| {
                let s: f64 = (0..self.modes)
                    .map(|n| c[n] * factor(n) * self.basis[n][x])
                    .sum();
                self.basis[0][x] * s
            })
            .collect()
    }

    fn transition_with(&self, factor: impl Fn(usize) -> f64) -> Matrix {
        let n = self.lattice;
        let mut m = Matrix::zeros(n);
        for x in 0..n {
            for y in 0..n {
                let mut s = 0.0;
                for k in 0..self.modes {
                    s += factor(k) * self.basis[k][x] * self.basis[k][y];
                }
                m.set(x, y, self.basis[0][x] * s / self.basis[0][y]);
            }
        }
        m
    }
}

/// Continuous-time birth-death process dP/dt = L P.
pub struct ContinuousBd {
    pub spectral: Arc<SpectralData>,
    pub generator: GeneratorMatrix,
    /// Effective birth rates (reflecting at the truncation boundary).
    pub birth: Vec<f64>,
    pub death: Vec<f64>,
    /// Outflow rate dropped by the reflecting truncation, weighted by the
    /// stationary mass at the boundary; zero for finite families.
    pub truncation_flux: f64,
}

impl ContinuousBd {
    pub fn new(sys: &System) -> Result<Self, BdError> {
        if sys.params().id == FamilyId::QMeixner {
            return Err(BdError::UnsupportedFamily(
                "continuous-time process is not defined for qM".into(),
            ));
        }
        let n = sys.lattice_len();
        let mut birth: Vec<f64> = (0..n).map(|x| sys.b_def(x)).collect();
        let death: Vec<f64> = (0..n).map(|x| sys.d_def(x)).collect();
        let spectral = SpectralData::from_system(sys)?;
        let mut truncation_flux = 0.0;
        if !sys.is_finite() {
            truncation_flux = birth[n - 1] * spectral.stationary[n - 1];
            birth[n - 1] = 0.0;
        }
        let mut m = Matrix::zeros(n);
        for x in 0..n {
            m.set(x, x, -(birth[x] + death[x]));
            if x + 1 < n {
                m.set(x, x + 1, death[x + 1]);
                m.set(x + 1, x, birth[x]);
            }
        }
        // consistency with -transpose(Htilde'): exact for finite lattices
        debug_assert!({
            let htp = build_h_tilde_prime(sys);
            let diff = (0..n * n)
                .map(|i| (m.data[i] + htp.matrix.transpose().data[i]).abs())
                .fold(0.0f64, f64::max);
            !sys.is_finite() || diff == 0.0
        });
        Ok(ContinuousBd {
            spectral,
            generator: GeneratorMatrix {
                role: MatrixRole::LBd,
                matrix: m,
            },
            birth,
            death,
            truncation_flux,
        })
    }

    pub fn lattice(&self) -> usize {
        self.spectral.lattice
    }

    pub fn stationary(&self) -> &[f64] {
        &self.spectral.stationary
    }

    pub fn expand_initial(&self, p0: &ProbabilityVector) -> Vec<f64> {
        self.spectral.expand(p0.values())
    }

    /// Spectral solution of the initial value problem at time t.
    pub fn evolve(&self, p0: &ProbabilityVector, t: f64) -> Result<ProbabilityVector, BdError> {
        let e = &self.spectral.energies;
        let raw = self
            .spectral
            .evolve_with(p0.values(), |n| (-e[n] * t).exp());
        ProbabilityVector::with_dust(raw, self.spectral.evolve_dust())
    }

    /// Transition kernel P(x, y; t); columns are distributions.
    pub fn transition(&self, t: f64) -> Matrix {
        let e = &self.spectral.energies;
        self.spectral.transition_with(|n| (-e[n] * t).exp())
    }

    /// One Gillespie trajectory: (jump time, new state), starting at x0.
    pub fn simulate(&self, x0: usize, t_end: f64, seed: u64) -> Vec<(f64, usize)> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        self.simulate_with(&mut rng, x0, t_end)
    }

    fn simulate_with(&self, rng: &mut ChaCha12Rng, x0: usize, t_end: f64) -> Vec<(f64, usize)> {
        let mut out = Vec::new();
        let mut x = x0;
        let mut t = 0.0;
        loop {
            let rate = self.birth[x] + self.death[x];
            if rate <= 0.0 {
                break;
            }
            let u: f64 = rng.random();
            t -= (1.0 - u).ln() / rate;
            if t > t_end {
                break;
            }
            let up: f64 = rng.random();
            if up * rate < self.birth[x] {
                x += 1;
            } else {
                x -= 1;
            }
            out.push((t, x));
        }
        out
    }

    /// Empirical occupation at t over many trajectories; trajectory i uses
    /// the independent stream (seed, i).
    pub fn simulate_ensemble(
        &self,
        x0: usize,
        t_end: f64,
        trajectories: usize,
        seed: u64,
    ) -> Vec<f64> {
        let counts: Vec<usize> = (0..trajectories)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let traj = self.simulate_with(&mut rng, x0, t_end);
                traj.last().map_or(x0, |&(_, x)| x)
            })
            .collect();
        let mut hist = vec![0.0; self.lattice()];
        for c in counts {
            hist[c] += 1.0;
        }
        for h in &mut hist {
            *h /= trajectories as f64;
        }
        hist
    }
}

/// Discrete-time birth-death chain P(l+1) = L P(l), L = I + t_S L_ct.
pub struct DiscreteBd {
    pub spectral: Arc<SpectralData>,
    pub t_s: f64,
    pub kappa: Vec<f64>,
    pub matrix: GeneratorMatrix,
    birth: Vec<f64>,
    death: Vec<f64>,
}

impl DiscreteBd {
    /// Build with the given time scale, or auto-select
    /// t_S = 0.5 / max(B_D + D_D), halving while any kappa_n <= -1.
    pub fn new(sys: &System, t_s: Option<f64>) -> Result<Self, BdError> {
        let cbd = ContinuousBd::new(sys)?;
        Self::from_continuous(&cbd, t_s)
    }

    pub fn from_continuous(cbd: &ContinuousBd, t_s: Option<f64>) -> Result<Self, BdError> {
        if !cbd.spectral.finite {
            return Err(BdError::UnsupportedFamily(
                "discrete-time chain needs a finite family".into(),
            ));
        }
        let n = cbd.lattice();
        let max_rate = (0..n)
            .map(|x| cbd.birth[x] + cbd.death[x])
            .fold(0.0f64, f64::max);
        let bound = 1.0 / max_rate;
        let mut ts = match t_s {
            Some(v) => {
                if v <= 0.0 || v * max_rate >= 1.0 {
                    return Err(BdError::TimeScaleTooLarge { t_s: v, bound });
                }
                v
            }
            None => 0.5 / max_rate,
        };
        let kappa_of = |ts: f64| -> Vec<f64> {
            cbd.spectral
                .energies
                .iter()
                .map(|e| 1.0 - ts * e)
                .collect()
        };
        let mut kappa = kappa_of(ts);
        if t_s.is_none() {
            for _ in 0..10 {
                if kappa.iter().all(|&k| k > -1.0) {
                    break;
                }
                ts *= 0.5;
                kappa = kappa_of(ts);
            }
        }
        if kappa.iter().any(|&k| k <= -1.0) {
            return Err(BdError::TimeScaleTooLarge { t_s: ts, bound });
        }
        let mut m = Matrix::identity(n);
        for x in 0..n {
            for y in 0..n {
                let v = m.get(x, y) + ts * cbd.generator.matrix.get(x, y);
                m.set(x, y, v);
            }
        }
        Ok(DiscreteBd {
            spectral: Arc::clone(&cbd.spectral),
            t_s: ts,
            kappa,
            matrix: GeneratorMatrix {
                role: MatrixRole::LdBd,
                matrix: m,
            },
            birth: cbd.birth.clone(),
            death: cbd.death.clone(),
        })
    }

    pub fn lattice(&self) -> usize {
        self.spectral.lattice
    }

    pub fn evolve(&self, p0: &ProbabilityVector, steps: u32) -> Result<ProbabilityVector, BdError> {
        let raw = self
            .spectral
            .evolve_with(p0.values(), |n| self.kappa[n].powi(steps as i32));
        ProbabilityVector::with_dust(raw, self.spectral.evolve_dust())
    }

    pub fn transition(&self, steps: u32) -> Matrix {
        self.spectral
            .transition_with(|n| self.kappa[n].powi(steps as i32))
    }

    /// One chain trajectory of `steps` states (after the initial one).
    pub fn simulate(&self, x0: usize, steps: u32, seed: u64) -> Vec<usize> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        self.simulate_with(&mut rng, x0, steps)
    }

    fn simulate_with(&self, rng: &mut ChaCha12Rng, x0: usize, steps: u32) -> Vec<usize> {
        let mut out = Vec::with_capacity(steps as usize);
        let mut x = x0;
        for _ in 0..steps {
            let up = self.t_s * self.birth[x];
            let down = self.t_s * self.death[x];
            let u: f64 = rng.random();
            x = if u < up {
                x + 1
            } else if u < up + down {
                x - 1
            } else {
                x
            };
            out.push(x);
        }
        out
    }

    pub fn simulate_ensemble(
        &self,
        x0: usize,
        steps: u32,
        trajectories: usize,
        seed: u64,
    ) -> Vec<f64> {
        let counts: Vec<usize> = (0..trajectories)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                self.simulate_with(&mut rng, x0, steps)
                    .last()
                    .copied()
                    .unwrap_or(x0)
            })
            .collect();
        let mut hist = vec![0.0; self.lattice()];
        for c in counts {
            hist[c] += 1.0;
        }
        for h in &mut hist {
            *h /= trajectories as f64;
        }
        hist
    }
}

/// Repeated-process order and mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepeatedMode {
    Continuous,
    Discrete,
}

/// Banded generator X_D built from powers of the continuous generator with
/// tuned weights; models up to m births/deaths per event.
pub struct RepeatedBd {
    pub spectral: Arc<SpectralData>,
    pub m: u32,
    pub weights: Vec<f64>,
    pub mode: RepeatedMode,
    pub t_s: Option<f64>,
    pub x_matrix: GeneratorMatrix,
    /// Generator eigenvalues E^(m)_n (continuous) in ascending n.
    pub gen_eigen: Vec<f64>,
    /// kappa^(m)_n for the discrete variant.
    pub kappa: Option<Vec<f64>>,
}

/// Verify the alternating-sign band structure of L^k and tune the weights
/// c_0 = 1, c_1, ..., c_{m-1} so every band of X is strictly positive and
/// the diagonal strictly negative. Deterministic minimal rule: each bound
/// is taken with a 1.1 safety factor.
pub fn tune_repeated_weights(cbd: &ContinuousBd, m: u32) -> Result<Vec<f64>, BdError> {
    assert!(m >= 1);
    let n = cbd.lattice();
    let l = &cbd.generator.matrix;
    let mut powers: Vec<Matrix> = Vec::with_capacity(m as usize);
    let mut acc = l.clone();
    for _ in 0..m {
        powers.push(acc.clone());
        acc = acc.matmul(l);
    }
    // sign structure: (L^k)_{x+s,x} = (-1)^{k-|s|} a(x) with a > 0
    for (ki, p) in powers.iter().enumerate() {
        let k = ki + 1;
        for x in 0..n {
            for s in -(k as i64)..=(k as i64) {
                let row = x as i64 + s;
                if row < 0 || row >= n as i64 {
                    continue;
                }
                let v = p.get(row as usize, x);
                let want_sign = if (k as i64 - s.abs()) % 2 == 0 { 1.0 } else { -1.0 };
                if v * want_sign <= 0.0 {
                    return Err(BdError::TuningInfeasible {
                        band: s,
                        x,
                        detail: format!("L^{k} band entry {v} breaks the sign pattern"),
                    });
                }
            }
        }
    }
    let mut c = vec![0.0; m as usize];
    c[0] = 1.0;
    // band s = +-(m-k) gets contributions from powers m-j for j <= k
    let band_partial = |c: &[f64], upto_j: usize, s: i64, x: usize| -> f64 {
        let mut v = 0.0;
        for (j, cj) in c.iter().enumerate().take(upto_j) {
            let k = m as usize - j;
            if s.unsigned_abs() as usize > k {
                continue;
            }
            let row = x as i64 + s;
            v += cj * powers[k - 1].get(row as usize, x);
        }
        v
    };
    for k in 1..m as usize {
        let is_last = k == m as usize - 1;
        let mut bound = 0.0f64;
        for x in 0..n {
            let mut offsets: Vec<i64> = Vec::new();
            let s = (m as usize - k) as i64;
            offsets.push(s);
            offsets.push(-s);
            if is_last {
                offsets.push(0);
            }
            for s in offsets {
                let row = x as i64 + s;
                if row < 0 || row >= n as i64 {
                    continue;
                }
                let partial = band_partial(&c, k, s, x);
                let coeff = powers[m as usize - k - 1].get(row as usize, x);
                if s == 0 {
                    // diagonal must end negative; coeff = (L^{m-k})_{x,x} < 0
                    if coeff >= 0.0 {
                        return Err(BdError::TuningInfeasible {
                            band: 0,
                            x,
                            detail: "diagonal coefficient not negative".into(),
                        });
                    }
                    bound = bound.max(partial / -coeff);
                } else {
                    // band must end positive; coeff > 0 by the sign pattern
                    if coeff <= 0.0 {
                        return Err(BdError::TuningInfeasible {
                            band: s,
                            x,
                            detail: "band coefficient not positive".into(),
                        });
                    }
                    bound = bound.max(-partial / coeff);
                }
            }
        }
        c[k] = if bound > 0.0 { 1.1 * bound } else { 0.0 };
    }
    Ok(c)
}

fn build_x_matrix(cbd: &ContinuousBd, weights: &[f64]) -> Matrix {
    let m = weights.len() as u32;
    let l = &cbd.generator.matrix;
    let mut x = Matrix::zeros(l.n);
    let mut power = l.clone();
    let mut by_power: Vec<Matrix> = Vec::new();
    for _ in 0..m {
        by_power.push(power.clone());
        power = power.matmul(l);
    }
    for (j, cj) in weights.iter().enumerate() {
        let k = m as usize - j;
        x = x.add(&by_power[k - 1].scale(*cj));
    }
    x
}

impl RepeatedBd {
    pub fn new(
        cbd: &ContinuousBd,
        m: u32,
        mode: RepeatedMode,
        t_s: Option<f64>,
    ) -> Result<Self, BdError> {
        let weights = tune_repeated_weights(cbd, m)?;
        Self::with_weights(cbd, m, mode, t_s, weights)
    }

    pub fn with_weights(
        cbd: &ContinuousBd,
        m: u32,
        mode: RepeatedMode,
        t_s: Option<f64>,
        weights: Vec<f64>,
    ) -> Result<Self, BdError> {
        let xm = build_x_matrix(cbd, &weights);
        // verify the tuned structure
        let n = xm.n;
        for x in 0..n {
            let v = xm.get(x, x);
            if v >= 0.0 {
                return Err(BdError::TuningInfeasible {
                    band: 0,
                    x,
                    detail: format!("diagonal {v} not negative after tuning"),
                });
            }
            for s in 1..=m as i64 {
                for row in [x as i64 + s, x as i64 - s] {
                    if row < 0 || row >= n as i64 {
                        continue;
                    }
                    let v = xm.get(row as usize, x);
                    if v <= 0.0 {
                        return Err(BdError::TuningInfeasible {
                            band: s,
                            x,
                            detail: format!("band entry {v} not positive after tuning"),
                        });
                    }
                }
            }
        }
        // generator eigenvalues E^(m)_n = sum_j (-1)^{m-j} c_j E_n^{m-j}
        let gen_eigen: Vec<f64> = cbd
            .spectral
            .energies
            .iter()
            .map(|&e| {
                let mut s = 0.0;
                for (j, cj) in weights.iter().enumerate() {
                    let p = (m as usize - j) as i32;
                    s += cj * (-1.0f64).powi(p) * e.powi(p);
                }
                s
            })
            .collect();
        let (t_s, kappa) = match mode {
            RepeatedMode::Continuous => (None, None),
            RepeatedMode::Discrete => {
                let max_diag = (0..n).map(|x| -xm.get(x, x)).fold(0.0f64, f64::max);
                let bound = 1.0 / max_diag;
                let ts = match t_s {
                    Some(v) => {
                        if v <= 0.0 || v * max_diag >= 1.0 {
                            return Err(BdError::TimeScaleTooLarge { t_s: v, bound });
                        }
                        v
                    }
                    None => 0.5 / max_diag,
                };
                let kappa: Vec<f64> = gen_eigen.iter().map(|&e| 1.0 + ts * e).collect();
                (Some(ts), Some(kappa))
            }
        };
        let (role, matrix) = match mode {
            RepeatedMode::Continuous => (MatrixRole::LBdM, xm),
            RepeatedMode::Discrete => {
                let ts = t_s.unwrap();
                let mut m2 = Matrix::identity(n);
                for i in 0..n {
                    for j in 0..n {
                        let v = m2.get(i, j) + ts * xm.get(i, j);
                        m2.set(i, j, v);
                    }
                }
                // nonnegativity of the stochastic matrix
                for i in 0..n {
                    for j in 0..n {
                        if m2.get(i, j) < 0.0 {
                            return Err(BdError::TimeScaleTooLarge {
                                t_s: ts,
                                bound: 1.0 / (0..n).map(|x| -xm.get(x, x)).fold(0.0f64, f64::max),
                            });
                        }
                    }
                }
                (MatrixRole::LdBdM, m2)
            }
        };
        Ok(RepeatedBd {
            spectral: Arc::clone(&cbd.spectral),
            m,
            weights,
            mode,
            t_s,
            x_matrix: GeneratorMatrix { role, matrix },
            gen_eigen,
            kappa,
        })
    }

    pub fn evolve_continuous(
        &self,
        p0: &ProbabilityVector,
        t: f64,
    ) -> Result<ProbabilityVector, BdError> {
        let raw = self
            .spectral
            .evolve_with(p0.values(), |n| (self.gen_eigen[n] * t).exp());
        ProbabilityVector::with_dust(raw, self.spectral.evolve_dust())
    }

    pub fn evolve_discrete(
        &self,
        p0: &ProbabilityVector,
        steps: u32,
    ) -> Result<ProbabilityVector, BdError> {
        let kappa = self
            .kappa
            .as_ref()
            .ok_or_else(|| BdError::InvalidDistribution("not a discrete repeated process".into()))?;
        let raw = self
            .spectral
            .evolve_with(p0.values(), |n| kappa[n].powi(steps as i32));
        ProbabilityVector::with_dust(raw, self.spectral.evolve_dust())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::FamilyParams;
    use crate::miop::IndexSet;
    use std::collections::BTreeMap;

    fn hahn_cbd(d: &[u32]) -> ContinuousBd {
        let map: BTreeMap<String, f64> = [("a".to_string(), 1.2), ("b".to_string(), 4.5)]
            .into_iter()
            .collect();
        let p = FamilyParams::new(FamilyId::Hahn, &map, None, Some(10), 3).unwrap();
        let sys = System::new(p, IndexSet::new(d.to_vec()).unwrap()).unwrap();
        ContinuousBd::new(&sys).unwrap()
    }

    #[test]
    fn generator_column_sums_vanish() {
        let cbd = hahn_cbd(&[2]);
        let scale = cbd.generator.matrix.max_abs();
        for s in cbd.generator.matrix.column_sums() {
            assert!(s.abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn stationary_is_fixed_point() {
        let cbd = hahn_cbd(&[2]);
        let pi = ProbabilityVector::new(cbd.stationary().to_vec()).unwrap();
        let c = cbd.expand_initial(&pi);
        assert!((c[0] - 1.0).abs() < 1e-10);
        for (n, v) in c.iter().enumerate().skip(1) {
            assert!(v.abs() < 1e-9, "c[{n}] = {v}");
        }
        let out = cbd.evolve(&pi, 3.0).unwrap();
        let tv = total_variation(out.values(), cbd.stationary());
        assert!(tv < 1e-10);
    }

    #[test]
    fn evolve_t0_reconstructs() {
        let cbd = hahn_cbd(&[1, 2]);
        let p0 = ProbabilityVector::delta(cbd.lattice(), 0);
        let out = cbd.evolve(&p0, 0.0).unwrap();
        for (a, b) in out.values().iter().zip(p0.values()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn conservation_along_time() {
        let cbd = hahn_cbd(&[2]);
        for p0 in [
            ProbabilityVector::delta(cbd.lattice(), 0),
            ProbabilityVector::delta(cbd.lattice(), cbd.lattice() - 1),
            ProbabilityVector::uniform(cbd.lattice()),
        ] {
            for t in [0.01, 0.1, 1.0, 10.0] {
                let out = cbd.evolve(&p0, t).unwrap();
                assert!((out.raw_sum - 1.0).abs() < 1e-9, "t={t}: {}", out.raw_sum);
                assert!(out.min_raw > -1e-10);
            }
        }
    }

    #[test]
    fn derivative_matches_generator() {
        // central finite difference of d/dt at t = 0 vs L p0 (the spectral
        // formula extends smoothly through t = 0)
        let cbd = hahn_cbd(&[2]);
        let p0 = ProbabilityVector::uniform(cbd.lattice());
        let h = 1e-6;
        let fwd = cbd.evolve(&p0, h).unwrap();
        let bwd = cbd.evolve(&p0, -h).unwrap();
        let lp = cbd.generator.matrix.matvec(p0.values());
        let scale = lp.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for x in 0..cbd.lattice() {
            let fd = (fwd.values()[x] - bwd.values()[x]) / (2.0 * h);
            assert!(
                (fd - lp[x]).abs() < 1e-5 * scale.max(1.0),
                "x={x}: {fd} vs {}",
                lp[x]
            );
        }
    }

    #[test]
    fn transition_kernel_identity_and_ck() {
        let cbd = hahn_cbd(&[2]);
        let n = cbd.lattice();
        let t0 = cbd.transition(0.0);
        for x in 0..n {
            for y in 0..n {
                let want = if x == y { 1.0 } else { 0.0 };
                assert!((t0.get(x, y) - want).abs() < 1e-9);
            }
        }
        let full = cbd.transition(0.3);
        let part = cbd.transition(0.2).matmul(&cbd.transition(0.1));
        for i in 0..n {
            for j in 0..n {
                assert!((full.get(i, j) - part.get(i, j)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn discrete_chain_properties() {
        let cbd = hahn_cbd(&[2]);
        let dbd = DiscreteBd::from_continuous(&cbd, None).unwrap();
        let n = dbd.lattice();
        // stochastic matrix
        for v in &dbd.matrix.matrix.data {
            assert!(*v >= 0.0);
        }
        for s in dbd.matrix.matrix.column_sums() {
            assert!((s - 1.0).abs() < 1e-12);
        }
        // kappa strictly decreasing inside (-1, 1]
        assert_eq!(dbd.kappa[0], 1.0);
        for w in dbd.kappa.windows(2) {
            assert!(w[0] > w[1]);
        }
        assert!(dbd.kappa.last().unwrap() > &-1.0);
        // spectral evolution = matrix power application
        let p0 = ProbabilityVector::delta(n, 3);
        let spectral = dbd.evolve(&p0, 7).unwrap();
        let direct = dbd.matrix.matrix.pow(7).matvec(p0.values());
        for (a, b) in spectral.values().iter().zip(&direct) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn too_large_time_scale_rejected() {
        let cbd = hahn_cbd(&[2]);
        let max_rate = (0..cbd.lattice())
            .map(|x| cbd.birth[x] + cbd.death[x])
            .fold(0.0f64, f64::max);
        let r = DiscreteBd::from_continuous(&cbd, Some(2.0 / max_rate));
        assert!(matches!(r, Err(BdError::TimeScaleTooLarge { .. })));
    }

    #[test]
    fn repeated_weights_and_bands() {
        let cbd = hahn_cbd(&[2]);
        for m in [2u32, 3] {
            let rep = RepeatedBd::new(&cbd, m, RepeatedMode::Continuous, None).unwrap();
            assert_eq!(rep.weights[0], 1.0);
            let xm = &rep.x_matrix.matrix;
            assert_eq!(xm.bandwidth(1e-9 * xm.max_abs()), m as usize);
            let scale = xm.max_abs();
            for s in xm.column_sums() {
                assert!(s.abs() < 1e-10 * scale);
            }
            // eigen relation against the closed-form E^(m)
            let phi0 = &cbd.spectral.basis[0];
            for n in 0..cbd.lattice() as u32 {
                let phi: Vec<f64> = cbd.spectral.basis[n as usize]
                    .iter()
                    .zip(phi0)
                    .map(|(a, b)| a * b)
                    .collect();
                let xv = xm.matvec(&phi);
                let lam = rep.gen_eigen[n as usize];
                let vmax = phi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                for (a, b) in xv.iter().zip(&phi) {
                    assert!(
                        (a - lam * b).abs() < 1e-9 * (xm.norm_inf() * vmax).max(1.0),
                        "m={m} n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn repeated_discrete_is_stochastic() {
        let cbd = hahn_cbd(&[2]);
        let rep = RepeatedBd::new(&cbd, 2, RepeatedMode::Discrete, None).unwrap();
        let lm = &rep.x_matrix.matrix;
        for v in &lm.data {
            assert!(*v >= 0.0);
        }
        for s in lm.column_sums() {
            assert!((s - 1.0).abs() < 1e-12);
        }
        let p0 = ProbabilityVector::delta(cbd.lattice(), 2);
        let out = rep.evolve_discrete(&p0, 5).unwrap();
        let direct = lm.pow(5).matvec(p0.values());
        for (a, b) in out.values().iter().zip(&direct) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn simulation_reproducible() {
        let cbd = hahn_cbd(&[2]);
        let t1 = cbd.simulate(0, 1.0, 42);
        let t2 = cbd.simulate(0, 1.0, 42);
        assert_eq!(t1, t2);
        let t3 = cbd.simulate(0, 1.0, 43);
        assert_ne!(t1, t3);
        // death is impossible at 0, birth impossible at N
        let n = cbd.lattice();
        for (_, x) in cbd.simulate(0, 0.5, 7) {
            assert!(x < n);
        }
    }

    #[test]
    fn qm_is_rejected() {
        let map: BTreeMap<String, f64> = [("b".to_string(), 1.2), ("c".to_string(), 2.0)]
            .into_iter()
            .collect();
        let p = FamilyParams::new(FamilyId::QMeixner, &map, Some(0.5), None, 1).unwrap();
        let sys = System::new(p, IndexSet::new(vec![1]).unwrap()).unwrap();
        assert!(matches!(
            ContinuousBd::new(&sys),
            Err(BdError::UnsupportedFamily(_))
        ));
    }
}
