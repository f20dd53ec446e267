//! Shifted factorials, q-shifted factorials and terminating (basic)
//! hypergeometric sums.
//!
//! Everything here is a plain function of its arguments; the only state is
//! the [`QContext`] carrying the base q and the truncation cap for infinite
//! q-products. Real-argument extensions use (a)_x = Gamma(a+x)/Gamma(a) and
//! (a;q)_x = (a;q)_inf / (a q^x;q)_inf.

use crate::dd::Dd;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecFunError {
    #[error("gamma pole at nonpositive integer argument {0}")]
    Pole(f64),
    #[error("division by zero: {0}")]
    DivideByZero(String),
    #[error("no upper parameter terminates the series")]
    NonTerminating,
    #[error("invalid q-context: {0}")]
    InvalidContext(String),
}

/// Base q in (0,1) plus the cap on infinite-product factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QContext {
    pub q: f64,
    pub truncation_terms: usize,
}

impl QContext {
    pub fn new(q: f64) -> Result<Self, SpecFunError> {
        if !(0.0 < q && q < 1.0) {
            return Err(SpecFunError::InvalidContext(format!(
                "q must lie in (0,1), got {q}"
            )));
        }
        Ok(QContext {
            q,
            truncation_terms: 10_000,
        })
    }

    pub fn with_truncation(q: f64, truncation_terms: usize) -> Result<Self, SpecFunError> {
        if truncation_terms == 0 {
            return Err(SpecFunError::InvalidContext(
                "truncation_terms must be >= 1".into(),
            ));
        }
        let mut ctx = Self::new(q)?;
        ctx.truncation_terms = truncation_terms;
        Ok(ctx)
    }
}

/// Infinite q-product factors are considered converged once they deviate
/// from 1 by less than this (double-precision ulp scale).
const QPROD_FACTOR_EPS: f64 = 1e-17;

// Lanczos approximation, g = 7, 9 coefficients.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function via Lanczos, reflection for arguments below 1/2.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma(1.0 - x))
    } else {
        let z = x - 1.0;
        let mut acc = LANCZOS_COEF[0];
        for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
            acc += c / (z + i as f64);
        }
        let t = z + LANCZOS_G + 0.5;
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * acc
    }
}

fn is_nonpositive_integer(x: f64, tol: f64) -> bool {
    x <= tol && (x - x.round()).abs() <= tol * x.abs().max(1.0)
}

/// Shifted factorial (a)_n = a (a+1) ... (a+n-1).
pub fn pochhammer(a: f64, n: u32) -> f64 {
    let mut r = 1.0;
    for k in 0..n {
        r *= a + k as f64;
    }
    r
}

/// Real-order shifted factorial (a)_x = Gamma(a+x)/Gamma(a).
pub fn pochhammer_real(a: f64, x: f64) -> Result<f64, SpecFunError> {
    if is_nonpositive_integer(a, 1e-12) {
        return Err(SpecFunError::Pole(a));
    }
    if is_nonpositive_integer(a + x, 1e-12) {
        return Err(SpecFunError::Pole(a + x));
    }
    Ok(gamma(a + x) / gamma(a))
}

/// q-shifted factorial (a;q)_n = prod_{k<n} (1 - a q^k).
pub fn qpochhammer(a: f64, ctx: &QContext, n: u32) -> f64 {
    let mut r = 1.0;
    let mut qk = 1.0;
    for _ in 0..n {
        r *= 1.0 - a * qk;
        qk *= ctx.q;
    }
    r
}

/// (a;q)_inf, truncated once factors are within ulp of 1.
pub fn qpochhammer_inf(a: f64, ctx: &QContext) -> f64 {
    let mut r = 1.0;
    let mut aq = a;
    for _ in 0..ctx.truncation_terms {
        if aq.abs() < QPROD_FACTOR_EPS {
            break;
        }
        r *= 1.0 - aq;
        aq *= ctx.q;
    }
    r
}

/// Real-order q-shifted factorial (a;q)_x = (a;q)_inf / (a q^x;q)_inf.
pub fn qpochhammer_real(a: f64, ctx: &QContext, x: f64) -> Result<f64, SpecFunError> {
    let den = qpochhammer_inf(a * ctx.q.powf(x), ctx);
    if den == 0.0 {
        return Err(SpecFunError::DivideByZero(format!(
            "(a q^x; q)_inf vanishes for a = {a}, x = {x}"
        )));
    }
    Ok(qpochhammer_inf(a, ctx) / den)
}

/// A (basic) hypergeometric series, kept as raw parameter lists.
///
/// `basic = false`: rFs(upper; lower; z) with term ratio of Pochhammers.
/// `basic = true`: r-phi-s with q-shifted factorials and the standard
/// extra factor [(-1)^k q^C(k,2)]^{1+r-s} when the series is not balanced
/// (covers 2phi0 and 3phi1).
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSpec {
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    pub argument: f64,
    pub basic: bool,
}

impl SeriesSpec {
    pub fn ordinary(upper: Vec<f64>, lower: Vec<f64>, argument: f64) -> Self {
        SeriesSpec {
            upper,
            lower,
            argument,
            basic: false,
        }
    }

    pub fn basic(upper: Vec<f64>, lower: Vec<f64>, argument: f64) -> Self {
        SeriesSpec {
            upper,
            lower,
            argument,
            basic: true,
        }
    }
}

/// Smallest termination index among upper parameters, if any.
fn termination_index(spec: &SeriesSpec, q: f64) -> Option<u32> {
    let mut best: Option<u32> = None;
    for &a in &spec.upper {
        let cand = if spec.basic {
            if a >= 1.0 - 1e-9 && a > 0.0 {
                let est = -a.ln() / q.ln();
                let n = est.round();
                if n >= -0.1 && (a - q.powf(-n)).abs() <= 1e-8 * a {
                    Some(n as u32)
                } else {
                    None
                }
            } else {
                None
            }
        } else if a <= 1e-9 && (a - a.round()).abs() <= 1e-9 * a.abs().max(1.0) {
            Some((-a.round()) as u32)
        } else {
            None
        };
        if let Some(n) = cand {
            best = Some(best.map_or(n, |b| b.min(n)));
        }
    }
    best
}

/// Evaluate a terminating series term by term. Terms of these series grow
/// large with alternating signs near the top of the spectrum (upper
/// parameters q^{-n} and q^{-x} both present), cancelling many digits, so
/// the term recurrence and the accumulation run in double-double arithmetic.
pub fn hypergeometric_terminating(
    spec: &SeriesSpec,
    ctx: Option<&QContext>,
) -> Result<f64, SpecFunError> {
    hypergeometric_terminating_dd(spec, ctx).map(Dd::value)
}

/// Same sum, returned with its full double-double precision for callers
/// that feed the value into further cancellation-prone determinants.
pub fn hypergeometric_terminating_dd(
    spec: &SeriesSpec,
    ctx: Option<&QContext>,
) -> Result<Dd, SpecFunError> {
    let q = match (spec.basic, ctx) {
        (true, Some(c)) => c.q,
        (true, None) => {
            return Err(SpecFunError::InvalidContext(
                "basic series requires a QContext".into(),
            ))
        }
        (false, _) => f64::NAN,
    };
    let nmax = termination_index(spec, q).ok_or(SpecFunError::NonTerminating)?;
    let unbalanced = 1 + spec.lower.len() as i32 - spec.upper.len() as i32;

    let one = Dd::from(1.0);
    let qdd = Dd::from(q);
    let arg = Dd::from(spec.argument);
    let mut sum = Dd::ZERO;
    let mut term = one;
    let mut qk = one;
    for k in 0..=nmax {
        sum = sum.add(term);
        if k == nmax {
            break;
        }
        let kf = k as f64;
        let mut num = one;
        let mut den = one;
        if spec.basic {
            for &a in &spec.upper {
                num = num.mul(one.sub(Dd::from(a).mul(qk)));
            }
            for &b in &spec.lower {
                den = den.mul(one.sub(Dd::from(b).mul(qk)));
            }
            den = den.mul(one.sub(qdd.mul(qk)));
        } else {
            for &a in &spec.upper {
                num = num.mul(Dd::from(a).add(Dd::from(kf)));
            }
            for &b in &spec.lower {
                den = den.mul(Dd::from(b).add(Dd::from(kf)));
            }
            den = den.mul(Dd::from(kf + 1.0));
        }
        if den.value() == 0.0 {
            return Err(SpecFunError::DivideByZero(format!(
                "lower-parameter factor vanishes at term {k}"
            )));
        }
        term = term.mul(num.div(den)).mul(arg);
        if spec.basic && unbalanced != 0 {
            let f = Dd {
                hi: -qk.hi,
                lo: -qk.lo,
            };
            term = match unbalanced {
                1 => term.mul(f),
                -1 => term.div(f),
                _ => {
                    let mut t = term;
                    for _ in 0..unbalanced.abs() {
                        t = if unbalanced > 0 { t.mul(f) } else { t.div(f) };
                    }
                    t
                }
            };
        }
        if spec.basic {
            qk = qk.mul(qdd);
        }
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q5: f64 = 0.5;

    fn ctx(q: f64) -> QContext {
        QContext::new(q).unwrap()
    }

    #[test]
    fn pochhammer_basics() {
        assert_eq!(pochhammer(7.3, 0), 1.0);
        assert_eq!(pochhammer(2.0, 3), 24.0);
        assert_eq!(pochhammer(0.5, 2), 0.75);
    }

    #[test]
    fn gamma_reference_values() {
        assert!((gamma(0.5) - std::f64::consts::PI.sqrt()).abs() < 1e-13);
        assert!((gamma(1.0) - 1.0).abs() < 1e-14);
        assert!((gamma(6.0) - 120.0).abs() < 1e-11);
        assert!((gamma(1.5) - 0.886_226_925_452_758).abs() < 1e-13);
        // reflection branch
        assert!((gamma(-0.5) + 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn pochhammer_real_matches_integer_orders() {
        for &a in &[0.5, 1.2, 3.7] {
            for n in 0..=20u32 {
                let exact = pochhammer(a, n);
                let real = pochhammer_real(a, n as f64).unwrap();
                assert!(
                    (real - exact).abs() <= 1e-12 * exact.abs(),
                    "a={a} n={n}: {real} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn pochhammer_real_known_value() {
        // (1.5)_{0.5} = Gamma(2)/Gamma(1.5) = 2/sqrt(pi)
        let v = pochhammer_real(1.5, 0.5).unwrap();
        assert!((v - 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-13);
        assert_eq!(pochhammer_real(3.0, 0.0).unwrap(), 1.0);
        assert!((pochhammer_real(2.0, 2.0).unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn pochhammer_real_pole() {
        assert!(matches!(
            pochhammer_real(-2.0, 0.5),
            Err(SpecFunError::Pole(_))
        ));
        assert!(matches!(
            pochhammer_real(0.5, -3.5),
            Err(SpecFunError::Pole(_))
        ));
    }

    #[test]
    fn qpochhammer_basics() {
        let c = ctx(Q5);
        assert_eq!(qpochhammer(0.3, &c, 0), 1.0);
        assert_eq!(qpochhammer(1.0, &c, 3), 0.0);
        assert!((qpochhammer(0.5, &c, 2) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn qpochhammer_real_matches_integer_orders() {
        let c = ctx(Q5);
        for &a in &[0.3, 0.9, -0.4] {
            for n in 0..=20u32 {
                let exact = qpochhammer(a, &c, n);
                let real = qpochhammer_real(a, &c, n as f64).unwrap();
                assert!(
                    (real - exact).abs() <= 1e-12 * exact.abs().max(1e-300),
                    "a={a} n={n}: {real} vs {exact}"
                );
            }
        }
        assert!((qpochhammer_real(0.3, &c, 2.0).unwrap() - 0.595).abs() < 1e-14);
        assert_eq!(qpochhammer_real(0.7, &c, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn qpochhammer_real_shift_relation() {
        // (a;q)_{x+1} = (1 - a q^x) (a;q)_x
        let c = ctx(0.5);
        for &a in &[0.3, 0.8] {
            for i in 0..=25 {
                let x = i as f64 * 0.2;
                let lhs = qpochhammer_real(a, &c, x + 1.0).unwrap();
                let rhs = (1.0 - a * c.q.powf(x)) * qpochhammer_real(a, &c, x).unwrap();
                assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs(), "a={a} x={x}");
            }
        }
    }

    #[test]
    fn qpochhammer_real_oracle_200_terms() {
        // independent high-precision oracle: direct 200-term products
        let c = ctx(0.5);
        let a = 0.3;
        let x = 1.5;
        let mut num = 1.0f64;
        let mut den = 1.0f64;
        for k in 0..200 {
            num *= 1.0 - a * 0.5f64.powi(k);
            den *= 1.0 - a * 0.5f64.powf(x + k as f64);
        }
        let v = qpochhammer_real(a, &c, x).unwrap();
        assert!((v - num / den).abs() < 1e-12 * v.abs());
    }

    #[test]
    fn series_termination_at_zero_index() {
        // first upper parameter -0 (ordinary) or q^0 = 1 (basic): only k = 0 term
        let s = SeriesSpec::ordinary(vec![0.0, 5.0], vec![2.0], 0.7);
        assert_eq!(hypergeometric_terminating(&s, None).unwrap(), 1.0);
        let c = ctx(Q5);
        let s = SeriesSpec::basic(vec![1.0, 0.3], vec![0.2], 0.7);
        assert_eq!(hypergeometric_terminating(&s, Some(&c)).unwrap(), 1.0);
    }

    #[test]
    fn series_2f1_meixner_normalization() {
        // 2F1(-1, -x; beta; 1 - 1/c) at x = 0 -> 1
        let s = SeriesSpec::ordinary(vec![-1.0, -0.0], vec![2.5], 1.0 - 1.0 / 0.4);
        assert_eq!(hypergeometric_terminating(&s, None).unwrap(), 1.0);
    }

    #[test]
    fn series_3f2_hand_sum() {
        // 3F2(-2, 6.7, -1; 1.2, -10; 1): terminates at k=1 because of -1,
        // value 1 + (-2)(6.7)(-1)/(1.2 * -10) = 1 - 13.4/12
        let s = SeriesSpec::ordinary(vec![-2.0, 6.7, -1.0], vec![1.2, -10.0], 1.0);
        let v = hypergeometric_terminating(&s, None).unwrap();
        assert!((v - (1.0 - 13.4 / 12.0)).abs() < 1e-15);
    }

    #[test]
    fn series_non_terminating_rejected() {
        let s = SeriesSpec::ordinary(vec![0.7, 5.0], vec![2.0], 0.3);
        assert!(matches!(
            hypergeometric_terminating(&s, None),
            Err(SpecFunError::NonTerminating)
        ));
        let c = ctx(Q5);
        let s = SeriesSpec::basic(vec![0.7], vec![0.2], 0.3);
        assert!(matches!(
            hypergeometric_terminating(&s, Some(&c)),
            Err(SpecFunError::NonTerminating)
        ));
    }

    #[test]
    fn series_lower_pole_rejected() {
        // lower parameter -1 hits zero at k = 1 before termination at k = 3
        let s = SeriesSpec::ordinary(vec![-3.0, 2.0], vec![-1.0], 1.0);
        assert!(matches!(
            hypergeometric_terminating(&s, None),
            Err(SpecFunError::DivideByZero(_))
        ));
    }

    #[test]
    fn series_2phi0_little_q_laguerre() {
        // 2phi0 carries [(-1)^k q^C(k,2)]^{-1}; check against a 3-term hand sum:
        // sum_k (q^-n;q)_k (q^-x;q)_k / (q;q)_k * (-1)^k q^{-C(k,2)} z^k, n=x=2
        let c = ctx(Q5);
        let q = Q5;
        let n = 2.0;
        let x = 2.0;
        let z = 0.5f64.powf(x + 1.0) / 0.05;
        let s = SeriesSpec::basic(vec![q.powf(-n), q.powf(-x)], vec![], z);
        let got = hypergeometric_terminating(&s, Some(&c)).unwrap();
        let mut want = 0.0;
        for k in 0..=2u32 {
            let t = qpochhammer(q.powf(-n), &c, k) * qpochhammer(q.powf(-x), &c, k)
                / qpochhammer(q, &c, k)
                * (-1.0f64).powi(k as i32)
                * q.powi(-((k * (k.wrapping_sub(1)) / 2) as i32))
                * z.powi(k as i32);
            want += t;
        }
        assert!((got - want).abs() < 1e-12 * want.abs(), "{got} vs {want}");
    }
}
