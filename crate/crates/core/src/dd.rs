//! Double-double (compensated) arithmetic for small determinants.
//!
//! Casoratian determinants of nearly-parallel columns lose 5-6 digits to
//! cancellation in plain f64. Carrying an unevaluated (hi, lo) sum through
//! the elimination keeps the determinant itself at ~1e-15 relative, so the
//! only remaining error is what the matrix entries brought in.

/// Unevaluated sum of two doubles, |lo| <= ulp(hi)/2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> Dd {
    let hi = a + b;
    let v = hi - a;
    let lo = (a - (hi - v)) + (b - v);
    Dd { hi, lo }
}

#[inline]
fn two_prod(a: f64, b: f64) -> Dd {
    let hi = a * b;
    let lo = a.mul_add(b, -hi);
    Dd { hi, lo }
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    #[inline]
    pub fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn add(self, rhs: Dd) -> Dd {
        let s = two_sum(self.hi, rhs.hi);
        let lo = s.lo + self.lo + rhs.lo;
        let r = two_sum(s.hi, lo);
        Dd { hi: r.hi, lo: r.lo }
    }

    #[inline]
    pub fn sub(self, rhs: Dd) -> Dd {
        self.add(Dd {
            hi: -rhs.hi,
            lo: -rhs.lo,
        })
    }

    #[inline]
    pub fn mul(self, rhs: Dd) -> Dd {
        let p = two_prod(self.hi, rhs.hi);
        let lo = p.lo + self.hi * rhs.lo + self.lo * rhs.hi;
        let r = two_sum(p.hi, lo);
        Dd { hi: r.hi, lo: r.lo }
    }

    #[inline]
    pub fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        let r = self.sub(rhs.mul(Dd::from(q1)));
        let q2 = r.value() / rhs.hi;
        two_sum(q1, q2)
    }

    #[inline]
    pub fn abs_hi(self) -> f64 {
        self.hi.abs()
    }
}

/// Determinant of a small dense matrix (row-major, n x n) by LU with
/// partial pivoting, all arithmetic in double-double.
///
/// Singular (or exactly zero-pivot) matrices return 0.
pub fn det_dd(mat: &[f64], n: usize) -> f64 {
    let a: Vec<Dd> = mat.iter().map(|&x| Dd::from(x)).collect();
    det_dd_entries(&a, n).value()
}

/// Determinant with double-double entries, keeping the full precision of
/// entries that were themselves computed in double-double.
pub fn det_dd_entries(mat: &[Dd], n: usize) -> Dd {
    debug_assert_eq!(mat.len(), n * n);
    let mut a: Vec<Dd> = mat.to_vec();
    let mut det = Dd::from(1.0);
    for k in 0..n {
        let mut piv = k;
        let mut best = a[k * n + k].abs_hi();
        for r in k + 1..n {
            let v = a[r * n + k].abs_hi();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return Dd::ZERO;
        }
        if piv != k {
            for c in 0..n {
                a.swap(k * n + c, piv * n + c);
            }
            det = Dd {
                hi: -det.hi,
                lo: -det.lo,
            };
        }
        let pivot = a[k * n + k];
        det = det.mul(pivot);
        for r in k + 1..n {
            let f = a[r * n + k].div(pivot);
            for c in k + 1..n {
                let sub = f.mul(a[k * n + c]);
                a[r * n + c] = a[r * n + c].sub(sub);
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_identity() {
        let m = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        assert_eq!(det_dd(&m, 3), 1.0);
    }

    #[test]
    fn det_2x2() {
        let m = [3.0, 7.0, 2.0, 5.0];
        assert!((det_dd(&m, 2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn det_singular() {
        let m = [1.0, 2.0, 2.0, 4.0];
        assert_eq!(det_dd(&m, 2), 0.0);
    }

    #[test]
    fn det_cancellation() {
        // det = (1+e)(1-e) - 1 = -e^2 with e a power of two so the entries
        // are exact; plain f64 expansion would return garbage
        let e = 2f64.powi(-27);
        let m = [1.0 + e, 1.0, 1.0, 1.0 - e];
        let d = det_dd(&m, 2);
        assert!((d + e * e).abs() < 1e-32, "got {d}");
    }

    #[test]
    fn det_row_swap_sign() {
        let m1 = [0.0, 1.0, 2.0, 3.0, 0.0, 1.0, 1.0, 1.0, 1.0];
        let m2 = [3.0, 0.0, 1.0, 0.0, 1.0, 2.0, 1.0, 1.0, 1.0];
        assert!((det_dd(&m1, 3) + det_dd(&m2, 3)).abs() < 1e-14);
    }

    #[test]
    fn dd_mul_exact() {
        let a = Dd::from(1.0 + 2f64.powi(-30));
        let b = a.mul(a);
        let exact = 1.0 + 2f64.powi(-29) + 2f64.powi(-60);
        assert!((b.value() - exact).abs() < 1e-25);
    }
}
