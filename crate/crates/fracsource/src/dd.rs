//! Double-double arithmetic (~31 significant digits) plus a double-double
//! ln-Gamma. Only the Mittag-Leffler mid-range branch needs this: there the
//! power series suffers a condition number up to ~e^30, which f64 cannot
//! absorb, while ~31 digits leave 1e-17-level headroom.

use std::sync::OnceLock;

#[derive(Copy, Clone, Debug, Default, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Requires |a| >= |b| (or a == 0).
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

pub(crate) const DD_ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
pub(crate) const DD_ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};
/// ln(2 pi)/2
const LN_SQRT_2PI: Dd = Dd {
    hi: 0.918_938_533_204_672_8,
    lo: -3.878_294_158_067_241_4e-17,
};

impl Dd {
    #[inline]
    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn neg(self) -> Self {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    #[inline]
    pub fn add(self, o: Dd) -> Self {
        let (s1, s2) = two_sum(self.hi, o.hi);
        let (t1, t2) = two_sum(self.lo, o.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn add_f64(self, b: f64) -> Self {
        let (s1, s2) = two_sum(self.hi, b);
        let s2 = s2 + self.lo;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn sub(self, o: Dd) -> Self {
        self.add(o.neg())
    }

    #[inline]
    pub fn mul(self, o: Dd) -> Self {
        let (p1, p2) = two_prod(self.hi, o.hi);
        let p2 = p2 + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Self {
        let (p1, p2) = two_prod(self.hi, b);
        let p2 = p2 + self.lo * b;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn div(self, o: Dd) -> Self {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul_f64(q1));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul_f64(q2));
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add_f64(q3)
    }

    #[inline]
    pub fn recip(self) -> Self {
        DD_ONE.div(self)
    }

    /// exp(self); flushes to zero below -700 to stay clear of the subnormal
    /// range (the callers sum series terms, where a flushed tail is harmless).
    pub fn exp(self) -> Self {
        if self.hi < -700.0 {
            return DD_ZERO;
        }
        debug_assert!(self.hi < 700.0, "dd exp argument out of supported range");
        let k = (self.hi / LN2.hi).round();
        let r = self.sub(LN2.mul_f64(k));
        // Taylor on |r| <= ln2/2; terms decay below 1e-35 within ~26 steps
        let mut term = DD_ONE;
        let mut sum = DD_ONE;
        for i in 1..40 {
            term = term.mul(r).div_f64(i as f64);
            sum = sum.add(term);
            if term.hi.abs() < 1e-35 * sum.hi.abs() {
                break;
            }
        }
        let scale = pow2i(k as i32);
        Dd {
            hi: sum.hi * scale,
            lo: sum.lo * scale,
        }
    }

    #[inline]
    pub fn div_f64(self, b: f64) -> Self {
        self.div(Dd::from_f64(b))
    }

    /// ln(self), self > 0: one Newton correction on top of the f64 logarithm.
    pub fn ln(self) -> Self {
        debug_assert!(self.hi > 0.0);
        let y0 = self.hi.ln();
        let w = Dd::from_f64(-y0).exp().mul(self); // = self * e^{-y0} = 1 + e
        let e = w.add_f64(-1.0);
        // ln(1+e) = e - e^2/2 + e^3/3 - ...
        let e2 = e.mul(e);
        let corr = e.sub(e2.mul_f64(0.5)).add(e2.mul(e).div_f64(3.0));
        Dd::from_f64(y0).add(corr)
    }
}

/// 2^k for k within the normal f64 exponent range.
#[inline]
fn pow2i(k: i32) -> f64 {
    f64::from_bits(((1023 + k.clamp(-1022, 1023)) as u64) << 52)
}

/// B_{2j} / (2j (2j-1)) for the Stirling series, as exact integer ratios.
const STIRLING_RATIOS: [(f64, f64); 13] = [
    (1.0, 12.0),
    (-1.0, 360.0),
    (1.0, 1260.0),
    (-1.0, 1680.0),
    (1.0, 1188.0),
    (-691.0, 360360.0),
    (1.0, 156.0),
    (-3617.0, 122400.0),
    (43867.0, 244188.0),
    (-174611.0, 125400.0),
    (854513.0, 63756.0),
    (-236364091.0, 1507080.0),
    (8553103.0, 3900.0),
];

fn stirling_coeffs() -> &'static [Dd; 13] {
    static COEFFS: OnceLock<[Dd; 13]> = OnceLock::new();
    COEFFS
        .get_or_init(|| STIRLING_RATIOS.map(|(num, den)| Dd::from_f64(num).div(Dd::from_f64(den))))
}

/// ln Gamma(x) for a double-double x > 0. Callers that form the argument as
/// a product (for example alpha*k + beta along a series ladder) must pass the
/// unrounded value: an f64-rounded argument alone costs ~psi(x)*eps, which
/// the ill-conditioned series sums amplify well past their target accuracy.
///
/// Stirling's series at y = x + m >= 24 (the B_28 remainder there is ~2e-33),
/// pulled back through Gamma(x) = Gamma(y) / (x (x+1) ... (y-1)).
pub(crate) fn ln_gamma_dd(x: Dd) -> Dd {
    debug_assert!(x.hi > 0.0 && x.hi.is_finite());
    let coeffs = stirling_coeffs();
    let mut y = x;
    let mut prod = DD_ONE;
    let mut shifted = false;
    while y.hi < 24.0 {
        prod = prod.mul(y);
        y = y.add_f64(1.0);
        shifted = true;
    }
    let ln_y = y.ln();
    let w = y.recip();
    let w2 = w.mul(w);
    let mut pw = w;
    let mut tail = DD_ZERO;
    for c in coeffs {
        tail = tail.add(c.mul(pw));
        pw = pw.mul(w2);
    }
    let main = y.add_f64(-0.5).mul(ln_y).sub(y).add(LN_SQRT_2PI).add(tail);
    if shifted {
        main.sub(prod.ln())
    } else {
        main
    }
}
