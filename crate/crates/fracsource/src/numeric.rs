//! Small shared numerics: compensated summation and exact-reduction
//! trigonometry for arguments that are rational multiples of pi.

/// Neumaier-compensated accumulator. The compensation also covers the case
/// `|x| > |sum|`, which plain Kahan gets wrong.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// sin(pi x) with the integer part of `x` removed exactly, so the result
/// keeps full relative accuracy even for large `x`.
pub(crate) fn sin_pi(x: f64) -> f64 {
    let n = x.round();
    let r = x - n; // exact for |x| < 2^52
    let s = (std::f64::consts::PI * r).sin();
    if n.rem_euclid(2.0) == 0.0 {
        s
    } else {
        -s
    }
}

/// cos(pi * num / (2 n)) for integer `num`, reduced in integer arithmetic.
/// Exact zeros (odd multiples of pi/2) and exact signs survive the reduction,
/// which keeps midpoint-grid sums clean to machine precision.
pub(crate) fn cos_pi_ratio(num: u64, n: u64) -> f64 {
    debug_assert!(n > 0);
    // cos(pi t) with t = num/(2n) has period t = 2, i.e. num period 4n.
    let mut m = num % (4 * n);
    // cos(pi (2 - t)) = cos(pi t)
    if m > 2 * n {
        m = 4 * n - m;
    }
    // cos(pi t) = -cos(pi (1 - t)) for t in (1/2, 1]
    let mut sign = 1.0;
    if m > n {
        sign = -1.0;
        m = 2 * n - m;
    }
    if m == n {
        return 0.0; // t = 1/2 exactly
    }
    // now t = m/(2n) <= 1/2, the argument is at most pi/2
    sign * (std::f64::consts::PI * (m as f64) / (2.0 * n as f64)).cos()
}
