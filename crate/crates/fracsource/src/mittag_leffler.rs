//! Two-parameter Mittag-Leffler function E_{alpha,beta}(z) on the closed
//! negative real axis,
//!
//! ```text
//!     E_{alpha,beta}(z) = sum_{k>=0} z^k / Gamma(alpha k + beta),
//! ```
//!
//! for alpha in (0, 1] and beta in (0, 2]. Three branches, selected by
//! u = |z|^(1/alpha): the f64 power series for u <= 3 (its error grows with
//! the condition number e^u, so it is kept where that stays near 1e-11), the
//! algebraic asymptotic expansion -sum_{k>=1} z^{-k} / Gamma(beta - alpha k)
//! for u >= 30 (optimal-truncation error ~e^{-u}), and a double-double power
//! series in between, where neither f64 branch reaches the target accuracy.

use crate::dd::{ln_gamma_dd, Dd, DD_ZERO};
use crate::error::{Error, Result};
use crate::numeric::{sin_pi, KahanSum};
use statrs::function::gamma::{gamma, ln_gamma};
use std::sync::OnceLock;

/// Branch thresholds on u = |z|^(1/alpha).
const U_SERIES: f64 = 3.0;
const U_ASYMPTOTIC: f64 = 30.0;

/// A validated point query for E_{alpha,beta}(z).
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct MlfQuery {
    alpha: f64,
    beta: f64,
    z: f64,
}

impl MlfQuery {
    pub fn new(alpha: f64, beta: f64, z: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Domain(format!(
                "mlf: alpha must lie in (0, 1], got {alpha}"
            )));
        }
        if !(beta.is_finite() && beta > 0.0 && beta <= 2.0) {
            return Err(Error::Domain(format!(
                "mlf: beta must lie in (0, 2], got {beta}"
            )));
        }
        if !(z.is_finite() && z <= 0.0) {
            return Err(Error::Domain(format!(
                "mlf: z must be finite and <= 0, got {z}"
            )));
        }
        Ok(Self { alpha, beta, z })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn z(&self) -> f64 {
        self.z
    }
}

/// E_{alpha,beta}(z) for a validated query.
pub fn mlf(q: MlfQuery) -> f64 {
    MlfEvaluator {
        alpha: q.alpha,
        beta: q.beta,
        ladder: OnceLock::new(),
    }
    .eval(q.z)
}

/// E_{alpha,1}(-x) for x >= 0, the completely monotone case.
pub fn mlf_one(alpha: f64, x: f64) -> Result<f64> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::Domain(format!(
            "mlf_one: x must be finite and >= 0, got {x}"
        )));
    }
    Ok(mlf(MlfQuery::new(alpha, 1.0, -x)?))
}

/// Repeated evaluation at fixed (alpha, beta).
///
/// The mid-range branch needs ln Gamma(alpha k + beta) in double-double
/// precision for k up to a few hundred; the evaluator computes that ladder
/// once on first use and shares it across all z.
pub struct MlfEvaluator {
    alpha: f64,
    beta: f64,
    ladder: OnceLock<Vec<Dd>>,
}

impl MlfEvaluator {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        // reuse the query validation
        MlfQuery::new(alpha, beta, 0.0)?;
        Ok(Self {
            alpha,
            beta,
            ladder: OnceLock::new(),
        })
    }

    /// E_{alpha,beta}(z) for z <= 0.
    pub fn eval(&self, z: f64) -> f64 {
        assert!(z <= 0.0 && z.is_finite(), "mlf evaluated at z = {z}");
        let (alpha, beta) = (self.alpha, self.beta);
        if z == 0.0 {
            return recip_gamma_pos(beta);
        }
        if alpha == 1.0 {
            // exact reductions; the algebraic expansion degenerates here
            if beta == 1.0 {
                return z.exp();
            }
            if beta == 2.0 {
                return z.exp_m1() / z;
            }
        }
        let x = -z;
        let u = x.powf(1.0 / alpha);
        if u <= U_SERIES {
            series_f64(alpha, beta, z)
        } else if u >= U_ASYMPTOTIC {
            asymptotic(alpha, beta, x)
        } else {
            self.series_dd(x)
        }
    }

    /// Double-double power series for the mid range u in (7, 30).
    fn series_dd(&self, x: f64) -> f64 {
        let (alpha, beta) = (self.alpha, self.beta);
        let ladder = self.ladder.get_or_init(|| {
            // series terms are negligible once alpha*k*(ln(alpha k) - 1)
            // outruns u + 85 nats; alpha*k <= 135 covers u <= 30
            let cap = (135.0 / alpha).ceil() as usize + 16;
            (0..=cap)
                .map(|k| {
                    // alpha*k is exact in double-double; an f64 product
                    // would poison every term with psi(alpha k)*eps
                    let arg = Dd::from_f64(alpha).mul_f64(k as f64).add_f64(beta);
                    ln_gamma_dd(arg)
                })
                .collect()
        });
        let ln_x = Dd::from_f64(x).ln();
        let u = x.powf(1.0 / alpha);
        let mut sum = DD_ZERO;
        let mut max_ln = f64::NEG_INFINITY;
        for (k, lg) in ladder.iter().enumerate() {
            let ln_t = ln_x.mul_f64(k as f64).sub(*lg);
            max_ln = max_ln.max(ln_t.hi);
            let mag = ln_t.exp();
            sum = if k % 2 == 0 {
                sum.add(mag)
            } else {
                sum.sub(mag)
            };
            if ln_t.hi < max_ln - 85.0 && k as f64 * alpha > u {
                return sum.to_f64();
            }
        }
        debug_assert!(false, "dd series ladder exhausted (alpha={alpha})");
        sum.to_f64()
    }
}

/// 1/Gamma(y) for y > 0. The direct Lanczos value stays within a few ulp;
/// exp(-ln_gamma(y)) would lose ~1e-14, which the power series multiplies by
/// its condition number e^u.
fn recip_gamma_pos(y: f64) -> f64 {
    if y <= 170.0 {
        gamma(y).recip()
    } else {
        // Gamma itself would overflow; this tail only zeroes dead terms
        (-ln_gamma(y)).exp()
    }
}

/// f64 power series with compensated summation; adequate for u <= 3.
fn series_f64(alpha: f64, beta: f64, z: f64) -> f64 {
    let u = (-z).powf(1.0 / alpha);
    let mut sum = KahanSum::new();
    let mut zk = 1.0f64;
    let mut max_term = 0.0f64;
    for k in 0..4000 {
        let t = zk * recip_gamma_pos(alpha.mul_add(k as f64, beta));
        sum.add(t);
        max_term = max_term.max(t.abs());
        if k as f64 * alpha > u && t.abs() < 1e-18 * max_term {
            return sum.value();
        }
        zk *= z;
    }
    debug_assert!(false, "f64 series failed to converge (z={z})");
    sum.value()
}

/// Algebraic asymptotic expansion for u >= 30, evaluated term-by-term in log
/// space (so huge reflected Gamma values never overflow) with optimal
/// truncation at the smallest term.
///
/// Truncation watches the log-convex envelope |z|^{-k} / Gamma-magnitude,
/// never the terms themselves: the reflected 1/Gamma carries a sin(pi y)
/// factor that oscillates in k (strongly so for small alpha), so raw term
/// magnitudes are not monotone near the optimum.
fn asymptotic(alpha: f64, beta: f64, x: f64) -> f64 {
    let ln_x = x.ln();
    let mut sum = KahanSum::new();
    let mut prev_env = f64::INFINITY;
    for k in 1..=20_000u64 {
        let y = (-alpha).mul_add(k as f64, beta);
        // ln envelope and, when inside it, sign and ln magnitude of
        // 1/Gamma(y); reflection for y <= 0.5
        let ln_kx = -(k as f64) * ln_x;
        let (env, term) = if y > 0.5 {
            let e = (ln_kx - ln_gamma(y)).exp();
            (e, Some(e))
        } else {
            let ln_env = ln_kx + ln_gamma(1.0 - y) - std::f64::consts::PI.ln();
            let s = sin_pi(y);
            // s == 0 is a pole of Gamma: the term vanishes but the envelope
            // still bounds its neighbours
            let t = (s != 0.0).then(|| s.signum() * (ln_env + s.abs().ln()).exp());
            (ln_env.exp(), t)
        };
        if env >= prev_env {
            break; // divergence onset: truncate at the smallest envelope
        }
        if let Some(mag) = term {
            // term = -z^{-k}/Gamma(y) with z = -x
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            sum.add(sign * mag);
        }
        prev_env = env;
        if env < 1e-17 * sum.value().abs() {
            break;
        }
    }
    sum.value()
}
