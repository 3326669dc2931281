//! Forward model: from a source f and time factor R to the final-time
//! profile u(., T) of the fractional diffusion problem
//!
//! ```text
//!     d^alpha u/dt - u_xx = R(t) f(x)   on (0, pi) x (0, T],
//!     u_x(0, t) = u_x(pi, t) = 0,       u(x, 0) = 0,
//! ```
//!
//! with Caputo time derivative of order alpha in (0, 1). In the cosine basis
//! the map is diagonal: u_p = f_p b_p, where the kernel
//!
//! ```text
//!     b_p = int_0^T (T-s)^{alpha-1} E_{alpha,alpha}(-p^2 (T-s)^alpha) R(s) ds
//! ```
//!
//! is evaluated by adaptive quadrature after the substitution u = (T-s)^alpha
//! removes the endpoint singularity. An L1 finite-difference solver provides
//! an independent oracle for the whole pipeline.

use crate::error::{Error, Result};
use crate::mittag_leffler::MlfEvaluator;
use crate::quadrature::integrate;
use crate::spectral::SpectralCoefficients;
use statrs::function::gamma::gamma;
use std::fmt;
use std::sync::Arc;

/// The time factor R(t), positive on [0, T].
#[derive(Clone)]
pub enum TimeFactor {
    Constant(f64),
    /// R(t) = offset + amplitude * sin(t).
    OffsetSine {
        offset: f64,
        amplitude: f64,
    },
    /// Arbitrary callable with caller-declared bounds (see
    /// [`ProblemSpec::with_custom_factor`]).
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for TimeFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeFactor::Constant(c) => write!(f, "Constant({c})"),
            TimeFactor::OffsetSine { offset, amplitude } => {
                write!(f, "OffsetSine({offset} + {amplitude} sin t)")
            }
            TimeFactor::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl TimeFactor {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            TimeFactor::Constant(c) => *c,
            TimeFactor::OffsetSine { offset, amplitude } => amplitude.mul_add(t.sin(), *offset),
            TimeFactor::Custom(f) => f(t),
        }
    }
}

/// A validated problem instance: order, horizon, time factor and its
/// declared positive bounds r_lo <= R(t) <= r_hi.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    alpha: f64,
    t_final: f64,
    factor: TimeFactor,
    r_lo: f64,
    r_hi: f64,
}

impl ProblemSpec {
    /// Build from a constant or offset-sine factor, whose exact bounds are
    /// derived here ([offset - |a|, offset + |a|] for the sine family).
    pub fn new(alpha: f64, t_final: f64, factor: TimeFactor) -> Result<Self> {
        let (r_lo, r_hi) = match &factor {
            TimeFactor::Constant(c) => (*c, *c),
            TimeFactor::OffsetSine { offset, amplitude } => {
                (offset - amplitude.abs(), offset + amplitude.abs())
            }
            TimeFactor::Custom(_) => {
                return Err(Error::InvalidArgument(
                    "custom time factors need explicit bounds; use with_custom_factor".into(),
                ))
            }
        };
        Self::build(alpha, t_final, factor, r_lo, r_hi)
    }

    /// Build from an arbitrary callable plus caller-declared bounds. The
    /// bounds are spot-checked on a grid, not proven.
    pub fn with_custom_factor(
        alpha: f64,
        t_final: f64,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        r_lo: f64,
        r_hi: f64,
    ) -> Result<Self> {
        Self::build(alpha, t_final, TimeFactor::Custom(f), r_lo, r_hi)
    }

    fn build(alpha: f64, t_final: f64, factor: TimeFactor, r_lo: f64, r_hi: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!(
                "fractional order must lie in (0, 1), got {alpha}"
            )));
        }
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(Error::Domain(format!(
                "final time must be positive, got {t_final}"
            )));
        }
        if !(r_lo.is_finite() && r_hi.is_finite() && 0.0 < r_lo && r_lo <= r_hi) {
            return Err(Error::Domain(format!(
                "time factor bounds must satisfy 0 < r_lo <= r_hi, got [{r_lo}, {r_hi}]"
            )));
        }
        // spot-check positivity and the declared bounds on a uniform grid
        for j in 0..=100 {
            let t = t_final * j as f64 / 100.0;
            let v = factor.value(t);
            if !(v.is_finite() && v >= r_lo * (1.0 - 1e-12) && v <= r_hi * (1.0 + 1e-12)) {
                return Err(Error::Domain(format!(
                    "time factor leaves its declared bounds: R({t}) = {v} not in [{r_lo}, {r_hi}]"
                )));
            }
        }
        Ok(ProblemSpec {
            alpha,
            t_final,
            factor,
            r_lo,
            r_hi,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn r(&self, t: f64) -> f64 {
        self.factor.value(t)
    }

    pub fn r_lo(&self) -> f64 {
        self.r_lo
    }

    pub fn r_hi(&self) -> f64 {
        self.r_hi
    }

    pub fn factor(&self) -> &TimeFactor {
        &self.factor
    }
}

/// One evaluated kernel coefficient b_p.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct KernelValue {
    pub p: usize,
    pub value: f64,
}

/// b_p by adaptive quadrature on the substituted form
///
/// ```text
///     b_p = (1/alpha) int_0^{T^alpha} E_{alpha,alpha}(-p^2 u) R(T - u^{1/alpha}) du,
/// ```
///
/// whose integrand is bounded and smooth (the (T-s)^{alpha-1} factor has
/// been absorbed by the substitution). E_{alpha,alpha}(0) = 1/Gamma(alpha)
/// keeps p = 0 on the same formula.
pub fn kernel(spec: &ProblemSpec, p: usize) -> Result<KernelValue> {
    let ev = MlfEvaluator::new(spec.alpha, spec.alpha)?;
    kernel_with_evaluator(spec, p, &ev)
}

/// As [`kernel`], reusing a caller-held evaluator so batch computations over
/// p share the one expensive ln-Gamma ladder.
pub(crate) fn kernel_with_evaluator(
    spec: &ProblemSpec,
    p: usize,
    ev: &MlfEvaluator,
) -> Result<KernelValue> {
    let alpha = spec.alpha;
    let upper = spec.t_final.powf(alpha);
    let psq = (p * p) as f64;
    let q = integrate(
        |u| {
            // exact at both ends; clamp shields R from T - u^{1/alpha}
            // rounding a hair outside [0, T]
            let t = (spec.t_final - u.powf(alpha.recip())).clamp(0.0, spec.t_final);
            ev.eval(-psq * u) * spec.r(t)
        },
        0.0,
        upper,
        1e-10,
        0.0,
    )
    .map_err(|e| match e {
        Error::Numerical { achieved, .. } => Error::Numerical {
            what: format!("kernel quadrature for mode p = {p} did not converge"),
            achieved,
        },
        other => other,
    })?;
    Ok(KernelValue {
        p,
        value: q.value / alpha,
    })
}

/// Diagonal action of the forward map: u_p = f_p b_p, same bandlimit.
pub fn forward_map(spec: &ProblemSpec, f: &SpectralCoefficients) -> Result<SpectralCoefficients> {
    let ev = MlfEvaluator::new(spec.alpha, spec.alpha)?;
    let mut u = SpectralCoefficients::zeros(f.max_mode());
    for p in 0..=f.max_mode() {
        let fp = f.get(p);
        if fp != 0.0 {
            u.set(p, fp * kernel_with_evaluator(spec, p, &ev)?.value);
        }
    }
    Ok(u)
}

/// u(x, T) for the source f, through the spectral representation.
pub fn evaluate_ut(spec: &ProblemSpec, f: &SpectralCoefficients, x: f64) -> Result<f64> {
    Ok(forward_map(spec, f)?.synthesize(x))
}

/// Independent L1 finite-difference solution of the initial-boundary value
/// problem, returned as u(., T) sampled at the uniform nodes x_i = i pi/nx,
/// i = 0..=nx.
///
/// Time: the standard L1 discretization of the Caputo derivative on a
/// uniform mesh (weights a_j = (j+1)^{1-alpha} - j^{1-alpha}). Space:
/// second-order central differences with ghost-point Neumann boundaries.
/// Each implicit step solves one constant tridiagonal system.
pub fn l1_oracle(
    spec: &ProblemSpec,
    f: &SpectralCoefficients,
    nx: usize,
    nt: usize,
) -> Result<Vec<f64>> {
    if nx < 8 || nt < 8 {
        return Err(Error::InvalidArgument(format!(
            "l1 oracle needs nx, nt >= 8, got nx={nx}, nt={nt}"
        )));
    }
    let alpha = spec.alpha;
    let tau = spec.t_final / nt as f64;
    let h = std::f64::consts::PI / nx as f64;
    let mu = tau.powf(-alpha) / gamma(2.0 - alpha);
    let npts = nx + 1;

    // source profile on the FD nodes
    let f_vals: Vec<f64> = (0..npts).map(|i| f.synthesize(i as f64 * h)).collect();

    // a_j = (j+1)^{1-alpha} - j^{1-alpha}, and the history weights
    // delta_d = a_{d-1} - a_d (positive, decreasing)
    let ex = 1.0 - alpha;
    let a: Vec<f64> = (0..nt)
        .map(|j| ((j + 1) as f64).powf(ex) - (j as f64).powf(ex))
        .collect();
    let delta: Vec<f64> = (1..nt).map(|d| a[d - 1] - a[d]).collect();

    // constant tridiagonal matrix mu I - Lap_h, prefactored for the Thomas
    // sweep: interior row (-1/h^2, mu + 2/h^2, -1/h^2), boundary rows use
    // the ghost point (off-diagonal -2/h^2)
    let inv_h2 = h.powi(-2);
    let diag = mu + 2.0 * inv_h2;
    let mut upper = vec![-inv_h2; npts - 1];
    upper[0] = -2.0 * inv_h2;
    let mut lower = vec![-inv_h2; npts - 1];
    lower[npts - 2] = -2.0 * inv_h2;
    // forward elimination multipliers
    let mut denom = vec![0.0; npts];
    denom[0] = diag;
    for i in 1..npts {
        denom[i] = diag - lower[i - 1] * upper[i - 1] / denom[i - 1];
    }

    // history[m * npts ..][i] = u^m_i; u^0 = 0
    let mut history = vec![0.0f64; (nt + 1) * npts];
    let mut rhs = vec![0.0f64; npts];

    for m in 1..=nt {
        let t_m = tau * m as f64;
        let r_m = spec.r(t_m);
        for i in 0..npts {
            rhs[i] = r_m * f_vals[i];
        }
        // mu * sum_{j=1}^{m-1} delta_{m-j} u^j, accumulated row-wise so the
        // inner loop runs down contiguous memory
        for j in 1..m {
            let w = mu * delta[m - j - 1];
            let uj = &history[j * npts..(j + 1) * npts];
            for i in 0..npts {
                rhs[i] += w * uj[i];
            }
        }
        // Thomas solve (mu I - Lap_h) u^m = rhs
        for i in 1..npts {
            rhs[i] -= lower[i - 1] / denom[i - 1] * rhs[i - 1];
        }
        let um = &mut history[m * npts..(m + 1) * npts];
        um[npts - 1] = rhs[npts - 1] / denom[npts - 1];
        for i in (0..npts - 1).rev() {
            um[i] = (rhs[i] - upper[i] * um[i + 1]) / denom[i];
        }
    }

    let last = history[nt * npts..].to_vec();
    if last.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical {
            what: "L1 time stepping diverged".into(),
            achieved: f64::INFINITY,
        });
    }
    Ok(last)
}
