//! Neumann cosine basis on (0, pi), the midpoint sampling grid, bandlimited
//! coefficient sequences, and the grid identities they obey.
//!
//! Conventions: phi_0(x) = 1/sqrt(pi) and phi_p(x) = sqrt(2/pi) cos(px) for
//! p >= 1, so the family is orthonormal in L^2(0, pi) including the constant
//! mode. On the grid x_k = pi(2k-1)/(2n) the discrete products satisfy exact
//! two-delta resonance rules, and sampling folds any mode q = 2ln +- p onto
//! mode p; `aliasing_term` quantifies that fold for bandlimited inputs.

use crate::error::{Error, Result};
use crate::numeric::{cos_pi_ratio, KahanSum};

#[inline]
fn inv_sqrt_pi() -> f64 {
    std::f64::consts::PI.sqrt().recip()
}

#[inline]
fn sqrt_2_over_pi() -> f64 {
    (2.0 / std::f64::consts::PI).sqrt()
}

/// phi_p(x) under the orthonormal convention.
pub fn eval_basis(p: usize, x: f64) -> f64 {
    if p == 0 {
        inv_sqrt_pi()
    } else {
        sqrt_2_over_pi() * (p as f64 * x).cos()
    }
}

/// The sampling nodes x_k = pi(2k-1)/(2n), k = 1..n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MidpointGrid {
    n: usize,
}

impl MidpointGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "midpoint grid needs n >= 2, got {n}"
            )));
        }
        Ok(MidpointGrid { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The k-th midpoint (2k + 1) pi / (2n), indexed from zero.
    pub fn node(&self, k: usize) -> f64 {
        debug_assert!(k < self.n);
        std::f64::consts::PI * (2 * k + 1) as f64 / (2 * self.n) as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|k| self.node(k))
    }

    /// phi_p(x_{k+1}) through the exact angle reduction: the argument
    /// p(2k+1) * pi/(2n) is reduced as an integer ratio first, so resonant
    /// modes hit +-1 and 0 exactly and the grid identities close to the
    /// last bit.
    pub fn basis_value(&self, p: usize, k: usize) -> f64 {
        debug_assert!(k < self.n);
        if p == 0 {
            return inv_sqrt_pi();
        }
        let num = p as u64 * (2 * k as u64 + 1);
        sqrt_2_over_pi() * cos_pi_ratio(num, self.n as u64)
    }
}

/// Coefficients c_p = <f, phi_p> of a bandlimited function, p = 0..=P.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralCoefficients {
    coeffs: Vec<f64>,
}

impl SpectralCoefficients {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument(
                "coefficient sequence must contain at least c_0".into(),
            ));
        }
        if let Some(bad) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "coefficient sequence contains non-finite entry {bad}"
            )));
        }
        Ok(SpectralCoefficients { coeffs })
    }

    pub fn zeros(max_mode: usize) -> Self {
        SpectralCoefficients {
            coeffs: vec![0.0; max_mode + 1],
        }
    }

    /// Bandlimit P (the largest stored mode).
    pub fn max_mode(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// c_p, with modes beyond the bandlimit reading as zero.
    pub fn get(&self, p: usize) -> f64 {
        self.coeffs.get(p).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, p: usize, value: f64) {
        assert!(value.is_finite(), "coefficient must be finite");
        if p >= self.coeffs.len() {
            self.coeffs.resize(p + 1, 0.0);
        }
        self.coeffs[p] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    /// Sum of c_p^2 over all p >= 0; by Parseval this is the squared L^2
    /// norm of the synthesized function.
    pub fn l2_norm_sq(&self) -> f64 {
        let mut s = KahanSum::new();
        for &c in &self.coeffs {
            s.add(c * c);
        }
        s.value()
    }

    /// Sum of p^{2 beta} c_p^2 over p >= 1; the constant mode carries no
    /// smoothness information and is excluded by definition.
    pub fn sobolev_norm_sq(&self, beta: f64) -> f64 {
        assert!(beta > 0.0, "sobolev index must be positive");
        let mut s = KahanSum::new();
        for (p, &c) in self.coeffs.iter().enumerate().skip(1) {
            s.add((p as f64).powf(2.0 * beta) * c * c);
        }
        s.value()
    }

    /// f(x) = sum_p c_p phi_p(x).
    pub fn synthesize(&self, x: f64) -> f64 {
        let mut s = KahanSum::new();
        for (p, &c) in self.coeffs.iter().enumerate() {
            if c != 0.0 {
                s.add(c * eval_basis(p, x));
            }
        }
        s.value()
    }

    /// f(x_k) for every grid node, using the exact grid reduction.
    pub fn synthesize_on_grid(&self, grid: &MidpointGrid) -> Vec<f64> {
        (0..grid.len())
            .map(|k| {
                let mut s = KahanSum::new();
                for (p, &c) in self.coeffs.iter().enumerate() {
                    if c != 0.0 {
                        s.add(c * grid.basis_value(p, k));
                    }
                }
                s.value()
            })
            .collect()
    }
}

/// s_{p,q} = (1/n) sum_k phi_p(x_k) phi_q(x_k), computed as the literal grid
/// sum. Resonances land exactly on +-1/pi thanks to the integer angle
/// reduction in `basis_value`.
pub fn discrete_orthogonality(p: usize, q: usize, n: usize) -> Result<f64> {
    if p == 0 || q == 0 {
        return Err(Error::InvalidArgument(
            "discrete orthogonality is stated for modes p, q >= 1".into(),
        ));
    }
    let grid = MidpointGrid::new(n)?;
    let mut s = KahanSum::new();
    for k in 0..n {
        s.add(grid.basis_value(p, k) * grid.basis_value(q, k));
    }
    Ok(s.value() / n as f64)
}

/// (1/n) sum_k phi_p(x_k): zero off-resonance, (-1)^l sqrt(2/pi) at p = 2ln.
pub fn grid_mode_mean(p: usize, n: usize) -> Result<f64> {
    if p == 0 {
        return Err(Error::InvalidArgument(
            "grid mode mean is stated for modes p >= 1".into(),
        ));
    }
    let grid = MidpointGrid::new(n)?;
    let mut s = KahanSum::new();
    for k in 0..n {
        s.add(grid.basis_value(p, k));
    }
    Ok(s.value() / n as f64)
}

/// The aliasing contribution G_np picked up by the discrete coefficient of
/// mode p on an n-point grid:
///
/// ```text
///   p = 0:        sqrt(2/pi) sum_{l>=1} (-1)^l c_{2ln}
///   1 <= p <= n-1:            sum_{l>=1} (-1)^l (c_{2ln+p} + c_{2ln-p})
/// ```
///
/// The sum is finite because the input is bandlimited.
pub fn aliasing_term(u_coeffs: &SpectralCoefficients, p: usize, n: usize) -> Result<f64> {
    MidpointGrid::new(n)?;
    if p >= n {
        return Err(Error::InvalidArgument(format!(
            "aliasing term needs p <= n-1, got p={p}, n={n}"
        )));
    }
    let big_p = u_coeffs.max_mode();
    let mut s = KahanSum::new();
    let mut l = 1usize;
    while 2 * l * n <= big_p + p {
        let sign = if l.is_multiple_of(2) { 1.0 } else { -1.0 };
        if p == 0 {
            s.add(sign * sqrt_2_over_pi() * u_coeffs.get(2 * l * n));
        } else {
            s.add(sign * (u_coeffs.get(2 * l * n + p) + u_coeffs.get(2 * l * n - p)));
        }
        l += 1;
    }
    Ok(s.value())
}
