//! The data model: noisy samples of u(., T) on the midpoint grid,
//!
//! ```text
//!     u~_T(x_k) = u_T(x_k) + sigma_k eps_k,    eps_k iid N(0, 1),
//! ```
//!
//! with noise levels sigma_k bounded by v_max. Randomness is fully
//! reproducible: a ChaCha stream cipher keyed by the seed, with the 64-bit
//! stream id selecting an independent substream, so Monte Carlo replicates
//! can run in parallel without sharing generator state.

use crate::error::{Error, Result};
use crate::forward::{forward_map, ProblemSpec};
use crate::spectral::{MidpointGrid, SpectralCoefficients};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// How the per-point noise levels sigma_k are chosen under the bound v_max.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum SigmaMode {
    /// sigma_k = v_max / 2 for every k; consumes no randomness.
    Constant,
    /// sigma_k drawn uniformly from [0, v_max), independently per point.
    Uniform,
}

/// Noise configuration: the bound, the sigma policy, and the master seed.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct NoiseSpec {
    pub v_max: f64,
    pub sigma_mode: SigmaMode,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(v_max: f64, sigma_mode: SigmaMode, seed: u64) -> Result<Self> {
        if !(v_max.is_finite() && v_max >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "noise bound v_max must be finite and >= 0, got {v_max}"
            )));
        }
        Ok(NoiseSpec {
            v_max,
            sigma_mode,
            seed,
        })
    }
}

/// One realized data set on an n-point midpoint grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Observations {
    grid: MidpointGrid,
    values: Vec<f64>,
    sigmas: Vec<f64>,
    seed: u64,
}

impl Observations {
    pub fn grid(&self) -> &MidpointGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// u~_T(x_k), zero-based.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The sigma_k actually used.
    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Assemble observations from already-materialized parts (CSV import).
    pub fn from_parts(
        grid: MidpointGrid,
        values: Vec<f64>,
        sigmas: Vec<f64>,
        seed: u64,
    ) -> Result<Self> {
        if values.len() != grid.len() || sigmas.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "observation lengths {} / {} do not match the {}-point grid",
                values.len(),
                sigmas.len(),
                grid.len()
            )));
        }
        if values.iter().chain(sigmas.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "observations contain non-finite entries".into(),
            ));
        }
        Ok(Observations {
            grid,
            values,
            sigmas,
            seed,
        })
    }
}

/// Draw sigmas and noise for `clean` sample values. The generator is keyed
/// by (seed, stream): sigma draws come first (when the mode uses any), then
/// one standard normal per point, so layouts never shift between modes with
/// the same dimensions.
pub(crate) fn noisy_values(clean: &[f64], noise: &NoiseSpec, stream: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha12Rng::seed_from_u64(noise.seed);
    rng.set_stream(stream);
    let n = clean.len();
    let sigmas: Vec<f64> = match noise.sigma_mode {
        SigmaMode::Constant => vec![noise.v_max / 2.0; n],
        SigmaMode::Uniform => (0..n).map(|_| noise.v_max * rng.gen::<f64>()).collect(),
    };
    let values: Vec<f64> = clean
        .iter()
        .zip(&sigmas)
        .map(|(&u, &s)| {
            let eps: f64 = rng.sample(StandardNormal);
            u + s * eps
        })
        .collect();
    (values, sigmas)
}

/// Observe the forward solution for source f on an n-point grid, using the
/// noise stream `stream` (replicate harnesses pass distinct streams; plain
/// calls use stream 0 via [`observe`]).
pub fn observe_stream(
    spec: &ProblemSpec,
    f: &SpectralCoefficients,
    n: usize,
    noise: &NoiseSpec,
    stream: u64,
) -> Result<Observations> {
    let grid = MidpointGrid::new(n)?;
    let u_t = forward_map(spec, f)?;
    let clean = u_t.synthesize_on_grid(&grid);
    let (values, sigmas) = noisy_values(&clean, noise, stream);
    Ok(Observations {
        grid,
        values,
        sigmas,
        seed: noise.seed,
    })
}

/// [`observe_stream`] on the default stream 0.
pub fn observe(
    spec: &ProblemSpec,
    f: &SpectralCoefficients,
    n: usize,
    noise: &NoiseSpec,
) -> Result<Observations> {
    observe_stream(spec, f, n, noise, 0)
}
