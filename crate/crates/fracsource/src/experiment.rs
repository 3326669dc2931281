//! Monte Carlo harness measuring reconstruction risk against sample count.
//!
//! For each n in the schedule the truncation level follows [`choose_m`],
//! `replicates` independent observe/estimate cycles run on private noise
//! streams, and the squared coefficient-space errors aggregate into one row
//! (risk, standard error, error split, a priori bound). The fitted log-log
//! slope of risk against n is the headline number; under the parameter rule
//! it should approach -2 beta / (5 + 2 beta).
//!
//! Replicates are embarrassingly parallel and each owns its RNG stream, so
//! the run is deterministic for a fixed seed: the per-replicate results are
//! collected in replicate order and only then folded sequentially with
//! compensated summation.

use crate::error::{Error, Result};
use crate::estimator::{
    choose_m, decompose, estimate_with_kernels, theorem_bound, ErrorBoundInputs,
    ErrorDecomposition, KernelTable, ZeroMode,
};
use crate::forward::{forward_map, ProblemSpec};
use crate::numeric::KahanSum;
use crate::observation::{noisy_values, NoiseSpec, Observations};
use crate::spectral::{MidpointGrid, SpectralCoefficients};
use rayon::prelude::*;

/// Everything one experiment needs; the CLI builds this from the config
/// file, the library consumes it as plain data.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub spec: ProblemSpec,
    pub f_true: SpectralCoefficients,
    /// Smoothness index driving the truncation rule and the bound's tail.
    pub beta: f64,
    pub noise: NoiseSpec,
    /// Sample counts, strictly increasing, each at least 4.
    pub n_list: Vec<usize>,
    pub replicates: usize,
    pub zero_mode: ZeroMode,
}

/// Monte Carlo aggregates for one (n, M) pair.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ExperimentRow {
    pub n: usize,
    pub m: usize,
    /// Mean of ||f~ - f||^2_{L^2} over the replicates.
    pub risk: f64,
    /// Standard error of that mean (sample standard deviation / sqrt(reps)).
    pub stderr: f64,
    pub mean_i1: f64,
    pub mean_i2: f64,
    pub mean_i3: f64,
    /// [`theorem_bound`] total with E set to the true H^beta norm.
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<ExperimentRow>,
    /// Least-squares slope of ln risk against ln n; absent for a single row
    /// or when some risk is too small for its logarithm to mean anything
    /// (noise-free exact recovery).
    pub slope: Option<f64>,
}

/// Risks below this are exact-recovery artifacts; their logs carry no rate
/// information, so the slope fit is skipped.
const RISK_FLOOR: f64 = 1e-12;

fn validate(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.replicates < 1 {
        return Err(Error::InvalidArgument(
            "experiment needs at least one replicate".into(),
        ));
    }
    if cfg.replicates > u32::MAX as usize {
        return Err(Error::InvalidArgument(
            "replicate count does not fit the stream layout".into(),
        ));
    }
    if cfg.n_list.is_empty() {
        return Err(Error::InvalidArgument("n_list must not be empty".into()));
    }
    if cfg.n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "n_list must be strictly increasing".into(),
        ));
    }
    if cfg.n_list[0] < 4 {
        return Err(Error::InvalidArgument(
            "sample counts below 4 leave no room for the truncation rule".into(),
        ));
    }
    if !(cfg.beta.is_finite() && cfg.beta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "smoothness index must be positive, got {}",
            cfg.beta
        )));
    }
    Ok(())
}

/// Noise streams are keyed (row, replicate) so rows never share draws and
/// adding rows never shifts existing ones.
fn stream_id(row: usize, replicate: usize) -> u64 {
    ((row as u64) << 32) | replicate as u64
}

/// Run the full schedule. Deterministic for a fixed config (including the
/// noise seed), independent of thread count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    validate(cfg)?;
    let e_bound = cfg.f_true.sobolev_norm_sq(cfg.beta).sqrt();
    let u_t = forward_map(&cfg.spec, &cfg.f_true)?;

    let mut rows = Vec::with_capacity(cfg.n_list.len());
    for (row_idx, &n) in cfg.n_list.iter().enumerate() {
        let m = choose_m(n, cfg.beta);
        let kernels = KernelTable::compute(&cfg.spec, m)?;
        let clean = u_t.synthesize_on_grid(&MidpointGrid::new(n)?);

        let reps: Vec<ErrorDecomposition> = (0..cfg.replicates)
            .into_par_iter()
            .map(|r| {
                let (values, sigmas) = noisy_values(&clean, &cfg.noise, stream_id(row_idx, r));
                let obs = Observations::from_parts(
                    MidpointGrid::new(n)?,
                    values,
                    sigmas,
                    cfg.noise.seed,
                )?;
                let est = estimate_with_kernels(&obs, &kernels, cfg.zero_mode)?;
                Ok(decompose(&est, &cfg.f_true))
            })
            .collect::<Result<_>>()?;

        let mut risk_sum = KahanSum::new();
        let mut risk_sq = KahanSum::new();
        let mut i1 = KahanSum::new();
        let mut i2 = KahanSum::new();
        let mut i3 = KahanSum::new();
        for d in &reps {
            risk_sum.add(d.total());
            risk_sq.add(d.total() * d.total());
            i1.add(d.i1);
            i2.add(d.i2);
            i3.add(d.i3);
        }
        let count = cfg.replicates as f64;
        let risk = risk_sum.value() / count;
        let stderr = if cfg.replicates > 1 {
            let var = ((risk_sq.value() - count * risk * risk) / (count - 1.0)).max(0.0);
            (var / count).sqrt()
        } else {
            0.0
        };
        let bound = theorem_bound(&ErrorBoundInputs::from_spec(
            &cfg.spec,
            cfg.noise.v_max,
            e_bound,
            cfg.beta,
            n,
            m,
        ))
        .total();
        rows.push(ExperimentRow {
            n,
            m,
            risk,
            stderr,
            mean_i1: i1.value() / count,
            mean_i2: i2.value() / count,
            mean_i3: i3.value() / count,
            bound,
        });
    }

    let slope = if rows.len() >= 2 && rows.iter().all(|r| r.risk > RISK_FLOOR) {
        let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.risk)).collect();
        Some(fit_rate(&points)?)
    } else {
        None
    };
    Ok(ExperimentResult { rows, slope })
}

/// Least-squares slope of ln risk against ln n.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument(
            "rate fit needs at least two points".into(),
        ));
    }
    if points.iter().any(|&(n, risk)| n <= 0.0 || risk <= 0.0) {
        return Err(Error::InvalidArgument(
            "rate fit needs positive sample counts and risks".into(),
        ));
    }
    let logs: Vec<(f64, f64)> = points
        .iter()
        .map(|&(n, risk)| (n.ln(), risk.ln()))
        .collect();
    let count = logs.len() as f64;
    let x_bar = logs.iter().map(|&(x, _)| x).sum::<f64>() / count;
    let y_bar = logs.iter().map(|&(_, y)| y).sum::<f64>() / count;
    let mut num = KahanSum::new();
    let mut den = KahanSum::new();
    for &(x, y) in &logs {
        num.add((x - x_bar) * (y - y_bar));
        den.add((x - x_bar) * (x - x_bar));
    }
    Ok(num.value() / den.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::TimeFactor;
    use crate::observation::SigmaMode;

    fn config(n_list: Vec<usize>, replicates: usize, v_max: f64) -> ExperimentConfig {
        let spec = ProblemSpec::new(0.5, 1.0, TimeFactor::Constant(1.0)).unwrap();
        let mut f = SpectralCoefficients::zeros(6);
        for p in 1..=6 {
            f.set(p, (p as f64).powf(-3.0));
        }
        ExperimentConfig {
            spec,
            f_true: f,
            beta: 2.0,
            noise: NoiseSpec::new(v_max, SigmaMode::Constant, 2026).unwrap(),
            n_list,
            replicates,
            zero_mode: ZeroMode::Consistent,
        }
    }

    #[test]
    fn rerun_is_bit_identical() {
        let cfg = config(vec![8, 16], 20, 0.1);
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 2);
        assert!(a.slope.is_some());
    }

    #[test]
    fn rows_satisfy_decomposition_domination_and_tail_monotonicity() {
        // n = 16 and 512 straddle the M = 1 -> 2 step of the truncation rule
        let cfg = config(vec![16, 512], 100, 0.05);
        let res = run_experiment(&cfg).unwrap();
        assert_eq!(res.rows[0].m, 1);
        assert_eq!(res.rows[1].m, 2);
        for row in &res.rows {
            assert_eq!(row.m, choose_m(row.n, cfg.beta));
            let split = row.mean_i1 + row.mean_i2 + row.mean_i3;
            assert!(
                (split - row.risk).abs() <= 1e-10,
                "n={}: split {split:.15e} vs risk {:.15e}",
                row.n,
                row.risk
            );
            assert!(row.risk <= row.bound + 3.0 * row.stderr);
            assert!(row.stderr > 0.0);
        }
        // the truncation part of the risk cannot grow once M does
        assert!(res.rows[1].mean_i2 <= res.rows[0].mean_i2);
    }

    #[test]
    fn noise_free_bandlimited_truth_flags_the_slope() {
        let mut cfg = config(vec![8, 16, 32], 3, 0.0);
        let mut f = SpectralCoefficients::zeros(1);
        f.set(0, 0.9);
        f.set(1, 0.5);
        cfg.f_true = f;
        let res = run_experiment(&cfg).unwrap();
        for row in &res.rows {
            assert!(row.risk <= 1e-12, "n={}: risk {:.3e}", row.n, row.risk);
        }
        assert_eq!(res.slope, None);
    }

    #[test]
    fn single_n_emits_a_row_without_a_slope() {
        let cfg = config(vec![32], 5, 0.1);
        let res = run_experiment(&cfg).unwrap();
        assert_eq!(res.rows.len(), 1);
        assert_eq!(res.slope, None);
        assert!(res.rows[0].risk > 0.0);
    }

    #[test]
    fn fit_rate_reference_cases() {
        let pow: Vec<(f64, f64)> = [256.0f64, 512.0, 1024.0, 2048.0]
            .iter()
            .map(|&n| (n, n.powf(-0.444)))
            .collect();
        assert!((fit_rate(&pow).unwrap() + 0.444).abs() <= 1e-12);

        let two = [(100.0, 0.5), (400.0, 0.125)];
        let want = (0.125f64.ln() - 0.5f64.ln()) / (400.0f64.ln() - 100.0f64.ln());
        assert!((fit_rate(&two).unwrap() - want).abs() <= 1e-15);

        let flat: Vec<(f64, f64)> = (1..=5).map(|k| ((k * k) as f64, 0.3)).collect();
        assert!(fit_rate(&flat).unwrap().abs() <= 1e-15);

        assert!(fit_rate(&[(8.0, 0.1)]).is_err());
        assert!(fit_rate(&[(8.0, 0.1), (16.0, 0.0)]).is_err());
    }

    #[test]
    fn bad_configs_are_rejected() {
        assert!(run_experiment(&config(vec![8, 16], 0, 0.1)).is_err());
        assert!(run_experiment(&config(vec![], 5, 0.1)).is_err());
        assert!(run_experiment(&config(vec![8, 8], 5, 0.1)).is_err());
        assert!(run_experiment(&config(vec![16, 8], 5, 0.1)).is_err());
        assert!(run_experiment(&config(vec![2, 8], 5, 0.1)).is_err());
        let mut cfg = config(vec![8, 16], 5, 0.1);
        cfg.beta = 0.0;
        assert!(run_experiment(&cfg).is_err());
    }
}
