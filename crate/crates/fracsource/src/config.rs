//! Config file schema and loading.
//!
//! One TOML file describes a whole study; every subcommand reads the
//! sections it needs and ignores the rest, and the few runtime flags
//! (`--seed`, `--paper-literal`) override their config counterparts. The
//! loader also fingerprints the raw file bytes so result CSVs can record
//! exactly which configuration produced them.
//!
//! ```toml
//! [problem]
//! alpha = 0.5
//! t_final = 1.0
//!
//! [problem.factor]
//! kind = "constant"          # or "offset-sine" with offset/amplitude
//! value = 1.0
//!
//! [source]
//! kind = "power-decay"       # f_p = p^-exponent for p = 1..=max_mode
//! exponent = 3.0
//! max_mode = 16
//! # or: kind = "coefficients", values = [0.0, 1.0, 0.25, ...]
//!
//! [noise]
//! v_max = 0.1
//! sigma_mode = "constant"    # or "uniform"
//! seed = 2026
//!
//! [observe]
//! n = 64
//!
//! [forward]
//! nx = 128
//!
//! [estimate]
//! beta = 2.0                 # truncation by rule, or m = 4 explicitly
//! dense_nx = 256
//!
//! [experiment]
//! beta = 2.0
//! n_list = [256, 512, 1024]
//! replicates = 200
//! ```

use crate::error::{Error, Result};
use crate::estimator::{choose_m, ZeroMode};
use crate::experiment::ExperimentConfig;
use crate::forward::{ProblemSpec, TimeFactor};
use crate::observation::{NoiseSpec, SigmaMode};
use crate::spectral::SpectralCoefficients;
use serde::Deserialize;
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub problem: ProblemSection,
    pub source: Option<SourceSection>,
    pub noise: Option<NoiseSection>,
    pub observe: Option<ObserveSection>,
    pub forward: Option<ForwardSection>,
    pub estimate: Option<EstimateSection>,
    pub experiment: Option<ExperimentSection>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub alpha: f64,
    pub t_final: f64,
    pub factor: FactorSection,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FactorSection {
    Constant { value: f64 },
    OffsetSine { offset: f64, amplitude: f64 },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SourceSection {
    /// c_p listed from p = 0.
    Coefficients { values: Vec<f64> },
    /// f_p = p^-exponent for p = 1..=max_mode, zero mean.
    PowerDecay { exponent: f64, max_mode: usize },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub v_max: f64,
    pub sigma_mode: SigmaModeSection,
    pub seed: u64,
}

#[derive(Copy, Clone, Debug, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaModeSection {
    Constant,
    Uniform,
}

#[derive(Copy, Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserveSection {
    pub n: usize,
}

#[derive(Copy, Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForwardSection {
    /// u_T is written at x_i = i pi / nx for i = 0..=nx.
    pub nx: usize,
}

#[derive(Copy, Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateSection {
    /// Explicit truncation level; mutually exclusive with `beta`.
    pub m: Option<usize>,
    /// Smoothness index for the truncation rule M = floor(n^{1/(5+2 beta)}).
    pub beta: Option<f64>,
    /// Grid size for the optional dense reconstruction output.
    pub dense_nx: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub beta: f64,
    pub n_list: Vec<usize>,
    pub replicates: usize,
}

/// A parsed config plus the SHA-256 of the raw file bytes (hex), recorded
/// in output metadata so results stay traceable to their inputs.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: FileConfig,
    pub digest: String,
}

pub fn load(path: &Path) -> Result<LoadedConfig> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let digest = hex_digest(&bytes);
    let text = String::from_utf8(bytes)
        .map_err(|_| Error::Config(format!("{} is not UTF-8", path.display())))?;
    let config: FileConfig =
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    Ok(LoadedConfig { config, digest })
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in out {
        use std::fmt::Write;
        write!(hex, "{b:02x}").expect("writing to a String cannot fail");
    }
    hex
}

impl FileConfig {
    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        let factor = match self.problem.factor {
            FactorSection::Constant { value } => TimeFactor::Constant(value),
            FactorSection::OffsetSine { offset, amplitude } => {
                TimeFactor::OffsetSine { offset, amplitude }
            }
        };
        ProblemSpec::new(self.problem.alpha, self.problem.t_final, factor)
    }

    pub fn source(&self) -> Result<SpectralCoefficients> {
        let section = self
            .source
            .as_ref()
            .ok_or_else(|| Error::Config("missing [source] section".into()))?;
        match section {
            SourceSection::Coefficients { values } => {
                if values.is_empty() {
                    return Err(Error::Config("[source] values must not be empty".into()));
                }
                SpectralCoefficients::new(values.clone())
            }
            SourceSection::PowerDecay { exponent, max_mode } => {
                if !(exponent.is_finite() && *exponent > 0.0) {
                    return Err(Error::Config(format!(
                        "[source] exponent must be positive, got {exponent}"
                    )));
                }
                if *max_mode < 1 {
                    return Err(Error::Config(
                        "[source] power decay needs max_mode >= 1".into(),
                    ));
                }
                let mut f = SpectralCoefficients::zeros(*max_mode);
                for p in 1..=*max_mode {
                    f.set(p, (p as f64).powf(-exponent));
                }
                Ok(f)
            }
        }
    }

    /// Noise model, with the CLI seed taking precedence over the file's.
    pub fn noise_spec(&self, seed_override: Option<u64>) -> Result<NoiseSpec> {
        let section = self
            .noise
            .as_ref()
            .ok_or_else(|| Error::Config("missing [noise] section".into()))?;
        let mode = match section.sigma_mode {
            SigmaModeSection::Constant => SigmaMode::Constant,
            SigmaModeSection::Uniform => SigmaMode::Uniform,
        };
        NoiseSpec::new(section.v_max, mode, seed_override.unwrap_or(section.seed))
    }

    pub fn observe_n(&self) -> Result<usize> {
        Ok(self
            .observe
            .ok_or_else(|| Error::Config("missing [observe] section".into()))?
            .n)
    }

    pub fn forward_nx(&self) -> Result<usize> {
        let nx = self
            .forward
            .ok_or_else(|| Error::Config("missing [forward] section".into()))?
            .nx;
        if nx < 1 {
            return Err(Error::Config("[forward] nx must be at least 1".into()));
        }
        Ok(nx)
    }

    /// Truncation level for `estimate` on an n-point observation set:
    /// exactly one of `m` and `beta` must be present.
    pub fn estimate_m(&self, n: usize) -> Result<usize> {
        let section = self
            .estimate
            .ok_or_else(|| Error::Config("missing [estimate] section".into()))?;
        match (section.m, section.beta) {
            (Some(m), None) => Ok(m),
            (None, Some(beta)) => {
                if !(beta.is_finite() && beta > 0.0) {
                    return Err(Error::Config(format!(
                        "[estimate] beta must be positive, got {beta}"
                    )));
                }
                if n < 2 {
                    return Err(Error::Config(
                        "the truncation rule needs at least 2 samples".into(),
                    ));
                }
                Ok(choose_m(n, beta))
            }
            (Some(_), Some(_)) => Err(Error::Config(
                "[estimate] m and beta are mutually exclusive".into(),
            )),
            (None, None) => Err(Error::Config("[estimate] needs either m or beta".into())),
        }
    }

    pub fn dense_nx(&self) -> Option<usize> {
        self.estimate.and_then(|s| s.dense_nx)
    }

    /// Assemble the experiment description; `--seed` and `--paper-literal`
    /// arrive as overrides.
    pub fn experiment(
        &self,
        seed_override: Option<u64>,
        zero_mode: ZeroMode,
    ) -> Result<ExperimentConfig> {
        let section = self
            .experiment
            .as_ref()
            .ok_or_else(|| Error::Config("missing [experiment] section".into()))?;
        Ok(ExperimentConfig {
            spec: self.problem_spec()?,
            f_true: self.source()?,
            beta: section.beta,
            noise: self.noise_spec(seed_override)?,
            n_list: section.n_list.clone(),
            replicates: section.replicates,
            zero_mode,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
[problem]
alpha = 0.5
t_final = 1.0

[problem.factor]
kind = "offset-sine"
offset = 2.0
amplitude = 1.0

[source]
kind = "power-decay"
exponent = 3.0
max_mode = 16

[noise]
v_max = 0.1
sigma_mode = "constant"
seed = 2026

[observe]
n = 64

[forward]
nx = 32

[estimate]
beta = 2.0
dense_nx = 128

[experiment]
beta = 2.0
n_list = [256, 512]
replicates = 50
"#;

    fn parse(text: &str) -> Result<FileConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    #[test]
    fn full_example_parses_and_assembles() {
        let cfg = parse(FULL).unwrap();
        let spec = cfg.problem_spec().unwrap();
        assert_eq!(spec.alpha(), 0.5);
        assert_eq!(spec.r_lo(), 1.0);
        assert_eq!(spec.r_hi(), 3.0);

        let f = cfg.source().unwrap();
        assert_eq!(f.max_mode(), 16);
        assert_eq!(f.get(0), 0.0);
        assert_eq!(f.get(2), 0.125);

        assert_eq!(cfg.noise_spec(None).unwrap().seed, 2026);
        assert_eq!(cfg.noise_spec(Some(7)).unwrap().seed, 7);
        assert_eq!(cfg.observe_n().unwrap(), 64);
        assert_eq!(cfg.forward_nx().unwrap(), 32);
        // n = 64 with beta = 2 gives floor(64^{1/9}) = 1
        assert_eq!(cfg.estimate_m(64).unwrap(), 1);
        assert_eq!(cfg.dense_nx(), Some(128));

        let exp = cfg.experiment(None, ZeroMode::Consistent).unwrap();
        assert_eq!(exp.n_list, vec![256, 512]);
        assert_eq!(exp.replicates, 50);
        assert_eq!(exp.noise.seed, 2026);
    }

    #[test]
    fn explicit_coefficients_and_constant_factor() {
        let cfg = parse(
            r#"
[problem]
alpha = 0.7
t_final = 2.0

[problem.factor]
kind = "constant"
value = 1.5

[source]
kind = "coefficients"
values = [0.5, 1.0, -0.25]
"#,
        )
        .unwrap();
        assert_eq!(cfg.problem_spec().unwrap().r_hi(), 1.5);
        let f = cfg.source().unwrap();
        assert_eq!(f.as_slice(), &[0.5, 1.0, -0.25]);
    }

    #[test]
    fn unknown_keys_and_bad_variants_are_rejected() {
        assert!(parse(
            r#"
[problem]
alpha = 0.5
t_final = 1.0
typo = 3

[problem.factor]
kind = "constant"
value = 1.0
"#
        )
        .is_err());
        assert!(parse(
            r#"
[problem]
alpha = 0.5
t_final = 1.0

[problem.factor]
kind = "square-wave"
value = 1.0
"#
        )
        .is_err());
    }

    #[test]
    fn missing_sections_report_config_errors() {
        let cfg = parse(
            r#"
[problem]
alpha = 0.5
t_final = 1.0

[problem.factor]
kind = "constant"
value = 1.0
"#,
        )
        .unwrap();
        for err in [
            cfg.source().unwrap_err(),
            cfg.noise_spec(None).unwrap_err(),
            cfg.observe_n().unwrap_err(),
            cfg.forward_nx().unwrap_err(),
            cfg.estimate_m(16).unwrap_err(),
            cfg.experiment(None, ZeroMode::Consistent).unwrap_err(),
        ] {
            assert_eq!(err.exit_code(), 2, "{err}");
        }
    }

    #[test]
    fn estimate_m_requires_exactly_one_rule() {
        let base = |body: &str| {
            parse(&format!(
                r#"
[problem]
alpha = 0.5
t_final = 1.0

[problem.factor]
kind = "constant"
value = 1.0

[estimate]
{body}
"#
            ))
            .unwrap()
        };
        assert_eq!(base("m = 4").estimate_m(64).unwrap(), 4);
        assert_eq!(base("beta = 2.0").estimate_m(10000).unwrap(), 2);
        assert!(base("m = 4\nbeta = 2.0").estimate_m(64).is_err());
        assert!(base("dense_nx = 8").estimate_m(64).is_err());
    }

    #[test]
    fn digest_tracks_file_bytes() {
        assert_eq!(hex_digest(b"").len(), 64);
        // one changed byte must change the fingerprint
        assert_ne!(hex_digest(b"alpha = 0.5"), hex_digest(b"alpha = 0.6"));
        // frozen reference for the empty input
        assert_eq!(
            hex_digest(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
