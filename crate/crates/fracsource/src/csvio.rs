//! CSV persistence for every artifact the CLI produces or consumes.
//!
//! Shape shared by all files: optional `# key = value` metadata lines, one
//! header row, comma-separated data rows with `.` decimals. Floats are
//! written with 17 significant digits, which round-trips every f64 bit
//! pattern, so rereading a file loses nothing and rerunning a seeded
//! command reproduces output byte for byte.

use crate::error::{Error, Result};
use crate::estimator::Estimate;
use crate::experiment::ExperimentResult;
use crate::observation::Observations;
use crate::spectral::MidpointGrid;
use std::io::{BufRead, Write};

/// 17 significant digits (1 leading + 16 after the point).
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// `# key = value` prologue, written before the header row.
pub fn write_metadata(w: &mut dyn Write, pairs: &[(&str, String)]) -> Result<()> {
    for (key, value) in pairs {
        writeln!(w, "# {key} = {value}")?;
    }
    Ok(())
}

/// Two-column table of floats (forward samples, dense reconstructions).
pub fn write_xy<I>(w: &mut dyn Write, x_name: &str, y_name: &str, rows: I) -> Result<()>
where
    I: IntoIterator<Item = (f64, f64)>,
{
    writeln!(w, "{x_name},{y_name}")?;
    for (x, y) in rows {
        writeln!(w, "{},{}", fmt17(x), fmt17(y))?;
    }
    Ok(())
}

pub fn write_observations(w: &mut dyn Write, obs: &Observations) -> Result<()> {
    writeln!(w, "k,x_k,u_tilde,sigma")?;
    for k in 0..obs.len() {
        writeln!(
            w,
            "{k},{},{},{}",
            fmt17(obs.grid().node(k)),
            fmt17(obs.values()[k]),
            fmt17(obs.sigmas()[k])
        )?;
    }
    Ok(())
}

/// Parse an observations CSV written by [`write_observations`].
///
/// The row count fixes n; the x column must then match the n-point midpoint
/// grid (that grid is what the estimator's identities assume, so foreign
/// sampling layouts are rejected rather than silently misinterpreted). The
/// seed is picked up from the metadata when present.
pub fn read_observations(r: &mut dyn BufRead) -> Result<Observations> {
    let mut seed = 0u64;
    let mut header_seen = false;
    let mut ks = Vec::new();
    let mut xs = Vec::new();
    let mut values = Vec::new();
    let mut sigmas = Vec::new();

    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            if let Some((key, value)) = meta.split_once('=') {
                if key.trim() == "seed" {
                    seed = value.trim().parse().map_err(|_| {
                        Error::InvalidArgument(format!("line {}: bad seed metadata", idx + 1))
                    })?;
                }
            }
            continue;
        }
        if !header_seen {
            if line != "k,x_k,u_tilde,sigma" {
                return Err(Error::InvalidArgument(format!(
                    "expected header 'k,x_k,u_tilde,sigma', found '{line}'"
                )));
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::InvalidArgument(format!(
                "line {}: expected 4 fields, found {}",
                idx + 1,
                fields.len()
            )));
        }
        let bad =
            |what: &str| Error::InvalidArgument(format!("line {}: cannot parse {what}", idx + 1));
        ks.push(fields[0].parse::<usize>().map_err(|_| bad("index"))?);
        xs.push(fields[1].parse::<f64>().map_err(|_| bad("x_k"))?);
        values.push(fields[2].parse::<f64>().map_err(|_| bad("u_tilde"))?);
        sigmas.push(fields[3].parse::<f64>().map_err(|_| bad("sigma"))?);
    }
    if !header_seen {
        return Err(Error::InvalidArgument("observations CSV is empty".into()));
    }

    let n = ks.len();
    let grid = MidpointGrid::new(n)?;
    for (row, (&k, &x)) in ks.iter().zip(&xs).enumerate() {
        if k != row {
            return Err(Error::InvalidArgument(format!(
                "row {row}: indices must run 0..{}, found {k}",
                n - 1
            )));
        }
        let node = grid.node(k);
        if (x - node).abs() > 1e-12 * node.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "row {row}: x = {x} is not on the {n}-point midpoint grid"
            )));
        }
    }
    Observations::from_parts(grid, values, sigmas, seed)
}

pub fn write_estimate(w: &mut dyn Write, est: &Estimate) -> Result<()> {
    writeln!(w, "p,c_tilde")?;
    for p in 0..=est.truncation() {
        writeln!(w, "{p},{}", fmt17(est.coefficients().get(p)))?;
    }
    Ok(())
}

pub fn write_experiment(w: &mut dyn Write, res: &ExperimentResult) -> Result<()> {
    writeln!(w, "n,M,risk,stderr,I1,I2,I3,bound")?;
    for row in &res.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            row.n,
            row.m,
            fmt17(row.risk),
            fmt17(row.stderr),
            fmt17(row.mean_i1),
            fmt17(row.mean_i2),
            fmt17(row.mean_i3),
            fmt17(row.bound)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{ProblemSpec, TimeFactor};
    use crate::observation::{observe, NoiseSpec, SigmaMode};
    use crate::spectral::SpectralCoefficients;

    #[test]
    fn fmt17_round_trips_awkward_values() {
        let cases = [
            0.0,
            0.1,
            1.0 / 3.0,
            std::f64::consts::PI,
            1e-300,
            -2.5e17,
            f64::MIN_POSITIVE,
            (-1.0f64).exp(),
        ];
        for x in cases {
            let back: f64 = fmt17(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x} -> {}", fmt17(x));
        }
    }

    fn sample_observations() -> Observations {
        let spec = ProblemSpec::new(0.5, 1.0, TimeFactor::Constant(1.0)).unwrap();
        let mut f = SpectralCoefficients::zeros(3);
        f.set(0, 0.4);
        f.set(2, 1.1);
        let noise = NoiseSpec::new(0.2, SigmaMode::Uniform, 314).unwrap();
        observe(&spec, &f, 12, &noise).unwrap()
    }

    #[test]
    fn observations_survive_a_write_read_cycle_bitwise() {
        let obs = sample_observations();
        let mut buf = Vec::new();
        write_metadata(&mut buf, &[("seed", obs.seed().to_string())]).unwrap();
        write_observations(&mut buf, &obs).unwrap();

        let back = read_observations(&mut buf.as_slice()).unwrap();
        assert_eq!(back.len(), obs.len());
        assert_eq!(back.seed(), obs.seed());
        assert_eq!(back.values(), obs.values());
        assert_eq!(back.sigmas(), obs.sigmas());
    }

    #[test]
    fn reader_rejects_malformed_tables() {
        let obs = sample_observations();
        let mut good = Vec::new();
        write_observations(&mut good, &obs).unwrap();
        let good = String::from_utf8(good).unwrap();

        // header tampering
        let bad = good.replace("k,x_k,u_tilde,sigma", "k,x,u,s");
        assert!(read_observations(&mut bad.as_bytes()).is_err());
        // off-grid x value
        let bad = good.replace(&fmt17(obs.grid().node(3)), &fmt17(1.23456));
        assert!(read_observations(&mut bad.as_bytes()).is_err());
        // non-numeric noise level
        let bad = good.replace(&fmt17(obs.sigmas()[5]), "nan-ish");
        assert!(read_observations(&mut bad.as_bytes()).is_err());
        // shuffled index column
        let bad = good.replace("\n3,", "\n4,");
        assert!(read_observations(&mut bad.as_bytes()).is_err());
        // empty input
        assert!(read_observations(&mut "".as_bytes()).is_err());
    }

    #[test]
    fn estimate_and_xy_tables_have_the_declared_shape() {
        let spec = ProblemSpec::new(0.5, 1.0, TimeFactor::Constant(1.0)).unwrap();
        let obs = sample_observations();
        let est = crate::estimator::estimate(&obs, &spec, 4, Default::default()).unwrap();
        let mut buf = Vec::new();
        write_estimate(&mut buf, &est).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("p,c_tilde"));
        assert_eq!(lines.count(), 5);

        let mut buf = Vec::new();
        write_xy(&mut buf, "x", "f_tilde", [(0.0, 1.5), (0.5, -2.0)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "x,f_tilde\n0.0000000000000000e0,1.5000000000000000e0\n5.0000000000000000e-1,-2.0000000000000000e0\n"
        );
    }

    #[test]
    fn experiment_table_parses_back_numerically() {
        use crate::estimator::ZeroMode;
        use crate::experiment::{run_experiment, ExperimentConfig};
        let spec = ProblemSpec::new(0.5, 1.0, TimeFactor::Constant(1.0)).unwrap();
        let mut f = SpectralCoefficients::zeros(4);
        for p in 1..=4 {
            f.set(p, (p as f64).powf(-3.0));
        }
        let cfg = ExperimentConfig {
            spec,
            f_true: f,
            beta: 2.0,
            noise: NoiseSpec::new(0.1, SigmaMode::Constant, 9).unwrap(),
            n_list: vec![8, 16],
            replicates: 5,
            zero_mode: ZeroMode::Consistent,
        };
        let res = run_experiment(&cfg).unwrap();
        let mut buf = Vec::new();
        write_experiment(&mut buf, &res).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("n,M,risk,stderr,I1,I2,I3,bound"));
        for (line, row) in lines.zip(&res.rows) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 8);
            assert_eq!(fields[0].parse::<usize>().unwrap(), row.n);
            assert_eq!(
                fields[2].parse::<f64>().unwrap().to_bits(),
                row.risk.to_bits()
            );
            assert_eq!(
                fields[7].parse::<f64>().unwrap().to_bits(),
                row.bound.to_bits()
            );
        }
    }
}
