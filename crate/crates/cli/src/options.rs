//! Parsers for the compact `kind:arg:arg` option syntax.

use std::path::PathBuf;
use std::str::FromStr;

use christoffel::densities::BuiltinDensity;
use christoffel::kernel::KernelSpec;
use christoffel::measure::{read_points_csv, WeightedSample};
use clap::{Args, ValueEnum};
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Matern,
    Gaussian,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KernelArgs {
    #[arg(long, value_enum, default_value = "matern")]
    pub kernel: KernelKind,
    /// Matérn smoothness ν.
    #[arg(long, default_value_t = 0.5)]
    pub nu: f64,
    /// Length scale l.
    #[arg(long, default_value_t = 1.0)]
    pub length: f64,
}

impl KernelArgs {
    pub fn build(&self, dim: usize) -> Result<KernelSpec, CliError> {
        Ok(match self.kernel {
            KernelKind::Matern => KernelSpec::matern(self.nu, self.length, dim)?,
            KernelKind::Gaussian => KernelSpec::gaussian(self.length, dim)?,
        })
    }
}

fn field<T: FromStr>(s: &str, what: &str) -> Result<T, String> {
    s.parse().map_err(|_| format!("cannot parse {what} from `{s}`"))
}

/// `start:stop:count`, geometric and inclusive at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let (a, b) = (self.start.ln(), self.stop.ln());
        (0..self.count)
            .map(|i| {
                if i == 0 {
                    self.start
                } else if i + 1 == self.count {
                    self.stop
                } else {
                    (a + (b - a) * i as f64 / (self.count - 1) as f64).exp()
                }
            })
            .collect()
    }
}

pub fn parse_sweep(s: &str) -> Result<Sweep, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err(format!("expected start:stop:count, got `{s}`"));
    };
    let sweep = Sweep {
        start: field(a, "sweep start")?,
        stop: field(b, "sweep stop")?,
        count: field(n, "sweep count")?,
    };
    if !(sweep.start > 0.0 && sweep.stop > 0.0 && sweep.start.is_finite() && sweep.stop.is_finite()) {
        return Err("sweep endpoints must be positive".into());
    }
    if sweep.count == 0 {
        return Err("sweep count must be at least 1".into());
    }
    Ok(sweep)
}

pub fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = field(s, "number")?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not a positive number"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MeasureSpec {
    Csv { path: PathBuf },
    Riemann { density: String, n: usize },
    Iid { density: String, n: usize, seed: u64 },
}

fn density_name(s: &str) -> Result<BuiltinDensity, String> {
    s.parse::<BuiltinDensity>().map_err(|e| e.to_string())
}

pub fn parse_measure(s: &str) -> Result<MeasureSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["csv", rest @ ..] if !rest.is_empty() => Ok(MeasureSpec::Csv {
            path: PathBuf::from(rest.join(":")),
        }),
        ["riemann", d, n] => {
            density_name(d)?;
            Ok(MeasureSpec::Riemann {
                density: d.to_string(),
                n: field(n, "node count")?,
            })
        }
        ["iid", d, n, seed] => {
            density_name(d)?;
            Ok(MeasureSpec::Iid {
                density: d.to_string(),
                n: field(n, "sample size")?,
                seed: field(seed, "seed")?,
            })
        }
        _ => Err(format!(
            "expected csv:PATH, riemann:DENSITY:n or iid:DENSITY:n:SEED, got `{s}`"
        )),
    }
}

impl MeasureSpec {
    pub fn build(&self) -> Result<WeightedSample, CliError> {
        match self {
            MeasureSpec::Csv { path } => Ok(WeightedSample::load_csv(path)?),
            MeasureSpec::Riemann { density, n } => {
                let d = density_name(density).map_err(CliError::Usage)?;
                let m = cells_per_axis(*n, d.dim())?;
                Ok(d.riemann(m)?)
            }
            MeasureSpec::Iid { density, n, seed } => {
                let d = density_name(density).map_err(CliError::Usage)?;
                Ok(WeightedSample::from_iid_sample(&d.sample(*n, *seed)?)?)
            }
        }
    }
}

fn cells_per_axis(n: usize, dim: usize) -> Result<usize, CliError> {
    let m = (n as f64).powf(1.0 / dim as f64).round() as usize;
    if m == 0 || m.pow(dim as u32) != n {
        return Err(CliError::Usage(format!(
            "a {dim}-dimensional Riemann grid needs a perfect {dim}-th power of nodes, got {n}"
        )));
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum QuerySpec {
    Csv { path: PathBuf },
    Grid { a: f64, b: f64, m: usize },
    AtSupport,
}

pub fn parse_queries(s: &str) -> Result<QuerySpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["at-support"] => Ok(QuerySpec::AtSupport),
        ["csv", rest @ ..] if !rest.is_empty() => Ok(QuerySpec::Csv {
            path: PathBuf::from(rest.join(":")),
        }),
        ["grid", a, b, m] => {
            let (a, b): (f64, f64) = (field(a, "grid start")?, field(b, "grid stop")?);
            let m: usize = field(m, "grid size")?;
            if !(a.is_finite() && b.is_finite()) || m == 0 {
                return Err(format!("bad grid `{s}`"));
            }
            Ok(QuerySpec::Grid { a, b, m })
        }
        _ => Err(format!("expected csv:PATH, grid:a:b:m or at-support, got `{s}`")),
    }
}

/// `m` equispaced values on `[a, b]`, endpoints included.
pub fn linspace(a: f64, b: f64, m: usize) -> Vec<f64> {
    if m == 1 {
        return vec![a];
    }
    (0..m)
        .map(|i| a + (b - a) * i as f64 / (m - 1) as f64)
        .collect()
}

impl QuerySpec {
    /// Query points, or `None` for the sample's own points.
    pub fn build(&self, dim: usize) -> Result<Option<Vec<Vec<f64>>>, CliError> {
        match self {
            QuerySpec::AtSupport => Ok(None),
            QuerySpec::Csv { path } => {
                let table = read_points_csv(path)?;
                if let Some(bad) = table.points.iter().find(|p| p.len() != dim) {
                    return Err(CliError::Usage(format!(
                        "query file has {} coordinates, the measure has {dim}",
                        bad.len()
                    )));
                }
                Ok(Some(table.points))
            }
            QuerySpec::Grid { a, b, m } => {
                let ticks = linspace(*a, *b, *m);
                let mut out: Vec<Vec<f64>> = vec![vec![]];
                for _ in 0..dim {
                    out = out
                        .into_iter()
                        .flat_map(|p| {
                            ticks.iter().map(move |&t| {
                                let mut q = p.clone();
                                q.push(t);
                                q
                            })
                        })
                        .collect();
                }
                Ok(Some(out))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweeps() {
        let s = parse_sweep("1e-5:1e-2:4").unwrap();
        let v = s.values();
        assert_eq!(v.len(), 4);
        assert_eq!(v[0], 1e-5);
        assert_eq!(v[3], 1e-2);
        assert!((v[1] / 1e-4 - 1.0).abs() < 1e-12);
        assert_eq!(parse_sweep("0.1:1:1").unwrap().values(), vec![0.1]);
        assert!(parse_sweep("0:1:3").is_err());
        assert!(parse_sweep("1:2").is_err());
        assert!(parse_sweep("1:2:0").is_err());
    }

    #[test]
    fn measures() {
        assert_eq!(
            parse_measure("riemann:sinusoidal:2000").unwrap(),
            MeasureSpec::Riemann {
                density: "sinusoidal".into(),
                n: 2000
            }
        );
        assert_eq!(
            parse_measure("iid:piecewise:10:42").unwrap(),
            MeasureSpec::Iid {
                density: "piecewise".into(),
                n: 10,
                seed: 42
            }
        );
        assert_eq!(
            parse_measure("csv:C:/data/x.csv").unwrap(),
            MeasureSpec::Csv {
                path: "C:/data/x.csv".into()
            }
        );
        assert!(parse_measure("riemann:triangle:10").is_err());
        assert!(parse_measure("grid:1").is_err());
        let ring = parse_measure("riemann:ring2d:2025").unwrap().build().unwrap();
        assert_eq!(ring.len(), 2025);
        assert!(parse_measure("riemann:ring2d:2000").unwrap().build().is_err());
    }

    #[test]
    fn query_grids() {
        let q = parse_queries("grid:-1:1:3").unwrap().build(2).unwrap().unwrap();
        assert_eq!(q.len(), 9);
        assert_eq!(q[1], vec![-1.0, 0.0]);
        assert_eq!(parse_queries("at-support").unwrap().build(1).unwrap(), None);
        assert!(parse_queries("grid:0:1:0").is_err());
    }
}
