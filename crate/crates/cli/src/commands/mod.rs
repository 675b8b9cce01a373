pub mod curves;
pub mod estimate;
pub mod fig2;
pub mod gaussian;
pub mod overfit;
pub mod spectral;

use std::path::PathBuf;

use christoffel::density::Thresholds;
use christoffel::gram::{GramSystem, JITTER_LADDER, LAMBDA_FLOOR, PROBE_RESIDUAL};
use christoffel::kernel::{Family, KernelSpec};
use christoffel::quad::{OscillatorySettings, Tolerance};
use christoffel::spectral::{SpectralProfile, D_REL_TOL, Q0_AGREEMENT, Q0_LIMIT_LAMBDA};
use clap::Args;
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::Artifacts;
use crate::options::{parse_positive, parse_sweep, Sweep};
use crate::CliError;

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ThresholdArgs {
    /// Slack factor on the inside and outside envelopes.
    #[arg(long, default_value_t = 10.0)]
    pub margin: f64,
    /// Smallest density the inside envelope accounts for.
    #[arg(long, default_value_t = 1e-2)]
    pub p_min: f64,
}

impl ThresholdArgs {
    pub fn build(&self) -> Result<Thresholds, CliError> {
        let t = Thresholds {
            margin: self.margin,
            p_min: self.p_min,
        };
        t.validate()?;
        Ok(t)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
#[group(required = true, multiple = false)]
pub struct LambdaArgs {
    /// A single regularization value.
    #[arg(long, value_parser = parse_positive)]
    pub lambda: Option<f64>,
    /// Geometric sweep `start:stop:count`, both ends included.
    #[arg(long, value_parser = parse_sweep)]
    pub lambda_sweep: Option<Sweep>,
}

impl LambdaArgs {
    pub fn values(&self) -> Vec<f64> {
        match (self.lambda, self.lambda_sweep) {
            (Some(l), _) => vec![l],
            (None, Some(s)) => s.values(),
            (None, None) => unreachable!("clap requires one of the two"),
        }
    }
}

pub fn tolerances() -> Value {
    let quad = Tolerance::default();
    let osc = OscillatorySettings::default();
    json!({
        "jitter_ladder": JITTER_LADDER,
        "probe_residual": PROBE_RESIDUAL,
        "lambda_floor": LAMBDA_FLOOR,
        "d_rel_tol": D_REL_TOL,
        "q0_limit_lambda": Q0_LIMIT_LAMBDA,
        "q0_agreement": Q0_AGREEMENT,
        "quadrature": { "abs": quad.abs, "rel": quad.rel, "max_intervals": quad.max_intervals },
        "oscillatory": { "abs_tol": osc.abs_tol, "max_pieces": osc.max_pieces },
    })
}

fn family_json(family: &Family) -> Value {
    match family {
        Family::Matern { nu, length } => json!({ "family": "matern", "nu": nu, "length": length }),
        Family::Gaussian { length } => json!({ "family": "gaussian", "length": length }),
        Family::RadialProfile { s, gamma, .. } => json!({ "family": "radial", "s": s, "gamma": gamma }),
        Family::Sum(a, b) => json!({ "family": "sum", "terms": [family_json(a.family()), family_json(b.family())] }),
    }
}

/// Records a kernel, with its `q₀` derivation when it has one.
pub fn record_kernel(art: &mut Artifacts, label: &str, kernel: &KernelSpec, profile: &SpectralProfile) {
    let q0 = profile.q0_report().ok().map(|r| {
        json!({
            "value": r.value(),
            "quadrature": r.quadrature,
            "closed_form": r.closed_form,
            "matern_formula": r.matern_formula,
            "limit": r.limit,
            "diagnostic": r.diagnostic,
        })
    });
    let sobolev = kernel.sobolev().map(|s| json!({ "s": s.s, "gamma": s.gamma }));
    art.kernels.push(json!({
        "label": label,
        "parameters": family_json(kernel.family()),
        "dim": kernel.dim(),
        "q_origin": kernel.q_origin(),
        "sobolev": sobolev,
        "q0": q0,
    }));
}

pub fn record_system(art: &mut Artifacts, label: &str, sys: &GramSystem) {
    art.systems.push(json!({
        "label": label,
        "n": sys.len(),
        "lambda": sys.lambda(),
        "jitter": sys.jitter(),
        "probe_residual": sys.probe_residual(),
    }));
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Count of values that are not positive and finite.
pub fn non_positive(values: &[f64]) -> usize {
    values.iter().filter(|v| !(v.is_finite() && **v > 0.0)).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let xs = [1e-4, 1e-3, 1e-2];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(0.75)).collect();
        assert!((log_slope(&xs, &ys) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn tolerances_are_recorded() {
        let t = tolerances();
        assert_eq!(t["probe_residual"], json!(1e-8));
        assert_eq!(t["jitter_ladder"].as_array().unwrap().len(), JITTER_LADDER.len());
    }
}
