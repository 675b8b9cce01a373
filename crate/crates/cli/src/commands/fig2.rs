use christoffel::densities::BuiltinDensity;
use christoffel::density::{annotate, estimate_density, rate_diagnostic};
use christoffel::gram::GramSystem;
use christoffel::kernel::KernelSpec;
use christoffel::spectral::SpectralProfile;
use clap::Args;
use serde::Serialize;
use serde_json::json;

use super::{log_slope, non_positive, record_kernel, record_system, OutArgs, ThresholdArgs};
use crate::output::{num, opt_num, Artifacts, Check, Table};
use crate::options::{linspace, parse_positive, parse_sweep, Sweep};
use crate::CliError;

/// Interior points are those where the true density is at least this.
const INTERIOR_P: f64 = 0.1;

#[derive(Debug, Clone, Args, Serialize)]
pub struct Fig2Args {
    /// Matérn smoothness values, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 1.5])]
    pub nu: Vec<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub length: f64,
    /// Riemann grid size on [-1, 1].
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    /// λ for the density-recovery panel.
    #[arg(long, value_parser = parse_positive, default_value = "1e-4")]
    pub lambda: f64,
    /// λ sweep for the rate panel.
    #[arg(long, value_parser = parse_sweep, default_value = "1e-5:1e-2:7")]
    pub lambda_sweep: Sweep,
    /// Number of query points on [-1, 1].
    #[arg(long, default_value_t = 201)]
    pub queries: usize,
    /// Points where the rate is tracked, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true,
          default_values_t = [-0.5, -0.25, 0.0, 0.25, 0.5])]
    pub rate_points: Vec<f64>,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

pub fn run(args: &Fig2Args) -> Result<Artifacts, CliError> {
    if args.nu.is_empty() || args.rate_points.is_empty() || args.queries < 2 {
        return Err(CliError::Usage("need at least one ν, one rate point and two queries".into()));
    }
    let density = BuiltinDensity::Sinusoidal;
    let thresholds = args.thresholds.build()?;
    let sample = density.riemann(args.n)?;
    let zs: Vec<Vec<f64>> = linspace(-1.0, 1.0, args.queries).into_iter().map(|z| vec![z]).collect();
    let rate_zs: Vec<Vec<f64>> = args.rate_points.iter().map(|&z| vec![z]).collect();
    let sweep = args.lambda_sweep.values();

    let mut art = Artifacts::default();
    let mut left = Table::new(&["nu", "lambda", "z", "p_true", "christoffel", "p_hat", "label"]);
    let mut right = Table::new(&["nu", "z", "p_true", "lambda", "christoffel", "rate"]);
    let mut bad_values = 0;
    let mut per_nu = Vec::new();

    for &nu in &args.nu {
        let kernel = KernelSpec::matern(nu, args.length, 1)?;
        let profile = SpectralProfile::new(&kernel)?;
        let label = format!("nu={nu}");
        record_kernel(&mut art, &label, &kernel, &profile);

        let sys = GramSystem::assemble(&kernel, &sample, args.lambda)?;
        record_system(&mut art, &label, &sys);
        let values = sys.christoffel_at_points(&zs)?;
        bad_values += non_positive(&values);
        let mut worst: f64 = 0.0;
        for (z, &c) in zs.iter().zip(&values) {
            let p = density.eval(z);
            let est = annotate(&profile, args.lambda, z, c, thresholds)?;
            if p >= INTERIOR_P {
                let p_hat = estimate_density(&profile, args.lambda, c)?;
                worst = worst.max((p_hat - p).abs() / p);
            }
            left.row(vec![
                num(nu),
                num(args.lambda),
                num(z[0]),
                num(p),
                num(c),
                opt_num(est.p_hat),
                est.label.as_str().into(),
            ]);
        }

        let mut rates = vec![Vec::with_capacity(sweep.len()); rate_zs.len()];
        for &lambda in &sweep {
            let s = sys.refit_lambda(lambda)?;
            record_system(&mut art, &label, &s);
            let cs = s.christoffel_at_points(&rate_zs)?;
            bad_values += non_positive(&cs);
            for (k, (z, &c)) in rate_zs.iter().zip(&cs).enumerate() {
                let p = density.eval(z);
                let rate = rate_diagnostic(&profile, lambda, c, p)?;
                rates[k].push(rate);
                right.row(vec![num(nu), num(z[0]), num(p), num(lambda), num(c), num(rate)]);
            }
        }
        let slopes: Vec<f64> = if sweep.len() > 1 {
            rates.iter().map(|r| log_slope(&sweep, r)).collect()
        } else {
            Vec::new()
        };
        per_nu.push(json!({
            "nu": nu,
            "max_interior_relative_error": worst,
            "rate_slopes": slopes,
        }));
    }

    art.note("density", density.name());
    art.note("interior_threshold", INTERIOR_P);
    art.note("per_nu", per_nu);
    art.check(Check::new(
        "christoffel_positive_finite",
        bad_values == 0,
        format!("{bad_values} non-positive or non-finite values"),
    ));
    art.file("fig2_left.csv", left);
    art.file("fig2_right.csv", right);
    Ok(art)
}
